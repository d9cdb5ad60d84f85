//! Decomposition of a weighted filtration into singletons and critical
//! length-two pieces with exact conservation of `P` and `μ`.
//!
//! Conservation of `P` and of `Σ α_s r_s` is automatic once weights are
//! conserved, so everything reduces to the identity `R_max(I) = Σ R_max(piece)`.
//! Each allowed pair `(i, j)` contributes the linear functional
//! `x ↦ Σ_u x_u ([u ≥ i] + [u ≥ j])`, and `R_max` is their maximum. The sum of
//! the pieces' maxima equals the maximum of the sum exactly when one pair
//! maximizes every piece at once, so every case below keeps each piece inside
//! the cone where the input's maximizing pair stays maximal.
//!
//! In case C (position 1 only pairs with `⊤`) the relevant pairs form a
//! frontier `(a_0, b_0) = (1, ⊤), (a_1, b_1), …, (a_q, b_q)` with `a`
//! increasing, `b` strictly decreasing and `a_p ≤ b_p`; all other allowed pairs
//! are dominated pointwise.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{validate_filtration, Index, ValidationReport, WeightedFiltration};
use crate::invariants::{self, suffix_sums};
use crate::pattern::{validate_pattern, VanishingPattern};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseLabel {
    /// Position 1 meets nothing: split it off.
    A,
    /// Position 1 pairs with a proper position: split off the last one.
    B,
    /// Some position has coefficient one in every frontier functional.
    C1,
    /// The maximizer sits strictly inside the frontier.
    C2,
    /// Maximizer at an end of the frontier: transport between head and tail,
    /// grouped into shorter pieces.
    C3,
    /// As C3 when one side has a single position: emit pairs directly.
    #[serde(rename = "C3-pair")]
    C3Pair,
    /// Non-critical length-two piece split into its singletons.
    #[serde(rename = "NC-split")]
    NcSplit,
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CaseLabel::A => "A",
            CaseLabel::B => "B",
            CaseLabel::C1 => "C1",
            CaseLabel::C2 => "C2",
            CaseLabel::C3 => "C3",
            CaseLabel::C3Pair => "C3-pair",
            CaseLabel::NcSplit => "NC-split",
        };
        f.write_str(s)
    }
}

/// A weighted subfiltration: increasing 1-based positions and one weight each.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub indices: Vec<usize>,
    pub weights: Vec<Rational>,
}

impl Piece {
    pub fn new(indices: Vec<usize>, weights: Vec<Rational>) -> Self {
        Piece { indices, weights }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn filtration(&self, f: &WeightedFiltration) -> WeightedFiltration {
        f.sub(&self.indices, &self.weights)
    }

    pub fn pattern(&self, m: &VanishingPattern) -> VanishingPattern {
        m.restrict(&self.indices)
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(|i| i.to_string()).collect();
        let w: Vec<String> = self.weights.iter().map(|w| w.to_string()).collect();
        write!(f, "{{{}}} ({})", idx.join(","), w.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitDecomposition {
    pub pieces: Vec<Piece>,
    pub trace: Vec<CaseLabel>,
}

/// Result of one splitting step; piece positions are relative to the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitStep {
    pub case: CaseLabel,
    pub pieces: Vec<Piece>,
}

pub fn induced_pattern(m: &VanishingPattern, subset: &[usize]) -> Result<VanishingPattern> {
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let t = m.len();
    if let Some(&bad) = subset.iter().find(|&&i| i == 0 || i > t) {
        return Err(Error::IndexOutOfRange { index: bad, len: t });
    }
    if subset.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::RankOrder("subset must be strictly increasing".into()));
    }
    Ok(m.restrict(subset))
}

/// Least `j` with `m[i][j] = 1`, or `None` for an all-zero row.
pub fn min_partner(m: &VanishingPattern, i: Index) -> Option<Index> {
    let t = m.len();
    let row = i.row(t);
    (0..=t).find(|&j| m.raw(row, j)).map(|j| Index::from_row(j, t))
}

fn ensure_inputs(f: &WeightedFiltration, m: &VanishingPattern) -> Result<()> {
    let report = validate_filtration(f);
    if !report.is_valid() {
        return Err(Error::InvalidFiltration(report));
    }
    if m.size() != f.len() + 1 {
        return Err(Error::SizeMismatch { pattern: m.size(), expected: f.len() + 1 });
    }
    let report = validate_pattern(m);
    if !report.is_valid() {
        return Err(Error::InvalidPattern(report));
    }
    Ok(())
}

/// Zero-based partner rows; `t` stands for `⊤`, `usize::MAX` for an empty row.
fn partner_rows(m: &VanishingPattern) -> Vec<usize> {
    let t = m.len();
    (0..t).map(|i| (0..=t).find(|&j| m.raw(i, j)).unwrap_or(usize::MAX)).collect()
}

fn range(lo: usize, hi: usize) -> Vec<usize> {
    (lo..hi).collect()
}

fn piece_from_rows(rows: &[usize], weights: &[Rational]) -> Piece {
    Piece::new(rows.iter().map(|&r| r + 1).collect(), rows.iter().map(|&r| weights[r]).collect())
}

/// The frontier of the partner staircase when row 0 pairs only with `⊤`.
fn frontier(partner: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, &j) in partner.iter().enumerate() {
        let block_start = i == 0 || j < partner[i - 1];
        if block_start && i <= j {
            out.push((i, j));
        }
    }
    out
}

/// Transport of tail mass into head mass along nested prefixes.
///
/// Each demand `d` (processed in the given order) may only draw from supplies
/// at positions `< limit(d)`; supplies are consumed lowest position first.
/// Returns `(supply, demand, amount)` triples.
fn nested_transport(
    supplies: &[(usize, Rational)],
    demands: &[(usize, Rational)],
    limit: impl Fn(usize) -> usize,
) -> Result<Vec<(usize, usize, Rational)>> {
    let mut remaining: Vec<Rational> = supplies.iter().map(|&(_, a)| a).collect();
    let mut flows = Vec::new();
    for &(d, need) in demands {
        let mut need = need;
        for (slot, &(s, _)) in supplies.iter().enumerate() {
            if need.is_zero() {
                break;
            }
            if s >= limit(d) || remaining[slot].is_zero() {
                continue;
            }
            let take = need.min(remaining[slot]);
            remaining[slot] -= take;
            need -= take;
            flows.push((s, d, take));
        }
        if !need.is_zero() {
            return Err(Error::SplitInvariant(format!("transport infeasible: {need} of position {} unmatched", d + 1)));
        }
    }
    Ok(flows)
}

/// One step of the splitting algorithm on a filtration of length ≥ 3.
pub fn split_step(f: &WeightedFiltration, m: &VanishingPattern) -> Result<SplitStep> {
    ensure_inputs(f, m)?;
    let t = f.len();
    if t < 3 {
        return Err(Error::SplitInvariant(format!("split_step needs length >= 3, got {t}")));
    }
    let step = split_step_raw(&f.weights, m)?;
    check_step(f, m, &step)?;
    Ok(step)
}

fn check_step(f: &WeightedFiltration, m: &VanishingPattern, step: &SplitStep) -> Result<()> {
    let dec = SplitDecomposition { pieces: step.pieces.clone(), trace: vec![step.case] };
    let report = verify_conservation(f, m, &dec);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::SplitInvariant(format!("case {}: {report}", step.case)))
    }
}

fn split_step_raw(weights: &[Rational], m: &VanishingPattern) -> Result<SplitStep> {
    let t = weights.len();
    let partner = partner_rows(m);

    // A: row 1 is zero.
    if partner[0] == usize::MAX {
        return Ok(SplitStep {
            case: CaseLabel::A,
            pieces: vec![piece_from_rows(&[0], weights), piece_from_rows(&range(1, t), weights)],
        });
    }
    // B: row 1 meets a proper position, hence so does row t with itself.
    if partner[0] < t {
        return Ok(SplitStep {
            case: CaseLabel::B,
            pieces: vec![piece_from_rows(&range(0, t - 1), weights), piece_from_rows(&[t - 1], weights)],
        });
    }

    // C: row 1 pairs only with ⊤, so every row is nonempty.
    let sums = suffix_sums(weights);
    let score = |i: usize| sums[i] + sums[partner[i]];
    let mut k = 0;
    for i in 1..t {
        if score(i) > score(k) {
            k = i;
        }
    }
    let front = frontier(&partner);
    let kappa = front
        .iter()
        .position(|&(a, _)| a == k)
        .ok_or_else(|| Error::SplitInvariant(format!("maximizer {} is not a frontier point", k + 1)))?;
    let q = front.len() - 1;
    let (a_q, b_q) = front[q];

    // C1: positions with coefficient one in every frontier functional.
    let missing: Vec<usize> = if q == 0 { range(0, t) } else { range(a_q, b_q) };
    if let Some(&u) = missing.first() {
        let rest: Vec<usize> = (0..t).filter(|&i| i != u).collect();
        return Ok(SplitStep {
            case: CaseLabel::C1,
            pieces: vec![piece_from_rows(&rest, weights), piece_from_rows(&[u], weights)],
        });
    }

    let (a_k, b_k) = front[kappa];
    if 0 < kappa && kappa < q {
        let j: Vec<usize> = range(0, a_k).into_iter().chain(range(b_k, t)).collect();
        let j_prime: Vec<usize> = range(a_k, a_q).into_iter().chain(range(b_q, b_k)).collect();
        return Ok(SplitStep {
            case: CaseLabel::C2,
            pieces: vec![piece_from_rows(&j, weights), piece_from_rows(&j_prime, weights)],
        });
    }

    // C3: head [0, c) and tail [c, t) with c = a_q = b_q.
    let c = a_q;
    let level = |s: usize| front.iter().rposition(|&(a, _)| a <= s).expect("a_0 = 0");
    let rank = |u: usize| front.iter().position(|&(_, b)| b <= u).expect("b_q <= u");
    // Compatible partners of level ℓ are exactly the positions before a_{ℓ+1}
    // (forward) or b_ℓ (mirrored).
    let head: Vec<usize> = range(0, c);
    let tail: Vec<usize> = range(c, t);

    if kappa == 0 {
        // Maximizer (1, ⊤): tail mass must be carried by head mass.
        let supplies: Vec<(usize, Rational)> = head.iter().map(|&s| (s, weights[s])).collect();
        let demands: Vec<(usize, Rational)> = tail.iter().rev().map(|&u| (u, weights[u])).collect();
        let flows = nested_transport(&supplies, &demands, |u| front[rank(u)].0)?;
        debug_assert!(flows.iter().all(|&(s, u, _)| level(s) < rank(u)));
        if head.len() == 1 {
            let s = head[0];
            let mut pieces = Vec::new();
            let mut used = Rational::ZERO;
            for &u in &tail {
                let w: Rational = flows.iter().filter(|f| f.1 == u).map(|f| f.2).sum();
                used += w;
                pieces.push(Piece::new(vec![s + 1, u + 1], vec![w, w]));
            }
            let left = weights[s] - used;
            if left.is_positive() {
                pieces.push(Piece::new(vec![s + 1], vec![left]));
            }
            return Ok(SplitStep { case: CaseLabel::C3Pair, pieces });
        }
        let pieces = head
            .iter()
            .map(|&s| {
                let mut idx = vec![s + 1];
                let mut w = vec![weights[s]];
                for &u in &tail {
                    let amount: Rational = flows.iter().filter(|f| f.0 == s && f.1 == u).map(|f| f.2).sum();
                    if amount.is_positive() {
                        idx.push(u + 1);
                        w.push(amount);
                    }
                }
                Piece::new(idx, w)
            })
            .collect();
        return Ok(SplitStep { case: CaseLabel::C3, pieces });
    }

    // kappa == q: maximizer (c, c); head mass must be carried by tail mass.
    let supplies: Vec<(usize, Rational)> = tail.iter().map(|&u| (u, weights[u])).collect();
    let demands: Vec<(usize, Rational)> = head.iter().rev().map(|&s| (s, weights[s])).collect();
    let flows = nested_transport(&supplies, &demands, |s| front[level(s)].1)?;
    debug_assert!(flows.iter().all(|&(u, s, _)| level(s) < rank(u)));
    if tail.len() == 1 {
        let u = tail[0];
        let mut pieces = Vec::new();
        let mut used = Rational::ZERO;
        for &s in &head {
            let w: Rational = flows.iter().filter(|f| f.1 == s).map(|f| f.2).sum();
            used += w;
            pieces.push(Piece::new(vec![s + 1, u + 1], vec![w, w]));
        }
        let left = weights[u] - used;
        if left.is_positive() {
            pieces.push(Piece::new(vec![u + 1], vec![left]));
        }
        return Ok(SplitStep { case: CaseLabel::C3Pair, pieces });
    }
    let pieces = tail
        .iter()
        .map(|&u| {
            let mut idx = Vec::new();
            let mut w = Vec::new();
            for &s in &head {
                let amount: Rational = flows.iter().filter(|f| f.0 == u && f.1 == s).map(|f| f.2).sum();
                if amount.is_positive() {
                    idx.push(s + 1);
                    w.push(amount);
                }
            }
            idx.push(u + 1);
            w.push(weights[u]);
            Piece::new(idx, w)
        })
        .collect();
    Ok(SplitStep { case: CaseLabel::C3, pieces })
}

/// Recursively split until every piece has length ≤ 2 and every pair is critical.
pub fn split_full(f: &WeightedFiltration, m: &VanishingPattern) -> Result<SplitDecomposition> {
    ensure_inputs(f, m)?;
    let mut pieces = Vec::new();
    let mut trace = Vec::new();
    let root = Piece::new((1..=f.len()).collect(), f.weights.clone());
    let mut stack = vec![root];
    while let Some(piece) = stack.pop() {
        match piece.len() {
            1 => pieces.push(piece),
            2 => {
                let sub = piece.filtration(f);
                let pat = piece.pattern(m);
                if invariants::is_critical_raw(&sub, &pat) {
                    pieces.push(piece);
                } else {
                    trace.push(CaseLabel::NcSplit);
                    pieces.push(Piece::new(vec![piece.indices[0]], vec![piece.weights[0]]));
                    pieces.push(Piece::new(vec![piece.indices[1]], vec![piece.weights[1]]));
                }
            }
            _ => {
                let sub = piece.filtration(f);
                let pat = piece.pattern(m);
                let step = split_step_raw(&sub.weights, &pat)?;
                check_step(&sub, &pat, &step)?;
                trace.push(step.case);
                // Children map back to original positions; push in reverse so
                // they are processed depth-first in order.
                for child in step.pieces.into_iter().rev() {
                    let indices = child.indices.iter().map(|&i| piece.indices[i - 1]).collect();
                    stack.push(Piece::new(indices, child.weights));
                }
            }
        }
    }
    Ok(SplitDecomposition { pieces, trace })
}

/// Weight, `P` and `μ` conservation only.
fn verify_conservation(f: &WeightedFiltration, m: &VanishingPattern, dec: &SplitDecomposition) -> ValidationReport {
    let mut report = ValidationReport::default();
    let t = f.len();
    let mut totals = vec![Rational::ZERO; t];
    let mut well_formed = true;
    for (n, piece) in dec.pieces.iter().enumerate() {
        if piece.indices.is_empty() || piece.indices.len() != piece.weights.len() {
            report.push(format!("piece {n} is malformed"));
            well_formed = false;
            continue;
        }
        if piece.indices.iter().any(|&i| i == 0 || i > t) || piece.indices.windows(2).any(|w| w[0] >= w[1]) {
            report.push(format!("piece {n} has invalid positions {:?}", piece.indices));
            well_formed = false;
            continue;
        }
        if piece.weights.iter().any(|w| !w.is_positive()) {
            report.push(format!("piece {n} has a nonpositive weight"));
            well_formed = false;
        }
        for (&i, &w) in piece.indices.iter().zip(&piece.weights) {
            totals[i - 1] += w;
        }
    }
    for (i, (total, alpha)) in totals.iter().zip(&f.weights).enumerate() {
        if total != alpha {
            report.push(format!("weight conservation fails at position {}: {total} != {alpha}", i + 1));
        }
    }
    if !well_formed {
        return report;
    }
    let (mut p_sum, mut mu_sum) = (Rational::ZERO, Rational::ZERO);
    for piece in &dec.pieces {
        let sub = piece.filtration(f);
        let pat = piece.pattern(m);
        match (invariants::p_value(&sub), invariants::mu_value(&sub, &pat)) {
            (Ok(p), Ok(mu)) => {
                p_sum += p;
                mu_sum += mu;
            }
            (Err(e), _) | (_, Err(e)) => report.push(format!("piece {piece} cannot be evaluated: {e}")),
        }
    }
    match (invariants::p_value(f), invariants::mu_value(f, m)) {
        (Ok(p), Ok(mu)) => {
            if p_sum != p {
                report.push(format!("P conservation fails: {p_sum} != {p}"));
            }
            if mu_sum != mu {
                report.push(format!("mu conservation fails: {mu_sum} != {mu}"));
            }
        }
        (Err(e), _) | (_, Err(e)) => report.push(format!("input cannot be evaluated: {e}")),
    }
    report
}

/// Independent check of a decomposition: weight, `P` and `μ` conservation,
/// piece length ≤ 2, and criticality of every pair.
pub fn verify_decomposition(
    f: &WeightedFiltration,
    m: &VanishingPattern,
    dec: &SplitDecomposition,
) -> ValidationReport {
    let mut report = verify_conservation(f, m, dec);
    for piece in &dec.pieces {
        if piece.len() > 2 {
            report.push(format!("piece {piece} is longer than 2"));
        } else if piece.len() == 2 && piece.weights.iter().all(|w| w.is_positive()) {
            let sub = piece.filtration(f);
            let pat = piece.pattern(m);
            if !matches!(invariants::is_critical(&sub, &pat), Ok(true)) {
                report.push(format!("pair {piece} is not critical"));
            }
        }
    }
    report
}
