//! Semistability verdicts over a finite catalog of subbundles.
//!
//! Every margin that occurs is affine in δ (weight-one chains have fixed `P`
//! and `μ`), so margins are stored as `constant + δ · slope` and verdicts,
//! walls and comparisons all work from that form.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{ValidationReport, WeightedFiltration};
use crate::invariants;
use crate::par::{self, Execution};
use crate::pattern::{k_value, KValue, VanishingPattern};
use crate::rational::Rational;

pub const AMBIENT: &str = "AMBIENT";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Element {
    pub id: String,
    pub rank: usize,
    pub degree: i64,
}

impl Element {
    pub fn new(id: impl Into<String>, rank: usize, degree: i64) -> Self {
        Element { id: id.into(), rank, degree }
    }
}

/// Elements, a strict containment order (stored transitively closed) and a
/// symmetric vanishing table whose last row and column are the ambient bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubbundleCatalog {
    pub ambient_rank: usize,
    pub ambient_degree: i64,
    elements: Vec<Element>,
    less: Vec<Vec<bool>>,
    vanish: Vec<Vec<bool>>,
}

fn transitive_closure(mut rel: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
    let n = rel.len();
    for k in 0..n {
        for i in 0..n {
            if rel[i][k] {
                for j in 0..n {
                    if rel[k][j] {
                        rel[i][j] = true;
                    }
                }
            }
        }
    }
    rel
}

impl SubbundleCatalog {
    /// Builds from id pairs. Containment pairs are generators and get closed
    /// transitively; vanishing pairs are unordered and taken as listed.
    pub fn new(
        ambient_rank: usize,
        ambient_degree: i64,
        elements: Vec<Element>,
        containment: &[(String, String)],
        vanishing: &[(String, String)],
    ) -> Result<Self> {
        let mut report = ValidationReport::default();
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            if e.id.is_empty() || e.id == AMBIENT {
                report.push(format!("element id {:?} is reserved or empty", e.id));
            }
            if ids.insert(e.id.as_str(), i).is_some() {
                report.push(format!("duplicate element id {:?}", e.id));
            }
        }
        let n = elements.len();
        let lookup = |id: &str, allow_ambient: bool, report: &mut ValidationReport| -> Option<usize> {
            if allow_ambient && id == AMBIENT {
                return Some(n);
            }
            let found = ids.get(id).copied();
            if found.is_none() {
                report.push(format!("unknown element {id:?}"));
            }
            found
        };
        let mut less = vec![vec![false; n]; n];
        for (a, b) in containment {
            if b == AMBIENT {
                continue;
            }
            if let (Some(i), Some(j)) = (lookup(a, false, &mut report), lookup(b, false, &mut report)) {
                less[i][j] = true;
            }
        }
        let mut vanish = vec![vec![false; n + 1]; n + 1];
        for (a, b) in vanishing {
            if let (Some(i), Some(j)) = (lookup(a, true, &mut report), lookup(b, true, &mut report)) {
                vanish[i][j] = true;
                vanish[j][i] = true;
            }
        }
        if !report.is_valid() {
            return Err(Error::InvalidCatalog(report));
        }
        Self::from_tables(ambient_rank, ambient_degree, elements, transitive_closure(less), vanish)
    }

    /// Builds from generator tables: `less` is closed transitively and
    /// `vanish` upward along the closed order.
    pub fn closed(
        ambient_rank: usize,
        ambient_degree: i64,
        elements: Vec<Element>,
        less: Vec<Vec<bool>>,
        vanish: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let mut cat =
            SubbundleCatalog { ambient_rank, ambient_degree, elements, less: transitive_closure(less), vanish };
        cat.vanish = cat.vanishing_closure();
        let report = cat.validate();
        if report.is_valid() {
            Ok(cat)
        } else {
            Err(Error::InvalidCatalog(report))
        }
    }

    /// Builds from dense tables (`less` must already be transitive).
    pub fn from_tables(
        ambient_rank: usize,
        ambient_degree: i64,
        elements: Vec<Element>,
        less: Vec<Vec<bool>>,
        vanish: Vec<Vec<bool>>,
    ) -> Result<Self> {
        let cat = SubbundleCatalog { ambient_rank, ambient_degree, elements, less, vanish };
        let report = cat.validate();
        if report.is_valid() {
            Ok(cat)
        } else {
            Err(Error::InvalidCatalog(report))
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.elements.len();
        let r = self.ambient_rank;
        if r == 0 {
            report.push("ambient rank must be positive");
        }
        if self.less.len() != n || self.less.iter().any(|row| row.len() != n) {
            report.push("containment table has the wrong shape");
            return report;
        }
        if self.vanish.len() != n + 1 || self.vanish.iter().any(|row| row.len() != n + 1) {
            report.push("vanishing table has the wrong shape");
            return report;
        }
        for e in &self.elements {
            if e.rank == 0 || e.rank >= r {
                report.push(format!("rank of {} is {} outside [1, {}]", e.id, e.rank, r.saturating_sub(1)));
            }
        }
        for i in 0..n {
            if self.less[i][i] {
                report.push(format!("containment cycle through {}", self.elements[i].id));
            }
            for j in 0..n {
                if self.less[i][j] && self.elements[i].rank >= self.elements[j].rank {
                    report.push(format!(
                        "{} < {} but ranks {} >= {}",
                        self.elements[i].id, self.elements[j].id, self.elements[i].rank, self.elements[j].rank
                    ));
                }
                for k in 0..n {
                    if self.less[i][j] && self.less[j][k] && !self.less[i][k] {
                        report.push("containment is not transitive");
                    }
                }
            }
        }
        for i in 0..=n {
            for j in 0..i {
                if self.vanish[i][j] != self.vanish[j][i] {
                    report.push(format!("vanishing symmetry broken at ({}, {})", self.name(i), self.name(j)));
                }
            }
        }
        if self.vanish != self.vanishing_closure() {
            report.push("vanishing table not monotone along containment");
        }
        if !self.is_undecorated() && !self.vanish[n][n] {
            report.push("ambient entry must be 1");
        }
        report
    }

    /// Smallest symmetric table containing this one and closed upward in
    /// each argument (every element sits below the ambient bundle).
    pub fn vanishing_closure(&self) -> Vec<Vec<bool>> {
        let n = self.elements.len();
        let le = |a: usize, b: usize| a == b || b == n || (a < n && self.less[a][b]);
        let mut out = vec![vec![false; n + 1]; n + 1];
        for a in 0..=n {
            for b in 0..=n {
                if !(self.vanish[a][b] || self.vanish[b][a]) {
                    continue;
                }
                for x in 0..=n {
                    if !le(a, x) {
                        continue;
                    }
                    for y in 0..=n {
                        if le(b, y) {
                            out[x][y] = true;
                            out[y][x] = true;
                        }
                    }
                }
            }
        }
        out
    }

    /// A table that is zero everywhere describes a plain bundle.
    pub fn is_undecorated(&self) -> bool {
        self.vanish.iter().all(|row| row.iter().all(|&b| !b))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn index_of(&self, id: &str) -> Result<usize> {
        self.elements.iter().position(|e| e.id == id).ok_or_else(|| Error::UnknownElement(id.to_string()))
    }

    /// Id of table row `i`, with the last row spelled `AMBIENT`.
    pub fn name(&self, i: usize) -> &str {
        if i == self.elements.len() {
            AMBIENT
        } else {
            &self.elements[i].id
        }
    }

    pub fn less(&self, i: usize, j: usize) -> bool {
        self.less[i][j]
    }

    /// Vanishing bit; index `len()` is the ambient bundle.
    pub fn vanish(&self, i: usize, j: usize) -> bool {
        self.vanish[i][j]
    }

    pub fn less_table(&self) -> &[Vec<bool>] {
        &self.less
    }

    pub fn vanish_table(&self) -> &[Vec<bool>] {
        &self.vanish
    }

    pub fn k(&self, i: usize) -> KValue {
        let n = self.elements.len();
        k_value(self.vanish[i][i], self.vanish[i][n]).expect("validated catalog is monotone")
    }

    /// Covering pairs of the containment order, by element order.
    pub fn containment_pairs(&self) -> Vec<(String, String)> {
        let n = self.elements.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let covered = (0..n).any(|k| self.less[i][k] && self.less[k][j]);
                if self.less[i][j] && !covered {
                    out.push((self.elements[i].id.clone(), self.elements[j].id.clone()));
                }
            }
        }
        out
    }

    /// Nonzero vanishing entries with `i <= j`.
    pub fn vanishing_pairs(&self) -> Vec<(String, String)> {
        let n = self.elements.len();
        let mut out = Vec::new();
        for i in 0..=n {
            for j in i..=n {
                if self.vanish[i][j] {
                    out.push((self.name(i).to_string(), self.name(j).to_string()));
                }
            }
        }
        out
    }

    pub fn chain_filtration(&self, chain: &[usize]) -> WeightedFiltration {
        WeightedFiltration::unit(
            self.ambient_rank,
            self.ambient_degree,
            chain.iter().map(|&i| self.elements[i].rank).collect(),
            chain.iter().map(|&i| self.elements[i].degree).collect(),
        )
    }

    pub fn chain_pattern(&self, chain: &[usize]) -> VanishingPattern {
        let rows: Vec<usize> = chain.iter().copied().chain(std::iter::once(self.elements.len())).collect();
        VanishingPattern::from_bits(rows.iter().map(|&a| rows.iter().map(|&b| self.vanish[a][b]).collect()).collect())
    }

    /// Same catalog with each element's degree replaced, and a new ambient degree.
    pub fn with_degrees(&self, ambient_degree: i64, degrees: &[i64]) -> SubbundleCatalog {
        let elements = self.elements.iter().zip(degrees).map(|(e, &d)| Element { degree: d, ..e.clone() }).collect();
        SubbundleCatalog { ambient_degree, elements, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Subbundle(String),
    CriticalPair(String, String),
    Chain(Vec<String>),
}

impl Witness {
    pub fn ids(&self) -> Vec<&str> {
        match self {
            Witness::Subbundle(a) => vec![a],
            Witness::CriticalPair(a, b) => vec![a, b],
            Witness::Chain(ids) => ids.iter().map(String::as_str).collect(),
        }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Subbundle(a) => write!(f, "{a}"),
            Witness::CriticalPair(a, b) => write!(f, "({a}, {b})"),
            Witness::Chain(ids) => write!(f, "[{}]", ids.join(", ")),
        }
    }
}

/// `constant + δ · slope` attached to its witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Margin {
    pub witness: Witness,
    pub constant: Rational,
    pub slope: Rational,
}

impl Margin {
    pub fn at(&self, delta: Rational) -> Rational {
        self.constant + delta * self.slope
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    Stable,
    StrictlySemistable,
    Unstable,
}

impl StabilityClass {
    pub fn from_margin(m: Rational) -> Self {
        match m.signum() {
            Ordering::Greater => StabilityClass::Stable,
            Ordering::Equal => StabilityClass::StrictlySemistable,
            Ordering::Less => StabilityClass::Unstable,
        }
    }

    pub fn is_semistable(self) -> bool {
        self != StabilityClass::Unstable
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityClass::Stable => "stable",
            StabilityClass::StrictlySemistable => "strictly_semistable",
            StabilityClass::Unstable => "unstable",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub class: StabilityClass,
    pub witness: Option<Witness>,
    pub margin: Option<Rational>,
}

/// Minimal margin at `delta`; ties go to the lexicographically smallest witness.
pub fn verdict_from_margins(margins: &[Margin], delta: Rational) -> Verdict {
    let best = margins
        .iter()
        .map(|m| (m.at(delta), m))
        .min_by(|(a, ma), (b, mb)| a.cmp(b).then_with(|| ma.witness.ids().cmp(&mb.witness.ids())));
    match best {
        None => Verdict { class: StabilityClass::Stable, witness: None, margin: None },
        Some((value, m)) => {
            Verdict { class: StabilityClass::from_margin(value), witness: Some(m.witness.clone()), margin: Some(value) }
        }
    }
}

fn ensure_delta(delta: Rational) -> Result<()> {
    if delta.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositiveDelta(delta.to_string()))
    }
}

fn subbundle_affine(r: usize, d: i64, r_f: usize, d_f: i64, k: KValue) -> (Rational, Rational) {
    let (r, r_f) = (r as i64, r_f as i64);
    (Rational::from(d * r_f - r * d_f), Rational::from(r * k.value() - 2 * r_f))
}

fn pair_affine(r: usize, d: i64, (r_i, d_i): (usize, i64), (r_j, d_j): (usize, i64)) -> (Rational, Rational) {
    let (r, s) = (r as i64, (r_i + r_j) as i64);
    (Rational::from(s * d - r * (d_i + d_j)), Rational::from(-2 * (s - r)))
}

/// `(d r_F − r d_F) + δ (r k − 2 r_F)`.
pub fn subbundle_margin(r: usize, d: i64, r_f: usize, d_f: i64, k: KValue, delta: Rational) -> Result<Rational> {
    ensure_delta(delta)?;
    if r_f == 0 || r_f >= r {
        return Err(Error::RankOrder(format!("need 1 <= r_F < r, got r_F={r_f}, r={r}")));
    }
    let (a, b) = subbundle_affine(r, d, r_f, d_f, k);
    Ok(a + delta * b)
}

/// `(r_i + r_j) d − r (d_i + d_j) − 2δ (r_i + r_j − r)`, cross-checked against
/// `P + δμ` of the weight-one pair on the critical pattern.
pub fn critical_pair_margin(r: usize, d: i64, i: (usize, i64), j: (usize, i64), delta: Rational) -> Result<Rational> {
    ensure_delta(delta)?;
    if !(1 <= i.0 && i.0 < j.0 && j.0 < r) {
        return Err(Error::RankOrder(format!("need 1 <= r_i < r_j < r, got r_i={}, r_j={}, r={r}", i.0, j.0)));
    }
    let (a, b) = pair_affine(r, d, i, j);
    let value = a + delta * b;
    let f = WeightedFiltration::unit(r, d, vec![i.0, j.0], vec![i.1, j.1]);
    let via_stab = invariants::stab_value(&f, &VanishingPattern::critical_pair(), delta)?;
    assert_eq!(value, via_stab, "pair margin disagrees with P + δμ");
    Ok(value)
}

/// Strictly increasing chains of length `1..=max_len`, depth-first in element order.
pub fn enumerate_chains(cat: &SubbundleCatalog, max_len: usize) -> Vec<Vec<usize>> {
    fn extend(cat: &SubbundleCatalog, chain: &mut Vec<usize>, max_len: usize, out: &mut Vec<Vec<usize>>) {
        out.push(chain.clone());
        if chain.len() == max_len {
            return;
        }
        let last = *chain.last().expect("nonempty");
        for next in 0..cat.len() {
            if cat.less(last, next) {
                chain.push(next);
                extend(cat, chain, max_len, out);
                chain.pop();
            }
        }
    }
    let mut out = Vec::new();
    if max_len == 0 {
        return out;
    }
    for start in 0..cat.len() {
        extend(cat, &mut vec![start], max_len, &mut out);
    }
    out
}

fn chain_margin(cat: &SubbundleCatalog, chain: &[usize]) -> Margin {
    let f = cat.chain_filtration(chain);
    let constant = invariants::p_raw(&f);
    let slope = if cat.is_undecorated() { Rational::ZERO } else { invariants::mu_raw(&f, &cat.chain_pattern(chain)) };
    Margin { witness: Witness::Chain(chain.iter().map(|&i| cat.element(i).id.clone()).collect()), constant, slope }
}

/// Weight-one `P + δμ` of every chain, as affine margins.
pub fn full_margins(cat: &SubbundleCatalog, exec: Execution) -> Vec<Margin> {
    let chains = enumerate_chains(cat, cat.ambient_rank);
    par::map(exec, &chains, |c| chain_margin(cat, c))
}

/// Subbundle margins for every element, plus pair margins for every
/// comparable pair whose induced pattern is critical.
pub fn reduced_margins(cat: &SubbundleCatalog) -> Vec<Margin> {
    let (r, d) = (cat.ambient_rank, cat.ambient_degree);
    let undecorated = cat.is_undecorated();
    let mut out = Vec::new();
    for (i, e) in cat.elements().iter().enumerate() {
        let (constant, slope) = subbundle_affine(r, d, e.rank, e.degree, cat.k(i));
        let slope = if undecorated { Rational::ZERO } else { slope };
        out.push(Margin { witness: Witness::Subbundle(e.id.clone()), constant, slope });
    }
    if undecorated {
        return out;
    }
    for i in 0..cat.len() {
        for j in 0..cat.len() {
            if !cat.less(i, j) {
                continue;
            }
            let chain = [i, j];
            if !invariants::is_critical_raw(&cat.chain_filtration(&chain), &cat.chain_pattern(&chain)) {
                continue;
            }
            let (a, b) = (cat.element(i), cat.element(j));
            let (constant, slope) = pair_affine(r, d, (a.rank, a.degree), (b.rank, b.degree));
            out.push(Margin { witness: Witness::CriticalPair(a.id.clone(), b.id.clone()), constant, slope });
        }
    }
    out
}

/// Minimal weight-one `P + δμ` over every chain of the catalog.
pub fn verdict_full(cat: &SubbundleCatalog, delta: Rational) -> Result<Verdict> {
    verdict_full_with(cat, delta, Execution::default())
}

pub fn verdict_full_with(cat: &SubbundleCatalog, delta: Rational, exec: Execution) -> Result<Verdict> {
    ensure_delta(delta)?;
    Ok(verdict_from_margins(&full_margins(cat, exec), delta))
}

/// Minimal margin over subbundles and critical pairs.
pub fn verdict_reduced(cat: &SubbundleCatalog, delta: Rational) -> Result<Verdict> {
    ensure_delta(delta)?;
    Ok(verdict_from_margins(&reduced_margins(cat), delta))
}

/// Values of δ in `(lo, hi)` where the reduced verdict changes class.
pub fn delta_walls(cat: &SubbundleCatalog, lo: Rational, hi: Rational) -> Result<Vec<Rational>> {
    if !lo.is_positive() || lo >= hi {
        return Err(Error::InvalidInterval { lo: lo.to_string(), hi: hi.to_string() });
    }
    let margins = reduced_margins(cat);
    walls_of(&margins, lo, hi)
}

/// Class changes of `min margins` on `(lo, hi)`.
pub fn walls_of(margins: &[Margin], lo: Rational, hi: Rational) -> Result<Vec<Rational>> {
    let mut roots: Vec<Rational> = margins
        .iter()
        .filter(|m| !m.slope.is_zero())
        .map(|m| -m.constant / m.slope)
        .filter(|&x| lo < x && x < hi)
        .collect();
    roots.sort();
    roots.dedup();
    let class = |x: Rational| verdict_from_margins(margins, x).class;
    let two = Rational::from(2i64);
    let mut walls = Vec::new();
    for (n, &x) in roots.iter().enumerate() {
        let left = if n == 0 { lo } else { roots[n - 1] };
        let right = roots.get(n + 1).copied().unwrap_or(hi);
        let here = class(x);
        if class((left + x) / two) != here || class((x + right) / two) != here {
            walls.push(x);
        }
    }
    Ok(walls)
}

/// The catalog seen from inside `F`: elements below `F`, ambient `(rank F, degree F)`.
pub fn restrict_to_subbundle(cat: &SubbundleCatalog, id: &str) -> Result<SubbundleCatalog> {
    let f = cat.index_of(id)?;
    let below: Vec<usize> = (0..cat.len()).filter(|&g| cat.less(g, f)).collect();
    let elements = below.iter().map(|&g| cat.element(g).clone()).collect();
    let less = below.iter().map(|&a| below.iter().map(|&b| cat.less(a, b)).collect()).collect();
    let rows: Vec<usize> = below.iter().copied().chain(std::iter::once(f)).collect();
    let vanish = rows.iter().map(|&a| rows.iter().map(|&b| cat.vanish(a, b)).collect()).collect();
    let fe = cat.element(f);
    SubbundleCatalog::from_tables(fe.rank, fe.degree, elements, less, vanish)
}

/// Decoration metadata `φ: (E⊗E)^{⊕b} → (det E)^{⊗c} ⊗ N` with `deg N = n_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decoration {
    pub b: i64,
    pub c: i64,
    #[serde(rename = "nN")]
    pub n_n: i64,
}

/// Degree of the twisting line bundle once `det E` is absorbed: `c d + n_N`.
/// Neither this nor `b` enters any margin.
pub fn reduce_decorated(dec: &Decoration, d: i64) -> i64 {
    dec.c * d + dec.n_n
}

/// Orders verdicts by class severity, for reporting.
pub fn class_order(a: StabilityClass, b: StabilityClass) -> Ordering {
    let rank = |c: StabilityClass| match c {
        StabilityClass::Unstable => 0,
        StabilityClass::StrictlySemistable => 1,
        StabilityClass::Stable => 2,
    };
    rank(a).cmp(&rank(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn s(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    fn one_element(r: usize, d: i64, rank: usize, degree: i64, vanishing: &[(String, String)]) -> SubbundleCatalog {
        SubbundleCatalog::new(r, d, vec![Element::new("F", rank, degree)], &[], vanishing).unwrap()
    }

    fn all_ones_single(r: usize, d: i64, rank: usize, degree: i64) -> SubbundleCatalog {
        one_element(r, d, rank, degree, &[s("F", "F"), s("F", AMBIENT), s(AMBIENT, AMBIENT)])
    }

    #[test]
    fn subbundle_margin_examples() {
        assert_eq!(subbundle_margin(2, 0, 1, 0, KValue::Two, q(1, 1)).unwrap(), q(2, 1));
        // k = 0 keeps the −2δ r_F term: the margin is −2 − 2δ, not constant.
        for delta in [q(1, 3), q(1, 1), q(7, 2)] {
            let expected = q(-2, 1) - q(2, 1) * delta;
            assert_eq!(subbundle_margin(2, 0, 1, 1, KValue::Zero, delta).unwrap(), expected);
        }
        // d r_F − r d_F = −δ (r k − 2 r_F): 3·1 − 4·2 = −5 and δ(4·2 − 2) = 6δ at δ = 5/6.
        assert_eq!(subbundle_margin(4, 3, 1, 2, KValue::Two, q(5, 6)).unwrap(), Rational::ZERO);
        assert!(subbundle_margin(2, 0, 2, 0, KValue::Two, q(1, 1)).is_err());
        assert!(subbundle_margin(2, 0, 1, 0, KValue::Two, q(0, 1)).is_err());
    }

    #[test]
    fn critical_pair_margin_examples() {
        assert_eq!(critical_pair_margin(5, 0, (1, 0), (4, 0), q(1, 1)).unwrap(), Rational::ZERO);
        assert_eq!(critical_pair_margin(4, 0, (1, 1), (2, 0), q(1, 1)).unwrap(), q(-2, 1));
        assert_eq!(critical_pair_margin(6, 6, (2, 2), (4, 4), q(3, 1)).unwrap(), Rational::ZERO);
        assert!(critical_pair_margin(4, 0, (2, 0), (2, 0), q(1, 1)).is_err());
    }

    #[test]
    fn chain_counts() {
        let antichain = SubbundleCatalog::new(
            4,
            0,
            vec![Element::new("a", 1, 0), Element::new("b", 1, 0), Element::new("c", 2, 0)],
            &[],
            &[],
        )
        .unwrap();
        assert_eq!(enumerate_chains(&antichain, 2).len(), 3);

        let elements = (1..=4).map(|i| Element::new(format!("e{i}"), i, 0)).collect();
        let order = vec![s("e1", "e2"), s("e2", "e3"), s("e3", "e4")];
        let total = SubbundleCatalog::new(5, 0, elements, &order, &[]).unwrap();
        assert_eq!(enumerate_chains(&total, 4).len(), 15);

        let empty = SubbundleCatalog::new(3, 0, vec![], &[], &[]).unwrap();
        assert!(enumerate_chains(&empty, 3).is_empty());
    }

    #[test]
    fn single_k_two_element_is_stable() {
        let cat = all_ones_single(2, 0, 1, 0);
        let v = verdict_full(&cat, q(1, 1)).unwrap();
        assert_eq!(v.class, StabilityClass::Stable);
        assert_eq!(v.margin, Some(q(2, 1)));
        assert_eq!(verdict_reduced(&cat, q(1, 1)).unwrap(), v.clone().with_witness(Witness::Subbundle("F".into())));
    }

    impl Verdict {
        fn with_witness(mut self, w: Witness) -> Verdict {
            self.witness = Some(w);
            self
        }
    }

    #[test]
    fn destabilizing_subbundle_at_small_delta() {
        // Slope 2 against slope 0, k = 2: unstable while δ < (r d_F − d r_F)/(r k − 2 r_F) = 6/4.
        let cat = all_ones_single(3, 0, 1, 2);
        assert_eq!(verdict_full(&cat, q(1, 1)).unwrap().class, StabilityClass::Unstable);
        assert_eq!(verdict_full(&cat, q(3, 2)).unwrap().class, StabilityClass::StrictlySemistable);
        assert_eq!(verdict_full(&cat, q(2, 1)).unwrap().class, StabilityClass::Stable);
        assert_eq!(delta_walls(&cat, q(1, 10), q(10, 1)).unwrap(), vec![q(3, 2)]);
    }

    #[test]
    fn empty_catalog_is_stable_without_witness() {
        let cat = SubbundleCatalog::new(3, 1, vec![], &[], &[s(AMBIENT, AMBIENT)]).unwrap();
        let v = verdict_full(&cat, q(1, 1)).unwrap();
        assert_eq!(v, Verdict { class: StabilityClass::Stable, witness: None, margin: None });
        assert_eq!(verdict_reduced(&cat, q(1, 1)).unwrap(), v);
    }

    #[test]
    fn isotropic_line_of_positive_degree_is_unstable() {
        let cat = one_element(2, 0, 1, 1, &[s("F", AMBIENT), s(AMBIENT, AMBIENT)]);
        for delta in [q(1, 4), q(1, 1), q(9, 1)] {
            let v = verdict_reduced(&cat, delta).unwrap();
            assert_eq!(v.class, StabilityClass::Unstable);
            assert_eq!(v.margin, Some(q(-2, 1)));
        }
    }

    #[test]
    fn critical_pair_enters_reduced_family() {
        let elements = vec![Element::new("L", 1, 0), Element::new("W", 4, 0)];
        let vanishing = vec![s("L", AMBIENT), s("W", "W"), s("W", AMBIENT), s(AMBIENT, AMBIENT)];
        let cat = SubbundleCatalog::new(5, 0, elements, &[s("L", "W")], &vanishing).unwrap();
        let margins = reduced_margins(&cat);
        assert!(margins.iter().any(|m| m.witness == Witness::CriticalPair("L".into(), "W".into())));
        for delta in [q(1, 5), q(1, 1), q(4, 1)] {
            assert_eq!(verdict_full(&cat, delta).unwrap().class, verdict_reduced(&cat, delta).unwrap().class);
        }
    }

    #[test]
    fn constant_margins_have_no_walls() {
        let elements = vec![Element::new("a", 1, 0), Element::new("b", 1, -1)];
        let vanishing = vec![s("a", AMBIENT), s("b", "b"), s("b", AMBIENT), s(AMBIENT, AMBIENT)];
        let cat = SubbundleCatalog::new(2, 0, elements, &[], &vanishing).unwrap();
        assert!(delta_walls(&cat, q(1, 100), q(100, 1)).unwrap().is_empty());
        assert_eq!(verdict_reduced(&cat, q(1, 1)).unwrap().class, StabilityClass::StrictlySemistable);
        assert!(delta_walls(&cat, q(1, 1), q(1, 1)).is_err());
        assert!(delta_walls(&cat, q(0, 1), q(1, 1)).is_err());
    }

    #[test]
    fn ties_pick_smallest_witness() {
        let elements = vec![Element::new("b", 1, 0), Element::new("a", 1, 0)];
        let cat = SubbundleCatalog::new(2, 0, elements, &[], &[]).unwrap();
        let v = verdict_reduced(&cat, q(1, 1)).unwrap();
        assert_eq!(v.witness, Some(Witness::Subbundle("a".into())));
    }

    #[test]
    fn restriction_examples() {
        let elements = vec![Element::new("G", 1, 0), Element::new("F", 2, 1)];
        let vanishing = vec![s("G", "F"), s("G", AMBIENT), s("F", "F"), s("F", AMBIENT), s(AMBIENT, AMBIENT)];
        let cat = SubbundleCatalog::new(4, 0, elements, &[s("G", "F")], &vanishing).unwrap();
        let inner = restrict_to_subbundle(&cat, "F").unwrap();
        assert_eq!((inner.ambient_rank, inner.ambient_degree), (2, 1));
        assert_eq!(inner.len(), 1);
        assert_eq!(inner.k(0), KValue::One);
        let bottom = restrict_to_subbundle(&cat, "G").unwrap();
        assert!(bottom.is_empty());
        assert!(restrict_to_subbundle(&cat, "X").is_err());
    }

    #[test]
    fn non_monotone_vanishing_rejected() {
        let elements = vec![Element::new("G", 1, 0), Element::new("F", 2, 0)];
        let err = SubbundleCatalog::new(4, 0, elements, &[s("G", "F")], &[s("G", "G"), s(AMBIENT, AMBIENT)]);
        assert!(matches!(err, Err(Error::InvalidCatalog(r)) if r.contains("monotone")));
    }

    #[test]
    fn rank_order_enforced() {
        let elements = vec![Element::new("G", 2, 0), Element::new("F", 2, 0)];
        assert!(SubbundleCatalog::new(4, 0, elements, &[s("G", "F")], &[]).is_err());
    }

    #[test]
    fn decorated_reduction() {
        assert_eq!(reduce_decorated(&Decoration { b: 1, c: 0, n_n: 5 }, 9), 5);
        assert_eq!(reduce_decorated(&Decoration { b: 3, c: 2, n_n: 1 }, 3), 7);
    }

    #[test]
    fn undecorated_is_slope_only() {
        let cat = SubbundleCatalog::new(3, 0, vec![Element::new("F", 1, 1)], &[], &[]).unwrap();
        assert!(cat.is_undecorated());
        let v = verdict_full(&cat, q(5, 1)).unwrap();
        assert_eq!(v.margin, Some(q(-3, 1)));
        assert_eq!(verdict_reduced(&cat, q(5, 1)).unwrap().class, StabilityClass::Unstable);
    }
}
