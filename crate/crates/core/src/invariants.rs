//! Numeric invariants of a weighted filtration and its vanishing pattern.
//!
//! With `R(l)` the suffix weight sum from position `l` (zero at `⊤`), the
//! decoration term is
//!
//! ```text
//! μ = −min{ γ(i) + γ(j) : m[i][j] = 1 } = r · max{ R(i) + R(j) : m[i][j] = 1 } − 2 Σ α_s r_s
//! ```
//!
//! and `P + δμ = Σ α_k c_k + δ r R_max` with `c_k = r_k d − d_k r − 2δ r_k`.
//! Every function here computes both sides where two routes exist and
//! asserts they agree.

use crate::error::{Error, Result};
use crate::filtration::{validate_filtration, Index, WeightedFiltration};
use crate::pattern::{validate_pattern, VanishingPattern};
use crate::rational::Rational;

fn ensure_filtration(f: &WeightedFiltration) -> Result<()> {
    let report = validate_filtration(f);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidFiltration(report))
    }
}

fn ensure_pair(f: &WeightedFiltration, m: &VanishingPattern) -> Result<()> {
    ensure_filtration(f)?;
    if m.size() != f.len() + 1 {
        return Err(Error::SizeMismatch { pattern: m.size(), expected: f.len() + 1 });
    }
    let report = validate_pattern(m);
    if report.is_valid() {
        Ok(())
    } else {
        Err(Error::InvalidPattern(report))
    }
}

fn ensure_index(f: &WeightedFiltration, i: Index) -> Result<()> {
    match i {
        Index::At(p) if p == 0 || p > f.len() => Err(Error::IndexOutOfRange { index: p, len: f.len() }),
        _ => Ok(()),
    }
}

fn ensure_delta(delta: Rational) -> Result<()> {
    if delta.is_positive() {
        Ok(())
    } else {
        Err(Error::NonPositiveDelta(delta.to_string()))
    }
}

fn r_of(f: &WeightedFiltration) -> Rational {
    Rational::from(f.ambient_rank)
}

/// Suffix sums `R(1), …, R(t), R(⊤) = 0`, indexed by pattern row.
pub(crate) fn suffix_sums(weights: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::ZERO; weights.len() + 1];
    for i in (0..weights.len()).rev() {
        out[i] = out[i + 1] + weights[i];
    }
    out
}

/// `Σ α_s r_s`.
pub(crate) fn weighted_rank_sum(f: &WeightedFiltration) -> Rational {
    f.weights.iter().zip(&f.ranks).map(|(&a, &r)| a * Rational::from(r)).sum()
}

/// Largest `R(i) + R(j)` over allowed pairs; unchecked.
pub(crate) fn r_max_raw(weights: &[Rational], m: &VanishingPattern) -> Rational {
    let sums = suffix_sums(weights);
    let n = m.size();
    let mut best = Rational::ZERO;
    for i in 0..n {
        for j in i..n {
            if m.raw(i, j) {
                best = best.max(sums[i] + sums[j]);
            }
        }
    }
    best
}

pub(crate) fn mu_raw(f: &WeightedFiltration, m: &VanishingPattern) -> Rational {
    r_of(f) * r_max_raw(&f.weights, m) - Rational::from(2i64) * weighted_rank_sum(f)
}

pub(crate) fn p_raw(f: &WeightedFiltration) -> Rational {
    let r = f.ambient_rank as i64;
    let d = f.ambient_degree;
    f.weights
        .iter()
        .zip(f.ranks.iter().zip(&f.degrees))
        .map(|(&a, (&ri, &di))| a * Rational::from(d * ri as i64 - r * di))
        .sum()
}

/// Σ over positions of the singleton μ, `α_s (r k_s − 2 r_s)`.
pub(crate) fn singleton_mu_sum_raw(f: &WeightedFiltration, m: &VanishingPattern) -> Rational {
    let r = f.ambient_rank as i64;
    (1..=f.len()).map(|s| f.weights[s - 1] * Rational::from(r * m.k(s).value() - 2 * f.ranks[s - 1] as i64)).sum()
}

pub(crate) fn is_critical_raw(f: &WeightedFiltration, m: &VanishingPattern) -> bool {
    mu_raw(f, m) != singleton_mu_sum_raw(f, m)
}

/// The length-`r` vector `Σ α_i (r_i − r, …, r_i − r, r_i, …, r_i)`.
pub fn gamma_vector(f: &WeightedFiltration) -> Result<Vec<Rational>> {
    ensure_filtration(f)?;
    let r = f.ambient_rank;
    let out = (1..=r)
        .map(|p| {
            f.weights
                .iter()
                .zip(&f.ranks)
                .map(|(&a, &ri)| {
                    let entry = if p <= ri { ri as i64 - r as i64 } else { ri as i64 };
                    a * Rational::from(entry)
                })
                .sum()
        })
        .collect();
    Ok(out)
}

/// `Σ α_s r_s − r R(i)`; for a proper position this is entry `r_i` of [`gamma_vector`].
pub fn gamma_component(f: &WeightedFiltration, i: Index) -> Result<Rational> {
    ensure_index(f, i)?;
    let r_i = big_r(f, i)?;
    Ok(weighted_rank_sum(f) - r_of(f) * r_i)
}

/// Suffix weight sum from position `l`; zero at the ambient index.
pub fn big_r(f: &WeightedFiltration, l: Index) -> Result<Rational> {
    ensure_filtration(f)?;
    ensure_index(f, l)?;
    Ok(suffix_sums(&f.weights)[l.row(f.len())])
}

/// `P = Σ α_i (d r_i − r d_i)`.
pub fn p_value(f: &WeightedFiltration) -> Result<Rational> {
    ensure_filtration(f)?;
    Ok(p_raw(f))
}

pub fn mu_value(f: &WeightedFiltration, m: &VanishingPattern) -> Result<Rational> {
    ensure_pair(f, m)?;
    let via_r = mu_raw(f, m);

    let t = f.len();
    let gamma: Vec<Rational> = (0..=t).map(|row| gamma_component(f, Index::from_row(row, t))).collect::<Result<_>>()?;
    let mut min: Option<Rational> = None;
    for i in 0..=t {
        for j in 0..=t {
            if m.raw(i, j) {
                let s = gamma[i] + gamma[j];
                min = Some(min.map_or(s, |cur| cur.min(s)));
            }
        }
    }
    let via_gamma = -min.expect("ambient pair is always allowed");
    assert_eq!(via_gamma, via_r, "γ-route and R-route disagree on μ");
    Ok(via_r)
}

/// `c_k = r_k d − d_k r − 2δ r_k` for position `k` (1-based).
pub fn c_coeff(f: &WeightedFiltration, k: usize, delta: Rational) -> Result<Rational> {
    ensure_index(f, Index::At(k))?;
    let rk = f.ranks[k - 1] as i64;
    let dk = f.degrees[k - 1];
    let r = f.ambient_rank as i64;
    let d = f.ambient_degree;
    Ok(Rational::from(rk * d - dk * r) - Rational::from(2 * rk) * delta)
}

/// `P + δμ`, cross-checked against `Σ α_k c_k + δ r R_max`.
pub fn stab_value(f: &WeightedFiltration, m: &VanishingPattern, delta: Rational) -> Result<Rational> {
    ensure_delta(delta)?;
    let direct = p_value(f)? + delta * mu_value(f, m)?;
    let via_c: Rational =
        (1..=f.len()).map(|k| c_coeff(f, k, delta).map(|c| f.weights[k - 1] * c)).sum::<Result<Rational>>()?
            + delta * r_of(f) * r_max_raw(&f.weights, m);
    assert_eq!(direct, via_c, "P + δμ disagrees with Σ α c + δ r R_max");
    Ok(direct)
}

/// True iff μ differs from the sum of the singleton μ values.
pub fn is_critical(f: &WeightedFiltration, m: &VanishingPattern) -> Result<bool> {
    ensure_pair(f, m)?;
    let weighted = is_critical_raw(f, m);
    let unit = f.with_weights(vec![Rational::ONE; f.len()]);
    assert_eq!(weighted, is_critical_raw(&unit, m), "criticality depends on the weights");
    Ok(weighted)
}

/// Sum of singleton μ values `Σ α_s (r k_s − 2 r_s)`.
pub fn singleton_mu_sum(f: &WeightedFiltration, m: &VanishingPattern) -> Result<Rational> {
    ensure_pair(f, m)?;
    Ok(singleton_mu_sum_raw(f, m))
}

/// μ of `0 ⊂ E_i ⊂ E_j ⊂ E` on the critical pattern:
/// `r · max{α_i + α_j, 2α_j} − 2(α_i r_i + α_j r_j)`.
pub fn mu_len2_critical(r: usize, r_i: usize, r_j: usize, alpha_i: Rational, alpha_j: Rational) -> Result<Rational> {
    if !(1 <= r_i && r_i < r_j && r_j < r) {
        return Err(Error::RankOrder(format!("need 1 <= r_i < r_j < r, got r_i={r_i}, r_j={r_j}, r={r}")));
    }
    if !alpha_i.is_positive() || !alpha_j.is_positive() {
        return Err(Error::RankOrder("weights must be positive".into()));
    }
    let two = Rational::from(2i64);
    let max = (alpha_i + alpha_j).max(two * alpha_j);
    Ok(Rational::from(r) * max - two * (alpha_i * Rational::from(r_i) + alpha_j * Rational::from(r_j)))
}
