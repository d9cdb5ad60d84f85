//! Seeded random instances. Every generator draws only from the RNG it is
//! handed, so a `(seed, trial)` pair fixes the output.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::checker::{self, Element, StabilityClass, SubbundleCatalog, Witness};
use crate::error::{Error, Result};
use crate::filtration::WeightedFiltration;
use crate::orthogonal::{CoordinateModel, OrthogonalCatalog};
use crate::parabolic::{ParabolicCatalog, ParabolicData};
use crate::pattern::VanishingPattern;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Generic,
    Orthogonal,
    Parabolic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub max_rank: usize,
    pub min_len: usize,
    pub max_len: usize,
    pub degree_bound: i64,
    pub weight_denominator: i64,
    /// Upper bound on catalog size.
    pub max_elements: usize,
    pub family: Family,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            seed: 42,
            max_rank: 10,
            min_len: 1,
            max_len: 8,
            degree_bound: 6,
            weight_denominator: 16,
            max_elements: 8,
            family: Family::Generic,
        }
    }
}

impl GeneratorConfig {
    pub fn check(&self) -> Result<()> {
        if self.max_rank < 2 {
            return Err(Error::Generation("no proper subbundles possible".into()));
        }
        if self.min_len == 0 || self.min_len > self.max_len {
            return Err(Error::Generation(format!("length bounds [{}, {}] are empty", self.min_len, self.max_len)));
        }
        if self.min_len > self.max_rank - 1 {
            return Err(Error::Generation(format!("length {} needs rank above {}", self.min_len, self.max_rank)));
        }
        if self.weight_denominator < 1 || self.degree_bound < 0 {
            return Err(Error::Generation("bounds must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Independent stream for trial `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn random_weight(rng: &mut impl Rng, den_bound: i64) -> Rational {
    let den = rng.gen_range(1..=den_bound.max(1));
    let num = rng.gen_range(1..=2 * den);
    Rational::new(num as i128, den as i128)
}

/// A valid pattern of length `t`: sparse random generators closed upward,
/// with the ambient entry forced.
pub fn random_pattern(rng: &mut impl Rng, t: usize) -> VanishingPattern {
    let n = t + 1;
    let mut bits = vec![vec![false; n]; n];
    if rng.gen_bool(0.5) {
        // Near-antidiagonal generators give staircases with long frontiers.
        for i in 0..n {
            if rng.gen_bool(0.7) {
                let j = (n - 1 - i + rng.gen_range(0..=2)).saturating_sub(1).clamp(i, n - 1);
                bits[i][j] = true;
                bits[j][i] = true;
            }
        }
    } else {
        let density: f64 = rng.gen_range(0.0..0.4);
        for i in 0..n {
            for j in i..n {
                if rng.gen_bool(density) {
                    bits[i][j] = true;
                    bits[j][i] = true;
                }
            }
        }
    }
    // A zero first row is rare after closure; keep it reachable.
    if rng.gen_bool(0.1) {
        for j in 0..n {
            bits[0][j] = false;
            bits[j][0] = false;
        }
    }
    bits[t][t] = true;
    VanishingPattern::from_bits(bits).monotone_closure()
}

/// `count` distinct ranks in `1..r`, increasing.
pub fn random_ranks(rng: &mut impl Rng, r: usize, count: usize) -> Vec<usize> {
    let pool: Vec<usize> = (1..r).collect();
    let mut ranks: Vec<usize> = pool.choose_multiple(rng, count).copied().collect();
    ranks.sort_unstable();
    ranks
}

pub fn random_filtration(rng: &mut impl Rng, cfg: &GeneratorConfig) -> Result<(WeightedFiltration, VanishingPattern)> {
    cfg.check()?;
    let max_len = cfg.max_len.min(cfg.max_rank - 1);
    let t = rng.gen_range(cfg.min_len..=max_len);
    let r = rng.gen_range(t + 1..=cfg.max_rank);
    let d = rng.gen_range(-cfg.degree_bound..=cfg.degree_bound);
    let ranks = random_ranks(rng, r, t);
    let degrees = (0..t).map(|_| rng.gen_range(-cfg.degree_bound..=cfg.degree_bound)).collect();
    let weights = (0..t).map(|_| random_weight(rng, cfg.weight_denominator)).collect();
    let f = WeightedFiltration::new(r, d, ranks, degrees, weights);
    Ok((f, random_pattern(rng, t)))
}

fn random_containment(rng: &mut impl Rng, ranks: &[usize]) -> Vec<Vec<bool>> {
    let n = ranks.len();
    let p: f64 = rng.gen_range(0.2..0.8);
    let mut less = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if ranks[i] < ranks[j] && rng.gen_bool(p) {
                less[i][j] = true;
            }
        }
    }
    less
}

/// Sparse vanishing generators; the catalog constructor closes them.
fn random_vanishing(rng: &mut impl Rng, n: usize) -> Vec<Vec<bool>> {
    let mut v = vec![vec![false; n + 1]; n + 1];
    v[n][n] = true;
    for i in 0..n {
        let j = match rng.gen_range(0..4) {
            0 => continue,
            1 => n,
            2 => i,
            _ => rng.gen_range(0..=n),
        };
        v[i][j] = true;
        v[j][i] = true;
    }
    v
}

/// Degree near the proportional share `r_F d / r`, or uniform in the bound.
fn random_degree(rng: &mut impl Rng, r: usize, d: i64, r_f: usize, bound: i64) -> i64 {
    if rng.gen_bool(0.5) {
        rng.gen_range(-bound..=bound)
    } else {
        let share = (r_f as i64 * d).div_euclid(r as i64);
        (share + rng.gen_range(-2..=1)).clamp(-bound, bound)
    }
}

/// Random catalog with at most `max_elements` elements and rank at most `max_rank`.
pub fn random_catalog(rng: &mut impl Rng, cfg: &GeneratorConfig) -> Result<SubbundleCatalog> {
    cfg.check()?;
    let r = rng.gen_range(2..=cfg.max_rank);
    let d = rng.gen_range(-cfg.degree_bound..=cfg.degree_bound);
    let n = rng.gen_range(0..=cfg.max_elements);
    let ranks: Vec<usize> = (0..n).map(|_| rng.gen_range(1..r)).collect();
    let elements = ranks
        .iter()
        .enumerate()
        .map(|(i, &rk)| Element::new(format!("F{}", i + 1), rk, random_degree(rng, r, d, rk, cfg.degree_bound)))
        .collect();
    let less = random_containment(rng, &ranks);
    let vanish = if rng.gen_bool(0.05) { vec![vec![false; n + 1]; n + 1] } else { random_vanishing(rng, n) };
    SubbundleCatalog::closed(r, d, elements, less, vanish)
}

/// Random catalog whose full verdict at `delta` is semistable, by rejection.
pub fn semistable_catalog(rng: &mut impl Rng, cfg: &GeneratorConfig, delta: Rational) -> Result<SubbundleCatalog> {
    for _ in 0..10_000 {
        let mut cat = random_catalog(rng, cfg)?;
        // Lowering each degree to the first nonnegative subbundle margin
        // leaves many zero margins, which keeps the boundary well populated.
        let (r, d) = (cat.ambient_rank, cat.ambient_degree);
        let mut degrees: Vec<i64> = cat.elements().iter().map(|e| e.degree).collect();
        for (i, e) in cat.elements().iter().enumerate() {
            let k = cat.k(i);
            while checker::subbundle_margin(r, d, e.rank, degrees[i], k, delta)?.is_negative() {
                degrees[i] -= 1;
            }
        }
        cat = cat.with_degrees(d, &degrees);
        if checker::verdict_full(&cat, delta)?.class.is_semistable() {
            return Ok(cat);
        }
    }
    Err(Error::Generation("no semistable catalog found".into()))
}

/// A strictly semistable catalog at some `δ < 1/r` whose minimal margin is
/// attained by a single element `F` with zero margin. Returns `(catalog, F, δ)`.
pub fn strictly_semistable_with_witness(
    rng: &mut impl Rng,
    cfg: &GeneratorConfig,
) -> Result<(SubbundleCatalog, String, Rational)> {
    cfg.check()?;
    if cfg.max_rank < 3 {
        return Err(Error::Generation("needs rank at least 3".into()));
    }
    for _ in 0..10_000 {
        let r = rng.gen_range(3..=cfg.max_rank);
        let r_f = rng.gen_range(1..r);
        // Zero margin with δ < 1/r pins δ and the degree defect per k.
        let (k, delta, defect) = match (2 * r_f).cmp(&r) {
            std::cmp::Ordering::Less => (2u8, Rational::new(1, 2 * (r - r_f) as i128), -1i64),
            std::cmp::Ordering::Equal => (1u8, Rational::new(1, (r + 1 + rng.gen_range(0..3)) as i128), 0),
            std::cmp::Ordering::Greater => (0u8, Rational::new(1, 2 * r_f as i128), 1),
        };
        // Solve d r_F − r d_F = defect.
        let candidates: Vec<(i64, i64)> = (-cfg.degree_bound..=cfg.degree_bound)
            .flat_map(|d| (-cfg.degree_bound..=cfg.degree_bound).map(move |df| (d, df)))
            .filter(|&(d, df)| d * r_f as i64 - r as i64 * df == defect)
            .collect();
        let Some(&(d, d_f)) = candidates.choose(rng) else { continue };

        let n_other = rng.gen_range(0..cfg.max_elements.max(1));
        let mut elements = vec![Element::new("F", r_f, d_f)];
        for i in 0..n_other {
            let rk = rng.gen_range(1..r);
            elements.push(Element::new(format!("G{}", i + 1), rk, random_degree(rng, r, d, rk, cfg.degree_bound)));
        }
        let n = elements.len();
        let ranks: Vec<usize> = elements.iter().map(|e| e.rank).collect();
        let less = random_containment(rng, &ranks);
        let mut vanish = random_vanishing(rng, n);
        // Pin k(F): generators touching F must not exceed it.
        for j in 0..=n {
            vanish[0][j] = false;
            vanish[j][0] = false;
        }
        match k {
            2 => vanish[0][0] = true,
            1 => {
                vanish[0][n] = true;
                vanish[n][0] = true;
            }
            _ => {}
        }
        let Ok(cat) = SubbundleCatalog::closed(r, d, elements, less, vanish) else { continue };
        if cat.k(0).value() != k as i64 {
            continue;
        }
        let margins = checker::reduced_margins(&cat);
        let min = margins.iter().map(|m| m.at(delta)).min();
        let f_margin = margins.iter().find(|m| m.witness == Witness::Subbundle("F".into())).map(|m| m.at(delta));
        if min == Some(Rational::ZERO) && f_margin == Some(Rational::ZERO) {
            debug_assert_eq!(checker::verdict_reduced(&cat, delta)?.class, StabilityClass::StrictlySemistable);
            return Ok((cat, "F".into(), delta));
        }
    }
    Err(Error::Generation("no strictly semistable catalog found".into()))
}

/// Axiom-valid orthogonal catalog from the coordinate model. Ordinary
/// catalogs have twist zero; generalized ones a random twist, even whenever
/// anisotropic lines are present.
pub fn orthogonal_catalog(rng: &mut impl Rng, cfg: &GeneratorConfig, generalized: bool) -> Result<OrthogonalCatalog> {
    cfg.check()?;
    for _ in 0..1000 {
        let r = rng.gen_range(2..=cfg.max_rank);
        let mut twist = if generalized { rng.gen_range(-3..=3) } else { 0 };
        // Same parity as r, at most three.
        let anisotropic = r % 2 + 2 * rng.gen_range(0..=(r.min(3) - r % 2) / 2);
        if anisotropic > 0 && twist % 2 != 0 {
            twist -= 1;
        }
        let h = (r - anisotropic) / 2;
        let bound = (cfg.degree_bound / 2).max(1);
        let pair_degrees = (0..h).map(|_| rng.gen_range(-bound..=bound)).collect();
        let model = CoordinateModel { pair_degrees, anisotropic, twist };
        let coords: Vec<usize> = (0..r).collect();
        let seeds: Vec<std::collections::BTreeSet<usize>> = (0..rng.gen_range(1..=3))
            .map(|_| {
                if h > 0 && rng.gen_bool(0.6) {
                    // Isotropic seed: at most one coordinate from each pair.
                    let size = rng.gen_range(1..=h);
                    let mut pairs: Vec<usize> = (0..h).collect();
                    pairs.shuffle(rng);
                    pairs[..size].iter().map(|&i| if rng.gen_bool(0.5) { i } else { i + h }).collect()
                } else {
                    let size = rng.gen_range(1..r);
                    coords.choose_multiple(rng, size).copied().collect()
                }
            })
            .collect();
        let family = model.close(&seeds);
        if family.len() > 2 * cfg.max_elements.max(1) {
            continue;
        }
        return model.catalog(&family);
    }
    Err(Error::Generation("orthogonal family kept exceeding the element bound".into()))
}

/// Random catalog with monotone gluing dimensions `p_F ≤ min(2 r_F, r)`.
pub fn parabolic_catalog(rng: &mut impl Rng, cfg: &GeneratorConfig) -> Result<ParabolicCatalog> {
    let catalog = random_catalog(rng, cfg)?;
    let r = catalog.ambient_rank;
    let mut order: Vec<usize> = (0..catalog.len()).collect();
    order.sort_by_key(|&i| catalog.element(i).rank);
    let mut p = vec![0usize; catalog.len()];
    for &i in &order {
        // Everything below has smaller rank and is already assigned.
        let lower = (0..catalog.len()).filter(|&g| catalog.less(g, i)).map(|g| p[g]).max().unwrap_or(0);
        let upper = (2 * catalog.element(i).rank).min(r);
        p[i] = rng.gen_range(lower..=upper);
    }
    ParabolicCatalog::new(catalog, ParabolicData { p, p_ambient: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::validate_filtration;
    use crate::pattern::validate_pattern;

    #[test]
    fn rank_bound_one_rejected() {
        let cfg = GeneratorConfig { max_rank: 1, ..GeneratorConfig::default() };
        let err = random_filtration(&mut trial_rng(1, 0), &cfg).unwrap_err();
        assert!(err.to_string().contains("no proper subbundles possible"));
    }

    #[test]
    fn generated_filtrations_are_valid() {
        let cfg = GeneratorConfig { min_len: 3, max_len: 8, max_rank: 14, ..GeneratorConfig::default() };
        for trial in 0..300 {
            let (f, m) = random_filtration(&mut trial_rng(7, trial), &cfg).unwrap();
            assert!(validate_filtration(&f).is_valid());
            assert!(validate_pattern(&m).is_valid(), "{m}");
            assert_eq!(m.len(), f.len());
        }
    }

    #[test]
    fn generated_catalogs_are_valid() {
        let cfg = GeneratorConfig::default();
        for trial in 0..200 {
            let cat = random_catalog(&mut trial_rng(3, trial), &cfg).unwrap();
            assert!(cat.validate().is_valid());
            assert!(cat.len() <= cfg.max_elements && cat.ambient_rank <= cfg.max_rank);
        }
    }

    #[test]
    fn semistable_generator_meets_its_contract() {
        let cfg = GeneratorConfig::default();
        for trial in 0..50 {
            let cat = semistable_catalog(&mut trial_rng(5, trial), &cfg, Rational::ONE).unwrap();
            assert!(checker::verdict_full(&cat, Rational::ONE).unwrap().class.is_semistable());
        }
    }

    #[test]
    fn witness_generator_meets_its_contract() {
        let cfg = GeneratorConfig::default();
        for trial in 0..50 {
            let (cat, f, delta) = strictly_semistable_with_witness(&mut trial_rng(8, trial), &cfg).unwrap();
            assert!(delta < Rational::new(1, cat.ambient_rank as i128));
            assert_eq!(checker::verdict_reduced(&cat, delta).unwrap().class, StabilityClass::StrictlySemistable);
            assert!(cat.index_of(&f).is_ok());
        }
    }

    #[test]
    fn orthogonal_generator_is_axiom_valid() {
        let cfg = GeneratorConfig::default();
        for trial in 0..100 {
            for generalized in [false, true] {
                let cat = orthogonal_catalog(&mut trial_rng(4, trial), &cfg, generalized).unwrap();
                assert!(cat.validate().is_valid());
                assert_eq!(cat.is_ordinary(), cat.twist == 0);
            }
        }
    }

    #[test]
    fn parabolic_generator_is_valid() {
        let cfg = GeneratorConfig::default();
        for trial in 0..100 {
            parabolic_catalog(&mut trial_rng(6, trial), &cfg).unwrap();
        }
    }

    #[test]
    fn same_seed_same_output() {
        let cfg = GeneratorConfig::default();
        let a = random_filtration(&mut trial_rng(42, 3), &cfg).unwrap();
        let b = random_filtration(&mut trial_rng(42, 3), &cfg).unwrap();
        assert_eq!(a, b);
    }
}
