//! Differential oracle suites. Each suite draws its instances from
//! `trial_rng(seed ^ salt, trial)` and counts exact failures; `fault` perturbs
//! one side of every comparison so the suites can be shown to bite.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::checker::{self, SubbundleCatalog, Witness};
use crate::error::Result;
use crate::generate::{self, trial_rng, GeneratorConfig};
use crate::invariants;
use crate::orthogonal::{self, OrthogonalCatalog};
use crate::par::{self, Execution};
use crate::parabolic;
use crate::pattern::VanishingPattern;
use crate::rational::Rational;
use crate::splitter::{self, CaseLabel, Piece};
use crate::WeightedFiltration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatteryConfig {
    pub seed: u64,
    /// Overrides every suite's default trial count.
    pub trials: Option<u64>,
    pub exec: Execution,
    pub fault: bool,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        BatteryConfig { seed: 2024, trials: None, exec: Execution::Parallel, fault: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub criterion: u8,
    pub name: String,
    pub trials: u64,
    pub checks: u64,
    pub failures: u64,
    /// First few failures, in trial order.
    pub witnesses: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

pub const CRITERIA: [(u8, &str, u64); 10] = [
    (1, "split conservation", 10_000),
    (2, "example regression", 1),
    (3, "definition equivalence", 1_000),
    (4, "weight-one sufficiency", 1_000),
    (5, "length-two closed form", 1),
    (6, "criticality and subadditivity", 10_000),
    (7, "orthogonal equivalence", 500),
    (8, "maximal destabilizing restriction", 200),
    (9, "parabolic transport", 500),
    (10, "non-critical heredity", 1_000),
];

const DELTAS_3: [(i128, i128); 4] = [(1, 4), (1, 2), (1, 1), (3, 1)];
const DELTAS_7: [(i128, i128); 3] = [(1, 4), (1, 1), (2, 1)];
const MAX_WITNESSES: usize = 5;

type TrialResult = Result<(u64, Vec<String>)>;

fn deltas(list: &[(i128, i128)]) -> Vec<Rational> {
    list.iter().map(|&(n, d)| Rational::new(n, d)).collect()
}

fn run_trials(
    criterion: u8,
    cfg: &BatteryConfig,
    trial: impl Fn(u64) -> TrialResult + Sync + Send,
) -> Result<SuiteReport> {
    let (_, name, default_trials) = CRITERIA[criterion as usize - 1];
    // Deterministic suites run once unless switched off entirely.
    let n = match (default_trials, cfg.trials) {
        (1, Some(0)) => 0,
        (1, _) => 1,
        (d, over) => over.unwrap_or(d),
    };
    let outcomes = par::map_range(cfg.exec, n, &trial);
    let mut report =
        SuiteReport { criterion, name: name.to_string(), trials: n, checks: 0, failures: 0, witnesses: Vec::new() };
    for (t, outcome) in outcomes.into_iter().enumerate() {
        let (checks, failures) = outcome?;
        report.checks += checks;
        report.failures += failures.len() as u64;
        for f in failures {
            if report.witnesses.len() < MAX_WITNESSES {
                report.witnesses.push(format!("trial {t}: {f}"));
            }
        }
    }
    Ok(report)
}

fn salted(cfg: &BatteryConfig, criterion: u8) -> u64 {
    cfg.seed ^ (criterion as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn run_suite(criterion: u8, cfg: &BatteryConfig) -> Result<SuiteReport> {
    match criterion {
        1 => split_conservation(cfg),
        2 => example_regression(cfg),
        3 => definition_equivalence(cfg),
        4 => weight_one_sufficiency(cfg),
        5 => closed_form(cfg),
        6 => criticality(cfg),
        7 => orthogonal_equivalence(cfg),
        8 => restriction(cfg),
        9 => parabolic_transport(cfg),
        10 => heredity(cfg),
        _ => Err(crate::Error::Generation(format!("no criterion {criterion}"))),
    }
}

pub fn run_all(cfg: &BatteryConfig) -> Result<Vec<SuiteReport>> {
    (1..=10).map(|c| run_suite(c, cfg)).collect()
}

fn split_config() -> GeneratorConfig {
    GeneratorConfig { min_len: 3, max_len: 8, max_rank: 14, weight_denominator: 16, ..GeneratorConfig::default() }
}

fn split_conservation(cfg: &BatteryConfig) -> Result<SuiteReport> {
    let seed = salted(cfg, 1);
    let gen = split_config();
    run_trials(1, cfg, |trial| {
        let (f, m) = generate::random_filtration(&mut trial_rng(seed, trial), &gen)?;
        let mut dec = splitter::split_full(&f, &m)?;
        if cfg.fault {
            dec.pieces[0].weights[0] += Rational::new(1, 7);
        }
        let report = splitter::verify_decomposition(&f, &m, &dec);
        let failures = if report.is_valid() { vec![] } else { vec![format!("{f:?} {m}: {report}")] };
        Ok((1, failures))
    })
}

fn example_filtration(weights: [i64; 4]) -> (WeightedFiltration, VanishingPattern) {
    let w = weights.iter().map(|&a| Rational::from_int(a)).collect();
    (WeightedFiltration::new(5, 0, vec![1, 2, 3, 4], vec![0, 0, 0, 0], w), VanishingPattern::staircase(4))
}

fn unit_piece(indices: &[usize], weights: &[i64]) -> Piece {
    Piece::new(indices.to_vec(), weights.iter().map(|&a| Rational::from_int(a)).collect())
}

/// The rank-five staircase under one weight vector per maximizing pair.
fn example_regression(cfg: &BatteryConfig) -> Result<SuiteReport> {
    run_trials(2, cfg, |_| {
        let mut checks = 0;
        let mut failures = Vec::new();
        let mut expect = |ok: bool, what: String| {
            checks += 1;
            if !ok {
                failures.push(what);
            }
        };
        let bump = |w: [i64; 4]| if cfg.fault { [w[0] + 1, w[1], w[2], w[3]] } else { w };

        // Maximum at the middle frontier pair: case C2.
        let (f, m) = example_filtration(bump([1, 2, 1, 2]));
        let step = splitter::split_step(&f, &m)?;
        let want = vec![unit_piece(&[1, 4], &[1, 2]), unit_piece(&[2, 3], &[2, 1])];
        expect(step.case == CaseLabel::C2 && step.pieces == want, format!("(1,2,1,2) step {step:?}"));
        let mu = invariants::mu_value(&f, &m)?;
        let parts: Vec<Rational> =
            want.iter().map(|p| invariants::mu_value(&p.filtration(&f), &p.pattern(&m))).collect::<Result<_>>()?;
        expect(
            mu == Rational::from_int(3) && parts == vec![Rational::from_int(2), Rational::ONE],
            format!("(1,2,1,2) mu {mu} pieces {parts:?}"),
        );
        let dec = splitter::split_full(&f, &m)?;
        expect(splitter::verify_decomposition(&f, &m, &dec).is_valid(), format!("(1,2,1,2) {dec:?}"));

        // Maximum at (1, ⊤): forward transport, then pairing.
        let (f, m) = example_filtration(bump([2, 1, 1, 1]));
        let dec = splitter::split_full(&f, &m)?;
        let want = vec![unit_piece(&[1, 3], &[1, 1]), unit_piece(&[1, 4], &[1, 1]), unit_piece(&[2], &[1])];
        expect(dec.trace == vec![CaseLabel::C3, CaseLabel::C3Pair] && dec.pieces == want, format!("(2,1,1,1) {dec:?}"));
        expect(splitter::verify_decomposition(&f, &m, &dec).is_valid(), "(2,1,1,1) conservation".into());
        expect(invariants::mu_value(&f, &m)? == Rational::from_int(3), "(2,1,1,1) mu".into());

        // Maximum at the diagonal end (3, 3): mirrored transport.
        let (f, m) = example_filtration(bump([1, 1, 2, 1]));
        let step = splitter::split_step(&f, &m)?;
        let want = vec![unit_piece(&[1, 2, 3], &[1, 1, 2]), unit_piece(&[4], &[1])];
        expect(step.case == CaseLabel::C3 && step.pieces == want, format!("(1,1,2,1) step {step:?}"));
        let dec = splitter::split_full(&f, &m)?;
        let want = vec![unit_piece(&[1, 3], &[1, 1]), unit_piece(&[2, 3], &[1, 1]), unit_piece(&[4], &[1])];
        expect(dec.pieces == want, format!("(1,1,2,1) {dec:?}"));
        expect(splitter::verify_decomposition(&f, &m, &dec).is_valid(), "(1,1,2,1) conservation".into());
        expect(invariants::mu_value(&f, &m)? == Rational::from_int(4), "(1,1,2,1) mu".into());
        Ok((checks, failures))
    })
}

fn definition_equivalence(cfg: &BatteryConfig) -> Result<SuiteReport> {
    let seed = salted(cfg, 3);
    let gen = GeneratorConfig::default();
    let ds = deltas(&DELTAS_3);
    run_trials(3, cfg, |trial| {
        let cat = generate::random_catalog(&mut trial_rng(seed, trial), &gen)?;
        let other = if cfg.fault { shift_ambient(&cat) } else { cat.clone() };
        let mut failures = Vec::new();
        for &delta in &ds {
            let full = checker::verdict_full_with(&cat, delta, Execution::Sequential)?;
            let reduced = checker::verdict_reduced(&other, delta)?;
            if full.class != reduced.class {
                failures.push(format!("δ={delta}: full {full:?} reduced {reduced:?} on {cat:?}"));
            }
        }
        Ok((ds.len() as u64, failures))
    })
}

fn shift_ambient(cat: &SubbundleCatalog) -> SubbundleCatalog {
    let degrees: Vec<i64> = cat.elements().iter().map(|e| e.degree).collect();
    cat.with_degrees(cat.ambient_degree + 1, &degrees)
}

fn weight_one_sufficiency(cfg: &BatteryConfig) -> Result<SuiteReport> {
    let seed = salted(cfg, 4);
    let gen = GeneratorConfig::default();
    let ds = deltas(&DELTAS_3);
    run_trials(4, cfg, |trial| {
        let rng = &mut trial_rng(seed, trial);
        let delta = ds[trial as usize % ds.len()];
        // Empty catalogs pass vacuously; redraw so every trial tests chains.
        let (cat, chains) = loop {
            let cat = generate::semistable_catalog(rng, &gen, delta)?;
            let chains = checker::enumerate_chains(&cat, cat.ambient_rank);
            if !chains.is_empty() {
                break (cat, chains);
            }
        };
        let mut failures = Vec::new();
        let tested = if cfg.fault {
            let degrees: Vec<i64> = cat.elements().iter().map(|e| e.degree + 1).collect();
            cat.with_degrees(cat.ambient_degree, &degrees)
        } else {
            cat.clone()
        };
        for _ in 0..100 {
            let chain = chains.choose(rng).expect("nonempty");
            let weights: Vec<Rational> =
                chain.iter().map(|_| generate::random_weight(rng, gen.weight_denominator)).collect();
            let f = tested.chain_filtration(chain).with_weights(weights);
            let value = if tested.is_undecorated() {
                invariants::p_value(&f)?
            } else {
                invariants::stab_value(&f, &tested.chain_pattern(chain), delta)?
            };
            if value.is_negative() {
                failures.push(format!("δ={delta}: chain {chain:?} weights {:?} gives {value}", f.weights));
            }
        }
        Ok((100, failures))
    })
}

/// Weights `a/b` with `1 ≤ a ≤ b ≤ 8`, deduplicated.
fn weight_grid() -> Vec<Rational> {
    let set: BTreeSet<Rational> = (1..=8).flat_map(|b| (1..=b).map(move |a| Rational::new(a, b))).collect();
    set.into_iter().collect()
}

fn closed_form(cfg: &BatteryConfig) -> Result<SuiteReport> {
    let grid = weight_grid();
    let crit = VanishingPattern::critical_pair();
    let triples: Vec<(usize, usize, usize)> =
        (3..=12).flat_map(|r| (1..r).flat_map(move |ri| (ri + 1..r).map(move |rj| (r, ri, rj)))).collect();
    run_trials(5, cfg, |_| {
        let per = par::map(cfg.exec, &triples, |&(r, ri, rj)| -> TrialResult {
            let mut failures = Vec::new();
            let mut checks = 0;
            for &ai in &grid {
                for &aj in &grid {
                    checks += 1;
                    let mut closed = invariants::mu_len2_critical(r, ri, rj, ai, aj)?;
                    if cfg.fault {
                        // The variant without the factor two on Σ α r.
                        closed += ai * Rational::from(ri) + aj * Rational::from(rj);
                    }
                    let f = WeightedFiltration::new(r, 0, vec![ri, rj], vec![0, 0], vec![ai, aj]);
                    let brute = invariants::mu_value(&f, &crit)?;
                    if closed != brute {
                        failures.push(format!("r={r} ({ri},{rj}) α=({ai},{aj}): {closed} vs {brute}"));
                    }
                }
            }
            Ok((checks, failures))
        });
        let mut checks = 0;
        let mut failures = Vec::new();
        for p in per {
            let (c, f) = p?;
            checks += c;
            failures.extend(f);
        }
        Ok((checks, failures))
    })
}

fn criticality(cfg: &BatteryConfig) -> Result<SuiteReport> {
    let seed = salted(cfg, 6);
    let gen = GeneratorConfig { min_len: 1, max_len: 8, max_rank: 14, ..GeneratorConfig::default() };
    run_trials(6, cfg, |trial| {
        let rng = &mut trial_rng(seed, trial);
        let (f, m) = generate::random_filtration(rng, &gen)?;
        let mut failures = Vec::new();
        let base = invariants::is_critical_raw(&f, &m);
        for _ in 0..10 {
            let w = (0..f.len()).map(|_| generate::random_weight(rng, gen.weight_denominator)).collect();
            let g = f.with_weights(w);
            if invariants::is_critical_raw(&g, &m) != base {
                failures.push(format!("criticality changed under reweighting {:?} of {f:?} {m}", g.weights));
            }
        }
        let mu = invariants::mu_value(&f, &m)?;
        let singles = invariants::singleton_mu_sum(&f, &m)?;
        let holds = if cfg.fault { mu >= singles } else { mu <= singles };
        if !holds {
            failures.push(format!("mu {mu} vs singleton sum {singles} on {f:?} {m}"));
        }
        Ok((11, failures))
    })
}

fn orthogonal_equivalence(cfg: &BatteryConfig) -> Result<SuiteReport> {
    let seed = salted(cfg, 7);
    let gen = GeneratorConfig::default();
    let ds = deltas(&DELTAS_7);
    run_trials(7, cfg, |trial| {
        let cat: OrthogonalCatalog = generate::orthogonal_catalog(&mut trial_rng(seed, trial), &gen, false)?;
        let mut failures = Vec::new();
        let mut checks = 0;
        for &delta in &ds {
            checks += 1;
            let rep = orthogonal::equivalence_report(&cat, delta)?;
            let ramanan_class = if cfg.fault {
                // Slope condition over every element instead of isotropic ones.
                let c = &cat.catalog;
                let all: Vec<checker::Margin> = c
                    .elements()
                    .iter()
                    .map(|e| checker::Margin {
                        witness: Witness::Subbundle(e.id.clone()),
                        constant: Rational::from(c.ambient_degree * e.rank as i64 - c.ambient_rank as i64 * e.degree),
                        slope: Rational::ZERO,
                    })
                    .collect();
                checker::verdict_from_margins(&all, delta).class
            } else {
                rep.ramanan.class
            };
            if ramanan_class != rep.reduced.class || !rep.structural.is_empty() {
                failures.push(format!("δ={delta}: {rep:?}"));
            }
        }
        Ok((checks, failures))
    })
}

fn restriction(cfg: &BatteryConfig) -> Result<SuiteReport> {
    let seed = salted(cfg, 8);
    let gen = GeneratorConfig::default();
    run_trials(8, cfg, |trial| {
        let (cat, f, delta) = generate::strictly_semistable_with_witness(&mut trial_rng(seed, trial), &gen)?;
        let mut inner = checker::restrict_to_subbundle(&cat, &f)?;
        if cfg.fault {
            inner = shift_ambient(&inner);
            let degrees: Vec<i64> = inner.elements().iter().map(|e| e.degree).collect();
            inner = inner.with_degrees(inner.ambient_degree - 2, &degrees);
        }
        let v = checker::verdict_reduced(&inner, delta)?;
        let failures = if v.class.is_semistable() {
            vec![]
        } else {
            vec![format!("δ={delta}, F={f}: restricted verdict {v:?} on {cat:?}")]
        };
        Ok((1, failures))
    })
}

fn parabolic_transport(cfg: &BatteryConfig) -> Result<SuiteReport> {
    let seed = salted(cfg, 9);
    let gen = GeneratorConfig::default();
    let ds = deltas(&DELTAS_3);
    run_trials(9, cfg, |trial| {
        let pc = generate::parabolic_catalog(&mut trial_rng(seed, trial), &gen)?;
        let mut failures = Vec::new();
        for &delta in &ds {
            let full = parabolic::parabolic_verdict_full(&pc, delta)?;
            let reduced = if cfg.fault {
                checker::verdict_reduced(&pc.catalog, delta)?
            } else {
                parabolic::parabolic_verdict_reduced(&pc, delta)?
            };
            if full.class != reduced.class {
                failures.push(format!("δ={delta}: full {full:?} reduced {reduced:?}"));
            }
        }
        Ok((ds.len() as u64, failures))
    })
}

fn heredity(cfg: &BatteryConfig) -> Result<SuiteReport> {
    let seed = salted(cfg, 10);
    let gen = GeneratorConfig { min_len: 2, max_len: 8, max_rank: 14, ..GeneratorConfig::default() };
    run_trials(10, cfg, |trial| {
        let rng = &mut trial_rng(seed, trial);
        // Rejection: the fault run draws critical filtrations instead.
        let (f, m) = loop {
            let (f, m) = generate::random_filtration(rng, &gen)?;
            if invariants::is_critical_raw(&f, &m) == cfg.fault {
                break (f, m);
            }
        };
        let t = f.len();
        let mut failures = Vec::new();
        let mut checks = 0;
        for mask in 1u32..(1 << t) {
            let subset: Vec<usize> = (0..t).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect();
            let sub = f.sub(&subset, &subset.iter().map(|&i| f.weights[i - 1]).collect::<Vec<_>>());
            checks += 1;
            if invariants::is_critical_raw(&sub, &m.restrict(&subset)) {
                failures.push(format!("subset {subset:?} of non-critical {f:?} {m} is critical"));
                break;
            }
        }
        Ok((checks, failures))
    })
}

/// Prints like `PASS  1 split conservation: 10000 trials, 10000 checks, 0 failures`.
pub fn summary_line(r: &SuiteReport) -> String {
    format!(
        "{} {:>2} {}: {} trials, {} checks, {} failures",
        if r.passed() { "PASS" } else { "FAIL" },
        r.criterion,
        r.name,
        r.trials,
        r.checks,
        r.failures
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(fault: bool) -> BatteryConfig {
        BatteryConfig { trials: Some(20), fault, ..BatteryConfig::default() }
    }

    #[test]
    fn small_battery_passes() {
        for criterion in 1..=10 {
            let r = run_suite(criterion, &quick(false)).unwrap();
            assert!(r.passed(), "{}\n{:?}", summary_line(&r), r.witnesses);
        }
    }

    #[test]
    fn injected_faults_are_caught() {
        for criterion in 1..=10 {
            let cfg = BatteryConfig { trials: Some(200), ..quick(true) };
            let r = run_suite(criterion, &cfg).unwrap();
            assert!(!r.passed(), "fault not detected by {}", summary_line(&r));
            assert!(!r.witnesses.is_empty());
        }
    }

    #[test]
    fn zero_trials_is_vacuous() {
        let cfg = BatteryConfig { trials: Some(0), ..BatteryConfig::default() };
        for r in run_all(&cfg).unwrap() {
            assert_eq!((r.trials, r.checks, r.failures), (0, 0, 0));
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let seq = BatteryConfig { exec: Execution::Sequential, ..quick(false) };
        let par = BatteryConfig { exec: Execution::Parallel, ..quick(false) };
        assert_eq!(run_suite(1, &seq).unwrap(), run_suite(1, &par).unwrap());
        assert_eq!(run_suite(3, &seq).unwrap(), run_suite(3, &par).unwrap());
    }
}
