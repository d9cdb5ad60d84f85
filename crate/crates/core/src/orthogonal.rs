//! Orthogonal and generalized orthogonal catalogs.
//!
//! A catalog carries, beyond the plain subbundle data, the involution
//! `F ↦ F⊥`, the twist degree `n` of the target line bundle, and for each
//! non-isotropic element the isotropic part `N'` of `F ∩ F⊥` (or `ZERO`).

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::checker::{self, Element, Margin, SubbundleCatalog, Verdict, Witness};
use crate::error::{Error, Result};
use crate::filtration::{ValidationReport, WeightedFiltration};
use crate::invariants;
use crate::pattern::{KValue, VanishingPattern};
use crate::rational::Rational;

pub const ZERO: &str = "ZERO";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Radical {
    Zero,
    Element(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrthogonalCatalog {
    pub catalog: SubbundleCatalog,
    /// Twist degree `n`; zero for ordinary orthogonal bundles.
    pub twist: i64,
    perp: Vec<Option<usize>>,
    radical: Vec<Option<Radical>>,
}

/// `(r − r_F, d_F + d (1 − 2 r_F / r))`, failing when the degree is fractional.
pub fn perp_data(r: usize, d: i64, r_f: usize, d_f: i64) -> Result<(usize, i64)> {
    if r_f == 0 || r_f >= r {
        return Err(Error::RankOrder(format!("need 1 <= r_F < r, got r_F={r_f}, r={r}")));
    }
    let num = 2 * d * r_f as i64;
    if num % r as i64 != 0 {
        return Err(Error::NonIntegral(format!("{} - {}/{}", d_f + d, num, r)));
    }
    Ok((r - r_f, d_f + d - num / r as i64))
}

/// `d r_F − r d_F` for `2 r_F = r`; the δ term `δ(2 r_F − r)` vanishes.
pub fn lagrangian_margin(r: usize, d: i64, r_f: usize, d_f: i64, delta: Rational) -> Result<Rational> {
    if !delta.is_positive() {
        return Err(Error::NonPositiveDelta(delta.to_string()));
    }
    if 2 * r_f != r {
        return Err(Error::NotLagrangian(format!("2 r_F = {} differs from r = {r}", 2 * r_f)));
    }
    Ok(Rational::from(d * r_f as i64 - r as i64 * d_f))
}

impl OrthogonalCatalog {
    /// `perp` lists `(F, F⊥)` pairs (either orientation suffices); `radical`
    /// lists `(F, N')` with `N'` an element id or `ZERO`.
    pub fn new(
        catalog: SubbundleCatalog,
        twist: i64,
        perp: &[(String, String)],
        radical: &[(String, String)],
    ) -> Result<Self> {
        let n = catalog.len();
        let mut report = ValidationReport::default();
        let mut perp_map = vec![None; n];
        for (a, b) in perp {
            match (catalog.index_of(a), catalog.index_of(b)) {
                (Ok(i), Ok(j)) => {
                    for (x, y) in [(i, j), (j, i)] {
                        if perp_map[x].is_some_and(|p| p != y) {
                            report.push(format!("perp of {} given twice", catalog.name(x)));
                        }
                        perp_map[x] = Some(y);
                    }
                }
                _ => report.push(format!("perp pair ({a}, {b}) names an unknown element")),
            }
        }
        let mut radical_map = vec![None; n];
        for (a, b) in radical {
            let Ok(i) = catalog.index_of(a) else {
                report.push(format!("radical of unknown element {a:?}"));
                continue;
            };
            let target = if b == ZERO {
                Radical::Zero
            } else if let Ok(j) = catalog.index_of(b) {
                Radical::Element(j)
            } else {
                report.push(format!("radical of {a} is unknown element {b:?}"));
                continue;
            };
            if radical_map[i].replace(target).is_some() {
                report.push(format!("radical of {a} given twice"));
            }
        }
        if !report.is_valid() {
            return Err(Error::InvalidCatalog(report));
        }
        let cat = OrthogonalCatalog { catalog, twist, perp: perp_map, radical: radical_map };
        let report = cat.validate();
        if report.is_valid() {
            Ok(cat)
        } else {
            Err(Error::InvalidCatalog(report))
        }
    }

    pub fn is_ordinary(&self) -> bool {
        self.twist == 0
    }

    pub fn perp_of(&self, i: usize) -> Option<usize> {
        self.perp[i]
    }

    pub fn radical_of(&self, i: usize) -> Option<Radical> {
        self.radical[i]
    }

    /// `(F, F⊥)` id pairs, each listed once.
    pub fn perp_pairs(&self) -> Vec<(String, String)> {
        let c = &self.catalog;
        (0..c.len())
            .filter_map(|i| self.perp[i].filter(|&j| i <= j).map(|j| (c.name(i).to_string(), c.name(j).to_string())))
            .collect()
    }

    pub fn radical_pairs(&self) -> Vec<(String, String)> {
        let c = &self.catalog;
        (0..c.len())
            .filter_map(|i| {
                self.radical[i].map(|rad| {
                    let target = match rad {
                        Radical::Zero => ZERO.to_string(),
                        Radical::Element(j) => c.name(j).to_string(),
                    };
                    (c.name(i).to_string(), target)
                })
            })
            .collect()
    }

    pub fn validate(&self) -> ValidationReport {
        let c = &self.catalog;
        let mut report = c.validate();
        let (r, d) = (c.ambient_rank, c.ambient_degree);
        let n_elems = c.len();
        if self.is_ordinary() {
            if d != 0 {
                report.push(format!("ordinary orthogonal catalog needs degree 0, got {d}"));
            }
        } else if 2 * d != self.twist * r as i64 {
            report.push(format!("twist {} is not 2d/r = {}/{}", self.twist, 2 * d, r));
        }
        if c.is_undecorated() {
            report.push("orthogonal catalog needs a nonzero form");
        }
        for i in 0..n_elems {
            let e = c.element(i);
            let Some(j) = self.perp[i] else {
                report.push(format!("{} has no perp", e.id));
                continue;
            };
            if self.perp[j] != Some(i) {
                report.push(format!("perp is not an involution at {}", e.id));
            }
            let p = c.element(j);
            match perp_data(r, d, e.rank, e.degree) {
                Ok((rank, degree)) => {
                    if p.rank != rank {
                        report.push(format!("rank({}⊥) = {} but r - rank({}) = {rank}", e.id, p.rank, e.id));
                    }
                    if p.degree != degree {
                        report.push(format!("perp degree of {} is {} but should be {degree}", e.id, p.degree));
                    }
                }
                Err(err) => report.push(format!("perp of {}: {err}", e.id)),
            }
            let k = c.k(i);
            if k == KValue::Zero {
                report.push(format!("k({}, E) = 0 in a non-degenerate catalog", e.id));
            }
            // Q(F, G) = 0 forces G ⊂ F⊥.
            for g in 0..n_elems {
                if !c.vanish(i, g) && g != j && !c.less(g, j) {
                    report.push(format!(
                        "Q vanishes on {}·{} but {} is not below {}",
                        e.id,
                        c.name(g),
                        c.name(g),
                        p.id
                    ));
                }
            }
            if k == KValue::One {
                if 2 * e.rank > r {
                    report.push(format!("isotropic {} has rank {} above r/2", e.id, e.rank));
                }
                if j != i {
                    if !c.less(i, j) {
                        report.push(format!("isotropic {} is not below its perp", e.id));
                    }
                    if c.vanish(i, j) {
                        report.push(format!("Q does not vanish on {}·{}⊥", e.id, e.id));
                    }
                    if !c.vanish(j, j) {
                        report.push(format!("{}⊥ is isotropic", e.id));
                    }
                }
                if let Some(rad) = self.radical[i] {
                    if rad != Radical::Element(i) {
                        report.push(format!("radical of isotropic {} must be itself", e.id));
                    }
                }
            } else {
                match self.radical[i] {
                    None => report.push(format!("non-isotropic {} has no radical", e.id)),
                    Some(Radical::Zero) => {
                        // r d_F − d r_F = 0 generalizes deg F = 0.
                        if r as i64 * e.degree != d * e.rank as i64 {
                            report.push(format!("radical of {} is ZERO but its degree is off", e.id));
                        }
                    }
                    Some(Radical::Element(m)) => {
                        let nn = c.element(m);
                        if c.k(m) != KValue::One {
                            report.push(format!("radical {} of {} is not isotropic", nn.id, e.id));
                        }
                        if !c.less(m, i) || !(m == j || c.less(m, j)) {
                            report.push(format!("radical {} is not inside {} and its perp", nn.id, e.id));
                        }
                        let lhs = r as i64 * e.degree - d * e.rank as i64;
                        let rhs = r as i64 * nn.degree - d * nn.rank as i64;
                        if lhs != rhs {
                            report.push(format!("radical degree relation fails for {}", e.id));
                        }
                    }
                }
            }
        }
        report
    }

    fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidCatalog(report))
        }
    }

    pub fn is_isotropic(&self, id: &str) -> Result<bool> {
        let i = self.catalog.index_of(id)?;
        Ok(self.catalog.k(i) != KValue::Two)
    }

    /// The chain `F ⊂ F⊥` at weight one with its induced pattern.
    pub fn critical_triple(&self, id: &str) -> Result<(WeightedFiltration, VanishingPattern)> {
        let c = &self.catalog;
        let i = c.index_of(id)?;
        if c.k(i) == KValue::Two {
            return Err(Error::NotIsotropic(id.to_string()));
        }
        let j = self.perp[i].ok_or_else(|| Error::UnknownElement(format!("{id}⊥")))?;
        if j == i {
            return Err(Error::SelfPerp(id.to_string()));
        }
        let chain = [i, j];
        Ok((c.chain_filtration(&chain), c.chain_pattern(&chain)))
    }
}

/// Slope condition over isotropic elements: margin `d r_F − r d_F`.
pub fn ramanan_margins(cat: &OrthogonalCatalog) -> Vec<Margin> {
    let c = &cat.catalog;
    (0..c.len())
        .filter(|&i| c.k(i) != KValue::Two)
        .map(|i| {
            let e = c.element(i);
            Margin {
                witness: Witness::Subbundle(e.id.clone()),
                constant: Rational::from(c.ambient_degree * e.rank as i64 - c.ambient_rank as i64 * e.degree),
                slope: Rational::ZERO,
            }
        })
        .collect()
}

pub fn ramanan_verdict(cat: &OrthogonalCatalog) -> Result<Verdict> {
    cat.ensure_valid()?;
    Ok(checker::verdict_from_margins(&ramanan_margins(cat), Rational::ONE))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub ramanan: Verdict,
    pub reduced: Verdict,
    pub agree: bool,
    /// Structural facts the equivalence relies on, listed when they fail.
    pub structural: Vec<String>,
}

pub fn equivalence_report(cat: &OrthogonalCatalog, delta: Rational) -> Result<EquivalenceReport> {
    let ramanan = ramanan_verdict(cat)?;
    let reduced = checker::verdict_reduced(&cat.catalog, delta)?;
    let c = &cat.catalog;
    let mut structural = Vec::new();
    for m in checker::reduced_margins(c) {
        if let Witness::CriticalPair(a, b) = &m.witness {
            let (i, j) = (c.index_of(a)?, c.index_of(b)?);
            let perp = cat.perp_of(i).expect("validated");
            if c.k(i) == KValue::Two || !(j == perp || c.less(j, perp)) {
                structural.push(format!("critical pair ({a}, {b}) without {a} isotropic and {b} inside {a}⊥"));
            }
        }
    }
    for i in 0..c.len() {
        if cat.radical_of(i) == Some(Radical::Zero) && cat.is_ordinary() {
            let e = c.element(i);
            let margin = checker::subbundle_margin(c.ambient_rank, c.ambient_degree, e.rank, e.degree, c.k(i), delta)?;
            if !margin.is_positive() {
                structural.push(format!("{} has zero radical but margin {margin}", e.id));
            }
        }
    }
    for i in 0..c.len() {
        if c.k(i) == KValue::One && cat.perp_of(i) != Some(i) {
            let (f, m) = cat.critical_triple(c.name(i))?;
            if !invariants::is_critical(&f, &m)? {
                structural.push(format!("triple of {} is not critical", c.name(i)));
            }
        }
    }
    Ok(EquivalenceReport { agree: ramanan.class == reduced.class, ramanan, reduced, structural })
}

/// Coordinate model: hyperbolic pairs `e_i, f_i` with `Q(e_i, f_i) ≠ 0` and
/// anisotropic lines `g_j` with `Q(g_j, g_j) ≠ 0`. Subbundles are coordinate
/// subsets; `S⊥` is the complement of the partners of `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoordinateModel {
    /// Degrees `a_i` of the `e_i`; `f_i` has degree `n − a_i`.
    pub pair_degrees: Vec<i64>,
    pub anisotropic: usize,
    pub twist: i64,
}

type Subset = BTreeSet<usize>;

impl CoordinateModel {
    pub fn rank(&self) -> usize {
        2 * self.pair_degrees.len() + self.anisotropic
    }

    fn pairs(&self) -> usize {
        self.pair_degrees.len()
    }

    /// Coordinates are `e_i = i`, `f_i = h + i`, `g_j = 2h + j`.
    pub fn partner(&self, x: usize) -> usize {
        let h = self.pairs();
        if x < h {
            x + h
        } else if x < 2 * h {
            x - h
        } else {
            x
        }
    }

    pub fn name(&self, x: usize) -> String {
        let h = self.pairs();
        if x < h {
            format!("e{}", x + 1)
        } else if x < 2 * h {
            format!("f{}", x - h + 1)
        } else {
            format!("g{}", x - 2 * h + 1)
        }
    }

    fn weight(&self, x: usize) -> i64 {
        let h = self.pairs();
        if x < h {
            self.pair_degrees[x]
        } else if x < 2 * h {
            self.twist - self.pair_degrees[x - h]
        } else {
            debug_assert!(self.twist % 2 == 0, "anisotropic lines need an even twist");
            self.twist / 2
        }
    }

    pub fn degree(&self, s: &Subset) -> i64 {
        s.iter().map(|&x| self.weight(x)).sum()
    }

    pub fn perp(&self, s: &Subset) -> Subset {
        let partners: Subset = s.iter().map(|&x| self.partner(x)).collect();
        (0..self.rank()).filter(|x| !partners.contains(x)).collect()
    }

    pub fn pairs_nonzero(&self, s: &Subset, t: &Subset) -> bool {
        s.iter().any(|&x| t.contains(&self.partner(x)))
    }

    pub fn id(&self, s: &Subset) -> String {
        s.iter().map(|&x| self.name(x)).collect::<Vec<_>>().join("+")
    }

    /// Closes `seeds` under perp and radicals, dropping `0` and `E`.
    pub fn close(&self, seeds: &[Subset]) -> Vec<Subset> {
        let r = self.rank();
        let proper = |s: &Subset| !s.is_empty() && s.len() < r;
        let mut set: BTreeSet<Subset> = seeds.iter().filter(|s| proper(s)).cloned().collect();
        loop {
            let mut added = Vec::new();
            for s in &set {
                let p = self.perp(s);
                let rad: Subset = s.intersection(&p).copied().collect();
                for cand in [p, rad] {
                    if proper(&cand) && !set.contains(&cand) {
                        added.push(cand);
                    }
                }
            }
            if added.is_empty() {
                break;
            }
            set.extend(added);
        }
        let mut out: Vec<Subset> = set.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// The orthogonal catalog on a perp- and radical-closed family.
    pub fn catalog(&self, family: &[Subset]) -> Result<OrthogonalCatalog> {
        let r = self.rank();
        let d = self.twist * r as i64 / 2;
        let index: HashMap<&Subset, usize> = family.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let elements: Vec<Element> = family.iter().map(|s| Element::new(self.id(s), s.len(), self.degree(s))).collect();
        let n = family.len();
        let less = (0..n)
            .map(|i| (0..n).map(|j| family[i].len() < family[j].len() && family[i].is_subset(&family[j])).collect())
            .collect();
        let all: Subset = (0..r).collect();
        let with_top: Vec<&Subset> = family.iter().chain(std::iter::once(&all)).collect();
        let vanish = with_top.iter().map(|s| with_top.iter().map(|t| self.pairs_nonzero(s, t)).collect()).collect();
        let catalog = SubbundleCatalog::from_tables(r, d, elements, less, vanish)?;
        let mut perp = Vec::new();
        let mut radical = Vec::new();
        for s in family {
            let p = self.perp(s);
            let j = *index.get(&p).ok_or_else(|| Error::Generation(format!("{} has no perp in family", self.id(s))))?;
            perp.push((self.id(s), self.id(&family[j])));
            let rad: Subset = s.intersection(&p).copied().collect();
            let target = if rad.is_empty() {
                ZERO.to_string()
            } else if index.contains_key(&rad) {
                self.id(&rad)
            } else {
                return Err(Error::Generation(format!("radical of {} missing", self.id(s))));
            };
            radical.push((self.id(s), target));
        }
        OrthogonalCatalog::new(catalog, self.twist, &perp, &radical)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{verdict_reduced, StabilityClass, AMBIENT};
    use crate::rational::q;

    fn s(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    /// `r = 2`, `d = 0`, one isotropic line of degree `deg` that is its own perp.
    fn line(deg: i64) -> OrthogonalCatalog {
        let cat =
            SubbundleCatalog::new(2, 0, vec![Element::new("L", 1, deg)], &[], &[s("L", AMBIENT), s(AMBIENT, AMBIENT)])
                .unwrap();
        OrthogonalCatalog::new(cat, 0, &[s("L", "L")], &[]).unwrap()
    }

    #[test]
    fn perp_data_examples() {
        assert_eq!(perp_data(4, 0, 1, -1).unwrap(), (3, -1));
        assert_eq!(perp_data(2, 2, 1, 0).unwrap(), (1, 0));
        assert!(matches!(perp_data(3, 1, 1, 0), Err(Error::NonIntegral(_))));
    }

    #[test]
    fn lagrangian_margin_examples() {
        assert_eq!(lagrangian_margin(2, 0, 1, 0, q(1, 1)).unwrap(), Rational::ZERO);
        assert_eq!(lagrangian_margin(4, 0, 2, -1, q(1, 1)).unwrap(), q(4, 1));
        assert_eq!(lagrangian_margin(4, 0, 2, 1, q(1, 1)).unwrap(), q(-4, 1));
        assert!(lagrangian_margin(4, 0, 1, 1, q(1, 1)).is_err());
    }

    #[test]
    fn ramanan_on_lines() {
        assert_eq!(ramanan_verdict(&line(-1)).unwrap().margin, Some(q(2, 1)));
        let v = ramanan_verdict(&line(1)).unwrap();
        assert_eq!((v.class, v.margin), (StabilityClass::Unstable, Some(q(-2, 1))));
        for delta in [q(1, 4), q(1, 1), q(5, 1)] {
            for deg in [-1, 0, 1] {
                let rep = equivalence_report(&line(deg), delta).unwrap();
                assert!(rep.agree && rep.structural.is_empty(), "{rep:?}");
            }
        }
    }

    #[test]
    fn no_isotropic_elements_is_vacuous() {
        let model = CoordinateModel { pair_degrees: vec![], anisotropic: 3, twist: 0 };
        let family = model.close(&[BTreeSet::from([0])]);
        let cat = model.catalog(&family).unwrap();
        assert!(cat.catalog.elements().iter().all(|e| !cat.is_isotropic(&e.id).unwrap()));
        assert_eq!(ramanan_verdict(&cat).unwrap().class, StabilityClass::Stable);
    }

    #[test]
    fn coordinate_model_rank_three() {
        let model = CoordinateModel { pair_degrees: vec![-1], anisotropic: 1, twist: 0 };
        let family = model.close(&[BTreeSet::from([0])]);
        let ids: Vec<String> = family.iter().map(|s| model.id(s)).collect();
        assert_eq!(ids, vec!["e1", "e1+g1"]);
        let cat = model.catalog(&family).unwrap();
        assert!(cat.is_isotropic("e1").unwrap());
        let (f, m) = cat.critical_triple("e1").unwrap();
        assert_eq!(m, VanishingPattern::critical_pair());
        assert!(invariants::is_critical(&f, &m).unwrap());
        assert!(matches!(cat.critical_triple("e1+g1"), Err(Error::NotIsotropic(_))));
        for delta in [q(1, 4), q(1, 1), q(2, 1)] {
            let rep = equivalence_report(&cat, delta).unwrap();
            assert!(rep.agree && rep.structural.is_empty(), "{rep:?}");
        }
    }

    #[test]
    fn self_perp_triple_rejected() {
        assert!(matches!(line(0).critical_triple("L"), Err(Error::SelfPerp(_))));
    }

    #[test]
    fn wrong_perp_degree_rejected() {
        let cat = SubbundleCatalog::new(
            4,
            0,
            vec![Element::new("F", 1, -1), Element::new("P", 3, 0)],
            &[s("F", "P")],
            &[s("F", AMBIENT), s("P", "P"), s("P", AMBIENT), s(AMBIENT, AMBIENT)],
        )
        .unwrap();
        let err = OrthogonalCatalog::new(cat, 0, &[s("F", "P")], &[s("P", "F")]).unwrap_err();
        assert!(err.to_string().contains("perp degree"), "{err}");
    }

    #[test]
    fn generalized_lagrangian_pair() {
        // n = 2: e1 has degree a, f1 has degree 2 − a; d = n r / 2 = 2.
        let model = CoordinateModel { pair_degrees: vec![0, 3], anisotropic: 0, twist: 2 };
        let family = model.close(&[BTreeSet::from([0, 1]), BTreeSet::from([0])]);
        let cat = model.catalog(&family).unwrap();
        assert!(!cat.is_ordinary());
        let e12 = cat.catalog.index_of("e1+e2").unwrap();
        assert_eq!(cat.perp_of(e12), Some(e12));
        for delta in [q(1, 4), q(1, 1), q(2, 1)] {
            let rep = equivalence_report(&cat, delta).unwrap();
            assert!(rep.agree, "{rep:?}");
            assert_eq!(rep.reduced.class, verdict_reduced(&cat.catalog, delta).unwrap().class);
        }
    }
}
