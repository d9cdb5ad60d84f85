//! One-node parabolic structure: each element carries `p_F`, the dimension of
//! its image under the gluing map, and every degree becomes `d_F − p_F`.

use crate::checker::{self, SubbundleCatalog, Verdict};
use crate::error::{Error, Result};
use crate::filtration::ValidationReport;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParabolicData {
    /// One value per catalog element, in catalog order.
    pub p: Vec<usize>,
    pub p_ambient: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParabolicCatalog {
    pub catalog: SubbundleCatalog,
    pub data: ParabolicData,
}

pub fn parabolic_degree(d_f: i64, p_f: usize) -> i64 {
    d_f - p_f as i64
}

pub fn validate_parabolic(cat: &SubbundleCatalog, data: &ParabolicData) -> ValidationReport {
    let mut report = ValidationReport::default();
    let r = cat.ambient_rank;
    if data.p.len() != cat.len() {
        report.push(format!("{} parabolic values for {} elements", data.p.len(), cat.len()));
        return report;
    }
    if data.p_ambient != r {
        report.push(format!("p of AMBIENT is {} but the gluing map is onto a rank-{r} space", data.p_ambient));
    }
    for (i, e) in cat.elements().iter().enumerate() {
        let bound = (2 * e.rank).min(r);
        if data.p[i] > bound {
            report.push(format!("p of {} is {} above min(2 rank, r) = {bound}", e.id, data.p[i]));
        }
        for j in 0..cat.len() {
            if cat.less(i, j) && data.p[i] > data.p[j] {
                report.push(format!("p not monotone: {} < {} but {} > {}", e.id, cat.name(j), data.p[i], data.p[j]));
            }
        }
    }
    report
}

impl ParabolicCatalog {
    pub fn new(catalog: SubbundleCatalog, data: ParabolicData) -> Result<Self> {
        let report = validate_parabolic(&catalog, &data);
        if report.is_valid() {
            Ok(ParabolicCatalog { catalog, data })
        } else {
            Err(Error::InvalidCatalog(report))
        }
    }

    /// Same catalog with every degree replaced by its parabolic degree.
    pub fn shifted(&self) -> SubbundleCatalog {
        let c = &self.catalog;
        let degrees: Vec<i64> =
            c.elements().iter().zip(&self.data.p).map(|(e, &p)| parabolic_degree(e.degree, p)).collect();
        c.with_degrees(parabolic_degree(c.ambient_degree, self.data.p_ambient), &degrees)
    }
}

pub fn parabolic_verdict_full(pc: &ParabolicCatalog, delta: Rational) -> Result<Verdict> {
    checker::verdict_full(&pc.shifted(), delta)
}

pub fn parabolic_verdict_reduced(pc: &ParabolicCatalog, delta: Rational) -> Result<Verdict> {
    checker::verdict_reduced(&pc.shifted(), delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::{Element, StabilityClass, AMBIENT};
    use crate::rational::q;

    fn s(a: &str, b: &str) -> (String, String) {
        (a.to_string(), b.to_string())
    }

    #[test]
    fn degree_examples() {
        assert_eq!(parabolic_degree(3, 2), 1);
        assert_eq!(parabolic_degree(2, 1), 1);
        assert_eq!(parabolic_degree(-4, 0), -4);
    }

    #[test]
    fn zero_p_is_an_ambient_shift() {
        let cat = SubbundleCatalog::new(
            3,
            2,
            vec![Element::new("F", 1, 0)],
            &[],
            &[s("F", "F"), s("F", AMBIENT), s(AMBIENT, AMBIENT)],
        )
        .unwrap();
        let pc = ParabolicCatalog::new(cat.clone(), ParabolicData { p: vec![0], p_ambient: 3 }).unwrap();
        assert_eq!(pc.shifted(), cat.with_degrees(-1, &[0]));
        for delta in [q(1, 4), q(1, 1)] {
            assert_eq!(
                parabolic_verdict_full(&pc, delta).unwrap(),
                checker::verdict_full(&cat.with_degrees(-1, &[0]), delta).unwrap()
            );
        }
    }

    #[test]
    fn pure_bundle_slope_condition() {
        // r = 2, d = 3, F = (1, 2): deg_par E = 1, deg_par F = 2 − p.
        let cat = SubbundleCatalog::new(2, 3, vec![Element::new("F", 1, 2)], &[], &[]).unwrap();
        let class = |p| {
            let pc = ParabolicCatalog::new(cat.clone(), ParabolicData { p: vec![p], p_ambient: 2 }).unwrap();
            parabolic_verdict_reduced(&pc, q(1, 1)).unwrap().class
        };
        assert_eq!(class(0), StabilityClass::Unstable);
        assert_eq!(class(1), StabilityClass::Unstable);
        assert_eq!(class(2), StabilityClass::Stable);
    }

    #[test]
    fn invalid_data_rejected() {
        let cat =
            SubbundleCatalog::new(3, 0, vec![Element::new("G", 1, 0), Element::new("F", 2, 0)], &[s("G", "F")], &[])
                .unwrap();
        let bad = |p: Vec<usize>, top| ParabolicCatalog::new(cat.clone(), ParabolicData { p, p_ambient: top });
        assert!(bad(vec![0, 0], 2).unwrap_err().to_string().contains("AMBIENT"));
        assert!(bad(vec![3, 3], 3).unwrap_err().to_string().contains("above"));
        assert!(bad(vec![2, 1], 3).unwrap_err().to_string().contains("monotone"));
        assert!(bad(vec![1, 2], 3).is_ok());
    }
}
