//! Weighted filtrations `0 ⊂ E_1 ⊂ … ⊂ E_t ⊂ E` and positional indexing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::Rational;

/// A position in `{1..t} ∪ {⊤}`. Positions are 1-based; `Ambient` is the
/// whole bundle and always sorts last.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    At(usize),
    Ambient,
}

impl Index {
    /// Zero-based row in a pattern of a length-`t` filtration.
    pub fn row(self, t: usize) -> usize {
        match self {
            Index::At(i) => i - 1,
            Index::Ambient => t,
        }
    }

    pub fn from_row(row: usize, t: usize) -> Index {
        if row == t {
            Index::Ambient
        } else {
            Index::At(row + 1)
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::At(i) => write!(f, "{i}"),
            Index::Ambient => write!(f, "AMBIENT"),
        }
    }
}

/// List of violated invariants. Empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, msg: impl Into<String>) {
        self.violations.push(msg.into());
    }

    pub fn contains(&self, needle: &str) -> bool {
        self.violations.iter().any(|v| v.contains(needle))
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.violations.extend(other.violations);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "valid")
        } else {
            write!(f, "{}", self.violations.join("; "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedFiltration {
    pub ambient_rank: usize,
    pub ambient_degree: i64,
    pub ranks: Vec<usize>,
    pub degrees: Vec<i64>,
    pub weights: Vec<Rational>,
}

impl WeightedFiltration {
    pub fn new(
        ambient_rank: usize,
        ambient_degree: i64,
        ranks: Vec<usize>,
        degrees: Vec<i64>,
        weights: Vec<Rational>,
    ) -> Self {
        WeightedFiltration { ambient_rank, ambient_degree, ranks, degrees, weights }
    }

    /// All weights equal to one.
    pub fn unit(ambient_rank: usize, ambient_degree: i64, ranks: Vec<usize>, degrees: Vec<i64>) -> Self {
        let weights = vec![Rational::ONE; ranks.len()];
        Self::new(ambient_rank, ambient_degree, ranks, degrees, weights)
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn validate(&self) -> ValidationReport {
        validate_filtration(self)
    }

    /// The subfiltration on `subset` (1-based, increasing) with the given weights.
    pub fn sub(&self, subset: &[usize], weights: &[Rational]) -> WeightedFiltration {
        WeightedFiltration {
            ambient_rank: self.ambient_rank,
            ambient_degree: self.ambient_degree,
            ranks: subset.iter().map(|&i| self.ranks[i - 1]).collect(),
            degrees: subset.iter().map(|&i| self.degrees[i - 1]).collect(),
            weights: weights.to_vec(),
        }
    }

    pub fn with_weights(&self, weights: Vec<Rational>) -> WeightedFiltration {
        WeightedFiltration { weights, ..self.clone() }
    }

    /// Scale every weight by `lambda`.
    pub fn scaled(&self, lambda: Rational) -> WeightedFiltration {
        self.with_weights(self.weights.iter().map(|&w| w * lambda).collect())
    }
}

pub fn validate_filtration(f: &WeightedFiltration) -> ValidationReport {
    let mut report = ValidationReport::default();
    let r = f.ambient_rank;
    let t = f.ranks.len();
    if r == 0 {
        report.push("ambient rank must be positive");
    }
    if t == 0 {
        report.push("filtration length must be positive");
    }
    if f.degrees.len() != t {
        report.push(format!("{} degrees for {} ranks", f.degrees.len(), t));
    }
    if f.weights.len() != t {
        report.push(format!("{} weights for {} ranks", f.weights.len(), t));
    }
    if r > 0 && t > r.saturating_sub(1) {
        report.push(format!("length {t} exceeds r-1 = {}", r.saturating_sub(1)));
    }
    if f.ranks.windows(2).any(|w| w[0] >= w[1]) {
        report.push("ranks not strictly increasing");
    }
    for (i, &ri) in f.ranks.iter().enumerate() {
        if ri == 0 || ri >= r {
            report.push(format!("rank r_{} = {ri} outside [1, {}]", i + 1, r.saturating_sub(1)));
        }
    }
    for (i, w) in f.weights.iter().enumerate() {
        if !w.is_positive() {
            report.push(format!("nonpositive weight alpha_{} = {w}", i + 1));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn example() -> WeightedFiltration {
        WeightedFiltration::unit(5, 0, vec![1, 2, 3, 4], vec![0, 0, 0, 0])
    }

    #[test]
    fn rank_five_example_is_valid() {
        assert!(validate_filtration(&example()).is_valid());
    }

    #[test]
    fn duplicate_rank_rejected() {
        let f = WeightedFiltration::unit(5, 0, vec![2, 2], vec![0, 0]);
        let rep = validate_filtration(&f);
        assert!(rep.contains("ranks not strictly increasing"), "{rep}");
    }

    #[test]
    fn zero_weight_rejected() {
        let f = example().with_weights(vec![q(1, 1), q(0, 1), q(1, 1), q(1, 1)]);
        assert!(validate_filtration(&f).contains("nonpositive weight"));
    }

    #[test]
    fn rank_at_ambient_rejected() {
        let f = WeightedFiltration::unit(3, 0, vec![1, 3], vec![0, 0]);
        let rep = validate_filtration(&f);
        assert!(rep.contains("outside"), "{rep}");
    }

    #[test]
    fn index_rows_round_trip() {
        for t in 1..5 {
            for row in 0..=t {
                assert_eq!(Index::from_row(row, t).row(t), row);
            }
        }
        assert!(Index::At(7) < Index::Ambient);
    }
}
