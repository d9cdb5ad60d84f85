//! Vanishing patterns: the symmetric 0/1 matrix recording where the quadric
//! form is nonzero on `E_i · E_j`, and the derived k-function.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::{Index, ValidationReport};

/// Square 0/1 matrix over `{1..t, ⊤}`; the last row/column is the ambient bundle.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct VanishingPattern {
    bits: Vec<Vec<bool>>,
}

impl VanishingPattern {
    /// Builds from 0/1 rows. Only shape is checked here; use [`validate_pattern`]
    /// for the structural invariants.
    pub fn from_rows(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows.len();
        let mut report = ValidationReport::default();
        if n == 0 {
            report.push("pattern is empty");
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                report.push(format!("row {} has {} entries, expected {n}", i + 1, row.len()));
            }
            if row.iter().any(|&b| b > 1) {
                report.push(format!("row {} has entries outside {{0,1}}", i + 1));
            }
        }
        if !report.is_valid() {
            return Err(Error::InvalidPattern(report));
        }
        Ok(VanishingPattern { bits: rows.into_iter().map(|r| r.into_iter().map(|b| b == 1).collect()).collect() })
    }

    pub fn from_bits(bits: Vec<Vec<bool>>) -> Self {
        VanishingPattern { bits }
    }

    pub fn all_ones(size: usize) -> Self {
        VanishingPattern { bits: vec![vec![true; size]; size] }
    }

    /// The unique critical length-two pattern `[[0,0,1],[0,1,1],[1,1,1]]`.
    pub fn critical_pair() -> Self {
        Self::from_rows(vec![vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]).expect("static shape")
    }

    /// `m[i][j] = 1` iff `i + j ≥ t + 2` (1-based); the rank-five example is `staircase(4)`.
    pub fn staircase(t: usize) -> Self {
        let n = t + 1;
        let bits = (0..n).map(|i| (0..n).map(|j| i + j >= n - 1).collect()).collect();
        VanishingPattern { bits }
    }

    /// Number of rows, `t + 1`.
    pub fn size(&self) -> usize {
        self.bits.len()
    }

    /// Filtration length this pattern describes.
    pub fn len(&self) -> usize {
        self.bits.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn raw(&self, row: usize, col: usize) -> bool {
        self.bits[row][col]
    }

    pub fn get(&self, i: Index, j: Index) -> bool {
        let t = self.len();
        self.bits[i.row(t)][j.row(t)]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.bits.iter().map(|r| r.iter().map(|&b| b as u8).collect()).collect()
    }

    /// k-value of position `i` (1-based) relative to the ambient bundle.
    pub fn k(&self, i: usize) -> KValue {
        let t = self.len();
        let ff = self.bits[i - 1][i - 1];
        let ft = self.bits[i - 1][t];
        k_value(ff, ft).expect("validated pattern is monotone")
    }

    /// Restriction to `subset ∪ {⊤}`; `subset` is 1-based and increasing.
    pub fn restrict(&self, subset: &[usize]) -> VanishingPattern {
        let t = self.len();
        let rows: Vec<usize> = subset.iter().map(|&i| i - 1).chain(std::iter::once(t)).collect();
        let bits = rows.iter().map(|&a| rows.iter().map(|&b| self.bits[a][b]).collect()).collect();
        VanishingPattern { bits }
    }

    /// Smallest symmetric, upward-closed pattern containing this one.
    pub fn monotone_closure(&self) -> VanishingPattern {
        let n = self.size();
        let mut bits = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                if self.bits[i][j] {
                    for a in i..n {
                        for b in j..n {
                            bits[a][b] = true;
                            bits[b][a] = true;
                        }
                    }
                }
            }
        }
        VanishingPattern { bits }
    }
}

impl TryFrom<Vec<Vec<u8>>> for VanishingPattern {
    type Error = Error;
    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<VanishingPattern> for Vec<Vec<u8>> {
    fn from(p: VanishingPattern) -> Self {
        p.rows()
    }
}

impl fmt::Display for VanishingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> =
            self.bits.iter().map(|r| r.iter().map(|&b| if b { '1' } else { '0' }).collect()).collect();
        write!(f, "[{}]", rows.join(","))
    }
}

pub fn validate_pattern(m: &VanishingPattern) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = m.size();
    if n == 0 {
        report.push("pattern is empty");
        return report;
    }
    'sym: for i in 0..n {
        for j in 0..i {
            if m.bits[i][j] != m.bits[j][i] {
                report.push(format!("symmetry broken at ({}, {})", i + 1, j + 1));
                break 'sym;
            }
        }
    }
    // Upward propagation only needs checking against the immediate successors.
    'mono: for i in 0..n {
        for j in 0..n {
            if !m.bits[i][j] {
                continue;
            }
            if (i + 1 < n && !m.bits[i + 1][j]) || (j + 1 < n && !m.bits[i][j + 1]) {
                report.push(format!("monotonicity broken above ({}, {})", i + 1, j + 1));
                break 'mono;
            }
        }
    }
    if !m.bits[n - 1][n - 1] {
        report.push("ambient entry must be 1");
    }
    report
}

/// How a subbundle meets the form: 2 if nonzero on `F·F`, 1 if only on `F·E`, else 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KValue {
    Zero,
    One,
    Two,
}

impl KValue {
    pub fn value(self) -> i64 {
        match self {
            KValue::Zero => 0,
            KValue::One => 1,
            KValue::Two => 2,
        }
    }
}

impl fmt::Display for KValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// `m_ff` is the bit on `F·F`, `m_ft` the bit on `F·E`.
pub fn k_value(m_ff: bool, m_ft: bool) -> Result<KValue> {
    match (m_ff, m_ft) {
        (true, true) => Ok(KValue::Two),
        (false, true) => Ok(KValue::One),
        (false, false) => Ok(KValue::Zero),
        (true, false) => Err(Error::Monotonicity),
    }
}
