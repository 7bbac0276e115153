// SPDX-License-Identifier: Apache-2.0
//! Structured Boolean functions that may label internal gates.
//!
//! Every function reads its inputs through an index set. The symmetric
//! kinds (AND, OR, NAND, MAJ) take `m` positions; RANK takes an `a x b`
//! grid of cells. Inputs are always passed in the canonical lexicographic
//! order of the index set.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rank::{is_prime, rank_mod_p};

/// How MAJ treats exact ties.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MajorityConvention {
    /// MAJ[m] is 1 iff at least `ceil(m/2)` inputs are 1.
    #[default]
    AtLeastHalf,
    /// MAJ[m] is 1 iff more than `m/2` inputs are 1.
    Strict,
}

impl MajorityConvention {
    /// Smallest number of ones that makes MAJ[m] true.
    pub fn threshold(self, m: usize) -> usize {
        match self {
            MajorityConvention::AtLeastHalf => m.div_ceil(2),
            MajorityConvention::Strict => m / 2 + 1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StructuredFunction {
    And(usize),
    Or(usize),
    Nand(usize),
    Maj(usize),
    /// `[rank_p(M) <= r]` for an `rows x cols` 0/1 matrix `M`.
    Rank {
        r: usize,
        p: u64,
        rows: usize,
        cols: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FunctionError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("RANK needs rows >= 1 and cols >= 1, got {rows}x{cols}")]
    EmptyRank { rows: usize, cols: usize },
    #[error("rank threshold {r} exceeds min({rows}, {cols})")]
    ThresholdTooLarge { r: usize, rows: usize, cols: usize },
}

/// An element of the index set of a structured function (1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IndexElement {
    /// Position `i` of a symmetric function.
    Pos(usize),
    /// Cell `(row, col)` of a RANK function.
    Cell(usize, usize),
}

/// An element of the (sorted) universe of a structured function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UniverseElement {
    Pos(usize),
    Row(usize),
    Col(usize),
}

impl IndexElement {
    /// The universe elements occurring in this tuple, in coordinate order.
    pub fn coordinates(self) -> Vec<UniverseElement> {
        match self {
            IndexElement::Pos(i) => vec![UniverseElement::Pos(i)],
            IndexElement::Cell(i, j) => vec![UniverseElement::Row(i), UniverseElement::Col(j)],
        }
    }

    pub fn to_vec(self) -> Vec<usize> {
        match self {
            IndexElement::Pos(i) => vec![i],
            IndexElement::Cell(i, j) => vec![i, j],
        }
    }
}

impl fmt::Display for IndexElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexElement::Pos(i) => write!(f, "({i})"),
            IndexElement::Cell(i, j) => write!(f, "({i},{j})"),
        }
    }
}

impl fmt::Display for UniverseElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UniverseElement::Pos(i) => write!(f, "pos{i}"),
            UniverseElement::Row(i) => write!(f, "row{i}"),
            UniverseElement::Col(j) => write!(f, "col{j}"),
        }
    }
}

impl StructuredFunction {
    pub fn rank(r: usize, p: u64, rows: usize, cols: usize) -> Result<Self, FunctionError> {
        let f = StructuredFunction::Rank { r, p, rows, cols };
        f.check()?;
        Ok(f)
    }

    /// Checks the parameter constraints of the function.
    pub fn check(&self) -> Result<(), FunctionError> {
        if let StructuredFunction::Rank { r, p, rows, cols } = *self {
            if rows == 0 || cols == 0 {
                return Err(FunctionError::EmptyRank { rows, cols });
            }
            if r > rows.min(cols) {
                return Err(FunctionError::ThresholdTooLarge { r, rows, cols });
            }
            if !is_prime(p) {
                return Err(FunctionError::NotPrime(p));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            StructuredFunction::And(_) => "AND",
            StructuredFunction::Or(_) => "OR",
            StructuredFunction::Nand(_) => "NAND",
            StructuredFunction::Maj(_) => "MAJ",
            StructuredFunction::Rank { .. } => "RANK",
        }
    }

    /// True for the functions whose automorphism group is the full symmetric
    /// group on the positions.
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, StructuredFunction::Rank { .. })
    }

    /// Number of index elements (the fan-in of a gate using this function).
    pub fn index_len(&self) -> usize {
        match *self {
            StructuredFunction::And(m)
            | StructuredFunction::Or(m)
            | StructuredFunction::Nand(m)
            | StructuredFunction::Maj(m) => m,
            StructuredFunction::Rank { rows, cols, .. } => rows * cols,
        }
    }

    /// Same kind and parameters but a different fan-in. RANK is returned
    /// unchanged.
    pub fn with_fan_in(&self, m: usize) -> Self {
        match *self {
            StructuredFunction::And(_) => StructuredFunction::And(m),
            StructuredFunction::Or(_) => StructuredFunction::Or(m),
            StructuredFunction::Nand(_) => StructuredFunction::Nand(m),
            StructuredFunction::Maj(_) => StructuredFunction::Maj(m),
            f @ StructuredFunction::Rank { .. } => f,
        }
    }

    /// Index element at a canonical position (0-based).
    pub fn element_at(&self, pos: usize) -> IndexElement {
        match *self {
            StructuredFunction::Rank { cols, .. } => {
                IndexElement::Cell(pos / cols + 1, pos % cols + 1)
            }
            _ => IndexElement::Pos(pos + 1),
        }
    }

    /// Canonical position (0-based) of an index element, if it belongs to the
    /// index set.
    pub fn position(&self, x: IndexElement) -> Option<usize> {
        match (*self, x) {
            (StructuredFunction::Rank { rows, cols, .. }, IndexElement::Cell(i, j)) => {
                (1..=rows).contains(&i).then_some(())?;
                (1..=cols).contains(&j).then_some((i - 1) * cols + (j - 1))
            }
            (StructuredFunction::Rank { .. }, _) | (_, IndexElement::Cell(..)) => None,
            (f, IndexElement::Pos(i)) => (1..=f.index_len()).contains(&i).then_some(i - 1),
        }
    }

    pub fn index_elements(&self) -> Vec<IndexElement> {
        (0..self.index_len()).map(|p| self.element_at(p)).collect()
    }

    /// The universe of the function: positions, or rows followed by columns.
    pub fn universe(&self) -> Vec<UniverseElement> {
        match *self {
            StructuredFunction::Rank { rows, cols, .. } => (1..=rows)
                .map(UniverseElement::Row)
                .chain((1..=cols).map(UniverseElement::Col))
                .collect(),
            f => (1..=f.index_len()).map(UniverseElement::Pos).collect(),
        }
    }

    /// Positions (0-based) of the index elements containing `a`.
    pub fn positions_containing(&self, a: UniverseElement) -> Vec<usize> {
        match (*self, a) {
            (StructuredFunction::Rank { rows, cols, .. }, UniverseElement::Row(i))
                if (1..=rows).contains(&i) =>
            {
                (0..cols).map(|j| (i - 1) * cols + j).collect()
            }
            (StructuredFunction::Rank { rows, cols, .. }, UniverseElement::Col(j))
                if (1..=cols).contains(&j) =>
            {
                (0..rows).map(|i| i * cols + (j - 1)).collect()
            }
            (StructuredFunction::Rank { .. }, _) => Vec::new(),
            (f, UniverseElement::Pos(i)) if (1..=f.index_len()).contains(&i) => vec![i - 1],
            _ => Vec::new(),
        }
    }

    /// Evaluates the function on inputs given in canonical index order.
    pub fn apply(&self, inputs: &[bool], convention: MajorityConvention) -> bool {
        debug_assert_eq!(inputs.len(), self.index_len());
        match *self {
            StructuredFunction::And(_) => inputs.iter().all(|&b| b),
            StructuredFunction::Or(_) => inputs.iter().any(|&b| b),
            StructuredFunction::Nand(_) => !inputs.iter().all(|&b| b),
            StructuredFunction::Maj(m) => {
                let ones = inputs.iter().filter(|&&b| b).count();
                ones >= convention.threshold(m)
            }
            StructuredFunction::Rank { r, p, rows, cols } => {
                let matrix: Vec<Vec<u64>> = (0..rows)
                    .map(|i| (0..cols).map(|j| inputs[i * cols + j] as u64).collect())
                    .collect();
                // Parameters were checked at construction time.
                rank_mod_p(&matrix, p).map(|k| k <= r).unwrap_or(false)
            }
        }
    }
}

impl fmt::Display for StructuredFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            StructuredFunction::Rank { r, p, rows, cols } => {
                write!(f, "RANK^{r}_{p}[{rows},{cols}]")
            }
            g => write!(f, "{}[{}]", g.name(), g.index_len()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_and_or() {
        let c = MajorityConvention::AtLeastHalf;
        assert!(StructuredFunction::And(0).apply(&[], c));
        assert!(!StructuredFunction::Or(0).apply(&[], c));
    }

    #[test]
    fn nand_and_maj() {
        let c = MajorityConvention::AtLeastHalf;
        assert!(!StructuredFunction::Nand(1).apply(&[true], c));
        assert!(StructuredFunction::Maj(2).apply(&[true, false], c));
        assert!(!StructuredFunction::Maj(2).apply(&[true, false], MajorityConvention::Strict));
        assert!(StructuredFunction::Maj(3).apply(&[true, true, false], MajorityConvention::Strict));
    }

    #[test]
    fn rank_positions() {
        let f = StructuredFunction::rank(1, 2, 2, 3).unwrap();
        assert_eq!(f.element_at(4), IndexElement::Cell(2, 2));
        assert_eq!(f.position(IndexElement::Cell(2, 3)), Some(5));
        assert_eq!(f.positions_containing(UniverseElement::Col(2)), vec![1, 4]);
        assert_eq!(
            StructuredFunction::rank(1, 4, 2, 2),
            Err(FunctionError::NotPrime(4))
        );
        assert!(StructuredFunction::rank(3, 2, 2, 2).is_err());
    }
}
