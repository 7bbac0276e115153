// SPDX-License-Identifier: Apache-2.0
//! Set partitions of `[n]` and canonical supports.

use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("partitions of [{0}] and [{1}] cannot be joined")]
    GroundSetMismatch(usize, usize),
    #[error("parts do not partition [{n}]: {detail}")]
    NotAPartition { n: usize, detail: String },
}

/// Disjoint-set forest over `0..n`.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// A partition of `[n]` (1-based). Parts are sorted and ordered by their
/// minimum element, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Partition {
    n: usize,
    parts: Vec<Vec<usize>>,
}

impl Partition {
    pub fn new(n: usize, parts: Vec<Vec<usize>>) -> Result<Self, PartitionError> {
        let mut seen = vec![false; n + 1];
        for &e in parts.iter().flatten() {
            if e == 0 || e > n || seen[e] {
                return Err(PartitionError::NotAPartition {
                    n,
                    detail: format!("element {e}"),
                });
            }
            seen[e] = true;
        }
        if let Some(missing) = (1..=n).find(|&e| !seen[e]) {
            return Err(PartitionError::NotAPartition {
                n,
                detail: format!("{missing} is missing"),
            });
        }
        Ok(Self::canonical(n, parts))
    }

    fn canonical(n: usize, parts: Vec<Vec<usize>>) -> Self {
        let mut parts: Vec<Vec<usize>> = parts
            .into_iter()
            .filter(|p| !p.is_empty())
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        parts.sort();
        Partition { n, parts }
    }

    pub fn singletons(n: usize) -> Self {
        Partition {
            n,
            parts: (1..=n).map(|e| vec![e]).collect(),
        }
    }

    pub fn whole(n: usize) -> Self {
        Self::canonical(n, vec![(1..=n).collect()])
    }

    /// Partition whose parts are the classes of a union-find over `0..n`
    /// (element `e` of `[n]` is node `e - 1`).
    pub fn from_union_find(n: usize, uf: &mut UnionFind) -> Self {
        let mut parts: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in 0..n {
            let r = uf.find(e);
            parts[r].push(e + 1);
        }
        Self::canonical(n, parts)
    }

    pub fn ground_size(&self) -> usize {
        self.n
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn part_of(&self, e: usize) -> &[usize] {
        self.parts
            .iter()
            .find(|p| p.contains(&e))
            .expect("element of the ground set")
    }

    /// Finest partition coarser than both.
    pub fn join(&self, other: &Partition) -> Result<Partition, PartitionError> {
        if self.n != other.n {
            return Err(PartitionError::GroundSetMismatch(self.n, other.n));
        }
        let mut uf = UnionFind::new(self.n);
        for part in self.parts.iter().chain(&other.parts) {
            for w in part.windows(2) {
                uf.union(w[0] - 1, w[1] - 1);
            }
        }
        Ok(Partition::from_union_find(self.n, &mut uf))
    }

    /// True iff every part of `self` lies inside a part of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.n == other.n
            && self.parts.iter().all(|p| {
                let target = other.part_of(p[0]);
                p.iter().all(|e| target.contains(e))
            })
    }

    /// `min |[n] \ P|` over the parts `P`.
    pub fn norm(&self) -> usize {
        self.parts
            .iter()
            .map(|p| self.n - p.len())
            .min()
            .unwrap_or(0)
    }

    /// Image of the partition under a permutation in one-line form.
    pub fn permuted(&self, sigma: &[usize]) -> Partition {
        Self::canonical(
            self.n,
            self.parts
                .iter()
                .map(|p| p.iter().map(|&e| sigma[e - 1]).collect())
                .collect(),
        )
    }

    /// True iff `sigma` maps every part onto itself.
    pub fn is_stabilised_by(&self, sigma: &[usize]) -> bool {
        self.parts
            .iter()
            .all(|p| p.iter().all(|&e| p.contains(&sigma[e - 1])))
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            let items: Vec<String> = p.iter().map(ToString::to_string).collect();
            write!(f, "{{{}}}", items.join(","))?;
        }
        write!(f, "}}")
    }
}

/// Canonical support data derived from a supporting partition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SupportInfo {
    pub partition: Partition,
    pub norm: usize,
    /// `[n]` minus the largest part, present only when the norm is below
    /// `n / 2`.
    pub canonical_support: Option<Vec<usize>>,
}

impl SupportInfo {
    pub fn has_small_support(&self) -> bool {
        self.canonical_support.is_some()
    }
}

pub fn canonical_support(p: &Partition) -> SupportInfo {
    let n = p.ground_size();
    let norm = p.norm();
    let canonical_support = (2 * norm < n).then(|| {
        let largest = p
            .parts()
            .iter()
            .max_by_key(|part| part.len())
            .expect("norm < n/2 needs a part");
        (1..=n).filter(|e| !largest.contains(e)).collect()
    });
    SupportInfo {
        partition: p.clone(),
        norm,
        canonical_support,
    }
}

/// All partitions of `[n]`, each exactly once.
pub fn all_partitions(n: usize) -> Vec<Partition> {
    // Restricted growth strings.
    fn grow(n: usize, prefix: &mut Vec<usize>, max: usize, out: &mut Vec<Partition>) {
        if prefix.len() == n {
            let mut parts = vec![Vec::new(); max + 1];
            for (e, &b) in prefix.iter().enumerate() {
                parts[b].push(e + 1);
            }
            out.push(Partition::canonical(n, parts));
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for b in 0..=limit {
            prefix.push(b);
            grow(n, prefix, max.max(b), out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        out.push(Partition {
            n: 0,
            parts: Vec::new(),
        });
    } else {
        grow(n, &mut Vec::new(), 0, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(n: usize, parts: &[&[usize]]) -> Partition {
        Partition::new(n, parts.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn join_example() {
        let a = part(4, &[&[1, 2], &[3], &[4]]);
        let b = part(4, &[&[2, 3], &[1], &[4]]);
        assert_eq!(a.join(&b).unwrap(), part(4, &[&[1, 2, 3], &[4]]));
        assert_eq!(
            a.join(&Partition::singletons(5)),
            Err(PartitionError::GroundSetMismatch(4, 5))
        );
    }

    #[test]
    fn support_examples() {
        let s = canonical_support(&part(5, &[&[1, 2, 3, 4], &[5]]));
        assert_eq!(s.canonical_support, Some(vec![5]));
        assert_eq!(s.norm, 1);
        let t = canonical_support(&part(4, &[&[1, 2], &[3, 4]]));
        assert_eq!(t.norm, 2);
        assert_eq!(t.canonical_support, None);
        assert_eq!(
            canonical_support(&Partition::whole(3)).canonical_support,
            Some(vec![])
        );
    }

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..=5).map(|n| all_partitions(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52]);
    }

    #[test]
    fn refinement() {
        let fine = part(3, &[&[1], &[2], &[3]]);
        let coarse = part(3, &[&[1, 3], &[2]]);
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(coarse.is_stabilised_by(&[3, 2, 1]));
        assert!(!coarse.is_stabilised_by(&[2, 1, 3]));
    }
}
