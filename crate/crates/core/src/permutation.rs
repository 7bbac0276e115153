// SPDX-License-Identifier: Apache-2.0
//! Permutations of `[n]` in one-line form.

use std::fmt;

use itertools::Itertools;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PermutationError {
    #[error("cannot parse permutation {text:?}: {reason}")]
    Parse { text: String, reason: String },
    #[error("{0:?} is not a permutation of [n]")]
    NotBijective(Vec<usize>),
}

/// `images[i - 1]` is the image of `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self, PermutationError> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(PermutationError::NotBijective(images));
            }
            seen[v] = true;
        }
        Ok(Permutation { images })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (1..=n).collect(),
        }
    }

    pub fn transposition(n: usize, u: usize, v: usize) -> Self {
        let mut p = Self::identity(n);
        p.images.swap(u - 1, v - 1);
        p
    }

    /// Parses one-line form (`"2 1 3"`) or cycle form (`"(1 2)(3)"`). Cycle
    /// form needs the degree `n`.
    pub fn parse(text: &str, n: usize) -> Result<Self, PermutationError> {
        let err = |reason: &str| PermutationError::Parse {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let t = text.trim();
        if t.is_empty() || t == "()" || t.eq_ignore_ascii_case("id") {
            return Ok(Self::identity(n));
        }
        if t.starts_with('(') {
            let mut images: Vec<usize> = (1..=n).collect();
            let mut seen = vec![false; n + 1];
            for cycle in t.split(')').map(str::trim).filter(|s| !s.is_empty()) {
                let body = cycle.strip_prefix('(').ok_or_else(|| err("expected '('"))?;
                let elems: Vec<usize> = body
                    .split(|ch: char| ch == ',' || ch.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<usize>().map_err(|_| err("non-numeric element")))
                    .collect::<Result<_, _>>()?;
                for (k, &e) in elems.iter().enumerate() {
                    if e == 0 || e > n || seen[e] {
                        return Err(err("element out of range or repeated"));
                    }
                    seen[e] = true;
                    images[e - 1] = elems[(k + 1) % elems.len()];
                }
            }
            return Self::new(images);
        }
        let images: Vec<usize> = t
            .split(|ch: char| ch == ',' || ch.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<usize>().map_err(|_| err("non-numeric element")))
            .collect::<Result<_, _>>()?;
        if images.len() != n {
            return Err(err(&format!("expected {n} images")));
        }
        Self::new(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, e: usize) -> usize {
        self.images[e - 1]
    }

    pub fn apply_tuple(&self, t: &[usize]) -> Vec<usize> {
        t.iter().map(|&e| self.apply(e)).collect()
    }

    /// `self o other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation {
            images: other.images.iter().map(|&e| self.apply(e)).collect(),
        }
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Permutation { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn fixes(&self, e: usize) -> bool {
        self.apply(e) == e
    }

    /// All permutations of `[n]`, lexicographic in one-line form.
    pub fn all(n: usize) -> impl Iterator<Item = Permutation> {
        (1..=n).permutations(n).map(|images| Permutation { images })
    }

    /// All permutations of `[n]` fixing every element of `fixed`.
    pub fn fixing(n: usize, fixed: &[usize]) -> Vec<Permutation> {
        let moving: Vec<usize> = (1..=n).filter(|e| !fixed.contains(e)).collect();
        moving
            .iter()
            .copied()
            .permutations(moving.len())
            .map(|targets| {
                let mut images: Vec<usize> = (1..=n).collect();
                for (&src, &dst) in moving.iter().zip(&targets) {
                    images[src - 1] = dst;
                }
                Permutation { images }
            })
            .collect()
    }

    /// Transpositions `(u v)`, `u < v`, of elements outside `fixed`, in
    /// lexicographic order.
    pub fn transpositions(n: usize, fixed: &[usize]) -> Vec<(usize, usize)> {
        let free: Vec<usize> = (1..=n).filter(|e| !fixed.contains(e)).collect();
        free.iter()
            .tuple_combinations()
            .map(|(&u, &v)| (u, v))
            .collect()
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.images.len();
        let mut seen = vec![false; n + 1];
        let mut out = Vec::new();
        for start in 1..=n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut e = self.apply(start);
            while e != start {
                seen[e] = true;
                cycle.push(e);
                e = self.apply(e);
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for Permutation {
    /// Cycle notation without fixed points; the identity prints as `()`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<Vec<usize>> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            write!(f, "({})", c.iter().join(" "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        let p = Permutation::parse("(1 2)(3)", 3).unwrap();
        assert_eq!(p.images(), &[2, 1, 3]);
        assert_eq!(Permutation::parse("2 1 3", 3).unwrap(), p);
        assert_eq!(
            Permutation::parse("(1 3 2)", 3).unwrap().images(),
            &[3, 1, 2]
        );
        assert!(Permutation::parse("1 1 3", 3).is_err());
        assert!(Permutation::parse("(1 4)", 3).is_err());
        assert_eq!(p.to_string(), "(1 2)");
    }

    #[test]
    fn group_laws() {
        let a = Permutation::parse("(1 2 3)", 4).unwrap();
        let b = Permutation::parse("(3 4)", 4).unwrap();
        assert!(a.compose(&a.inverse()).is_identity());
        assert_eq!(a.compose(&b).apply(3), a.apply(4));
        assert_eq!(Permutation::fixing(4, &[2]).len(), 6);
        assert_eq!(
            Permutation::transpositions(4, &[1]),
            vec![(2, 3), (2, 4), (3, 4)]
        );
    }
}
