// SPDX-License-Identifier: Apache-2.0
//! Input structures, bijections onto `[n]`, and their encoding as the bit
//! assignment a circuit actually reads.

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{all_tuples, Vocabulary};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StructureError {
    #[error("universe has {found} elements but the circuit has order {expected}")]
    UniverseSizeMismatch { expected: usize, found: usize },
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error("unknown universe element {0}")]
    UnknownElement(String),
    #[error("tuple for {relation} has length {found}, expected {expected}")]
    TupleArity {
        relation: String,
        expected: usize,
        found: usize,
    },
    #[error("not a bijection onto [n]: {0}")]
    NotBijection(String),
}

/// A finite structure over the input vocabulary. Tuples store universe
/// positions (0-based) rather than names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoStructure {
    universe: Vec<String>,
    relations: BTreeMap<String, BTreeSet<Vec<usize>>>,
}

impl RhoStructure {
    pub fn new(universe: Vec<String>) -> Self {
        RhoStructure {
            universe,
            relations: BTreeMap::new(),
        }
    }

    /// Structure over `{a, b, c, ...}` (or `u1, u2, ...` past 26 elements).
    pub fn with_size(n: usize) -> Self {
        let names = (0..n)
            .map(|i| {
                if n <= 26 {
                    ((b'a' + i as u8) as char).to_string()
                } else {
                    format!("u{}", i + 1)
                }
            })
            .collect();
        RhoStructure::new(names)
    }

    pub fn universe(&self) -> &[String] {
        &self.universe
    }

    pub fn size(&self) -> usize {
        self.universe.len()
    }

    pub fn element(&self, name: &str) -> Result<usize, StructureError> {
        self.universe
            .iter()
            .position(|u| u == name)
            .ok_or_else(|| StructureError::UnknownElement(name.to_string()))
    }

    pub fn insert(&mut self, relation: &str, tuple: Vec<usize>) {
        self.relations
            .entry(relation.to_string())
            .or_default()
            .insert(tuple);
    }

    pub fn insert_named(&mut self, relation: &str, tuple: &[&str]) -> Result<(), StructureError> {
        let t = tuple
            .iter()
            .map(|u| self.element(u))
            .collect::<Result<Vec<_>, _>>()?;
        self.insert(relation, t);
        Ok(())
    }

    /// Ensures `relation` is present, possibly empty.
    pub fn declare(&mut self, relation: &str) {
        self.relations.entry(relation.to_string()).or_default();
    }

    pub fn holds(&self, relation: &str, tuple: &[usize]) -> bool {
        self.relations
            .get(relation)
            .is_some_and(|r| r.contains(tuple))
    }

    pub fn relations(&self) -> &BTreeMap<String, BTreeSet<Vec<usize>>> {
        &self.relations
    }

    /// Image of the structure under a permutation of its universe positions.
    pub fn permuted(&self, tau: &[usize]) -> RhoStructure {
        let mut out = RhoStructure::new(self.universe.clone());
        for (r, tuples) in &self.relations {
            out.declare(r);
            for t in tuples {
                out.insert(r, t.iter().map(|&u| tau[u]).collect());
            }
        }
        out
    }

    pub fn check(&self, vocabulary: &Vocabulary) -> Result<(), StructureError> {
        for (name, tuples) in &self.relations {
            let r = vocabulary
                .index_of(name)
                .ok_or_else(|| StructureError::UnknownRelation(name.clone()))?;
            let arity = vocabulary.relation(r).arity;
            for t in tuples {
                if t.len() != arity {
                    return Err(StructureError::TupleArity {
                        relation: name.clone(),
                        expected: arity,
                        found: t.len(),
                    });
                }
                if let Some(&bad) = t.iter().find(|&&u| u >= self.size()) {
                    return Err(StructureError::UnknownElement(bad.to_string()));
                }
            }
        }
        Ok(())
    }
}

/// A bijection from universe positions onto `[n]`; `images[u]` is 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Bijection {
    images: Vec<usize>,
}

impl Bijection {
    pub fn new(images: Vec<usize>) -> Result<Self, StructureError> {
        let n = images.len();
        let mut seen = vec![false; n + 1];
        for &v in &images {
            if v == 0 || v > n || seen[v] {
                return Err(StructureError::NotBijection(format!("{images:?}")));
            }
            seen[v] = true;
        }
        Ok(Bijection { images })
    }

    pub fn identity(n: usize) -> Self {
        Bijection {
            images: (1..=n).collect(),
        }
    }

    /// Parses `"a=1,b=2"` against the universe of `a`.
    pub fn parse(text: &str, a: &RhoStructure) -> Result<Self, StructureError> {
        let mut images = vec![0; a.size()];
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part.split_once('=').ok_or_else(|| {
                StructureError::NotBijection(format!("expected name=value, got {part}"))
            })?;
            let u = a.element(name.trim())?;
            images[u] = value
                .trim()
                .parse()
                .map_err(|_| StructureError::NotBijection(format!("bad value in {part}")))?;
        }
        Bijection::new(images)
    }

    pub fn image(&self, u: usize) -> usize {
        self.images[u]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Universe position mapped to `i` (1-based).
    pub fn preimage(&self, i: usize) -> usize {
        self.images.iter().position(|&v| v == i).expect("bijection")
    }

    /// All bijections for a universe of size `n`, in lexicographic order.
    pub fn all(n: usize) -> impl Iterator<Item = Bijection> {
        use itertools::Itertools;
        (1..=n).permutations(n).map(|images| Bijection { images })
    }
}

/// Truth values of all relational atoms over `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncodedInput {
    order: usize,
    tables: Vec<Vec<bool>>,
}

/// Position of a tuple of `[n]^k` in lexicographic order.
pub fn tuple_code(n: usize, tuple: &[usize]) -> usize {
    tuple.iter().fold(0, |acc, &e| acc * n + (e - 1))
}

impl EncodedInput {
    pub fn empty(vocabulary: &Vocabulary, n: usize) -> Self {
        let tables = vocabulary
            .relations()
            .iter()
            .map(|r| vec![false; n.pow(r.arity as u32)])
            .collect();
        EncodedInput { order: n, tables }
    }

    /// Number of atoms, i.e. the length of the bit vectors enumerated by
    /// [`EncodedInput::from_bits`].
    pub fn slots(vocabulary: &Vocabulary, n: usize) -> usize {
        vocabulary
            .relations()
            .iter()
            .map(|r| n.pow(r.arity as u32))
            .sum()
    }

    /// Decodes a bit vector; relations in vocabulary order, tuples
    /// lexicographic, bit `k` of `bits` for the k-th atom.
    pub fn from_bits(vocabulary: &Vocabulary, n: usize, bits: u64) -> Self {
        let mut e = EncodedInput::empty(vocabulary, n);
        let mut k = 0;
        for table in e.tables.iter_mut() {
            for slot in table.iter_mut() {
                *slot = bits >> k & 1 == 1;
                k += 1;
            }
        }
        e
    }

    /// The structure `gamma(a)` over `[n]`.
    pub fn from_structure(
        vocabulary: &Vocabulary,
        a: &RhoStructure,
        gamma: &Bijection,
    ) -> Result<Self, StructureError> {
        a.check(vocabulary)?;
        let n = a.size();
        let mut e = EncodedInput::empty(vocabulary, n);
        for (name, tuples) in a.relations() {
            let r = vocabulary.index_of(name).unwrap();
            for t in tuples {
                let image: Vec<usize> = t.iter().map(|&u| gamma.image(u)).collect();
                e.tables[r][tuple_code(n, &image)] = true;
            }
        }
        Ok(e)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn holds(&self, relation: usize, tuple: &[usize]) -> bool {
        self.tables[relation][tuple_code(self.order, tuple)]
    }

    pub fn set(&mut self, relation: usize, tuple: &[usize], value: bool) {
        let n = self.order;
        self.tables[relation][tuple_code(n, tuple)] = value;
    }

    /// The input `f o sigma^-1`: atom `R(sigma t)` takes the value of `R(t)`.
    /// `sigma` is in one-line form over `[n]`, 1-based.
    pub fn permuted(&self, vocabulary: &Vocabulary, sigma: &[usize]) -> Self {
        let n = self.order;
        let mut out = EncodedInput::empty(vocabulary, n);
        for (r, rel) in vocabulary.relations().iter().enumerate() {
            for t in all_tuples(n, rel.arity) {
                if self.holds(r, &t) {
                    let image: Vec<usize> = t.iter().map(|&e| sigma[e - 1]).collect();
                    out.set(r, &image, true);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_follows_gamma() {
        let voc = Vocabulary::new([("E", 2)]);
        let mut a = RhoStructure::with_size(2);
        a.insert_named("E", &["a", "b"]).unwrap();
        let gamma = Bijection::parse("a=2,b=1", &a).unwrap();
        let e = EncodedInput::from_structure(&voc, &a, &gamma).unwrap();
        assert!(e.holds(0, &[2, 1]));
        assert!(!e.holds(0, &[1, 2]));
        assert_eq!(Bijection::all(3).count(), 6);
        assert!(Bijection::parse("a=1,b=1", &a).is_err());
    }

    #[test]
    fn bits_roundtrip() {
        let voc = Vocabulary::new([("P", 1), ("E", 2)]);
        assert_eq!(EncodedInput::slots(&voc, 2), 6);
        let e = EncodedInput::from_bits(&voc, 2, 0b010_010);
        assert!(e.holds(0, &[2]));
        assert!(e.holds(1, &[2, 1]));
        assert!(!e.holds(1, &[1, 1]));
    }
}
