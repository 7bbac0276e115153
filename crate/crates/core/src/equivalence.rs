// SPDX-License-Identifier: Apache-2.0
//! Syntactic equivalence of gates in transparent circuits, and the quotient
//! circuit it induces.
//!
//! Two gates are equivalent when they compute "the same thing" for purely
//! syntactic reasons: same function, same output status, and labellings that
//! agree up to an automorphism of the index set once children are replaced by
//! their classes. In transparent circuits this is decided bottom-up, one
//! depth layer at a time, without searching over index automorphisms.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::{Circuit, GateKind};
use crate::function::StructuredFunction;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquivalenceError {
    #[error("circuit is not transparent: {0}")]
    NotTransparent(TransparencyWitness),
}

/// Why a circuit fails to be transparent.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "reason")]
pub enum TransparencyWitness {
    /// A non-symmetric gate whose labelling repeats a child.
    NonInjectiveLabels { gate: String },
    /// A non-symmetric gate with two distinct but equivalent children.
    EquivalentChildren {
        gate: String,
        first: String,
        second: String,
    },
}

impl std::fmt::Display for TransparencyWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TransparencyWitness::NonInjectiveLabels { gate } => {
                write!(f, "gate {gate} repeats a child")
            }
            TransparencyWitness::EquivalentChildren {
                gate,
                first,
                second,
            } => {
                write!(
                    f,
                    "gate {gate} has equivalent children {first} and {second}"
                )
            }
        }
    }
}

/// A partition of the gates into equivalence classes. Classes are numbered
/// in order of their smallest member, which is the class representative.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateClasses {
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl GateClasses {
    /// Builds classes from a labelling that maps each gate to some member of
    /// its class.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (g, &l) in labels.iter().enumerate() {
            by_label.entry(l).or_default().push(g);
        }
        let mut classes: Vec<Vec<usize>> = by_label.into_values().collect();
        classes.sort();
        let mut class_of = vec![0; labels.len()];
        for (k, members) in classes.iter().enumerate() {
            for &g in members {
                class_of[g] = k;
            }
        }
        GateClasses { class_of, classes }
    }

    pub fn class_of(&self, g: usize) -> usize {
        self.class_of[g]
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn members(&self, class: usize) -> &[usize] {
        &self.classes[class]
    }

    /// Smallest gate of the class of `g`.
    pub fn representative(&self, g: usize) -> usize {
        self.classes[self.class_of[g]][0]
    }

    pub fn equivalent(&self, g: usize, h: usize) -> bool {
        self.class_of[g] == self.class_of[h]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Classes as lists of gate ids, for reporting.
    pub fn to_ids(&self, c: &Circuit) -> Vec<Vec<String>> {
        self.classes
            .iter()
            .map(|m| c.ids(m.iter().copied()))
            .collect()
    }
}

/// Checks that `candidate` (a map on canonical index positions) is an
/// automorphism of the index structure of `f`: any permutation for symmetric
/// functions, a (row permutation, column permutation) pair for RANK.
pub fn index_iso_check(f: &StructuredFunction, candidate: &[usize]) -> bool {
    let len = f.index_len();
    if candidate.len() != len {
        return false;
    }
    let mut seen = vec![false; len];
    for &y in candidate {
        if y >= len || seen[y] {
            return false;
        }
        seen[y] = true;
    }
    match *f {
        StructuredFunction::Rank { rows, cols, .. } => {
            let row_map: Vec<usize> = (0..rows).map(|i| candidate[i * cols] / cols).collect();
            let col_map: Vec<usize> = (0..cols).map(|j| candidate[j] % cols).collect();
            (0..rows).all(|i| {
                (0..cols).all(|j| candidate[i * cols + j] == row_map[i] * cols + col_map[j])
            })
        }
        _ => true,
    }
}

fn has_repeat(xs: &[usize]) -> Option<(usize, usize)> {
    for (a, &x) in xs.iter().enumerate() {
        if let Some(b) = xs[a + 1..].iter().position(|&y| y == x) {
            return Some((a, a + 1 + b));
        }
    }
    None
}

/// Layer-by-layer computation of syntactic equivalence, failing with a
/// witness as soon as the circuit is seen not to be transparent.
pub(crate) fn layered_classes(c: &Circuit) -> Result<GateClasses, TransparencyWitness> {
    for g in 0..c.len() {
        if let GateKind::Internal { function, children } = &c.gate(g).kind {
            if !function.is_symmetric() && has_repeat(children).is_some() {
                return Err(TransparencyWitness::NonInjectiveLabels {
                    gate: c.id(g).to_string(),
                });
            }
        }
    }
    let max_depth = (0..c.len()).map(|g| c.depth(g)).max().unwrap_or(0);
    let mut layers: Vec<Vec<usize>> = vec![Vec::new(); max_depth + 1];
    for g in 0..c.len() {
        layers[c.depth(g)].push(g);
    }
    // Each gate is labelled by the smallest gate of its class.
    let mut label: Vec<usize> = (0..c.len()).collect();
    for layer in &layers {
        for &g in layer {
            if let GateKind::Internal { function, children } = &c.gate(g).kind {
                if !function.is_symmetric() {
                    let classes: Vec<usize> = children.iter().map(|&h| label[h]).collect();
                    if let Some((a, b)) = has_repeat(&classes) {
                        return Err(TransparencyWitness::EquivalentChildren {
                            gate: c.id(g).to_string(),
                            first: c.id(children[a]).to_string(),
                            second: c.id(children[b]).to_string(),
                        });
                    }
                }
            }
        }
        classify_layer(c, layer, &mut label);
    }
    Ok(GateClasses::from_labels(&label))
}

type LayerKey = (StructuredFunction, Option<Vec<usize>>, Vec<usize>);

fn classify_layer(c: &Circuit, layer: &[usize], label: &mut [usize]) {
    let mut buckets: BTreeMap<LayerKey, Vec<usize>> = BTreeMap::new();
    for &g in layer {
        if let GateKind::Internal { function, children } = &c.gate(g).kind {
            let mut multiset: Vec<usize> = children.iter().map(|&h| label[h]).collect();
            multiset.sort_unstable();
            let key = (
                *function,
                c.output_tuple(g).map(<[usize]>::to_vec),
                multiset,
            );
            buckets.entry(key).or_default().push(g);
        }
        // Input gates are only ever equivalent to themselves: constants are
        // unique per value and relational gates are unique per atom.
    }
    for ((function, output, _), gates) in buckets {
        if output.is_some() {
            continue;
        }
        if function.is_symmetric() {
            for &g in &gates {
                label[g] = gates[0];
            }
            continue;
        }
        let mut reps: Vec<usize> = Vec::new();
        for &g in &gates {
            match reps.iter().find(|&&r| greedy_match(c, r, g, label)) {
                Some(&r) => label[g] = r,
                None => reps.push(g),
            }
        }
    }
}

/// For non-symmetric gates whose children lie in pairwise distinct classes:
/// matches each index of `g` (in canonical order) to the unique index of `h`
/// holding a child of the same class, then checks the resulting map is an
/// index automorphism.
fn greedy_match(c: &Circuit, g: usize, h: usize, label: &[usize]) -> bool {
    let f = c.gate(g).function().expect("internal gate");
    let lg = c.gate(g).labelling();
    let lh = c.gate(h).labelling();
    let mut used = vec![false; lh.len()];
    let mut candidate = Vec::with_capacity(lg.len());
    for &x in lg {
        match (0..lh.len()).find(|&y| !used[y] && label[lh[y]] == label[x]) {
            Some(y) => {
                used[y] = true;
                candidate.push(y);
            }
            None => return false,
        }
    }
    index_iso_check(&f, &candidate)
}

/// Syntactic equivalence classes of a transparent circuit.
pub fn syntactic_classes(c: &Circuit) -> Result<GateClasses, EquivalenceError> {
    layered_classes(c).map_err(EquivalenceError::NotTransparent)
}

/// Merges each equivalence class into its representative (the gate with the
/// smallest id), whose labelling is lifted to classes.
pub fn quotient(c: &Circuit) -> Result<Circuit, EquivalenceError> {
    let classes = syntactic_classes(c)?;
    Ok(quotient_by(c, &classes))
}

pub(crate) fn quotient_by(c: &Circuit, classes: &GateClasses) -> Circuit {
    let mut b = c.to_builder();
    for g in 0..c.len() {
        let rep = classes.representative(g);
        if rep != g {
            b.gates.remove(c.id(g));
        } else if let GateKind::Internal { function, children } = &c.gate(g).kind {
            let labelling = children
                .iter()
                .map(|&h| c.id(classes.representative(h)).to_string())
                .collect();
            b.gates.insert(
                c.id(g).to_string(),
                crate::circuit::GateSpec::Internal {
                    function: *function,
                    labelling,
                },
            );
        }
    }
    b.build().expect("quotient of a valid circuit is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::CircuitBuilder;
    use crate::corpus;

    #[test]
    fn example_classes_are_singletons() {
        let c = corpus::c_ex();
        let classes = syntactic_classes(&c).unwrap();
        assert_eq!(classes.len(), 5);
    }

    #[test]
    fn transpose_is_not_an_index_automorphism() {
        let f = StructuredFunction::rank(1, 2, 2, 2).unwrap();
        // (i,j) -> (j,i)
        assert!(!index_iso_check(&f, &[0, 2, 1, 3]));
        // swap rows
        assert!(index_iso_check(&f, &[2, 3, 0, 1]));
        assert!(index_iso_check(&StructuredFunction::Or(3), &[2, 0, 1]));
        assert!(!index_iso_check(&StructuredFunction::Or(3), &[0, 0, 1]));
    }

    #[test]
    fn duplicated_gates_merge() {
        let mut b = corpus::c_ex().to_builder();
        b.internal("a1", StructuredFunction::And(2), ["E(1,2)", "E(2,1)"]);
        b.internal("a2", StructuredFunction::And(2), ["E(2,1)", "E(1,2)"]);
        b.internal("top", StructuredFunction::Or(2), ["a1", "a2"]);
        b.output(vec![], "top");
        let c = b.build().unwrap();
        let classes = syntactic_classes(&c).unwrap();
        let a1 = c.index_of("a1").unwrap();
        let a2 = c.index_of("a2").unwrap();
        assert!(classes.equivalent(a1, a2));
        let q = quotient(&c).unwrap();
        assert!(q.index_of("a2").is_none());
        let top = q.index_of("top").unwrap();
        assert_eq!(q.gate(top).labelling(), &[q.index_of("a1").unwrap(); 2]);
    }

    #[test]
    fn rank_with_equivalent_children_is_opaque() {
        let mut b = CircuitBuilder::new(2, crate::Vocabulary::new([("P", 1)]), 0);
        b.relational("P(1)", "P", vec![1])
            .relational("P(2)", "P", vec![2]);
        b.internal("x", StructuredFunction::Or(1), ["P(1)"]);
        b.internal("y", StructuredFunction::Or(1), ["P(1)"]);
        b.internal(
            "r",
            StructuredFunction::rank(0, 2, 1, 2).unwrap(),
            ["x", "y"],
        );
        b.output(vec![], "r");
        let c = b.build().unwrap();
        assert!(matches!(
            syntactic_classes(&c),
            Err(EquivalenceError::NotTransparent(
                TransparencyWitness::EquivalentChildren { .. }
            ))
        ));
    }
}
