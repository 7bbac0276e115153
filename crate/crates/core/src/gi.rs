// SPDX-License-Identifier: Apache-2.0
//! Circuits encoding bipartite graph isomorphism.
//!
//! Each generator takes two bipartite graphs with the same side sizes and
//! builds a small circuit in which a structural property (two gates being
//! equivalent, a circuit being symmetric, a gate having unique children)
//! holds exactly when the graphs are isomorphic.

use std::collections::BTreeSet;

use itertools::Itertools;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, CircuitBuilder, GateSpec, Vocabulary};
use crate::function::{FunctionError, StructuredFunction};
use crate::oracle::{brute_classes, brute_symmetric, OracleError};
use crate::par::Budget;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GiError {
    #[error("graphs have sides {0:?} and {1:?}")]
    DimensionMismatch((usize, usize), (usize, usize)),
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error(transparent)]
    InvalidRank(FunctionError),
    #[error("unknown gate {0}")]
    GateNotFound(String),
    #[error("isomorphism search needs {work} steps, budget is {budget}")]
    TooLarge { work: u128, budget: u64 },
    #[error("edge ({0}, {1}) is outside the graph")]
    BadEdge(usize, usize),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Bipartite graph with sides `[a]` and `[b]` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteGraph {
    pub a: usize,
    pub b: usize,
    pub edges: BTreeSet<(usize, usize)>,
}

impl BipartiteGraph {
    pub fn new(
        a: usize,
        b: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GiError> {
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        if let Some(&(u, v)) = edges
            .iter()
            .find(|&&(u, v)| u == 0 || u > a || v == 0 || v > b)
        {
            return Err(GiError::BadEdge(u, v));
        }
        Ok(BipartiteGraph { a, b, edges })
    }

    /// Graph whose edge set is given by the bits of `code`, cells in
    /// row-major order.
    pub fn from_code(a: usize, b: usize, code: u64) -> Self {
        let edges = (0..a * b)
            .filter(|k| code >> k & 1 == 1)
            .map(|k| (k / b + 1, k % b + 1))
            .collect();
        BipartiteGraph { a, b, edges }
    }

    pub fn random<R: Rng>(a: usize, b: usize, rng: &mut R) -> Self {
        Self::from_code(a, b, rng.gen_range(0..1u64 << (a * b)))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u, v))
    }

    /// Image under a permutation of each side (one-line, 1-based).
    pub fn permuted(&self, left: &[usize], right: &[usize]) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (left[u - 1], right[v - 1]))
            .collect();
        BipartiteGraph {
            a: self.a,
            b: self.b,
            edges,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.a, self.b)
    }
}

/// Isomorphism preserving sides, by trying every pair of side permutations.
pub fn bipartite_iso(
    g1: &BipartiteGraph,
    g2: &BipartiteGraph,
    budget: Budget,
) -> Result<bool, GiError> {
    if g1.dims() != g2.dims() {
        return Ok(false);
    }
    let work: u128 = (1..=g1.a as u128).product::<u128>() * (1..=g1.b as u128).product::<u128>();
    if !budget.allows(work) {
        return Err(GiError::TooLarge {
            work,
            budget: budget.0,
        });
    }
    if g1.edges.len() != g2.edges.len() {
        return Ok(false);
    }
    let rights: Vec<Vec<usize>> = (1..=g1.b).permutations(g1.b).collect();
    Ok((1..=g1.a)
        .permutations(g1.a)
        .any(|left| rights.iter().any(|right| g1.permuted(&left, right) == *g2)))
}

/// A generated circuit with the two gates whose relationship encodes the
/// isomorphism question (equal to the output gate when there is one gate of
/// interest).
#[derive(Clone, Debug)]
pub struct GiInstance {
    pub circuit: Circuit,
    pub first: String,
    pub second: String,
}

fn checked_rank(
    g1: &BipartiteGraph,
    g2: &BipartiteGraph,
    r: usize,
    p: u64,
) -> Result<StructuredFunction, GiError> {
    if g1.dims() != g2.dims() {
        return Err(GiError::DimensionMismatch(g1.dims(), g2.dims()));
    }
    StructuredFunction::rank(r, p, g1.a, g1.b).map_err(|e| match e {
        FunctionError::NotPrime(p) => GiError::NotPrime(p),
        other => GiError::InvalidRank(other),
    })
}

fn base_builder() -> CircuitBuilder {
    let mut b = CircuitBuilder::new(2, Vocabulary::new([("R", 1)]), 0);
    b.relational("R(1)", "R", vec![1])
        .relational("R(2)", "R", vec![2]);
    b.internal("g_and", StructuredFunction::And(2), ["R(1)", "R(2)"]);
    b.internal("g_or", StructuredFunction::Or(2), ["R(1)", "R(2)"]);
    b
}

fn cells(g: &BipartiteGraph) -> impl Iterator<Item = (usize, usize)> + '_ {
    (1..=g.a).cartesian_product(1..=g.b)
}

/// Two rank gates reading per-cell AND[1] gadgets, each wired to the shared
/// AND or OR gate according to the adjacency of one graph. The rank gates are
/// equivalent iff the graphs are isomorphic.
pub fn gen_syntactic_instance(
    g1: &BipartiteGraph,
    g2: &BipartiteGraph,
    r: usize,
    p: u64,
) -> Result<GiInstance, GiError> {
    let f = checked_rank(g1, g2, r, p)?;
    let mut b = base_builder();
    for (t, g) in [(1, g1), (2, g2)] {
        let mut labelling = Vec::new();
        for (u, v) in cells(g) {
            let id = format!("node{t}_{u}_{v}");
            let target = if g.has_edge(u, v) { "g_and" } else { "g_or" };
            b.internal(id.clone(), StructuredFunction::And(1), [target]);
            labelling.push(id);
        }
        b.internal(format!("rank{t}"), f, labelling);
    }
    b.internal("g_out", StructuredFunction::And(2), ["rank1", "rank2"]);
    b.output(vec![], "g_out");
    Ok(GiInstance {
        circuit: b.build().expect("generated circuit is valid"),
        first: "rank1".into(),
        second: "rank2".into(),
    })
}

/// As [`gen_syntactic_instance`] without the per-cell gadgets: rank cells
/// read the AND and OR gates directly.
pub fn gen_unique_children_instance(
    g1: &BipartiteGraph,
    g2: &BipartiteGraph,
    r: usize,
    p: u64,
) -> Result<GiInstance, GiError> {
    let f = checked_rank(g1, g2, r, p)?;
    let mut b = base_builder();
    for (t, g) in [(1, g1), (2, g2)] {
        let labelling: Vec<&str> = cells(g)
            .map(|(u, v)| if g.has_edge(u, v) { "g_and" } else { "g_or" })
            .collect();
        b.internal(format!("rank{t}"), f, labelling);
    }
    b.internal("g_out", StructuredFunction::And(2), ["rank1", "rank2"]);
    b.output(vec![], "g_out");
    Ok(GiInstance {
        circuit: b.build().expect("generated circuit is valid"),
        first: "rank1".into(),
        second: "rank2".into(),
    })
}

/// Order-2 circuit that is symmetric iff the graphs are isomorphic: rank
/// gate `t` reads gadgets over `R(t)` only, so swapping the two universe
/// elements must swap the rank gates.
pub fn gen_symmetry_instance(
    g1: &BipartiteGraph,
    g2: &BipartiteGraph,
    r: usize,
    p: u64,
) -> Result<GiInstance, GiError> {
    let f = checked_rank(g1, g2, r, p)?;
    let mut b = CircuitBuilder::new(2, Vocabulary::new([("R", 1)]), 0);
    for (t, g) in [(1, g1), (2, g2)] {
        let atom = format!("R({t})");
        b.relational(atom.clone(), "R", vec![t]);
        b.internal(
            format!("and{t}"),
            StructuredFunction::And(1),
            [atom.clone()],
        );
        b.internal(format!("or{t}"), StructuredFunction::Or(1), [atom]);
        let labelling: Vec<String> = cells(g)
            .map(|(u, v)| {
                if g.has_edge(u, v) {
                    format!("and{t}")
                } else {
                    format!("or{t}")
                }
            })
            .collect();
        b.internal(format!("rank{t}"), f, labelling);
    }
    b.internal("g_out", StructuredFunction::And(2), ["rank1", "rank2"]);
    b.output(vec![], "g_out");
    Ok(GiInstance {
        circuit: b.build().expect("generated circuit is valid"),
        first: "g_out".into(),
        second: "g_out".into(),
    })
}

/// Keeps only the gates below `g1` or `g2` and adds `AND(g1, g2)` as the sole
/// output. The new gate has two equivalent children iff `g1` and `g2` are
/// equivalent in the pruned circuit.
pub fn gen_unique_labels_instance(c: &Circuit, g1: &str, g2: &str) -> Result<GiInstance, GiError> {
    let a = c
        .index_of(g1)
        .ok_or_else(|| GiError::GateNotFound(g1.into()))?;
    let z = c
        .index_of(g2)
        .ok_or_else(|| GiError::GateNotFound(g2.into()))?;
    let keep = c.below(&[a, z]);
    let mut b = CircuitBuilder::new(c.order(), c.vocabulary().clone(), 0);
    for (g, gate_spec) in c.to_builder().gates.into_values().enumerate() {
        if keep[g] {
            b.gate(c.id(g), gate_spec);
        }
    }
    let top = b.fresh_id("g_prime");
    b.gate(
        top.clone(),
        GateSpec::Internal {
            function: StructuredFunction::And(2),
            labelling: vec![g1.into(), g2.into()],
        },
    );
    b.output(vec![], top.clone());
    Ok(GiInstance {
        circuit: b.build().expect("pruned circuit is valid"),
        first: top.clone(),
        second: top,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GiKind {
    Syntactic,
    UniqueChildren,
    Symmetry,
    UniqueLabels,
}

impl GiKind {
    pub const ALL: [GiKind; 4] = [
        GiKind::Syntactic,
        GiKind::UniqueChildren,
        GiKind::Symmetry,
        GiKind::UniqueLabels,
    ];

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "syn" => Some(GiKind::Syntactic),
            "uc" => Some(GiKind::UniqueChildren),
            "sym" => Some(GiKind::Symmetry),
            "ul" => Some(GiKind::UniqueLabels),
            _ => None,
        }
    }

    pub fn generate(
        self,
        g1: &BipartiteGraph,
        g2: &BipartiteGraph,
        r: usize,
        p: u64,
    ) -> Result<GiInstance, GiError> {
        match self {
            GiKind::Syntactic => gen_syntactic_instance(g1, g2, r, p),
            GiKind::UniqueChildren => gen_unique_children_instance(g1, g2, r, p),
            GiKind::Symmetry => gen_symmetry_instance(g1, g2, r, p),
            GiKind::UniqueLabels => {
                let base = gen_syntactic_instance(g1, g2, r, p)?;
                gen_unique_labels_instance(&base.circuit, &base.first, &base.second)
            }
        }
    }

    /// Decides, with the exhaustive oracles, the property that the generated
    /// instance should have exactly when the graphs are isomorphic.
    pub fn decide(self, instance: &GiInstance, budget: Budget) -> Result<bool, GiError> {
        let c = &instance.circuit;
        Ok(match self {
            GiKind::Syntactic | GiKind::UniqueChildren => {
                brute_classes(c).equivalent(find(c, &instance.first)?, find(c, &instance.second)?)
            }
            GiKind::Symmetry => brute_symmetric(c, budget)?,
            GiKind::UniqueLabels => {
                let top = find(c, &instance.first)?;
                let classes = brute_classes(c);
                let children = c.gate(top).labelling();
                classes.equivalent(children[0], children[1])
            }
        })
    }
}

fn find(c: &Circuit, id: &str) -> Result<usize, GiError> {
    c.index_of(id)
        .ok_or_else(|| GiError::GateNotFound(id.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(a: usize, b: usize, e: &[(usize, usize)]) -> BipartiteGraph {
        BipartiteGraph::new(a, b, e.iter().copied()).unwrap()
    }

    #[test]
    fn iso_examples() {
        let d = g(2, 2, &[(1, 1), (2, 2)]);
        let anti = g(2, 2, &[(1, 2), (2, 1)]);
        let one = g(2, 2, &[(1, 1)]);
        assert!(bipartite_iso(&d, &anti, Budget::default()).unwrap());
        assert!(!bipartite_iso(&d, &one, Budget::default()).unwrap());
    }

    #[test]
    fn instance_sizes() {
        let b = g(2, 2, &[(1, 1), (2, 2)]);
        let syn = gen_syntactic_instance(&b, &b, 1, 2).unwrap();
        assert_eq!(syn.circuit.len(), 2 + 3 + 2 + 2 * 4);
        assert!(
            syn.circuit.constant_gate(false).is_none() && syn.circuit.constant_gate(true).is_none()
        );
        let uc = gen_unique_children_instance(&b, &b, 1, 2).unwrap();
        assert_eq!(uc.circuit.len(), 7);
        assert!(matches!(
            gen_syntactic_instance(&b, &g(2, 3, &[]), 1, 2),
            Err(GiError::DimensionMismatch(..))
        ));
        assert!(matches!(
            gen_syntactic_instance(&b, &b, 1, 4),
            Err(GiError::NotPrime(4))
        ));
    }

    #[test]
    fn decisions_follow_isomorphism() {
        let d = g(2, 2, &[(1, 1), (2, 2)]);
        let anti = g(2, 2, &[(1, 2), (2, 1)]);
        let one = g(2, 2, &[(1, 1)]);
        for kind in GiKind::ALL {
            let yes = kind.generate(&d, &anti, 1, 2).unwrap();
            assert!(kind.decide(&yes, Budget::default()).unwrap(), "{kind:?}");
            let no = kind.generate(&d, &one, 1, 2).unwrap();
            assert!(!kind.decide(&no, Budget::default()).unwrap(), "{kind:?}");
        }
    }
}
