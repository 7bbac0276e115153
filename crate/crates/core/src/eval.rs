// SPDX-License-Identifier: Apache-2.0
//! Circuit evaluation and the exhaustive semantic checks built on it.

use std::collections::BTreeMap;

use crate::circuit::{all_tuples, Circuit, GateKind};
use crate::function::MajorityConvention;
use crate::par::{Budget, Exec};
use crate::structure::{Bijection, EncodedInput, RhoStructure, StructureError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("exhaustive check needs {work} evaluations, budget is {budget}")]
    TooLarge { work: u128, budget: u64 },
}

/// Values of every gate on one input, indexed by gate.
pub fn gate_values(c: &Circuit, input: &EncodedInput, convention: MajorityConvention) -> Vec<bool> {
    let mut value = vec![false; c.len()];
    let mut scratch = Vec::new();
    for &g in c.topological_order() {
        value[g] = match &c.gate(g).kind {
            GateKind::Constant(b) => *b,
            GateKind::Relational { relation, tuple } => input.holds(*relation, tuple),
            GateKind::Internal { function, children } => {
                scratch.clear();
                scratch.extend(children.iter().map(|&h| value[h]));
                function.apply(&scratch, convention)
            }
        };
    }
    value
}

/// Query answer keyed by tuples of universe positions (0-based): the entry
/// for `a` is the value of the output gate at `gamma(a)`.
pub type QueryResult = BTreeMap<Vec<usize>, bool>;

pub fn evaluate(
    c: &Circuit,
    a: &RhoStructure,
    gamma: &Bijection,
) -> Result<QueryResult, EvalError> {
    evaluate_with(c, a, gamma, MajorityConvention::default())
}

pub fn evaluate_with(
    c: &Circuit,
    a: &RhoStructure,
    gamma: &Bijection,
    convention: MajorityConvention,
) -> Result<QueryResult, EvalError> {
    if a.size() != c.order() || gamma.images().len() != c.order() {
        return Err(StructureError::UniverseSizeMismatch {
            expected: c.order(),
            found: a.size(),
        }
        .into());
    }
    let input = EncodedInput::from_structure(c.vocabulary(), a, gamma)?;
    let value = gate_values(c, &input, convention);
    let n = c.order();
    let mut out = QueryResult::new();
    for t in all_tuples(n, c.arity()) {
        let universe_tuple: Vec<usize> = t.iter().map(|&i| i - 1).collect();
        let image: Vec<usize> = universe_tuple.iter().map(|&u| gamma.image(u)).collect();
        out.insert(universe_tuple, value[c.outputs()[&image]]);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvarianceReport {
    pub invariant: bool,
    /// A structure and two bijections giving different answers.
    pub witness: Option<(RhoStructure, Bijection, Bijection)>,
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn slot_count(c: &Circuit) -> usize {
    EncodedInput::slots(c.vocabulary(), c.order())
}

fn enumeration_work(c: &Circuit, per_input: u128, budget: Budget) -> Result<u64, EvalError> {
    let slots = slot_count(c);
    let too_large = |work| EvalError::TooLarge {
        work,
        budget: budget.0,
    };
    if slots >= 63 {
        return Err(too_large(u128::MAX));
    }
    let work = (1u128 << slots) * per_input;
    if !budget.allows(work) {
        return Err(too_large(work));
    }
    Ok(1u64 << slots)
}

/// Every structure over a universe of size `n` for the vocabulary of `c`,
/// in a fixed order (bit `k` of the index is the k-th atom over the
/// universe positions).
pub fn structure_from_index(c: &Circuit, index: u64) -> RhoStructure {
    let n = c.order();
    let mut a = RhoStructure::with_size(n);
    let mut k = 0;
    for rel in c.vocabulary().relations() {
        a.declare(&rel.name);
        for t in all_tuples(n, rel.arity) {
            if index >> k & 1 == 1 {
                a.insert(&rel.name, t.iter().map(|&i| i - 1).collect());
            }
            k += 1;
        }
    }
    a
}

/// Decides whether the query computed by `c` is independent of the
/// bijection, by enumerating every structure and every bijection.
pub fn decide_invariant(c: &Circuit, budget: Budget) -> Result<InvarianceReport, EvalError> {
    decide_invariant_with(c, budget, Exec::default())
}

pub fn decide_invariant_with(
    c: &Circuit,
    budget: Budget,
    exec: Exec,
) -> Result<InvarianceReport, EvalError> {
    let n = c.order();
    let structures = enumeration_work(c, factorial(n), budget)?;
    let gammas: Vec<Bijection> = Bijection::all(n).collect();
    let witness = exec.find_map_first(0..structures, |index| {
        let a = structure_from_index(c, index);
        let first = evaluate(c, &a, &gammas[0]).expect("enumerated structures fit the circuit");
        gammas[1..].iter().find_map(|gamma| {
            let other = evaluate(c, &a, gamma).expect("enumerated structures fit the circuit");
            (other != first).then(|| (a.clone(), gammas[0].clone(), gamma.clone()))
        })
    });
    Ok(InvarianceReport {
        invariant: witness.is_none(),
        witness,
    })
}

/// True iff gates `g` and `h` take the same value on every input.
pub fn semantic_gate_equal(
    c: &Circuit,
    g: usize,
    h: usize,
    budget: Budget,
) -> Result<bool, EvalError> {
    semantic_gate_equal_with(
        c,
        g,
        h,
        budget,
        MajorityConvention::default(),
        Exec::default(),
    )
}

pub fn semantic_gate_equal_with(
    c: &Circuit,
    g: usize,
    h: usize,
    budget: Budget,
    convention: MajorityConvention,
    exec: Exec,
) -> Result<bool, EvalError> {
    let inputs = enumeration_work(c, 1, budget)?;
    let differs = exec.find_map_first(0..inputs, |bits| {
        let input = EncodedInput::from_bits(c.vocabulary(), c.order(), bits);
        let v = gate_values(c, &input, convention);
        (v[g] != v[h]).then_some(())
    });
    Ok(differs.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn or_of_edges() {
        let c = corpus::c_ex();
        let mut a = RhoStructure::with_size(2);
        a.insert_named("E", &["a", "b"]).unwrap();
        let id = Bijection::identity(2);
        assert!(evaluate(&c, &a, &id).unwrap()[&vec![]]);
        let empty = RhoStructure::with_size(2);
        assert!(!evaluate(&c, &empty, &id).unwrap()[&vec![]]);
        assert!(decide_invariant(&c, Budget::default()).unwrap().invariant);
    }

    #[test]
    fn rank_gate_full_edges() {
        let c = corpus::c_rk();
        let mut a = RhoStructure::with_size(2);
        for (x, y) in [("a", "a"), ("a", "b"), ("b", "a"), ("b", "b")] {
            a.insert_named("E", &[x, y]).unwrap();
        }
        assert!(evaluate(&c, &a, &Bijection::identity(2)).unwrap()[&vec![]]);
    }

    #[test]
    fn non_invariant_detected() {
        // Output reads a single atom, so swapping the bijection changes it.
        let mut b =
            crate::circuit::CircuitBuilder::new(2, crate::circuit::Vocabulary::new([("P", 1)]), 0);
        b.relational("P(1)", "P", vec![1])
            .relational("P(2)", "P", vec![2]);
        b.output(vec![], "P(1)");
        let c = b.build().unwrap();
        let report = decide_invariant(&c, Budget::default()).unwrap();
        assert!(!report.invariant);
        assert!(report.witness.is_some());
        assert!(matches!(
            decide_invariant(&c, Budget(3)),
            Err(EvalError::TooLarge { .. })
        ));
    }

    #[test]
    fn semantic_equality() {
        let c = corpus::c_ex();
        let out = c.index_of("out").unwrap();
        let e = c.index_of("E(1,2)").unwrap();
        assert!(semantic_gate_equal(&c, out, out, Budget::default()).unwrap());
        assert!(!semantic_gate_equal(&c, out, e, Budget::default()).unwrap());
    }
}
