// SPDX-License-Identifier: Apache-2.0
//! Compiling arbitrary symmetric Boolean functions into AND/OR/NAND/MAJ
//! gates, and lowering circuits whose gates are given by truth tables.
//!
//! A symmetric function on `n` inputs is determined by the set of input
//! weights it accepts. The compiled fragment tests "at least `t` ones" with
//! one padded MAJ gate per threshold, turns pairs of thresholds into "exactly
//! `a` ones", and ORs the accepted weights together.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::circuit::{Circuit, CircuitBuilder, GateKind, GateSpec, Vocabulary};
use crate::function::{MajorityConvention, StructuredFunction};
use crate::normalize::{FALSE_ID, TRUE_ID};
use crate::structure::EncodedInput;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CompileError {
    #[error("acceptance string must have n + 1 characters of 0/1, got {0:?}")]
    BadSpec(String),
    #[error("gate {0} is not symmetric")]
    NonSymmetricGate(String),
    #[error("table names unknown or input gate {0}")]
    UnknownGate(String),
    #[error("table for gate {gate} has {spec} inputs, the gate has {fan_in}")]
    SpecArityMismatch {
        gate: String,
        spec: usize,
        fan_in: usize,
    },
}

/// A symmetric function of `n` inputs: `accept[k]` is its value when exactly
/// `k` inputs are 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymmetricSpec {
    accept: Vec<bool>,
}

impl SymmetricSpec {
    pub fn new(accept: Vec<bool>) -> Result<Self, CompileError> {
        if accept.is_empty() {
            return Err(CompileError::BadSpec(String::new()));
        }
        Ok(SymmetricSpec { accept })
    }

    /// Parses a 0/1 string of length `n + 1`, weight 0 first.
    pub fn parse(text: &str) -> Result<Self, CompileError> {
        let accept: Option<Vec<bool>> = text
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        accept
            .filter(|a| !a.is_empty())
            .map(|accept| SymmetricSpec { accept })
            .ok_or_else(|| CompileError::BadSpec(text.into()))
    }

    pub fn from_weights(n: usize, weights: &BTreeSet<usize>) -> Self {
        SymmetricSpec {
            accept: (0..=n).map(|k| weights.contains(&k)).collect(),
        }
    }

    pub fn inputs(&self) -> usize {
        self.accept.len() - 1
    }

    pub fn weights(&self) -> BTreeSet<usize> {
        (0..self.accept.len()).filter(|&k| self.accept[k]).collect()
    }

    pub fn accepts(&self, ones: usize) -> bool {
        self.accept[ones]
    }

    pub fn apply(&self, inputs: &[bool]) -> bool {
        self.accept[inputs.iter().filter(|&&b| b).count()]
    }
}

impl fmt::Display for SymmetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.accept {
            write!(f, "{}", b as u8)?;
        }
        Ok(())
    }
}

/// Constant padding making `MAJ` over `n` inputs plus padding true iff at
/// least `t` of the inputs are 1 (`1 <= t <= n`). Returns `(zeros, ones)`.
pub fn threshold_padding(n: usize, t: usize, convention: MajorityConvention) -> (usize, usize) {
    debug_assert!((1..=n).contains(&t));
    match convention {
        MajorityConvention::AtLeastHalf if 2 * t >= n => (2 * t - n, 0),
        MajorityConvention::AtLeastHalf => (0, n - 2 * t),
        MajorityConvention::Strict if 2 * t > n => (2 * t - 1 - n, 0),
        MajorityConvention::Strict => (0, n - 2 * t + 1),
    }
}

fn existing_constant(b: &CircuitBuilder, value: bool) -> Option<String> {
    b.gates
        .iter()
        .find(|(_, s)| **s == GateSpec::Constant(value))
        .map(|(id, _)| id.clone())
}

fn constant_id(b: &mut CircuitBuilder, value: bool) -> String {
    existing_constant(b, value).unwrap_or_else(|| {
        let id = b.fresh_id(if value { TRUE_ID } else { FALSE_ID });
        b.constant(id.clone(), value);
        id
    })
}

/// Adds a fragment computing `spec` on `inputs` to `b`. The fragment's
/// output gets id `out`; helper gates are named `{prefix}...`. Constant
/// gates already in `b` are reused.
pub fn compile_into(
    b: &mut CircuitBuilder,
    inputs: &[String],
    spec: &SymmetricSpec,
    convention: MajorityConvention,
    prefix: &str,
    out: &str,
) {
    let n = inputs.len();
    debug_assert_eq!(spec.inputs(), n);
    let weights = spec.weights();
    if n == 0 {
        let f = if spec.accepts(0) {
            StructuredFunction::And(0)
        } else {
            StructuredFunction::Or(0)
        };
        b.internal(out, f, Vec::<String>::new());
        return;
    }
    // Thresholds "at least t ones" needed by the accepted weights.
    let mut thresholds = BTreeSet::new();
    for &a in &weights {
        if a >= 1 {
            thresholds.insert(a);
        }
        if a < n {
            thresholds.insert(a + 1);
        }
    }
    let mut at_least: BTreeMap<usize, String> = BTreeMap::new();
    for &t in &thresholds {
        let (zeros, ones) = threshold_padding(n, t, convention);
        let mut labelling = inputs.to_vec();
        if zeros > 0 {
            let z = constant_id(b, false);
            labelling.extend(std::iter::repeat_n(z, zeros));
        }
        if ones > 0 {
            let o = constant_id(b, true);
            labelling.extend(std::iter::repeat_n(o, ones));
        }
        let id = b.fresh_id(&format!("{prefix}ge{t}"));
        b.internal(
            id.clone(),
            StructuredFunction::Maj(labelling.len()),
            labelling,
        );
        at_least.insert(t, id);
    }
    let mut below: BTreeMap<usize, String> = BTreeMap::new();
    let mut counts = Vec::new();
    for &a in &weights {
        let not_more = (a < n).then(|| {
            below
                .entry(a + 1)
                .or_insert_with(|| {
                    let id = b.fresh_id(&format!("{prefix}lt{}", a + 1));
                    b.internal(
                        id.clone(),
                        StructuredFunction::Nand(1),
                        [at_least[&(a + 1)].clone()],
                    );
                    id
                })
                .clone()
        });
        let count = match (a, not_more) {
            // Exactly n ones: at least n.
            (_, None) => at_least[&a].clone(),
            // Exactly zero ones: fewer than one.
            (0, Some(lt)) => lt,
            (_, Some(lt)) => {
                let id = b.fresh_id(&format!("{prefix}eq{a}"));
                b.internal(
                    id.clone(),
                    StructuredFunction::And(2),
                    [at_least[&a].clone(), lt],
                );
                id
            }
        };
        counts.push(count);
    }
    b.internal(out, StructuredFunction::Or(counts.len()), counts);
}

/// Standalone fragment of order `n` over the unary relation `X`; input `i`
/// is the atom `X(i)`.
pub fn compile_symmetric(spec: &SymmetricSpec, convention: MajorityConvention) -> Circuit {
    let n = spec.inputs();
    let mut b = CircuitBuilder::new(n, Vocabulary::new([("X", 1)]), 0);
    let inputs: Vec<String> = (1..=n).map(|i| format!("X({i})")).collect();
    for (i, id) in inputs.iter().enumerate() {
        b.relational(id.clone(), "X", vec![i + 1]);
    }
    compile_into(&mut b, &inputs, spec, convention, "", "out");
    b.output(vec![], "out");
    b.build().expect("compiled fragment is valid")
}

/// Gate values when the gates named in `tables` compute their table rather
/// than their labelled function.
pub fn table_gate_values(
    c: &Circuit,
    tables: &BTreeMap<usize, SymmetricSpec>,
    input: &EncodedInput,
    convention: MajorityConvention,
) -> Vec<bool> {
    let mut value = vec![false; c.len()];
    for &g in c.topological_order() {
        value[g] = match &c.gate(g).kind {
            GateKind::Constant(b) => *b,
            GateKind::Relational { relation, tuple } => input.holds(*relation, tuple),
            GateKind::Internal { function, children } => {
                let inputs: Vec<bool> = children.iter().map(|&h| value[h]).collect();
                match tables.get(&g) {
                    Some(spec) => spec.apply(&inputs),
                    None => function.apply(&inputs, convention),
                }
            }
        };
    }
    value
}

/// Resolves a table keyed by gate id against `c`.
pub fn resolve_tables(
    c: &Circuit,
    tables: &BTreeMap<String, SymmetricSpec>,
) -> Result<BTreeMap<usize, SymmetricSpec>, CompileError> {
    let mut out = BTreeMap::new();
    for (id, spec) in tables {
        let g = c
            .index_of(id)
            .ok_or_else(|| CompileError::UnknownGate(id.clone()))?;
        let f = c
            .gate(g)
            .function()
            .ok_or_else(|| CompileError::UnknownGate(id.clone()))?;
        if !f.is_symmetric() {
            return Err(CompileError::NonSymmetricGate(id.clone()));
        }
        if f.index_len() != spec.inputs() {
            return Err(CompileError::SpecArityMismatch {
                gate: id.clone(),
                spec: spec.inputs(),
                fan_in: f.index_len(),
            });
        }
        out.insert(g, spec.clone());
    }
    Ok(out)
}

/// Replaces every gate listed in `tables` by a compiled fragment. The
/// fragment output keeps the gate's id, so parents and outputs are
/// unaffected. Gates not listed are already in the majority basis and are
/// kept verbatim.
pub fn lower_to_majority(
    c: &Circuit,
    tables: &BTreeMap<String, SymmetricSpec>,
    convention: MajorityConvention,
) -> Result<Circuit, CompileError> {
    if let Some(g) = (0..c.len()).find(|&g| c.gate(g).function().is_some_and(|f| !f.is_symmetric()))
    {
        return Err(CompileError::NonSymmetricGate(c.id(g).into()));
    }
    let resolved = resolve_tables(c, tables)?;
    let mut b = c.to_builder();
    for (&g, spec) in &resolved {
        let id = c.id(g).to_string();
        let inputs: Vec<String> = c.ids(c.gate(g).labelling().iter().copied());
        b.gates.remove(&id);
        compile_into(&mut b, &inputs, spec, convention, &format!("{id}#"), &id);
    }
    Ok(b.build().expect("lowering keeps the circuit valid"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::gate_values;

    fn check_fragment(spec: &SymmetricSpec, conv: MajorityConvention) {
        let c = compile_symmetric(spec, conv);
        let n = spec.inputs();
        let out = c.index_of("out").unwrap();
        for bits in 0..1u64 << n {
            let input = EncodedInput::from_bits(c.vocabulary(), n, bits);
            let v = gate_values(&c, &input, conv);
            assert_eq!(
                v[out],
                spec.accepts(bits.count_ones() as usize),
                "{spec} on {bits:b}"
            );
        }
    }

    #[test]
    fn parity_and_exact_two() {
        for conv in [MajorityConvention::AtLeastHalf, MajorityConvention::Strict] {
            check_fragment(&SymmetricSpec::parse("0110").unwrap(), conv);
            check_fragment(&SymmetricSpec::parse("00100").unwrap(), conv);
            check_fragment(&SymmetricSpec::parse("11111").unwrap(), conv);
            check_fragment(&SymmetricSpec::parse("000").unwrap(), conv);
        }
    }

    #[test]
    fn padding_formulas() {
        assert_eq!(
            threshold_padding(4, 3, MajorityConvention::AtLeastHalf),
            (2, 0)
        );
        assert_eq!(
            threshold_padding(4, 1, MajorityConvention::AtLeastHalf),
            (0, 2)
        );
        assert_eq!(threshold_padding(4, 3, MajorityConvention::Strict), (1, 0));
        assert_eq!(threshold_padding(4, 2, MajorityConvention::Strict), (0, 1));
        assert!(SymmetricSpec::parse("01a").is_err());
    }

    #[test]
    fn lowering_rejects_rank() {
        let c = crate::corpus::c_rk();
        assert!(matches!(
            lower_to_majority(&c, &BTreeMap::new(), MajorityConvention::default()),
            Err(CompileError::NonSymmetricGate(_))
        ));
    }
}
