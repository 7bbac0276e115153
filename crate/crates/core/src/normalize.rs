// SPDX-License-Identifier: Apache-2.0
//! Transparency, unique labels, and the normalisation that produces
//! unique-label circuits.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::circuit::{remove_redundant, Circuit, GateKind, GateSpec};
use crate::equivalence::{
    layered_classes, quotient_by, EquivalenceError, GateClasses, TransparencyWitness,
};
use crate::function::StructuredFunction;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransparencyReport {
    pub transparent: bool,
    pub witness: Option<TransparencyWitness>,
}

pub fn is_transparent(c: &Circuit) -> TransparencyReport {
    match layered_classes(c) {
        Ok(_) => TransparencyReport {
            transparent: true,
            witness: None,
        },
        Err(w) => TransparencyReport {
            transparent: false,
            witness: Some(w),
        },
    }
}

/// True iff every gate's children sit in pairwise distinct classes and are
/// indexed injectively, given precomputed classes.
pub(crate) fn unique_labels_with(c: &Circuit, classes: &GateClasses) -> bool {
    (0..c.len()).all(|g| {
        let labelling = c.gate(g).labelling();
        let mut seen: Vec<usize> = labelling.iter().map(|&h| classes.class_of(h)).collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len() == labelling.len()
    })
}

/// Transparent, and every gate has injective labels and pairwise
/// inequivalent children.
pub fn has_unique_labels(c: &Circuit) -> bool {
    layered_classes(c).is_ok_and(|classes| unique_labels_with(c, &classes))
}

pub const GVEE_ID: &str = "__gvee";
pub const FALSE_ID: &str = "__false";
pub const TRUE_ID: &str = "__true";

/// Converts a transparent circuit into an equivalent one with unique labels.
///
/// Steps: drop redundant gates, merge equivalence classes, make sure both
/// constants exist, add the gadget `OR(false, true)` and append it to every
/// AND gate (and to OR gates reading exactly the two constants), then replace
/// repeated children by chains of unary AND gates.
pub fn to_unique_labels(c: &Circuit) -> Result<Circuit, EquivalenceError> {
    let reduced = remove_redundant(c);
    let classes = layered_classes(&reduced).map_err(EquivalenceError::NotTransparent)?;
    let q = quotient_by(&reduced, &classes);
    let mut b = q.to_builder();

    let false_id = match q.constant_gate(false) {
        Some(g) => q.id(g).to_string(),
        None => {
            let id = b.fresh_id(FALSE_ID);
            b.constant(id.clone(), false);
            id
        }
    };
    let true_id = match q.constant_gate(true) {
        Some(g) => q.id(g).to_string(),
        None => {
            let id = b.fresh_id(TRUE_ID);
            b.constant(id.clone(), true);
            id
        }
    };
    let gvee = b.fresh_id(GVEE_ID);

    // Widen AND gates, and OR gates over exactly the two constants.
    let mut widened: Vec<(String, GateSpec)> = Vec::new();
    for (id, spec) in &b.gates {
        if let GateSpec::Internal {
            function,
            labelling,
        } = spec
        {
            let over_constants = {
                let mut l = labelling.clone();
                l.sort();
                l.dedup();
                labelling.len() == 2
                    && l.len() == 2
                    && l.contains(&false_id)
                    && l.contains(&true_id)
            };
            let widen = match function {
                StructuredFunction::And(_) => true,
                StructuredFunction::Or(2) => over_constants,
                _ => false,
            };
            if widen {
                let mut l = labelling.clone();
                l.push(gvee.clone());
                widened.push((
                    id.clone(),
                    GateSpec::Internal {
                        function: function.with_fan_in(l.len()),
                        labelling: l,
                    },
                ));
            }
        }
    }
    for (id, spec) in widened {
        b.gates.insert(id, spec);
    }
    b.internal(
        gvee.clone(),
        StructuredFunction::Or(2),
        [false_id.clone(), true_id.clone()],
    );

    // Longest run of a repeated child within a single parent.
    let mut copies: BTreeMap<String, usize> = BTreeMap::new();
    for spec in b.gates.values() {
        if let GateSpec::Internal { labelling, .. } = spec {
            let mut count: BTreeMap<&String, usize> = BTreeMap::new();
            for child in labelling {
                *count.entry(child).or_default() += 1;
            }
            for (child, k) in count {
                let e = copies.entry(child.clone()).or_default();
                *e = (*e).max(k);
            }
        }
    }
    let mut chains: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (h, &k) in &copies {
        if k < 2 {
            continue;
        }
        let mut chain = Vec::with_capacity(k - 1);
        let mut below = h.clone();
        for i in 1..k {
            let id = b.fresh_id(&format!("{h}#dup{i}"));
            b.internal(id.clone(), StructuredFunction::And(1), [below]);
            below = id.clone();
            chain.push(id);
        }
        chains.insert(h.clone(), chain);
    }
    let mut rewired: Vec<(String, GateSpec)> = Vec::new();
    for (id, spec) in &b.gates {
        if let GateSpec::Internal {
            function,
            labelling,
        } = spec
        {
            let mut seen: BTreeMap<&String, usize> = BTreeMap::new();
            let mut changed = false;
            let l: Vec<String> = labelling
                .iter()
                .map(|child| {
                    let k = seen.entry(child).or_default();
                    let out = if *k == 0 {
                        child.clone()
                    } else {
                        chains[child][*k - 1].clone()
                    };
                    changed |= *k > 0;
                    *k += 1;
                    out
                })
                .collect();
            if changed {
                rewired.push((
                    id.clone(),
                    GateSpec::Internal {
                        function: *function,
                        labelling: l,
                    },
                ));
            }
        }
    }
    for (id, spec) in rewired {
        b.gates.insert(id, spec);
    }
    Ok(b.build().expect("normalisation keeps the circuit valid"))
}

/// Gates of the circuit that are internal and not in the majority basis.
pub fn non_symmetric_gates(c: &Circuit) -> Vec<usize> {
    (0..c.len())
        .filter(|&g| matches!(&c.gate(g).kind, GateKind::Internal { function, .. } if !function.is_symmetric()))
        .collect()
}
