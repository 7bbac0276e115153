// SPDX-License-Identifier: Apache-2.0
//! Circuits over a relational input vocabulary.
//!
//! A [`CircuitBuilder`] holds an unchecked description keyed by string gate
//! ids. [`CircuitBuilder::build`] validates it and produces a [`Circuit`] in
//! which gates are addressed by their position in lexicographic id order, so
//! "smallest id" and "smallest index" coincide everywhere.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::function::StructuredFunction;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
}

/// Single-sorted relational vocabulary of circuit inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vocabulary {
    relations: Vec<Relation>,
}

impl Vocabulary {
    pub fn new(relations: impl IntoIterator<Item = (impl Into<String>, usize)>) -> Self {
        Vocabulary {
            relations: relations
                .into_iter()
                .map(|(name, arity)| Relation {
                    name: name.into(),
                    arity,
                })
                .collect(),
        }
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn relation(&self, idx: usize) -> &Relation {
        &self.relations[idx]
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }
}

/// Gate description inside a builder; children are referenced by id.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GateSpec {
    Constant(bool),
    Relational {
        relation: String,
        tuple: Vec<usize>,
    },
    /// `labelling[k]` is the child at the k-th index element in canonical order.
    Internal {
        function: StructuredFunction,
        labelling: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Constant(bool),
    Relational {
        relation: usize,
        tuple: Vec<usize>,
    },
    Internal {
        function: StructuredFunction,
        children: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub id: String,
    pub kind: GateKind,
}

impl Gate {
    pub fn function(&self) -> Option<StructuredFunction> {
        match &self.kind {
            GateKind::Internal { function, .. } => Some(*function),
            _ => None,
        }
    }

    /// Labelling in canonical index order; empty for input gates.
    pub fn labelling(&self) -> &[usize] {
        match &self.kind {
            GateKind::Internal { children, .. } => children,
            _ => &[],
        }
    }

    pub fn is_input(&self) -> bool {
        !matches!(self.kind, GateKind::Internal { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Violation {
    NotAcyclic {
        gate: String,
    },
    DuplicateConstant {
        value: bool,
        gates: Vec<String>,
    },
    NonInjectiveLambda {
        relation: String,
        tuple: Vec<usize>,
        gates: Vec<String>,
    },
    NonInjectiveOmega {
        gate: String,
        tuples: Vec<Vec<usize>>,
    },
    DanglingGateId {
        referenced_by: String,
        missing: String,
    },
    ArityMismatch {
        gate: String,
        expected: usize,
        found: usize,
    },
    DuplicateGateId {
        gate: String,
    },
    UnknownRelation {
        gate: String,
        relation: String,
    },
    ElementOutOfRange {
        gate: String,
        element: usize,
    },
    IncompleteOutputs {
        missing: Vec<usize>,
    },
    InvalidFunction {
        gate: String,
        reason: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotAcyclic { gate } => write!(f, "wiring is cyclic through gate {gate}"),
            Violation::DuplicateConstant { value, gates } => {
                write!(
                    f,
                    "more than one constant {} gate: {}",
                    *value as u8,
                    gates.join(", ")
                )
            }
            Violation::NonInjectiveLambda {
                relation,
                tuple,
                gates,
            } => {
                write!(
                    f,
                    "relational input {relation}{tuple:?} is read by several gates: {}",
                    gates.join(", ")
                )
            }
            Violation::NonInjectiveOmega { gate, tuples } => {
                write!(f, "gate {gate} is the output for {tuples:?}")
            }
            Violation::DanglingGateId {
                referenced_by,
                missing,
            } => {
                write!(f, "gate {referenced_by} references unknown gate {missing}")
            }
            Violation::ArityMismatch {
                gate,
                expected,
                found,
            } => {
                write!(f, "gate {gate}: expected {expected} entries, found {found}")
            }
            Violation::DuplicateGateId { gate } => write!(f, "gate id {gate} defined twice"),
            Violation::UnknownRelation { gate, relation } => {
                write!(f, "gate {gate} uses unknown relation {relation}")
            }
            Violation::ElementOutOfRange { gate, element } => {
                write!(f, "gate {gate}: element {element} outside [n]")
            }
            Violation::IncompleteOutputs { missing } => {
                write!(f, "no output gate for tuple {missing:?}")
            }
            Violation::InvalidFunction { gate, reason } => write!(f, "gate {gate}: {reason}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("invalid circuit: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(ValidationReport),
    #[error("unknown gate {0}")]
    UnknownGate(String),
}

/// Unchecked circuit description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitBuilder {
    pub order: usize,
    pub vocabulary: Vocabulary,
    pub arity: usize,
    pub gates: BTreeMap<String, GateSpec>,
    pub outputs: BTreeMap<Vec<usize>, String>,
    duplicates: Vec<String>,
}

impl CircuitBuilder {
    pub fn new(order: usize, vocabulary: Vocabulary, arity: usize) -> Self {
        CircuitBuilder {
            order,
            vocabulary,
            arity,
            gates: BTreeMap::new(),
            outputs: BTreeMap::new(),
            duplicates: Vec::new(),
        }
    }

    pub fn gate(&mut self, id: impl Into<String>, spec: GateSpec) -> &mut Self {
        let id = id.into();
        if self.gates.contains_key(&id) {
            self.duplicates.push(id.clone());
        }
        self.gates.insert(id, spec);
        self
    }

    pub fn constant(&mut self, id: impl Into<String>, value: bool) -> &mut Self {
        self.gate(id, GateSpec::Constant(value))
    }

    pub fn relational(
        &mut self,
        id: impl Into<String>,
        relation: impl Into<String>,
        tuple: Vec<usize>,
    ) -> &mut Self {
        self.gate(
            id,
            GateSpec::Relational {
                relation: relation.into(),
                tuple,
            },
        )
    }

    pub fn internal<S: Into<String>>(
        &mut self,
        id: impl Into<String>,
        function: StructuredFunction,
        labelling: impl IntoIterator<Item = S>,
    ) -> &mut Self {
        let labelling = labelling.into_iter().map(Into::into).collect();
        self.gate(
            id,
            GateSpec::Internal {
                function,
                labelling,
            },
        )
    }

    pub fn output(&mut self, tuple: Vec<usize>, id: impl Into<String>) -> &mut Self {
        self.outputs.insert(tuple, id.into());
        self
    }

    pub fn contains(&self, id: &str) -> bool {
        self.gates.contains_key(id)
    }

    /// An id not used by any gate, derived from `base`.
    pub fn fresh_id(&self, base: &str) -> String {
        if !self.contains(base) {
            return base.to_string();
        }
        (1..)
            .map(|k| format!("{base}~{k}"))
            .find(|id| !self.contains(id))
            .unwrap()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let v = &mut report.violations;
        for gate in &self.duplicates {
            v.push(Violation::DuplicateGateId { gate: gate.clone() });
        }
        let n = self.order;
        let mut constants: [Vec<String>; 2] = Default::default();
        let mut lambda: BTreeMap<(String, Vec<usize>), Vec<String>> = BTreeMap::new();
        let mut has_positive_input = false;
        for (id, spec) in &self.gates {
            match spec {
                GateSpec::Constant(b) => constants[*b as usize].push(id.clone()),
                GateSpec::Relational { relation, tuple } => {
                    match self.vocabulary.index_of(relation) {
                        None => v.push(Violation::UnknownRelation {
                            gate: id.clone(),
                            relation: relation.clone(),
                        }),
                        Some(r) => {
                            let arity = self.vocabulary.relation(r).arity;
                            if arity != tuple.len() {
                                v.push(Violation::ArityMismatch {
                                    gate: id.clone(),
                                    expected: arity,
                                    found: tuple.len(),
                                });
                            }
                        }
                    }
                    for &e in tuple {
                        if e == 0 || e > n {
                            v.push(Violation::ElementOutOfRange {
                                gate: id.clone(),
                                element: e,
                            });
                        }
                    }
                    if !tuple.is_empty() {
                        has_positive_input = true;
                    }
                    lambda
                        .entry((relation.clone(), tuple.clone()))
                        .or_default()
                        .push(id.clone());
                }
                GateSpec::Internal {
                    function,
                    labelling,
                } => {
                    if let Err(e) = function.check() {
                        v.push(Violation::InvalidFunction {
                            gate: id.clone(),
                            reason: e.to_string(),
                        });
                    }
                    if labelling.len() != function.index_len() {
                        v.push(Violation::ArityMismatch {
                            gate: id.clone(),
                            expected: function.index_len(),
                            found: labelling.len(),
                        });
                    }
                    for child in labelling {
                        if !self.gates.contains_key(child) {
                            v.push(Violation::DanglingGateId {
                                referenced_by: id.clone(),
                                missing: child.clone(),
                            });
                        }
                    }
                }
            }
        }
        for (b, gates) in constants.iter().enumerate() {
            if gates.len() > 1 {
                v.push(Violation::DuplicateConstant {
                    value: b == 1,
                    gates: gates.clone(),
                });
            }
        }
        for ((relation, tuple), gates) in lambda {
            if gates.len() > 1 {
                v.push(Violation::NonInjectiveLambda {
                    relation,
                    tuple,
                    gates,
                });
            }
        }
        let mut omega: BTreeMap<&String, Vec<Vec<usize>>> = BTreeMap::new();
        for (tuple, id) in &self.outputs {
            if tuple.len() != self.arity {
                v.push(Violation::ArityMismatch {
                    gate: id.clone(),
                    expected: self.arity,
                    found: tuple.len(),
                });
            }
            for &e in tuple {
                if e == 0 || e > n {
                    v.push(Violation::ElementOutOfRange {
                        gate: id.clone(),
                        element: e,
                    });
                }
            }
            if !self.gates.contains_key(id) {
                v.push(Violation::DanglingGateId {
                    referenced_by: "<output>".into(),
                    missing: id.clone(),
                });
            }
            omega.entry(id).or_default().push(tuple.clone());
        }
        for (id, tuples) in omega {
            if tuples.len() > 1 {
                v.push(Violation::NonInjectiveOmega {
                    gate: id.clone(),
                    tuples,
                });
            }
        }
        if let Some(missing) = all_tuples(n, self.arity).find(|t| !self.outputs.contains_key(t)) {
            v.push(Violation::IncompleteOutputs { missing });
        }
        if let Some(gate) = self.find_cycle() {
            v.push(Violation::NotAcyclic { gate });
        }
        if !has_positive_input {
            report.warnings.push(
                "no relational gate of nonzero arity: the circuit ignores its input structure"
                    .into(),
            );
        }
        report
    }

    /// Returns a gate on a directed cycle, if any.
    fn find_cycle(&self) -> Option<String> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state: HashMap<&str, u8> = HashMap::new();
        for root in self.gates.keys() {
            if state.contains_key(root.as_str()) {
                continue;
            }
            let mut stack: Vec<(&str, usize)> = vec![(root.as_str(), 0)];
            state.insert(root, 1);
            while let Some((id, next)) = stack.pop() {
                let children: &[String] = match self.gates.get(id) {
                    Some(GateSpec::Internal { labelling, .. }) => labelling,
                    _ => &[],
                };
                if next < children.len() {
                    stack.push((id, next + 1));
                    let child = children[next].as_str();
                    if !self.gates.contains_key(child) {
                        continue;
                    }
                    match state.get(child) {
                        Some(1) => return Some(child.to_string()),
                        Some(_) => {}
                        None => {
                            state.insert(child, 1);
                            stack.push((child, 0));
                        }
                    }
                } else {
                    state.insert(id, 2);
                }
            }
        }
        None
    }

    pub fn build(&self) -> Result<Circuit, CircuitError> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(CircuitError::Invalid(report));
        }
        let ids: Vec<&String> = self.gates.keys().collect();
        let index: HashMap<String, usize> = ids
            .iter()
            .enumerate()
            .map(|(i, id)| ((*id).clone(), i))
            .collect();
        let gates = self
            .gates
            .iter()
            .map(|(id, spec)| {
                let kind = match spec {
                    GateSpec::Constant(b) => GateKind::Constant(*b),
                    GateSpec::Relational { relation, tuple } => GateKind::Relational {
                        relation: self.vocabulary.index_of(relation).unwrap(),
                        tuple: tuple.clone(),
                    },
                    GateSpec::Internal {
                        function,
                        labelling,
                    } => GateKind::Internal {
                        function: *function,
                        children: labelling.iter().map(|c| index[c]).collect(),
                    },
                };
                Gate {
                    id: id.clone(),
                    kind,
                }
            })
            .collect();
        let outputs = self
            .outputs
            .iter()
            .map(|(t, id)| (t.clone(), index[id]))
            .collect();
        Ok(Circuit::assemble(
            self.order,
            self.vocabulary.clone(),
            self.arity,
            gates,
            outputs,
            index,
        ))
    }
}

/// Iterates over `[n]^k` in lexicographic order.
pub fn all_tuples(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = if n == 0 && k > 0 { 0 } else { n.pow(k as u32) };
    (0..total).map(move |mut code| {
        let mut t = vec![0; k];
        for slot in t.iter_mut().rev() {
            *slot = code % n + 1;
            code /= n;
        }
        t
    })
}

/// A validated circuit.
#[derive(Clone, Debug)]
pub struct Circuit {
    order: usize,
    vocabulary: Vocabulary,
    arity: usize,
    gates: Vec<Gate>,
    outputs: BTreeMap<Vec<usize>, usize>,
    index: HashMap<String, usize>,
    output_of: Vec<Option<Vec<usize>>>,
    parents: Vec<Vec<usize>>,
    topo: Vec<usize>,
    depth: Vec<usize>,
    height: Vec<Option<usize>>,
    relational: HashMap<(usize, Vec<usize>), usize>,
    constants: [Option<usize>; 2],
}

impl PartialEq for Circuit {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.vocabulary == other.vocabulary
            && self.arity == other.arity
            && self.gates == other.gates
            && self.outputs == other.outputs
    }
}

impl Circuit {
    fn assemble(
        order: usize,
        vocabulary: Vocabulary,
        arity: usize,
        gates: Vec<Gate>,
        outputs: BTreeMap<Vec<usize>, usize>,
        index: HashMap<String, usize>,
    ) -> Circuit {
        let n = gates.len();
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut relational = HashMap::new();
        let mut constants = [None, None];
        for (g, gate) in gates.iter().enumerate() {
            match &gate.kind {
                GateKind::Constant(b) => constants[*b as usize] = Some(g),
                GateKind::Relational { relation, tuple } => {
                    relational.insert((*relation, tuple.clone()), g);
                }
                GateKind::Internal { children, .. } => {
                    for &c in children {
                        parents[c].push(g);
                    }
                }
            }
        }
        for p in parents.iter_mut() {
            p.sort_unstable();
            p.dedup();
        }
        // Kahn's algorithm, smallest index first.
        let mut pending: Vec<usize> = gates
            .iter()
            .map(|g| distinct(g.labelling()).len())
            .collect();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&g| pending[g] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(g) = ready.pop_first() {
            topo.push(g);
            for &p in &parents[g] {
                pending[p] -= 1;
                if pending[p] == 0 {
                    ready.insert(p);
                }
            }
        }
        let mut depth = vec![0; n];
        for &g in &topo {
            depth[g] = gates[g]
                .labelling()
                .iter()
                .map(|&c| depth[c] + 1)
                .max()
                .unwrap_or(0);
        }
        let mut output_of = vec![None; n];
        for (t, &g) in &outputs {
            output_of[g] = Some(t.clone());
        }
        let mut height: Vec<Option<usize>> = vec![None; n];
        for &g in topo.iter().rev() {
            let via_parents = parents[g]
                .iter()
                .filter_map(|&p| height[p])
                .map(|h| h + 1)
                .max();
            height[g] = match (output_of[g].is_some(), via_parents) {
                (true, None) => Some(0),
                (_, Some(h)) => Some(h),
                (false, None) => None,
            };
        }
        Circuit {
            order,
            vocabulary,
            arity,
            gates,
            outputs,
            index,
            output_of,
            parents,
            topo,
            depth,
            height,
            relational,
            constants,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn gate(&self, g: usize) -> &Gate {
        &self.gates[g]
    }

    pub fn id(&self, g: usize) -> &str {
        &self.gates[g].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize, CircuitError> {
        self.index_of(id)
            .ok_or_else(|| CircuitError::UnknownGate(id.to_string()))
    }

    pub fn outputs(&self) -> &BTreeMap<Vec<usize>, usize> {
        &self.outputs
    }

    /// Inverse of the output map.
    pub fn output_tuple(&self, g: usize) -> Option<&[usize]> {
        self.output_of[g].as_deref()
    }

    pub fn is_output(&self, g: usize) -> bool {
        self.output_of[g].is_some()
    }

    /// Distinct parents, sorted.
    pub fn parents(&self, g: usize) -> &[usize] {
        &self.parents[g]
    }

    /// Distinct children, sorted.
    pub fn children(&self, g: usize) -> Vec<usize> {
        distinct(self.gates[g].labelling())
    }

    /// Gates with every child before its parents; ties broken by index.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Length of the longest path from an input gate to `g`.
    pub fn depth(&self, g: usize) -> usize {
        self.depth[g]
    }

    /// Length of the longest path from `g` to an output gate, if there is one.
    pub fn height(&self, g: usize) -> Option<usize> {
        self.height[g]
    }

    pub fn relational_gate(&self, relation: usize, tuple: &[usize]) -> Option<usize> {
        self.relational.get(&(relation, tuple.to_vec())).copied()
    }

    pub fn constant_gate(&self, value: bool) -> Option<usize> {
        self.constants[value as usize]
    }

    /// Gate ids, for reporting.
    pub fn ids(&self, gates: impl IntoIterator<Item = usize>) -> Vec<String> {
        gates
            .into_iter()
            .map(|g| self.gates[g].id.clone())
            .collect()
    }

    pub fn to_builder(&self) -> CircuitBuilder {
        let mut b = CircuitBuilder::new(self.order, self.vocabulary.clone(), self.arity);
        for gate in &self.gates {
            let spec = match &gate.kind {
                GateKind::Constant(v) => GateSpec::Constant(*v),
                GateKind::Relational { relation, tuple } => GateSpec::Relational {
                    relation: self.vocabulary.relation(*relation).name.clone(),
                    tuple: tuple.clone(),
                },
                GateKind::Internal { function, children } => GateSpec::Internal {
                    function: *function,
                    labelling: children.iter().map(|&c| self.gates[c].id.clone()).collect(),
                },
            };
            b.gate(gate.id.clone(), spec);
        }
        for (t, &g) in &self.outputs {
            b.output(t.clone(), self.gates[g].id.clone());
        }
        b
    }

    /// Gates from which some output gate is reachable (including outputs).
    pub fn reaches_output(&self) -> Vec<bool> {
        self.height.iter().map(Option::is_some).collect()
    }

    /// Gates reachable downwards from `roots` (including the roots).
    pub fn below(&self, roots: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = roots.to_vec();
        while let Some(g) = stack.pop() {
            if !seen[g] {
                seen[g] = true;
                stack.extend(self.gates[g].labelling());
            }
        }
        seen
    }
}

pub(crate) fn distinct(xs: &[usize]) -> Vec<usize> {
    let mut v = xs.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

pub fn validate(builder: &CircuitBuilder) -> ValidationReport {
    builder.validate()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GateMetrics {
    pub depth: usize,
    pub height: Option<usize>,
    pub children: Vec<String>,
    pub parents: Vec<String>,
}

pub fn structural_metrics(c: &Circuit) -> BTreeMap<String, GateMetrics> {
    (0..c.len())
        .map(|g| {
            let m = GateMetrics {
                depth: c.depth(g),
                height: c.height(g),
                children: c.ids(c.children(g)),
                parents: c.ids(c.parents(g).iter().copied()),
            };
            (c.id(g).to_string(), m)
        })
        .collect()
}

/// Drops internal gates with no path to an output gate. Input gates are
/// never redundant and are kept.
pub fn remove_redundant(c: &Circuit) -> Circuit {
    let keep = c.reaches_output();
    let mut b = c.to_builder();
    for (g, &kept) in keep.iter().enumerate() {
        if !kept && !c.gate(g).is_input() {
            b.gates.remove(c.id(g));
        }
    }
    b.build()
        .expect("removing unreachable internal gates keeps a circuit valid")
}
