// SPDX-License-Identifier: Apache-2.0
//! JSON documents for circuits, structures, bipartite graphs and symmetric
//! function tables.
//!
//! Circuit documents are canonical: gates sorted by id, labellings in
//! canonical index order, outputs sorted by tuple, two-space indentation.
//! Serializing a parsed document therefore reproduces it byte for byte once
//! it has been through one round.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::circuit::{
    Circuit, CircuitBuilder, CircuitError, GateKind, GateSpec, Relation, Vocabulary,
};
use crate::function::{IndexElement, StructuredFunction};
use crate::gi::BipartiteGraph;
use crate::majority::{CompileError, SymmetricSpec};
use crate::structure::{RhoStructure, StructureError};

pub const CIRCUIT_SCHEMA: &str = "symcirc/circuit/1";

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("gate {gate}: unknown gate kind {kind:?}")]
    UnknownGateKind { gate: String, kind: String },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Spec(#[from] CompileError),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

/// Deserializes with the JSON path (and line/column) of the first error.
fn from_json<T: DeserializeOwned>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents serialize");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankParams {
    pub r: usize,
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateDocument {
    pub id: String,
    /// `constant`, `relational`, `AND`, `OR`, `NAND`, `MAJ` or `RANK`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tuple: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<RankParams>,
    /// `[index element, child id]` pairs; index elements are `[k]` for
    /// symmetric functions and `[i, j]` for rank gates (1-based).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labelling: Option<Vec<(Vec<usize>, String)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputDocument {
    pub tuple: Vec<usize>,
    pub gate: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitDocument {
    pub schema: String,
    pub order: usize,
    pub vocabulary: Vec<Relation>,
    pub arity: usize,
    pub gates: Vec<GateDocument>,
    pub outputs: Vec<OutputDocument>,
}

impl CircuitDocument {
    pub fn from_circuit(c: &Circuit) -> Self {
        let gates = c
            .gates()
            .iter()
            .map(|g| {
                let mut doc = GateDocument {
                    id: g.id.clone(),
                    kind: String::new(),
                    value: None,
                    relation: None,
                    tuple: None,
                    params: None,
                    labelling: None,
                };
                match &g.kind {
                    GateKind::Constant(v) => {
                        doc.kind = "constant".into();
                        doc.value = Some(*v);
                    }
                    GateKind::Relational { relation, tuple } => {
                        doc.kind = "relational".into();
                        doc.relation = Some(c.vocabulary().relation(*relation).name.clone());
                        doc.tuple = Some(tuple.clone());
                    }
                    GateKind::Internal { function, children } => {
                        doc.kind = function.name().into();
                        if let StructuredFunction::Rank { r, p, rows, cols } = *function {
                            doc.params = Some(RankParams { r, p, rows, cols });
                        }
                        doc.labelling = Some(
                            children
                                .iter()
                                .enumerate()
                                .map(|(k, &h)| {
                                    (function.element_at(k).to_vec(), c.id(h).to_string())
                                })
                                .collect(),
                        );
                    }
                }
                doc
            })
            .collect();
        let outputs = c
            .outputs()
            .iter()
            .map(|(t, &g)| OutputDocument {
                tuple: t.clone(),
                gate: c.id(g).to_string(),
            })
            .collect();
        CircuitDocument {
            schema: CIRCUIT_SCHEMA.into(),
            order: c.order(),
            vocabulary: c.vocabulary().relations().to_vec(),
            arity: c.arity(),
            gates,
            outputs,
        }
    }

    /// An unvalidated builder; shape errors that JSON cannot express (kind,
    /// parameters, index elements) are reported here.
    pub fn to_builder(&self) -> Result<CircuitBuilder, IoError> {
        if self.schema != CIRCUIT_SCHEMA {
            return Err(schema(
                "schema",
                format!("expected {CIRCUIT_SCHEMA:?}, found {:?}", self.schema),
            ));
        }
        let vocab = Vocabulary::new(self.vocabulary.iter().map(|r| (r.name.clone(), r.arity)));
        let mut b = CircuitBuilder::new(self.order, vocab, self.arity);
        for (k, g) in self.gates.iter().enumerate() {
            let at = |field: &str| format!("gates[{k}].{field}");
            let missing = |field: &str| {
                schema(
                    at(field),
                    format!("gate {} of kind {} needs {field}", g.id, g.kind),
                )
            };
            let spec = match g.kind.as_str() {
                "constant" => GateSpec::Constant(g.value.ok_or_else(|| missing("value"))?),
                "relational" => GateSpec::Relational {
                    relation: g.relation.clone().ok_or_else(|| missing("relation"))?,
                    tuple: g.tuple.clone().ok_or_else(|| missing("tuple"))?,
                },
                kind @ ("AND" | "OR" | "NAND" | "MAJ" | "RANK") => {
                    let pairs = g.labelling.as_ref().ok_or_else(|| missing("labelling"))?;
                    let m = pairs.len();
                    let function = match kind {
                        "AND" => StructuredFunction::And(m),
                        "OR" => StructuredFunction::Or(m),
                        "NAND" => StructuredFunction::Nand(m),
                        "MAJ" => StructuredFunction::Maj(m),
                        _ => {
                            let p = g.params.as_ref().ok_or_else(|| missing("params"))?;
                            StructuredFunction::rank(p.r, p.p, p.rows, p.cols)
                                .map_err(|e| schema(at("params"), e.to_string()))?
                        }
                    };
                    if function.index_len() != m {
                        return Err(schema(
                            at("labelling"),
                            format!(
                                "{} index elements expected, found {m}",
                                function.index_len()
                            ),
                        ));
                    }
                    let mut slots: Vec<Option<String>> = vec![None; m];
                    for (e, (element, child)) in pairs.iter().enumerate() {
                        let pos = index_element(&function, element)
                            .and_then(|x| function.position(x))
                            .ok_or_else(|| {
                                schema(
                                    format!("gates[{k}].labelling[{e}]"),
                                    format!("{element:?} is not an index element of {kind}"),
                                )
                            })?;
                        if slots[pos].replace(child.clone()).is_some() {
                            return Err(schema(
                                format!("gates[{k}].labelling[{e}]"),
                                format!("index element {element:?} repeated"),
                            ));
                        }
                    }
                    GateSpec::Internal {
                        function,
                        labelling: slots.into_iter().map(Option::unwrap).collect(),
                    }
                }
                other => {
                    return Err(IoError::UnknownGateKind {
                        gate: g.id.clone(),
                        kind: other.into(),
                    })
                }
            };
            b.gate(g.id.clone(), spec);
        }
        for o in &self.outputs {
            b.output(o.tuple.clone(), o.gate.clone());
        }
        Ok(b)
    }

    pub fn to_circuit(&self) -> Result<Circuit, IoError> {
        Ok(self.to_builder()?.build()?)
    }
}

fn index_element(f: &StructuredFunction, e: &[usize]) -> Option<IndexElement> {
    match (f, e) {
        (StructuredFunction::Rank { .. }, &[i, j]) => Some(IndexElement::Cell(i, j)),
        (StructuredFunction::Rank { .. }, _) => None,
        (_, &[k]) => Some(IndexElement::Pos(k)),
        _ => None,
    }
}

pub fn parse_circuit_document(text: &str) -> Result<CircuitDocument, IoError> {
    from_json(text)
}

pub fn parse_circuit(text: &str) -> Result<Circuit, IoError> {
    parse_circuit_document(text)?.to_circuit()
}

pub fn serialize_circuit(c: &Circuit) -> String {
    to_json(&CircuitDocument::from_circuit(c))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDocument {
    pub universe: Vec<String>,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<String>>>,
}

pub fn parse_structure(text: &str) -> Result<RhoStructure, IoError> {
    let doc: StructureDocument = from_json(text)?;
    let mut a = RhoStructure::new(doc.universe);
    for (name, tuples) in &doc.relations {
        a.declare(name);
        for t in tuples {
            let t: Vec<&str> = t.iter().map(String::as_str).collect();
            a.insert_named(name, &t)?;
        }
    }
    Ok(a)
}

pub fn serialize_structure(a: &RhoStructure) -> String {
    let relations = a
        .relations()
        .iter()
        .map(|(name, tuples)| {
            let named = tuples
                .iter()
                .map(|t| t.iter().map(|&u| a.universe()[u].clone()).collect())
                .collect();
            (name.clone(), named)
        })
        .collect();
    to_json(&StructureDocument {
        universe: a.universe().to_vec(),
        relations,
    })
}

pub fn parse_bipartite(text: &str) -> Result<BipartiteGraph, IoError> {
    let g: BipartiteGraph = from_json(text)?;
    BipartiteGraph::new(g.a, g.b, g.edges).map_err(|e| schema("edges", e.to_string()))
}

/// `{"gate id": "0110", ...}`: accepted one-counts per gate.
pub fn parse_tables(text: &str) -> Result<BTreeMap<String, SymmetricSpec>, IoError> {
    let raw: BTreeMap<String, String> = from_json(text)?;
    raw.into_iter()
        .map(|(gate, bits)| {
            SymmetricSpec::parse(&bits)
                .map(|s| (gate.clone(), s))
                .map_err(|e| schema(gate, e.to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    #[test]
    fn example_round_trip() {
        for c in [corpus::c_ex(), corpus::c_rk()] {
            let text = serialize_circuit(&c);
            let back = parse_circuit(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(serialize_circuit(&back), text);
        }
    }

    #[test]
    fn unknown_kind() {
        let text = serialize_circuit(&corpus::c_ex()).replace("\"OR\"", "\"XOR\"");
        assert!(
            matches!(parse_circuit(&text), Err(IoError::UnknownGateKind { kind, .. }) if kind == "XOR")
        );
    }

    #[test]
    fn schema_errors_carry_paths() {
        let text = serialize_circuit(&corpus::c_ex()).replace("\"order\": 2", "\"order\": \"two\"");
        match parse_circuit(&text) {
            Err(IoError::Schema { path, .. }) => assert_eq!(path, "order"),
            other => panic!("{other:?}"),
        }
        let mut doc = CircuitDocument::from_circuit(&corpus::c_rk());
        let out = doc.gates.iter_mut().find(|g| g.id == "out").unwrap();
        out.labelling.as_mut().unwrap()[1].0 = vec![1, 3];
        assert!(
            matches!(doc.to_circuit(), Err(IoError::Schema { path, .. }) if path == "gates[4].labelling[1]")
        );
    }

    #[test]
    fn structure_round_trip() {
        let text = r#"{"universe":["a","b"],"relations":{"E":[["a","b"]]}}"#;
        let a = parse_structure(text).unwrap();
        assert!(a.holds("E", &[0, 1]));
        assert_eq!(parse_structure(&serialize_structure(&a)).unwrap(), a);
        assert!(parse_structure(r#"{"universe":["a"],"relations":{"E":[["a","z"]]}}"#).is_err());
    }

    #[test]
    fn tables() {
        let t = parse_tables(r#"{"out": "0110"}"#).unwrap();
        assert_eq!(t["out"].inputs(), 3);
        assert!(parse_tables(r#"{"out": "01x"}"#).is_err());
    }
}
