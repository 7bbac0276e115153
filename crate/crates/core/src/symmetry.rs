// SPDX-License-Identifier: Apache-2.0
//! Extending permutations of `[n]` to automorphisms of unique-label
//! circuits, and the induced action on the universe of a gate.
//!
//! In a unique-label circuit every permutation extends to at most one
//! automorphism. The extension is built in three passes: first on the
//! quotient circuit bottom-up, then on the circuit itself top-down (a gate is
//! placed among the children shared by the images of its parents), and
//! finally the candidate map is checked against the full automorphism
//! conditions.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::circuit::{Circuit, GateKind};
use crate::equivalence::{index_iso_check, layered_classes, GateClasses};
use crate::function::{StructuredFunction, UniverseElement};
use crate::normalize::unique_labels_with;
use crate::permutation::Permutation;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymmetryError {
    #[error("circuit does not have unique labels")]
    NotUniqueLabels,
    #[error("permutation has degree {found}, circuit has order {expected}")]
    OrderMismatch { expected: usize, found: usize },
    #[error("parentless gates {0} and {1} are equivalent, so extensions are not unique")]
    AmbiguousRoots(String, String),
    #[error("the permutation does not extend to an automorphism")]
    NoExtension,
    #[error("the automorphism moves gate {0}")]
    NotStabilized(String),
    #[error("{0} is not an element of the universe of gate {1}")]
    NotInUniverse(UniverseElement, String),
    #[error("gate {0} is an input gate and has no universe")]
    InputGate(String),
    #[error("circuit is not symmetric: {0} does not extend")]
    NotSymmetric(Permutation),
    #[error("gate {0} has no small support")]
    NoSmallSupport(String),
    #[error("unknown gate {0}")]
    UnknownGate(String),
}

/// An automorphism of a circuit, with the index automorphism realising it at
/// every internal gate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateMap {
    pub sigma: Permutation,
    pub images: Vec<usize>,
    /// For an internal gate `g`, `witness[g][x]` is the position `y` with
    /// `L(pi g)(y) = pi(L(g)(x))`; `None` for input gates.
    pub witness: Vec<Option<Vec<usize>>>,
}

impl GateMap {
    pub fn image(&self, g: usize) -> usize {
        self.images[g]
    }

    pub fn to_report(&self, c: &Circuit) -> GateMapReport {
        GateMapReport {
            permutation: self.sigma.to_string(),
            images: (0..c.len())
                .map(|g| (c.id(g).to_string(), c.id(self.images[g]).to_string()))
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GateMapReport {
    pub permutation: String,
    pub images: Vec<(String, String)>,
}

type ClassKey = (StructuredFunction, Vec<usize>);

/// Precomputed data for repeatedly extending permutations of one
/// unique-label circuit. Extensions are cached per permutation.
pub struct SymmetryContext<'c> {
    c: &'c Circuit,
    classes: GateClasses,
    /// Children of each class representative, as classes, in index order.
    class_children: Vec<Vec<usize>>,
    class_function: Vec<Option<StructuredFunction>>,
    class_lookup: HashMap<ClassKey, Vec<usize>>,
    class_order: Vec<usize>,
    parentless: Vec<bool>,
    memo: Mutex<HashMap<Permutation, Option<Arc<GateMap>>>>,
}

impl<'c> SymmetryContext<'c> {
    pub fn new(c: &'c Circuit) -> Result<Self, SymmetryError> {
        let classes = layered_classes(c).map_err(|_| SymmetryError::NotUniqueLabels)?;
        if !unique_labels_with(c, &classes) {
            return Err(SymmetryError::NotUniqueLabels);
        }
        let k = classes.len();
        let mut class_children = vec![Vec::new(); k];
        let mut class_function = vec![None; k];
        let mut class_lookup: HashMap<ClassKey, Vec<usize>> = HashMap::new();
        for (cls, members) in classes.classes().iter().enumerate() {
            let rep = members[0];
            let children: Vec<usize> = c
                .gate(rep)
                .labelling()
                .iter()
                .map(|&h| classes.class_of(h))
                .collect();
            if let Some(f) = c.gate(rep).function() {
                let mut set = children.clone();
                set.sort_unstable();
                class_lookup.entry((f, set)).or_default().push(cls);
                class_function[cls] = Some(f);
            }
            class_children[cls] = children;
        }
        let mut class_order: Vec<usize> = (0..k).collect();
        class_order.sort_by_key(|&cls| (c.depth(classes.members(cls)[0]), cls));
        let parentless: Vec<bool> = (0..c.len())
            .map(|g| c.parents(g).is_empty() && !c.is_output(g))
            .collect();
        // Two equivalent parentless internal gates could be swapped freely.
        for members in classes.classes() {
            let roots: Vec<usize> = members
                .iter()
                .copied()
                .filter(|&g| parentless[g] && !c.gate(g).is_input())
                .collect();
            if roots.len() > 1 {
                return Err(SymmetryError::AmbiguousRoots(
                    c.id(roots[0]).into(),
                    c.id(roots[1]).into(),
                ));
            }
        }
        Ok(SymmetryContext {
            c,
            classes,
            class_children,
            class_function,
            class_lookup,
            class_order,
            parentless,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn circuit(&self) -> &'c Circuit {
        self.c
    }

    pub fn classes(&self) -> &GateClasses {
        &self.classes
    }

    /// The unique automorphism extending `sigma`, if any.
    pub fn extend(&self, sigma: &Permutation) -> Result<Option<Arc<GateMap>>, SymmetryError> {
        if sigma.degree() != self.c.order() {
            return Err(SymmetryError::OrderMismatch {
                expected: self.c.order(),
                found: sigma.degree(),
            });
        }
        if let Some(hit) = self.memo.lock().unwrap().get(sigma) {
            return Ok(hit.clone());
        }
        let result = self.compute(sigma).map(Arc::new);
        self.memo
            .lock()
            .unwrap()
            .insert(sigma.clone(), result.clone());
        Ok(result)
    }

    fn input_image(&self, g: usize, sigma: &Permutation) -> Option<usize> {
        match &self.c.gate(g).kind {
            GateKind::Constant(_) => Some(g),
            GateKind::Relational { relation, tuple } => {
                self.c.relational_gate(*relation, &sigma.apply_tuple(tuple))
            }
            GateKind::Internal { .. } => None,
        }
    }

    fn output_image(&self, g: usize, sigma: &Permutation) -> Option<usize> {
        let t = self.c.output_tuple(g)?;
        self.c.outputs().get(&sigma.apply_tuple(t)).copied()
    }

    fn outputs_agree(&self, g: usize, h: usize, sigma: &Permutation) -> bool {
        match (self.c.output_tuple(g), self.c.output_tuple(h)) {
            (None, None) => true,
            (Some(a), Some(b)) => sigma.apply_tuple(a) == b,
            _ => false,
        }
    }

    /// Bottom-up extension to the quotient.
    fn quotient_map(&self, sigma: &Permutation) -> Option<Vec<usize>> {
        let k = self.classes.len();
        let mut image: Vec<Option<usize>> = vec![None; k];
        for &cls in &self.class_order {
            let rep = self.classes.members(cls)[0];
            let target = match self.class_function[cls] {
                None => {
                    let t = self.classes.class_of(self.input_image(rep, sigma)?);
                    self.outputs_agree(rep, self.classes.members(t)[0], sigma)
                        .then_some(t)?
                }
                Some(f) => {
                    let mapped: Vec<usize> = self.class_children[cls]
                        .iter()
                        .map(|&h| image[h].unwrap())
                        .collect();
                    let mut set = mapped.clone();
                    set.sort_unstable();
                    let candidates = self.class_lookup.get(&(f, set))?;
                    *candidates.iter().find(|&&t| {
                        self.outputs_agree(rep, self.classes.members(t)[0], sigma)
                            && labels_match(&f, &mapped, &self.class_children[t])
                    })?
                }
            };
            image[cls] = Some(target);
        }
        let image: Vec<usize> = image.into_iter().map(Option::unwrap).collect();
        let mut hit = vec![false; k];
        for &t in &image {
            if std::mem::replace(&mut hit[t], true) {
                return None;
            }
        }
        Some(image)
    }

    fn compute(&self, sigma: &Permutation) -> Option<GateMap> {
        let c = self.c;
        let qmap = self.quotient_map(sigma)?;
        let mut images: Vec<usize> = vec![usize::MAX; c.len()];
        for &h in c.topological_order().iter().rev() {
            let target_class = qmap[self.classes.class_of(h)];
            // Children shared by the images of all parents.
            let parents = c.parents(h);
            let shared: Option<Vec<usize>> = (!parents.is_empty()).then(|| {
                let mut count: HashMap<usize, usize> = HashMap::new();
                for &p in parents {
                    for x in crate::circuit::distinct(c.gate(images[p]).labelling()) {
                        *count.entry(x).or_default() += 1;
                    }
                }
                let mut s: Vec<usize> = count
                    .into_iter()
                    .filter(|&(_, k)| k == parents.len())
                    .map(|(x, _)| x)
                    .collect();
                s.sort_unstable();
                s
            });
            let target = if c.is_output(h) {
                self.output_image(h, sigma)?
            } else if c.gate(h).is_input() {
                self.input_image(h, sigma)?
            } else {
                let members = self.classes.members(target_class);
                match &shared {
                    Some(s) => *members.iter().find(|m| s.binary_search(m).is_ok())?,
                    None => *members.iter().find(|&&m| self.parentless[m])?,
                }
            };
            if self.classes.class_of(target) != target_class {
                return None;
            }
            if let Some(s) = &shared {
                if s.binary_search(&target).is_err() {
                    return None;
                }
            }
            images[h] = target;
        }
        self.verify(sigma, images)
    }

    /// Checks every automorphism condition and records the index witnesses.
    fn verify(&self, sigma: &Permutation, images: Vec<usize>) -> Option<GateMap> {
        let c = self.c;
        let mut hit = vec![false; c.len()];
        for &t in &images {
            if std::mem::replace(&mut hit[t], true) {
                return None;
            }
        }
        for (x, &g) in c.outputs() {
            if c.outputs().get(&sigma.apply_tuple(x)) != Some(&images[g]) {
                return None;
            }
        }
        let mut witness = vec![None; c.len()];
        for g in 0..c.len() {
            let t = images[g];
            match (&c.gate(g).kind, &c.gate(t).kind) {
                (GateKind::Constant(a), GateKind::Constant(b)) if a == b => {}
                (
                    GateKind::Relational {
                        relation: r,
                        tuple: x,
                    },
                    GateKind::Relational {
                        relation: s,
                        tuple: y,
                    },
                ) if r == s && sigma.apply_tuple(x) == *y => {}
                (
                    GateKind::Internal {
                        function: f,
                        children: lg,
                    },
                    GateKind::Internal {
                        function: f2,
                        children: lt,
                    },
                ) if f == f2 => {
                    let lambda: Option<Vec<usize>> = lg
                        .iter()
                        .map(|&h| lt.iter().position(|&y| y == images[h]))
                        .collect();
                    let lambda = lambda?;
                    if !index_iso_check(f, &lambda) {
                        return None;
                    }
                    witness[g] = Some(lambda);
                }
                _ => return None,
            }
        }
        Some(GateMap {
            sigma: sigma.clone(),
            images,
            witness,
        })
    }

    /// `sigma` applied to the universe element `a` of gate `g`, where the
    /// automorphism extending `sigma` fixes `g`.
    pub fn element_action(
        &self,
        sigma: &Permutation,
        g: usize,
        a: UniverseElement,
    ) -> Result<UniverseElement, SymmetryError> {
        let map = self.extend(sigma)?.ok_or(SymmetryError::NoExtension)?;
        apply_to_element(self.c, &map, g, a)
    }
}

/// Image of universe element `a` of `g` under an automorphism fixing `g`.
pub fn apply_to_element(
    c: &Circuit,
    map: &GateMap,
    g: usize,
    a: UniverseElement,
) -> Result<UniverseElement, SymmetryError> {
    let f = c
        .gate(g)
        .function()
        .ok_or_else(|| SymmetryError::InputGate(c.id(g).into()))?;
    if map.images[g] != g {
        return Err(SymmetryError::NotStabilized(c.id(g).into()));
    }
    let pos = *f
        .positions_containing(a)
        .first()
        .ok_or_else(|| SymmetryError::NotInUniverse(a, c.id(g).into()))?;
    let coordinate = f
        .element_at(pos)
        .coordinates()
        .iter()
        .position(|&b| b == a)
        .unwrap();
    let lambda = map.witness[g]
        .as_ref()
        .expect("internal gate has a witness");
    Ok(f.element_at(lambda[pos]).coordinates()[coordinate])
}

/// Whether `mapped` (images of the children of one gate) and `target` (the
/// children of another) are related by an index automorphism of `f`.
fn labels_match(f: &StructuredFunction, mapped: &[usize], target: &[usize]) -> bool {
    if f.is_symmetric() {
        let mut a = mapped.to_vec();
        let mut b = target.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        return a == b;
    }
    let lambda: Option<Vec<usize>> = mapped
        .iter()
        .map(|h| target.iter().position(|y| y == h))
        .collect();
    lambda.is_some_and(|l| index_iso_check(f, &l))
}

/// The unique automorphism of a unique-label circuit extending `sigma`.
pub fn extend_permutation(
    c: &Circuit,
    sigma: &Permutation,
) -> Result<Option<GateMap>, SymmetryError> {
    let ctx = SymmetryContext::new(c)?;
    Ok(ctx.extend(sigma)?.map(|m| (*m).clone()))
}

pub fn element_action(
    c: &Circuit,
    sigma: &Permutation,
    gate: &str,
    a: UniverseElement,
) -> Result<UniverseElement, SymmetryError> {
    let g = c
        .index_of(gate)
        .ok_or_else(|| SymmetryError::UnknownGate(gate.into()))?;
    SymmetryContext::new(c)?.element_action(sigma, g, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::normalize::to_unique_labels;

    #[test]
    fn swap_on_example() {
        let u = to_unique_labels(&corpus::c_ex()).unwrap();
        let sigma = Permutation::parse("(1 2)", 2).unwrap();
        let map = extend_permutation(&u, &sigma).unwrap().unwrap();
        let img = |id: &str| u.id(map.image(u.index_of(id).unwrap())).to_string();
        assert_eq!(img("E(1,2)"), "E(2,1)");
        assert_eq!(img("E(1,1)"), "E(2,2)");
        assert_eq!(img("out"), "out");
        assert_eq!(img(crate::normalize::GVEE_ID), crate::normalize::GVEE_ID);
    }

    #[test]
    fn identity_extends_to_identity() {
        let c = corpus::c_rk();
        let map = extend_permutation(&c, &Permutation::identity(2))
            .unwrap()
            .unwrap();
        assert!(map.images.iter().enumerate().all(|(g, &t)| g == t));
    }

    #[test]
    fn rank_swap_acts_on_rows_and_columns() {
        let c = corpus::c_rk();
        let sigma = Permutation::parse("(1 2)", 2).unwrap();
        let r = element_action(&c, &sigma, "out", UniverseElement::Row(1)).unwrap();
        assert_eq!(r, UniverseElement::Row(2));
        let col = element_action(&c, &sigma, "out", UniverseElement::Col(2)).unwrap();
        assert_eq!(col, UniverseElement::Col(1));
    }

    #[test]
    fn non_symmetric_has_no_extension() {
        let mut b = crate::CircuitBuilder::new(2, crate::Vocabulary::new([("P", 1)]), 0);
        b.relational("P(1)", "P", vec![1])
            .relational("P(2)", "P", vec![2]);
        b.internal("o", StructuredFunction::And(1), ["P(1)"]);
        b.output(vec![], "o");
        let c = b.build().unwrap();
        let sigma = Permutation::parse("(1 2)", 2).unwrap();
        assert_eq!(extend_permutation(&c, &sigma).unwrap(), None);
        assert_eq!(
            element_action(&c, &sigma, "o", UniverseElement::Pos(1)),
            Err(SymmetryError::NoExtension)
        );
    }
}
