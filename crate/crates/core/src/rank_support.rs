// SPDX-License-Identifier: Apache-2.0
//! Evaluating a rank gate of a symmetric circuit from supports alone.
//!
//! Fix a rank gate `g` with small canonical support and an injective
//! assignment `eta` of that support into the universe of the input structure.
//! Rows (and columns) of `g` are described up to the stabiliser of the
//! support by an orbit representative `i` together with an assignment `x` of
//! the support of `i` into the universe. The matrix `M` indexed by such pairs
//! records which children evaluate to 1, using only per-child sets of
//! accepting assignments. Its rank over `F_p` equals the rank of the matrix
//! the gate actually reads, which this module checks against direct
//! evaluation.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use itertools::Itertools;
use serde::Serialize;

use crate::circuit::Circuit;
use crate::eval::gate_values;
use crate::function::{MajorityConvention, StructuredFunction, UniverseElement};
use crate::orbits::{universe_orbits, GateSupports};
use crate::partition::{canonical_support, UnionFind};
use crate::permutation::Permutation;
use crate::rank::rank_of_bits;
use crate::structure::{Bijection, EncodedInput, RhoStructure};
use crate::symmetry::{SymmetryContext, SymmetryError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RankSupportError {
    #[error("gate {0} is not a rank gate")]
    NotRankGate(String),
    #[error("{0} has no small support")]
    NoSmallSupport(String),
    #[error("not enough fresh elements of [n] to shift a column assignment")]
    InsufficientFreshElements,
    #[error("support of child {0} is not covered by the row and column assignments")]
    UncoveredSupport(String),
    #[error("membership of an assignment for gate {0} depends on the chosen bijection")]
    GammaDependent(String),
    #[error("assignment is not injective or not compatible with the gate support")]
    BadAssignment,
    #[error("shifted assignment is incompatible with the row assignment")]
    Incompatible,
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
}

impl RankSupportError {
    /// Errors that mean "this instance is outside the regime where the
    /// construction applies" rather than a failure of the construction.
    pub fn is_skip(&self) -> bool {
        matches!(
            self,
            RankSupportError::NoSmallSupport(_)
                | RankSupportError::InsufficientFreshElements
                | RankSupportError::UncoveredSupport(_)
        )
    }
}

/// Partial injective map from `[n]` (1-based) to universe positions (0-based).
pub type Assignment = BTreeMap<usize, usize>;

/// Agree on the shared domain, and disjoint images off it.
pub fn compatible(f: &Assignment, q: &Assignment) -> bool {
    for (a, &u) in f {
        match q.get(a) {
            Some(&v) if v != u => return false,
            Some(_) => {}
            None => {
                if q.iter().any(|(b, &v)| !f.contains_key(b) && v == u) {
                    return false;
                }
            }
        }
    }
    true
}

pub fn combine(f: &Assignment, q: &Assignment) -> Assignment {
    f.iter().chain(q).map(|(&a, &u)| (a, u)).collect()
}

/// Completes a partial injective map on `[n]` to a permutation, sending the
/// remaining points to the remaining values in increasing order.
pub fn complete_permutation(n: usize, partial: &BTreeMap<usize, usize>) -> Permutation {
    let used: BTreeSet<usize> = partial.values().copied().collect();
    let mut free = (1..=n).filter(|v| !used.contains(v));
    let images = (1..=n)
        .map(|a| {
            partial
                .get(&a)
                .copied()
                .unwrap_or_else(|| free.next().expect("partial map is injective"))
        })
        .collect();
    Permutation::new(images).expect("completion of an injective partial map")
}

/// All injective maps from `domain` into `0..universe`, compatible with
/// `base`.
pub fn injective_assignments(
    domain: &[usize],
    universe: usize,
    base: &Assignment,
) -> Vec<Assignment> {
    (0..universe)
        .permutations(domain.len())
        .map(|images| domain.iter().copied().zip(images).collect::<Assignment>())
        .filter(|x| compatible(x, base))
        .collect()
}

/// Gate values on the structure for a bijection given by its inverse
/// (`gamma_inv[a - 1]` is the universe position sent to `a`), cached.
pub struct StructureValues<'a> {
    c: &'a Circuit,
    a: &'a RhoStructure,
    cache: Mutex<HashMap<Vec<usize>, Arc<Vec<bool>>>>,
}

impl<'a> StructureValues<'a> {
    pub fn new(c: &'a Circuit, a: &'a RhoStructure) -> Self {
        StructureValues {
            c,
            a,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn values(&self, gamma_inv: &[usize]) -> Arc<Vec<bool>> {
        if let Some(v) = self.cache.lock().unwrap().get(gamma_inv) {
            return v.clone();
        }
        let mut images = vec![0; gamma_inv.len()];
        for (a, &u) in gamma_inv.iter().enumerate() {
            images[u] = a + 1;
        }
        let gamma = Bijection::new(images).expect("inverse of a bijection");
        let input = EncodedInput::from_structure(self.c.vocabulary(), self.a, &gamma)
            .expect("structure fits circuit");
        let v = Arc::new(gate_values(self.c, &input, MajorityConvention::default()));
        self.cache
            .lock()
            .unwrap()
            .insert(gamma_inv.to_vec(), v.clone());
        v
    }
}

/// `gamma^-1` agreeing with `eta` on its domain, completed in increasing
/// (or, with `reverse`, decreasing) order.
fn gamma_inverse(n: usize, eta: &Assignment, reverse: bool) -> Vec<usize> {
    let used: BTreeSet<usize> = eta.values().copied().collect();
    let mut free: Vec<usize> = (0..n).filter(|u| !used.contains(u)).collect();
    if reverse {
        free.reverse();
    }
    let mut free = free.into_iter();
    (1..=n)
        .map(|a| eta.get(&a).copied().unwrap_or_else(|| free.next().unwrap()))
        .collect()
}

/// Accepting assignments of a gate's canonical support.
#[derive(Clone, Debug)]
pub struct EvSet {
    pub support: Vec<usize>,
    pub members: BTreeSet<Vec<usize>>,
}

impl EvSet {
    pub fn contains(&self, w: &Assignment) -> bool {
        let images: Option<Vec<usize>> = self.support.iter().map(|a| w.get(a).copied()).collect();
        images.is_some_and(|i| self.members.contains(&i))
    }
}

pub fn ev_set(
    values: &StructureValues<'_>,
    supports: &GateSupports,
    h: usize,
) -> Result<EvSet, RankSupportError> {
    let c = values.c;
    let n = c.order();
    let support = supports
        .canonical_support(h)
        .ok_or_else(|| RankSupportError::NoSmallSupport(c.id(h).into()))?
        .to_vec();
    let mut members = BTreeSet::new();
    for eta in injective_assignments(&support, n, &Assignment::new()) {
        let v1 = values.values(&gamma_inverse(n, &eta, false))[h];
        let v2 = values.values(&gamma_inverse(n, &eta, true))[h];
        if v1 != v2 {
            return Err(RankSupportError::GammaDependent(c.id(h).into()));
        }
        if v1 {
            members.insert(support.iter().map(|a| eta[a]).collect());
        }
    }
    Ok(EvSet { support, members })
}

/// Map `c` on the support of a column that moves its fresh part away from
/// the row assignment; see [`SupportMatrix`].
pub fn shift_vector(
    n: usize,
    gate_support: &[usize],
    row_support: &[usize],
    x: &Assignment,
    y: &Assignment,
) -> Result<BTreeMap<usize, usize>, RankSupportError> {
    let row_fresh: BTreeMap<usize, usize> = x
        .iter()
        .filter(|(a, _)| !gate_support.contains(a))
        .map(|(&a, &u)| (u, a))
        .collect();
    let mut fresh = (1..=n).filter(|a| !gate_support.contains(a) && !row_support.contains(a));
    let mut shift = BTreeMap::new();
    for (&a, &u) in y {
        let target = if gate_support.contains(&a) {
            a
        } else if let Some(&b) = row_fresh.get(&u) {
            b
        } else {
            fresh
                .next()
                .ok_or(RankSupportError::InsufficientFreshElements)?
        };
        shift.insert(a, target);
    }
    Ok(shift)
}

/// Orbit representatives, their relative supports and assignments for one
/// side (rows or columns) of a rank gate.
#[derive(Clone, Debug)]
struct Side {
    /// Index entries `(representative, assignment)`.
    entries: Vec<(UniverseElement, Assignment)>,
    supports: BTreeMap<UniverseElement, Vec<usize>>,
    /// Class of each entry under mutual stability.
    class: Vec<usize>,
    classes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankSupportReport {
    pub gate: String,
    pub eta: Vec<(usize, String)>,
    pub rows: usize,
    pub cols: usize,
    pub row_classes: usize,
    pub col_classes: usize,
    pub rank_support_matrix: usize,
    pub rank_quotient: usize,
    pub rank_direct: usize,
    pub value_from_supports: bool,
    pub value_direct: bool,
    /// The matrix is constant on blocks of mutually stable indices.
    pub constant_on_classes: bool,
    /// The quotient matrix is the child-value matrix up to a bijection of
    /// rows and of columns.
    pub matches_child_matrix: bool,
    /// Accepting-assignment membership agrees with direct evaluation of the
    /// corresponding child.
    pub ev_sound: bool,
}

impl RankSupportReport {
    pub fn agreement(&self) -> bool {
        self.rank_support_matrix == self.rank_quotient
            && self.rank_quotient == self.rank_direct
            && self.value_from_supports == self.value_direct
            && self.constant_on_classes
            && self.matches_child_matrix
            && self.ev_sound
    }
}

/// Everything needed to evaluate rank gates of one circuit on one structure.
pub struct SupportMatrix<'a, 'c> {
    ctx: &'a SymmetryContext<'c>,
    supports: &'a GateSupports,
    values: StructureValues<'a>,
    ev: Mutex<HashMap<usize, Arc<EvSet>>>,
}

impl<'a, 'c> SupportMatrix<'a, 'c> {
    pub fn new(
        ctx: &'a SymmetryContext<'c>,
        supports: &'a GateSupports,
        a: &'a RhoStructure,
    ) -> Self {
        SupportMatrix {
            ctx,
            supports,
            values: StructureValues::new(ctx.circuit(), a),
            ev: Mutex::new(HashMap::new()),
        }
    }

    fn circuit(&self) -> &'c Circuit {
        self.ctx.circuit()
    }

    pub fn ev(&self, h: usize) -> Result<Arc<EvSet>, RankSupportError> {
        if let Some(e) = self.ev.lock().unwrap().get(&h) {
            return Ok(e.clone());
        }
        let e = Arc::new(ev_set(&self.values, self.supports, h)?);
        self.ev.lock().unwrap().insert(h, e.clone());
        Ok(e)
    }

    fn side(
        &self,
        g: usize,
        orbits: &[(
            UniverseElement,
            crate::orbits::OrbitAndSupport<UniverseElement>,
        )],
        is_row: bool,
        eta: &Assignment,
    ) -> Result<Side, RankSupportError> {
        let c = self.circuit();
        let n = c.order();
        let gate_support = self.supports.canonical_support(g).unwrap().to_vec();
        let mut reps: BTreeSet<UniverseElement> = BTreeSet::new();
        let mut supports = BTreeMap::new();
        for (a, o) in orbits {
            if matches!(a, UniverseElement::Row(_)) != is_row {
                continue;
            }
            reps.insert(o.orbit[0]);
            let s = canonical_support(&o.partition)
                .canonical_support
                .ok_or_else(|| {
                    RankSupportError::NoSmallSupport(format!("{a} of gate {}", c.id(g)))
                })?;
            supports.insert(*a, s);
        }
        let stabilisers: Vec<Permutation> = Permutation::fixing(n, &gate_support);
        let mut entries = Vec::new();
        let mut class = Vec::new();
        let mut classes = 0;
        for &rep in &reps {
            let support = &supports[&rep];
            let assignments = injective_assignments(support, n, eta);
            // Restrictions to the support of permutations fixing the gate
            // support pointwise and fixing `rep`.
            let mut restrictions: BTreeSet<Vec<usize>> = BTreeSet::new();
            for pi in &stabilisers {
                if self.ctx.element_action(pi, g, rep)? == rep {
                    restrictions.insert(support.iter().map(|&a| pi.apply(a)).collect());
                }
            }
            let index: HashMap<Vec<usize>, usize> = assignments
                .iter()
                .enumerate()
                .map(|(k, x)| (support.iter().map(|a| x[a]).collect(), k))
                .collect();
            let mut uf = UnionFind::new(assignments.len());
            for (k, x) in assignments.iter().enumerate() {
                for r in &restrictions {
                    // x' with x = x' o pi on the support: x'(pi(a)) = x(a).
                    let mut image = vec![0; support.len()];
                    for (pos, &a) in support.iter().enumerate() {
                        let target = support
                            .iter()
                            .position(|&b| b == r[pos])
                            .expect("stabiliser preserves support");
                        image[target] = x[&a];
                    }
                    if let Some(&k2) = index.get(&image) {
                        uf.union(k, k2);
                    }
                }
            }
            let mut local: HashMap<usize, usize> = HashMap::new();
            for (k, x) in assignments.into_iter().enumerate() {
                let root = uf.find(k);
                let id = *local.entry(root).or_insert_with(|| {
                    classes += 1;
                    classes - 1
                });
                entries.push((rep, x));
                class.push(id);
            }
        }
        Ok(Side {
            entries,
            supports,
            class,
            classes,
        })
    }

    /// Builds the support matrix of rank gate `g` for `eta` and compares it
    /// with direct evaluation.
    pub fn evaluate(
        &self,
        g: usize,
        eta: &Assignment,
    ) -> Result<RankSupportReport, RankSupportError> {
        let c = self.circuit();
        let n = c.order();
        let Some(f @ StructuredFunction::Rank { r, p, cols, .. }) = c.gate(g).function() else {
            return Err(RankSupportError::NotRankGate(c.id(g).into()));
        };
        let gate_support = self
            .supports
            .canonical_support(g)
            .ok_or_else(|| RankSupportError::NoSmallSupport(c.id(g).into()))?
            .to_vec();
        if eta.keys().copied().collect::<Vec<_>>() != gate_support
            || eta.values().collect::<BTreeSet<_>>().len() != eta.len()
            || eta.values().any(|&u| u >= n)
        {
            return Err(RankSupportError::BadAssignment);
        }
        let orbits = universe_orbits(self.ctx, self.supports, g)?;
        let rows = self.side(g, &orbits, true, eta)?;
        let cols_side = self.side(g, &orbits, false, eta)?;
        let labelling = c.gate(g).labelling();

        let mut m = vec![vec![false; cols_side.entries.len()]; rows.entries.len()];
        for (ri, (i, x)) in rows.entries.iter().enumerate() {
            let row_support = &rows.supports[i];
            for (ci, (j, y)) in cols_side.entries.iter().enumerate() {
                let shift = shift_vector(n, &gate_support, row_support, x, y)?;
                let y_c: Assignment = y.iter().map(|(a, &u)| (shift[a], u)).collect();
                if !compatible(&y_c, eta) || !compatible(x, &y_c) {
                    return Err(RankSupportError::Incompatible);
                }
                let mut partial: BTreeMap<usize, usize> =
                    gate_support.iter().map(|&a| (a, a)).collect();
                partial.extend(shift.iter().map(|(&a, &b)| (a, b)));
                let sigma = complete_permutation(n, &partial);
                let moved = self.ctx.element_action(&sigma, g, *j)?;
                let (UniverseElement::Row(ii), UniverseElement::Col(jj)) = (*i, moved) else {
                    unreachable!("rows and columns keep their sort");
                };
                let h = labelling[(ii - 1) * cols + (jj - 1)];
                let ev = self.ev(h)?;
                let known = combine(&combine(eta, x), &y_c);
                let w: Option<Assignment> = ev
                    .support
                    .iter()
                    .map(|a| known.get(a).map(|&u| (*a, u)))
                    .collect();
                let w = w.ok_or_else(|| RankSupportError::UncoveredSupport(c.id(h).into()))?;
                m[ri][ci] = ev.contains(&w);
            }
        }

        // Quotient by mutual stability, checking the matrix is blockwise
        // constant.
        let mut quotient = vec![vec![None::<bool>; cols_side.classes]; rows.classes];
        let mut constant_on_classes = true;
        for (ri, row) in m.iter().enumerate() {
            for (ci, &v) in row.iter().enumerate() {
                let cell = &mut quotient[rows.class[ri]][cols_side.class[ci]];
                match *cell {
                    None => *cell = Some(v),
                    Some(old) if old != v => constant_on_classes = false,
                    Some(_) => {}
                }
            }
        }
        let quotient: Vec<Vec<bool>> = quotient
            .into_iter()
            .map(|r| r.into_iter().map(|v| v.unwrap()).collect())
            .collect();

        let gamma_inv = gamma_inverse(n, eta, false);
        let values = self.values.values(&gamma_inv);
        let direct: Vec<Vec<bool>> = (0..labelling.len() / cols)
            .map(|i| (0..cols).map(|j| values[labelling[i * cols + j]]).collect())
            .collect();

        let rank_support_matrix = rank_of_bits(&m, p).expect("prime modulus");
        let rank_quotient = rank_of_bits(&quotient, p).expect("prime modulus");
        let rank_direct = rank_of_bits(&direct, p).expect("prime modulus");
        let matches_child_matrix =
            self.check_child_matrix(g, &f, &gamma_inv, &rows, &cols_side, &quotient, &direct)?;
        let ev_sound = self.check_ev_soundness(g, &gamma_inv, eta, &values)?;
        Ok(RankSupportReport {
            gate: c.id(g).to_string(),
            eta: eta
                .iter()
                .map(|(&a, &u)| (a, self.values.a.universe()[u].clone()))
                .collect(),
            rows: rows.entries.len(),
            cols: cols_side.entries.len(),
            row_classes: rows.classes,
            col_classes: cols_side.classes,
            rank_support_matrix,
            rank_quotient,
            rank_direct,
            value_from_supports: rank_support_matrix <= r,
            value_direct: values[g],
            constant_on_classes,
            matches_child_matrix,
            ev_sound,
        })
    }

    /// Permutation fixing the gate support and sending each `a` in the
    /// domain of `x` to `gamma(x(a))`.
    fn realising_permutation(
        &self,
        gate_support: &[usize],
        gamma_inv: &[usize],
        x: &Assignment,
    ) -> Permutation {
        let n = gamma_inv.len();
        let gamma = |u: usize| gamma_inv.iter().position(|&v| v == u).unwrap() + 1;
        let mut partial: BTreeMap<usize, usize> = gate_support.iter().map(|&a| (a, a)).collect();
        partial.extend(x.iter().map(|(&a, &u)| (a, gamma(u))));
        complete_permutation(n, &partial)
    }

    #[allow(clippy::too_many_arguments)]
    fn check_child_matrix(
        &self,
        g: usize,
        f: &StructuredFunction,
        gamma_inv: &[usize],
        rows: &Side,
        cols: &Side,
        quotient: &[Vec<bool>],
        direct: &[Vec<bool>],
    ) -> Result<bool, RankSupportError> {
        let gate_support = self.supports.canonical_support(g).unwrap();
        let StructuredFunction::Rank {
            rows: a, cols: b, ..
        } = *f
        else {
            unreachable!()
        };
        let side_map = |side: &Side, size: usize| -> Result<Option<Vec<usize>>, RankSupportError> {
            let mut image: Vec<Option<usize>> = vec![None; side.classes];
            for (k, (i, x)) in side.entries.iter().enumerate() {
                let pi = self.realising_permutation(gate_support, gamma_inv, x);
                let target = match self.ctx.element_action(&pi, g, *i)? {
                    UniverseElement::Row(t) | UniverseElement::Col(t) | UniverseElement::Pos(t) => {
                        t - 1
                    }
                };
                match image[side.class[k]] {
                    None => image[side.class[k]] = Some(target),
                    Some(t) if t != target => return Ok(None),
                    Some(_) => {}
                }
            }
            let image: Vec<usize> = image.into_iter().map(Option::unwrap).collect();
            let distinct: BTreeSet<usize> = image.iter().copied().collect();
            Ok((distinct.len() == size && image.len() == size).then_some(image))
        };
        let (Some(alpha), Some(beta)) = (side_map(rows, a)?, side_map(cols, b)?) else {
            return Ok(false);
        };
        Ok((0..rows.classes)
            .all(|ri| (0..cols.classes).all(|ci| quotient[ri][ci] == direct[alpha[ri]][beta[ci]])))
    }

    /// For every child `h` and every assignment `z` of its support
    /// compatible with `eta`: `z` is accepting iff the child obtained by
    /// moving `h` with the realising permutation of `z` evaluates to 1.
    fn check_ev_soundness(
        &self,
        g: usize,
        gamma_inv: &[usize],
        eta: &Assignment,
        values: &[bool],
    ) -> Result<bool, RankSupportError> {
        let c = self.circuit();
        let n = c.order();
        let gate_support = self.supports.canonical_support(g).unwrap();
        for h in c.children(g) {
            let ev = self.ev(h)?;
            for z in injective_assignments(&ev.support, n, eta) {
                let pi = self.realising_permutation(gate_support, gamma_inv, &z);
                let map = self.ctx.extend(&pi)?.ok_or(SymmetryError::NoExtension)?;
                if ev.contains(&z) != values[map.image(h)] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// `[rank_p(M) <= r]` for the support matrix of `g` under `eta`.
pub fn rank_gate_from_supports(
    m: &SupportMatrix<'_, '_>,
    g: usize,
    eta: &Assignment,
) -> Result<bool, RankSupportError> {
    m.evaluate(g, eta).map(|r| r.value_from_supports)
}
