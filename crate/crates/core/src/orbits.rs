// SPDX-License-Identifier: Apache-2.0
//! Orbits and coarsest supporting partitions, computed from transpositions.
//!
//! For a group generated by transpositions, the coarsest partition whose
//! pointwise stabiliser fixes `x` joins `u` and `v` exactly when the
//! transposition `(u v)` fixes `x`. Orbits under the stabiliser of a set `S`
//! are closures under the transpositions of `[n] \ S`.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

use crate::circuit::Circuit;
use crate::function::UniverseElement;
use crate::par::{Budget, Exec};
use crate::partition::{canonical_support, Partition, SupportInfo, UnionFind};
use crate::permutation::Permutation;
use crate::symmetry::{apply_to_element, GateMap, SymmetryContext, SymmetryError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("the action of ({0} {1}) is undefined here")]
pub struct ActionUndefined(pub usize, pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitAndSupport<X> {
    /// Sorted orbit under the pointwise stabiliser of the fixed set.
    pub orbit: Vec<X>,
    /// Elements of the fixed set are singletons; `u`, `v` share a part when
    /// `(u v)` fixes `x` (and the closure of that).
    pub partition: Partition,
}

/// Orbit of `x` and its coarsest supporting partition, for an action given
/// on the transpositions `(u v)` of `[n] \ fixed`.
pub fn orbit_and_sp<X, F>(
    n: usize,
    fixed: &[usize],
    x: &X,
    action: F,
) -> Result<OrbitAndSupport<X>, ActionUndefined>
where
    X: Clone + Ord,
    F: Fn(usize, usize, &X) -> Option<X>,
{
    let transpositions = Permutation::transpositions(n, fixed);
    let act = |u: usize, v: usize, y: &X| action(u, v, y).ok_or(ActionUndefined(u, v));
    let mut uf = UnionFind::new(n);
    for &(u, v) in &transpositions {
        if act(u, v, x)? == *x {
            uf.union(u - 1, v - 1);
        }
    }
    let mut seen: BTreeSet<X> = BTreeSet::new();
    let mut queue = VecDeque::new();
    seen.insert(x.clone());
    queue.push_back(x.clone());
    while let Some(y) = queue.pop_front() {
        for &(u, v) in &transpositions {
            let z = act(u, v, &y)?;
            if seen.insert(z.clone()) {
                queue.push_back(z);
            }
        }
    }
    Ok(OrbitAndSupport {
        orbit: seen.into_iter().collect(),
        partition: Partition::from_union_find(n, &mut uf),
    })
}

/// Per-gate orbits and supports of a symmetric unique-label circuit.
#[derive(Clone, Debug)]
pub struct GateSupports {
    pub orbits: Vec<Vec<usize>>,
    pub supports: Vec<SupportInfo>,
}

impl GateSupports {
    pub fn support(&self, g: usize) -> &SupportInfo {
        &self.supports[g]
    }

    pub fn canonical_support(&self, g: usize) -> Option<&[usize]> {
        self.supports[g].canonical_support.as_deref()
    }

    pub fn to_report(&self, c: &Circuit) -> Vec<GateSupportReport> {
        (0..c.len())
            .map(|g| GateSupportReport {
                gate: c.id(g).to_string(),
                orbit: c.ids(self.orbits[g].iter().copied()),
                partition: self.supports[g].partition.to_string(),
                norm: self.supports[g].norm,
                canonical_support: self.supports[g].canonical_support.clone(),
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GateSupportReport {
    pub gate: String,
    pub orbit: Vec<String>,
    pub partition: String,
    pub norm: usize,
    pub canonical_support: Option<Vec<usize>>,
}

pub type TranspositionMaps = Vec<((usize, usize), Arc<GateMap>)>;

/// Automorphisms extending every transposition, indexed like
/// [`Permutation::transpositions`] with nothing fixed.
pub fn transposition_maps(ctx: &SymmetryContext<'_>) -> Result<TranspositionMaps, SymmetryError> {
    let n = ctx.circuit().order();
    Permutation::transpositions(n, &[])
        .into_iter()
        .map(|(u, v)| {
            let sigma = Permutation::transposition(n, u, v);
            match ctx.extend(&sigma)? {
                Some(map) => Ok(((u, v), map)),
                None => Err(SymmetryError::NotSymmetric(sigma)),
            }
        })
        .collect()
}

pub fn gate_orbits(ctx: &SymmetryContext<'_>) -> Result<GateSupports, SymmetryError> {
    gate_orbits_with(ctx, Exec::default())
}

pub fn gate_orbits_with(
    ctx: &SymmetryContext<'_>,
    exec: Exec,
) -> Result<GateSupports, SymmetryError> {
    let c = ctx.circuit();
    let n = c.order();
    let maps = transposition_maps(ctx)?;
    let lookup = |u: usize, v: usize| {
        &maps
            .iter()
            .find(|((a, b), _)| (*a, *b) == (u, v))
            .unwrap()
            .1
    };
    let gates: Vec<usize> = (0..c.len()).collect();
    let per_gate = exec.map(&gates, |&g| {
        orbit_and_sp(n, &[], &g, |u, v, &h| Some(lookup(u, v).image(h)))
            .expect("gate action is total")
    });
    let (orbits, supports) = per_gate
        .into_iter()
        .map(|o| (o.orbit, canonical_support(&o.partition)))
        .unzip();
    Ok(GateSupports { orbits, supports })
}

/// Orbits of the universe elements of gate `g` under the pointwise
/// stabiliser of its canonical support, with their supporting partitions.
pub fn universe_orbits(
    ctx: &SymmetryContext<'_>,
    supports: &GateSupports,
    g: usize,
) -> Result<Vec<(UniverseElement, OrbitAndSupport<UniverseElement>)>, SymmetryError> {
    let c = ctx.circuit();
    let n = c.order();
    let f = c
        .gate(g)
        .function()
        .ok_or_else(|| SymmetryError::InputGate(c.id(g).into()))?;
    let fixed = supports
        .canonical_support(g)
        .ok_or_else(|| SymmetryError::NoSmallSupport(c.id(g).into()))?;
    let mut maps = Vec::new();
    for (u, v) in Permutation::transpositions(n, fixed) {
        let sigma = Permutation::transposition(n, u, v);
        maps.push((
            (u, v),
            ctx.extend(&sigma)?
                .ok_or(SymmetryError::NotSymmetric(sigma))?,
        ));
    }
    let lookup = |u: usize, v: usize| {
        &maps
            .iter()
            .find(|((a, b), _)| (*a, *b) == (u, v))
            .unwrap()
            .1
    };
    f.universe()
        .into_iter()
        .map(|a| {
            let res = orbit_and_sp(n, fixed, &a, |u, v, &b| {
                apply_to_element(c, lookup(u, v), g, b).ok()
            });
            res.map(|o| (a, o))
                .map_err(|_| SymmetryError::NotStabilized(c.id(g).into()))
        })
        .collect()
}

/// Decides symmetry. Unique-label circuits use permutation extension;
/// anything else falls back to exhaustive automorphism search, bounded by
/// `budget` (counted in search nodes).
pub fn decide_symmetric(c: &Circuit, budget: Budget) -> Result<bool, crate::oracle::OracleError> {
    match SymmetryContext::new(c) {
        Ok(ctx) => Ok(transposition_maps(&ctx).is_ok()),
        Err(_) => {
            let n = c.order();
            for k in 1..n {
                let sigma = Permutation::transposition(n, k, k + 1);
                if crate::oracle::brute_automorphisms(c, &sigma, 1, budget)?.is_empty() {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}
