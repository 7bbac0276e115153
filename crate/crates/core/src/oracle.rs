// SPDX-License-Identifier: Apache-2.0
//! Exhaustive reference procedures.
//!
//! Nothing here relies on transparency or unique labels: automorphisms are
//! found by backtracking search, equivalence by trying every index
//! automorphism, supports by enumerating partitions. They are slow and meant
//! for small circuits, as independent checks of the fast procedures.

use std::collections::HashMap;

use itertools::Itertools;

use crate::circuit::{all_tuples, Circuit, GateKind};
use crate::equivalence::GateClasses;
use crate::eval::gate_values;
use crate::function::{MajorityConvention, StructuredFunction};
use crate::par::{Budget, Exec};
use crate::partition::{all_partitions, Partition};
use crate::permutation::Permutation;
use crate::structure::EncodedInput;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("exhaustive search exceeded the budget of {0}")]
    TooLarge(u64),
    #[error("{0} does not extend to an automorphism")]
    NotSymmetric(Permutation),
    #[error("{0} extends to more than one automorphism")]
    NotUnique(Permutation),
    #[error("no coarsest supporting partition exists")]
    NoCoarsest,
}

/// Does some index automorphism of `f` carry `a` onto `b`, i.e. is there
/// `lambda` with `a[x] == b[lambda(x)]` for all positions `x`?
pub fn related_by_index_automorphism(f: &StructuredFunction, a: &[usize], b: &[usize]) -> bool {
    match *f {
        StructuredFunction::Rank { rows, cols, .. } => (0..rows).permutations(rows).any(|fr| {
            (0..cols).permutations(cols).any(|fc| {
                (0..rows).all(|i| (0..cols).all(|j| a[i * cols + j] == b[fr[i] * cols + fc[j]]))
            })
        }),
        _ => a.iter().copied().sorted().eq(b.iter().copied().sorted()),
    }
}

struct Search<'a> {
    c: &'a Circuit,
    sigma: &'a Permutation,
    order: &'a [usize],
    lookup: HashMap<(StructuredFunction, Vec<usize>), Vec<usize>>,
    images: Vec<usize>,
    used: Vec<bool>,
    found: Vec<Vec<usize>>,
    limit: usize,
    nodes: u64,
    budget: Budget,
}

impl Search<'_> {
    fn candidates(&self, h: usize) -> Vec<usize> {
        match &self.c.gate(h).kind {
            GateKind::Constant(_) => vec![h],
            GateKind::Relational { relation, tuple } => self
                .c
                .relational_gate(*relation, &self.sigma.apply_tuple(tuple))
                .into_iter()
                .collect(),
            GateKind::Internal { function, children } => {
                let key: Vec<usize> = children.iter().map(|&x| self.images[x]).sorted().collect();
                self.lookup
                    .get(&(*function, key))
                    .cloned()
                    .unwrap_or_default()
            }
        }
    }

    fn fits(&self, h: usize, t: usize) -> bool {
        let outputs_ok = match self.c.output_tuple(h) {
            None => !self.c.is_output(t),
            Some(x) => self.c.outputs().get(&self.sigma.apply_tuple(x)) == Some(&t),
        };
        if !outputs_ok {
            return false;
        }
        match &self.c.gate(h).kind {
            GateKind::Internal { function, children } if !function.is_symmetric() => {
                let mapped: Vec<usize> = children.iter().map(|&x| self.images[x]).collect();
                related_by_index_automorphism(function, &mapped, self.c.gate(t).labelling())
            }
            _ => true,
        }
    }

    fn run(&mut self, k: usize) -> Result<(), OracleError> {
        if self.found.len() >= self.limit {
            return Ok(());
        }
        if k == self.order.len() {
            self.found.push(self.images.clone());
            return Ok(());
        }
        let h = self.order[k];
        for t in self.candidates(h) {
            self.nodes += 1;
            if !self.budget.allows(self.nodes as u128) {
                return Err(OracleError::TooLarge(self.budget.0));
            }
            if self.used[t] || !self.fits(h, t) {
                continue;
            }
            self.used[t] = true;
            self.images[h] = t;
            self.run(k + 1)?;
            self.used[t] = false;
            self.images[h] = usize::MAX;
        }
        Ok(())
    }
}

/// Up to `limit` automorphisms of `c` extending `sigma`, as gate images.
pub fn brute_automorphisms(
    c: &Circuit,
    sigma: &Permutation,
    limit: usize,
    budget: Budget,
) -> Result<Vec<Vec<usize>>, OracleError> {
    let mut lookup: HashMap<(StructuredFunction, Vec<usize>), Vec<usize>> = HashMap::new();
    for g in 0..c.len() {
        if let GateKind::Internal { function, children } = &c.gate(g).kind {
            lookup
                .entry((*function, children.iter().copied().sorted().collect()))
                .or_default()
                .push(g);
        }
    }
    let mut search = Search {
        c,
        sigma,
        order: c.topological_order(),
        lookup,
        images: vec![usize::MAX; c.len()],
        used: vec![false; c.len()],
        found: Vec::new(),
        limit,
        nodes: 0,
        budget,
    };
    search.run(0)?;
    Ok(search.found)
}

/// Symmetric iff every permutation of `[n]` extends (all of `Sym(n)` for
/// `n <= 5`, adjacent transpositions beyond that).
pub fn brute_symmetric(c: &Circuit, budget: Budget) -> Result<bool, OracleError> {
    let n = c.order();
    let perms: Vec<Permutation> = if n <= 5 {
        Permutation::all(n).collect()
    } else {
        (1..n)
            .map(|k| Permutation::transposition(n, k, k + 1))
            .collect()
    };
    for sigma in perms {
        if brute_automorphisms(c, &sigma, 1, budget)?.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The automorphism of every permutation of `[n]`, for circuits where each
/// extension exists and is unique.
pub struct AutomorphismTable {
    pub perms: Vec<Permutation>,
    pub images: Vec<Vec<usize>>,
}

impl AutomorphismTable {
    pub fn new(c: &Circuit, budget: Budget) -> Result<Self, OracleError> {
        let perms: Vec<Permutation> = Permutation::all(c.order()).collect();
        let mut images = Vec::with_capacity(perms.len());
        for sigma in &perms {
            let mut found = brute_automorphisms(c, sigma, 2, budget)?;
            match found.len() {
                0 => return Err(OracleError::NotSymmetric(sigma.clone())),
                1 => images.push(found.pop().unwrap()),
                _ => return Err(OracleError::NotUnique(sigma.clone())),
            }
        }
        Ok(AutomorphismTable { perms, images })
    }

    pub fn image(&self, sigma: &Permutation, g: usize) -> usize {
        let k = self
            .perms
            .iter()
            .position(|p| p == sigma)
            .expect("permutation of the right degree");
        self.images[k][g]
    }
}

/// Coarsest partition of `[n]`, with the elements of `fixed` as singletons,
/// whose stabiliser consists of permutations satisfying `fixes`.
pub fn brute_coarsest_partition(
    n: usize,
    fixed: &[usize],
    fixes: impl Fn(&Permutation) -> bool,
) -> Result<Partition, OracleError> {
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    let fixed_perm: Vec<bool> = perms.iter().map(&fixes).collect();
    let supporting: Vec<Partition> = all_partitions(n)
        .into_iter()
        .filter(|p| fixed.iter().all(|e| p.part_of(*e).len() == 1))
        .filter(|p| {
            perms
                .iter()
                .zip(&fixed_perm)
                .all(|(s, &ok)| ok || !p.is_stabilised_by(s.images()))
        })
        .collect();
    supporting
        .iter()
        .find(|p| supporting.iter().all(|q| q.refines(p)))
        .cloned()
        .ok_or(OracleError::NoCoarsest)
}

/// Syntactic equivalence by definition, trying every index automorphism.
/// Works for any circuit.
pub fn brute_classes(c: &Circuit) -> GateClasses {
    let max_depth = (0..c.len()).map(|g| c.depth(g)).max().unwrap_or(0);
    let mut label: Vec<usize> = (0..c.len()).collect();
    for d in 0..=max_depth {
        let mut reps: Vec<usize> = Vec::new();
        for g in (0..c.len()).filter(|&g| c.depth(g) == d) {
            let GateKind::Internal { function, children } = &c.gate(g).kind else {
                continue;
            };
            if c.is_output(g) {
                continue;
            }
            let mine: Vec<usize> = children.iter().map(|&h| label[h]).collect();
            let hit = reps.iter().copied().find(|&r| {
                c.gate(r).function() == Some(*function) && {
                    let theirs: Vec<usize> =
                        c.gate(r).labelling().iter().map(|&h| label[h]).collect();
                    related_by_index_automorphism(function, &mine, &theirs)
                }
            });
            match hit {
                Some(r) => label[g] = r,
                None => reps.push(g),
            }
        }
    }
    GateClasses::from_labels(&label)
}

/// Output values (in `[n]^q` order) on every input, indexed by input bits.
pub fn truth_table(
    c: &Circuit,
    convention: MajorityConvention,
    budget: Budget,
) -> Result<Vec<Vec<bool>>, OracleError> {
    let slots = EncodedInput::slots(c.vocabulary(), c.order());
    if slots >= 63 || !budget.allows(1u128 << slots) {
        return Err(OracleError::TooLarge(budget.0));
    }
    let outputs: Vec<usize> = c.outputs().values().copied().collect();
    Ok(Exec::default().map_range(0..1u64 << slots, |bits| {
        let v = gate_values(
            c,
            &EncodedInput::from_bits(c.vocabulary(), c.order(), bits),
            convention,
        );
        outputs.iter().map(|&g| v[g]).collect()
    }))
}

/// Invariance checked on encoded inputs: for every input `f`, permutation
/// `sigma` and output tuple `x`, the output at `sigma x` on `f o sigma^-1`
/// equals the output at `x` on `f`.
pub fn direct_invariance(c: &Circuit, budget: Budget) -> Result<bool, OracleError> {
    let n = c.order();
    let slots = EncodedInput::slots(c.vocabulary(), n);
    let perms: Vec<Permutation> = Permutation::all(n).collect();
    if slots >= 63 || !budget.allows((1u128 << slots) * perms.len() as u128) {
        return Err(OracleError::TooLarge(budget.0));
    }
    let tuples: Vec<Vec<usize>> = all_tuples(n, c.arity()).collect();
    let conv = MajorityConvention::default();
    let bad = Exec::default().find_map_first(0..1u64 << slots, |bits| {
        let f = EncodedInput::from_bits(c.vocabulary(), n, bits);
        let v = gate_values(c, &f, conv);
        perms.iter().find_map(|sigma| {
            let w = gate_values(c, &f.permuted(c.vocabulary(), sigma.images()), conv);
            tuples
                .iter()
                .any(|x| v[c.outputs()[x]] != w[c.outputs()[&sigma.apply_tuple(x)]])
                .then_some(())
        })
    });
    Ok(bad.is_none())
}
