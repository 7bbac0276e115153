// SPDX-License-Identifier: Apache-2.0
//! Named example circuits and random circuit families used by tests,
//! benchmarks and the command-line tool.

use std::collections::HashMap;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{all_tuples, remove_redundant, Circuit, CircuitBuilder, GateKind, Vocabulary};
use crate::function::StructuredFunction;
use crate::normalize::is_transparent;
use crate::permutation::Permutation;
use crate::structure::RhoStructure;

pub fn relational_id(name: &str, tuple: &[usize]) -> String {
    let items: Vec<String> = tuple.iter().map(ToString::to_string).collect();
    format!("{name}({})", items.join(","))
}

/// Adds every relational gate `R(t)`, `t` in `[n]^k`, to `b`.
pub fn add_all_relational(b: &mut CircuitBuilder) {
    let n = b.order;
    for rel in b.vocabulary.clone().relations() {
        for t in all_tuples(n, rel.arity) {
            b.relational(relational_id(&rel.name, &t), rel.name.clone(), t);
        }
    }
}

/// Order 2, binary `E`: the OR of the four atoms `E(i,j)`.
pub fn c_ex() -> Circuit {
    let mut b = CircuitBuilder::new(2, Vocabulary::new([("E", 2)]), 0);
    add_all_relational(&mut b);
    let atoms: Vec<String> = all_tuples(2, 2).map(|t| relational_id("E", &t)).collect();
    b.internal("out", StructuredFunction::Or(4), atoms);
    b.output(vec![], "out");
    b.build().expect("valid example")
}

/// Order 2, binary `E`: a rank-at-most-1 test over F_2 on the adjacency
/// matrix.
pub fn c_rk() -> Circuit {
    let mut b = CircuitBuilder::new(2, Vocabulary::new([("E", 2)]), 0);
    add_all_relational(&mut b);
    let atoms: Vec<String> = all_tuples(2, 2).map(|t| relational_id("E", &t)).collect();
    b.internal("out", StructuredFunction::rank(1, 2, 2, 2).unwrap(), atoms);
    b.output(vec![], "out");
    b.build().expect("valid example")
}

/// Shape of a random circuit from [`random_circuit`].
#[derive(Clone, Copy, Debug)]
pub struct RandomParams {
    pub order: usize,
    /// Total gate budget, input gates included.
    pub max_gates: usize,
    /// Output arity, 0 or 1.
    pub arity: usize,
    pub allow_rank: bool,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            order: 2,
            max_gates: 14,
            arity: 0,
            allow_rank: true,
        }
    }
}

fn random_vocabulary(rng: &mut impl Rng) -> Vocabulary {
    match rng.gen_range(0..3) {
        0 => Vocabulary::new([("E", 2)]),
        1 => Vocabulary::new([("P", 1)]),
        _ => Vocabulary::new([("P", 1), ("E", 2)]),
    }
}

fn random_function(rng: &mut impl Rng, pool: usize, allow_rank: bool) -> StructuredFunction {
    let m = rng.gen_range(1..=3);
    match rng.gen_range(0..if allow_rank { 5 } else { 4 }) {
        0 => StructuredFunction::And(m),
        1 => StructuredFunction::Or(m),
        2 => StructuredFunction::Nand(m),
        3 => StructuredFunction::Maj(m),
        _ => {
            let (rows, cols) = loop {
                let (a, b) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
                if a * b <= pool {
                    break (a, b);
                }
            };
            let r = rng.gen_range(0..=rows.min(cols));
            StructuredFunction::rank(r, *[2, 3].choose(rng).unwrap(), rows, cols).unwrap()
        }
    }
}

/// A random valid circuit: a random subset of relational gates, maybe
/// constants, then internal gates over earlier gates. Not necessarily
/// transparent or symmetric.
pub fn random_circuit(rng: &mut impl Rng, params: RandomParams) -> Circuit {
    let n = params.order;
    let vocab = random_vocabulary(rng);
    let mut b = CircuitBuilder::new(n, vocab.clone(), params.arity);
    let mut atoms: Vec<(String, String, Vec<usize>)> = Vec::new();
    for rel in vocab.relations() {
        for t in all_tuples(n, rel.arity) {
            atoms.push((relational_id(&rel.name, &t), rel.name.clone(), t));
        }
    }
    atoms.shuffle(rng);
    let outputs = if params.arity == 0 { 1 } else { n };
    let max_inputs = (params.max_gates.saturating_sub(outputs + 1)).clamp(1, 6);
    let take = rng.gen_range(1..=atoms.len().min(max_inputs));
    let mut pool: Vec<String> = Vec::new();
    for (id, rel, t) in atoms.into_iter().take(take) {
        b.relational(id.clone(), rel, t);
        pool.push(id);
    }
    if rng.gen_bool(0.3) && pool.len() + outputs < params.max_gates {
        let v = rng.gen_bool(0.5);
        let id = if v { "one" } else { "zero" };
        b.constant(id, v);
        pool.push(id.into());
    }
    let room = params.max_gates - pool.len();
    let internal = rng.gen_range(outputs..=room.max(outputs));
    let mut made = Vec::new();
    for k in 0..internal {
        let f = random_function(rng, pool.len(), params.allow_rank);
        let labelling: Vec<String> = if f.is_symmetric() {
            (0..f.index_len())
                .map(|_| pool.choose(rng).unwrap().clone())
                .collect()
        } else {
            pool.choose_multiple(rng, f.index_len()).cloned().collect()
        };
        let id = format!("g{k:02}");
        b.internal(id.clone(), f, labelling);
        pool.push(id.clone());
        made.push(id);
    }
    let out = &made[made.len() - outputs..];
    if params.arity == 0 {
        b.output(vec![], out[0].clone());
    } else {
        for (i, id) in out.iter().enumerate() {
            b.output(vec![i + 1], id.clone());
        }
    }
    b.build().expect("generator produces valid circuits")
}

/// A random transparent circuit; retries [`random_circuit`] until the result
/// is transparent.
pub fn random_transparent(rng: &mut impl Rng, params: RandomParams) -> Circuit {
    loop {
        let c = random_circuit(rng, params);
        if is_transparent(&c).transparent {
            return c;
        }
    }
}

/// Smallest labelling related to `labelling` by a row and column
/// permutation, so that syntactically equal rank gates share a key.
fn matrix_key(rows: usize, cols: usize, labelling: &[usize]) -> Vec<usize> {
    let mut best: Option<Vec<usize>> = None;
    for fr in (0..rows).permutations(rows) {
        for fc in (0..cols).permutations(cols) {
            let v: Vec<usize> = (0..rows)
                .flat_map(|i| (0..cols).map(move |j| (i, j)))
                .map(|(i, j)| labelling[fr[i] * cols + fc[j]])
                .collect();
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    best.unwrap()
}

fn gate_key(f: StructuredFunction, labelling: &[usize]) -> (StructuredFunction, Vec<usize>) {
    match f {
        StructuredFunction::Rank { rows, cols, .. } => (f, matrix_key(rows, cols, labelling)),
        _ => (f, labelling.iter().copied().sorted().collect()),
    }
}

/// Builds circuits closed under `Sym(n)` one orbit at a time.
struct OrbitBuilder {
    n: usize,
    vocab: Vocabulary,
    perms: Vec<Permutation>,
    /// `(id, kind)` per gate, children given by gate index.
    gates: Vec<(String, GateKind)>,
    keys: HashMap<(StructuredFunction, Vec<usize>), usize>,
    /// `action[s][g]` is the image of gate `g` under `perms[s]`.
    action: Vec<Vec<usize>>,
}

impl OrbitBuilder {
    fn new(n: usize, vocab: Vocabulary) -> Self {
        let perms: Vec<Permutation> = Permutation::all(n).collect();
        let mut ob = OrbitBuilder {
            n,
            vocab: vocab.clone(),
            action: vec![Vec::new(); perms.len()],
            perms,
            gates: Vec::new(),
            keys: HashMap::new(),
        };
        let mut index: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        for (r, rel) in vocab.relations().iter().enumerate() {
            for t in all_tuples(n, rel.arity) {
                index.insert((r, t.clone()), ob.gates.len());
                ob.gates.push((
                    relational_id(&rel.name, &t),
                    GateKind::Relational {
                        relation: r,
                        tuple: t,
                    },
                ));
            }
        }
        for (s, sigma) in ob.perms.iter().enumerate() {
            ob.action[s] = ob
                .gates
                .iter()
                .map(|(_, k)| match k {
                    GateKind::Relational { relation, tuple } => {
                        index[&(*relation, sigma.apply_tuple(tuple))]
                    }
                    _ => unreachable!(),
                })
                .collect();
        }
        ob
    }

    fn image_key(
        &self,
        s: usize,
        f: StructuredFunction,
        labelling: &[usize],
    ) -> (StructuredFunction, Vec<usize>) {
        let moved: Vec<usize> = labelling.iter().map(|&h| self.action[s][h]).collect();
        gate_key(f, &moved)
    }

    /// Adds the orbit of `f(labelling)`; returns the index of `f(labelling)`.
    fn add_orbit(&mut self, f: StructuredFunction, labelling: Vec<usize>) -> usize {
        if let Some(&g) = self.keys.get(&gate_key(f, &labelling)) {
            return g;
        }
        let first = self.gates.len();
        for s in 0..self.perms.len() {
            let key = self.image_key(s, f, &labelling);
            if !self.keys.contains_key(&key) {
                let moved: Vec<usize> = labelling.iter().map(|&h| self.action[s][h]).collect();
                self.keys.insert(key, self.gates.len());
                self.gates.push((
                    format!("g{:03}", self.gates.len()),
                    GateKind::Internal {
                        function: f,
                        children: moved,
                    },
                ));
            }
        }
        for s in 0..self.perms.len() {
            for g in first..self.gates.len() {
                let GateKind::Internal { function, children } = &self.gates[g].1 else {
                    unreachable!()
                };
                let key = self.image_key(s, *function, children);
                let image = self.keys[&key];
                self.action[s].push(image);
            }
        }
        first
    }

    fn orbit(&self, g: usize) -> Vec<usize> {
        self.action.iter().map(|a| a[g]).sorted().dedup().collect()
    }

    /// Gates fixed by every permutation fixing 1 whose orbit has size `n`.
    fn pointed(&self, g: usize) -> bool {
        self.orbit(g).len() == self.n
            && self
                .perms
                .iter()
                .zip(&self.action)
                .all(|(s, a)| s.apply(1) != 1 || a[g] == g)
    }

    /// Outputs `i -> (1 i) g` for a pointed gate `g`.
    fn finish_pointed(self, g: usize) -> Circuit {
        let outputs = (1..=self.n)
            .map(|i| {
                let t = Permutation::transposition(self.n, 1, i);
                let s = self.perms.iter().position(|s| *s == t).unwrap();
                (vec![i], self.action[s][g])
            })
            .collect();
        self.finish(outputs)
    }

    fn finish(self, outputs: Vec<(Vec<usize>, usize)>) -> Circuit {
        let mut b = CircuitBuilder::new(self.n, self.vocab.clone(), outputs[0].0.len());
        for (id, kind) in &self.gates {
            match kind {
                GateKind::Relational { relation, tuple } => {
                    b.relational(
                        id.clone(),
                        self.vocab.relation(*relation).name.clone(),
                        tuple.clone(),
                    );
                }
                GateKind::Internal { function, children } => {
                    b.internal(
                        id.clone(),
                        *function,
                        children.iter().map(|&h| self.gates[h].0.clone()),
                    );
                }
                GateKind::Constant(v) => {
                    b.constant(id.clone(), *v);
                }
            }
        }
        for (t, g) in outputs {
            b.output(t, self.gates[g].0.clone());
        }
        remove_redundant(&b.build().expect("orbit closure is a valid circuit"))
    }
}

/// A random symmetric circuit of order `n` (at most 4 keeps it small): a few
/// layers of orbit-closed gates over the relational gates, then an output
/// layer invariant under `Sym(n)` (arity 0) or pointed at each element
/// (arity 1).
pub fn random_symmetric(
    rng: &mut impl Rng,
    n: usize,
    layers: usize,
    arity: usize,
    allow_rank: bool,
) -> Circuit {
    let vocab = random_vocabulary(rng);
    let mut ob = OrbitBuilder::new(n, vocab);
    let mut last = 0;
    for _ in 0..layers {
        let pool = ob.gates.len();
        let f = random_function(rng, pool, allow_rank);
        let children: Vec<usize> = (0..pool)
            .collect::<Vec<_>>()
            .choose_multiple(rng, f.index_len().min(pool))
            .copied()
            .collect();
        let f = f.with_fan_in(children.len());
        last = ob.add_orbit(f, children);
        if ob.gates.len() > 80 {
            break;
        }
    }
    if arity == 0 {
        let orbit = ob.orbit(last);
        let f = [
            StructuredFunction::Or(orbit.len()),
            StructuredFunction::And(orbit.len()),
            StructuredFunction::Maj(orbit.len()),
        ][rng.gen_range(0..3)];
        let out = ob.add_orbit(f, orbit);
        return ob.finish(vec![(vec![], out)]);
    }
    for _ in 0..64 {
        let h = rng.gen_range(0..ob.gates.len());
        let fixing_one: Vec<usize> = ob
            .perms
            .iter()
            .zip(&ob.action)
            .filter(|(s, _)| s.apply(1) == 1)
            .map(|(_, a)| a[h])
            .sorted()
            .dedup()
            .collect();
        let g = ob.add_orbit(StructuredFunction::Or(fixing_one.len()), fixing_one);
        if ob.pointed(g) {
            return ob.finish_pointed(g);
        }
    }
    // Relational gates `P(1)` or `E(1,1)` are always pointed.
    let g = (0..ob.gates.len())
        .find(|&g| ob.pointed(g))
        .expect("some diagonal relational gate is pointed");
    ob.finish_pointed(g)
}

/// Shapes of rank gates used to exercise evaluation from supports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RankTemplate {
    /// One rank gate over the `n x n` grid of children indexed by pairs.
    Grid,
    /// One rank gate over the `n x 2` grid of two unary relations.
    Colours,
    /// One rank gate per element `v`, over rows `u != v` and two columns,
    /// combined by a symmetric output gate.
    Pivot,
}

/// How a child of a templated rank gate is built from relational gates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gadget {
    /// The relational gate itself.
    Plain,
    /// AND with a unary relation on the column element.
    Guarded,
    /// `E(i,j)` and not `E(j,i)`.
    Oriented,
}

pub fn rank_template(
    template: RankTemplate,
    gadget: Gadget,
    n: usize,
    r: usize,
    p: u64,
) -> Circuit {
    let vocab = match (template, gadget) {
        (RankTemplate::Colours, _) => Vocabulary::new([("P", 1), ("Q", 1)]),
        (_, Gadget::Guarded) => Vocabulary::new([("P", 1), ("E", 2)]),
        _ => Vocabulary::new([("E", 2)]),
    };
    let mut b = CircuitBuilder::new(n, vocab, 0);
    add_all_relational(&mut b);
    // Child standing for the pair `(i, j)`.
    let pair = |b: &mut CircuitBuilder, i: usize, j: usize| -> String {
        let e = relational_id("E", &[i, j]);
        match gadget {
            Gadget::Plain => e,
            Gadget::Guarded => {
                let id = format!("guard({i},{j})");
                if b.contains(&id) {
                    return id;
                }
                b.internal(
                    id.clone(),
                    StructuredFunction::And(2),
                    [e, relational_id("P", &[j])],
                );
                id
            }
            Gadget::Oriented => {
                let not = format!("not({j},{i})");
                let id = format!("orient({i},{j})");
                if b.contains(&id) {
                    return id;
                }
                if !b.contains(&not) {
                    b.internal(
                        not.clone(),
                        StructuredFunction::Nand(1),
                        [relational_id("E", &[j, i])],
                    );
                }
                b.internal(id.clone(), StructuredFunction::And(2), [e, not]);
                id
            }
        }
    };
    match template {
        RankTemplate::Grid => {
            let mut labelling = Vec::new();
            for i in 1..=n {
                for j in 1..=n {
                    labelling.push(pair(&mut b, i, j));
                }
            }
            b.internal(
                "rank",
                StructuredFunction::rank(r.min(n), p, n, n).unwrap(),
                labelling,
            );
            b.output(vec![], "rank");
        }
        RankTemplate::Colours => {
            let mut labelling = Vec::new();
            for i in 1..=n {
                let (pi, qi) = (relational_id("P", &[i]), relational_id("Q", &[i]));
                match gadget {
                    Gadget::Plain => labelling.extend([pi, qi]),
                    _ => {
                        let both = format!("both({i})");
                        let either = format!("either({i})");
                        b.internal(
                            both.clone(),
                            StructuredFunction::And(2),
                            [pi.clone(), qi.clone()],
                        );
                        b.internal(either.clone(), StructuredFunction::Or(2), [pi, qi]);
                        labelling.extend([both, either]);
                    }
                }
            }
            b.internal(
                "rank",
                StructuredFunction::rank(r.min(2), p, n, 2).unwrap(),
                labelling,
            );
            b.output(vec![], "rank");
        }
        RankTemplate::Pivot => {
            let mut ranks = Vec::new();
            for v in 1..=n {
                let mut labelling = Vec::new();
                for u in (1..=n).filter(|&u| u != v) {
                    labelling.push(pair(&mut b, v, u));
                    labelling.push(pair(&mut b, u, v));
                }
                let id = format!("rank{v}");
                b.internal(
                    id.clone(),
                    StructuredFunction::rank(r.min(2), p, n - 1, 2).unwrap(),
                    labelling,
                );
                ranks.push(id);
            }
            let f = if r.is_multiple_of(2) {
                StructuredFunction::Or(n)
            } else {
                StructuredFunction::Maj(n)
            };
            b.internal("out", f, ranks);
            b.output(vec![], "out");
        }
    }
    b.build().expect("valid template")
}

/// Every template, gadget and size combination used by the rank-support
/// sweep: orders 4 to 6, (r, p) in {(1, 2), (1, 3), (2, 3)}.
pub fn rank_templates() -> Vec<(String, Circuit)> {
    let mut out = Vec::new();
    for template in [
        RankTemplate::Grid,
        RankTemplate::Colours,
        RankTemplate::Pivot,
    ] {
        let gadgets: &[Gadget] = match template {
            RankTemplate::Colours => &[Gadget::Plain, Gadget::Guarded],
            _ => &[Gadget::Plain, Gadget::Guarded, Gadget::Oriented],
        };
        for &gadget in gadgets {
            for n in 4..=6 {
                for (r, p) in [(1, 2), (1, 3), (2, 3)] {
                    let name = format!("{template:?}-{gadget:?}-n{n}-r{r}-p{p}");
                    out.push((name, rank_template(template, gadget, n, r, p)));
                }
            }
        }
    }
    out
}

/// A random structure on `n` elements over `vocab`, each tuple present with
/// probability one half.
pub fn random_structure(rng: &mut impl Rng, vocab: &Vocabulary, n: usize) -> RhoStructure {
    let mut a = RhoStructure::with_size(n);
    for rel in vocab.relations() {
        a.declare(&rel.name);
        for t in all_tuples(n, rel.arity) {
            if rng.gen_bool(0.5) {
                a.insert(&rel.name, t.iter().map(|x| x - 1).collect());
            }
        }
    }
    a
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
