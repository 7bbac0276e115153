// SPDX-License-Identifier: Apache-2.0
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use symcirc::corpus::{self, seeded, Gadget, RandomParams, RankTemplate};
use symcirc::eval::decide_invariant_with;
use symcirc::gi::{bipartite_iso, BipartiteGraph, GiKind};
use symcirc::normalize::to_unique_labels;
use symcirc::orbits::gate_orbits_with;
use symcirc::symmetry::SymmetryContext;
use symcirc::{Budget, Exec};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn invariance(c: &mut Criterion) {
    let mut rng = seeded(1);
    let circuit = corpus::random_circuit(
        &mut rng,
        RandomParams {
            order: 3,
            max_gates: 14,
            arity: 1,
            allow_rank: true,
        },
    );
    let mut group = c.benchmark_group("decide_invariant");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| decide_invariant_with(&circuit, Budget::default(), exec).unwrap())
        });
    }
    group.finish();
}

fn orbits(c: &mut Criterion) {
    let circuit = to_unique_labels(&corpus::rank_template(
        RankTemplate::Grid,
        Gadget::Oriented,
        6,
        2,
        3,
    ))
    .unwrap();
    let mut group = c.benchmark_group("gate_orbits");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                // A fresh context each time so memoised extensions are not reused.
                let ctx = SymmetryContext::new(&circuit).unwrap();
                gate_orbits_with(&ctx, exec).unwrap()
            })
        });
    }
    group.finish();
}

fn gi_sweep(c: &mut Criterion) {
    let graphs: Vec<BipartiteGraph> = (0..1u64 << 4)
        .map(|code| BipartiteGraph::from_code(2, 2, code))
        .collect();
    let pairs: Vec<(&BipartiteGraph, &BipartiteGraph)> = graphs
        .iter()
        .flat_map(|g1| graphs.iter().map(move |g2| (g1, g2)))
        .collect();
    let mut group = c.benchmark_group("gi_sweep");
    for kind in [GiKind::Syntactic, GiKind::Symmetry] {
        for (name, exec) in MODES {
            group.bench_with_input(
                BenchmarkId::new(format!("{kind:?}"), name),
                &pairs,
                |b, pairs| {
                    b.iter(|| {
                        exec.map(pairs, |(g1, g2)| {
                            let instance = kind.generate(g1, g2, 1, 2).unwrap();
                            kind.decide(&instance, Budget::default()).unwrap()
                                == bipartite_iso(g1, g2, Budget::default()).unwrap()
                        })
                    })
                },
            );
        }
    }
    group.finish();
}

criterion_group!(benches, invariance, orbits, gi_sweep);
criterion_main!(benches);
