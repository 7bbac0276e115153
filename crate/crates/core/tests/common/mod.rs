// SPDX-License-Identifier: Apache-2.0
//! Seeded circuit corpora shared by the integration and acceptance tests.
#![allow(dead_code)]

use rand::Rng;
use symcirc::circuit::all_tuples;
use symcirc::corpus::{self, seeded, RandomParams};
use symcirc::eval::gate_values;
use symcirc::normalize::to_unique_labels;
use symcirc::{Circuit, EncodedInput, MajorityConvention};

/// Random transparent circuits: orders 1 to 3, at most 14 gates, output
/// arity 0 or 1.
pub fn transparent_corpus(count: usize, seed: u64) -> Vec<Circuit> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|k| {
            let order = 1 + k % 3;
            let arity = usize::from(k % 4 == 3);
            corpus::random_transparent(
                &mut rng,
                RandomParams {
                    order,
                    max_gates: 14,
                    arity,
                    allow_rank: true,
                },
            )
        })
        .collect()
}

/// Random circuits with no transparency filter.
pub fn raw_corpus(count: usize, seed: u64, allow_rank: bool) -> Vec<Circuit> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|k| {
            let order = 1 + k % 3;
            let arity = usize::from(k % 5 == 4);
            corpus::random_circuit(
                &mut rng,
                RandomParams {
                    order,
                    max_gates: 14,
                    arity,
                    allow_rank,
                },
            )
        })
        .collect()
}

/// Symmetric circuits of orders `2..=max_order`, normalised to unique
/// labels.
pub fn symmetric_corpus(
    count: usize,
    seed: u64,
    max_order: usize,
    allow_rank: bool,
) -> Vec<Circuit> {
    let mut rng = seeded(seed);
    (0..count)
        .map(|k| {
            let n = 2 + k % (max_order - 1);
            let layers = rng.gen_range(1..=3);
            let arity = usize::from(k % 3 == 2);
            let c = corpus::random_symmetric(&mut rng, n, layers, arity, allow_rank);
            to_unique_labels(&c).expect("orbit-closed circuits are transparent")
        })
        .collect()
}

/// Output values of `c` on every encoded input, outputs in tuple order.
pub fn output_table(c: &Circuit) -> Vec<Vec<bool>> {
    let slots = EncodedInput::slots(c.vocabulary(), c.order());
    (0..1u64 << slots)
        .map(|bits| {
            let v = gate_values(
                c,
                &EncodedInput::from_bits(c.vocabulary(), c.order(), bits),
                MajorityConvention::default(),
            );
            all_tuples(c.order(), c.arity())
                .map(|t| v[c.outputs()[&t]])
                .collect()
        })
        .collect()
}
