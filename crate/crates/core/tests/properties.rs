// SPDX-License-Identifier: Apache-2.0
mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::Rng;

use symcirc::circuit::remove_redundant;
use symcirc::corpus::{self, seeded, RandomParams};
use symcirc::equivalence::{quotient, syntactic_classes};
use symcirc::eval::gate_values;
use symcirc::io::{parse_circuit, serialize_circuit};
use symcirc::majority::{compile_symmetric, lower_to_majority, SymmetricSpec};
use symcirc::normalize::{has_unique_labels, to_unique_labels};
use symcirc::oracle::brute_symmetric;
use symcirc::partition::{all_partitions, canonical_support};
use symcirc::permutation::Permutation;
use symcirc::symmetry::SymmetryContext;
use symcirc::{Budget, Circuit, EncodedInput, MajorityConvention, Partition};

fn partition(n: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0..n.max(1), n).prop_map(move |labels| {
        let parts = (0..n)
            .map(|l| (1..=n).filter(|&e| labels[e - 1] == l).collect::<Vec<_>>())
            .filter(|p| !p.is_empty())
            .collect();
        Partition::new(n, parts).unwrap()
    })
}

fn two_partitions() -> impl Strategy<Value = (Partition, Partition)> {
    (1usize..=6).prop_flat_map(|n| (partition(n), partition(n)))
}

fn permutation(n: usize) -> impl Strategy<Value = Permutation> {
    Just((1..=n).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::new(v).unwrap())
}

fn transparent(seed: u64) -> Circuit {
    let mut rng = seeded(seed);
    let order = 1 + (seed % 3) as usize;
    corpus::random_transparent(
        &mut rng,
        RandomParams {
            order,
            max_gates: 14,
            arity: usize::from(seed % 4 == 3),
            allow_rank: true,
        },
    )
}

fn symmetric(seed: u64, max_order: usize, allow_rank: bool) -> Circuit {
    let mut rng = seeded(seed);
    let n = rng.gen_range(2..=max_order);
    let layers = rng.gen_range(1..=3);
    let c = corpus::random_symmetric(&mut rng, n, layers, usize::from(seed % 3 == 2), allow_rank);
    to_unique_labels(&c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn join_is_the_least_common_coarsening((p, q) in two_partitions()) {
        let j = p.join(&q).unwrap();
        prop_assert_eq!(&j, &q.join(&p).unwrap());
        prop_assert_eq!(&p.join(&p).unwrap(), &p);
        prop_assert!(p.refines(&j) && q.refines(&j));
        for r in all_partitions(p.ground_size()) {
            if p.refines(&r) && q.refines(&r) {
                prop_assert!(j.refines(&r));
            }
        }
    }

    #[test]
    fn join_is_associative_and_equivariant(
        (p, q, r, sigma) in (1usize..=6).prop_flat_map(|n| (partition(n), partition(n), partition(n), permutation(n)))
    ) {
        let left = p.join(&q).unwrap().join(&r).unwrap();
        prop_assert_eq!(&left, &p.join(&q.join(&r).unwrap()).unwrap());
        let s = sigma.images();
        prop_assert_eq!(p.join(&q).unwrap().permuted(s), p.permuted(s).join(&q.permuted(s)).unwrap());
    }

    #[test]
    fn canonical_support_drops_the_largest_part(p in (1usize..=7).prop_flat_map(partition)) {
        let n = p.ground_size();
        let largest = p.parts().iter().map(Vec::len).max().unwrap();
        let info = canonical_support(&p);
        prop_assert_eq!(info.norm, n - largest);
        match info.canonical_support {
            Some(s) => {
                prop_assert!(2 * (n - largest) < n);
                prop_assert_eq!(s.len(), n - largest);
                // The complement of the support is a single part.
                let rest: Vec<usize> = (1..=n).filter(|e| !s.contains(e)).collect();
                prop_assert!(p.parts().contains(&rest));
            }
            None => prop_assert!(2 * (n - largest) >= n),
        }
    }

    #[test]
    fn quotient_preserves_outputs_and_is_reduced(seed in any::<u64>()) {
        let c = transparent(seed);
        let q = quotient(&c).unwrap();
        prop_assert_eq!(common::output_table(&c), common::output_table(&q));
        prop_assert_eq!(syntactic_classes(&q).unwrap().len(), q.len());
        prop_assert_eq!(serialize_circuit(&quotient(&q).unwrap()), serialize_circuit(&q));
    }

    #[test]
    fn pruning_is_idempotent_and_preserves_outputs(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let c = corpus::random_circuit(&mut rng, RandomParams { order: 2, max_gates: 14, arity: 0, allow_rank: true });
        let r = remove_redundant(&c);
        prop_assert_eq!(common::output_table(&c), common::output_table(&r));
        prop_assert_eq!(serialize_circuit(&remove_redundant(&r)), serialize_circuit(&r));
    }

    #[test]
    fn normalizing_twice_keeps_outputs(seed in any::<u64>()) {
        let c = transparent(seed);
        let u = to_unique_labels(&c).unwrap();
        let uu = to_unique_labels(&u).unwrap();
        prop_assert!(has_unique_labels(&u) && has_unique_labels(&uu));
        prop_assert_eq!(common::output_table(&uu), common::output_table(&c));
    }

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        for c in [transparent(seed), symmetric(seed, 3, true)] {
            let text = serialize_circuit(&c);
            let back = parse_circuit(&text).unwrap();
            prop_assert_eq!(serialize_circuit(&back), text);
            prop_assert_eq!(common::output_table(&back), common::output_table(&c));
        }
    }

    #[test]
    fn extension_is_a_homomorphism(seed in any::<u64>(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
        let c = symmetric(seed, 4, true);
        let n = c.order();
        let perms: Vec<Permutation> = Permutation::all(n).collect();
        let (sigma, tau) = (&perms[a.index(perms.len())], &perms[b.index(perms.len())]);
        let ctx = SymmetryContext::new(&c).unwrap();
        let ext = |p: &Permutation| ctx.extend(p).unwrap().expect("symmetric circuit");
        let (es, et, est) = (ext(sigma), ext(tau), ext(&sigma.compose(tau)));
        let inv = ext(&sigma.inverse());
        for g in 0..c.len() {
            prop_assert_eq!(est.image(g), es.image(et.image(g)));
            prop_assert_eq!(inv.image(es.image(g)), g);
        }
        prop_assert!((0..c.len()).all(|g| ext(&Permutation::identity(n)).image(g) == g));
    }

    #[test]
    fn strict_majority_fragments(bits in prop::collection::vec(any::<bool>(), 1..=8)) {
        let spec = SymmetricSpec::new(bits.clone()).unwrap();
        let n = bits.len() - 1;
        let c = compile_symmetric(&spec, MajorityConvention::Strict);
        let out = c.outputs()[&vec![]];
        for x in 0..1u64 << n {
            let v = gate_values(&c, &EncodedInput::from_bits(c.vocabulary(), n, x), MajorityConvention::Strict);
            prop_assert_eq!(v[out], bits[x.count_ones() as usize]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lowering_preserves_symmetry(seed in any::<u64>()) {
        let c = symmetric(seed, 3, false);
        // Gates in one orbit compute the same function, so they share a table.
        let ctx = SymmetryContext::new(&c).unwrap();
        let maps: Vec<_> = Permutation::all(c.order()).map(|s| ctx.extend(&s).unwrap().unwrap()).collect();
        let mut rng = seeded(!seed);
        let mut by_orbit: BTreeMap<usize, Option<SymmetricSpec>> = BTreeMap::new();
        let mut tables = BTreeMap::new();
        for g in 0..c.len() {
            let Some(f) = c.gate(g).function() else { continue };
            let orbit = maps.iter().map(|m| m.image(g)).min().unwrap();
            let spec = by_orbit.entry(orbit).or_insert_with(|| {
                rng.gen_bool(0.5).then(|| SymmetricSpec::new((0..=f.index_len()).map(|_| rng.gen_bool(0.5)).collect()).unwrap())
            });
            if let Some(spec) = spec {
                tables.insert(c.id(g).to_string(), spec.clone());
            }
        }
        let lowered = lower_to_majority(&c, &tables, MajorityConvention::AtLeastHalf).unwrap();
        prop_assert!(brute_symmetric(&c, Budget::default()).unwrap());
        prop_assert!(brute_symmetric(&lowered, Budget::default()).unwrap());
    }
}
