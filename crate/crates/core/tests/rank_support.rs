// SPDX-License-Identifier: Apache-2.0
use symcirc::corpus::{
    random_structure, rank_template, rank_templates, seeded, Gadget, RankTemplate,
};
use symcirc::normalize::to_unique_labels;
use symcirc::orbits::gate_orbits;
use symcirc::rank_support::{
    injective_assignments, rank_gate_from_supports, Assignment, RankSupportError, SupportMatrix,
};
use symcirc::symmetry::SymmetryContext;
use symcirc::{Circuit, RhoStructure, StructuredFunction};

/// Rank over GF(2) by elimination on row bitmasks.
fn gf2_rank(rows: Vec<u64>) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for mut r in rows {
        for &b in &basis {
            r = r.min(r ^ b);
        }
        if r != 0 {
            basis.push(r);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

fn rank_gates(c: &Circuit) -> impl Iterator<Item = usize> + '_ {
    (0..c.len()).filter(|&g| matches!(c.gate(g).function(), Some(StructuredFunction::Rank { .. })))
}

#[test]
fn grid_rank_is_adjacency_rank() {
    let n = 5;
    let c = to_unique_labels(&rank_template(RankTemplate::Grid, Gadget::Plain, n, 1, 2)).unwrap();
    let ctx = SymmetryContext::new(&c).unwrap();
    let supports = gate_orbits(&ctx).unwrap();
    let g = c.index_of("rank").unwrap();
    let mut rng = seeded(11);
    for _ in 0..6 {
        let a = random_structure(&mut rng, c.vocabulary(), n);
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter(|&j| a.holds("E", &[i, j]))
                    .map(|j| 1u64 << j)
                    .sum()
            })
            .collect();
        let expect = gf2_rank(rows);
        let m = SupportMatrix::new(&ctx, &supports, &a);
        for eta in injective_assignments(
            supports.canonical_support(g).unwrap(),
            n,
            &Assignment::new(),
        ) {
            let report = m.evaluate(g, &eta).unwrap();
            assert!(report.agreement(), "{report:?}");
            assert_eq!(report.rank_direct, expect);
            assert_eq!(rank_gate_from_supports(&m, g, &eta).unwrap(), expect <= 1);
        }
    }
}

#[test]
fn hand_checked_grid() {
    // A directed triangle plus a loop: rows a, b, c are distinct unit
    // vectors, d has a single loop, e is empty. Rank 4.
    let c = to_unique_labels(&rank_template(RankTemplate::Grid, Gadget::Plain, 5, 1, 2)).unwrap();
    let mut a = RhoStructure::new(["a", "b", "c", "d", "e"].map(String::from).to_vec());
    for (x, y) in [("a", "b"), ("b", "c"), ("c", "a"), ("d", "d")] {
        a.insert_named("E", &[x, y]).unwrap();
    }
    let ctx = SymmetryContext::new(&c).unwrap();
    let supports = gate_orbits(&ctx).unwrap();
    let g = c.index_of("rank").unwrap();
    let eta = injective_assignments(
        supports.canonical_support(g).unwrap(),
        5,
        &Assignment::new(),
    )
    .remove(0);
    let report = SupportMatrix::new(&ctx, &supports, &a)
        .evaluate(g, &eta)
        .unwrap();
    assert_eq!((report.rank_direct, report.value_direct), (4, false));
    assert!(report.agreement());
}

#[test]
fn templates_agree_with_direct_evaluation() {
    let mut rng = seeded(7);
    let (mut evaluated, mut skipped) = (0usize, 0usize);
    for (name, c) in rank_templates() {
        let u = to_unique_labels(&c).unwrap();
        let ctx = SymmetryContext::new(&u).unwrap();
        let supports = gate_orbits(&ctx).unwrap();
        let a = random_structure(&mut rng, u.vocabulary(), u.order());
        let m = SupportMatrix::new(&ctx, &supports, &a);
        for g in rank_gates(&u) {
            let Some(support) = supports.canonical_support(g) else {
                skipped += 1;
                continue;
            };
            for eta in injective_assignments(support, u.order(), &Assignment::new()) {
                match m.evaluate(g, &eta) {
                    Ok(r) => {
                        assert!(r.agreement(), "{name}: {r:?}");
                        evaluated += 1;
                    }
                    Err(e) if e.is_skip() => skipped += 1,
                    Err(e) => panic!("{name} {}: {e}", u.id(g)),
                }
            }
        }
    }
    assert!(
        skipped <= evaluated,
        "{skipped} skipped, {evaluated} evaluated"
    );
}

#[test]
fn non_rank_gates_are_rejected() {
    let c = to_unique_labels(&rank_template(
        RankTemplate::Colours,
        Gadget::Guarded,
        4,
        1,
        2,
    ))
    .unwrap();
    let ctx = SymmetryContext::new(&c).unwrap();
    let supports = gate_orbits(&ctx).unwrap();
    let a = RhoStructure::with_size(4);
    let m = SupportMatrix::new(&ctx, &supports, &a);
    let g = c.index_of("both(1)").unwrap();
    let err = m.evaluate(g, &Assignment::new()).unwrap_err();
    assert!(matches!(err, RankSupportError::NotRankGate(_)));
    assert!(!err.is_skip());
}
