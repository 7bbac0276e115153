// SPDX-License-Identifier: Apache-2.0
//! Small worked cases with known answers.

use symcirc::circuit::{remove_redundant, Violation};
use symcirc::corpus;
use symcirc::equivalence::{index_iso_check, quotient};
use symcirc::eval::{decide_invariant, evaluate, semantic_gate_equal};
use symcirc::gi::{gen_symmetry_instance, BipartiteGraph, GiKind};
use symcirc::io::{parse_circuit, serialize_circuit, IoError};
use symcirc::majority::{compile_symmetric, SymmetricSpec};
use symcirc::oracle::{brute_symmetric, truth_table};
use symcirc::partition::canonical_support;
use symcirc::rank::rank_mod_p;
use symcirc::rank_support::{combine, compatible, Assignment};
use symcirc::{
    Bijection, Budget, CircuitBuilder, MajorityConvention, Partition, RhoStructure,
    StructuredFunction, Vocabulary,
};

fn assignment(pairs: &[(usize, usize)]) -> Assignment {
    pairs.iter().copied().collect()
}

fn part(n: usize, parts: &[&[usize]]) -> Partition {
    Partition::new(n, parts.iter().map(|p| p.to_vec()).collect()).unwrap()
}

#[test]
fn index_set_sizes() {
    assert_eq!(StructuredFunction::And(3).index_len(), 3);
    assert_eq!(StructuredFunction::rank(1, 2, 2, 3).unwrap().index_len(), 6);
    assert_eq!(
        StructuredFunction::rank(2, 5, 4, 5).unwrap().index_len(),
        20
    );
}

#[test]
fn builder_rejects_bad_wiring() {
    let mut b = CircuitBuilder::new(1, Vocabulary::new([("P", 1)]), 0);
    b.constant("zero", false)
        .constant("nought", false)
        .relational("P(1)", "P", vec![1]);
    b.internal("loop", StructuredFunction::And(2), ["P(1)", "loop"]);
    b.output(vec![], "loop");
    let report = b.validate();
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::DuplicateConstant { value: false, .. })));
    assert!(report
        .violations
        .iter()
        .any(|v| matches!(v, Violation::NotAcyclic { .. })));
}

#[test]
fn gate_functions() {
    let maj = StructuredFunction::Maj(2);
    assert!(maj.apply(&[true, false], MajorityConvention::AtLeastHalf));
    assert!(!maj.apply(&[true, false], MajorityConvention::Strict));
    assert!(!StructuredFunction::Nand(1).apply(&[true], MajorityConvention::default()));
    let rank = StructuredFunction::rank(1, 2, 2, 2).unwrap();
    assert!(!rank.apply(&[true, false, false, true], MajorityConvention::default()));
    let zero = StructuredFunction::rank(0, 2, 2, 2).unwrap();
    assert!(zero.apply(&[false; 4], MajorityConvention::default()));
}

#[test]
fn matrix_ranks() {
    assert_eq!(rank_mod_p(&[vec![1, 0], vec![0, 1]], 2).unwrap(), 2);
    assert_eq!(rank_mod_p(&[vec![1, 1], vec![1, 1]], 2).unwrap(), 1);
    // Determinant -3: singular over GF(3) only.
    assert_eq!(rank_mod_p(&[vec![1, 2], vec![2, 1]], 3).unwrap(), 1);
    assert_eq!(rank_mod_p(&[vec![1, 2], vec![2, 1]], 2).unwrap(), 2);
    assert_eq!(rank_mod_p(&[vec![1, 2], vec![2, 1]], 5).unwrap(), 2);
}

#[test]
fn example_circuit_on_empty_structure() {
    let c = corpus::c_ex();
    let a = RhoStructure::with_size(c.order());
    let result = evaluate(&c, &a, &Bijection::identity(c.order())).unwrap();
    assert!(result.values().all(|v| !v));
    let table = truth_table(&c, MajorityConvention::default(), Budget::default()).unwrap();
    assert_eq!(table.len(), 16);
}

#[test]
fn constant_output_is_invariant() {
    let mut b = CircuitBuilder::new(2, Vocabulary::new([("E", 2)]), 0);
    corpus::add_all_relational(&mut b);
    b.constant("one", true).output(vec![], "one");
    let c = b.build().unwrap();
    assert!(decide_invariant(&c, Budget::default()).unwrap().invariant);
    let g = c.index_of("one").unwrap();
    assert!(semantic_gate_equal(&c, g, g, Budget::default()).unwrap());
}

#[test]
fn partition_joins() {
    let p = part(4, &[&[1, 2], &[3], &[4]]);
    let q = part(4, &[&[2, 3], &[1], &[4]]);
    assert_eq!(p.join(&q).unwrap(), part(4, &[&[1, 2, 3], &[4]]));
    assert_eq!(p.join(&p).unwrap(), p);
    assert_eq!(p.join(&Partition::singletons(4)).unwrap(), p);
}

#[test]
fn canonical_supports() {
    let s = canonical_support(&part(5, &[&[1], &[2, 3, 4, 5]]));
    assert_eq!((s.norm, s.canonical_support), (1, Some(vec![1])));
    let s = canonical_support(&part(4, &[&[1, 2], &[3, 4]]));
    assert_eq!((s.norm, s.canonical_support), (2, None));
    let s = canonical_support(&part(2, &[&[1, 2]]));
    assert_eq!((s.norm, s.canonical_support), (0, Some(vec![])));
}

#[test]
fn index_automorphisms() {
    // Positions are row-major: (1,1),(1,2),(2,1),(2,2).
    let rank = StructuredFunction::rank(1, 2, 2, 2).unwrap();
    assert!(index_iso_check(&rank, &[3, 2, 1, 0]));
    assert!(!index_iso_check(&rank, &[0, 2, 1, 3]));
    assert!(index_iso_check(
        &StructuredFunction::And(5),
        &[4, 2, 0, 1, 3]
    ));
}

#[test]
fn reduced_circuits_are_fixed_points() {
    let c = corpus::c_ex();
    assert_eq!(
        serialize_circuit(&quotient(&c).unwrap()),
        serialize_circuit(&c)
    );
    assert_eq!(
        serialize_circuit(&remove_redundant(&c)),
        serialize_circuit(&c)
    );
}

#[test]
fn compiled_fragments() {
    let xor = compile_symmetric(
        &SymmetricSpec::parse("010").unwrap(),
        MajorityConvention::AtLeastHalf,
    );
    assert!(xor.len() <= 13);
    let table = truth_table(&xor, MajorityConvention::AtLeastHalf, Budget::default()).unwrap();
    assert_eq!(
        table.iter().map(|row| row[0]).collect::<Vec<_>>(),
        [false, true, true, false]
    );
    let never = compile_symmetric(
        &SymmetricSpec::parse("000").unwrap(),
        MajorityConvention::AtLeastHalf,
    );
    let table = truth_table(&never, MajorityConvention::AtLeastHalf, Budget::default()).unwrap();
    assert!(table.iter().all(|row| !row[0]));
    let always = compile_symmetric(
        &SymmetricSpec::parse("1111").unwrap(),
        MajorityConvention::AtLeastHalf,
    );
    let table = truth_table(&always, MajorityConvention::AtLeastHalf, Budget::default()).unwrap();
    assert_eq!(table.len(), 8);
    assert!(table.iter().all(|row| row[0]));
}

#[test]
fn assignment_compatibility() {
    assert!(compatible(&assignment(&[(1, 0)]), &assignment(&[(1, 0)])));
    assert_eq!(
        combine(&assignment(&[(1, 0)]), &assignment(&[(1, 0)])),
        assignment(&[(1, 0)])
    );
    assert!(!compatible(&assignment(&[(1, 0)]), &assignment(&[(2, 0)])));
    assert!(compatible(&assignment(&[(1, 0)]), &assignment(&[(2, 1)])));
}

#[test]
fn identical_graphs_give_positive_instances() {
    let g = BipartiteGraph::new(2, 3, [(1, 1), (2, 3)]).unwrap();
    let inst = gen_symmetry_instance(&g, &g, 1, 2).unwrap();
    assert!(brute_symmetric(&inst.circuit, Budget::default()).unwrap());
    for kind in GiKind::ALL {
        assert!(
            kind.decide(&kind.generate(&g, &g, 1, 2).unwrap(), Budget::default())
                .unwrap(),
            "{kind:?}"
        );
    }
}

#[test]
fn documents() {
    let text = serialize_circuit(&corpus::c_ex());
    assert_eq!(serialize_circuit(&parse_circuit(&text).unwrap()), text);
    let err = parse_circuit(&text.replace("\"OR\"", "\"XOR\"")).unwrap_err();
    assert!(matches!(err, IoError::UnknownGateKind { ref kind, .. } if kind == "XOR"));
}
