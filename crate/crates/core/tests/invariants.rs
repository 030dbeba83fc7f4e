use std::collections::BTreeSet;

use cobord_core::charfn::{
    delta_matrix, eta_assignment, eta_standard, normalize_simplex_pair, validate,
    verify_translation, CharPair, TranslationWitness,
};
use cobord_core::cobordism::{
    boundary_components, build_w, default_r1, glue_report, gluing_witness, WManifold,
};
use cobord_core::polytope::{
    combinatorially_isomorphic, rational_from_i64, truncated_simplex, truncation_facets, FacetId,
    FacetProvenance, PolytopeError, SimplePolytope,
};
use cobord_core::zlinalg::{apply_matrix, IntMatrix};
use cobord_core::{BigInt, BigRational};
use num_traits::Zero;
use proptest::prelude::*;

fn r(p: i64, q: i64) -> BigRational {
    rational_from_i64(p, q)
}

fn facet_set(bits: u32, n: usize) -> BTreeSet<FacetId> {
    (0..=n)
        .filter(|j| bits & (1 << j) != 0)
        .map(|j| FacetId(j as u32))
        .collect()
}

#[test]
fn cutting_any_face_of_a_simplex() {
    for n in 2..=7 {
        let s = SimplePolytope::simplex(n).unwrap();
        let all = (1u32 << (n + 1)) - 1;
        for bits in 1..all {
            let facets = facet_set(bits, n);
            let codim = facets.len();
            if codim > n {
                continue;
            }
            let face = s.face_from_facets(&facets).unwrap();
            if codim == 1 {
                assert!(matches!(
                    s.cut_face(&face, &r(1, 5)),
                    Err(PolytopeError::FacetCut(_))
                ));
                continue;
            }
            let cut = s.cut_face(&face, &r(1, 5)).unwrap();
            cut.check_invariants().unwrap();
            let new = FacetId(n as u32 + 1);
            let facet = cut.facet_polytope(new).unwrap();
            assert_eq!(
                facet.vertices().len(),
                face.vertices.len() * codim,
                "n = {n}, face {facets:?}"
            );
            if n > 5 {
                continue;
            }
            let dim_f = n - codim;
            let model = match (dim_f, codim) {
                (0, _) => SimplePolytope::simplex(codim - 1).unwrap(),
                _ => SimplePolytope::simplex(dim_f)
                    .unwrap()
                    .product(&SimplePolytope::simplex(codim - 1).unwrap())
                    .unwrap(),
            };
            assert!(
                combinatorially_isomorphic(&facet, &model).is_some(),
                "n = {n}, face {facets:?}"
            );
        }
    }
}

#[test]
fn truncated_simplex_vertices_meet_one_cut_and_one_original_edge() {
    for n in [4, 6, 8, 10, 12] {
        let t = truncated_simplex(n, &default_r1()).unwrap();
        assert_eq!(t.vertices().len(), n * (n + 4) / 2);
        let cuts: BTreeSet<FacetId> = truncation_facets(n).into_iter().collect();
        for (i, v) in t.vertices().iter().enumerate() {
            assert_eq!(v.facets.intersection(&cuts).count(), 1, "{}", v.name);
            let originals = t
                .edges()
                .iter()
                .filter(|e| e.touches(i) && e.provenance.is_original())
                .count();
            assert_eq!(originals, 1, "{}", v.name);
        }
    }
}

#[test]
fn coordinates_match_incidences() {
    let polytopes = [
        SimplePolytope::simplex(4).unwrap(),
        truncated_simplex(6, &r(1, 7)).unwrap(),
        SimplePolytope::simplex(2)
            .unwrap()
            .product(&SimplePolytope::simplex(3).unwrap())
            .unwrap(),
    ];
    for p in &polytopes {
        for v in p.vertices() {
            let x = v.coord.as_ref().unwrap();
            let tight: BTreeSet<FacetId> = p
                .facets()
                .iter()
                .filter(|f| f.halfspace.as_ref().unwrap().slack(x).is_zero())
                .map(|f| f.id)
                .collect();
            assert_eq!(tight, v.facets, "{}", v.name);
            assert!(p
                .facets()
                .iter()
                .all(|f| f.halfspace.as_ref().unwrap().slack(x) >= BigRational::zero()));
        }
    }
}

#[test]
fn cut_facets_record_their_faces() {
    let t = truncated_simplex(4, &default_r1()).unwrap();
    let names: Vec<String> = truncation_facets(4)
        .iter()
        .map(|f| match &t.facet(*f).unwrap().provenance {
            FacetProvenance::Cut { name, face } => format!("{name}:{}", face.len()),
            other => panic!("{other:?}"),
        })
        .collect();
    assert_eq!(names, ["P1:3", "P2:3", "P3:4"]);
}

#[test]
fn delta_is_an_involution() {
    for n in [4, 6, 8, 10, 12] {
        let d = delta_matrix(n).unwrap();
        assert_eq!(d.mul(&d).unwrap(), IntMatrix::identity(n - 1));
    }
}

#[test]
fn restriction_commutes_with_validation() {
    for k in 1..=4 {
        let w = build_w(k, &default_r1()).unwrap();
        let comps = boundary_components(&w).unwrap();
        for p in comps.as_array() {
            assert!(p.is_closed());
            assert!(validate(p).is_valid());
        }
        let nf = normalize_simplex_pair(&comps.p3).unwrap();
        assert_eq!(nf.apply(&comps.p3).unwrap(), nf.normal_form);
    }
}

#[test]
fn translation_is_an_equivalence() {
    for k in 1..=4 {
        let n = 2 * (k + 1);
        let comps = boundary_components(&build_w(k, &default_r1()).unwrap()).unwrap();
        let (p1, p2) = (&comps.p1, &comps.p2);
        assert!(
            verify_translation(p1, p1, &TranslationWitness::identity(p1))
                .unwrap()
                .holds()
        );
        let g = gluing_witness(n).unwrap();
        let inv = g.inverse().unwrap();
        assert!(verify_translation(p1, p2, &g).unwrap().holds());
        assert!(verify_translation(p2, p1, &inv).unwrap().holds());
        let round = g.then(&inv).unwrap();
        assert!(verify_translation(p1, p1, &round).unwrap().holds());
        assert_eq!(round.delta(), &IntMatrix::identity(n - 1));
    }
}

fn unimodular(ops: &[(usize, usize, i64)], size: usize) -> IntMatrix {
    let mut m = IntMatrix::identity(size);
    for &(i, j, c) in ops {
        let (i, j) = (i % size, j % size);
        if i == j {
            continue;
        }
        let mut entries: Vec<i64> = (0..size * size)
            .map(|x| i64::from(x / size == x % size))
            .collect();
        entries[i * size + j] = c;
        let e =
            IntMatrix::new(size, size, entries.into_iter().map(BigInt::from).collect()).unwrap();
        m = e.mul(&m).unwrap();
    }
    m
}

fn w_with(k: usize, assignment: std::collections::BTreeMap<FacetId, Vec<BigInt>>) -> WManifold {
    WManifold::assemble(k, &default_r1(), assignment).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn truncation_counts_ignore_r1(q in 5i64..40, p in 1i64..5, k in 1usize..4) {
        prop_assume!(4 * p < q);
        let n = 2 * (k + 1);
        let t = truncated_simplex(n, &r(p, q)).unwrap();
        prop_assert_eq!(t.vertices().len(), n * (n + 4) / 2);
    }

    #[test]
    fn h_vector_is_seed_free_and_palindromic(seed in 0u64..1000, k in 1usize..4) {
        let n = 2 * (k + 1);
        let t = truncated_simplex(n, &default_r1()).unwrap();
        let h0 = t.h_vector(&t.generate_functional(0).unwrap()).unwrap();
        let h = t.h_vector(&t.generate_functional(seed).unwrap()).unwrap();
        prop_assert_eq!(&h, &h0);
        let rev: Vec<usize> = h.iter().rev().copied().collect();
        prop_assert_eq!(h, rev);
    }

    #[test]
    fn basis_change_preserves_validity(ops in prop::collection::vec((0usize..8, 0usize..8, -2i64..=2), 0..10), k in 1usize..3) {
        let n = 2 * (k + 1);
        let m = unimodular(&ops, n - 1);
        let moved = eta_assignment(n)
            .unwrap()
            .into_iter()
            .map(|(f, v)| (f, apply_matrix(&m, &v).unwrap()))
            .collect();
        prop_assert!(validate(w_with(k, moved).pair()).is_valid());
    }

    #[test]
    fn breaking_mutations_fail_the_glue(facet in 0u32..7, v in prop::collection::vec(-2i64..=2, 5)) {
        let (k, n) = (2usize, 6usize);
        prop_assume!(v.iter().any(|x| *x != 0));
        let mut a = eta_assignment(n).unwrap();
        a.insert(FacetId(facet), v.iter().map(|x| BigInt::from(*x)).collect());
        let w = w_with(k, a);
        let report = glue_report(&w, 0).unwrap();
        if validate(w.pair()).is_valid() {
            prop_assert!(report.checks[0].pass);
        } else {
            prop_assert!(!report.pass());
            prop_assert_eq!(report.first_failure().unwrap().name, "validate");
        }
    }
}

#[test]
fn eta_has_expected_shape() {
    for n in [4, 6, 8, 10, 12] {
        let eta = eta_standard(n).unwrap();
        assert_eq!(eta.len(), n + 1);
        assert!(eta.iter().all(|e| e.len() == n - 1));
        let pair: CharPair = w_with(n / 2 - 1, eta_assignment(n).unwrap()).pair().clone();
        assert_eq!(pair.boundary_facets(), truncation_facets(n).to_vec());
    }
}
