mod common;

use orbigentle::coeffs::{Series, Var};
use orbigentle::curved::{CurvedError, CurvedStructure, DeformationParams};
use orbigentle::gentle::{Basis, Element, Gentle};
use proptest::prelude::*;
use std::sync::OnceLock;

fn structure() -> &'static CurvedStructure {
    static S: OnceLock<CurvedStructure> = OnceLock::new();
    S.get_or_init(|| {
        let g = common::gentle("tetra");
        let params = DeformationParams::generic(g.map(), 2, 2);
        CurvedStructure::new(g, params, 5, 10).unwrap()
    })
}

#[test]
fn small_box_axioms_hold_with_and_without_deformation() {
    let s = structure();
    let r = s.verify_axioms(5, 3).unwrap();
    assert!(r.holds(), "{:?}", r.violations.first());
    assert!(r.per_arity.contains_key(&4));
    let flat = s.reduce_uncurved();
    assert!(flat.verify_axioms(4, 3).unwrap().holds());
}

#[test]
fn curvature_is_the_weighted_sum_of_full_turns() {
    let s = structure();
    let g = s.gentle();
    let mut expected = Element::zero(2);
    for m in 0..g.map().point_count() {
        for j in 1..=2 {
            let r = Series::var(Var::orb(g.map().point_name(m), j).unwrap(), 2);
            expected.add_assign(&g.ell(m, j, 2).scale(&r));
        }
    }
    assert_eq!(s.curvature(), expected);
    assert!(g.is_central(&s.curvature()));
}

#[test]
fn binary_product_is_the_signed_composition() {
    let s = structure();
    let g = s.gentle();
    for a in g.paths_up_to(3) {
        for b in g.paths_up_to(3) {
            let (x, y) = (Basis::Path(a), Basis::Path(b));
            let mu = s.mu_basis(&[x, y]).unwrap();
            let mut expected = match g.compose_basis(&x, &y) {
                Some(xy) => Element::basis(xy, 2),
                None => Element::zero(2),
            };
            if g.parity(&y) == 1 {
                expected = expected.neg();
            }
            assert_eq!(mu, expected, "{} {}", g.render_basis(&x), g.render_basis(&y));
        }
    }
}

#[test]
fn idempotents_act_strictly() {
    let s = structure();
    assert!(s.strictness(4, 2).unwrap().violations.is_empty());
    let g = s.gentle();
    let p = g.arrow_paths()[0];
    let e = Basis::Idem(g.tail_arc(&Basis::Path(p)) as u32);
    assert!(s.mu_basis(&[Basis::Path(p), e, Basis::Path(p)]).unwrap().is_zero());
}

#[test]
fn products_have_the_expected_parity_and_degree() {
    let r = structure().parity_check(4, 3).unwrap();
    assert!(r.violations.is_empty(), "{:?}", r.violations.first());
    assert!(r.tuples_checked > 0);
}

#[test]
fn bounds_and_parameters_are_validated() {
    let s = structure();
    let g = s.gentle();
    let p = Basis::Path(g.arrow_paths()[0]);
    assert!(matches!(s.mu_basis(&[p; 6]), Err(CurvedError::ArityBound { .. })));
    let long = Basis::Path(orbigentle::gentle::Path { point: 0, start: 0, len: 11 });
    assert!(matches!(s.mu_basis(&[long, p]), Err(CurvedError::LengthBound { .. })));
    assert!(matches!(s.verify_axioms(5, 6), Err(CurvedError::LengthBound { .. })));

    let mut bad = DeformationParams::zero(2);
    bad.orb.insert((0, 1), Series::one(2));
    assert!(matches!(bad.validate(g.map()), Err(CurvedError::NotInMaxIdeal(_))));
    let mut unknown = DeformationParams::zero(2);
    unknown.orb.insert((9, 1), Series::var(Var::R0, 2));
    assert!(matches!(unknown.validate(g.map()), Err(CurvedError::UnknownPoint(9))));
    let mut mixed = DeformationParams::zero(2);
    mixed.r0 = Series::var(Var::R0, 3);
    assert!(matches!(mixed.validate(g.map()), Err(CurvedError::OrderMismatch)));
}

#[test]
fn order_one_has_no_deformation() {
    let g: Gentle = common::gentle("tetra");
    let params = DeformationParams::generic(g.map(), 1, 2);
    assert!(params.is_zero() && params.support().is_empty());
    let s = CurvedStructure::new(g, params, 4, 6).unwrap();
    assert!(s.curvature().is_zero());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn products_are_multilinear(i in 0usize..200, j in 0usize..200, k in 0usize..200) {
        let s = structure();
        let g = s.gentle();
        let paths = g.paths_up_to(3);
        let (a, b, c) = (paths[i % paths.len()], paths[j % paths.len()], paths[k % paths.len()]);
        let (x, y, z) = (g.path(a, 2), g.path(b, 2), g.path(c, 2));
        let mut sum = x.clone();
        sum.add_assign(&y);
        let lhs = s.evaluate_mu(&[sum, z.clone()]).unwrap();
        let mut rhs = s.evaluate_mu(&[x, z.clone()]).unwrap();
        rhs.add_assign(&s.evaluate_mu(&[y, z]).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn random_composable_tuples_satisfy_the_relations(seed in 0usize..10_000) {
        let s = structure();
        let tuples = s.composable_tuples(3, 3, false);
        let t = &tuples[seed % tuples.len()];
        prop_assert!(s.axiom_residual(t).unwrap().is_zero());
    }
}
