mod common;

use orbigentle::gentle::Basis;
use orbigentle::hochschild::{commutator_lambda, Coord, HhContext, HhError, NamedClass};
use num_rational::BigRational;
use std::sync::OnceLock;

fn ctx() -> &'static HhContext {
    static C: OnceLock<HhContext> = OnceLock::new();
    C.get_or_init(|| HhContext::new(common::gentle("tetra"), 4).unwrap())
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

#[test]
fn mu_and_named_classes_are_cocycles() {
    let c = ctx();
    assert!(c.cocycle_check(&c.mu(), 3, 3).unwrap().holds());
    let arc0 = c.non_tree_arcs()[0];
    for class in [c.unit_class(), c.odd_class((0, 1)).unwrap(), c.arc_class(arc0).unwrap(), c.even_class((0, 1)).unwrap()] {
        let r = c.cocycle_check(&class, 3, 2).unwrap();
        assert!(r.holds(), "{}: {:?}", class.label(), r.failures.first());
        assert!(r.tuples_checked > 0);
    }
}

#[test]
fn d_squared_vanishes_on_a_non_cocycle() {
    let c = ctx();
    let sample = c.sample_cochain(8);
    let d = c.vanishing_check(&c.differential(&sample), 2, 2).unwrap();
    assert!(!d.holds(), "the sample should not be a cocycle");
    assert!(c.d_squared_check(&sample, 2, 2).unwrap().holds());
}

#[test]
fn bracket_agrees_with_its_closed_form_in_low_arity() {
    let c = ctx();
    let g = c.gentle();
    let arc0 = c.non_tree_arcs()[0];
    let classes = [c.unit_class(), c.odd_class((0, 1)).unwrap(), c.arc_class(arc0).unwrap(), c.even_class((1, 1)).unwrap()];
    let mut inputs: Vec<Vec<Basis>> = vec![vec![]];
    inputs.extend(g.arrow_paths().iter().map(|&p| vec![Basis::Path(p)]));
    for k in &classes {
        for n in &classes {
            let br = c.bracket(k, n);
            for a in &inputs {
                assert_eq!(
                    c.eval(&br, a).unwrap(),
                    c.bracket_closed_form(k, n, a).unwrap(),
                    "[{}, {}] on {a:?}",
                    k.label(),
                    n.label()
                );
            }
        }
    }
}

#[test]
fn classification_of_named_classes() {
    let c = ctx();
    let unit = c.classify(&c.unit_class(), 2).unwrap();
    assert_eq!(unit.parity, 1);
    assert_eq!(unit.coords.keys().copied().collect::<Vec<_>>(), vec![Coord::Unit]);
    assert_eq!(unit.get(Coord::Unit), q(1));

    let o = c.classify(&c.odd_class((2, 1)).unwrap(), 2).unwrap();
    assert!(!o.is_zero() && o.get(Coord::Unit) == q(0));
    assert!(o.coords.keys().all(|k| matches!(k, Coord::Winding(_))));
    assert_ne!(o, c.classify(&c.odd_class((2, 2)).unwrap(), 2).unwrap());

    // inner derivations are trivial, arcs outside the tree are not
    for a in 0..c.map().arc_count() {
        let inner = c.build_named_class(&NamedClass::Arc(commutator_lambda(c.map(), a))).unwrap();
        assert!(c.classify(&inner, 2).unwrap().is_zero());
    }
    for a in c.non_tree_arcs() {
        let d = c.classify(&c.arc_class(a).unwrap(), 2).unwrap();
        assert_eq!(d.get(Coord::Arc(a)), q(1));
    }

    // twice a class has twice the descriptor
    let two = c.linear(&[(q(2), c.unit_class())]).unwrap();
    assert_eq!(c.classify(&two, 2).unwrap(), unit.scale(&q(2)));
}

#[test]
fn invalid_inputs_are_rejected() {
    let g = common::gentle("tetra");
    let c = ctx();
    let map = c.map();
    assert!(matches!(c.arc_class(99), Err(HhError::UnknownArc(99))));
    assert!(matches!(c.odd_class((9, 1)), Err(HhError::UnknownPoint(9))));
    assert!(matches!(c.odd_class((0, 0)), Err(HhError::ZeroWinding)));
    assert!(matches!(c.build_named_class(&NamedClass::Arc(vec![])), Err(HhError::ArrowCount { .. })));
    let mut lopsided = vec![q(0); map.dart_count()];
    lopsided[0] = q(1);
    assert!(matches!(c.build_named_class(&NamedClass::Arc(lopsided)), Err(HhError::FaceSum { .. })));

    let far = (0..map.arc_count())
        .find(|&a| {
            let (t, h) = map.arc_endpoints(a);
            t != 0 && h != 0
        })
        .unwrap();
    assert!(matches!(c.build_named_class(&NamedClass::OrbEven((0, 1), far)), Err(HhError::NotIncident { .. })));

    let mixed = c.linear(&[(q(1), c.unit_class()), (q(1), c.arc_class(0).unwrap())]);
    assert!(matches!(mixed, Err(HhError::ParityMismatch)));
    assert!(matches!(c.gauge_step(&c.unit_class(), 3), Err(HhError::Precondition(_))));

    assert!(matches!(HhContext::with_tree(g.clone(), 3, vec![0]), Err(HhError::NotSpanningTree(_))));
    assert!(matches!(HhContext::with_tree(g, 3, vec![0, 0, 1]), Err(HhError::NotSpanningTree(_))));
}

#[test]
fn small_report_has_the_expected_basis_sizes() {
    let r = ctx().hh_report(1, 2, 2).unwrap();
    // unit plus one turn per marked point; the three arcs outside the tree plus one per point
    assert_eq!((r.odd_basis.len(), r.odd_rank), (5, 5));
    assert_eq!((r.even_basis.len(), r.even_rank), (7, 7));
    assert!(r.bases_independent);
    assert!(r.cocycle_checks.iter().all(|v| v.holds()));
    assert!(r.d_squared_checks.iter().all(|v| v.holds()));
    assert!(!r.sample_differential.holds());
    assert_eq!(r.table_labels.len(), 12);
}
