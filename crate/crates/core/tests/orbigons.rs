mod common;

use orbigentle::gentle::Path;
use orbigentle::orbigon::{compare_census, oracle_closure, spanning_trees, OrbigonEngine, OrbigonError, Orbigon};
use std::collections::BTreeSet;

#[test]
fn faces_are_treegons_with_one_key_per_face() {
    let g = common::gentle("tetra");
    let map = g.map();
    for f in map.faces() {
        let keys: BTreeSet<_> = f.corners.iter().map(|&c| Orbigon::face(map, c).canonical_key(map)).collect();
        assert_eq!(keys.len(), 1, "rerooting a face changes its key");
        let o = Orbigon::face(map, f.corners[0]);
        assert!(o.is_treegon());
        assert_eq!(o.reduced(map).len(), f.size());
        assert!(o.reduced(map).iter().all(|p| p.len == 1));
    }
    let all: BTreeSet<_> = map.faces().iter().map(|f| Orbigon::face(map, f.corners[0]).canonical_key(map)).collect();
    assert_eq!(all.len(), map.faces().len());
}

#[test]
fn engine_finds_each_face_from_its_boundary() {
    let g = common::gentle("tetra");
    let map = g.map();
    let engine = OrbigonEngine::new(g.clone()).unwrap();
    for f in map.faces() {
        let face = Orbigon::face(map, f.corners[0]);
        let pattern = face.reduced(map);
        assert!(engine.is_closed_pattern(&pattern));
        let found = engine.enumerate_matching(&pattern, 0);
        assert!(found.iter().any(|o| o.diagram.face_count() == 1 && o.canonical_key(map) == face.canonical_key(map)));
    }
    // an open pattern matches nothing
    let open = vec![Path { point: 0, start: 0, len: 1 }];
    assert!(!engine.is_closed_pattern(&open));
    assert!(engine.enumerate_matching(&open, 2).is_empty());
}

#[test]
fn treegon_sigma_is_an_involution_fixing_boundary_arcs() {
    let g = common::gentle("tetra");
    let map = g.map();
    let census = oracle_closure(&g, 4, 0);
    assert!(!census.is_empty());
    for (o, entry) in census.values() {
        assert!(o.is_treegon() && entry.ty.is_empty());
        let sigma = o.sigma(map).expect("tree-gon");
        for (i, &j) in sigma.iter().enumerate() {
            assert_eq!(sigma[j], i);
        }
        let fixed = sigma.iter().enumerate().filter(|(i, j)| i == *j).count();
        assert_eq!(fixed, o.reduced(map).len(), "{entry}");
    }
}

#[test]
fn census_cross_check_on_both_examples() {
    for (name, faces, types) in [("tetra", 4, 1), ("torus", 3, 1)] {
        let g = common::gentle(name);
        let c = compare_census(&g, faces, types).unwrap();
        assert!(c.censuses_agree(), "{name}: {:?} / {:?}", c.only_in_oracle, c.only_in_engine);
        assert!(c.identities_hold(), "{name}: {:?} / {:?}", c.token_failures, c.euler_failures);
        assert!(c.oracle_size > 0);
    }
}

#[test]
fn type_bound_is_monotone() {
    let g = common::gentle("tetra");
    let small: BTreeSet<_> = oracle_closure(&g, 4, 0).into_keys().collect();
    let large: BTreeSet<_> = oracle_closure(&g, 4, 1).into_keys().collect();
    assert!(small.is_subset(&large) && small.len() < large.len());
}

#[test]
fn bad_gluing_and_folding_are_rejected() {
    let g = common::gentle("tetra");
    let map = g.map();
    let f = &map.faces()[0];
    let o = Orbigon::face(map, f.corners[0]);
    // single arrows are never full turns at valence 3
    assert!(matches!(o.fold(map, 0), Err(OrbigonError::BadFold(_))));
    // a side cannot be glued to itself
    let side = (0, map.succ(f.corners[0]));
    assert!(matches!(o.stitch(map, &o, side, side), Err(OrbigonError::BadGluing(_))));
}

#[test]
fn spanning_tree_counts() {
    // Cayley: K4 has 16 spanning trees
    let k4: Vec<(u32, u32, usize)> = vec![(0, 1, 0), (0, 2, 1), (0, 3, 2), (1, 2, 3), (1, 3, 4), (2, 3, 5)];
    assert_eq!(spanning_trees(4, &k4).len(), 16);
    // a doubled edge gives two trees
    assert_eq!(spanning_trees(2, &[(0, 1, 0), (0, 1, 1)]).len(), 2);
    assert_eq!(spanning_trees(1, &[]).len(), 1);
}
