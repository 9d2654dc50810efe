mod common;

use orbigentle::surface::{CombinatorialMap, Condition, SurfaceError, SurfaceFile, Witness};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn parse(text: &str) -> Result<CombinatorialMap, SurfaceError> {
    CombinatorialMap::parse(text)
}

const TRIANGLE_PAIR: &str = r#"{
  "marked_points": ["a", "b", "c"],
  "arcs": [{"id": "x", "tail": "a", "head": "b"}, {"id": "y", "tail": "b", "head": "c"}],
  "rotation": {"a": ["x.tail"], "b": ["x.head", "y.tail"], "c": ["y.head"]}
}"#;

#[test]
fn example_surfaces_have_the_expected_cells() {
    let tetra = common::map("tetra");
    assert_eq!((tetra.genus(), tetra.point_count(), tetra.arc_count()), (0, 4, 6));
    assert_eq!(tetra.faces().iter().map(|f| f.size()).collect::<Vec<_>>(), vec![3; 4]);
    let torus = common::map("torus");
    assert_eq!((torus.genus(), torus.point_count(), torus.arc_count()), (1, 2, 4));
    assert_eq!(torus.euler_char_marked(), -2);
}

#[test]
fn conditions_and_witnesses() {
    let tetra = common::map("tetra");
    for c in [Condition::Nmd, Condition::Nl2] {
        assert!(tetra.check_condition(c).is_ok());
    }
    assert!(matches!(tetra.check_condition(Condition::Dimer), Err(Witness::MixedFace { .. })));
    let torus = common::map("torus");
    assert!(matches!(torus.check_condition(Condition::Nl2), Err(Witness::SharedEndpoints { .. })));
    let r = torus.report();
    assert!(r.dimer && r.nmd && !r.nl2);
    assert_eq!(r.face_signs.map(|s| s.len()), Some(2));
}

#[test]
fn validation_errors_have_stable_codes() {
    let cases: [(&str, u8); 6] = [
        ("{ not json", 1),
        (r#"{"marked_points": ["a", "a"], "arcs": [], "rotation": {}}"#, 2),
        (r#"{"marked_points": ["a", "b"], "arcs": [{"id": "x", "tail": "a", "head": "z"}], "rotation": {}}"#, 3),
        (
            r#"{"marked_points": ["a", "b"], "arcs": [{"id": "x", "tail": "a", "head": "b"}], "rotation": {"a": ["x.tail"], "b": []}}"#,
            4,
        ),
        (
            r#"{"marked_points": ["a", "b", "c", "d"],
                "arcs": [{"id": "x", "tail": "a", "head": "b"}, {"id": "y", "tail": "c", "head": "d"}],
                "rotation": {"a": ["x.tail"], "b": ["x.head"], "c": ["y.tail"], "d": ["y.head"]}}"#,
            5,
        ),
        (
            r#"{"marked_points": ["a", "b"], "arcs": [{"id": "x", "tail": "a", "head": "b"}], "rotation": {"a": ["x.tail"], "b": ["x.head"]}}"#,
            6,
        ),
    ];
    for (text, code) in cases {
        let err = parse(text).unwrap_err();
        assert_eq!(err.code(), code, "{err}");
    }
    let err = parse(r#"{"marked_points": ["a", "b"], "arcs": [{"id": "x", "tail": "a", "head": "z"}], "rotation": {}}"#).unwrap_err();
    assert_eq!(err, SurfaceError::DanglingArcEnd("x.head".into()));
}

#[test]
fn small_spheres_parse_and_dualize() {
    // a path of two arcs on the sphere: one face, χ(S, M) = -1
    let m = parse(TRIANGLE_PAIR).unwrap();
    assert_eq!(m.faces().len(), 1);
    assert!(matches!(m.check_condition(Condition::Nmd), Ok(())));
    let (dual, report) = m.dual_report();
    assert_eq!(dual.point_count(), 1);
    assert!(report.double_dual_matches);
}

fn random_map(seed: u64) -> Option<CombinatorialMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = 2 + (seed % 4) as usize;
    let extra = 1 + (seed / 4 % 4) as usize;
    CombinatorialMap::from_file(&common::random_surface_file(&mut rng, points, extra)).ok()
}

fn rotate_lists(file: &SurfaceFile, by: usize) -> SurfaceFile {
    let mut out = file.clone();
    for ends in out.rotation.values_mut() {
        let k = by % ends.len().max(1);
        ends.rotate_left(k);
    }
    out
}

proptest! {
    #[test]
    fn faces_partition_the_corners(seed in any::<u64>()) {
        let Some(m) = random_map(seed) else { return Ok(()) };
        let mut seen = vec![0; m.dart_count()];
        for f in m.faces() {
            for &c in &f.corners {
                seen[c] += 1;
            }
            for w in 0..f.size() {
                prop_assert_eq!(m.face_next(f.corners[w]), f.corners[(w + 1) % f.size()]);
            }
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
        // V − E + F is even and at most 2
        let euler = m.point_count() as i64 - m.arc_count() as i64 + m.faces().len() as i64;
        prop_assert_eq!(euler, 2 - 2 * m.genus());
        prop_assert!(m.genus() >= 0);
    }

    #[test]
    fn cyclic_lists_may_start_anywhere(seed in any::<u64>(), by in 0usize..5) {
        let Some(m) = random_map(seed) else { return Ok(()) };
        let shifted = CombinatorialMap::from_file(&rotate_lists(&m.to_file(), by)).unwrap();
        let identity: Vec<usize> = (0..m.point_count()).collect();
        prop_assert!(m.matches_relabeled(&shifted, &identity, false));
        let mut sizes: Vec<usize> = m.faces().iter().map(|f| f.size()).collect();
        let mut shifted_sizes: Vec<usize> = shifted.faces().iter().map(|f| f.size()).collect();
        sizes.sort_unstable();
        shifted_sizes.sort_unstable();
        prop_assert_eq!(sizes, shifted_sizes);
    }

    #[test]
    fn file_round_trip(seed in any::<u64>()) {
        let Some(m) = random_map(seed) else { return Ok(()) };
        let again = CombinatorialMap::parse(&m.to_json()).unwrap();
        prop_assert_eq!(again.to_file(), m.to_file());
    }

    #[test]
    fn dual_preserves_genus_and_inverts(seed in any::<u64>()) {
        let Some(m) = random_map(seed) else { return Ok(()) };
        let (dual, report) = m.dual_report();
        prop_assert_eq!(dual.genus(), m.genus());
        prop_assert_eq!(dual.point_count(), m.faces().len());
        prop_assert_eq!(dual.arc_count(), m.arc_count());
        prop_assert!(report.degrees_complementary);
        prop_assert!(report.double_dual_matches);
    }
}
