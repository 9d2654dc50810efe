#![allow(dead_code)]

use orbigentle::gentle::Gentle;
use orbigentle::surface::{ArcRecord, CombinatorialMap, SurfaceFile};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

pub fn data_path(name: &str) -> String {
    format!("{}/../../data/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

pub fn raw(name: &str) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(data_path(name)).unwrap()).unwrap()
}

pub fn map(name: &str) -> Arc<CombinatorialMap> {
    Arc::new(CombinatorialMap::parse(&std::fs::read_to_string(data_path(name)).unwrap()).unwrap())
}

pub fn gentle(name: &str) -> Gentle {
    Gentle::new(map(name))
}

/// A random connected loop-free arc system with random rotations. It may violate the
/// genus constraint, so callers filter through `CombinatorialMap::from_file`.
pub fn random_surface_file<R: Rng>(rng: &mut R, points: usize, extra_arcs: usize) -> SurfaceFile {
    let names: Vec<String> = (0..points).map(|i| format!("p{i}")).collect();
    let mut pairs = Vec::new();
    for i in 1..points {
        pairs.push((rng.gen_range(0..i), i));
    }
    for _ in 0..extra_arcs {
        let a = rng.gen_range(0..points);
        let mut b = rng.gen_range(0..points - 1);
        if b >= a {
            b += 1;
        }
        pairs.push((a, b));
    }
    let mut rotation: BTreeMap<String, Vec<String>> = names.iter().map(|n| (n.clone(), Vec::new())).collect();
    let mut arcs = Vec::new();
    for (k, &(t, h)) in pairs.iter().enumerate() {
        let id = format!("x{k}");
        rotation.get_mut(&names[t]).unwrap().push(format!("{id}.tail"));
        rotation.get_mut(&names[h]).unwrap().push(format!("{id}.head"));
        arcs.push(ArcRecord { id, tail: names[t].clone(), head: names[h].clone() });
    }
    for ends in rotation.values_mut() {
        ends.shuffle(rng);
    }
    SurfaceFile { marked_points: names, arcs, rotation }
}
