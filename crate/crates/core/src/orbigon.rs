//! Tree-gons and orbigons as disk diagrams glued from face instances.
//!
//! A diagram is a list of face instances plus a symmetric gluing of sides. The
//! side `(i, x)` is the side of instance `i` running along `arc(x)` that leaves
//! the corner `pred(x)` of that instance; it can only be glued to some `(j, opp x)`.

use crate::gentle::{Gentle, Path};
use crate::surface::{CombinatorialMap, Dart, Face};
use parking_lot::RwLock;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type Side = (u32, Dart);
pub type Corner = (u32, Dart);

/// (marked point, winding).
pub type OrbiPoint = (u32, u32);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrbigonError {
    #[error("sides cannot be glued: {0}")]
    BadGluing(String),
    #[error("fold precondition violated: {0}")]
    BadFold(String),
    #[error("enumeration requires faces with at least 3 sides")]
    NotNmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Angle {
    pub path: Path,
    pub first: Corner,
    pub last: Corner,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Diagram {
    pub faces: Vec<u32>,
    pub glue: BTreeMap<Side, Side>,
}

impl Diagram {
    pub fn single(face: usize) -> Self {
        Diagram { faces: vec![face as u32], glue: BTreeMap::new() }
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    /// Disjoint union; instances of `other` are shifted past those of `self`.
    pub fn union(&self, other: &Diagram) -> Diagram {
        let n = self.faces.len() as u32;
        let mut faces = self.faces.clone();
        faces.extend_from_slice(&other.faces);
        let mut glue = self.glue.clone();
        for (&(i, x), &(j, y)) in &other.glue {
            glue.insert((i + n, x), (j + n, y));
        }
        Diagram { faces, glue }
    }

    fn add_glue(&mut self, a: Side, b: Side) {
        debug_assert_eq!(a.1, CombinatorialMap::opp(b.1));
        self.glue.insert(a, b);
        self.glue.insert(b, a);
    }

    /// Whether side `(i, x)` exists on instance `i`.
    fn has_side(&self, map: &CombinatorialMap, s: Side) -> bool {
        (s.0 as usize) < self.faces.len() && map.face_of_corner(map.pred(s.1)) == self.faces[s.0 as usize] as usize
    }

    pub fn is_boundary_side(&self, s: Side) -> bool {
        !self.glue.contains_key(&s)
    }

    /// Corners of every instance.
    fn corners<'a>(&'a self, map: &'a CombinatorialMap) -> impl Iterator<Item = Corner> + 'a {
        self.faces
            .iter()
            .enumerate()
            .flat_map(move |(i, &f)| map.faces()[f as usize].corners.iter().map(move |&d| (i as u32, d)))
    }

    /// Next corner anticlockwise around the vertex, if the side between is glued.
    fn vertex_next(&self, map: &CombinatorialMap, c: Corner) -> Option<Corner> {
        let x = map.succ(c.1);
        self.glue.get(&(c.0, x)).map(|&(j, _)| (j, x))
    }

    fn is_angle_start(&self, c: Corner) -> bool {
        self.is_boundary_side((c.0, CombinatorialMap::opp(c.1)))
    }

    /// The boundary angle whose first corner is `c`.
    fn angle_at(&self, map: &CombinatorialMap, c: Corner) -> Angle {
        let mut last = c;
        let mut len = 1;
        while let Some(n) = self.vertex_next(map, last) {
            last = n;
            len += 1;
        }
        let point = map.point_of(c.1) as u32;
        Angle { path: Path { point, start: map.position(c.1) as u32, len }, first: c, last }
    }

    /// Boundary angles in traversal order, starting with the angle whose first corner is `start`.
    pub fn boundary_from(&self, map: &CombinatorialMap, start: Corner) -> Vec<Angle> {
        let mut out = Vec::new();
        let mut c = start;
        loop {
            let a = self.angle_at(map, c);
            out.push(a);
            c = (a.last.0, map.face_next(a.last.1));
            if c == start || out.len() > 4 * map.dart_count() * self.faces.len() {
                break;
            }
        }
        out
    }

    /// Boundary angles starting from the least angle-start corner.
    pub fn boundary(&self, map: &CombinatorialMap) -> Vec<Angle> {
        match self.corners(map).find(|&c| self.is_angle_start(c)) {
            Some(c) => self.boundary_from(map, c),
            None => Vec::new(),
        }
    }

    /// Interior vertices as (marked point, winding), sorted.
    pub fn interior_vertices(&self, map: &CombinatorialMap) -> Vec<OrbiPoint> {
        let mut on_boundary = HashSet::new();
        for c in self.corners(map) {
            if self.is_angle_start(c) {
                let mut cur = c;
                on_boundary.insert(cur);
                while let Some(n) = self.vertex_next(map, cur) {
                    cur = n;
                    on_boundary.insert(cur);
                }
            }
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for c in self.corners(map) {
            if on_boundary.contains(&c) || seen.contains(&c) {
                continue;
            }
            let mut cur = c;
            let mut count = 0;
            loop {
                seen.insert(cur);
                count += 1;
                cur = self.vertex_next(map, cur).expect("interior vertex is closed");
                if cur == c {
                    break;
                }
            }
            let p = map.point_of(c.1);
            out.push((p as u32, (count / map.valence(p)) as u32));
        }
        out.sort();
        out
    }

    /// Glued pairs, each once.
    pub fn edges(&self) -> Vec<(Side, Side)> {
        self.glue.iter().filter(|(a, b)| a < b).map(|(a, b)| (*a, *b)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    Join,
    Comma,
    Open,
    Close,
    Arrow(Dart),
}

/// Canonical key: the least bracketed rendering over spanning trees and rotations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(pub Vec<Token>);

impl CanonicalKey {
    pub fn render(&self, gentle: &Gentle) -> String {
        render_tokens(&self.0, gentle)
    }
}

pub fn render_tokens(tokens: &[Token], gentle: &Gentle) -> String {
    let map = gentle.map();
    let mut s = String::new();
    for t in tokens {
        match t {
            Token::Join => s.push('.'),
            Token::Comma => s.push_str(", "),
            Token::Open => s.push('['),
            Token::Close => s.push(']'),
            Token::Arrow(d) => {
                s.push_str(&format!("{}:{}", map.point_name(map.point_of(*d)), map.position(*d)))
            }
        }
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceGraph {
    pub nodes: Vec<u32>,
    /// (instance, instance, arc) per glued pair.
    pub edges: Vec<(u32, u32, usize)>,
    pub spanning_tree: Vec<usize>,
    pub region_labels: Vec<OrbiPoint>,
}

/// An orbigon: a disk diagram rooted at the first corner of one boundary angle.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orbigon {
    pub diagram: Diagram,
    pub root: Corner,
    /// Interior vertices, sorted.
    pub ty: Vec<OrbiPoint>,
}

impl Orbigon {
    pub fn face(map: &CombinatorialMap, corner: Dart) -> Orbigon {
        Orbigon { diagram: Diagram::single(map.face_of_corner(corner)), root: (0, corner), ty: Vec::new() }
    }

    pub fn angles(&self, map: &CombinatorialMap) -> Vec<Angle> {
        self.diagram.boundary_from(map, self.root)
    }

    pub fn reduced(&self, map: &CombinatorialMap) -> Vec<Path> {
        self.angles(map).iter().map(|a| a.path).collect()
    }

    pub fn is_treegon(&self) -> bool {
        self.ty.is_empty()
    }

    pub fn face_graph(&self, map: &CombinatorialMap) -> FaceGraph {
        let edges: Vec<(u32, u32, usize)> = self
            .diagram
            .edges()
            .into_iter()
            .map(|(a, b)| (a.0, b.0, CombinatorialMap::arc_of(a.1)))
            .collect();
        let trees = spanning_trees(self.diagram.faces.len(), &edges);
        FaceGraph {
            nodes: self.diagram.faces.clone(),
            edges,
            spanning_tree: trees.first().cloned().unwrap_or_default(),
            region_labels: self.diagram.interior_vertices(map),
        }
    }

    /// Tree-gon walk for a given spanning tree (as edge indices into `edges()`),
    /// starting at corner `start`.
    fn walk(&self, map: &CombinatorialMap, tree: &BTreeSet<usize>, start: Corner) -> Vec<Token> {
        let edges = self.diagram.edges();
        let edge_of: HashMap<Side, usize> =
            edges.iter().enumerate().flat_map(|(i, (a, b))| [(*a, i), (*b, i)]).collect();
        let mut out = Vec::new();
        let mut seen_cut: HashMap<usize, ()> = HashMap::new();
        let mut c = start;
        loop {
            out.push(Token::Arrow(c.1));
            let x = map.succ(c.1);
            match edge_of.get(&(c.0, x)) {
                Some(e) if tree.contains(e) => {
                    out.push(Token::Join);
                    c = (self.diagram.glue[&(c.0, x)].0, x);
                }
                Some(e) => {
                    out.push(if seen_cut.insert(*e, ()).is_none() { Token::Open } else { Token::Close });
                    c = (c.0, map.face_next(c.1));
                }
                None => {
                    out.push(Token::Comma);
                    c = (c.0, map.face_next(c.1));
                }
            }
            if c == start {
                break;
            }
        }
        out
    }

    /// All renderings (one per spanning tree and per start right after a comma).
    pub fn renderings(&self, map: &CombinatorialMap) -> Vec<Vec<Token>> {
        let edges = self.diagram.edges();
        let simple: Vec<(u32, u32, usize)> = edges.iter().map(|(a, b)| (a.0, b.0, 0)).collect();
        let starts: Vec<Corner> = self.angles(map).iter().map(|a| a.first).collect();
        let mut out = Vec::new();
        for tree in spanning_trees(self.diagram.faces.len(), &simple) {
            let tree: BTreeSet<usize> = tree.into_iter().collect();
            for &s in &starts {
                out.push(self.walk(map, &tree, s));
            }
        }
        out
    }

    pub fn canonical_key(&self, map: &CombinatorialMap) -> CanonicalKey {
        CanonicalKey(self.renderings(map).into_iter().min().expect("nonempty diagram"))
    }

    /// Number of distinct renderings (size of the shift-and-rotation orbit).
    pub fn orbit_size(&self, map: &CombinatorialMap) -> usize {
        self.renderings(map).into_iter().collect::<BTreeSet<_>>().len()
    }

    /// For a tree-gon: σ pairs the two crossings of each glued arc in the walk and
    /// fixes boundary arcs. Entry i is the separator after the i-th arrow.
    pub fn sigma(&self, map: &CombinatorialMap) -> Option<Vec<usize>> {
        if !self.is_treegon() {
            return None;
        }
        let edges = self.diagram.edges();
        let tree: BTreeSet<usize> = (0..edges.len()).collect();
        let walk = self.walk(map, &tree, self.root);
        let arrows: Vec<Dart> =
            walk.iter().filter_map(|t| if let Token::Arrow(d) = t { Some(*d) } else { None }).collect();
        // instance of the corner after each arrow in the walk, to identify crossings
        let mut crossing: HashMap<Side, usize> = HashMap::new();
        let mut corner_inst = Vec::new();
        let mut c = self.root;
        for _ in 0..arrows.len() {
            corner_inst.push(c);
            let x = map.succ(c.1);
            c = match self.diagram.glue.get(&(c.0, x)) {
                Some(&(j, _)) => (j, x),
                None => (c.0, map.face_next(c.1)),
            };
        }
        let mut sigma = vec![0; arrows.len()];
        for (i, &(inst, d)) in corner_inst.iter().enumerate() {
            let side = (inst, map.succ(d));
            match self.diagram.glue.get(&side) {
                None => sigma[i] = i,
                Some(&other) => {
                    if let Some(&j) = crossing.get(&other) {
                        sigma[i] = j;
                        sigma[j] = i;
                    } else {
                        crossing.insert(side, i);
                    }
                }
            }
        }
        Some(sigma)
    }

    /// Corner position of each arrow in the tree-gon walk from the root.
    pub fn walk_corners(&self, map: &CombinatorialMap) -> Vec<Corner> {
        let mut out = Vec::new();
        let mut c = self.root;
        loop {
            out.push(c);
            let x = map.succ(c.1);
            c = match self.diagram.glue.get(&(c.0, x)) {
                Some(&(j, _)) => (j, x),
                None => (c.0, map.face_next(c.1)),
            };
            if c == self.root {
                break;
            }
        }
        out
    }

    /// Count of segments in the tree-gon sequence (commas plus bracket tokens).
    pub fn unreduced_segments(&self, map: &CombinatorialMap) -> usize {
        let key = self.canonical_key(map);
        key.0.iter().filter(|t| matches!(t, Token::Comma | Token::Open | Token::Close)).count()
    }

    pub fn render_reduced(&self, gentle: &Gentle) -> String {
        self.reduced(gentle.map()).iter().map(|p| gentle.render_path(p)).collect::<Vec<_>>().join(", ")
    }

    pub fn render_type(&self, map: &CombinatorialMap) -> String {
        let parts: Vec<String> =
            self.ty.iter().map(|(m, r)| format!("({},{})", map.point_name(*m as usize), r)).collect();
        format!("{{{}}}", parts.join(","))
    }

    // ---- constructions ----

    /// Stitch `y` onto `x` by gluing boundary side `at_x` of `x` to boundary side
    /// `at_y` of `y`. The root of `x` is kept.
    pub fn stitch(&self, map: &CombinatorialMap, y: &Orbigon, at_x: Side, at_y: Side) -> Result<Orbigon, OrbigonError> {
        if at_x.1 != CombinatorialMap::opp(at_y.1) {
            return Err(OrbigonError::BadGluing("sides run along different arcs".into()));
        }
        if !self.diagram.has_side(map, at_x) || !y.diagram.has_side(map, at_y) {
            return Err(OrbigonError::BadGluing("side not present".into()));
        }
        if !self.diagram.is_boundary_side(at_x) || !y.diagram.is_boundary_side(at_y) {
            return Err(OrbigonError::BadGluing("side is not on the boundary".into()));
        }
        let n = self.diagram.faces.len() as u32;
        let mut d = self.diagram.union(&y.diagram);
        d.add_glue(at_x, (at_y.0 + n, at_y.1));
        let root = keep_root(map, &d, self.root);
        let mut ty = self.ty.clone();
        ty.extend_from_slice(&y.ty);
        ty.sort();
        Ok(Orbigon { diagram: d, root, ty })
    }

    /// Fold the boundary angle with index `angle` (a full-turn angle) inward.
    pub fn fold(&self, map: &CombinatorialMap, angle: usize) -> Result<Orbigon, OrbigonError> {
        let angles = self.angles(map);
        if angles.len() < 3 {
            return Err(OrbigonError::BadFold("needs at least three boundary angles".into()));
        }
        let a = angles[angle];
        let v = map.valence(a.path.point as usize) as u32;
        if a.path.len % v != 0 {
            return Err(OrbigonError::BadFold("angle is not a whole number of full turns".into()));
        }
        let before = (a.first.0, CombinatorialMap::opp(a.first.1));
        let after = (a.last.0, map.succ(a.last.1));
        let mut d = self.diagram.clone();
        d.add_glue(before, after);
        let root = keep_root(map, &d, self.root);
        let mut ty = self.ty.clone();
        ty.push((a.path.point, a.path.len / v));
        ty.sort();
        Ok(Orbigon { diagram: d, root, ty })
    }
}

fn keep_root(map: &CombinatorialMap, d: &Diagram, root: Corner) -> Corner {
    if d.is_angle_start(root) {
        root
    } else {
        d.boundary(map)[0].first
    }
}

/// All spanning trees of a multigraph on `n` nodes, as sorted edge index lists.
pub fn spanning_trees(n: usize, edges: &[(u32, u32, usize)]) -> Vec<Vec<usize>> {
    let m = edges.len();
    if n == 0 || m + 1 < n {
        return if n <= 1 { vec![Vec::new()] } else { Vec::new() };
    }
    let k = n - 1;
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn rec(
        start: usize,
        k: usize,
        n: usize,
        edges: &[(u32, u32, usize)],
        chosen: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if chosen.len() == k {
            let mut parent: Vec<usize> = (0..n).collect();
            fn find(p: &mut [usize], x: usize) -> usize {
                let mut x = x;
                while p[x] != x {
                    x = p[x];
                }
                x
            }
            for &e in chosen.iter() {
                let (a, b) = (find(&mut parent, edges[e].0 as usize), find(&mut parent, edges[e].1 as usize));
                if a == b {
                    return;
                }
                parent[a] = b;
            }
            out.push(chosen.clone());
            return;
        }
        for e in start..edges.len() {
            if edges.len() - e < k - chosen.len() {
                break;
            }
            chosen.push(e);
            rec(e + 1, k, n, edges, chosen, out);
            chosen.pop();
        }
    }
    rec(0, k, n, edges, &mut chosen, &mut out);
    out
}

// ---------------------------------------------------------------------------
// Demand-driven enumeration

type MemoKey = (Vec<Path>, u32);

/// Enumerates rooted orbigons with a prescribed reduced sequence by undoing the
/// last stitch or fold at the first non-trivial angle.
pub struct OrbigonEngine {
    gentle: Gentle,
    /// If set, only these orbifold points may appear in types.
    allowed: Option<BTreeSet<OrbiPoint>>,
    max_winding: Option<u32>,
    memo: RwLock<HashMap<MemoKey, Arc<Vec<Arc<Orbigon>>>>>,
}

impl OrbigonEngine {
    pub fn new(gentle: Gentle) -> Result<Self, OrbigonError> {
        if gentle.map().faces().iter().any(|f| f.size() < 3) {
            return Err(OrbigonError::NotNmd);
        }
        Ok(OrbigonEngine { gentle, allowed: None, max_winding: None, memo: RwLock::new(HashMap::new()) })
    }

    pub fn with_allowed(mut self, allowed: BTreeSet<OrbiPoint>) -> Self {
        self.allowed = Some(allowed);
        self
    }

    pub fn with_max_winding(mut self, j: u32) -> Self {
        self.max_winding = Some(j);
        self
    }

    pub fn gentle(&self) -> &Gentle {
        &self.gentle
    }

    pub fn memo_size(&self) -> usize {
        self.memo.read().len()
    }

    fn map(&self) -> &CombinatorialMap {
        self.gentle.map()
    }

    /// Whether consecutive angles of the pattern meet across arcs (including the wrap-around).
    pub fn is_closed_pattern(&self, pattern: &[Path]) -> bool {
        let k = pattern.len();
        k > 0
            && (0..k).all(|l| {
                let next = &pattern[(l + 1) % k];
                self.gentle.start_dart(next) == CombinatorialMap::opp(self.gentle.end_dart(&pattern[l]))
            })
    }

    /// Rooted orbigons whose boundary, read from the root, is `pattern`, with at most
    /// `max_type` interior vertices.
    pub fn enumerate_matching(&self, pattern: &[Path], max_type: u32) -> Arc<Vec<Arc<Orbigon>>> {
        let pattern: Vec<Path> =
            pattern.iter().map(|p| self.gentle.norm(p.point, p.start, p.len)).collect();
        if !self.is_closed_pattern(&pattern) {
            return Arc::new(Vec::new());
        }
        self.enumerate_closed(pattern, max_type)
    }

    fn enumerate_closed(&self, pattern: Vec<Path>, max_type: u32) -> Arc<Vec<Arc<Orbigon>>> {
        let key = (pattern, max_type);
        if let Some(v) = self.memo.read().get(&key) {
            return v.clone();
        }
        let result = Arc::new(self.compute(&key.0, max_type));
        self.memo.write().entry(key).or_insert(result).clone()
    }

    fn compute(&self, p: &[Path], max_type: u32) -> Vec<Arc<Orbigon>> {
        let map = self.map();
        let k = p.len();
        let total: u32 = p.iter().map(|x| x.len).sum();
        let budget = k as i64 - 2 + 2 * i64::from(max_type);
        if budget < 1 || i64::from(total) > 3 * budget {
            return Vec::new();
        }
        let Some(i) = p.iter().position(|x| x.len >= 2) else {
            // a single face of exactly this size
            let d0 = self.gentle.start_dart(&p[0]);
            let face = &map.faces()[map.face_of_corner(d0)];
            return if face.size() == k { vec![Arc::new(Orbigon::face(map, d0))] } else { Vec::new() };
        };
        let s = self.gentle.start_dart(&p[i]);
        let x = map.succ(s);
        let y = CombinatorialMap::opp(x);
        let eta = self.gentle.path_from(s, 1);
        let xi = self.gentle.path_from(x, p[i].len - 1);
        let mut out = Vec::new();

        // case A: the far end of the cut arc is a boundary vertex inside angle j
        for j in 0..k {
            if j == i {
                continue;
            }
            for t in 1..p[j].len {
                if self.gentle.corner(&p[j], t) != y {
                    continue;
                }
                let beta = Path { len: t, ..p[j] };
                let gamma = self.gentle.path_from(y, p[j].len - t);
                let mut p1 = vec![xi];
                let mut l = (i + 1) % k;
                while l != j {
                    p1.push(p[l]);
                    l = (l + 1) % k;
                }
                p1.push(beta);
                let mut p2 = vec![gamma];
                let mut l = (j + 1) % k;
                while l != i {
                    p2.push(p[l]);
                    l = (l + 1) % k;
                }
                p2.push(eta);
                let r1 = self.enumerate_closed(p1.clone(), max_type);
                if r1.is_empty() {
                    continue;
                }
                let r2 = self.enumerate_closed(p2.clone(), max_type);
                for o1 in r1.iter() {
                    for o2 in r2.iter() {
                        if o1.ty.len() + o2.ty.len() > max_type as usize {
                            continue;
                        }
                        out.push(Arc::new(self.join(p, i, j, &p1, o1, o2, x)));
                    }
                }
            }
        }

        // case B: the far end is an interior vertex of winding r
        if max_type >= 1 {
            let mp = map.point_of(y) as u32;
            let v = map.valence(mp as usize) as u32;
            let mut r = 1;
            while (r * v + total) as i64 <= 3 * budget {
                if self.max_winding.map_or(true, |j| r <= j)
                    && self.allowed.as_ref().map_or(true, |a| a.contains(&(mp, r)))
                {
                    let ell = self.gentle.path_from(y, r * v);
                    let mut q: Vec<Path> = p[..i].to_vec();
                    q.push(eta);
                    q.push(ell);
                    q.push(xi);
                    q.extend_from_slice(&p[i + 1..]);
                    for o in self.enumerate_closed(q, max_type - 1).iter() {
                        out.push(Arc::new(self.close(o, i + 1, (mp, r))));
                    }
                }
                r += 1;
            }
        }
        out
    }

    /// Reassemble from the two pieces of case A.
    #[allow(clippy::too_many_arguments)]
    fn join(&self, p: &[Path], i: usize, j: usize, p1: &[Path], o1: &Orbigon, o2: &Orbigon, x: Dart) -> Orbigon {
        let map = self.map();
        let k = p.len();
        let n1 = o1.diagram.faces.len() as u32;
        let mut d = o1.diagram.union(&o2.diagram);
        d.add_glue((o1.root.0, CombinatorialMap::opp(x)), (o2.root.0 + n1, x));
        let root = if i == 0 {
            let a2 = o2.angles(map);
            let c = a2.last().unwrap().first;
            (c.0 + n1, c.1)
        } else if j == 0 {
            o1.angles(map).last().unwrap().first
        } else if j < i {
            o1.angles(map)[k - i].first
        } else {
            let c = o2.angles(map)[k - j].first;
            (c.0 + n1, c.1)
        };
        let _ = p1;
        let mut ty = o1.ty.clone();
        ty.extend_from_slice(&o2.ty);
        ty.sort();
        let o = Orbigon { diagram: d, root, ty };
        debug_assert_eq!(o.reduced(map), p, "case A reassembly");
        o
    }

    /// Glue the two sides flanking the full-turn angle at index `at` (case B).
    fn close(&self, o: &Orbigon, at: usize, point: OrbiPoint) -> Orbigon {
        let map = self.map();
        let angles = o.angles(map);
        let a = angles[at];
        let mut d = o.diagram.clone();
        d.add_glue((a.first.0, CombinatorialMap::opp(a.first.1)), (a.last.0, map.succ(a.last.1)));
        let mut ty = o.ty.clone();
        ty.push(point);
        ty.sort();
        Orbigon { diagram: d, root: o.root, ty }
    }
}

// ---------------------------------------------------------------------------
// Forward oracle

#[derive(Debug, Clone, Serialize)]
pub struct CensusEntry {
    pub key: String,
    pub ty: Vec<OrbiPoint>,
    /// Reduced sequence rotated to its least rotation.
    #[serde(skip)]
    pub reduced: Vec<Path>,
    pub faces: usize,
}

/// Census of orbigons keyed by canonical key.
pub type Census = BTreeMap<CanonicalKey, (Orbigon, CensusEntry)>;

/// Least rotation of a cyclic sequence.
pub fn least_rotation<T: Ord + Clone>(v: &[T]) -> Vec<T> {
    (0..v.len())
        .map(|s| v[s..].iter().chain(v[..s].iter()).cloned().collect::<Vec<T>>())
        .min()
        .unwrap_or_default()
}

/// Breadth-first closure of the basic tree-gons under stitching a face onto a
/// boundary side and folding full-turn boundary angles.
pub fn oracle_closure(gentle: &Gentle, max_faces: usize, max_type: u32) -> Census {
    let map = gentle.map();
    let mut census: Census = BTreeMap::new();
    let mut queue = VecDeque::new();
    let push = |o: Orbigon, census: &mut Census, queue: &mut VecDeque<Orbigon>| {
        let key = o.canonical_key(map);
        if census.contains_key(&key) {
            return;
        }
        let entry = CensusEntry {
            key: key.render(gentle),
            ty: o.ty.clone(),
            reduced: least_rotation(&o.reduced(map)),
            faces: o.diagram.face_count(),
        };
        census.insert(key, (o.clone(), entry));
        queue.push_back(o);
    };
    for f in map.faces() {
        push(Orbigon::face(map, f.corners[0]), &mut census, &mut queue);
    }
    while let Some(o) = queue.pop_front() {
        if o.diagram.face_count() < max_faces {
            for a in o.angles(map) {
                // boundary side after the angle
                let side = (a.last.0, map.succ(a.last.1));
                let partner = CombinatorialMap::opp(side.1);
                let face = map.face_of_corner(map.pred(partner));
                let y = Orbigon::face(map, map.faces()[face].corners[0]);
                if let Ok(s) = o.stitch(map, &y, side, (0, partner)) {
                    push(s, &mut census, &mut queue);
                }
            }
        }
        if (o.ty.len() as u32) < max_type {
            let angles = o.angles(map);
            for (idx, a) in angles.iter().enumerate() {
                let v = map.valence(a.path.point as usize) as u32;
                if a.path.len % v == 0 {
                    if let Ok(f) = o.fold(map, idx) {
                        push(f, &mut census, &mut queue);
                    }
                }
            }
        }
    }
    census
}

impl fmt::Display for CensusEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | faces={}", self.key, self.faces)
    }
}

// ---------------------------------------------------------------------------
// Census cross-check

#[derive(Debug, Clone, Serialize)]
pub struct CensusComparison {
    pub max_faces: usize,
    pub max_type: u32,
    pub oracle_size: usize,
    pub engine_size: usize,
    pub patterns_checked: usize,
    pub only_in_oracle: Vec<String>,
    pub only_in_engine: Vec<String>,
    /// Entries whose bracketed rendering does not have `commas = reduced length` and
    /// `brackets = 2·|type|`.
    pub token_failures: Vec<String>,
    /// Entries whose face graph violates `nodes − edges + (|type| + 1) = 2`, or whose
    /// interior vertices disagree with the type.
    pub euler_failures: Vec<String>,
    /// Entries with reduced length below 3, rendered with their type.
    pub short_sequences: Vec<String>,
}

impl CensusComparison {
    pub fn censuses_agree(&self) -> bool {
        self.only_in_oracle.is_empty() && self.only_in_engine.is_empty()
    }
    pub fn identities_hold(&self) -> bool {
        self.token_failures.is_empty() && self.euler_failures.is_empty()
    }
}

/// Closed angle sequences (one rotation each) with at most `max_angles` angles and
/// at most `max_corners` corners in total.
pub fn closed_patterns(gentle: &Gentle, max_angles: usize, max_corners: u32) -> Vec<Vec<Path>> {
    let map = gentle.map();
    let mut out = BTreeSet::new();
    fn grow(
        gentle: &Gentle,
        first: Path,
        seq: &mut Vec<Path>,
        used: u32,
        max_angles: usize,
        max_corners: u32,
        out: &mut BTreeSet<Vec<Path>>,
    ) {
        let map = gentle.map();
        let last = *seq.last().unwrap();
        let next_start = CombinatorialMap::opp(gentle.end_dart(&last));
        if next_start == gentle.start_dart(&first) {
            out.insert(least_rotation(seq));
        }
        if seq.len() == max_angles {
            return;
        }
        for len in 1..=max_corners.saturating_sub(used) {
            let p = Path { point: map.point_of(next_start) as u32, start: map.position(next_start) as u32, len };
            seq.push(p);
            grow(gentle, first, seq, used + len, max_angles, max_corners, out);
            seq.pop();
        }
    }
    for d in 0..map.dart_count() {
        for len in 1..=max_corners {
            let p = gentle.path_from(d, len);
            let mut seq = vec![p];
            grow(gentle, p, &mut seq, len, max_angles, max_corners, &mut out);
        }
    }
    out.into_iter().collect()
}

fn token_check(o: &Orbigon, map: &CombinatorialMap) -> bool {
    let key = o.canonical_key(map);
    let commas = key.0.iter().filter(|t| matches!(t, Token::Comma)).count();
    let brackets = key.0.iter().filter(|t| matches!(t, Token::Open | Token::Close)).count();
    commas == o.reduced(map).len() && brackets == 2 * o.ty.len() && o.unreduced_segments(map) == commas + brackets
}

fn euler_check(o: &Orbigon, map: &CombinatorialMap) -> bool {
    let fg = o.face_graph(map);
    let (v, e, t) = (fg.nodes.len() as i64, fg.edges.len() as i64, o.ty.len() as i64);
    v - e + t + 1 == 2 && fg.region_labels == o.ty && fg.spanning_tree.len() + 1 == fg.nodes.len()
}

/// Compare the forward oracle with the demand-driven enumeration on every closed
/// pattern that fits the face budget, and check the per-entry identities.
pub fn compare_census(gentle: &Gentle, max_faces: usize, max_type: u32) -> Result<CensusComparison, OrbigonError> {
    let map = gentle.map();
    let engine = OrbigonEngine::new(gentle.clone())?;
    let oracle = oracle_closure(gentle, max_faces, max_type);
    let max_face = map.faces().iter().map(Face::size).max().unwrap_or(0);
    // k − 2 + 2t = Σ (size − 2) ≥ faces, so k ≤ 2 + max_faces·(max_face − 2)
    let max_angles = 2 + max_faces * max_face.saturating_sub(2);
    let max_corners = (max_faces * max_face) as u32;
    let patterns = closed_patterns(gentle, max_angles, max_corners);
    let found: Vec<Vec<(CanonicalKey, Orbigon)>> = {
        use rayon::prelude::*;
        patterns
            .par_iter()
            .map(|p| {
                engine
                    .enumerate_matching(p, max_type)
                    .iter()
                    .filter(|o| o.diagram.face_count() <= max_faces)
                    .map(|o| (o.canonical_key(map), (**o).clone()))
                    .collect()
            })
            .collect()
    };
    let mut engine_census: BTreeMap<CanonicalKey, Orbigon> = BTreeMap::new();
    for (k, o) in found.into_iter().flatten() {
        engine_census.entry(k).or_insert(o);
    }
    let describe = |o: &Orbigon| format!("{} type {}", o.render_reduced(gentle), o.render_type(map));
    let only_in_oracle =
        oracle.iter().filter(|(k, _)| !engine_census.contains_key(k)).map(|(_, (o, _))| describe(o)).collect();
    let only_in_engine =
        engine_census.iter().filter(|(k, _)| !oracle.contains_key(k)).map(|(_, o)| describe(o)).collect();
    let mut token_failures = Vec::new();
    let mut euler_failures = Vec::new();
    let mut short_sequences = Vec::new();
    for (o, _) in oracle.values() {
        if !token_check(o, map) {
            token_failures.push(describe(o));
        }
        if !euler_check(o, map) {
            euler_failures.push(describe(o));
        }
        if o.reduced(map).len() < 3 {
            short_sequences.push(describe(o));
        }
    }
    Ok(CensusComparison {
        max_faces,
        max_type,
        oracle_size: oracle.len(),
        engine_size: engine_census.len(),
        patterns_checked: patterns.len(),
        only_in_oracle,
        only_in_engine,
        token_failures,
        euler_failures,
        short_sequences,
    })
}
