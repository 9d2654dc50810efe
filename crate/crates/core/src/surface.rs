//! Arc collections on closed marked surfaces, stored as rotation systems.
//!
//! Darts are arc ends: dart `2a` is the tail of arc `a`, dart `2a + 1` its head.
//! A corner is named by the dart it starts from: corner `d` is the anticlockwise
//! angle from `arc(d)` to `arc(succ(d))` at the marked point of `d`.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};
use thiserror::Error;

pub type Dart = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SurfaceError {
    #[error("malformed surface file: {0}")]
    Malformed(String),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("dangling arc end `{0}`")]
    DanglingArcEnd(String),
    #[error("arc end `{0}` is missing from the rotation at its marked point")]
    MissingRotationEnd(String),
    #[error("the graph of marked points and arcs is disconnected")]
    Disconnected,
    #[error("genus constraint violated: 2 - 2g - n = {0} is not negative")]
    GenusConstraint(i64),
}

impl SurfaceError {
    /// Stable numeric code per error kind.
    pub fn code(&self) -> u8 {
        match self {
            SurfaceError::Malformed(_) => 1,
            SurfaceError::DuplicateId(_) => 2,
            SurfaceError::DanglingArcEnd(_) => 3,
            SurfaceError::MissingRotationEnd(_) => 4,
            SurfaceError::Disconnected => 5,
            SurfaceError::GenusConstraint(_) => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Tail,
    Head,
}

/// On-disk surface format.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SurfaceFile {
    pub marked_points: Vec<String>,
    pub arcs: Vec<ArcRecord>,
    pub rotation: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ArcRecord {
    pub id: String,
    pub tail: String,
    pub head: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    /// Corners in traversal order; each corner composes to zero with the next.
    pub corners: Vec<Dart>,
}

impl Face {
    pub fn size(&self) -> usize {
        self.corners.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FaceSign {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Nmd,
    Nl2,
    Dimer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Witness {
    SmallFace { face: usize, size: usize },
    LoopArc { arc: String },
    SharedEndpoints { first: String, second: String },
    MixedFace { face: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct SurfaceReport {
    pub genus: i64,
    pub marked_points: usize,
    pub arcs: usize,
    pub faces: usize,
    pub euler_char_marked: i64,
    pub nmd: bool,
    pub nl2: bool,
    pub dimer: bool,
    pub face_signs: Option<Vec<FaceSign>>,
}

#[derive(Debug, Clone)]
pub struct CombinatorialMap {
    points: Vec<String>,
    arcs: Vec<ArcRecord>,
    arc_ends: Vec<(usize, usize)>,
    rotation: Vec<Vec<Dart>>,
    dart_pos: Vec<usize>,
    faces: Vec<Face>,
    corner_face: Vec<usize>,
    corner_index: Vec<usize>,
}

fn parse_end(token: &str) -> Option<(&str, End)> {
    let (arc, end) = token.rsplit_once('.')?;
    match end {
        "tail" => Some((arc, End::Tail)),
        "head" => Some((arc, End::Head)),
        _ => None,
    }
}

impl CombinatorialMap {
    pub fn parse(text: &str) -> Result<Self, SurfaceError> {
        let file: SurfaceFile =
            serde_json::from_str(text).map_err(|e| SurfaceError::Malformed(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &SurfaceFile) -> Result<Self, SurfaceError> {
        let map = Self::assemble(file)?;
        let chi = map.euler_char_marked();
        if chi >= 0 {
            return Err(SurfaceError::GenusConstraint(chi));
        }
        Ok(map)
    }

    /// Everything in `from_file` except the genus constraint.
    fn assemble(file: &SurfaceFile) -> Result<Self, SurfaceError> {
        let mut point_index = HashMap::new();
        for (i, p) in file.marked_points.iter().enumerate() {
            if point_index.insert(p.clone(), i).is_some() {
                return Err(SurfaceError::DuplicateId(p.clone()));
            }
        }
        let mut arc_index = HashMap::new();
        let mut arc_ends = Vec::new();
        for (i, a) in file.arcs.iter().enumerate() {
            if point_index.contains_key(&a.id) || arc_index.insert(a.id.clone(), i).is_some() {
                return Err(SurfaceError::DuplicateId(a.id.clone()));
            }
            let tail = *point_index
                .get(&a.tail)
                .ok_or_else(|| SurfaceError::DanglingArcEnd(format!("{}.tail", a.id)))?;
            let head = *point_index
                .get(&a.head)
                .ok_or_else(|| SurfaceError::DanglingArcEnd(format!("{}.head", a.id)))?;
            arc_ends.push((tail, head));
        }
        for p in file.rotation.keys() {
            if !point_index.contains_key(p) {
                return Err(SurfaceError::Malformed(format!("rotation for unknown point `{p}`")));
            }
        }
        let n_darts = 2 * file.arcs.len();
        let mut seen = vec![false; n_darts];
        let mut rotation = vec![Vec::new(); file.marked_points.len()];
        let mut dart_pos = vec![0; n_darts];
        for (pi, p) in file.marked_points.iter().enumerate() {
            let Some(tokens) = file.rotation.get(p) else { continue };
            for tok in tokens {
                let (arc, end) = parse_end(tok)
                    .ok_or_else(|| SurfaceError::Malformed(format!("bad arc end `{tok}`")))?;
                let &a = arc_index
                    .get(arc)
                    .ok_or_else(|| SurfaceError::DanglingArcEnd(tok.clone()))?;
                let (d, at) = match end {
                    End::Tail => (2 * a, arc_ends[a].0),
                    End::Head => (2 * a + 1, arc_ends[a].1),
                };
                if at != pi {
                    return Err(SurfaceError::DanglingArcEnd(format!("{tok} listed at `{p}`")));
                }
                if seen[d] {
                    return Err(SurfaceError::DuplicateId(tok.clone()));
                }
                seen[d] = true;
                dart_pos[d] = rotation[pi].len();
                rotation[pi].push(d);
            }
        }
        if let Some(d) = seen.iter().position(|s| !s) {
            let end = if d % 2 == 0 { "tail" } else { "head" };
            return Err(SurfaceError::MissingRotationEnd(format!("{}.{end}", file.arcs[d / 2].id)));
        }
        // connectivity
        let n = file.marked_points.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(t, h) in &arc_ends {
            let (a, b) = (find(&mut parent, t), find(&mut parent, h));
            parent[a] = b;
        }
        let root = if n > 0 { find(&mut parent, 0) } else { 0 };
        if n == 0 || (0..n).any(|i| find(&mut parent, i) != root) {
            return Err(SurfaceError::Disconnected);
        }
        let mut map = CombinatorialMap {
            points: file.marked_points.clone(),
            arcs: file.arcs.clone(),
            arc_ends,
            rotation,
            dart_pos,
            faces: Vec::new(),
            corner_face: vec![0; n_darts],
            corner_index: vec![0; n_darts],
        };
        map.trace_faces();
        Ok(map)
    }

    fn trace_faces(&mut self) {
        let n = self.dart_count();
        let mut used = vec![false; n];
        let mut faces = Vec::new();
        for p in 0..self.points.len() {
            for &start in &self.rotation[p] {
                if used[start] {
                    continue;
                }
                let mut corners = Vec::new();
                let mut c = start;
                while !used[c] {
                    used[c] = true;
                    self.corner_face[c] = faces.len();
                    self.corner_index[c] = corners.len();
                    corners.push(c);
                    c = self.face_next(c);
                }
                faces.push(Face { corners });
            }
        }
        self.faces = faces;
    }

    pub fn to_file(&self) -> SurfaceFile {
        let mut rotation = BTreeMap::new();
        for (p, rot) in self.rotation.iter().enumerate() {
            rotation.insert(self.points[p].clone(), rot.iter().map(|&d| self.dart_label(d)).collect());
        }
        SurfaceFile { marked_points: self.points.clone(), arcs: self.arcs.clone(), rotation }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("surface serializes")
    }

    pub fn dart_label(&self, d: Dart) -> String {
        let end = if d % 2 == 0 { "tail" } else { "head" };
        format!("{}.{end}", self.arcs[d / 2].id)
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }
    pub fn dart_count(&self) -> usize {
        2 * self.arcs.len()
    }
    pub fn point_name(&self, p: usize) -> &str {
        &self.points[p]
    }
    pub fn point_names(&self) -> &[String] {
        &self.points
    }
    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }
    pub fn arc_name(&self, a: usize) -> &str {
        &self.arcs[a].id
    }
    pub fn arc_index(&self, name: &str) -> Option<usize> {
        self.arcs.iter().position(|a| a.id == name)
    }
    /// (tail point, head point) of an arc.
    pub fn arc_endpoints(&self, a: usize) -> (usize, usize) {
        self.arc_ends[a]
    }
    pub fn rotation(&self, p: usize) -> &[Dart] {
        &self.rotation[p]
    }
    pub fn valence(&self, p: usize) -> usize {
        self.rotation[p].len()
    }
    pub fn max_valence(&self) -> usize {
        self.rotation.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn arc_of(d: Dart) -> usize {
        d / 2
    }
    pub fn end_of(d: Dart) -> End {
        if d % 2 == 0 {
            End::Tail
        } else {
            End::Head
        }
    }
    pub fn opp(d: Dart) -> Dart {
        d ^ 1
    }
    pub fn point_of(&self, d: Dart) -> usize {
        let (t, h) = self.arc_ends[d / 2];
        if d % 2 == 0 {
            t
        } else {
            h
        }
    }
    pub fn position(&self, d: Dart) -> usize {
        self.dart_pos[d]
    }
    pub fn dart_at(&self, p: usize, i: usize) -> Dart {
        let rot = &self.rotation[p];
        rot[i % rot.len()]
    }
    pub fn succ(&self, d: Dart) -> Dart {
        let p = self.point_of(d);
        self.dart_at(p, self.dart_pos[d] + 1)
    }
    pub fn pred(&self, d: Dart) -> Dart {
        let p = self.point_of(d);
        let v = self.valence(p);
        self.dart_at(p, self.dart_pos[d] + v - 1)
    }
    /// Next corner along the face containing corner `d`.
    pub fn face_next(&self, d: Dart) -> Dart {
        Self::opp(self.succ(d))
    }
    pub fn face_prev(&self, d: Dart) -> Dart {
        self.pred(Self::opp(d))
    }
    /// ℤ₂-degree of corner `d`: 0 when both arc ends point the same way.
    pub fn corner_degree(&self, d: Dart) -> u8 {
        u8::from(Self::end_of(d) != Self::end_of(self.succ(d)))
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }
    pub fn face_of_corner(&self, d: Dart) -> usize {
        self.corner_face[d]
    }
    pub fn index_in_face(&self, d: Dart) -> usize {
        self.corner_index[d]
    }
    /// The face lying to the left of the arc (containing the corner at its tail).
    pub fn left_face(&self, a: usize) -> usize {
        self.corner_face[2 * a]
    }
    pub fn right_face(&self, a: usize) -> usize {
        self.corner_face[2 * a + 1]
    }

    pub fn euler_char(&self) -> i64 {
        self.points.len() as i64 - self.arcs.len() as i64 + self.faces.len() as i64
    }
    pub fn genus(&self) -> i64 {
        (2 - self.euler_char()) / 2
    }
    pub fn euler_char_marked(&self) -> i64 {
        2 - 2 * self.genus() - self.points.len() as i64
    }

    pub fn check_condition(&self, which: Condition) -> Result<(), Witness> {
        match which {
            Condition::Nmd => match self.faces.iter().position(|f| f.size() < 3) {
                Some(face) => Err(Witness::SmallFace { face, size: self.faces[face].size() }),
                None => Ok(()),
            },
            Condition::Nl2 => {
                let mut pairs: HashMap<(usize, usize), usize> = HashMap::new();
                for (a, &(t, h)) in self.arc_ends.iter().enumerate() {
                    if t == h {
                        return Err(Witness::LoopArc { arc: self.arcs[a].id.clone() });
                    }
                    let key = (t.min(h), t.max(h));
                    if let Some(&b) = pairs.get(&key) {
                        return Err(Witness::SharedEndpoints {
                            first: self.arcs[b].id.clone(),
                            second: self.arcs[a].id.clone(),
                        });
                    }
                    pairs.insert(key, a);
                }
                Ok(())
            }
            Condition::Dimer => {
                for (i, _) in self.faces.iter().enumerate() {
                    if self.face_sign(i).is_none() {
                        return Err(Witness::MixedFace { face: i });
                    }
                }
                Ok(())
            }
        }
    }

    /// Sign of a face whose sides are all traversed along (negative) or all
    /// against (positive) their arc orientation.
    pub fn face_sign(&self, f: usize) -> Option<FaceSign> {
        let along: HashSet<bool> = self.faces[f]
            .corners
            .iter()
            .map(|&c| Self::end_of(self.succ(c)) == End::Tail)
            .collect();
        match (along.len(), along.contains(&true)) {
            (1, true) => Some(FaceSign::Negative),
            (1, false) => Some(FaceSign::Positive),
            _ => None,
        }
    }

    pub fn report(&self) -> SurfaceReport {
        let dimer = self.check_condition(Condition::Dimer).is_ok();
        SurfaceReport {
            genus: self.genus(),
            marked_points: self.points.len(),
            arcs: self.arcs.len(),
            faces: self.faces.len(),
            euler_char_marked: self.euler_char_marked(),
            nmd: self.check_condition(Condition::Nmd).is_ok(),
            nl2: self.check_condition(Condition::Nl2).is_ok(),
            dimer,
            face_signs: dimer
                .then(|| (0..self.faces.len()).map(|f| self.face_sign(f).unwrap()).collect()),
        }
    }

    /// Face names used for the marked points of the dual collection.
    pub fn face_name(&self, f: usize) -> String {
        format!("f{f}")
    }

    /// The Koszul dual arc collection: faces become marked points and each arc
    /// `a` is replaced by a transverse arc with the same id, running from the
    /// face on the right of `a` to the face on its left. The result is not checked
    /// against the genus constraint; see [`CombinatorialMap::from_file`].
    pub fn dual(&self) -> CombinatorialMap {
        let marked_points: Vec<String> = (0..self.faces.len()).map(|f| self.face_name(f)).collect();
        let arcs = (0..self.arcs.len())
            .map(|a| ArcRecord {
                id: self.arcs[a].id.clone(),
                tail: self.face_name(self.right_face(a)),
                head: self.face_name(self.left_face(a)),
            })
            .collect();
        let mut rotation = BTreeMap::new();
        for (f, face) in self.faces.iter().enumerate() {
            // walk the sides of the face; side after corner c runs along succ(c)
            let mut ends: Vec<String> = face
                .corners
                .iter()
                .map(|&c| {
                    let x = self.succ(c);
                    let a = &self.arcs[x / 2].id;
                    if Self::end_of(x) == End::Head {
                        format!("{a}.head")
                    } else {
                        format!("{a}.tail")
                    }
                })
                .collect();
            ends.reverse();
            rotation.insert(marked_points[f].clone(), ends);
        }
        let file = SurfaceFile { marked_points, arcs, rotation };
        // a sphere with at most two faces has a dual that fails the genus constraint
        CombinatorialMap::assemble(&file).expect("dual of a connected map is connected")
    }

    /// The dual corner corresponding to corner `d`: the angle at the face of
    /// `d` from the dual of `arc(succ d)` to the dual of `arc(d)`.
    pub fn dual_corner(&self, dual: &CombinatorialMap, d: Dart) -> Dart {
        // the dual arc keeps the end type of the side it crosses
        let x = self.succ(d);
        let dual_dart = x;
        debug_assert_eq!(dual.point_of(dual_dart), self.face_of_corner(d));
        dual_dart
    }

    /// For the double dual `dd = self.dual().dual()`, the original marked point
    /// corresponding to each point of `dd` (each point of `dd` is a face of the
    /// dual, whose corners are the corners around one original point).
    pub fn double_dual_points(&self, dual: &CombinatorialMap) -> Vec<usize> {
        let mut out = vec![usize::MAX; dual.faces.len()];
        for d in 0..self.dart_count() {
            let f = dual.face_of_corner(self.dual_corner(dual, d));
            out[f] = self.point_of(d);
        }
        out
    }

    /// True if `other` equals `self` after renaming its points through
    /// `point_map` (other point -> self point), optionally with every arc reversed.
    /// Arcs are matched by id; rotations are compared as cyclic sequences.
    pub fn matches_relabeled(&self, other: &CombinatorialMap, point_map: &[usize], reversed: bool) -> bool {
        if other.points.len() != self.points.len() || other.arcs.len() != self.arcs.len() {
            return false;
        }
        let arc_map: Option<Vec<usize>> =
            other.arcs.iter().map(|a| self.arc_index(&a.id)).collect();
        let Some(arc_map) = arc_map else { return false };
        let map_dart = |d: Dart| 2 * arc_map[d / 2] + usize::from((d % 2 == 1) != reversed);
        for (q, rot) in other.rotation.iter().enumerate() {
            let p = point_map[q];
            let mine = &self.rotation[p];
            if mine.len() != rot.len() {
                return false;
            }
            let image: Vec<Dart> = rot.iter().map(|&d| map_dart(d)).collect();
            let n = mine.len();
            let Some(shift) = mine.iter().position(|&d| d == image[0]) else { return false };
            if (0..n).any(|i| mine[(shift + i) % n] != image[i]) {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DualReport {
    pub dual: SurfaceReport,
    /// Every dual corner has degree `1 − |α|` for its original corner `α`.
    pub degrees_complementary: bool,
    /// The double dual equals the original after the canonical relabeling (arcs reversed).
    pub double_dual_matches: bool,
}

impl DualReport {
    pub fn holds(&self) -> bool {
        self.degrees_complementary && self.double_dual_matches
    }
}

impl CombinatorialMap {
    pub fn dual_report(&self) -> (CombinatorialMap, DualReport) {
        let dual = self.dual();
        let degrees_complementary = (0..self.dart_count())
            .all(|d| dual.corner_degree(self.dual_corner(&dual, d)) == 1 - self.corner_degree(d));
        let double = dual.dual();
        let double_dual_matches = self.matches_relabeled(&double, &self.double_dual_points(&dual), true);
        let report = DualReport { dual: dual.report(), degrees_complementary, double_dual_matches };
        (dual, report)
    }
}
