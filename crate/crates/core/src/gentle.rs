//! The angle quiver, its gentle algebra with the basis of angle paths, products,
//! the center and derivations.

use crate::coeffs::{rat, Rational, Series};
use crate::linalg;
use crate::surface::{CombinatorialMap, Dart};
use num_traits::Zero;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("derivation value for arrow {arrow} has mismatched head/tail")]
    EndpointMismatch { arrow: String },
    #[error("mixed truncation orders")]
    OrderMismatch,
}

/// Consecutive anticlockwise angles around one marked point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub point: u32,
    pub start: u32,
    pub len: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Idem(u32),
    Path(Path),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AngleArrow {
    pub dart: Dart,
    pub tail_arc: usize,
    pub head_arc: usize,
    pub point: usize,
    pub face: usize,
    pub degree: u8,
}

/// Finite linear combination of basis elements with series coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Element {
    order: u32,
    terms: BTreeMap<Basis, Series>,
}

impl Element {
    pub fn zero(order: u32) -> Self {
        Element { order, terms: BTreeMap::new() }
    }
    pub fn basis(b: Basis, order: u32) -> Self {
        Self::term(b, Series::one(order))
    }
    pub fn term(b: Basis, c: Series) -> Self {
        let mut e = Element::zero(c.order());
        if !c.is_zero() {
            e.terms.insert(b, c);
        }
        e
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn terms(&self) -> &BTreeMap<Basis, Series> {
        &self.terms
    }
    pub fn coeff(&self, b: &Basis) -> Series {
        self.terms.get(b).cloned().unwrap_or_else(|| Series::zero(self.order))
    }
    pub fn add_term(&mut self, b: Basis, c: &Series) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(x) => {
                let s = &*x + c;
                if s.is_zero() {
                    self.terms.remove(&b);
                } else {
                    *x = s;
                }
            }
            None => {
                self.terms.insert(b, c.clone());
            }
        }
    }
    pub fn add_assign(&mut self, other: &Element) {
        for (b, c) in &other.terms {
            self.add_term(*b, c);
        }
    }
    pub fn add_scaled(&mut self, other: &Element, s: &Series) {
        if s.is_zero() {
            return;
        }
        for (b, c) in &other.terms {
            self.add_term(*b, &(c * s));
        }
    }
    pub fn sub_assign(&mut self, other: &Element) {
        for (b, c) in &other.terms {
            self.add_term(*b, &c.neg());
        }
    }
    pub fn neg(&self) -> Element {
        Element {
            order: self.order,
            terms: self.terms.iter().map(|(b, c)| (*b, c.neg())).collect(),
        }
    }
    pub fn signed(&self, negative: bool) -> Element {
        if negative {
            self.neg()
        } else {
            self.clone()
        }
    }
    pub fn scale(&self, s: &Series) -> Element {
        let mut out = Element::zero(self.order);
        out.add_scaled(self, s);
        out
    }
    pub fn scale_rat(&self, q: &Rational) -> Element {
        Element {
            order: self.order,
            terms: self
                .terms
                .iter()
                .map(|(b, c)| (*b, c.scale(q)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }
    pub fn map_coeffs(&self, f: impl Fn(&Series) -> Series) -> Element {
        let mut out = Element::zero(self.order);
        for (b, c) in &self.terms {
            let s = f(c);
            if !s.is_zero() {
                out.terms.insert(*b, s);
            }
        }
        out
    }
    /// Same element viewed at another truncation order (coefficients must be constants).
    pub fn with_order(&self, order: u32) -> Element {
        let mut out = Element::zero(order);
        for (b, c) in &self.terms {
            out.add_term(*b, &Series::constant(c.constant_term(), order));
        }
        out
    }
}

impl std::ops::Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl std::ops::Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        out.sub_assign(rhs);
        out
    }
}

/// A derivation given by its values on arrows, extended by the graded Leibniz rule
/// `D(ab) = D(a) b + (-1)^{|D||a|} a D(b)`.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub parity: u8,
    pub values: BTreeMap<Dart, Element>,
}

/// The gentle algebra of an arc collection.
#[derive(Debug, Clone)]
pub struct Gentle {
    map: Arc<CombinatorialMap>,
    /// degree_prefix[p][i] = Σ degrees of corners at positions < i, for i ≤ valence.
    degree_prefix: Vec<Vec<u32>>,
}

impl Gentle {
    pub fn new(map: Arc<CombinatorialMap>) -> Self {
        let degree_prefix = (0..map.point_count())
            .map(|p| {
                let mut acc = vec![0u32];
                for &d in map.rotation(p) {
                    acc.push(acc.last().unwrap() + u32::from(map.corner_degree(d)));
                }
                acc
            })
            .collect();
        Gentle { map, degree_prefix }
    }

    pub fn map(&self) -> &CombinatorialMap {
        &self.map
    }
    pub fn map_arc(&self) -> Arc<CombinatorialMap> {
        self.map.clone()
    }

    pub fn arrows(&self) -> Vec<AngleArrow> {
        let m = &*self.map;
        let mut out = Vec::new();
        for p in 0..m.point_count() {
            for &d in m.rotation(p) {
                out.push(AngleArrow {
                    dart: d,
                    tail_arc: CombinatorialMap::arc_of(d),
                    head_arc: CombinatorialMap::arc_of(m.succ(d)),
                    point: p,
                    face: m.face_of_corner(d),
                    degree: m.corner_degree(d),
                });
            }
        }
        out
    }

    /// The arrow path of corner `d`.
    pub fn arrow(&self, d: Dart) -> Path {
        let p = self.map.point_of(d);
        Path { point: p as u32, start: self.map.position(d) as u32, len: 1 }
    }
    pub fn arrow_paths(&self) -> Vec<Path> {
        self.arrows().iter().map(|a| self.arrow(a.dart)).collect()
    }
    pub fn valence(&self, p: u32) -> u32 {
        self.map.valence(p as usize) as u32
    }

    pub fn start_dart(&self, p: &Path) -> Dart {
        self.map.dart_at(p.point as usize, p.start as usize)
    }
    pub fn end_dart(&self, p: &Path) -> Dart {
        self.map.dart_at(p.point as usize, (p.start + p.len) as usize)
    }
    /// The dart of the last corner of a path.
    pub fn last_corner(&self, p: &Path) -> Dart {
        self.map.dart_at(p.point as usize, (p.start + p.len - 1) as usize)
    }
    pub fn corner(&self, p: &Path, i: u32) -> Dart {
        self.map.dart_at(p.point as usize, (p.start + i) as usize)
    }
    pub fn path_from(&self, d: Dart, len: u32) -> Path {
        Path { point: self.map.point_of(d) as u32, start: self.map.position(d) as u32, len }
    }
    pub fn tail_arc(&self, b: &Basis) -> usize {
        match b {
            Basis::Idem(a) => *a as usize,
            Basis::Path(p) => CombinatorialMap::arc_of(self.start_dart(p)),
        }
    }
    pub fn head_arc(&self, b: &Basis) -> usize {
        match b {
            Basis::Idem(a) => *a as usize,
            Basis::Path(p) => CombinatorialMap::arc_of(self.end_dart(p)),
        }
    }
    pub fn path_parity(&self, p: &Path) -> u8 {
        let v = self.valence(p.point);
        let pref = &self.degree_prefix[p.point as usize];
        let full = p.len / v;
        let rem = p.len % v;
        let s = p.start;
        let partial = if s + rem <= v {
            pref[(s + rem) as usize] - pref[s as usize]
        } else {
            pref[v as usize] - pref[s as usize] + pref[(s + rem - v) as usize]
        };
        ((full * pref[v as usize] + partial) % 2) as u8
    }
    pub fn parity(&self, b: &Basis) -> u8 {
        match b {
            Basis::Idem(_) => 0,
            Basis::Path(p) => self.path_parity(p),
        }
    }
    pub fn len(&self, b: &Basis) -> u32 {
        match b {
            Basis::Idem(_) => 0,
            Basis::Path(p) => p.len,
        }
    }
    /// Normalize a path start index into [0, valence).
    pub fn norm(&self, point: u32, start: u32, len: u32) -> Path {
        Path { point, start: start % self.valence(point), len }
    }

    /// Concatenation `a · b` (b first), if nonzero.
    pub fn compose_paths(&self, a: &Path, b: &Path) -> Option<Path> {
        if a.point != b.point {
            return None;
        }
        let v = self.valence(a.point);
        ((b.start + b.len) % v == a.start).then(|| Path { point: a.point, start: b.start, len: a.len + b.len })
    }
    pub fn compose_basis(&self, a: &Basis, b: &Basis) -> Option<Basis> {
        match (a, b) {
            (Basis::Idem(x), Basis::Idem(y)) => (x == y).then_some(*a),
            (Basis::Idem(x), Basis::Path(_)) => (self.head_arc(b) == *x as usize).then_some(*b),
            (Basis::Path(_), Basis::Idem(y)) => (self.tail_arc(a) == *y as usize).then_some(*a),
            (Basis::Path(p), Basis::Path(q)) => self.compose_paths(p, q).map(Basis::Path),
        }
    }
    pub fn compose(&self, x: &Element, y: &Element) -> Element {
        let mut out = Element::zero(x.order());
        for (a, ca) in x.terms() {
            for (b, cb) in y.terms() {
                if let Some(c) = self.compose_basis(a, b) {
                    out.add_term(c, &(ca * cb));
                }
            }
        }
        out
    }

    /// Sum of the vertex idempotents.
    pub fn unit(&self, order: u32) -> Element {
        let mut e = Element::zero(order);
        for a in 0..self.map.arc_count() {
            e.add_term(Basis::Idem(a as u32), &Series::one(order));
        }
        e
    }
    pub fn idem(&self, a: usize, order: u32) -> Element {
        Element::basis(Basis::Idem(a as u32), order)
    }
    pub fn path(&self, p: Path, order: u32) -> Element {
        Element::basis(Basis::Path(p), order)
    }

    /// ℓ_m^j: all rotations of the j-fold full turn around `point`.
    pub fn ell(&self, point: usize, j: u32, order: u32) -> Element {
        let v = self.valence(point as u32);
        let mut e = Element::zero(order);
        for s in 0..v {
            e.add_term(Basis::Path(Path { point: point as u32, start: s, len: j * v }), &Series::one(order));
        }
        e
    }

    pub fn center_basis(&self, max_winding: u32, order: u32) -> Vec<Element> {
        let mut out = vec![self.unit(order)];
        for p in 0..self.map.point_count() {
            for j in 1..=max_winding {
                out.push(self.ell(p, j, order));
            }
        }
        out
    }

    pub fn is_central(&self, x: &Element) -> bool {
        let order = x.order();
        let gens = self
            .arrow_paths()
            .into_iter()
            .map(|p| self.path(p, order))
            .chain((0..self.map.arc_count()).map(|a| self.idem(a, order)));
        gens.into_iter().all(|g| self.compose(x, &g) == self.compose(&g, x))
    }

    /// Graded commutator `[x, y] = xy - (-1)^{|x||y|} yx` on homogeneous basis terms.
    pub fn commutator(&self, x: &Element, y: &Element) -> Element {
        let mut out = Element::zero(x.order());
        for (a, ca) in x.terms() {
            for (b, cb) in y.terms() {
                let c = ca * cb;
                if let Some(ab) = self.compose_basis(a, b) {
                    out.add_term(ab, &c);
                }
                if let Some(ba) = self.compose_basis(b, a) {
                    let neg = self.parity(a) * self.parity(b) == 0;
                    out.add_term(ba, &c.signed(neg));
                }
            }
        }
        out
    }

    /// All basis paths of length 1..=max_len.
    pub fn paths_up_to(&self, max_len: u32) -> Vec<Path> {
        let mut out = Vec::new();
        for p in 0..self.map.point_count() as u32 {
            for s in 0..self.valence(p) {
                for len in 1..=max_len {
                    out.push(Path { point: p, start: s, len });
                }
            }
        }
        out
    }

    pub fn render_basis(&self, b: &Basis) -> String {
        match b {
            Basis::Idem(a) => format!("1[{}]", self.map.arc_name(*a as usize)),
            Basis::Path(p) => self.render_path(p),
        }
    }
    pub fn render_path(&self, p: &Path) -> String {
        format!("{}:{}+{}", self.map.point_name(p.point as usize), p.start, p.len)
    }
    pub fn render(&self, x: &Element) -> String {
        if x.is_zero() {
            return "0".into();
        }
        x.terms()
            .iter()
            .map(|(b, c)| {
                let cs = c.to_string();
                if cs == "1" {
                    self.render_basis(b)
                } else {
                    format!("({cs})*{}", self.render_basis(b))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }

    // ---- derivations ----

    pub fn derivation_from_arrow_values(
        &self,
        parity: u8,
        values: BTreeMap<Dart, Element>,
    ) -> Result<Derivation, AlgebraError> {
        for (&d, v) in &values {
            let a = Basis::Path(self.arrow(d));
            for b in v.terms().keys() {
                if self.head_arc(b) != self.head_arc(&a) || self.tail_arc(b) != self.tail_arc(&a) {
                    return Err(AlgebraError::EndpointMismatch { arrow: self.render_basis(&a) });
                }
            }
        }
        Ok(Derivation { parity, values })
    }

    /// Apply a derivation to a basis element.
    pub fn apply_derivation(&self, der: &Derivation, b: &Basis, order: u32) -> Element {
        let Basis::Path(p) = b else { return Element::zero(order) };
        let mut out = Element::zero(order);
        let v = self.valence(p.point);
        for i in 0..p.len {
            let d = self.corner(p, i);
            let Some(val) = der.values.get(&d) else { continue };
            if val.is_zero() {
                continue;
            }
            // p = left · arrow_i · right, right = first i arrows
            let right = (i > 0).then(|| Path { point: p.point, start: p.start, len: i });
            let left = (i + 1 < p.len).then(|| Path {
                point: p.point,
                start: (p.start + i + 1) % v,
                len: p.len - i - 1,
            });
            let mut term = val.clone();
            if let Some(r) = right {
                term = self.compose(&term, &self.path(r, order));
            }
            if let Some(l) = left {
                term = self.compose(&self.path(l, order), &term);
                if der.parity * self.path_parity(&l) % 2 == 1 {
                    term = term.neg();
                }
            }
            out.add_assign(&term);
        }
        out
    }

    pub fn apply_derivation_elem(&self, der: &Derivation, x: &Element) -> Element {
        let mut out = Element::zero(x.order());
        for (b, c) in x.terms() {
            out.add_scaled(&self.apply_derivation(der, b, x.order()), c);
        }
        out
    }

    /// Leibniz on composable pairs of paths up to `max_len` and vanishing on relations.
    pub fn is_derivation(&self, der: &Derivation, max_len: u32, order: u32) -> bool {
        let paths = self.paths_up_to(max_len);
        for a in &paths {
            for b in &paths {
                let ea = self.path(*a, order);
                let eb = self.path(*b, order);
                let ab = self.compose(&ea, &eb);
                let lhs = self.apply_derivation_elem(der, &ab);
                let mut rhs = self.compose(&self.apply_derivation_elem(der, &ea), &eb);
                let second = self.compose(&ea, &self.apply_derivation_elem(der, &eb));
                rhs.add_assign(&second.signed(der.parity * self.path_parity(a) % 2 == 1));
                if lhs != rhs {
                    return false;
                }
            }
        }
        true
    }

    /// Find x supported on idempotents and paths of length ≤ `max_len` with
    /// `D(α) = [x, α]` for every arrow α.
    pub fn inner_derivation_test(&self, der: &Derivation, max_len: u32, order: u32) -> Option<Element> {
        let mut unknowns: Vec<Basis> = Vec::new();
        if der.parity == 0 {
            unknowns.extend((0..self.map.arc_count() as u32).map(Basis::Idem));
        }
        unknowns.extend(
            self.paths_up_to(max_len)
                .into_iter()
                .filter(|p| self.path_parity(p) == der.parity)
                .map(Basis::Path),
        );
        let arrows = self.arrow_paths();
        // column per unknown: its commutator with each arrow
        let mut rows: BTreeMap<(Dart, Basis), Vec<Rational>> = BTreeMap::new();
        let n = unknowns.len();
        for (k, u) in unknowns.iter().enumerate() {
            let eu = Element::basis(*u, 1);
            for a in &arrows {
                let c = self.commutator(&eu, &self.path(*a, 1));
                for (b, s) in c.terms() {
                    rows.entry((self.start_dart(a), *b)).or_insert_with(|| vec![Rational::zero(); n])[k] =
                        s.constant_term();
                }
            }
        }
        // right-hand side, split by monomial
        let mut monomials = BTreeSet::new();
        for v in der.values.values() {
            for (_, s) in v.terms() {
                for (m, _) in s.terms() {
                    monomials.insert(m.clone());
                }
            }
        }
        for a in &arrows {
            let d = self.start_dart(a);
            if let Some(v) = der.values.get(&d) {
                for b in v.terms().keys() {
                    rows.entry((d, *b)).or_insert_with(|| vec![Rational::zero(); n]);
                }
            }
        }
        let keys: Vec<(Dart, Basis)> = rows.keys().cloned().collect();
        let matrix: linalg::Matrix = keys.iter().map(|k| rows[k].clone()).collect();
        let mut x = Element::zero(order);
        for m in monomials {
            let rhs: Vec<Rational> = keys
                .iter()
                .map(|(d, b)| {
                    der.values.get(d).map_or(Rational::zero(), |v| {
                        let s = v.coeff(b);
                        s.terms().iter().find(|(mm, _)| *mm == m).map_or(Rational::zero(), |(_, c)| c.clone())
                    })
                })
                .collect();
            let sol = linalg::solve(&matrix, &rhs, n)?;
            for (k, c) in sol.into_iter().enumerate() {
                if !c.is_zero() {
                    x.add_term(unknowns[k], &Series::term(m.clone(), c, order));
                }
            }
        }
        Some(x)
    }

    /// Dimension of the space of central elements supported on idempotents and
    /// paths of length ≤ `max_len`, and whether it equals the span of
    /// {1, ℓ_m^j : j·val(m) ≤ max_len}.
    pub fn center_certificate(&self, max_len: u32) -> CenterCertificate {
        let mut unknowns: Vec<Basis> = (0..self.map.arc_count() as u32).map(Basis::Idem).collect();
        unknowns.extend(self.paths_up_to(max_len).into_iter().map(Basis::Path));
        let n = unknowns.len();
        let idx: BTreeMap<Basis, usize> = unknowns.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        let gens: Vec<Basis> = self
            .arrow_paths()
            .into_iter()
            .map(Basis::Path)
            .chain((0..self.map.arc_count() as u32).map(Basis::Idem))
            .collect();
        let mut rows: BTreeMap<(Basis, Basis), Vec<Rational>> = BTreeMap::new();
        for (k, u) in unknowns.iter().enumerate() {
            for g in &gens {
                if let Some(x) = self.compose_basis(u, g) {
                    rows.entry((*g, x)).or_insert_with(|| vec![Rational::zero(); n])[k] += rat(1);
                }
                if let Some(x) = self.compose_basis(g, u) {
                    rows.entry((*g, x)).or_insert_with(|| vec![Rational::zero(); n])[k] -= rat(1);
                }
            }
        }
        let matrix: linalg::Matrix = rows.into_values().collect();
        let kernel = linalg::nullspace(&matrix, n);
        let mut expected = vec![self.unit(1)];
        for p in 0..self.map.point_count() {
            let v = self.valence(p as u32);
            let mut j = 1;
            while j * v <= max_len {
                expected.push(self.ell(p, j, 1));
                j += 1;
            }
        }
        let to_vec = |e: &Element| {
            let mut v = vec![Rational::zero(); n];
            for (b, c) in e.terms() {
                v[idx[b]] = c.constant_term();
            }
            v
        };
        let expected_vecs: Vec<Vec<Rational>> = expected.iter().map(to_vec).collect();
        let expected_central = expected.iter().all(|e| self.is_central(e));
        let mut combined = kernel.clone();
        combined.extend(expected_vecs.iter().cloned());
        CenterCertificate {
            length_bound: max_len,
            central_dim: kernel.len(),
            expected_dim: linalg::rank(&expected_vecs),
            combined_rank: linalg::rank(&combined),
            expected_central,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CenterCertificate {
    pub length_bound: u32,
    pub central_dim: usize,
    pub expected_dim: usize,
    pub combined_rank: usize,
    pub expected_central: bool,
}

impl CenterCertificate {
    pub fn holds(&self) -> bool {
        self.expected_central && self.central_dim == self.expected_dim && self.combined_rank == self.central_dim
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}:{}+{}", self.point, self.start, self.len)
    }
}
