//! Hochschild cochains of the undeformed gentle A∞-structure: differential,
//! Gerstenhaber bracket, cup product, the named cocycle families and their
//! classification by the arity-0 and arity-1 components.
//!
//! Cochains are lazy evaluators on basis tuples (written order, leftmost entry
//! first), memoized per cochain. All evaluations are bounded; exceeding a bound
//! is an error, never a silent zero.

use crate::coeffs::{rat, Rational, Series, Var};
use crate::curved::{CurvedError, CurvedStructure, DeformationParams};
use crate::gentle::{Basis, Derivation, Element, Gentle, Path};
use crate::grading::GradingData;
use crate::linalg;
use crate::orbigon::OrbiPoint;
use crate::surface::{CombinatorialMap, Condition, Dart};
use num_traits::Zero;
use parking_lot::Mutex;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Coefficient truncation order of every cochain evaluation. The odd orbifold
/// classes are the ħ-linear part of a deformation, which needs order 2.
pub const ORDER: u32 = 2;
/// Length bound handed to the product evaluators.
const EVAL_LEN: u32 = 96;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HhError {
    #[error(transparent)]
    Bound(#[from] CurvedError),
    #[error("table cochain {label} queried on an entry of length {len} beyond its bound {max}")]
    TableBound { label: String, len: u32, max: u32 },
    #[error("λ must have one entry per arrow ({expected}), got {got}")]
    ArrowCount { expected: usize, got: usize },
    #[error("face {face} has nonzero λ-sum {sum}")]
    FaceSum { face: usize, sum: String },
    #[error("arc {arc} is not incident to marked point {point}")]
    NotIncident { arc: String, point: String },
    #[error("the arc collection violates NL2")]
    NotNl2,
    #[error("unknown marked point index {0}")]
    UnknownPoint(u32),
    #[error("unknown arc index {0}")]
    UnknownArc(usize),
    #[error("winding must be at least 1")]
    ZeroWinding,
    #[error("linear combination mixes parities")]
    ParityMismatch,
    #[error("not a cocycle: {0}")]
    NotCocycle(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("not expressible in the class basis: {0}")]
    Unexpressible(String),
    #[error("arcs {0:?} do not form a spanning tree of the face graph")]
    NotSpanningTree(Vec<usize>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Named,
    Composite,
    Gauge,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NamedClass {
    Unit,
    OrbOdd(OrbiPoint),
    /// Arity-1 derivation α ↦ λ_α α, indexed by corner dart.
    Arc(Vec<Rational>),
    OrbEven(OrbiPoint, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcSide {
    Left,
    Right,
}

enum Node {
    Mu,
    Unit,
    OrbOdd(Arc<CurvedStructure>),
    Arc(Vec<Rational>),
    Table { entries: HashMap<Vec<Basis>, Element>, max_len: u32 },
    Linear(Vec<(Rational, Cochain)>),
    Differential(Cochain),
    Bracket(Cochain, Cochain),
    Cup(Cochain, Cochain),
}

struct CochainData {
    parity: u8,
    label: String,
    provenance: Provenance,
    node: Node,
    memo: Mutex<HashMap<Vec<Basis>, Element>>,
}

/// A normalized Hochschild cochain; `parity` is the shifted degree mod 2 (μ is odd).
#[derive(Clone)]
pub struct Cochain(Arc<CochainData>);

impl Cochain {
    fn new(parity: u8, label: impl Into<String>, provenance: Provenance, node: Node) -> Self {
        Cochain(Arc::new(CochainData {
            parity: parity % 2,
            label: label.into(),
            provenance,
            node,
            memo: Mutex::new(HashMap::new()),
        }))
    }
    pub fn parity(&self) -> u8 {
        self.0.parity
    }
    pub fn label(&self) -> &str {
        &self.0.label
    }
    pub fn provenance(&self) -> Provenance {
        self.0.provenance
    }
    /// Largest arity with a possibly nonzero component, when finite.
    fn arity_bound(&self) -> Option<usize> {
        match &self.0.node {
            Node::Unit => Some(0),
            Node::Arc(_) => Some(1),
            Node::Table { entries, .. } => Some(entries.keys().map(Vec::len).max().unwrap_or(0)),
            Node::Linear(parts) => parts.iter().try_fold(0, |m, (_, c)| c.arity_bound().map(|b| b.max(m))),
            _ => None,
        }
    }
}

impl fmt::Debug for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cochain({}, parity {})", self.label(), self.parity())
    }
}

/// A coordinate of a class descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coord {
    /// Coefficient of the unit in ν⁰ (odd classes).
    Unit,
    /// Coefficient of ν_a for an arc outside the spanning tree (even classes).
    Arc(usize),
    /// Odd: coefficient of ℓ_m^j in ν⁰. Even: total coefficient of ℓ_m^j·α in ν¹(α)
    /// over the arrows α around m.
    Winding(OrbiPoint),
}

/// Finite coordinates of a cohomology class; equal descriptors mean equal classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descriptor {
    pub parity: u8,
    /// Nonzero coordinates only.
    pub coords: BTreeMap<Coord, Rational>,
}

impl Descriptor {
    pub fn zero(parity: u8) -> Self {
        Descriptor { parity: parity % 2, coords: BTreeMap::new() }
    }
    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }
    pub fn get(&self, c: Coord) -> Rational {
        self.coords.get(&c).cloned().unwrap_or_else(Rational::zero)
    }
    fn add_coord(&mut self, c: Coord, q: &Rational) {
        let v = self.get(c) + q;
        if v.is_zero() {
            self.coords.remove(&c);
        } else {
            self.coords.insert(c, v);
        }
    }
    pub fn add(&self, other: &Descriptor) -> Descriptor {
        let mut out = self.clone();
        for (c, q) in &other.coords {
            out.add_coord(*c, q);
        }
        out
    }
    pub fn scale(&self, q: &Rational) -> Descriptor {
        if q.is_zero() {
            return Descriptor::zero(self.parity);
        }
        Descriptor { parity: self.parity, coords: self.coords.iter().map(|(c, x)| (*c, x * q)).collect() }
    }
    /// The scalar `q` with `self == q·other`, if `other` is nonzero and such a `q` exists.
    pub fn ratio_to(&self, other: &Descriptor) -> Option<Rational> {
        let (c, x) = other.coords.iter().next()?;
        let q = self.get(*c) / x;
        (self.parity == other.parity && *self == other.scale(&q)).then_some(q)
    }
    pub fn vector(&self, keys: &[Coord]) -> Vec<Rational> {
        keys.iter().map(|k| self.get(*k)).collect()
    }
    pub fn render(&self, map: &CombinatorialMap) -> String {
        let kind = if self.parity == 1 { "odd" } else { "even" };
        if self.is_zero() {
            return format!("{kind}: 0");
        }
        let terms: Vec<String> = self
            .coords
            .iter()
            .map(|(c, q)| {
                let name = match c {
                    Coord::Unit => "1".to_string(),
                    Coord::Arc(a) => format!("nu[{}]", map.arc_name(*a)),
                    Coord::Winding((m, j)) if self.parity == 1 => format!("l[{}]^{j}", map.point_name(*m as usize)),
                    Coord::Winding((m, j)) => format!("w[{},{j}]", map.point_name(*m as usize)),
                };
                format!("{q}*{name}")
            })
            .collect();
        format!("{kind}: {}", terms.join(" + "))
    }
}

/// Bounded evaluation context for Hochschild cochains of the `r = 0` structure.
pub struct HhContext {
    gentle: Gentle,
    grading: GradingData,
    mu_structure: Arc<CurvedStructure>,
    mu: Cochain,
    max_arity: usize,
    tree: Vec<usize>,
    /// Columns: ν_{a,L} for arcs outside the tree, then [1_a, −] for every arc.
    arc_columns: Vec<Vec<Rational>>,
    orb_cache: Mutex<BTreeMap<OrbiPoint, Arc<CurvedStructure>>>,
    named_cache: Mutex<HashMap<NamedClass, Cochain>>,
}

impl HhContext {
    /// Context with products up to arity `max_arity` and the breadth-first spanning tree.
    pub fn new(gentle: Gentle, max_arity: usize) -> Result<Self, HhError> {
        let tree = bfs_spanning_tree(gentle.map());
        Self::with_tree(gentle, max_arity, tree)
    }

    pub fn with_tree(gentle: Gentle, max_arity: usize, tree: Vec<usize>) -> Result<Self, HhError> {
        validate_tree(gentle.map(), &tree)?;
        let mu_structure =
            Arc::new(CurvedStructure::new(gentle.clone(), DeformationParams::zero(ORDER), max_arity, EVAL_LEN)?);
        let mu = Cochain::new(1, "mu", Provenance::Named, Node::Mu);
        let map = gentle.map();
        let mut arc_columns = Vec::new();
        for a in 0..map.arc_count() {
            if !tree.contains(&a) {
                arc_columns.push(arc_lambda(map, a, ArcSide::Left));
            }
        }
        for a in 0..map.arc_count() {
            arc_columns.push(commutator_lambda(map, a));
        }
        Ok(HhContext {
            grading: GradingData::new(map),
            gentle,
            mu_structure,
            mu,
            max_arity,
            tree,
            arc_columns,
            orb_cache: Mutex::new(BTreeMap::new()),
            named_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn gentle(&self) -> &Gentle {
        &self.gentle
    }
    pub fn map(&self) -> &CombinatorialMap {
        self.gentle.map()
    }
    pub fn tree(&self) -> &[usize] {
        &self.tree
    }
    pub fn max_arity(&self) -> usize {
        self.max_arity
    }
    pub fn non_tree_arcs(&self) -> Vec<usize> {
        (0..self.map().arc_count()).filter(|a| !self.tree.contains(a)).collect()
    }

    // ---- construction ----

    pub fn mu(&self) -> Cochain {
        self.mu.clone()
    }

    pub fn differential(&self, c: &Cochain) -> Cochain {
        Cochain::new(c.parity() + 1, format!("d({})", c.label()), Provenance::Composite, Node::Differential(c.clone()))
    }

    pub fn bracket(&self, k: &Cochain, n: &Cochain) -> Cochain {
        Cochain::new(
            k.parity() + n.parity(),
            format!("[{}, {}]", k.label(), n.label()),
            Provenance::Composite,
            Node::Bracket(k.clone(), n.clone()),
        )
    }

    pub fn cup(&self, k: &Cochain, n: &Cochain) -> Cochain {
        Cochain::new(
            k.parity() + n.parity() + 1,
            format!("{} cup {}", k.label(), n.label()),
            Provenance::Composite,
            Node::Cup(k.clone(), n.clone()),
        )
    }

    pub fn linear(&self, parts: &[(Rational, Cochain)]) -> Result<Cochain, HhError> {
        let parity = parts.first().map_or(0, |(_, c)| c.parity());
        if parts.iter().any(|(_, c)| c.parity() != parity) {
            return Err(HhError::ParityMismatch);
        }
        let label = parts.iter().map(|(q, c)| format!("{q}*{}", c.label())).collect::<Vec<_>>().join(" + ");
        Ok(Cochain::new(parity, label, Provenance::Composite, Node::Linear(parts.to_vec())))
    }

    /// Cochain given by an explicit finite table, zero off the table. Querying an
    /// entry longer than `max_len` is an error.
    pub fn table(
        &self,
        parity: u8,
        label: &str,
        entries: HashMap<Vec<Basis>, Element>,
        max_len: u32,
    ) -> Cochain {
        Cochain::new(parity, label, Provenance::Composite, Node::Table { entries, max_len })
    }

    fn orb_structure(&self, p: OrbiPoint) -> Result<Arc<CurvedStructure>, HhError> {
        let mut cache = self.orb_cache.lock();
        if let Some(s) = cache.get(&p) {
            return Ok(s.clone());
        }
        let mut params = DeformationParams::zero(ORDER);
        params.orb.insert(p, Series::var(Var::Hbar, ORDER));
        let s = Arc::new(CurvedStructure::new(self.gentle.clone(), params, self.max_arity, EVAL_LEN)?);
        cache.insert(p, s.clone());
        Ok(s)
    }

    fn check_point(&self, (m, j): OrbiPoint) -> Result<(), HhError> {
        if m as usize >= self.map().point_count() {
            return Err(HhError::UnknownPoint(m));
        }
        if j == 0 {
            return Err(HhError::ZeroWinding);
        }
        Ok(())
    }

    /// The arrow coefficients of ν_{a,L} or ν_{a,R}.
    pub fn arc_lambda(&self, a: usize, side: ArcSide) -> Vec<Rational> {
        arc_lambda(self.map(), a, side)
    }

    /// λ(ℓ_m): the sum of λ over the arrows around `m`.
    pub fn lambda_on_turn(&self, lambda: &[Rational], m: usize) -> Rational {
        self.map().rotation(m).iter().map(|&d| lambda[d].clone()).sum()
    }

    pub fn build_named_class(&self, spec: &NamedClass) -> Result<Cochain, HhError> {
        if let Some(c) = self.named_cache.lock().get(spec) {
            return Ok(c.clone());
        }
        let map = self.map();
        let c = match spec {
            NamedClass::Unit => Cochain::new(1, "nu1", Provenance::Named, Node::Unit),
            NamedClass::OrbOdd(p) => {
                self.check_point(*p)?;
                let label = format!("o({},{})", map.point_name(p.0 as usize), p.1);
                Cochain::new(1, label, Provenance::Named, Node::OrbOdd(self.orb_structure(*p)?))
            }
            NamedClass::Arc(lambda) => {
                check_face_sums(map, lambda)?;
                Cochain::new(0, self.lambda_label(lambda), Provenance::Named, Node::Arc(lambda.clone()))
            }
            NamedClass::OrbEven(p, a) => {
                self.check_point(*p)?;
                if map.check_condition(Condition::Nl2).is_err() {
                    return Err(HhError::NotNl2);
                }
                if *a >= map.arc_count() {
                    return Err(HhError::UnknownArc(*a));
                }
                let (tail, head) = map.arc_endpoints(*a);
                let m = p.0 as usize;
                let sign = if head == m {
                    rat(1)
                } else if tail == m {
                    rat(-1)
                } else {
                    return Err(HhError::NotIncident {
                        arc: map.arc_name(*a).to_string(),
                        point: map.point_name(m).to_string(),
                    });
                };
                let lambda: Vec<Rational> = arc_lambda(map, *a, ArcSide::Left).iter().map(|x| x * &sign).collect();
                let odd = self.build_named_class(&NamedClass::OrbOdd(*p))?;
                let arc = self.build_named_class(&NamedClass::Arc(lambda))?;
                let label = format!("e({},{};{})", map.point_name(m), p.1, map.arc_name(*a));
                Cochain::new(0, label, Provenance::Named, Node::Cup(odd, arc))
            }
        };
        self.named_cache.lock().insert(spec.clone(), c.clone());
        Ok(c)
    }

    fn lambda_label(&self, lambda: &[Rational]) -> String {
        let map = self.map();
        for a in 0..map.arc_count() {
            for (side, tag) in [(ArcSide::Left, ""), (ArcSide::Right, "R")] {
                let base = arc_lambda(map, a, side);
                if base == lambda {
                    return format!("nu{tag}[{}]", map.arc_name(a));
                }
                if base.iter().zip(lambda).all(|(x, y)| *x == -y.clone()) {
                    return format!("-nu{tag}[{}]", map.arc_name(a));
                }
            }
        }
        let parts: Vec<String> = lambda.iter().map(|q| q.to_string()).collect();
        format!("nu_lambda({})", parts.join(","))
    }

    pub fn unit_class(&self) -> Cochain {
        self.build_named_class(&NamedClass::Unit).expect("unit class is always valid")
    }
    pub fn odd_class(&self, p: OrbiPoint) -> Result<Cochain, HhError> {
        self.build_named_class(&NamedClass::OrbOdd(p))
    }
    /// ν_{p,e} built from the first arc in the rotation at the marked point.
    pub fn even_class(&self, p: OrbiPoint) -> Result<Cochain, HhError> {
        self.check_point(p)?;
        let a = CombinatorialMap::arc_of(self.map().dart_at(p.0 as usize, 0));
        self.build_named_class(&NamedClass::OrbEven(p, a))
    }
    pub fn arc_class(&self, a: usize) -> Result<Cochain, HhError> {
        if a >= self.map().arc_count() {
            return Err(HhError::UnknownArc(a));
        }
        self.build_named_class(&NamedClass::Arc(arc_lambda(self.map(), a, ArcSide::Left)))
    }

    // ---- evaluation ----

    /// Component of `c` on a basis tuple (written order).
    pub fn eval(&self, c: &Cochain, inputs: &[Basis]) -> Result<Element, HhError> {
        let normalized_zero = !matches!(c.0.node, Node::Mu) && inputs.iter().any(|b| matches!(b, Basis::Idem(_)));
        if normalized_zero || c.arity_bound().is_some_and(|b| inputs.len() > b) {
            return Ok(Element::zero(ORDER));
        }
        if let Some(v) = c.0.memo.lock().get(inputs) {
            return Ok(v.clone());
        }
        let v = self.compute(c, inputs)?;
        c.0.memo.lock().insert(inputs.to_vec(), v.clone());
        Ok(v)
    }

    fn compute(&self, c: &Cochain, inputs: &[Basis]) -> Result<Element, HhError> {
        let zero = Element::zero(ORDER);
        Ok(match &c.0.node {
            Node::Mu => self.mu_structure.mu_basis(inputs)?,
            Node::Unit => {
                if inputs.is_empty() {
                    self.gentle.unit(ORDER)
                } else {
                    zero
                }
            }
            Node::OrbOdd(s) => s.mu_basis(inputs)?.map_coeffs(|x| x.extract_order(&Var::Hbar, 1)),
            Node::Arc(lambda) => match inputs {
                [Basis::Path(p)] => {
                    let total: Rational = (0..p.len).map(|i| lambda[self.gentle.corner(p, i)].clone()).sum();
                    self.gentle.path(*p, ORDER).scale_rat(&total)
                }
                _ => zero,
            },
            Node::Table { entries, max_len } => {
                if let Some(len) = inputs.iter().map(|b| self.gentle.len(b)).find(|l| l > max_len) {
                    return Err(HhError::TableBound { label: c.label().to_string(), len, max: *max_len });
                }
                entries.get(inputs).cloned().unwrap_or(zero)
            }
            Node::Linear(parts) => {
                let mut out = zero;
                for (q, part) in parts {
                    out.add_assign(&self.eval(part, inputs)?.scale_rat(q));
                }
                out
            }
            Node::Differential(n) => self.bracket_value(&self.mu, n, inputs)?,
            Node::Bracket(k, n) => self.bracket_value(k, n, inputs)?,
            Node::Cup(k, n) => self.cup_value(k, n, inputs)?,
        })
    }

    fn shifted(&self, b: &Basis) -> u8 {
        (self.gentle.parity(b) + 1) % 2
    }

    /// `suffix[j]` = Σ_{t ≥ j} ‖a_t‖ mod 2.
    fn shifted_suffix(&self, a: &[Basis]) -> Vec<u8> {
        let mut suffix = vec![0u8; a.len() + 1];
        for t in (0..a.len()).rev() {
            suffix[t] = (suffix[t + 1] + self.shifted(&a[t])) % 2;
        }
        suffix
    }

    /// Multilinear evaluation with some entries replaced by elements.
    fn eval_slots(&self, c: &Cochain, slots: &[Slot<'_>]) -> Result<Element, HhError> {
        let mut out = Element::zero(ORDER);
        let mut tuple = Vec::new();
        self.expand(c, slots, &mut tuple, &Series::one(ORDER), &mut out)?;
        Ok(out)
    }

    fn expand(
        &self,
        c: &Cochain,
        slots: &[Slot<'_>],
        tuple: &mut Vec<Basis>,
        coeff: &Series,
        out: &mut Element,
    ) -> Result<(), HhError> {
        match slots.split_first() {
            None => out.add_scaled(&self.eval(c, tuple)?, coeff),
            Some((Slot::Fixed(bs), rest)) => {
                let n = tuple.len();
                tuple.extend_from_slice(bs);
                self.expand(c, rest, tuple, coeff, out)?;
                tuple.truncate(n);
            }
            Some((Slot::Value(e), rest)) => {
                for (b, cb) in e.terms() {
                    let c2 = coeff * cb;
                    if c2.is_zero() {
                        continue;
                    }
                    tuple.push(*b);
                    self.expand(c, rest, tuple, &c2, out)?;
                    tuple.pop();
                }
            }
        }
        Ok(())
    }

    /// `(κ ∘ ν)(a) = Σ_{i≤j} (−1)^{(Σ_{t≥j} ‖a_t‖)|ν|} κ(a_{<i}, ν(a_i..a_{j−1}), a_{≥j})`.
    fn insertion(&self, outer: &Cochain, inner: &Cochain, a: &[Basis]) -> Result<Element, HhError> {
        let r = a.len();
        let suffix = self.shifted_suffix(a);
        let mut out = Element::zero(ORDER);
        for i in 0..=r {
            for j in i..=r {
                if inner.arity_bound().is_some_and(|b| j - i > b)
                    || outer.arity_bound().is_some_and(|b| r - (j - i) + 1 > b)
                {
                    continue;
                }
                let v = self.eval(inner, &a[i..j])?;
                if v.is_zero() {
                    continue;
                }
                let w = self.eval_slots(outer, &[Slot::Fixed(&a[..i]), Slot::Value(&v), Slot::Fixed(&a[j..])])?;
                out.add_assign(&w.signed(suffix[j] * inner.parity() % 2 == 1));
            }
        }
        Ok(out)
    }

    /// `[κ, ν] = κ∘ν − (−1)^{|κ||ν|} ν∘κ`.
    fn bracket_value(&self, k: &Cochain, n: &Cochain, a: &[Basis]) -> Result<Element, HhError> {
        let mut out = self.insertion(k, n, a)?;
        let other = self.insertion(n, k, a)?;
        out.add_assign(&other.signed(k.parity() * n.parity() % 2 == 0));
        Ok(out)
    }

    /// `Σ (−1)^X μ(a_{<i}, κ(a_i..a_{j−1}), a_j..a_{u−1}, ν(a_u..a_{v−1}), a_{≥v})` with
    /// `X = (Σ_{t≥j} ‖a_t‖)|κ| + (Σ_{t≥v} ‖a_t‖)|ν|`.
    fn cup_value(&self, k: &Cochain, n: &Cochain, a: &[Basis]) -> Result<Element, HhError> {
        let r = a.len();
        let suffix = self.shifted_suffix(a);
        let mut out = Element::zero(ORDER);
        for i in 0..=r {
            for j in i..=r {
                if k.arity_bound().is_some_and(|b| j - i > b) {
                    continue;
                }
                let kv = self.eval(k, &a[i..j])?;
                if kv.is_zero() {
                    continue;
                }
                for u in j..=r {
                    for v in u..=r {
                        if n.arity_bound().is_some_and(|b| v - u > b) {
                            continue;
                        }
                        let nv = self.eval(n, &a[u..v])?;
                        if nv.is_zero() {
                            continue;
                        }
                        let w = self.eval_slots(
                            &self.mu,
                            &[
                                Slot::Fixed(&a[..i]),
                                Slot::Value(&kv),
                                Slot::Fixed(&a[j..u]),
                                Slot::Value(&nv),
                                Slot::Fixed(&a[v..]),
                            ],
                        )?;
                        let x = suffix[j] * k.parity() + suffix[v] * n.parity();
                        out.add_assign(&w.signed(x % 2 == 1));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Arity-0 and arity-1 components of the bracket from the closed formulas
    /// `[ν,η]⁰ = ν¹(η⁰) − (−1)^{‖ν‖‖η‖} η¹(ν⁰)` and the matching arity-1 display.
    pub fn bracket_closed_form(&self, k: &Cochain, n: &Cochain, a: &[Basis]) -> Result<Element, HhError> {
        let sign_kn = k.parity() * n.parity() % 2 == 1;
        let k0 = self.eval(k, &[])?;
        let n0 = self.eval(n, &[])?;
        match a {
            [] => {
                let mut out = self.eval_slots(k, &[Slot::Value(&n0)])?;
                let other = self.eval_slots(n, &[Slot::Value(&k0)])?;
                out.add_assign(&other.signed(!sign_kn));
                Ok(out)
            }
            [alpha] => {
                let sa = self.shifted(alpha);
                let half = |x: &Cochain, y: &Cochain, y0: &Element| -> Result<Element, HhError> {
                    let y1 = self.eval(y, a)?;
                    let mut out = self.eval_slots(x, &[Slot::Value(&y1)])?;
                    let left = self.eval_slots(x, &[Slot::Value(y0), Slot::Fixed(a)])?;
                    out.add_assign(&left.signed(y.parity() * sa % 2 == 1));
                    out.add_assign(&self.eval_slots(x, &[Slot::Fixed(a), Slot::Value(y0)])?);
                    Ok(out)
                };
                let mut out = half(k, n, &n0)?;
                out.add_assign(&half(n, k, &k0)?.signed(!sign_kn));
                Ok(out)
            }
            _ => Err(HhError::Precondition("closed forms exist for arity 0 and 1 only".into())),
        }
    }

    // ---- classification ----

    fn arrows(&self) -> Vec<(Dart, Basis)> {
        self.gentle.arrows().iter().map(|a| (a.dart, Basis::Path(self.gentle.arrow(a.dart)))).collect()
    }

    fn constant(&self, s: &Series) -> Result<Rational, HhError> {
        if s.is_constant() {
            Ok(s.constant_term())
        } else {
            Err(HhError::Unexpressible(format!("coefficient {s} depends on deformation variables")))
        }
    }

    /// Descriptor of a cocycle: the central element ν⁰ in the basis {1, ℓ_m^j} for odd
    /// parity, the outer derivation ν¹ modulo inner ones for even parity. `max_winding`
    /// sets the inner-derivation search bound `J·max-valence + 1` (raised to the longest
    /// path in ν¹ when that is larger).
    pub fn classify(&self, c: &Cochain, max_winding: u32) -> Result<Descriptor, HhError> {
        let d = self.differential(c);
        if !self.eval(&d, &[])?.is_zero() {
            return Err(HhError::NotCocycle(format!("{}: nonzero arity-0 component of d", c.label())));
        }
        for (_, alpha) in self.arrows() {
            if !self.eval(&d, &[alpha])?.is_zero() {
                return Err(HhError::NotCocycle(format!(
                    "{}: d is nonzero on {}",
                    c.label(),
                    self.gentle.render_basis(&alpha)
                )));
            }
        }
        let zero_component = self.eval(c, &[])?;
        if c.parity() == 1 {
            self.odd_descriptor(&zero_component)
        } else {
            self.even_descriptor(c, &zero_component, max_winding)
        }
    }

    fn odd_descriptor(&self, e: &Element) -> Result<Descriptor, HhError> {
        let mut out = Descriptor::zero(1);
        let unit = self.constant(&e.coeff(&Basis::Idem(0)))?;
        let mut recon = self.gentle.unit(ORDER).scale_rat(&unit);
        out.add_coord(Coord::Unit, &unit);
        for (b, s) in e.terms() {
            let Basis::Path(p) = b else { continue };
            let v = self.gentle.valence(p.point);
            if p.start == 0 && p.len % v == 0 {
                let q = self.constant(s)?;
                let j = p.len / v;
                recon.add_assign(&self.gentle.ell(p.point as usize, j, ORDER).scale_rat(&q));
                out.add_coord(Coord::Winding((p.point, j)), &q);
            }
        }
        if recon != *e {
            return Err(HhError::Unexpressible(format!(
                "arity-0 component {} is not a combination of 1 and full turns",
                self.gentle.render(e)
            )));
        }
        Ok(out)
    }

    fn even_descriptor(&self, c: &Cochain, e0: &Element, max_winding: u32) -> Result<Descriptor, HhError> {
        if !e0.is_zero() {
            return Err(HhError::Unexpressible(format!(
                "even class with nonzero arity-0 component {}",
                self.gentle.render(e0)
            )));
        }
        let map = self.map();
        let mut out = Descriptor::zero(0);
        let mut lambda = vec![Rational::zero(); map.dart_count()];
        let mut residual: BTreeMap<Dart, Element> = BTreeMap::new();
        let mut windings: BTreeMap<OrbiPoint, Rational> = BTreeMap::new();
        let mut longest = 0;
        for (d, alpha) in self.arrows() {
            let value = self.eval(c, &[alpha])?;
            let Basis::Path(a) = alpha else { unreachable!() };
            let v = self.gentle.valence(a.point);
            for (b, s) in value.terms() {
                longest = longest.max(self.gentle.len(b));
                let Basis::Path(p) = b else { continue };
                if p.point == a.point && p.start == a.start && (p.len - 1) % v == 0 {
                    let q = self.constant(s)?;
                    if p.len == 1 {
                        lambda[d] = q;
                    } else {
                        *windings.entry((a.point, (p.len - 1) / v)).or_insert_with(Rational::zero) += q;
                    }
                }
            }
            residual.insert(d, value);
        }
        let cols = self.arc_columns.len();
        let matrix: linalg::Matrix =
            (0..map.dart_count()).map(|d| self.arc_columns.iter().map(|col| col[d].clone()).collect()).collect();
        let Some(x) = linalg::solve(&matrix, &lambda, cols) else {
            return Err(HhError::Unexpressible("arrow coefficients violate a face-sum condition".into()));
        };
        for (k, a) in self.non_tree_arcs().into_iter().enumerate() {
            out.add_coord(Coord::Arc(a), &x[k]);
        }
        // subtract the arrow coefficients and the winding part placed on one arrow per point
        for (d, value) in residual.iter_mut() {
            let alpha = self.gentle.arrow(*d);
            value.add_term(Basis::Path(alpha), &Series::constant(-lambda[*d].clone(), ORDER));
            if map.position(*d) == 0 {
                for (&(_, j), q) in windings.range((alpha.point, 0)..=(alpha.point, u32::MAX)) {
                    let turn = Path { len: 1 + j * self.gentle.valence(alpha.point), ..alpha };
                    value.add_term(Basis::Path(turn), &Series::constant(-q.clone(), ORDER));
                }
            }
        }
        for (p, q) in &windings {
            out.add_coord(Coord::Winding(*p), q);
        }
        if residual.values().any(|v| !v.is_zero()) {
            let bound = (max_winding * map.max_valence() as u32 + 1).max(longest);
            let der = Derivation { parity: 0, values: residual };
            if self.gentle.inner_derivation_test(&der, bound, ORDER).is_none() {
                return Err(HhError::Unexpressible(format!(
                    "residual of {} is not an inner derivation at length bound {bound}",
                    c.label()
                )));
            }
        }
        Ok(out)
    }

    // ---- checks ----

    /// Arc-chained path tuples of arity `0..=max_arity` and entry length `<= max_len`.
    pub fn test_tuples(&self, max_arity: usize, max_len: u32) -> Vec<Vec<Basis>> {
        (0..=max_arity).flat_map(|k| self.mu_structure.composable_tuples(k, max_len, false)).collect()
    }

    /// Evaluate `c` on every test tuple and report the nonzero values.
    pub fn vanishing_check(&self, c: &Cochain, max_arity: usize, max_len: u32) -> Result<VanishingReport, HhError> {
        let tuples = self.test_tuples(max_arity, max_len);
        let results: Vec<Result<Option<String>, HhError>> = tuples
            .par_iter()
            .map(|t| {
                let v = self.eval(c, t)?;
                Ok((!v.is_zero()).then(|| {
                    let parts: Vec<String> = t.iter().map(|b| self.gentle.render_basis(b)).collect();
                    format!("({}) -> {}", parts.join(", "), self.gentle.render(&v))
                }))
            })
            .collect();
        let mut failures = Vec::new();
        for r in results {
            if let Some(f) = r? {
                failures.push(f);
            }
        }
        Ok(VanishingReport {
            cochain: c.label().to_string(),
            max_arity,
            max_len,
            tuples_checked: tuples.len(),
            failures,
        })
    }

    pub fn cocycle_check(&self, c: &Cochain, max_arity: usize, max_len: u32) -> Result<VanishingReport, HhError> {
        self.vanishing_check(&self.differential(c), max_arity, max_len)
    }

    pub fn d_squared_check(&self, c: &Cochain, max_arity: usize, max_len: u32) -> Result<VanishingReport, HhError> {
        let dd = self.differential(&self.differential(c));
        self.vanishing_check(&dd, max_arity, max_len)
    }

    pub fn odd_basis(&self, max_winding: u32) -> Result<Vec<Cochain>, HhError> {
        let mut out = vec![self.unit_class()];
        for m in 0..self.map().point_count() as u32 {
            for j in 1..=max_winding {
                out.push(self.odd_class((m, j))?);
            }
        }
        Ok(out)
    }

    pub fn even_basis(&self, max_winding: u32) -> Result<Vec<Cochain>, HhError> {
        let mut out = Vec::new();
        for m in 0..self.map().point_count() as u32 {
            for j in 1..=max_winding {
                out.push(self.even_class((m, j))?);
            }
        }
        for a in self.non_tree_arcs() {
            out.push(self.arc_class(a)?);
        }
        Ok(out)
    }

    /// Rank of a family of descriptors.
    pub fn descriptor_rank(descriptors: &[Descriptor]) -> usize {
        let keys: Vec<Coord> =
            descriptors.iter().flat_map(|d| d.coords.keys().copied()).collect::<BTreeSet<_>>().into_iter().collect();
        let rows: linalg::Matrix = descriptors.iter().map(|d| d.vector(&keys)).collect();
        linalg::rank(&rows)
    }

    /// Dimension count for the arc classes modulo [𝕜, −] and the tree basis.
    pub fn arc_class_space(&self) -> Result<ArcClassReport, HhError> {
        let map = self.map();
        let n_arcs = map.arc_count();
        let darts = map.dart_count();
        let face_rows: linalg::Matrix = map
            .faces()
            .iter()
            .map(|f| {
                let mut row = vec![Rational::zero(); darts];
                for &c in &f.corners {
                    row[c] += rat(1);
                }
                row
            })
            .collect();
        let dim_s = darts - linalg::rank(&face_rows);
        let commutators: linalg::Matrix = (0..n_arcs).map(|a| commutator_lambda(map, a)).collect();
        let commutator_rank = linalg::rank(&commutators);
        let dim_quotient = dim_s - commutator_rank;
        let basis = self.non_tree_arcs();
        let mut stacked = commutators.clone();
        stacked.extend(basis.iter().map(|&a| arc_lambda(map, a, ArcSide::Left)));
        let basis_rank = linalg::rank(&stacked) - commutator_rank;
        let genus = map.genus();
        let expected = map.point_count() as i64 + 2 * genus - 1;
        let lemma_value = 2 * genus - 1 + n_arcs as i64;

        let mut left_equals_right = true;
        for a in 0..n_arcs {
            let l = self.classify(&self.build_named_class(&NamedClass::Arc(arc_lambda(map, a, ArcSide::Left)))?, 1)?;
            let r = self.classify(&self.build_named_class(&NamedClass::Arc(arc_lambda(map, a, ArcSide::Right)))?, 1)?;
            left_equals_right &= l == r;
        }
        let mut face_sums = Vec::new();
        for (f, face) in map.faces().iter().enumerate() {
            let mut plain = vec![Rational::zero(); darts];
            let mut oriented = vec![Rational::zero(); darts];
            for &c in &face.corners {
                let a = CombinatorialMap::arc_of(c);
                let sign = if map.left_face(a) == f { rat(1) } else { rat(-1) };
                for (d, x) in arc_lambda(map, a, ArcSide::Left).into_iter().enumerate() {
                    oriented[d] += &x * &sign;
                    plain[d] += x;
                }
            }
            let plain = self.classify(&self.build_named_class(&NamedClass::Arc(plain))?, 1)?;
            let oriented = self.classify(&self.build_named_class(&NamedClass::Arc(oriented))?, 1)?;
            face_sums.push(FaceSumEntry {
                face: map.face_name(f),
                plain_sum: plain.render(map),
                oriented_sum: oriented.render(map),
                oriented_vanishes: oriented.is_zero(),
            });
        }
        Ok(ArcClassReport {
            arcs: n_arcs,
            faces: map.faces().len(),
            tree: self.tree.iter().map(|&a| map.arc_name(a).to_string()).collect(),
            dim_s,
            expected_dim_s: 2 * n_arcs - map.faces().len(),
            commutator_rank,
            dim_quotient,
            basis: basis.iter().map(|&a| map.arc_name(a).to_string()).collect(),
            basis_independent: basis_rank == basis.len() && basis.len() == dim_quotient,
            expected_dim: expected,
            lemma_statement_value: lemma_value,
            lemma_statement_discrepancy: lemma_value != dim_quotient as i64,
            left_equals_right,
            face_sums,
        })
    }

    /// ν_{p,e} descriptors for every incident arc, per orbifold point.
    pub fn arc_choice_independence(&self, max_winding: u32) -> Result<Vec<ArcChoiceEntry>, HhError> {
        let map = self.map();
        let mut out = Vec::new();
        for m in 0..map.point_count() {
            let arcs: BTreeSet<usize> = map.rotation(m).iter().map(|&d| CombinatorialMap::arc_of(d)).collect();
            for j in 1..=max_winding {
                let mut descriptors = Vec::new();
                for &a in &arcs {
                    let c = self.build_named_class(&NamedClass::OrbEven((m as u32, j), a))?;
                    descriptors.push((map.arc_name(a).to_string(), self.classify(&c, max_winding)?));
                }
                let agree = descriptors.windows(2).all(|w| w[0].1 == w[1].1);
                out.push(ArcChoiceEntry {
                    point: map.point_name(m).to_string(),
                    winding: j,
                    descriptors: descriptors.into_iter().map(|(a, d)| (a, d.render(map))).collect(),
                    agree,
                });
            }
        }
        Ok(out)
    }

    /// Check the cup and bracket tables on all marked-point pairs with windings
    /// `i + j <= max_total`, using every ν_a as arc class.
    pub fn verify_tables(&self, max_total: u32) -> Result<TableReport, HhError> {
        let map = self.map();
        let points = map.point_count() as u32;
        let arcs = map.arc_count();
        let pairs: Vec<(u32, u32)> =
            (1..max_total).flat_map(|i| (1..=max_total - i).map(move |j| (i, j))).collect();
        let singles: Vec<u32> = (1..max_total).collect();
        let mut jobs: Vec<Job> = Vec::new();
        for m in 0..points {
            for n in 0..points {
                for &(i, j) in &pairs {
                    for line in [Line::Cup1, Line::Cup2, Line::Br1, Line::Br2, Line::Br3] {
                        jobs.push(Job { line, m, n, i, j, kappa: 0, lambda: 0 });
                    }
                }
            }
            for &i in &singles {
                for a in 0..arcs {
                    for line in [Line::Cup3, Line::Cup5, Line::Br4, Line::Br5] {
                        jobs.push(Job { line, m, n: m, i, j: 0, kappa: 0, lambda: a });
                    }
                }
            }
        }
        for k in 0..arcs {
            for l in 0..arcs {
                for line in [Line::Cup4, Line::Br6] {
                    jobs.push(Job { line, m: 0, n: 0, i: 0, j: 0, kappa: k, lambda: l });
                }
            }
        }
        let winding_bound = 2 * max_total;
        let entries: Vec<Result<TableEntry, HhError>> =
            jobs.par_iter().map(|job| self.table_entry(job, winding_bound)).collect();
        let entries: Vec<TableEntry> = entries.into_iter().collect::<Result<_, _>>()?;
        let mut lines = Vec::new();
        let mut discrepancies = Vec::new();
        for line in Line::ALL {
            let mine: Vec<&TableEntry> = entries.iter().filter(|e| e.line == line.name()).collect();
            let matching = mine.iter().filter(|e| e.matches).count();
            let mut observed: BTreeMap<String, usize> = BTreeMap::new();
            for e in mine.iter().filter(|e| !e.matches) {
                *observed.entry(e.observed_coefficient.clone().unwrap_or_else(|| "not proportional".into())).or_default() += 1;
            }
            if matching < mine.len() {
                let pattern: Vec<String> = observed.iter().map(|(k, v)| format!("{k} ({v}x)")).collect();
                discrepancies.push(format!(
                    "{}: {} of {} instances differ from the stated coefficient; observed {}",
                    line.name(),
                    mine.len() - matching,
                    mine.len(),
                    pattern.join(", ")
                ));
            }
            lines.push(LineSummary { line: line.name().to_string(), statement: line.statement().to_string(), instances: mine.len(), matching });
        }
        let cup3_readings = entries
            .iter()
            .filter(|e| e.line == Line::Cup3.name())
            .map(|e| Cup3Reading {
                instance: e.instance.clone(),
                observed: e.observed_coefficient.clone(),
                turn_value: e.reading_turn.clone().unwrap_or_default(),
                winding_times_turn_value: e.reading_winding.clone().unwrap_or_default(),
            })
            .collect();
        Ok(TableReport { max_total_winding: max_total, lines, entries, cup3_readings, discrepancies })
    }

    fn table_entry(&self, job: &Job, winding_bound: u32) -> Result<TableEntry, HhError> {
        let map = self.map();
        let name = |m: u32| map.point_name(m as usize).to_string();
        let delta = job.m == job.n;
        let (m, n, i, j) = (job.m, job.n, job.i, job.j);
        let lam = arc_lambda(map, job.lambda, ArcSide::Left);
        let lam_turn = self.lambda_on_turn(&lam, m as usize);
        let nu_lambda = self.build_named_class(&NamedClass::Arc(lam.clone()))?;
        let ri = rat(i64::from(i));
        let rj = rat(i64::from(j));
        // (product, class on the right-hand side, stated coefficient)
        let (product, rhs, stated): (Cochain, Option<Cochain>, Rational) = match job.line {
            Line::Cup1 => (
                self.cup(&self.odd_class((m, i))?, &self.odd_class((n, j))?),
                Some(self.odd_class((m, i + j))?),
                if delta { rat(1) } else { rat(0) },
            ),
            Line::Cup2 => (
                self.cup(&self.odd_class((m, i))?, &self.even_class((n, j))?),
                Some(self.even_class((m, i + j))?),
                if delta { rat(1) } else { rat(0) },
            ),
            Line::Cup3 => (self.cup(&self.odd_class((m, i))?, &nu_lambda), Some(self.even_class((m, i))?), lam_turn.clone()),
            Line::Cup4 => {
                let kappa = self.arc_class(job.kappa)?;
                (self.cup(&kappa, &nu_lambda), None, rat(0))
            }
            Line::Cup5 => (self.cup(&self.even_class((m, i))?, &nu_lambda), None, rat(0)),
            Line::Br1 => (self.bracket(&self.odd_class((m, i))?, &self.odd_class((n, j))?), None, rat(0)),
            Line::Br2 => (
                self.bracket(&self.even_class((m, i))?, &self.odd_class((n, j))?),
                Some(self.odd_class((m, i + j))?),
                if delta { rj.clone() } else { rat(0) },
            ),
            Line::Br3 => (
                self.bracket(&self.even_class((m, i))?, &self.even_class((n, j))?),
                Some(self.even_class((m, i + j))?),
                if delta { &rj - &ri } else { rat(0) },
            ),
            Line::Br4 => (self.bracket(&nu_lambda, &self.odd_class((m, i))?), Some(self.odd_class((m, i))?), &ri * &lam_turn),
            Line::Br5 => (self.bracket(&nu_lambda, &self.even_class((m, i))?), Some(self.even_class((m, i))?), &ri * &lam_turn),
            Line::Br6 => {
                let kappa = self.arc_class(job.kappa)?;
                (self.bracket(&kappa, &nu_lambda), None, rat(0))
            }
        };
        let computed = self.classify(&product, winding_bound)?;
        let rhs_desc = match &rhs {
            Some(c) => self.classify(c, winding_bound)?,
            None => Descriptor::zero(product.parity()),
        };
        let expected = rhs_desc.scale(&stated);
        let observed = if computed.is_zero() {
            Some(rat(0))
        } else {
            computed.ratio_to(&rhs_desc)
        };
        let instance = match job.line {
            Line::Cup3 | Line::Cup5 | Line::Br4 | Line::Br5 => {
                format!("m={} i={i} lambda=nu[{}]", name(m), map.arc_name(job.lambda))
            }
            Line::Cup4 | Line::Br6 => {
                format!("kappa=nu[{}] lambda=nu[{}]", map.arc_name(job.kappa), map.arc_name(job.lambda))
            }
            _ => format!("m={} n={} i={i} j={j}", name(m), name(n)),
        };
        let (matches, reading_turn, reading_winding) = if job.line == Line::Cup3 {
            let a = rhs_desc.scale(&lam_turn);
            let b = rhs_desc.scale(&(&ri * &lam_turn));
            (computed == a || computed == b, Some(lam_turn.to_string()), Some((&ri * &lam_turn).to_string()))
        } else {
            (computed == expected, None, None)
        };
        Ok(TableEntry {
            line: job.line.name().to_string(),
            instance,
            stated_coefficient: stated.to_string(),
            observed_coefficient: observed.map(|q| q.to_string()),
            expected: expected.render(map),
            computed: computed.render(map),
            matches,
            reading_turn,
            reading_winding,
        })
    }

    /// Graded symmetry of the cup product on classes:
    /// `ν ⌣ η` against `(−1)^{(‖ν‖−1)(‖η‖−1)} η ⌣ ν`.
    pub fn cup_symmetry(&self, classes: &[Cochain], max_winding: u32) -> Result<Vec<RelationEntry>, HhError> {
        let map = self.map();
        let mut out = Vec::new();
        for x in classes {
            for y in classes {
                let lhs = self.classify(&self.cup(x, y), max_winding)?;
                let sign = (x.parity() + 1) * (y.parity() + 1) % 2 == 1;
                let rhs = self.classify(&self.cup(y, x), max_winding)?.scale(&rat(if sign { -1 } else { 1 }));
                out.push(RelationEntry {
                    instance: format!("{} , {}", x.label(), y.label()),
                    lhs: lhs.render(map),
                    rhs: rhs.render(map),
                    holds: lhs == rhs,
                });
            }
        }
        Ok(out)
    }

    /// `[ν, η ⌣ ω] = [ν, η] ⌣ ω + (−1)^{‖ν‖(‖η‖−1)} η ⌣ [ν, ω]` on classes.
    pub fn leibniz(&self, classes: &[Cochain], max_winding: u32) -> Result<Vec<RelationEntry>, HhError> {
        let map = self.map();
        let mut out = Vec::new();
        for x in classes {
            for y in classes {
                for z in classes {
                    let lhs = self.classify(&self.bracket(x, &self.cup(y, z)), max_winding)?;
                    let first = self.classify(&self.cup(&self.bracket(x, y), z), max_winding)?;
                    let second = self.classify(&self.cup(y, &self.bracket(x, z)), max_winding)?;
                    let negative = x.parity() * (y.parity() + 1) % 2 == 1;
                    let rhs = first.add(&second.scale(&rat(if negative { -1 } else { 1 })));
                    out.push(RelationEntry {
                        instance: format!("{} , {} , {}", x.label(), y.label(), z.label()),
                        lhs: lhs.render(map),
                        rhs: rhs.render(map),
                        holds: lhs == rhs,
                    });
                }
            }
        }
        Ok(out)
    }

    // ---- gauge recursion ----

    /// ε with ε¹(arrow) = 0 and `ε¹(αβ) = ε¹(α)β + αε¹(β) − (−1)^{|β|} ν²(α, β)`, on all
    /// paths of length `<= max_len`, splitting off the first arrow β.
    pub fn gauge_step(&self, nu: &Cochain, max_len: u32) -> Result<Cochain, HhError> {
        if !self.eval(nu, &[])?.is_zero() {
            return Err(HhError::Precondition(format!("{} has a nonzero arity-0 component", nu.label())));
        }
        let mut paths = self.gentle.paths_up_to(max_len);
        for p in &paths {
            if !self.eval(nu, &[Basis::Path(*p)])?.is_zero() {
                return Err(HhError::Precondition(format!(
                    "{} is nonzero in arity 1 on {}",
                    nu.label(),
                    self.gentle.render_path(p)
                )));
            }
        }
        paths.sort_by_key(|p| p.len);
        let mut eps: HashMap<Vec<Basis>, Element> = HashMap::new();
        for p in paths.iter().filter(|p| p.len >= 2) {
            let beta = Path { len: 1, ..*p };
            let alpha = self.gentle.norm(p.point, p.start + 1, p.len - 1);
            let value = self.gauge_rule(nu, &eps, &alpha, &beta)?;
            if !value.is_zero() {
                eps.insert(vec![Basis::Path(*p)], value);
            }
        }
        Ok(Cochain::new(0, format!("gauge({})", nu.label()), Provenance::Gauge, Node::Table { entries: eps, max_len }))
    }

    /// `ε¹(x)y + xε¹(y) − (−1)^{|y|} ν²(x, y)` with ε taken from a table.
    fn gauge_rule(&self, nu: &Cochain, eps: &HashMap<Vec<Basis>, Element>, x: &Path, y: &Path) -> Result<Element, HhError> {
        let g = &self.gentle;
        let zero = Element::zero(ORDER);
        let ex = eps.get(&vec![Basis::Path(*x)]).unwrap_or(&zero);
        let ey = eps.get(&vec![Basis::Path(*y)]).unwrap_or(&zero);
        let mut out = g.compose(ex, &g.path(*y, ORDER));
        out.add_assign(&g.compose(&g.path(*x, ORDER), ey));
        let nu2 = self.eval(nu, &[Basis::Path(*x), Basis::Path(*y)])?;
        out.add_assign(&nu2.signed(g.path_parity(y) == 0));
        Ok(out)
    }

    /// Checks for a gauge term ε of ν: `(dε)² = ν²` on pairs, `dε = 0` on polygon
    /// sequences, and independence of the recursion from the split.
    pub fn gauge_report(&self, nu: &Cochain, eps: &Cochain, max_len: u32) -> Result<GaugeReport, HhError> {
        let g = &self.gentle;
        let d_eps = self.differential(eps);
        let paths = g.paths_up_to(max_len);
        let mut pairs_nonzero_product = 0;
        let mut pair_failures = Vec::new();
        let mut pairs_chained = 0;
        let mut chained_failures = Vec::new();
        for x in &paths {
            for y in &paths {
                if x.len + y.len > max_len || g.tail_arc(&Basis::Path(*x)) != g.head_arc(&Basis::Path(*y)) {
                    continue;
                }
                let t = [Basis::Path(*x), Basis::Path(*y)];
                let lhs = self.eval(&d_eps, &t)?;
                let rhs = self.eval(nu, &t)?;
                let msg = || format!("({}, {})", g.render_path(x), g.render_path(y));
                pairs_chained += 1;
                if lhs != rhs {
                    chained_failures.push(msg());
                }
                if g.compose_paths(x, y).is_some() {
                    pairs_nonzero_product += 1;
                    if lhs != rhs {
                        pair_failures.push(msg());
                    }
                }
            }
        }
        let map = self.map();
        let mut polygons = 0;
        let mut polygon_failures = Vec::new();
        for f in map.faces() {
            let k = f.corners.len();
            for s in 0..k {
                // path order c_s, c_{s+1}, …; written order is reversed
                let t: Vec<Basis> = (0..k).rev().map(|i| Basis::Path(g.arrow(f.corners[(s + i) % k]))).collect();
                polygons += 1;
                if !self.eval(&d_eps, &t)?.is_zero() {
                    polygon_failures.push(t.iter().map(|b| g.render_basis(b)).collect::<Vec<_>>().join(", "));
                }
            }
        }
        // ε¹((αβ)γ) = ε¹(α(βγ)) through the recursion rule
        let table = self.table_of(eps)?;
        let mut triples = 0;
        let mut triple_failures = Vec::new();
        for x in &paths {
            for y in &paths {
                let Some(xy) = g.compose_paths(x, y) else { continue };
                for z in &paths {
                    if xy.len + z.len > max_len {
                        continue;
                    }
                    let (Some(yz), Some(_)) = (g.compose_paths(y, z), g.compose_paths(&xy, z)) else { continue };
                    triples += 1;
                    let left = self.gauge_rule(nu, &table, &xy, z)?;
                    let right = self.gauge_rule(nu, &table, x, &yz)?;
                    if left != right {
                        triple_failures.push(format!("({}, {}, {})", g.render_path(x), g.render_path(y), g.render_path(z)));
                    }
                }
            }
        }
        Ok(GaugeReport {
            max_len,
            nonzero_entries: table.len(),
            pairs_nonzero_product,
            pair_failures,
            pairs_chained,
            chained_failures,
            polygons,
            polygon_failures,
            triples,
            triple_failures,
        })
    }

    fn table_of(&self, c: &Cochain) -> Result<HashMap<Vec<Basis>, Element>, HhError> {
        match &c.0.node {
            Node::Table { entries, .. } => Ok(entries.clone()),
            _ => Err(HhError::Precondition(format!("{} is not a table cochain", c.label()))),
        }
    }

    // ---- gradings ----

    fn degree_of(&self, b: &Basis) -> Vec<i128> {
        match b {
            Basis::Idem(_) => self.grading.vector(std::iter::empty()),
            Basis::Path(p) => self.grading.vector((0..p.len).map(|i| self.gentle.corner(p, i))),
        }
    }

    /// Observed G-degree of a cochain on the test tuples: output degree minus the
    /// summed input degrees, which must agree modulo face relations.
    pub fn observed_degree(&self, c: &Cochain, max_arity: usize, max_len: u32) -> Result<DegreeObservation, HhError> {
        let mut degree: Option<Vec<i128>> = None;
        let mut terms = 0;
        let mut homogeneous = true;
        for t in self.test_tuples(max_arity, max_len) {
            let v = self.eval(c, &t)?;
            let mut input = self.grading.vector(std::iter::empty());
            for b in &t {
                for (x, y) in input.iter_mut().zip(self.degree_of(b)) {
                    *x += y;
                }
            }
            for b in v.terms().keys() {
                let shift: Vec<i128> = self.degree_of(b).iter().zip(&input).map(|(x, y)| x - y).collect();
                terms += 1;
                match &degree {
                    None => degree = Some(shift),
                    Some(d) => homogeneous &= self.grading.same_degree(d, &shift),
                }
            }
        }
        Ok(DegreeObservation { cochain: c.label().to_string(), terms, homogeneous, degree })
    }

    /// G-degree behaviour of d, ⌣ and [·,·] on homogeneous named classes, plus the
    /// Σ deg ℓ_m comparison.
    pub fn degree_audit(&self, max_len: u32) -> Result<DegreeAudit, HhError> {
        let m0 = (0, 1);
        let a0 = self.non_tree_arcs().first().copied().unwrap_or(0);
        let odd = self.odd_class(m0)?;
        let even = self.even_class(m0)?;
        let arc = self.arc_class(a0)?;
        let unit = self.unit_class();
        let mut observations = Vec::new();
        for c in [&unit, &odd, &even, &arc] {
            observations.push(self.observed_degree(c, 2, max_len)?);
        }
        let mut composites = Vec::new();
        let cases: Vec<(Cochain, Vec<&Cochain>)> = vec![
            (self.cup(&odd, &arc), vec![&odd, &arc]),
            (self.cup(&odd, &even), vec![&odd, &even]),
            (self.bracket(&even, &odd), vec![&even, &odd]),
            (self.bracket(&arc, &even), vec![&arc, &even]),
            (self.differential(&arc), vec![&arc]),
        ];
        for (c, parts) in cases {
            let obs = self.observed_degree(&c, 2, max_len)?;
            let mut sum = self.grading.vector(std::iter::empty());
            let mut known = true;
            for p in parts {
                match observations.iter().find(|o| o.cochain == p.label()).and_then(|o| o.degree.clone()) {
                    Some(d) => sum.iter_mut().zip(d).for_each(|(x, y)| *x += y),
                    None => known = false,
                }
            }
            let additive = match &obs.degree {
                Some(d) => known && self.grading.same_degree(d, &sum),
                None => true,
            };
            composites.push(CompositeDegree { cochain: obs.cochain.clone(), homogeneous: obs.homogeneous, additive });
        }
        let report = self.grading.report(self.map());
        Ok(DegreeAudit {
            observations,
            composites,
            sum_deg_ell: report.sum_deg_ell,
            twice_abs_chi: report.twice_abs_chi,
            lemma_sign_value: report.lemma_sign_value,
            lemma_sign_discrepancy: report.lemma_sign_discrepancy,
        })
    }
}

enum Slot<'a> {
    Fixed(&'a [Basis]),
    Value(&'a Element),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Line {
    Cup1,
    Cup2,
    Cup3,
    Cup4,
    Cup5,
    Br1,
    Br2,
    Br3,
    Br4,
    Br5,
    Br6,
}

impl Line {
    const ALL: [Line; 11] =
        [Line::Cup1, Line::Cup2, Line::Cup3, Line::Cup4, Line::Cup5, Line::Br1, Line::Br2, Line::Br3, Line::Br4, Line::Br5, Line::Br6];
    fn name(self) -> &'static str {
        match self {
            Line::Cup1 => "cup1",
            Line::Cup2 => "cup2",
            Line::Cup3 => "cup3",
            Line::Cup4 => "cup4",
            Line::Cup5 => "cup5",
            Line::Br1 => "bracket1",
            Line::Br2 => "bracket2",
            Line::Br3 => "bracket3",
            Line::Br4 => "bracket4",
            Line::Br5 => "bracket5",
            Line::Br6 => "bracket6",
        }
    }
    fn statement(self) -> &'static str {
        match self {
            Line::Cup1 => "o(m,i) cup o(n,j) = delta_mn o(m,i+j)",
            Line::Cup2 => "o(m,i) cup e(n,j) = delta_mn e(m,i+j)",
            Line::Cup3 => "o(m,i) cup nu_lambda = s e(m,i), s = lambda(l_m) or i*lambda(l_m)",
            Line::Cup4 => "nu_kappa cup nu_lambda = 0",
            Line::Cup5 => "e(m,i) cup nu_lambda = 0",
            Line::Br1 => "[o(m,i), o(n,j)] = 0",
            Line::Br2 => "[e(m,i), o(n,j)] = delta_mn j o(m,i+j)",
            Line::Br3 => "[e(m,i), e(n,j)] = delta_mn (j-i) e(m,i+j)",
            Line::Br4 => "[nu_lambda, o(m,i)] = i lambda(l_m) o(m,i)",
            Line::Br5 => "[nu_lambda, e(m,i)] = i lambda(l_m) e(m,i)",
            Line::Br6 => "[nu_kappa, nu_lambda] = 0",
        }
    }
}

struct Job {
    line: Line,
    m: u32,
    n: u32,
    i: u32,
    j: u32,
    kappa: usize,
    lambda: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VanishingReport {
    pub cochain: String,
    pub max_arity: usize,
    pub max_len: u32,
    pub tuples_checked: usize,
    pub failures: Vec<String>,
}

impl VanishingReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceSumEntry {
    pub face: String,
    pub plain_sum: String,
    pub oriented_sum: String,
    pub oriented_vanishes: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcClassReport {
    pub arcs: usize,
    pub faces: usize,
    pub tree: Vec<String>,
    pub dim_s: usize,
    pub expected_dim_s: usize,
    pub commutator_rank: usize,
    pub dim_quotient: usize,
    pub basis: Vec<String>,
    pub basis_independent: bool,
    /// #M + 2g − 1.
    pub expected_dim: i64,
    /// 2g − 1 + #arcs, as the dimension lemma is stated.
    pub lemma_statement_value: i64,
    pub lemma_statement_discrepancy: bool,
    pub left_equals_right: bool,
    pub face_sums: Vec<FaceSumEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ArcChoiceEntry {
    pub point: String,
    pub winding: u32,
    pub descriptors: Vec<(String, String)>,
    pub agree: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableEntry {
    pub line: String,
    pub instance: String,
    pub stated_coefficient: String,
    /// Scalar `q` with computed = q·(right-hand class), when one exists.
    pub observed_coefficient: Option<String>,
    pub expected: String,
    pub computed: String,
    pub matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reading_turn: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reading_winding: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LineSummary {
    pub line: String,
    pub statement: String,
    pub instances: usize,
    pub matching: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Cup3Reading {
    pub instance: String,
    pub observed: Option<String>,
    /// λ(ℓ_m).
    pub turn_value: String,
    /// i·λ(ℓ_m).
    pub winding_times_turn_value: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub max_total_winding: u32,
    pub lines: Vec<LineSummary>,
    pub entries: Vec<TableEntry>,
    pub cup3_readings: Vec<Cup3Reading>,
    pub discrepancies: Vec<String>,
}

impl TableReport {
    pub fn holds(&self) -> bool {
        self.discrepancies.is_empty()
    }
    pub fn line(&self, name: &str) -> Option<&LineSummary> {
        self.lines.iter().find(|l| l.line == name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RelationEntry {
    pub instance: String,
    pub lhs: String,
    pub rhs: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GaugeReport {
    pub max_len: u32,
    pub nonzero_entries: usize,
    /// Pairs with αβ ≠ 0.
    pub pairs_nonzero_product: usize,
    pub pair_failures: Vec<String>,
    /// All arc-chained pairs, including αβ = 0.
    pub pairs_chained: usize,
    pub chained_failures: Vec<String>,
    pub polygons: usize,
    pub polygon_failures: Vec<String>,
    pub triples: usize,
    pub triple_failures: Vec<String>,
}

impl GaugeReport {
    pub fn holds(&self) -> bool {
        self.pair_failures.is_empty() && self.polygon_failures.is_empty() && self.triple_failures.is_empty()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeObservation {
    pub cochain: String,
    pub terms: usize,
    pub homogeneous: bool,
    pub degree: Option<Vec<i128>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositeDegree {
    pub cochain: String,
    pub homogeneous: bool,
    pub additive: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeAudit {
    pub observations: Vec<DegreeObservation>,
    pub composites: Vec<CompositeDegree>,
    pub sum_deg_ell: i64,
    pub twice_abs_chi: i64,
    pub lemma_sign_value: i64,
    pub lemma_sign_discrepancy: bool,
}

impl DegreeAudit {
    pub fn holds(&self) -> bool {
        self.observations.iter().all(|o| o.homogeneous)
            && self.composites.iter().all(|c| c.homogeneous && c.additive)
            && self.sum_deg_ell.abs() == self.twice_abs_chi
    }
}

// ---- free helpers ----

/// λ of ν_{a,L} (+1 on the arrow into `a` at its head, −1 on the arrow out of `a` at
/// its tail, both in the left face) or ν_{a,R} (the right-face pair, +1 out of `a` at
/// its head, −1 into `a` at its tail).
pub fn arc_lambda(map: &CombinatorialMap, a: usize, side: ArcSide) -> Vec<Rational> {
    let mut v = vec![Rational::zero(); map.dart_count()];
    let (tail, head) = (2 * a, 2 * a + 1);
    match side {
        ArcSide::Left => {
            v[map.pred(head)] += rat(1);
            v[tail] -= rat(1);
        }
        ArcSide::Right => {
            v[head] += rat(1);
            v[map.pred(tail)] -= rat(1);
        }
    }
    v
}

/// λ of the inner derivation [1_a, −].
pub fn commutator_lambda(map: &CombinatorialMap, a: usize) -> Vec<Rational> {
    (0..map.dart_count())
        .map(|d| {
            let into = CombinatorialMap::arc_of(map.succ(d)) == a;
            let out_of = CombinatorialMap::arc_of(d) == a;
            rat(i64::from(into) - i64::from(out_of))
        })
        .collect()
}

pub fn check_face_sums(map: &CombinatorialMap, lambda: &[Rational]) -> Result<(), HhError> {
    if lambda.len() != map.dart_count() {
        return Err(HhError::ArrowCount { expected: map.dart_count(), got: lambda.len() });
    }
    for (face, f) in map.faces().iter().enumerate() {
        let sum: Rational = f.corners.iter().map(|&c| lambda[c].clone()).sum();
        if !sum.is_zero() {
            return Err(HhError::FaceSum { face, sum: sum.to_string() });
        }
    }
    Ok(())
}

/// Breadth-first spanning tree of the face graph from face 0, arcs taken in index order.
pub fn bfs_spanning_tree(map: &CombinatorialMap) -> Vec<usize> {
    let faces = map.faces().len();
    let mut seen = vec![false; faces];
    let mut tree = Vec::new();
    let mut queue = VecDeque::from([0usize]);
    if faces > 0 {
        seen[0] = true;
    }
    while let Some(f) = queue.pop_front() {
        for a in 0..map.arc_count() {
            let (l, r) = (map.left_face(a), map.right_face(a));
            let other = if l == f {
                r
            } else if r == f {
                l
            } else {
                continue;
            };
            if !seen[other] {
                seen[other] = true;
                tree.push(a);
                queue.push_back(other);
            }
        }
    }
    tree.sort_unstable();
    tree
}

fn validate_tree(map: &CombinatorialMap, tree: &[usize]) -> Result<(), HhError> {
    let faces = map.faces().len();
    let bad = || HhError::NotSpanningTree(tree.to_vec());
    if tree.len() + 1 != faces || tree.iter().any(|&a| a >= map.arc_count()) {
        return Err(bad());
    }
    let mut parent: Vec<usize> = (0..faces).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &a in tree {
        let (l, r) = (find(&mut parent, map.left_face(a)), find(&mut parent, map.right_face(a)));
        if l == r {
            return Err(bad());
        }
        parent[l] = r;
    }
    Ok(())
}

// ---- assembled report ----

#[derive(Debug, Clone, Serialize)]
pub struct HhBounds {
    pub winding: u32,
    pub max_arity: usize,
    pub check_arity: usize,
    pub check_len: u32,
    pub table_total_winding: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasisEntry {
    pub class: String,
    pub descriptor: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct HhReport {
    pub bounds: HhBounds,
    pub tree: Vec<String>,
    pub odd_basis: Vec<BasisEntry>,
    pub even_basis: Vec<BasisEntry>,
    pub odd_rank: usize,
    pub even_rank: usize,
    pub bases_independent: bool,
    pub cocycle_checks: Vec<VanishingReport>,
    pub d_squared_checks: Vec<VanishingReport>,
    /// d of the sample cochain, expected nonzero so the d∘d check is not vacuous.
    pub sample_differential: VanishingReport,
    pub arc_classes: ArcClassReport,
    pub arc_choice: Vec<ArcChoiceEntry>,
    /// Rows and columns follow `table_labels`.
    pub table_labels: Vec<String>,
    pub cup_table: Vec<Vec<String>>,
    pub bracket_table: Vec<Vec<String>>,
    pub tables: TableReport,
    pub cup_symmetry: Vec<RelationEntry>,
    pub leibniz: Vec<RelationEntry>,
    pub degree_audit: DegreeAudit,
    pub discrepancies: Vec<String>,
}

impl HhReport {
    /// Tables match and both bases are independent.
    pub fn ok(&self) -> bool {
        self.tables.holds() && self.bases_independent
    }
}

impl HhContext {
    /// A fixed even non-cocycle used to exercise d∘d: a length-weighted rescaling of paths,
    /// which is no derivation. Even cochains have no arity-0 part here since the only
    /// endomorphism paths are powers of `ℓ`.
    pub fn sample_cochain(&self, max_len: u32) -> Cochain {
        let g = &self.gentle;
        let mut entries = HashMap::new();
        for p in g.paths_up_to(max_len) {
            let weight = rat(i64::from(p.start + p.len * p.len) + 1);
            entries.insert(vec![Basis::Path(p)], g.path(p, ORDER).scale_rat(&weight));
        }
        self.table(0, "sample", entries, max_len)
    }

    pub fn hh_report(&self, max_winding: u32, check_arity: usize, check_len: u32) -> Result<HhReport, HhError> {
        let map = self.map();
        let odd = self.odd_basis(max_winding)?;
        let even = self.even_basis(max_winding)?;
        let classify_all = |cs: &[Cochain]| -> Result<Vec<Descriptor>, HhError> {
            cs.par_iter().map(|c| self.classify(c, max_winding)).collect()
        };
        let odd_desc = classify_all(&odd)?;
        let even_desc = classify_all(&even)?;
        let odd_rank = Self::descriptor_rank(&odd_desc);
        let even_rank = Self::descriptor_rank(&even_desc);
        let entries = |cs: &[Cochain], ds: &[Descriptor]| -> Vec<BasisEntry> {
            cs.iter().zip(ds).map(|(c, d)| BasisEntry { class: c.label().to_string(), descriptor: d.render(map) }).collect()
        };

        let m0 = (0, 1);
        let arc0 = self.non_tree_arcs().first().copied().unwrap_or(0);
        let mut probes = vec![self.unit_class(), self.odd_class(m0)?, self.arc_class(arc0)?, self.even_class(m0)?];
        let mut cocycle_checks = Vec::new();
        for c in &probes {
            cocycle_checks.push(self.cocycle_check(c, check_arity, check_len)?);
        }
        if max_winding >= 2 {
            cocycle_checks.push(self.cocycle_check(&self.odd_class((0, 2))?, check_arity, check_len)?);
        }
        // d∘d feeds μ-outputs back in, so the table must cover longer inputs
        probes.push(self.sample_cochain(4 * check_len.min(3)));
        let sample_differential = self.cocycle_check(probes.last().expect("sample pushed"), check_arity.min(2), check_len.min(3))?;
        let mut d_squared_checks = Vec::new();
        for c in &probes {
            d_squared_checks.push(self.d_squared_check(c, check_arity.min(3), check_len.min(3))?);
        }

        let all: Vec<Cochain> = odd.iter().chain(even.iter()).cloned().collect();
        let products: Vec<Result<(String, String), HhError>> = all
            .par_iter()
            .flat_map_iter(|x| all.iter().map(move |y| (x.clone(), y.clone())))
            .map(|(x, y)| {
                let c = self.classify(&self.cup(&x, &y), 2 * max_winding)?.render(map);
                let b = self.classify(&self.bracket(&x, &y), 2 * max_winding)?.render(map);
                Ok((c, b))
            })
            .collect();
        let products: Vec<(String, String)> = products.into_iter().collect::<Result<_, _>>()?;
        let n = all.len();
        let cup_table = (0..n).map(|i| (0..n).map(|j| products[i * n + j].0.clone()).collect()).collect();
        let bracket_table = (0..n).map(|i| (0..n).map(|j| products[i * n + j].1.clone()).collect()).collect();

        let tables = self.verify_tables(max_winding + 1)?;
        let small = [self.unit_class(), self.odd_class(m0)?, self.even_class(m0)?, self.arc_class(arc0)?];
        let cup_symmetry = self.cup_symmetry(&small, 2 * max_winding)?;
        let leibniz = self.leibniz(&small, 3 * max_winding)?;
        let degree_audit = self.degree_audit(check_len.min(3))?;
        let arc_classes = self.arc_class_space()?;
        let arc_choice = self.arc_choice_independence(max_winding)?;

        let mut discrepancies = tables.discrepancies.clone();
        if arc_classes.lemma_statement_discrepancy {
            discrepancies.push(format!(
                "arc classes: dim S/[k,-] = {} = #M + 2g - 1, while 2g - 1 + #arcs = {}",
                arc_classes.dim_quotient, arc_classes.lemma_statement_value
            ));
        }
        let failed_sym: Vec<&RelationEntry> = cup_symmetry.iter().filter(|e| !e.holds).collect();
        if !failed_sym.is_empty() {
            discrepancies.push(format!(
                "cup graded symmetry fails on {} of {} ordered pairs, e.g. {}: {} vs {}",
                failed_sym.len(),
                cup_symmetry.len(),
                failed_sym[0].instance,
                failed_sym[0].lhs,
                failed_sym[0].rhs
            ));
        }
        let failed_leibniz = leibniz.iter().filter(|e| !e.holds).count();
        if failed_leibniz > 0 {
            discrepancies.push(format!("Leibniz compatibility fails on {failed_leibniz} of {} triples", leibniz.len()));
        }
        if degree_audit.lemma_sign_discrepancy {
            discrepancies.push(format!(
                "sum of deg l_m is {} while the closed formula 4 - 4g - 2#M gives {}",
                degree_audit.sum_deg_ell, degree_audit.lemma_sign_value
            ));
        }
        Ok(HhReport {
            bounds: HhBounds {
                winding: max_winding,
                max_arity: self.max_arity,
                check_arity,
                check_len,
                table_total_winding: max_winding + 1,
            },
            tree: self.tree.iter().map(|&a| map.arc_name(a).to_string()).collect(),
            odd_basis: entries(&odd, &odd_desc),
            even_basis: entries(&even, &even_desc),
            odd_rank,
            even_rank,
            bases_independent: odd_rank == odd.len() && even_rank == even.len(),
            cocycle_checks,
            d_squared_checks,
            sample_differential,
            arc_classes,
            arc_choice,
            table_labels: all.iter().map(|c| c.label().to_string()).collect(),
            cup_table,
            bracket_table,
            tables,
            cup_symmetry,
            leibniz,
            degree_audit,
            discrepancies,
        })
    }
}
