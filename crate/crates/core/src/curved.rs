//! The curved deformed products: curvature from the central element `r`, higher
//! products from orbigons, and bounded verification of the curved A∞ relations.

use crate::coeffs::{Series, Var};
use crate::gentle::{Basis, Element, Gentle, Path};
use crate::grading::GradingData;
use crate::orbigon::{OrbiPoint, OrbigonEngine, OrbigonError};
use crate::surface::CombinatorialMap;
use parking_lot::RwLock;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurvedError {
    #[error("arity {arity} exceeds the bound {max}")]
    ArityBound { arity: usize, max: usize },
    #[error("entry of length {len} exceeds the bound {max}")]
    LengthBound { len: u32, max: u32 },
    #[error("deformation parameter {0} has a constant term")]
    NotInMaxIdeal(String),
    #[error("deformation parameters mix truncation orders")]
    OrderMismatch,
    #[error("unknown marked point index {0}")]
    UnknownPoint(u32),
    #[error(transparent)]
    Orbigon(#[from] OrbigonError),
}

/// Coefficients of `r = r0 + Σ_m r_m(ℓ_m)`, keyed by orbifold point (marked point, winding).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeformationParams {
    pub r0: Series,
    pub orb: BTreeMap<OrbiPoint, Series>,
    pub order: u32,
}

impl DeformationParams {
    pub fn zero(order: u32) -> Self {
        DeformationParams { r0: Series::zero(order), orb: BTreeMap::new(), order }
    }

    /// One free variable `r[m,j]` per marked point and winding `1..=max_winding`.
    pub fn generic(map: &CombinatorialMap, order: u32, max_winding: u32) -> Self {
        let mut orb = BTreeMap::new();
        for m in 0..map.point_count() {
            for j in 1..=max_winding {
                let v = Var::orb(map.point_name(m), j).expect("winding is positive");
                orb.insert((m as u32, j), Series::var(v, order));
            }
        }
        DeformationParams { r0: Series::zero(order), orb, order }
    }

    pub fn validate(&self, map: &CombinatorialMap) -> Result<(), CurvedError> {
        let all = std::iter::once(("r0".to_string(), &self.r0))
            .chain(self.orb.iter().map(|(p, s)| (format!("r[{},{}]", p.0, p.1), s)));
        for (name, s) in all {
            if s.order() != self.order {
                return Err(CurvedError::OrderMismatch);
            }
            if !s.in_max_ideal() {
                return Err(CurvedError::NotInMaxIdeal(name));
            }
        }
        if let Some(&(m, _)) = self.orb.keys().find(|(m, _)| *m as usize >= map.point_count()) {
            return Err(CurvedError::UnknownPoint(m));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.r0.is_zero() && self.orb.values().all(Series::is_zero)
    }

    /// Orbifold points with a nonzero coefficient.
    pub fn support(&self) -> BTreeSet<OrbiPoint> {
        self.orb.iter().filter(|(_, s)| !s.is_zero()).map(|(p, _)| *p).collect()
    }
}

/// The deformed products on `Gtl ⊗ R` with explicit evaluation bounds.
pub struct CurvedStructure {
    gentle: Gentle,
    params: DeformationParams,
    engine: Arc<OrbigonEngine>,
    max_arity: usize,
    max_len: u32,
    max_type: u32,
    weights: RwLock<HashMap<Vec<Path>, Series>>,
    curvature: Element,
}

impl CurvedStructure {
    pub fn new(
        gentle: Gentle,
        params: DeformationParams,
        max_arity: usize,
        max_len: u32,
    ) -> Result<Self, CurvedError> {
        params.validate(gentle.map())?;
        let support = params.support();
        // monomials of degree >= N vanish, so types longer than N - 1 never contribute
        let max_type = if support.is_empty() { 0 } else { params.order.saturating_sub(1) };
        let engine = OrbigonEngine::new(gentle.clone())?.with_allowed(support);
        let curvature = Self::build_curvature(&gentle, &params);
        Ok(CurvedStructure {
            curvature,
            gentle,
            params,
            engine: Arc::new(engine),
            max_arity,
            max_len,
            max_type,
            weights: RwLock::new(HashMap::new()),
        })
    }

    pub fn gentle(&self) -> &Gentle {
        &self.gentle
    }
    pub fn params(&self) -> &DeformationParams {
        &self.params
    }
    pub fn engine(&self) -> &OrbigonEngine {
        &self.engine
    }
    pub fn order(&self) -> u32 {
        self.params.order
    }
    pub fn max_arity(&self) -> usize {
        self.max_arity
    }
    pub fn max_len(&self) -> u32 {
        self.max_len
    }

    /// Same structure with all deformation parameters set to zero.
    pub fn reduce_uncurved(&self) -> CurvedStructure {
        CurvedStructure::new(self.gentle.clone(), DeformationParams::zero(self.order()), self.max_arity, self.max_len)
            .expect("zero parameters are valid")
    }

    /// `μ⁰(1) = r0·1 + Σ_p r_p ℓ_m^j`.
    pub fn curvature(&self) -> Element {
        self.curvature.clone()
    }

    fn build_curvature(gentle: &Gentle, params: &DeformationParams) -> Element {
        let n = params.order;
        let mut out = gentle.unit(n).scale(&params.r0);
        for (&(m, j), c) in &params.orb {
            out.add_scaled(&gentle.ell(m as usize, j, n), c);
        }
        out
    }

    /// Length of the longest path in the curvature.
    pub fn curvature_len(&self) -> u32 {
        self.params
            .orb
            .iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(&(m, j), _)| j * self.gentle.valence(m))
            .max()
            .unwrap_or(0)
    }

    fn type_coefficient(&self, ty: &[OrbiPoint]) -> Series {
        let mut c = Series::one(self.order());
        for p in ty {
            match self.params.orb.get(p) {
                Some(s) => c = &c * s,
                None => return Series::zero(self.order()),
            }
        }
        c
    }

    /// Sum of `r_ψ` over rooted orbigons with the given boundary.
    fn orbigon_weight(&self, pattern: &[Path]) -> Series {
        if let Some(w) = self.weights.read().get(pattern) {
            return w.clone();
        }
        let w = self.compute_weight(pattern);
        self.weights.write().entry(pattern.to_vec()).or_insert(w).clone()
    }

    fn compute_weight(&self, pattern: &[Path]) -> Series {
        let found = self.engine.enumerate_matching(pattern, self.max_type);
        let mut counts: BTreeMap<&[OrbiPoint], i64> = BTreeMap::new();
        for o in found.iter() {
            *counts.entry(&o.ty).or_default() += 1;
        }
        let mut total = Series::zero(self.order());
        for (ty, n) in counts {
            total = &total + &self.type_coefficient(ty).scale(&crate::coeffs::rat(n));
        }
        total
    }

    fn check_bounds(&self, inputs: &[Basis]) -> Result<(), CurvedError> {
        if inputs.len() > self.max_arity {
            return Err(CurvedError::ArityBound { arity: inputs.len(), max: self.max_arity });
        }
        if let Some(len) = inputs.iter().map(|b| self.gentle.len(b)).find(|&l| l > self.max_len) {
            return Err(CurvedError::LengthBound { len, max: self.max_len });
        }
        Ok(())
    }

    /// `μ^k(b_k, …, b_1)` on basis elements, given in written order (`inputs[0] = b_k`).
    pub fn mu_basis(&self, inputs: &[Basis]) -> Result<Element, CurvedError> {
        self.check_bounds(inputs)?;
        let n = self.order();
        let k = inputs.len();
        if k == 0 {
            return Ok(self.curvature.clone());
        }
        let mut out = Element::zero(n);
        if k == 2 {
            if let Some(ab) = self.gentle.compose_basis(&inputs[0], &inputs[1]) {
                let negative = self.gentle.parity(&inputs[1]) == 1;
                out.add_term(ab, &Series::one(n).signed(negative));
            }
        }
        let mut paths = Vec::with_capacity(k);
        for b in inputs.iter().rev() {
            match b {
                Basis::Path(p) => paths.push(*p),
                Basis::Idem(_) => return Ok(out),
            }
        }
        self.add_orbigon_terms(&paths, &mut out);
        Ok(out)
    }

    /// Front and back contributions; `b` is in path order (`b[0] = b_1`).
    fn add_orbigon_terms(&self, b: &[Path], out: &mut Element) {
        let g = &self.gentle;
        let map = g.map();
        let k = b.len();
        let meets = |x: &Path, y: &Path| g.start_dart(y) == CombinatorialMap::opp(g.end_dart(x));
        if !b.windows(2).all(|w| meets(&w[0], &w[1])) {
            return;
        }
        let first = b[0];
        let last = b[k - 1];

        // front: b_k = β·α; an exact match (β an idempotent) is counted here only
        let target = CombinatorialMap::opp(g.start_dart(&first));
        if map.point_of(target) as u32 == last.point {
            let v = g.valence(last.point);
            let offset = (map.position(target) as u32 + v - last.start) % v;
            let mut j = if offset == 0 { v } else { offset };
            while j <= last.len {
                let mut pattern = b.to_vec();
                pattern[k - 1] = Path { len: j, ..last };
                let w = self.orbigon_weight(&pattern);
                if !w.is_zero() {
                    let beta = if j == last.len {
                        Basis::Idem(CombinatorialMap::arc_of(g.end_dart(&last)) as u32)
                    } else {
                        Basis::Path(g.norm(last.point, last.start + j, last.len - j))
                    };
                    out.add_term(beta, &w);
                }
                j += v;
            }
        }

        // back: b_1 = α·γ with γ a path of positive length
        let target = CombinatorialMap::opp(g.end_dart(&last));
        if map.point_of(target) as u32 == first.point {
            let v = g.valence(first.point);
            let offset = (map.position(target) as u32 + v - first.start) % v;
            let mut j = if offset == 0 { v } else { offset };
            while j < first.len {
                let mut pattern = b.to_vec();
                pattern[0] = g.norm(first.point, first.start + j, first.len - j);
                let w = self.orbigon_weight(&pattern);
                if !w.is_zero() {
                    let gamma = Path { len: j, ..first };
                    let negative = g.path_parity(&gamma) == 1;
                    out.add_term(Basis::Path(gamma), &w.signed(negative));
                }
                j += v;
            }
        }
    }

    /// Multilinear extension of [`Self::mu_basis`]; `inputs[0]` is the leftmost entry.
    pub fn evaluate_mu(&self, inputs: &[Element]) -> Result<Element, CurvedError> {
        let n = self.order();
        let mut out = Element::zero(n);
        let mut stack: Vec<Basis> = Vec::with_capacity(inputs.len());
        self.expand(inputs, &mut stack, &Series::one(n), &mut out)?;
        Ok(out)
    }

    fn expand(&self, inputs: &[Element], stack: &mut Vec<Basis>, c: &Series, out: &mut Element) -> Result<(), CurvedError> {
        if stack.len() == inputs.len() {
            out.add_scaled(&self.mu_basis(stack)?, c);
            return Ok(());
        }
        for (b, cb) in inputs[stack.len()].terms() {
            let c2 = c * cb;
            if c2.is_zero() {
                continue;
            }
            stack.push(*b);
            self.expand(inputs, stack, &c2, out)?;
            stack.pop();
        }
        Ok(())
    }

    /// Shifted parity `‖x‖ = |x| + 1`.
    fn shifted(&self, b: &Basis) -> u8 {
        (self.gentle.parity(b) + 1) % 2
    }

    /// Residual of the curved A∞ relation on one tuple (written order):
    /// `Σ (−1)^{‖x_m‖+…+‖x_1‖} μ(x_n, …, μ^l(x_{m+l}, …, x_{m+1}), x_m, …, x_1)`.
    pub fn axiom_residual(&self, tuple: &[Basis]) -> Result<Element, CurvedError> {
        let n = tuple.len();
        let mut residual = Element::zero(self.order());
        let curvature_zero = self.params.is_zero();
        for l in 0..=n {
            if l == 0 && curvature_zero {
                continue;
            }
            for m in 0..=n - l {
                let lo = n - m - l;
                let inner = self.mu_basis(&tuple[lo..n - m])?;
                if inner.is_zero() {
                    continue;
                }
                let sign: u8 = tuple[n - m..].iter().map(|b| self.shifted(b)).sum::<u8>() % 2;
                let mut outer: Vec<Basis> = tuple.to_vec();
                for (b, c) in inner.terms() {
                    outer.splice(lo..outer.len() - m, std::iter::once(*b));
                    let value = self.mu_basis(&outer)?;
                    residual.add_scaled(&value, &c.signed(sign == 1));
                }
            }
        }
        Ok(residual)
    }

    pub fn composable_tuples(&self, arity: usize, max_len: u32, with_idempotents: bool) -> Vec<Vec<Basis>> {
        let g = &self.gentle;
        let mut by_tail: HashMap<usize, Vec<Basis>> = HashMap::new();
        for p in g.paths_up_to(max_len) {
            let b = Basis::Path(p);
            by_tail.entry(g.tail_arc(&b)).or_default().push(b);
        }
        if with_idempotents {
            for a in 0..g.map().arc_count() {
                by_tail.entry(a).or_default().push(Basis::Idem(a as u32));
            }
        }
        let mut starts: Vec<Basis> = by_tail.values().flatten().copied().collect();
        starts.sort();
        if arity == 0 {
            return vec![Vec::new()];
        }
        // grow from the rightmost entry x_1 leftwards
        let mut out = Vec::new();
        let mut stack = Vec::new();
        fn grow(
            g: &Gentle,
            by_tail: &HashMap<usize, Vec<Basis>>,
            arity: usize,
            stack: &mut Vec<Basis>,
            out: &mut Vec<Vec<Basis>>,
        ) {
            if stack.len() == arity {
                out.push(stack.iter().rev().copied().collect());
                return;
            }
            let head = g.head_arc(stack.last().unwrap());
            for b in by_tail.get(&head).into_iter().flatten() {
                stack.push(*b);
                grow(g, by_tail, arity, stack, out);
                stack.pop();
            }
        }
        for s in starts {
            stack.push(s);
            grow(g, &by_tail, arity, &mut stack, &mut out);
            stack.pop();
        }
        out
    }

    /// Visit every composable tuple of paths (arity `0..=max_arity`, lengths `<= max_len`)
    /// in parallel, grouped by the rightmost entry.
    fn for_each_tuple<R: Send>(
        &self,
        max_arity: usize,
        max_len: u32,
        with_idempotents: bool,
        f: impl Fn(&[Basis]) -> Option<R> + Sync,
    ) -> (BTreeMap<usize, u64>, Vec<R>) {
        let mut counts = BTreeMap::new();
        let mut found = Vec::new();
        for arity in 0..=max_arity {
            if arity <= 2 {
                let tuples = self.composable_tuples(arity, max_len, with_idempotents);
                counts.insert(arity, tuples.len() as u64);
                found.extend(tuples.par_iter().filter_map(|t| f(t)).collect::<Vec<_>>());
                continue;
            }
            // split the work on the two rightmost entries, then extend leftwards per task
            let seeds = self.composable_tuples(2, max_len, with_idempotents);
            let results: Vec<(u64, Vec<R>)> = seeds
                .par_iter()
                .map(|seed| {
                    let mut n = 0;
                    let mut hits = Vec::new();
                    let mut tuple: Vec<Basis> = Vec::with_capacity(arity);
                    self.extend_left(seed, arity, max_len, with_idempotents, &mut tuple, &mut |t| {
                        n += 1;
                        if let Some(r) = f(t) {
                            hits.push(r);
                        }
                    });
                    (n, hits)
                })
                .collect();
            let mut total = 0;
            for (n, hits) in results {
                total += n;
                found.extend(hits);
            }
            counts.insert(arity, total);
        }
        (counts, found)
    }

    fn extend_left(
        &self,
        seed: &[Basis],
        arity: usize,
        max_len: u32,
        with_idempotents: bool,
        scratch: &mut Vec<Basis>,
        visit: &mut dyn FnMut(&[Basis]),
    ) {
        // scratch holds the extra left entries in reverse (innermost first)
        if scratch.len() + seed.len() == arity {
            let t: Vec<Basis> = scratch.iter().rev().chain(seed.iter()).copied().collect();
            visit(&t);
            return;
        }
        let g = &self.gentle;
        let head = g.head_arc(scratch.last().unwrap_or(&seed[0]));
        let mut next: Vec<Basis> = Vec::new();
        let map = g.map();
        for d in [2 * head, 2 * head + 1] {
            let p = map.point_of(d) as u32;
            let s = map.position(d) as u32;
            for len in 1..=max_len {
                next.push(Basis::Path(Path { point: p, start: s, len }));
            }
        }
        if with_idempotents {
            next.push(Basis::Idem(head as u32));
        }
        for b in next {
            scratch.push(b);
            self.extend_left(seed, arity, max_len, with_idempotents, scratch, visit);
            scratch.pop();
        }
    }

    fn render_tuple(&self, t: &[Basis]) -> Vec<String> {
        t.iter().map(|b| self.gentle.render_basis(b)).collect()
    }

    /// Largest tuple arity whose relation only evaluates products of arity `<= max_arity`.
    pub fn relation_arity(&self, max_arity: usize) -> usize {
        if self.params.is_zero() { max_arity } else { max_arity.saturating_sub(1) }
    }

    fn check_verification_bounds(&self, max_arity: usize, max_len: u32) -> Result<(), CurvedError> {
        if max_arity > self.max_arity {
            return Err(CurvedError::ArityBound { arity: max_arity, max: self.max_arity });
        }
        let needed = (2 * max_len).max(self.curvature_len() + max_len);
        if needed > self.max_len {
            return Err(CurvedError::LengthBound { len: needed, max: self.max_len });
        }
        Ok(())
    }

    /// Check the curved A∞ relations on all composable path tuples with entry length
    /// `<= max_len` whose relation involves only products of arity `<= max_arity`
    /// (curvature insertions raise the outer arity by one). Also compares every
    /// product with its reduction at `r = 0`.
    pub fn verify_axioms(&self, max_arity: usize, max_len: u32) -> Result<AxiomReport, CurvedError> {
        self.check_verification_bounds(max_arity, max_len)?;
        let uncurved = self.reduce_uncurved();
        let (per_arity, hits) = self.for_each_tuple(self.relation_arity(max_arity), max_len, false, |t| {
            let mut problems = Vec::new();
            match self.axiom_residual(t) {
                Ok(res) if res.is_zero() => {}
                Ok(res) => problems.push(Finding::Axiom(self.gentle.render(&res))),
                Err(e) => problems.push(Finding::Error(e.to_string())),
            }
            if !t.is_empty() {
                match (self.mu_basis(t), uncurved.mu_basis(t)) {
                    (Ok(a), Ok(b)) => {
                        let killed = a.map_coeffs(|c| c.kill_vars(|_| true));
                        if killed != b {
                            problems.push(Finding::Reduction(self.gentle.render(&killed), self.gentle.render(&b)));
                        }
                    }
                    (Err(e), _) | (_, Err(e)) => problems.push(Finding::Error(e.to_string())),
                }
            }
            (!problems.is_empty()).then(|| (self.render_tuple(t), problems))
        });
        let mut violations = Vec::new();
        let mut reduction_mismatches = Vec::new();
        let mut errors = Vec::new();
        for (tuple, problems) in hits {
            for p in problems {
                match p {
                    Finding::Axiom(residual) => violations.push(Violation { tuple: tuple.clone(), residual }),
                    Finding::Reduction(got, expected) => reduction_mismatches.push(Violation {
                        tuple: tuple.clone(),
                        residual: format!("{got} != {expected}"),
                    }),
                    Finding::Error(e) => errors.push(Violation { tuple: tuple.clone(), residual: e }),
                }
            }
        }
        let curvature = self.curvature();
        Ok(AxiomReport {
            max_arity,
            max_len,
            order: self.order(),
            tuples_checked: per_arity.values().sum(),
            per_arity,
            curvature: self.gentle.render(&curvature),
            curvature_central: self.gentle.is_central(&curvature),
            violations,
            reduction_mismatches,
            errors,
        })
    }

    /// Parity and G-degree of every nonzero product on composable path tuples.
    pub fn parity_check(&self, max_arity: usize, max_len: u32) -> Result<ParityReport, CurvedError> {
        if max_arity > self.max_arity {
            return Err(CurvedError::ArityBound { arity: max_arity, max: self.max_arity });
        }
        if max_len > self.max_len {
            return Err(CurvedError::LengthBound { len: max_len, max: self.max_len });
        }
        let grading = GradingData::new(self.gentle.map());
        let (per_arity, hits) = self.for_each_tuple(max_arity, max_len, false, |t| {
            let out = match self.mu_basis(t) {
                Ok(o) => o,
                Err(e) => return Some((self.render_tuple(t), e.to_string())),
            };
            let expected_parity = (t.iter().map(|b| u32::from(self.gentle.parity(b))).sum::<u32>() + t.len() as u32) % 2;
            let input_degree = t.iter().fold(grading.vector([]), |mut acc, b| {
                add_into(&mut acc, &self.degree_vector(&grading, b));
                acc
            });
            for (b, c) in out.terms() {
                if u32::from(self.gentle.parity(b)) != expected_parity {
                    return Some((self.render_tuple(t), format!("parity of {}", self.gentle.render_basis(b))));
                }
                for (mono, _) in c.terms() {
                    let mut deg = self.degree_vector(&grading, b);
                    for (v, e) in mono.factors() {
                        if let Var::Orb { point, winding } = v {
                            let m = self.gentle.map().point_index(point).expect("known point");
                            for &d in self.gentle.map().rotation(m) {
                                deg[d] -= i128::from(winding * e);
                            }
                        }
                    }
                    if !grading.same_degree(&deg, &input_degree) {
                        return Some((self.render_tuple(t), format!("G-degree of {}", self.gentle.render_basis(b))));
                    }
                }
            }
            None
        });
        Ok(ParityReport {
            tuples_checked: per_arity.values().sum(),
            per_arity,
            violations: hits.into_iter().map(|(tuple, residual)| Violation { tuple, residual }).collect(),
        })
    }

    fn degree_vector(&self, grading: &GradingData, b: &Basis) -> Vec<i128> {
        match b {
            Basis::Idem(_) => grading.vector([]),
            Basis::Path(p) => grading.vector((0..p.len).map(|i| self.gentle.corner(p, i))),
        }
    }

    /// Tuples containing an idempotent: every product other than `μ²` must vanish.
    pub fn strictness(&self, max_arity: usize, max_len: u32) -> Result<StrictnessReport, CurvedError> {
        let (per_arity, hits) = self.for_each_tuple(max_arity.min(self.max_arity), max_len, true, |t| {
            if t.len() == 2 || !t.iter().any(|b| matches!(b, Basis::Idem(_))) {
                return None;
            }
            match self.mu_basis(t) {
                Ok(o) if o.is_zero() => None,
                Ok(o) => Some(Violation { tuple: self.render_tuple(t), residual: self.gentle.render(&o) }),
                Err(e) => Some(Violation { tuple: self.render_tuple(t), residual: e.to_string() }),
            }
        });
        Ok(StrictnessReport { tuples_checked: per_arity.values().sum(), violations: hits })
    }
}

fn add_into(acc: &mut [i128], v: &[i128]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

enum Finding {
    Axiom(String),
    Reduction(String, String),
    Error(String),
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Violation {
    pub tuple: Vec<String>,
    pub residual: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub max_arity: usize,
    pub max_len: u32,
    pub order: u32,
    pub tuples_checked: u64,
    pub per_arity: BTreeMap<usize, u64>,
    pub curvature: String,
    pub curvature_central: bool,
    pub violations: Vec<Violation>,
    pub reduction_mismatches: Vec<Violation>,
    pub errors: Vec<Violation>,
}

impl AxiomReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.reduction_mismatches.is_empty() && self.errors.is_empty() && self.curvature_central
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParityReport {
    pub tuples_checked: u64,
    pub per_arity: BTreeMap<usize, u64>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrictnessReport {
    pub tuples_checked: u64,
    pub violations: Vec<Violation>,
}
