//! Truncated multivariate polynomials over ℚ, modelling the local coefficient ring.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("truncation order mismatch: {0} vs {1}")]
    OrderMismatch(u32, u32),
    #[error("winding must be at least 1")]
    ZeroWinding,
}

/// Ring variable. The derived order (R0, then Orb by (point, winding), then Hbar)
/// is the canonical printing order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    R0,
    Orb { point: Arc<str>, winding: u32 },
    Hbar,
}

impl Var {
    pub fn orb(point: &str, winding: u32) -> Result<Var, CoeffError> {
        if winding == 0 {
            return Err(CoeffError::ZeroWinding);
        }
        Ok(Var::Orb { point: Arc::from(point), winding })
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::R0 => write!(f, "r0"),
            Var::Orb { point, winding } => write!(f, "r[{point},{winding}]"),
            Var::Hbar => write!(f, "h"),
        }
    }
}

/// Sorted list of (variable, exponent) with positive exponents.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(Vec<(Var, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }
    pub fn var(v: Var) -> Self {
        Monomial(vec![(v, 1)])
    }
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }
    pub fn exponent(&self, v: &Var) -> u32 {
        self.0.iter().find(|(w, _)| w == v).map_or(0, |(_, e)| *e)
    }
    pub fn factors(&self) -> &[(Var, u32)] {
        &self.0
    }
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }
    fn without(&self, v: &Var) -> Monomial {
        Monomial(self.0.iter().filter(|(w, _)| w != v).cloned().collect())
    }
    /// Graded lexicographic comparison used for printing.
    fn grlex(&self, other: &Monomial) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            // larger exponent on an earlier variable comes first
            for (a, b) in self.0.iter().zip(other.0.iter()) {
                let c = a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1));
                if c != Ordering::Equal {
                    return c;
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(v, e)| if *e == 1 { v.to_string() } else { format!("{v}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Element of ℚ[vars] / (monomials of total degree ≥ order).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Series {
    order: u32,
    /// Sorted by monomial, no zero coefficients.
    terms: Vec<(Monomial, Rational)>,
}

impl Series {
    pub fn zero(order: u32) -> Self {
        assert!(order >= 1, "truncation order must be at least 1");
        Series { order, terms: Vec::new() }
    }
    pub fn one(order: u32) -> Self {
        Self::constant(rat(1), order)
    }
    pub fn constant(c: Rational, order: u32) -> Self {
        let mut s = Self::zero(order);
        if !c.is_zero() {
            s.terms.push((Monomial::one(), c));
        }
        s
    }
    pub fn int(c: i64, order: u32) -> Self {
        Self::constant(rat(c), order)
    }
    pub fn var(v: Var, order: u32) -> Self {
        Self::term(Monomial::var(v), rat(1), order)
    }
    pub fn term(m: Monomial, c: Rational, order: u32) -> Self {
        let mut s = Self::zero(order);
        if m.degree() < order && !c.is_zero() {
            s.terms.push((m, c));
        }
        s
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    pub fn terms(&self) -> &[(Monomial, Rational)] {
        &self.terms
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn constant_term(&self) -> Rational {
        match self.terms.first() {
            Some((m, c)) if m.degree() == 0 => c.clone(),
            _ => Rational::zero(),
        }
    }
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.degree() == 0)
    }
    /// True if every monomial has positive degree.
    pub fn in_max_ideal(&self) -> bool {
        self.terms.iter().all(|(m, _)| m.degree() > 0)
    }

    pub fn try_add(&self, other: &Series) -> Result<Series, CoeffError> {
        if self.order != other.order {
            return Err(CoeffError::OrderMismatch(self.order, other.order));
        }
        let mut terms = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                Ordering::Less => {
                    terms.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    terms.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &self.terms[i].1 + &other.terms[j].1;
                    if !c.is_zero() {
                        terms.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend_from_slice(&self.terms[i..]);
        terms.extend_from_slice(&other.terms[j..]);
        Ok(Series { order: self.order, terms })
    }

    pub fn try_mul(&self, other: &Series) -> Result<Series, CoeffError> {
        if self.order != other.order {
            return Err(CoeffError::OrderMismatch(self.order, other.order));
        }
        let mut acc: std::collections::BTreeMap<Monomial, Rational> = Default::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if m1.degree() + m2.degree() >= self.order {
                    continue;
                }
                *acc.entry(m1.mul(m2)).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        let terms = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        Ok(Series { order: self.order, terms })
    }

    pub fn neg(&self) -> Series {
        Series {
            order: self.order,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, q: &Rational) -> Series {
        if q.is_zero() {
            return Series::zero(self.order);
        }
        Series {
            order: self.order,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    /// Multiply by ±1.
    pub fn signed(&self, negative: bool) -> Series {
        if negative {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Coefficient series of `v^k`.
    pub fn extract_order(&self, v: &Var, k: u32) -> Series {
        let mut acc: std::collections::BTreeMap<Monomial, Rational> = Default::default();
        for (m, c) in &self.terms {
            if m.exponent(v) == k {
                *acc.entry(m.without(v)).or_insert_with(Rational::zero) += c;
            }
        }
        Series { order: self.order, terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect() }
    }

    /// Set every variable matching `pred` to zero.
    pub fn kill_vars(&self, pred: impl Fn(&Var) -> bool) -> Series {
        Series {
            order: self.order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.factors().iter().all(|(v, _)| !pred(v)))
                .cloned()
                .collect(),
        }
    }
}

impl std::ops::Add for &Series {
    type Output = Series;
    fn add(self, rhs: &Series) -> Series {
        self.try_add(rhs).expect("series orders agree")
    }
}

impl std::ops::Sub for &Series {
    type Output = Series;
    fn sub(self, rhs: &Series) -> Series {
        self.try_add(&rhs.neg()).expect("series orders agree")
    }
}

impl std::ops::Mul for &Series {
    type Output = Series;
    fn mul(self, rhs: &Series) -> Series {
        self.try_mul(rhs).expect("series orders agree")
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<&(Monomial, Rational)> = self.terms.iter().collect();
        terms.sort_by(|a, b| a.0.grlex(&b.0));
        for (i, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let unit = abs.is_one();
            match (m.degree() == 0, unit) {
                (true, _) => write!(f, "{abs}")?,
                (false, true) => write!(f, "{m}")?,
                (false, false) => write!(f, "{abs}*{m}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(point: &str, j: u32, order: u32) -> Series {
        Series::var(Var::orb(point, j).unwrap(), order)
    }

    #[test]
    fn products_truncate_at_the_order() {
        let x = r("1", 1, 2);
        assert!(x.try_mul(&x).unwrap().is_zero());
        let y = r("1", 1, 3);
        let sq = y.try_mul(&y).unwrap();
        assert_eq!(sq.terms().len(), 1);
        assert_eq!(sq.terms()[0].0.degree(), 2);
        assert!(sq.try_mul(&y).unwrap().is_zero());
    }

    #[test]
    fn order_one_kills_every_variable() {
        assert!(r("1", 1, 1).is_zero());
        assert_eq!(Series::int(3, 1).constant_term(), rat(3));
    }

    #[test]
    fn mixed_orders_are_rejected() {
        assert_eq!(Series::one(2).try_add(&Series::one(3)), Err(CoeffError::OrderMismatch(2, 3)));
        assert_eq!(Var::orb("m", 0), Err(CoeffError::ZeroWinding));
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let x = r("2", 1, 2);
        let s = x.try_add(&x.neg()).unwrap();
        assert!(s.is_zero() && s.in_max_ideal());
        assert!(!Series::one(2).in_max_ideal());
    }
}
