//! Reference computations that share no code with the solver: exact value
//! iteration, the zero set of `P^n(0)`, and closed-form univariate roots.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{sqrt_lower, sqrt_upper, RVector, Rational};
use crate::error::{Error, Result};
use crate::mps::MonotoneSystem;

/// Exact `P^k(0)`.
pub fn value_iterate(sys: &MonotoneSystem, k: usize) -> RVector {
    let mut x = vec![Rational::zero(); sys.len()];
    for _ in 0..k {
        x = sys.eval(&x);
    }
    x
}

/// Value iteration that stops after `max_steps`, at a stationary point, or
/// once a coordinate exceeds `ceiling`. Returns the last iterate and the
/// number of steps taken.
pub fn value_iterate_bounded(sys: &MonotoneSystem, max_steps: usize, ceiling: &Rational) -> (RVector, usize) {
    let mut x = vec![Rational::zero(); sys.len()];
    for step in 0..max_steps {
        let next = sys.eval(&x);
        if next == x {
            return (x, step);
        }
        x = next;
        if x.iter().any(|v| v > ceiling) {
            return (x, step + 1);
        }
    }
    (x, max_steps)
}

/// Indices where `P^n(0)` vanishes.
pub fn zero_set_oracle(sys: &MonotoneSystem) -> Vec<usize> {
    value_iterate(sys, sys.len())
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_zero())
        .map(|(i, _)| i)
        .collect()
}

/// An exact real number that is either rational or `(p - sqrt(d)) / q`
/// with integers `q > 0` and `d > 0` not a perfect square.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QuadraticRoot {
    Rational(Rational),
    Surd { p: BigInt, d: BigInt, q: BigInt },
}

impl QuadraticRoot {
    /// Exact comparison against a rational.
    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        match self {
            QuadraticRoot::Rational(v) => v.cmp(r),
            QuadraticRoot::Surd { p, d, q } => {
                // sign of (p - r q) - sqrt(d)
                let w = Rational::from_integer(p.clone()) - r * Rational::from_integer(q.clone());
                if w.is_negative() {
                    return Ordering::Less;
                }
                (&w * &w).cmp(&Rational::from_integer(d.clone()))
            }
        }
    }

    /// Rationals `lo <= root <= hi` with `hi - lo` at most about `2^-bits`.
    pub fn enclose(&self, bits: u32) -> (Rational, Rational) {
        match self {
            QuadraticRoot::Rational(v) => (v.clone(), v.clone()),
            QuadraticRoot::Surd { p, d, q } => {
                let d = Rational::from_integer(d.clone());
                let p = Rational::from_integer(p.clone());
                let q = Rational::from_integer(q.clone());
                let lo = (&p - sqrt_upper(&d, bits)) / &q;
                let hi = (&p - sqrt_lower(&d, bits)) / &q;
                (lo, hi)
            }
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            QuadraticRoot::Rational(v) => Some(v),
            QuadraticRoot::Surd { .. } => None,
        }
    }
}

impl Serialize for QuadraticRoot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            QuadraticRoot::Rational(v) => s.serialize_str(&v.to_string()),
            QuadraticRoot::Surd { p, d, q } => s.serialize_str(&format!("({p} - sqrt({d}))/{q}")),
        }
    }
}

fn exact_sqrt(n: &BigInt) -> Option<BigInt> {
    let s = n.sqrt();
    (&s * &s == *n).then_some(s)
}

/// Least non-negative solution of `x = a x^2 + b x + c` for non-negative
/// `a`, `b`, `c`.
pub fn univariate_quadratic_lfp(a: &Rational, b: &Rational, c: &Rational) -> Result<QuadraticRoot> {
    if a.is_negative() || b.is_negative() || c.is_negative() {
        return Err(Error::InvalidArgument("coefficients must be non-negative".into()));
    }
    let one = Rational::one();
    if c.is_zero() {
        return Ok(QuadraticRoot::Rational(Rational::zero()));
    }
    let s = &one - b;
    if !s.is_positive() {
        return Err(Error::NoFiniteLfp);
    }
    if a.is_zero() {
        return Ok(QuadraticRoot::Rational(c / s));
    }
    // roots of a x^2 - s x + c: (s -+ sqrt(s^2 - 4ac)) / 2a, both positive
    let disc = &s * &s - Rational::from_integer(4.into()) * a * c;
    if disc.is_negative() {
        return Err(Error::NoFiniteLfp);
    }
    let two_a = Rational::from_integer(2.into()) * a;
    // sqrt(N/M) = sqrt(N M) / M
    let radicand = disc.numer() * disc.denom();
    let m = Rational::from_integer(disc.denom().clone());
    if let Some(root) = exact_sqrt(&radicand) {
        let sq = Rational::from_integer(root) / &m;
        return Ok(QuadraticRoot::Rational((&s - sq) / &two_a));
    }
    // (s M - sqrt(N M)) / (2a M), then clear denominators by K
    let p = &s * &m;
    let q = &two_a * &m;
    let k = p.denom().lcm(q.denom());
    let kr = Rational::from_integer(k.clone());
    let p = (p * &kr).to_integer();
    let q = (q * &kr).to_integer();
    let d = radicand * &k * &k;
    Ok(QuadraticRoot::Surd { p, d, q })
}
