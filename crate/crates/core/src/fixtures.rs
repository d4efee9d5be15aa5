//! Known systems with analytically known least fixed points.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::arith::Rational;
use crate::mps::{Monomial, MonotoneSystem};

fn r(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `x_0 = x_0^2/2 + 1/2`, `x_i = x_i^2/2 + x_{i-1}/2`; least fixed point is all ones.
pub fn chain(vars: usize) -> MonotoneSystem {
    let names = (0..vars).map(|i| format!("x{i}")).collect();
    let equations = (0..vars)
        .map(|i| {
            let tail = if i == 0 {
                Monomial::constant(r(1, 2))
            } else {
                Monomial::new(r(1, 2), [(i - 1, 1)])
            };
            vec![Monomial::new(r(1, 2), [(i, 2)]), tail]
        })
        .collect();
    MonotoneSystem::new(names, equations).expect("valid fixture")
}

/// `x_0 = base`, `x_i = x_{i-1}^2`; least fixed point `x_i = base^(2^i)`.
pub fn repeated_squaring(vars: usize, base: Rational) -> MonotoneSystem {
    let names = (0..vars).map(|i| format!("x{i}")).collect();
    let equations = (0..vars)
        .map(|i| {
            if i == 0 {
                vec![Monomial::constant(base.clone())]
            } else {
                vec![Monomial::new(Rational::one(), [(i - 1, 2)])]
            }
        })
        .collect();
    MonotoneSystem::new(names, equations).expect("valid fixture")
}

/// `x = a x^2 + b x + c` with non-negative coefficients.
pub fn univariate(a: Rational, b: Rational, c: Rational) -> MonotoneSystem {
    let mut terms = Vec::new();
    if !a.is_zero() {
        terms.push(Monomial::new(a, [(0, 2)]));
    }
    if !b.is_zero() {
        terms.push(Monomial::new(b, [(0, 1)]));
    }
    if !c.is_zero() {
        terms.push(Monomial::constant(c));
    }
    MonotoneSystem::new(vec!["x".into()], vec![terms]).expect("valid fixture")
}
