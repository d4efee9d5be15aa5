//! Shared inputs for the solver benchmarks.

use rdnm::arith::pow2;
use rdnm::{fixtures, MonotoneSystem, RMatrix, Rational};

/// Named systems of increasing size.
pub fn workloads() -> Vec<(String, MonotoneSystem)> {
    let half = pow2(-1);
    let mut out = vec![("univariate".to_string(), fixtures::univariate(half.clone(), Rational::from_integer(0.into()), half))];
    for n in [2, 4, 8] {
        out.push((format!("chain-{n}"), fixtures::chain(n)));
    }
    out
}

/// Diagonally dominant `n x n` matrix with small dyadic entries.
pub fn dominant_matrix(n: usize) -> RMatrix {
    let rows = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::from_integer((n as i64 + 1).into()) } else { pow2(-((i + 2 * j) as i64 % 7 + 1)) })
                .collect()
        })
        .collect();
    RMatrix::from_rows(rows).expect("square matrix")
}
