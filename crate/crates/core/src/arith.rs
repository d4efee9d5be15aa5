//! Exact arithmetic: rationals, dyadic grid values, dense rational matrices
//! and a fraction-preserving linear solver.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

pub type RVector = Vec<Rational>;

/// Parses `"p/q"` or `"p"` in decimal digits. A leading `-` on the
/// numerator is accepted; the denominator must be positive.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let valid = |s: &str, signed: bool| {
        let digits = if signed { s.strip_prefix('-').unwrap_or(s) } else { s };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid(num, true) || !valid(den, false) {
        return Err(Error::parse(format!("`{text}` is not a rational of the form p/q")));
    }
    let num: BigInt = num.parse().map_err(|e| Error::parse(format!("{text}: {e}")))?;
    let den: BigInt = den.parse().map_err(|e| Error::parse(format!("{text}: {e}")))?;
    if den.is_zero() {
        return Err(Error::parse(format!("`{text}` has a zero denominator")));
    }
    Ok(Rational::new(num, den))
}

/// Number of bits in `|n|`; zero has bit length 0.
pub fn bit_length(n: &BigInt) -> u64 {
    n.bits()
}

pub fn pow2(exp: i64) -> Rational {
    let p = BigInt::one() << exp.unsigned_abs();
    if exp >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Smallest integer `e` with `2^e >= r`, i.e. the exact value of
/// `ceil(log2 r)`. Panics if `r <= 0`.
pub fn ceil_log2(r: &Rational) -> i64 {
    assert!(r.is_positive(), "ceil_log2 of non-positive value");
    let mut e = r.numer().bits() as i64 - r.denom().bits() as i64;
    while pow2(e) < *r {
        e += 1;
    }
    while pow2(e - 1) >= *r {
        e -= 1;
    }
    e
}

/// Largest integer `e` with `2^e <= r`. Panics if `r <= 0`.
pub fn floor_log2(r: &Rational) -> i64 {
    let c = ceil_log2(r);
    if pow2(c) == *r {
        c
    } else {
        c - 1
    }
}

fn isqrt_floor(n: &BigUint) -> BigUint {
    n.sqrt()
}

fn isqrt_ceil(n: &BigUint) -> BigUint {
    let s = n.sqrt();
    if &s * &s == *n {
        s
    } else {
        s + 1u32
    }
}

fn scaled_radicand(r: &Rational, bits: u32) -> (BigUint, BigUint) {
    assert!(!r.is_negative(), "square root of negative value");
    let num = r.numer().magnitude();
    let den = r.denom().magnitude();
    let n = (num * den) << (2 * bits as u64);
    (n, den << bits as u64)
}

/// Rational upper bound on `sqrt(r)` within `2^-bits / den(r)` of the true
/// value; exact when `r` is a perfect rational square.
pub fn sqrt_upper(r: &Rational, bits: u32) -> Rational {
    let (n, scale) = scaled_radicand(r, bits);
    Rational::new(BigInt::from(isqrt_ceil(&n)), BigInt::from(scale))
}

pub fn sqrt_lower(r: &Rational, bits: u32) -> Rational {
    let (n, scale) = scaled_radicand(r, bits);
    Rational::new(BigInt::from(isqrt_floor(&n)), BigInt::from(scale))
}

pub fn norm_inf(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Rational::zero)
}

pub fn is_dyadic(r: &Rational) -> bool {
    let d = r.denom();
    (d & (d - BigInt::one())).is_zero()
}

/// A value `mantissa * 2^-scale`, i.e. a point of the dyadic grid with
/// spacing `2^-scale`.
#[derive(Clone, Debug)]
pub struct Dyadic {
    mantissa: BigInt,
    scale: u32,
}

impl Dyadic {
    pub fn new(mantissa: BigInt, scale: u32) -> Self {
        Dyadic { mantissa, scale }
    }

    pub fn zero(scale: u32) -> Self {
        Dyadic { mantissa: BigInt::zero(), scale }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.mantissa.clone(), BigInt::one() << self.scale as u64)
    }

    /// Multiplies by `2^u`, moving to the coarser grid `2^-(scale-u)`
    /// when possible so grid alignment is preserved.
    pub fn mul_pow2(&self, u: u32) -> Dyadic {
        if u <= self.scale {
            Dyadic { mantissa: self.mantissa.clone(), scale: self.scale - u }
        } else {
            Dyadic { mantissa: &self.mantissa << (u - self.scale) as u64, scale: 0 }
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let s = self.scale.max(other.scale);
        let a = &self.mantissa << (s - self.scale) as u64;
        let b = &other.mantissa << (s - other.scale) as u64;
        a.cmp(&b)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_rational())
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Largest multiple of `2^-h` that is `<= max(v, 0)`.
pub fn round_down_dyadic(v: &Rational, h: u32) -> Dyadic {
    if !v.is_positive() {
        return Dyadic::zero(h);
    }
    let scaled = v.numer() << h as u64;
    let mantissa = scaled.div_floor(v.denom());
    Dyadic::new(mantissa, h)
}

/// Dense row-major matrix of rationals with fixed dimensions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RMatrix { rows, cols, data: vec![Rational::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged matrix rows".into()));
        }
        Ok(RMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Rational]) -> RVector {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .fold(Rational::zero(), |acc, (a, x)| acc + a * x)
            })
            .collect()
    }

    /// `I - self`; panics if not square.
    pub fn identity_minus(&self) -> RMatrix {
        assert_eq!(self.rows, self.cols, "matrix is not square");
        let mut m = RMatrix::identity(self.rows);
        for (dst, src) in m.data.iter_mut().zip(&self.data) {
            *dst -= src;
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for RMatrix {
    type Output = Rational;

    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A x = b` exactly by Gaussian elimination, pivoting on the first
/// nonzero entry of each column.
pub fn solve_linear(a: &RMatrix, b: &[Rational]) -> Result<RVector> {
    let mut xs = solve_linear_many(a, &[b])?;
    Ok(xs.pop().expect("one right-hand side"))
}

/// [`solve_linear`] for several right-hand sides sharing one elimination.
pub fn solve_linear_many(a: &RMatrix, bs: &[&[Rational]]) -> Result<Vec<RVector>> {
    let n = a.rows();
    if a.cols() != n {
        return Err(Error::InvalidArgument(format!(
            "solve_linear needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if let Some(b) = bs.iter().find(|b| b.len() != n) {
        return Err(Error::InvalidArgument(format!(
            "right-hand side has length {}, expected {n}",
            b.len()
        )));
    }
    let width = n + bs.len();
    let mut m: Vec<Vec<Rational>> = (0..n)
        .map(|i| {
            let mut row = a.row(i).to_vec();
            row.extend(bs.iter().map(|b| b[i].clone()));
            row
        })
        .collect();

    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or(Error::SingularMatrix { column: col })?;
        m.swap(col, pivot);
        let (upper, lower) = m.split_at_mut(col + 1);
        let prow = &upper[col];
        for row in lower.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let factor = &row[col] / &prow[col];
            for k in col..width {
                if !prow[k].is_zero() {
                    let delta = &factor * &prow[k];
                    row[k] -= delta;
                }
            }
        }
    }

    let solve_column = |c: usize| {
        let mut x = vec![Rational::zero(); n];
        for i in (0..n).rev() {
            let mut acc = m[i][c].clone();
            for j in i + 1..n {
                if !m[i][j].is_zero() {
                    acc -= &m[i][j] * &x[j];
                }
            }
            x[i] = acc / &m[i][i];
        }
        x
    };
    Ok((n..width).map(solve_column).collect())
}

/// Serde helpers that write rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let text = String::deserialize(d)?;
        parse_rational(&text).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::Rational;
        use serde::ser::SerializeSeq;
        use serde::Serializer;

        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(v.len()))?;
            for r in v {
                seq.serialize_element(&r.to_string())?;
            }
            seq.end()
        }
    }
}
