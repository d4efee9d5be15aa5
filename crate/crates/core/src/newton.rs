//! Newton steps and the rounded-down Newton loop.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use num_integer::Integer;

use crate::arith::{ceil_log2, norm_inf, solve_linear, Dyadic, RMatrix, RVector, Rational};
#[cfg(test)]
use crate::arith::pow2;
use crate::error::{Error, Result};
use crate::mps::MonotoneSystem;

/// Rounding parameter `h` (grid `2^-h`) and iteration count `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RnmConfig {
    pub h: u32,
    pub g: u32,
}

impl RnmConfig {
    pub fn new(h: u32, g: u32) -> Result<Self> {
        if h == 0 || g == 0 {
            return Err(Error::InvalidArgument(format!("need h >= 1 and g >= 1, got h = {h}, g = {g}")));
        }
        Ok(RnmConfig { h, g })
    }

    /// `g >= h - 1`, the iteration count the convergence guarantee needs.
    pub fn has_enough_iterations(&self) -> bool {
        self.g as u64 + 1 >= self.h as u64
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub k: u32,
    pub iterate: Vec<Dyadic>,
    /// `||P(x) - x||_inf` at the iterate.
    #[serde(with = "crate::arith::serde_rational")]
    pub residual: Rational,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
}

/// `N_P(z) = z + (I - B(z))^{-1} (P(z) - z)` given the Jacobian `b = B(z)`.
fn newton_from_jacobian(sys: &MonotoneSystem, z: &[Rational], b: &RMatrix) -> Result<RVector> {
    let pz = sys.eval(z);
    let rhs: RVector = pz.iter().zip(z).map(|(p, x)| p - x).collect();
    let delta = solve_linear(&b.identity_minus(), &rhs)?;
    Ok(z.iter().zip(delta).map(|(x, d)| x + d).collect())
}

/// One exact Newton step on a quadratic system.
pub fn newton_step(sys: &MonotoneSystem, z: &[Rational]) -> Result<RVector> {
    let b = sys.eval_jacobian(z)?;
    newton_from_jacobian(sys, z, &b)
}

/// Evidence that `rho(B(x)) > 1`. For any `x <= q*` this rules out a finite
/// least fixed point, since `rho(B(q*)) <= 1` whenever `q*` is finite.
pub fn supercritical_witness(sys: &MonotoneSystem, x: &[Rational]) -> Option<String> {
    let b = sys.eval_jacobian(x).ok()?;
    let one = Rational::one();
    let row_min = (0..b.rows()).map(|i| b.row(i).iter().sum::<Rational>()).min()?;
    if row_min > one {
        return Some(format!("Jacobian has spectral radius >= {row_min} > 1"));
    }
    let v = solve_linear(&b.identity_minus(), &vec![one; b.rows()]).ok()?;
    v.iter().position(|y| y.is_negative()).map(|i| {
        format!("Jacobian has spectral radius > 1 ((I - B)^-1 1 has entry {} = {})", sys.name(i), v[i])
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TraceMode {
    #[default]
    Full,
    /// Keep only the final record.
    Last,
}

#[derive(Clone, Debug, Default)]
pub struct RnmOptions {
    /// Certified upper bound `2^e` on every coordinate of the least fixed
    /// point; an iterate beyond it proves there is no finite one.
    pub divergence_exponent: Option<i64>,
    pub trace: TraceMode,
}

#[derive(Clone, Debug)]
pub struct RnmRun {
    pub iterate: Vec<Dyadic>,
    pub trace: IterationTrace,
    /// Number of Newton steps actually computed; later steps would repeat
    /// a stationary iterate.
    pub steps: u32,
}

fn residual(sys: &MonotoneSystem, z: &[Rational]) -> Rational {
    let pz = sys.eval(z);
    norm_inf(&pz.iter().zip(z).map(|(p, x)| p - x).collect::<Vec<_>>())
}

/// Rounded-down Newton: `x[0] = 0`, `x[k+1]` is `N_P(x[k])` rounded down
/// coordinatewise onto the `2^-h` grid and clamped at 0.
pub fn run_rnm(sys: &MonotoneSystem, cfg: RnmConfig) -> Result<(Vec<Dyadic>, IterationTrace)> {
    run_rnm_with(sys, cfg, &RnmOptions::default()).map(|run| (run.iterate, run.trace))
}

pub fn run_rnm_with(sys: &MonotoneSystem, cfg: RnmConfig, opts: &RnmOptions) -> Result<RnmRun> {
    let cfg = RnmConfig::new(cfg.h, cfg.g)?;
    sys.check_quadratic()?;
    let n = sys.len();
    let scaled = ScaledSystem::new(sys, cfg.h);

    let mut m: Vec<BigInt> = vec![BigInt::zero(); n];
    let mut trace = IterationTrace::default();
    let to_dyadic = |m: &[BigInt]| -> Vec<Dyadic> { m.iter().map(|v| Dyadic::new(v.clone(), cfg.h)).collect() };
    let record = |k: u32, m: &[BigInt], trace: &mut IterationTrace, last: bool| {
        if opts.trace == TraceMode::Full || last {
            let x = to_dyadic(m);
            let z: Vec<Rational> = x.iter().map(Dyadic::to_rational).collect();
            trace.records.push(TraceRecord { k, iterate: x, residual: residual(sys, &z) });
        }
    };
    record(0, &m, &mut trace, false);

    let mut steps = 0;
    for k in 1..=cfg.g {
        let next = scaled.step(&m, opts.divergence_exponent, k)?;
        steps = k;
        let stationary = next == m;
        m = next;
        if stationary {
            break;
        }
        record(k, &m, &mut trace, k == cfg.g);
    }
    if opts.trace == TraceMode::Last && trace.records.last().map(|r| r.k) != Some(steps) {
        trace.records.clear();
        record(steps, &m, &mut trace, true);
    }
    Ok(RnmRun { iterate: to_dyadic(&m), trace, steps })
}

/// A quadratic system with every coefficient multiplied by the common
/// denominator `l`, so that a Newton step at a point of the `2^-h` grid
/// needs integer arithmetic only.
struct ScaledSystem<'a> {
    sys: &'a MonotoneSystem,
    h: u32,
    /// `l * 2^h`.
    ls: BigInt,
    /// Per equation: scaled coefficient and variables (empty, one, or two
    /// entries, a square listed twice).
    terms: Vec<Vec<(BigInt, Vec<usize>)>>,
}

impl<'a> ScaledSystem<'a> {
    fn new(sys: &'a MonotoneSystem, h: u32) -> Self {
        let l = sys.monomials().fold(BigInt::one(), |acc, t| acc.lcm(t.coefficient().denom()));
        let terms = sys
            .equations()
            .iter()
            .map(|eq| {
                eq.iter()
                    .map(|t| {
                        let c = (t.coefficient() * Rational::from_integer(l.clone())).to_integer();
                        let vars = t
                            .exponents()
                            .iter()
                            .flat_map(|(&v, &e)| std::iter::repeat(v).take(e as usize))
                            .collect();
                        (c, vars)
                    })
                    .collect()
            })
            .collect();
        ScaledSystem { sys, h, ls: l << h as u64, terms }
    }

    /// One rounded Newton step from the grid point `m 2^-h`, returning the
    /// new mantissas. Fails when the step is undefined or certifies that no
    /// finite least fixed point lies above the point.
    fn step(&self, m: &[BigInt], divergence_exponent: Option<i64>, k: u32) -> Result<Vec<BigInt>> {
        let n = m.len();
        let h = self.h as u64;
        // a[i][j] = l 2^h (I - B)_ij, r[i] = l 2^2h (P_i - z_i), b_sum[i] = l 2^h sum_j B_ij
        let mut a = vec![vec![BigInt::zero(); n]; n];
        let mut r = vec![BigInt::zero(); n];
        let mut b_sum = vec![BigInt::zero(); n];
        for (i, eq) in self.terms.iter().enumerate() {
            let mut p = BigInt::zero();
            for (c, vars) in eq {
                match vars.as_slice() {
                    [] => p += c << (2 * h),
                    [j] => {
                        p += (c * &m[*j]) << h;
                        let d = c << h;
                        b_sum[i] += &d;
                        a[i][*j] -= d;
                    }
                    [j, l] => {
                        p += c * &m[*j] * &m[*l];
                        let dj = c * &m[*l];
                        let dl = c * &m[*j];
                        b_sum[i] += &dj + &dl;
                        a[i][*j] -= dj;
                        a[i][*l] -= dl;
                    }
                    _ => unreachable!("quadratic system"),
                }
            }
            a[i][i] += &self.ls;
            r[i] = p - &self.ls * &m[i];
        }
        // rho(B) >= min row sum for B >= 0
        if let Some(row_min) = b_sum.iter().min() {
            if *row_min > self.ls {
                let ratio = Rational::new(row_min.clone(), self.ls.clone());
                return Err(Error::DivergenceCertified {
                    reason: format!("Jacobian at the iterate has spectral radius >= {ratio} > 1"),
                });
            }
        }
        let ones = vec![BigInt::one(); n];
        let (det, mut sols) = bareiss_solve(a, &[r, ones])?;
        // with I - B nonsingular, (I - B)^{-1} 1 >= 0 exactly when rho(B) < 1
        let v = sols.pop().expect("two right-hand sides");
        if let Some(i) = v.iter().position(|y| y.sign() != det.sign() && !y.is_zero()) {
            return Err(Error::DivergenceCertified {
                reason: format!(
                    "Jacobian at the iterate has spectral radius > 1 ((I - B)^-1 1 has entry {} = {})",
                    self.sys.name(i),
                    Rational::new(v[i].clone() * &self.ls, det.clone())
                ),
            });
        }
        let y = sols.pop().expect("two right-hand sides");
        // the unrounded iterate is (m det + y) / (det 2^h)
        let (det, y): (BigInt, Vec<BigInt>) =
            if det.is_negative() { (-det, y.into_iter().map(|v| -v).collect()) } else { (det, y) };
        let mut next = Vec::with_capacity(n);
        for (i, (mi, yi)) in m.iter().zip(&y).enumerate() {
            let numer = mi * &det + yi;
            if let Some(e) = divergence_exponent {
                let shift = e + self.h as i64;
                let above = if shift >= 0 {
                    numer > &det << shift as u64
                } else {
                    &numer << (-shift) as u64 > det
                };
                if above {
                    return Err(Error::DivergenceCertified {
                        reason: format!(
                            "Newton iterate {k} has coordinate {} = {} above the certified bound 2^{e}",
                            self.sys.name(i),
                            Rational::new(numer, &det << h)
                        ),
                    });
                }
            }
            let floor = numer.div_floor(&det);
            next.push(if floor.is_negative() { BigInt::zero() } else { floor });
        }
        Ok(next)
    }
}

/// Fraction-free elimination (pivot on the first nonzero entry of each
/// column). Returns `det` and integer vectors `y` with `A (y / det) = b` for
/// each right-hand side.
fn bareiss_solve(mut a: Vec<Vec<BigInt>>, rhs: &[Vec<BigInt>]) -> Result<(BigInt, Vec<Vec<BigInt>>)> {
    let n = a.len();
    for (i, row) in a.iter_mut().enumerate() {
        row.extend(rhs.iter().map(|b| b[i].clone()));
    }
    let width = n + rhs.len();
    let mut prev = BigInt::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero()).ok_or(Error::SingularMatrix { column: col })?;
        a.swap(col, pivot);
        let (upper, lower) = a.split_at_mut(col + 1);
        let prow = &upper[col];
        for row in lower.iter_mut() {
            for j in col + 1..width {
                let t = &row[j] * &prow[col] - &row[col] * &prow[j];
                row[j] = t / &prev;
            }
            row[col] = BigInt::zero();
        }
        prev = prow[col].clone();
    }
    let det = prev;
    let sols = (n..width)
        .map(|c| {
            let mut y = vec![BigInt::zero(); n];
            for i in (0..n).rev() {
                let mut acc = &det * &a[i][c];
                for j in i + 1..n {
                    if !a[i][j].is_zero() {
                        acc -= &a[i][j] * &y[j];
                    }
                }
                y[i] = acc / &a[i][i];
            }
            y
        })
        .collect();
    Ok((det, sols))
}

/// Smallest `h` with `h >= 2 + n log2(1/alpha) + log2(1/epsilon)`, each
/// logarithm replaced by its exact integer ceiling; `g = h - 1`.
pub fn certify_params_scc(n: usize, alpha: &Rational, epsilon: &Rational) -> Result<RnmConfig> {
    let one = Rational::one();
    if !alpha.is_positive() || *alpha > one {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} not in (0, 1]")));
    }
    if !epsilon.is_positive() || *epsilon >= one {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} not in (0, 1)")));
    }
    let log_alpha = BigInt::from(ceil_log2(&alpha.recip()));
    let log_eps = BigInt::from(ceil_log2(&epsilon.recip()));
    let h = BigInt::from(2) + BigInt::from(n) * log_alpha + log_eps;
    let h: u32 = u32::try_from(&h).map_err(|_| Error::ParamsInfeasible {
        required: h.to_string(),
        ceiling: u32::MAX as u64,
    })?;
    RnmConfig::new(h, h - 1)
}
