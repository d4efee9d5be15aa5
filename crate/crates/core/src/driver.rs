//! Decomposed solver: bounds on the least fixed point, parameter selection,
//! rescaling, and bottom-up orchestration over the SCC DAG.

use std::thread;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::arith::{bit_length, ceil_log2, pow2, round_down_dyadic, solve_linear, sqrt_upper, Dyadic, RVector, Rational};
use crate::decomp::{build_graph, decompose, Decomposition};
use crate::error::{Error, Result};
use crate::mps::{clean, to_snf, MonotoneSystem};
use crate::newton::{run_rnm_with, supercritical_witness, RnmConfig, RnmOptions, TraceMode, TraceRecord};

const QMIN_PRECISION: u32 = 1024;
const QMIN_MAX_PRECISION: u32 = 1 << 16;
const QMIN_EXTRA_STEPS: usize = 128;
const MATERIALIZE_BITS: u64 = 1 << 16;
const POST_FIXPOINT_MAX_EXPONENT: u32 = 64;
const DIVERGENCE_PROBE_PRECISION: u32 = 64;

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

fn ser_opt_bigint<S: Serializer>(v: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundSource {
    WorstCaseFormula,
    CoefficientFormula,
    ValueIteration,
    PostFixpoint,
    UserAsserted,
    ProbabilityFlag,
}

/// Certified bounds `qmin_lower <= q*_min` and `q*_max <= 2^qmax_upper_exponent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LfpBounds {
    #[serde(with = "crate::arith::serde_rational")]
    pub qmin_lower: Rational,
    pub qmin_source: BoundSource,
    #[serde(serialize_with = "ser_bigint")]
    pub qmax_upper_exponent: BigInt,
    pub qmax_source: BoundSource,
}

impl LfpBounds {
    /// `2^qmax_upper_exponent` when it is small enough to write down.
    pub fn qmax_upper(&self) -> Option<Rational> {
        self.qmax_upper_exponent
            .to_i64()
            .filter(|e| e.unsigned_abs() <= MATERIALIZE_BITS)
            .map(pow2)
    }
}

/// `2(n+1)(|P| + 2(n+1) ceil(log2(2n+2))) 5^n`.
pub fn worst_case_qmax_exponent(n: usize, size: u64) -> BigInt {
    let n1 = BigInt::from(n + 1);
    let log = BigInt::from(ceil_log2(&Rational::from_integer(BigInt::from(2 * n + 2))));
    let five_n = num_traits::pow(BigInt::from(5), n);
    BigInt::from(2) * &n1 * (BigInt::from(size) + BigInt::from(2) * &n1 * log) * five_n
}

/// `|P| (2^n - 1)`, so that `q*_min >= 2^-exponent`.
pub fn worst_case_qmin_exponent(n: usize, size: u64) -> BigInt {
    BigInt::from(size) * ((BigInt::one() << n) - 1)
}

/// Smallest `e` such that some `y <= 2^e 1` satisfies `P(y) <= y`; every
/// such post-fixed point lies above the least fixed point. Candidates are
/// `2^e 1` for `e` in `0..=max_e` and, given an approximation `x` of the
/// least fixed point from below, the points `x + 2^-j d` for the directions
/// `d = 1 + x` and `d = (I - B(x))^-1 1` (when nonnegative).
pub fn post_fixpoint_exponent(sys: &MonotoneSystem, max_e: u32, below: Option<&[Rational]>) -> Option<i64> {
    let is_post = |y: &[Rational]| sys.eval(y).iter().zip(y).all(|(p, v)| p <= v);
    let uniform = (0..=max_e).find(|&e| is_post(&vec![pow2(e as i64); sys.len()])).map(i64::from);
    let perturbed = below.and_then(|x| {
        let mut directions: Vec<RVector> = vec![x.iter().map(|v| Rational::one() + v).collect()];
        if let Ok(b) = sys.eval_jacobian(x) {
            if let Ok(v) = solve_linear(&b.identity_minus(), &vec![Rational::one(); sys.len()]) {
                if v.iter().all(|c| c.is_positive()) {
                    directions.push(v);
                }
            }
        }
        directions
            .iter()
            .filter_map(|d| {
                (1..=32).rev().find_map(|j| {
                    let step = pow2(-j);
                    let y: Vec<Rational> = x.iter().zip(d).map(|(v, dv)| v + &step * dv).collect();
                    is_post(&y).then(|| y.iter().max().map(ceil_log2).unwrap_or(0))
                })
            })
            .min()
    });
    match (uniform, perturbed) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Upper bound on `q*_max` as a binary exponent. `below`, if given, must be
/// a coordinatewise lower bound on the least fixed point.
pub fn qmax_upper_bound(sys: &MonotoneSystem, assume_probabilistic: bool) -> (BigInt, BoundSource) {
    qmax_upper_bound_with(sys, assume_probabilistic, None)
}

fn qmax_upper_bound_with(sys: &MonotoneSystem, assume_probabilistic: bool, below: Option<&[Rational]>) -> (BigInt, BoundSource) {
    if assume_probabilistic {
        return (BigInt::zero(), BoundSource::ProbabilityFlag);
    }
    let formula = worst_case_qmax_exponent(sys.len(), sys.encoding_size().bits());
    match post_fixpoint_exponent(sys, POST_FIXPOINT_MAX_EXPONENT, below) {
        Some(e) if BigInt::from(e) < formula => (BigInt::from(e), BoundSource::PostFixpoint),
        _ => (formula, BoundSource::WorstCaseFormula),
    }
}

/// The separately computed lower bounds on `q*_min`; a bound is `None`
/// when it is too large to materialize or carries no information.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QminCandidates {
    pub coefficient: Option<Rational>,
    pub worst_case: Option<Rational>,
    pub value_iteration: Option<Rational>,
}

impl QminCandidates {
    pub fn best(&self) -> Option<(Rational, BoundSource)> {
        [
            (&self.value_iteration, BoundSource::ValueIteration),
            (&self.coefficient, BoundSource::CoefficientFormula),
            (&self.worst_case, BoundSource::WorstCaseFormula),
        ]
        .into_iter()
        .filter_map(|(v, s)| v.clone().map(|v| (v, s)))
        .fold(None, |best: Option<(Rational, BoundSource)>, (v, s)| match best {
            Some((b, bs)) if b >= v => Some((b, bs)),
            _ => Some((v, s)),
        })
    }
}

/// Minimum coordinate of a rounded-down value iteration: each step rounds
/// `P(x)` down onto the `2^-precision` grid, so every iterate stays below
/// `P^k(0) <= q*`. Stops once stationary or above `2^ceiling_exp`.
fn value_iteration_floor(sys: &MonotoneSystem, precision: u32, ceiling_exp: i64) -> Vec<Rational> {
    let n = sys.len();
    let ceiling = pow2(ceiling_exp);
    let mut x = vec![Rational::zero(); n];
    let mut extra = None;
    for _ in 0..n + QMIN_EXTRA_STEPS {
        let next: Vec<Rational> =
            sys.eval(&x).iter().map(|v| round_down_dyadic(v, precision).to_rational()).collect();
        if next == x {
            break;
        }
        x = next;
        if x.iter().any(|v| *v > ceiling) {
            break;
        }
        if extra.is_none() && x.iter().all(|v| v.is_positive()) {
            extra = Some(QMIN_EXTRA_STEPS);
        }
        if let Some(k) = extra.as_mut() {
            if *k == 0 {
                break;
            }
            *k -= 1;
        }
    }
    x
}

fn positive_min(x: &[Rational]) -> Option<Rational> {
    x.iter().min().filter(|m| m.is_positive()).cloned()
}

pub fn qmin_candidates(sys: &MonotoneSystem) -> QminCandidates {
    qmin_candidates_at(sys, QMIN_PRECISION).0
}

/// The candidates plus the value-iteration point they were taken from.
fn qmin_candidates_at(sys: &MonotoneSystem, precision: u32) -> (QminCandidates, Vec<Rational>) {
    let n = sys.len();
    let exponent_fits = |per_unit: u64| -> bool {
        n < 32 && per_unit.saturating_mul((1u64 << n) - 1) <= MATERIALIZE_BITS
    };
    let coefficient = sys.c_min().and_then(|c| {
        let c = c.min(Rational::one());
        let bits = bit_length(c.numer()) + bit_length(c.denom());
        exponent_fits(bits).then(|| num_traits::pow(c, (1usize << n) - 1))
    });
    let size = sys.encoding_size().bits();
    let worst_case = exponent_fits(size).then(|| {
        pow2(-worst_case_qmin_exponent(n, size).to_i64().expect("bounded above"))
    });
    let below = value_iteration_floor(sys, precision, 64);
    let value_iteration = positive_min(&below);
    (QminCandidates { coefficient, worst_case, value_iteration }, below)
}

/// Best certified lower bound on `q*_min` of a cleaned system.
pub fn qmin_lower_bound(sys: &MonotoneSystem) -> Result<(Rational, BoundSource)> {
    qmin_lower_bound_with_point(sys).map(|(bound, source, _)| (bound, source))
}

fn qmin_lower_bound_with_point(sys: &MonotoneSystem) -> Result<(Rational, BoundSource, Vec<Rational>)> {
    if sys.is_empty() {
        return Ok((Rational::one(), BoundSource::CoefficientFormula, Vec::new()));
    }
    let mut precision = QMIN_PRECISION;
    loop {
        let (candidates, below) = qmin_candidates_at(sys, precision);
        if let Some((bound, source)) = candidates.best() {
            return Ok((bound, source, below));
        }
        if precision >= QMIN_MAX_PRECISION {
            return Err(Error::ParamsInfeasible {
                required: "a positive lower bound on the least fixed point".into(),
                ceiling: QMIN_MAX_PRECISION as u64,
            });
        }
        precision *= 4;
    }
}

pub fn compute_bounds(sys: &MonotoneSystem, opts: &SolveOptions) -> Result<LfpBounds> {
    let (qmin_lower, qmin_source, below) = qmin_lower_bound_with_point(sys)?;
    let (mut qmax_upper_exponent, mut qmax_source) =
        qmax_upper_bound_with(sys, opts.assume_probabilistic, Some(&below));
    if let Some(e) = opts.assert_qmax_exponent {
        if BigInt::from(e) < qmax_upper_exponent {
            qmax_upper_exponent = BigInt::from(e);
            qmax_source = BoundSource::UserAsserted;
        }
    }
    Ok(LfpBounds { qmin_lower, qmin_source, qmax_upper_exponent, qmax_source })
}

/// The system with least fixed point `2^-u q*`: each degree-`k` coefficient
/// is multiplied by `2^(u(k-1))`.
pub fn rescale(sys: &MonotoneSystem, u: u32) -> MonotoneSystem {
    if u == 0 {
        return sys.clone();
    }
    sys.map_coefficients(|m| m.coefficient() * pow2(u as i64 * (m.degree() as i64 - 1)))
}

/// Predicted shift of an SCC's least fixed point when its lower inputs move
/// by `dy`: `sqrt(4n a^-(3n+1) |P(1,1)| dy)` for a nonlinear SCC and
/// `2n a^-(n+2) |P(1,1)| dy` for a linear one. The square root is rounded up.
pub fn perturbation_bound(n: usize, alpha: &Rational, norm_p1: &Rational, dy: &Rational, linear: bool) -> Result<Rational> {
    if !alpha.is_positive() || *alpha > Rational::one() {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} not in (0, 1]")));
    }
    if dy.is_negative() {
        return Err(Error::InvalidArgument(format!("dy = {dy} is negative")));
    }
    let n_r = Rational::from_integer(BigInt::from(n));
    let inv = alpha.recip();
    if linear {
        let factor = Rational::from_integer(2.into()) * &n_r * num_traits::pow(inv, n + 2);
        Ok(factor * norm_p1 * dy)
    } else {
        let radicand = Rational::from_integer(4.into()) * &n_r * num_traits::pow(inv, 3 * n + 1) * norm_p1 * dy;
        Ok(sqrt_upper(&radicand, 64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Certified,
    Adaptive,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub mode: Mode,
    pub assume_probabilistic: bool,
    pub assert_qmax_exponent: Option<i64>,
    pub snf: bool,
    /// Manual rounding parameter on the grid of the original system.
    pub h: Option<u32>,
    pub iters: Option<u32>,
    pub max_h: u64,
    /// Lower limit for the certified rounding parameter.
    pub min_h: Option<u64>,
    pub trace: bool,
    pub jobs: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: Mode::Certified,
            assume_probabilistic: false,
            assert_qmax_exponent: None,
            snf: true,
            h: None,
            iters: None,
            max_h: 1 << 16,
            min_h: None,
            trace: false,
            jobs: 1,
        }
    }
}

/// Per-SCC iteration budget and rounding for one bottom-up pass.
#[derive(Clone, Debug)]
pub struct DnmPlan {
    pub h: u32,
    /// Iterations for each SCC, indexed like `Decomposition::sccs`.
    pub iterations: Vec<u32>,
    pub divergence_exponent: Option<i64>,
    pub trace: TraceMode,
    pub jobs: usize,
}

impl DnmPlan {
    /// `g` iterations on nonlinear SCCs and one on linear SCCs.
    pub fn uniform(dec: &Decomposition, h: u32, g: u32) -> Self {
        DnmPlan {
            h,
            iterations: dec.sccs.iter().map(|s| if s.nonlinear { g } else { 1 }).collect(),
            divergence_exponent: None,
            trace: TraceMode::Last,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SccTrace {
    pub scc: usize,
    pub variables: Vec<String>,
    pub nonlinear: bool,
    pub h: u32,
    pub g: u32,
    pub steps: u32,
    pub records: Vec<TraceRecord>,
}

#[derive(Clone, Debug)]
pub struct DnmRun {
    pub approximation: Vec<Dyadic>,
    pub traces: Vec<SccTrace>,
}

fn solve_scc(
    sys: &MonotoneSystem,
    dec: &Decomposition,
    k: usize,
    plan: &DnmPlan,
    solved: &[Dyadic],
) -> Result<(Vec<Dyadic>, SccTrace)> {
    let scc = &dec.sccs[k];
    let local = sys.restrict(&scc.vars, |v| solved[v].to_rational());
    let g = plan.iterations[k];
    let opts = RnmOptions { divergence_exponent: plan.divergence_exponent, trace: plan.trace };
    let run = run_rnm_with(&local, RnmConfig::new(plan.h, g)?, &opts)?;
    let trace = SccTrace {
        scc: k,
        variables: local.names().to_vec(),
        nonlinear: scc.nonlinear,
        h: plan.h,
        g,
        steps: run.steps,
        records: run.trace.records,
    };
    Ok((run.iterate, trace))
}

/// Rounded-down decomposed Newton: SCCs level by level, each with the
/// already rounded values of the SCCs below it substituted as constants.
pub fn run_dnm(sys: &MonotoneSystem, dec: &Decomposition, plan: &DnmPlan) -> Result<DnmRun> {
    if plan.iterations.len() != dec.sccs.len() {
        return Err(Error::InvalidArgument("one iteration count per SCC required".into()));
    }
    let mut solved = vec![Dyadic::zero(plan.h); sys.len()];
    let mut traces: Vec<Option<SccTrace>> = vec![None; dec.sccs.len()];
    for level in dec.levels() {
        let results: Vec<(usize, Result<(Vec<Dyadic>, SccTrace)>)> = if plan.jobs <= 1 || level.len() == 1 {
            level.iter().map(|&k| (k, solve_scc(sys, dec, k, plan, &solved))).collect()
        } else {
            let chunk = level.len().div_ceil(plan.jobs);
            let snapshot = &solved;
            thread::scope(|scope| {
                let handles: Vec<_> = level
                    .chunks(chunk)
                    .map(|ks| {
                        scope.spawn(move || {
                            ks.iter().map(|&k| (k, solve_scc(sys, dec, k, plan, snapshot))).collect::<Vec<_>>()
                        })
                    })
                    .collect();
                handles.into_iter().flat_map(|h| h.join().expect("SCC worker panicked")).collect()
            })
        };
        for (k, result) in results {
            let (values, trace) = result?;
            for (&v, value) in dec.sccs[k].vars.iter().zip(values) {
                solved[v] = value;
            }
            traces[k] = Some(trace);
        }
    }
    Ok(DnmRun { approximation: solved, traces: traces.into_iter().flatten().collect() })
}

/// `ceil(3 + 2^f (log(1/eps) + d ((4n+1) log(1/alpha) + log(16n) + log |P(1)|)))`
/// with each logarithm replaced by its integer ceiling.
pub fn rounding_parameter(
    n: usize,
    d: usize,
    f: usize,
    alpha: &Rational,
    epsilon: &Rational,
    norm_p1: &Rational,
) -> BigInt {
    let inner = inner_sum(n, d, alpha, epsilon, norm_p1, 0);
    BigInt::from(3) + (BigInt::one() << f) * inner
}

/// `2 + ceil(2^f (log(1/eps) + d (2u + (4n+1) log(1/alpha') + log(16n) + log |Q(1)|)))`.
pub fn iterations_general(
    n: usize,
    d: usize,
    f: usize,
    u: u32,
    alpha: &Rational,
    epsilon: &Rational,
    norm_q1: &Rational,
) -> BigInt {
    let inner = inner_sum(n, d, alpha, epsilon, norm_q1, u);
    BigInt::from(2) + (BigInt::one() << f) * inner
}

fn inner_sum(n: usize, d: usize, alpha: &Rational, epsilon: &Rational, norm: &Rational, u: u32) -> BigInt {
    let log_eps = BigInt::from(ceil_log2(&epsilon.recip()));
    let log_alpha = BigInt::from(4 * n + 1) * BigInt::from(ceil_log2(&alpha.recip()));
    let log_16n = BigInt::from(ceil_log2(&Rational::from_integer(BigInt::from(16 * n.max(1)))));
    let log_norm = if norm.is_positive() { BigInt::from(ceil_log2(norm)) } else { BigInt::zero() };
    log_eps + BigInt::from(d) * (BigInt::from(2 * u as u64) + log_alpha + log_16n + log_norm)
}

/// Iteration count needed without any knowledge of the least fixed point:
/// `2 + 2^f (log(1/eps) + d (|P| 2^n (4n+1) + (4n+1) + log(16n) + |P|))`.
pub fn worst_case_iterations(n: usize, d: usize, f: usize, size: u64, epsilon: &Rational) -> BigInt {
    let size = BigInt::from(size);
    let four_n1 = BigInt::from(4 * n + 1);
    let log_16n = BigInt::from(ceil_log2(&Rational::from_integer(BigInt::from(16 * n.max(1)))));
    let per_level = &size * (BigInt::one() << n) * &four_n1 + &four_n1 + log_16n + &size;
    BigInt::from(2)
        + (BigInt::one() << f) * (BigInt::from(ceil_log2(&epsilon.recip())) + BigInt::from(d) * per_level)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    CertifiedEpsilon,
    AdaptiveHeuristic,
    Diverged,
    Singular,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DriverParams {
    pub mode: Mode,
    #[serde(with = "crate::arith::serde_rational")]
    pub epsilon: Rational,
    #[serde(with = "crate::arith::serde_rational")]
    pub alpha: Rational,
    pub u: u32,
    /// Grid `2^-h` of the reported approximation.
    pub h: u32,
    /// Rounding parameter of the run on the rescaled system (`h + u`).
    pub h_rescaled: u32,
    pub g: u32,
    /// Smallest certified rounding parameter for the rescaled system.
    #[serde(serialize_with = "ser_opt_bigint")]
    pub h_required: Option<BigInt>,
    #[serde(serialize_with = "ser_opt_bigint")]
    pub worst_case_g: Option<BigInt>,
    /// Descriptive constants with `g = k_p + c_p log(1/eps)`.
    #[serde(serialize_with = "ser_opt_bigint")]
    pub k_p: Option<BigInt>,
    #[serde(serialize_with = "ser_bigint")]
    pub c_p: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Structure {
    /// Variables after normal form and cleaning.
    pub n: usize,
    pub depth: usize,
    pub nonlinear_depth: usize,
    pub sccs: usize,
    pub encoding_size: u64,
    #[serde(with = "crate::arith::serde_rational")]
    pub c_min: Rational,
    #[serde(with = "crate::arith::serde_rational")]
    pub norm_p1: Rational,
    pub zero_variables: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveReport {
    pub variables: Vec<String>,
    pub approximation: Vec<Dyadic>,
    pub status: Status,
    pub params: DriverParams,
    pub bounds: LfpBounds,
    pub structure: Structure,
    pub traces: Vec<SccTrace>,
    pub notes: Vec<String>,
}

pub const ENCODING_NOTE: &str = "encoding size |P| counts, per monomial, the bit lengths of the coefficient's numerator and denominator plus, per variable, the bit lengths of its 1-based index and exponent (each at least 1 bit)";

/// Everything derived from the input before any Newton step runs.
struct Prepared {
    names: Vec<String>,
    projection: Vec<usize>,
    work_len: usize,
    kept: Vec<usize>,
    zero_names: Vec<String>,
    system: MonotoneSystem,
    dec: Decomposition,
}

fn prepare(sys: &MonotoneSystem, snf: bool) -> Result<Prepared> {
    let (work, projection) = if snf {
        let s = to_snf(sys);
        (s.system, s.projection)
    } else {
        (sys.clone(), (0..sys.len()).collect())
    };
    work.check_quadratic()?;
    let cleaned = clean(&work);
    let zero_names = cleaned.zero.iter().filter(|&&i| i < sys.len()).map(|&i| work.name(i).to_string()).collect();
    let dec = decompose(&build_graph(&cleaned.system), &cleaned.system);
    Ok(Prepared {
        names: sys.names().to_vec(),
        projection,
        work_len: work.len(),
        kept: cleaned.kept,
        zero_names,
        system: cleaned.system,
        dec,
    })
}

impl Prepared {
    /// Values for the original variables from cleaned-system values on grid `h`.
    fn lift(&self, values: &[Dyadic], h: u32) -> Vec<Dyadic> {
        let mut full = vec![Dyadic::zero(h); self.work_len];
        for (j, &i) in self.kept.iter().enumerate() {
            full[i] = values[j].clone();
        }
        self.projection.iter().map(|&i| full[i].clone()).collect()
    }
}

fn to_u32(v: &BigInt, ceiling: u64) -> Result<u32> {
    match v.to_u64() {
        Some(x) if x <= ceiling && x <= u32::MAX as u64 => Ok(x as u32),
        _ => Err(Error::ParamsInfeasible { required: v.to_string(), ceiling }),
    }
}

/// Full pipeline: normal form, cleaning, decomposition, bounds, parameter
/// choice, bottom-up rounded Newton, and lifting back to the input variables.
pub fn solve(sys: &MonotoneSystem, epsilon: &Rational, opts: &SolveOptions) -> Result<SolveReport> {
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} not in (0, 1)")));
    }
    let prep = prepare(sys, opts.snf)?;
    let q = &prep.system;
    let dec = &prep.dec;
    let n = q.len();
    let (d, f) = (dec.depth, dec.nonlinear_depth);
    let c_min = q.c_min().unwrap_or_else(Rational::one);
    let norm_p1 = q.norm_at_ones();
    let size = q.encoding_size().bits();
    let structure = Structure {
        n,
        depth: d,
        nonlinear_depth: f,
        sccs: dec.sccs.len(),
        encoding_size: size,
        c_min: c_min.clone(),
        norm_p1: norm_p1.clone(),
        zero_variables: prep.zero_names.clone(),
    };
    let c_p = BigInt::one() << f;
    let worst_case_g = (n <= 4096).then(|| worst_case_iterations(n, d, f, size, epsilon));
    let notes = vec![ENCODING_NOTE.to_string()];

    let bounds = compute_bounds(q, opts)?;
    if bounds.qmax_source == BoundSource::WorstCaseFormula {
        let below = value_iteration_floor(q, DIVERGENCE_PROBE_PRECISION, POST_FIXPOINT_MAX_EXPONENT as i64);
        if let Some(reason) = supercritical_witness(q, &below) {
            return Err(Error::DivergenceCertified { reason: format!("at a value-iteration lower bound: {reason}") });
        }
    }
    let one = Rational::one();
    let half = Rational::new(1.into(), 2.into());

    if q.is_empty() {
        let h = opts.h.unwrap_or(1);
        return Ok(SolveReport {
            variables: prep.names.clone(),
            approximation: prep.lift(&[], h),
            status: Status::CertifiedEpsilon,
            params: DriverParams {
                mode: opts.mode,
                epsilon: epsilon.clone(),
                alpha: one,
                u: 0,
                h,
                h_rescaled: h,
                g: 0,
                h_required: None,
                worst_case_g,
                k_p: None,
                c_p,
            },
            bounds,
            structure,
            traces: Vec::new(),
            notes,
        });
    }

    let trace_mode = if opts.trace { TraceMode::Full } else { TraceMode::Last };

    if opts.mode == Mode::Adaptive {
        return solve_adaptive(&prep, epsilon, opts, bounds, structure, notes, worst_case_g, c_p, trace_mode);
    }

    let u_big = bounds.qmax_upper_exponent.clone().max(BigInt::zero());
    let u = to_u32(&u_big, opts.max_h)?;
    let (alpha, h_req) = if u == 0 {
        let alpha = c_min.clone().min(one.clone()) * &half * &bounds.qmin_lower;
        let h = rounding_parameter(n, d, f, &alpha, epsilon, &norm_p1);
        (alpha, h)
    } else {
        let alpha = pow2(-2 * u as i64)
            * c_min.clone().min(one.clone())
            * (&half * &bounds.qmin_lower).min(one.clone());
        let g = iterations_general(n, d, f, u, &alpha, epsilon, &norm_p1);
        (alpha, g + 1)
    };
    let h_req = match opts.min_h {
        Some(m) => h_req.max(BigInt::from(m)),
        None => h_req,
    };

    let (h_run, g, certified) = match opts.h {
        Some(h) => {
            let h_run = h.checked_add(u).ok_or_else(|| Error::InvalidArgument("h + u overflows".into()))?;
            let g = opts.iters.unwrap_or(h_run.saturating_sub(1).max(1));
            let certified = BigInt::from(h_run) >= h_req && g as u64 + 1 >= h_run as u64;
            (h_run, g, certified)
        }
        None => {
            let h_run = to_u32(&h_req, opts.max_h)?;
            let g = opts.iters.unwrap_or(h_run - 1).max(1);
            (h_run, g, g as u64 + 1 >= h_run as u64)
        }
    };
    if h_run <= u {
        return Err(Error::InvalidArgument(format!("rounding parameter {h_run} must exceed u = {u}")));
    }

    let rescaled = rescale(q, u);
    let mut plan = DnmPlan::uniform(dec, h_run, g);
    plan.divergence_exponent = (&bounds.qmax_upper_exponent - BigInt::from(u)).to_i64();
    plan.trace = trace_mode;
    plan.jobs = opts.jobs;
    let run = run_dnm(&rescaled, dec, &plan)?;
    let values: Vec<Dyadic> = run.approximation.iter().map(|x| x.mul_pow2(u)).collect();
    let h = h_run - u;

    let log_eps = BigInt::from(ceil_log2(&epsilon.recip()));
    let k_p = Some(BigInt::from(g) - &c_p * log_eps);
    Ok(SolveReport {
        variables: prep.names.clone(),
        approximation: prep.lift(&values, h),
        status: if certified { Status::CertifiedEpsilon } else { Status::AdaptiveHeuristic },
        params: DriverParams {
            mode: opts.mode,
            epsilon: epsilon.clone(),
            alpha,
            u,
            h,
            h_rescaled: h_run,
            g,
            h_required: Some(h_req),
            worst_case_g,
            k_p,
            c_p,
        },
        bounds,
        structure,
        traces: run.traces,
        notes,
    })
}

#[allow(clippy::too_many_arguments)]
fn solve_adaptive(
    prep: &Prepared,
    epsilon: &Rational,
    opts: &SolveOptions,
    bounds: LfpBounds,
    structure: Structure,
    mut notes: Vec<String>,
    worst_case_g: Option<BigInt>,
    c_p: BigInt,
    trace_mode: TraceMode,
) -> Result<SolveReport> {
    let q = &prep.system;
    let dec = &prep.dec;
    let divergence_exponent = bounds.qmax_upper_exponent.to_i64();
    let run_at = |h: u32, g: u32| -> Result<DnmRun> {
        let mut plan = DnmPlan::uniform(dec, h, g);
        plan.divergence_exponent = divergence_exponent;
        plan.trace = trace_mode;
        plan.jobs = opts.jobs;
        run_dnm(q, dec, &plan)
    };
    let report = |run: DnmRun, h: u32, g: u32, notes: Vec<String>| SolveReport {
        variables: prep.names.clone(),
        approximation: prep.lift(&run.approximation, h),
        status: Status::AdaptiveHeuristic,
        params: DriverParams {
            mode: Mode::Adaptive,
            epsilon: epsilon.clone(),
            alpha: Rational::zero(),
            u: 0,
            h,
            h_rescaled: h,
            g,
            h_required: None,
            worst_case_g: worst_case_g.clone(),
            k_p: None,
            c_p: c_p.clone(),
        },
        bounds: bounds.clone(),
        structure: structure.clone(),
        traces: run.traces,
        notes,
    };

    if let Some(h) = opts.h {
        let g = opts.iters.unwrap_or(h.saturating_sub(1).max(1));
        let run = run_at(h, g)?;
        return Ok(report(run, h, g, notes));
    }

    let tolerance = epsilon / Rational::from_integer(4.into());
    let start = ceil_log2(&epsilon.recip()) as u64 + 8;
    if start > opts.max_h {
        return Err(Error::ParamsInfeasible { required: start.to_string(), ceiling: opts.max_h });
    }
    let mut h = start as u32;
    let mut prev = run_at(h, h - 1)?;
    loop {
        let next_h = h as u64 * 2;
        if next_h > opts.max_h {
            return Err(Error::ParamsInfeasible { required: next_h.to_string(), ceiling: opts.max_h });
        }
        let next = run_at(next_h as u32, next_h as u32 - 1)?;
        let agree = prev
            .approximation
            .iter()
            .zip(&next.approximation)
            .all(|(a, b)| (a.to_rational() - b.to_rational()).abs() <= tolerance);
        h = next_h as u32;
        if agree {
            notes.push(format!("rounding levels {} and {h} agree within epsilon/4", h / 2));
            return Ok(report(next, h, h - 1, notes));
        }
        prev = next;
    }
}
