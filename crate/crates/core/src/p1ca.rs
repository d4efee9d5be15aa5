//! Probabilistic one-counter automata and their termination probabilities.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize, Serializer};

use crate::arith::{bit_length, ceil_log2, Dyadic, Rational};
use crate::decomp::{build_graph, decompose};
use crate::driver::{self, Mode, SolveOptions, SolveReport, Status};
use crate::error::{Error, Result};
use crate::mps::{clean, detect_zero_variables, Monomial, MonotoneSystem};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: String,
    #[serde(with = "crate::arith::serde_rational")]
    pub p: Rational,
    pub k: i8,
    pub to: String,
}

/// Control states with transitions at a positive counter (`delta`) and at
/// counter zero (`delta0`); `k` is the counter change.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct P1ca {
    pub states: Vec<String>,
    pub delta: Vec<Transition>,
    #[serde(default)]
    pub delta0: Vec<Transition>,
}

impl P1ca {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn r(&self) -> usize {
        self.states.len()
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.states.is_empty() {
            problems.push("no control states".to_string());
        }
        let mut seen = HashSet::new();
        for s in &self.states {
            if !seen.insert(s.as_str()) {
                problems.push(format!("duplicate state `{s}`"));
            }
        }
        for (table, transitions, allowed) in
            [("delta", &self.delta, &[-1i8, 0, 1][..]), ("delta0", &self.delta0, &[0i8, 1][..])]
        {
            let mut sums: BTreeMap<&str, Rational> = BTreeMap::new();
            for (i, t) in transitions.iter().enumerate() {
                for end in [&t.from, &t.to] {
                    if !seen.contains(end.as_str()) {
                        problems.push(format!("{table}[{i}]: unknown state `{end}`"));
                    }
                }
                if !t.p.is_positive() {
                    problems.push(format!("{table}[{i}]: probability {} is not positive", t.p));
                }
                if !allowed.contains(&t.k) {
                    problems.push(format!("{table}[{i}]: counter change {} not allowed", t.k));
                }
                *sums.entry(t.from.as_str()).or_insert_with(Rational::zero) += &t.p;
            }
            for (state, total) in sums {
                if total > Rational::one() {
                    problems.push(format!("{table}: probabilities from `{state}` sum to {total} > 1"));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(problems))
        }
    }

    /// Largest bit length of any probability's numerator or denominator.
    pub fn max_bits(&self) -> u64 {
        self.delta
            .iter()
            .chain(&self.delta0)
            .map(|t| bit_length(t.p.numer()).max(bit_length(t.p.denom())))
            .max()
            .unwrap_or(1)
    }

    /// Smallest probability of a positive-counter transition.
    pub fn c_min(&self) -> Option<Rational> {
        self.delta.iter().map(|t| t.p.clone()).min()
    }
}

pub fn variable_name(from: &str, to: &str) -> String {
    format!("{from}\u{2192}{to}")
}

/// The system for `x_uv`, the probability of first reaching counter zero in
/// state `v` from state `u` at counter one:
/// `x_uv = p-_uv + sum_w p0_uw x_wv + sum_y p+_uy sum_z x_yz x_zv`.
/// Variable `x_uv` has index `u r + v`.
pub fn build_termination_mps(model: &P1ca) -> Result<MonotoneSystem> {
    model.validate()?;
    let r = model.r();
    let index: HashMap<&str, usize> = model.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let var = |u: usize, v: usize| u * r + v;
    let mut equations: Vec<Vec<Monomial>> = vec![Vec::new(); r * r];
    for t in &model.delta {
        let (u, w) = (index[t.from.as_str()], index[t.to.as_str()]);
        match t.k {
            -1 => equations[var(u, w)].push(Monomial::constant(t.p.clone())),
            0 => {
                for v in 0..r {
                    equations[var(u, v)].push(Monomial::new(t.p.clone(), [(var(w, v), 1)]));
                }
            }
            _ => {
                for v in 0..r {
                    for z in 0..r {
                        equations[var(u, v)].push(Monomial::new(t.p.clone(), [(var(w, z), 1), (var(z, v), 1)]));
                    }
                }
            }
        }
    }
    let names = (0..r * r).map(|i| variable_name(&model.states[i / r], &model.states[i % r])).collect();
    MonotoneSystem::new(names, equations)
}

fn ser_bigint<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// The structural rounding parameter
/// `8 m r^7 + 2 m r^5 + c r^k + 3 + ceil(2 log(1/eps))` for `c r^k` in
/// `{9 r^4, 9 r^2}`.
pub fn structural_h(r: usize, m: u64, epsilon: &Rational, square_term_power: u32) -> BigInt {
    let r = BigInt::from(r);
    let m = BigInt::from(m);
    let log = BigInt::from(ceil_log2(&(epsilon * epsilon).recip()));
    BigInt::from(8) * &m * num_traits::pow(r.clone(), 7)
        + BigInt::from(2) * &m * num_traits::pow(r.clone(), 5)
        + BigInt::from(9) * num_traits::pow(r, square_term_power as usize)
        + 3
        + log
}

/// Lower bound `c_min^(r^3)` on every positive termination probability.
pub fn termination_qmin_bound(model: &P1ca) -> Option<Rational> {
    let r = model.r();
    model.c_min().map(|c| num_traits::pow(c, r * r * r))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StructuralH {
    #[serde(serialize_with = "ser_bigint")]
    pub r4_variant: BigInt,
    #[serde(serialize_with = "ser_bigint")]
    pub r2_variant: BigInt,
}

/// Termination probabilities `q_uv` as an `r x r` matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GMatrix {
    pub states: Vec<String>,
    pub entries: Vec<Vec<Dyadic>>,
    #[serde(with = "crate::arith::serde_rational")]
    pub epsilon: Rational,
    /// `zero_mask[u][v]` marks pairs with probability exactly zero.
    pub zero_mask: Vec<Vec<bool>>,
    pub status: Status,
    pub m: u64,
    pub structural_h: StructuralH,
    pub h: u32,
    pub report: SolveReport,
}

#[derive(Clone, Debug)]
pub struct P1caOptions {
    pub mode: Mode,
    pub max_h: u64,
    pub trace: bool,
    pub jobs: usize,
}

impl Default for P1caOptions {
    fn default() -> Self {
        let d = SolveOptions::default();
        P1caOptions { mode: Mode::Certified, max_h: d.max_h, trace: false, jobs: 1 }
    }
}

/// Solves the termination system with the larger of the structural rounding
/// parameter and the one derived from the cleaned system itself.
pub fn termination_probabilities(model: &P1ca, epsilon: &Rational, opts: &P1caOptions) -> Result<GMatrix> {
    let sys = build_termination_mps(model)?;
    let cleaned = clean(&sys);
    let dec = decompose(&build_graph(&cleaned.system), &cleaned.system);
    if dec.nonlinear_depth > 1 {
        return Err(Error::StructureViolation(format!(
            "termination system has nonlinear depth {} > 1",
            dec.nonlinear_depth
        )));
    }
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} not in (0, 1)")));
    }
    let r = model.r();
    let m = model.max_bits();
    let structural = StructuralH { r4_variant: structural_h(r, m, epsilon, 4), r2_variant: structural_h(r, m, epsilon, 2) };
    let min_h = u64::try_from(&structural.r4_variant).map_err(|_| Error::ParamsInfeasible {
        required: structural.r4_variant.to_string(),
        ceiling: opts.max_h,
    })?;
    if opts.mode == Mode::Certified && min_h > opts.max_h {
        return Err(Error::ParamsInfeasible { required: min_h.to_string(), ceiling: opts.max_h });
    }
    let solve_opts = SolveOptions {
        mode: opts.mode,
        assume_probabilistic: true,
        snf: false,
        max_h: opts.max_h,
        min_h: Some(min_h),
        trace: opts.trace,
        jobs: opts.jobs,
        ..SolveOptions::default()
    };
    let report = driver::solve(&sys, epsilon, &solve_opts)?;
    let zero: HashSet<usize> = detect_zero_variables(&sys).into_iter().collect();
    let entries = (0..r).map(|u| report.approximation[u * r..(u + 1) * r].to_vec()).collect();
    let zero_mask = (0..r).map(|u| (0..r).map(|v| zero.contains(&(u * r + v))).collect()).collect();
    Ok(GMatrix {
        states: model.states.clone(),
        entries,
        epsilon: epsilon.clone(),
        zero_mask,
        status: report.status,
        m,
        structural_h: structural,
        h: report.params.h,
        report,
    })
}
