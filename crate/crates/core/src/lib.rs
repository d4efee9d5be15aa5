//! Certified least-fixed-point approximation for monotone polynomial
//! systems by rounded-down decomposed Newton iteration.

pub mod arith;
pub mod decomp;
pub mod driver;
pub mod error;
pub mod fixtures;
pub mod mps;
pub mod newton;
pub mod oracle;
pub mod p1ca;

pub use arith::{parse_rational, round_down_dyadic, solve_linear, Dyadic, RMatrix, RVector, Rational};
pub use decomp::{build_graph, decompose, Decomposition, DependencyGraph, Scc};
pub use driver::{
    compute_bounds, perturbation_bound, qmax_upper_bound, qmin_lower_bound, rescale, solve, BoundSource, LfpBounds,
    Mode, SolveOptions, SolveReport, Status,
};
pub use error::{Error, Result};
pub use mps::{clean, detect_zero_variables, to_snf, Cleaned, EncodingSize, Form, Monomial, MonotoneSystem, SnfSystem};
pub use newton::{certify_params_scc, newton_step, run_rnm, supercritical_witness, IterationTrace, RnmConfig};
pub use oracle::{univariate_quadratic_lfp, value_iterate, zero_set_oracle, QuadraticRoot};
pub use p1ca::{build_termination_mps, termination_probabilities, GMatrix, P1ca, P1caOptions};
