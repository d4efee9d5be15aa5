//! Seeded generators shared by the integration suites.
#![allow(dead_code)]

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use rdnm::arith::round_down_dyadic;
use rdnm::p1ca::Transition;
use rdnm::{Monomial, MonotoneSystem, P1ca, RVector, Rational};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("x{i}")).collect()
}

fn random_monomial(rng: &mut ChaCha8Rng, vars: &[usize], coefficient: Rational, max_degree: u32) -> Monomial {
    let degree = rng.gen_range(0..=max_degree);
    let exps: Vec<(usize, u32)> = (0..degree).map(|_| (*vars.choose(rng).unwrap(), 1)).collect();
    Monomial::new(coefficient, exps)
}

/// Sparse system with small positive coefficients, up to `terms` monomials
/// per equation, some equations without constants.
pub fn sparse_system(rng: &mut ChaCha8Rng, n: usize, terms: usize, max_degree: u32) -> MonotoneSystem {
    let vars: Vec<usize> = (0..n).collect();
    let equations = (0..n)
        .map(|_| {
            let k = rng.gen_range(1..=terms);
            (0..k)
                .map(|_| {
                    let c = q(rng.gen_range(1..=4), rng.gen_range(1..=4));
                    random_monomial(rng, &vars, c, max_degree)
                })
                .collect()
        })
        .collect();
    MonotoneSystem::new(names(n), equations).unwrap()
}

/// Cleans `sys` and appends variables that are zero in the least fixed point,
/// wiring them into the existing equations through extra monomials.
pub fn dirty(rng: &mut ChaCha8Rng, sys: &MonotoneSystem, extra: usize) -> MonotoneSystem {
    let cleaned = rdnm::clean(sys).system;
    let base = cleaned.len();
    let n = base + extra;
    let all: Vec<usize> = (0..n).collect();
    let fresh: Vec<usize> = (base..n).collect();
    let mut equations: Vec<Vec<Monomial>> = cleaned.equations().to_vec();
    for _ in 0..extra {
        let k = rng.gen_range(1..=2);
        let eq = (0..k)
            .map(|_| {
                let c = q(1, rng.gen_range(1..=3));
                let z = *fresh.choose(rng).unwrap();
                if rng.gen_bool(0.5) {
                    Monomial::new(c, [(z, 1), (*all.choose(rng).unwrap(), 1)])
                } else {
                    Monomial::new(c, [(z, 1)])
                }
            })
            .collect();
        equations.push(eq);
    }
    if extra > 0 {
        for eq in equations.iter_mut().take(base) {
            if rng.gen_bool(0.4) {
                let z = *fresh.choose(rng).unwrap();
                eq.push(Monomial::new(q(1, 2), [(z, 1), (*all.choose(rng).unwrap(), 1)]));
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut position = vec![0; n];
    for (p, &i) in order.iter().enumerate() {
        position[i] = p;
    }
    let permuted = order
        .iter()
        .map(|&i| {
            equations[i]
                .iter()
                .map(|m| {
                    Monomial::new(
                        m.coefficient().clone(),
                        m.exponents().iter().map(|(&v, &e)| (position[v], e)),
                    )
                })
                .collect()
        })
        .collect();
    MonotoneSystem::new(names(n), permuted).unwrap()
}

/// Quadratic system whose coefficient rows sum to at most one, so `1` is a
/// post-fixed point and the least fixed point is at most `1`.
pub fn probabilistic_quadratic(rng: &mut ChaCha8Rng, n: usize) -> MonotoneSystem {
    let vars: Vec<usize> = (0..n).collect();
    let equations = (0..n)
        .map(|i| {
            let k = rng.gen_range(1..=3);
            let denom = rng.gen_range(k as i64 + 1..=8);
            let mut budget = denom;
            let mut terms = vec![Monomial::constant(q(1, denom))];
            budget -= 1;
            for _ in 0..k {
                if budget == 0 {
                    break;
                }
                let c = rng.gen_range(1..=budget);
                budget -= c;
                let mut m = random_monomial(rng, &vars, q(c, denom), 2);
                if m.is_constant() {
                    m = Monomial::new(q(c, denom), [(i, 2)]);
                }
                terms.push(m);
            }
            terms
        })
        .collect();
    MonotoneSystem::new(names(n), equations).unwrap()
}

/// One value-iteration step rounded down to the `2^-bits` grid; from a
/// point below the least fixed point it stays below it.
pub fn rounded_value_step(sys: &MonotoneSystem, x: &[Rational], bits: u32) -> RVector {
    sys.eval(x).iter().map(|v| round_down_dyadic(v, bits).to_rational()).collect()
}

/// One-counter automaton over `r` states with full distributions on `delta`.
pub fn random_p1ca(rng: &mut ChaCha8Rng, r: usize) -> P1ca {
    let states: Vec<String> = (0..r).map(|i| format!("s{i}")).collect();
    let mut delta = Vec::new();
    for from in &states {
        let k = rng.gen_range(1..=3usize);
        let denom = rng.gen_range(k as i64..=6);
        let mut cuts: Vec<i64> = (1..denom).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<i64> = cuts.into_iter().take(k - 1).collect();
        cuts.push(0);
        cuts.push(denom);
        cuts.sort();
        for w in cuts.windows(2) {
            let change = *[-1i8, 0, 1].choose(rng).unwrap();
            delta.push(Transition {
                from: from.clone(),
                p: q(w[1] - w[0], denom),
                k: change,
                to: states.choose(rng).unwrap().clone(),
            });
        }
    }
    P1ca { states, delta, delta0: Vec::new() }
}
