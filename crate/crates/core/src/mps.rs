//! Monotone polynomial systems `x = P(x)`: representation, JSON I/O,
//! evaluation, Jacobians, simple normal form, and zero-variable cleaning.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_traits::{One, Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{parse_rational, RMatrix, RVector, Rational};
use crate::error::{Error, Result};

/// `coefficient * prod_j x_j^{e_j}` with every listed exponent at least 1.
/// An empty exponent map is a constant term.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    coefficient: Rational,
    exponents: BTreeMap<usize, u32>,
}

impl Monomial {
    /// Zero exponents are dropped and repeated variables are merged.
    pub fn new(coefficient: Rational, exponents: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (var, exp) in exponents {
            if exp > 0 {
                *map.entry(var).or_insert(0) += exp;
            }
        }
        Monomial { coefficient, exponents: map }
    }

    pub fn constant(coefficient: Rational) -> Self {
        Monomial { coefficient, exponents: BTreeMap::new() }
    }

    pub fn coefficient(&self) -> &Rational {
        &self.coefficient
    }

    pub fn exponents(&self) -> &BTreeMap<usize, u32> {
        &self.exponents
    }

    pub fn is_constant(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exponents.values().sum()
    }

    pub fn exponent_of(&self, var: usize) -> u32 {
        self.exponents.get(&var).copied().unwrap_or(0)
    }

    pub fn variables(&self) -> impl Iterator<Item = usize> + '_ {
        self.exponents.keys().copied()
    }

    pub fn eval(&self, z: &[Rational]) -> Rational {
        let mut acc = self.coefficient.clone();
        for (&var, &exp) in &self.exponents {
            if z[var].is_zero() {
                return Rational::zero();
            }
            acc *= Pow::pow(&z[var], exp);
        }
        acc
    }

    pub(crate) fn with_coefficient(&self, coefficient: Rational) -> Monomial {
        Monomial { coefficient, exponents: self.exponents.clone() }
    }
}

/// Canonical order: descending total degree, then by exponent list.
fn term_order(a: &Monomial, b: &Monomial) -> std::cmp::Ordering {
    b.degree()
        .cmp(&a.degree())
        .then_with(|| a.exponents.iter().cmp(b.exponents.iter()))
}

fn canonical_terms(terms: Vec<Monomial>) -> Vec<Monomial> {
    let mut merged: BTreeMap<Vec<(usize, u32)>, Rational> = BTreeMap::new();
    for t in terms {
        let key: Vec<(usize, u32)> = t.exponents.iter().map(|(&v, &e)| (v, e)).collect();
        *merged.entry(key).or_insert_with(Rational::zero) += t.coefficient;
    }
    let mut out: Vec<Monomial> = merged
        .into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(key, c)| Monomial::new(c, key))
        .collect();
    out.sort_by(term_order);
    out
}

/// A system `x_i = P_i(x)`, `i = 0..n`, with strictly positive coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneSystem {
    names: Vec<String>,
    equations: Vec<Vec<Monomial>>,
}

impl MonotoneSystem {
    /// Validates and canonicalizes: like terms are merged, terms sorted.
    pub fn new(names: Vec<String>, equations: Vec<Vec<Monomial>>) -> Result<Self> {
        if names.len() != equations.len() {
            return Err(Error::parse(format!(
                "{} variables but {} equations",
                names.len(),
                equations.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::parse(format!("duplicate variable name `{name}`")));
            }
        }
        let n = names.len();
        let mut canon = Vec::with_capacity(n);
        for (i, eq) in equations.into_iter().enumerate() {
            for term in &eq {
                if !term.coefficient.is_positive() {
                    return Err(Error::NotMonotone {
                        variable: names[i].clone(),
                        coefficient: term.coefficient.to_string(),
                    });
                }
                if let Some(&bad) = term.exponents.keys().find(|&&v| v >= n) {
                    return Err(Error::parse(format!(
                        "equation for `{}` references variable index {bad} out of range",
                        names[i]
                    )));
                }
            }
            canon.push(canonical_terms(eq));
        }
        Ok(MonotoneSystem { names, equations: canon })
    }

    pub fn empty() -> Self {
        MonotoneSystem { names: Vec::new(), equations: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn equations(&self) -> &[Vec<Monomial>] {
        &self.equations
    }

    pub fn equation(&self, i: usize) -> &[Monomial] {
        &self.equations[i]
    }

    pub fn monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.equations.iter().flatten()
    }

    pub fn degree(&self) -> u32 {
        self.monomials().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Smallest coefficient or constant term, `None` for a system with no terms.
    pub fn c_min(&self) -> Option<Rational> {
        self.monomials().map(|m| m.coefficient.clone()).min()
    }

    /// `||P(1)||_inf`, the largest row sum of coefficients.
    pub fn norm_at_ones(&self) -> Rational {
        self.equations
            .iter()
            .map(|eq| eq.iter().fold(Rational::zero(), |acc, m| acc + &m.coefficient))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn encoding_size(&self) -> EncodingSize {
        let bits = |n: &num_bigint::BigInt| n.bits().max(1);
        let total = self
            .equations
            .iter()
            .map(|eq| {
                let eq_bits: u64 = eq
                    .iter()
                    .map(|m| {
                        let c = bits(m.coefficient.numer()) + bits(m.coefficient.denom());
                        let e: u64 = m
                            .exponents
                            .iter()
                            .map(|(&v, &e)| {
                                (usize::BITS - (v + 1).leading_zeros()) as u64
                                    + (u32::BITS - e.leading_zeros()) as u64
                            })
                            .sum();
                        c + e
                    })
                    .sum();
                eq_bits.max(1)
            })
            .sum();
        EncodingSize(total)
    }

    pub fn eval(&self, z: &[Rational]) -> RVector {
        assert_eq!(z.len(), self.len(), "dimension mismatch");
        self.equations
            .iter()
            .map(|eq| eq.iter().fold(Rational::zero(), |acc, m| acc + m.eval(z)))
            .collect()
    }

    /// Exact Jacobian `B(z)` of a system with degree at most 2.
    pub fn eval_jacobian(&self, z: &[Rational]) -> Result<RMatrix> {
        assert_eq!(z.len(), self.len(), "dimension mismatch");
        self.check_quadratic()?;
        let n = self.len();
        let mut b = RMatrix::zeros(n, n);
        for (i, eq) in self.equations.iter().enumerate() {
            for m in eq {
                let vars: Vec<(usize, u32)> = m.exponents.iter().map(|(&v, &e)| (v, e)).collect();
                match vars.as_slice() {
                    [] => {}
                    [(j, 1)] => b[(i, *j)] += &m.coefficient,
                    [(j, 2)] => {
                        b[(i, *j)] += Rational::from_integer(2.into()) * &m.coefficient * &z[*j]
                    }
                    [(j, 1), (k, 1)] => {
                        b[(i, *j)] += &m.coefficient * &z[*k];
                        b[(i, *k)] += &m.coefficient * &z[*j];
                    }
                    _ => unreachable!("degree checked above"),
                }
            }
        }
        Ok(b)
    }

    pub fn check_quadratic(&self) -> Result<()> {
        for (i, eq) in self.equations.iter().enumerate() {
            if let Some(m) = eq.iter().find(|m| m.degree() > 2) {
                return Err(Error::DegreeTooHigh {
                    variable: self.names[i].clone(),
                    degree: m.degree(),
                });
            }
        }
        Ok(())
    }

    /// Same system with each monomial's coefficient replaced by `f(m)`.
    /// Terms whose new coefficient is zero are dropped.
    pub fn map_coefficients(&self, f: impl Fn(&Monomial) -> Rational) -> MonotoneSystem {
        let equations = self
            .equations
            .iter()
            .map(|eq| {
                canonical_terms(
                    eq.iter()
                        .map(|m| m.with_coefficient(f(m)))
                        .filter(|m| !m.coefficient.is_zero())
                        .collect(),
                )
            })
            .collect();
        MonotoneSystem { names: self.names.clone(), equations }
    }

    /// The subsystem for `vars` (in the given order), with every other
    /// variable replaced by `fixed(var)`. Terms that evaluate to zero vanish.
    pub fn restrict(&self, vars: &[usize], fixed: impl Fn(usize) -> Rational) -> MonotoneSystem {
        let local: HashMap<usize, usize> = vars.iter().enumerate().map(|(l, &g)| (g, l)).collect();
        let mut equations = Vec::with_capacity(vars.len());
        for &g in vars {
            let mut terms = Vec::new();
            for m in &self.equations[g] {
                let mut coef = m.coefficient.clone();
                let mut exps = Vec::new();
                for (&v, &e) in &m.exponents {
                    match local.get(&v) {
                        Some(&l) => exps.push((l, e)),
                        None => {
                            let value = fixed(v);
                            if value.is_zero() {
                                coef = Rational::zero();
                                break;
                            }
                            coef *= Pow::pow(&value, e);
                        }
                    }
                }
                if !coef.is_zero() {
                    terms.push(Monomial::new(coef, exps));
                }
            }
            equations.push(canonical_terms(terms));
        }
        MonotoneSystem {
            names: vars.iter().map(|&g| self.names[g].clone()).collect(),
            equations,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: MpsDoc = serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
        MonotoneSystem::from_doc(doc)
    }

    pub fn from_doc(doc: MpsDoc) -> Result<Self> {
        let index: HashMap<&str, usize> =
            doc.vars.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut equations = Vec::with_capacity(doc.eqs.len());
        for eq in &doc.eqs {
            let mut terms = Vec::with_capacity(eq.len());
            for term in eq {
                let c = parse_rational(&term.c)?;
                let mut exps = Vec::with_capacity(term.m.len());
                for (name, &e) in &term.m {
                    let &v = index
                        .get(name.as_str())
                        .ok_or_else(|| Error::parse(format!("unknown variable `{name}`")))?;
                    exps.push((v, e));
                }
                terms.push(Monomial::new(c, exps));
            }
            equations.push(terms);
        }
        MonotoneSystem::new(doc.vars, equations)
    }

    pub fn to_doc(&self) -> MpsDoc {
        let eqs = self
            .equations
            .iter()
            .map(|eq| {
                eq.iter()
                    .map(|m| TermDoc {
                        c: m.coefficient.to_string(),
                        m: m.exponents.iter().map(|(&v, &e)| (self.names[v].clone(), e)).collect(),
                    })
                    .collect()
            })
            .collect();
        MpsDoc { vars: self.names.clone(), eqs }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("serializable")
    }
}

impl fmt::Display for MonotoneSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, eq) in self.equations.iter().enumerate() {
            write!(f, "{} = ", self.names[i])?;
            if eq.is_empty() {
                write!(f, "0")?;
            }
            for (k, m) in eq.iter().enumerate() {
                if k > 0 {
                    write!(f, " + ")?;
                }
                write!(f, "{}", m.coefficient)?;
                for (&v, &e) in &m.exponents {
                    write!(f, "*{}", self.names[v])?;
                    if e > 1 {
                        write!(f, "^{e}")?;
                    }
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// JSON document: `{"vars":[..], "eqs":[[{"c":"p/q","m":{var:exp}}, ..], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct MpsDoc {
    pub vars: Vec<String>,
    pub eqs: Vec<Vec<TermDoc>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct TermDoc {
    pub c: String,
    #[serde(default)]
    pub m: BTreeMap<String, u32>,
}

/// Encoding size `|P|` in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct EncodingSize(pub u64);

impl EncodingSize {
    pub fn bits(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Form {
    /// `x_i = x_j * x_k`, unit coefficient.
    Product,
    /// Affine in the variables.
    Linear,
}

/// A system in simple normal form plus the positions of the original
/// variables inside it.
#[derive(Clone, Debug)]
pub struct SnfSystem {
    pub system: MonotoneSystem,
    pub forms: Vec<Form>,
    /// `projection[i]` is the index of original variable `i`.
    pub projection: Vec<usize>,
}

impl SnfSystem {
    pub fn is_valid(&self) -> bool {
        self.system.equations().iter().zip(&self.forms).all(|(eq, form)| match form {
            Form::Product => {
                eq.len() == 1 && eq[0].degree() == 2 && eq[0].coefficient().is_one()
            }
            Form::Linear => eq.iter().all(|m| m.degree() <= 1),
        })
    }
}

/// Rewrites every monomial of degree >= 2 as `c * w` where `w` is a fresh
/// product variable built by left-associated binary splitting of the
/// monomial's variables in index order. Product variables are shared.
pub fn to_snf(sys: &MonotoneSystem) -> SnfSystem {
    let n = sys.len();
    let mut names: Vec<String> = sys.names().to_vec();
    let mut taken: HashSet<String> = names.iter().cloned().collect();
    let mut products: HashMap<(usize, usize), usize> = HashMap::new();
    let mut product_eqs: Vec<Vec<Monomial>> = Vec::new();
    let mut equations: Vec<Vec<Monomial>> = Vec::with_capacity(n);

    let mut product_var = |a: usize, b: usize, names: &mut Vec<String>| -> usize {
        let key = (a.min(b), a.max(b));
        if let Some(&w) = products.get(&key) {
            return w;
        }
        let mut name = format!("{}*{}", names[a], names[b]);
        let mut k = 1;
        while taken.contains(&name) {
            k += 1;
            name = format!("{}*{}#{k}", names[a], names[b]);
        }
        taken.insert(name.clone());
        let w = names.len();
        names.push(name);
        product_eqs.push(vec![Monomial::new(Rational::one(), [(a, 1), (b, 1)])]);
        products.insert(key, w);
        w
    };

    for eq in sys.equations() {
        let mut terms = Vec::with_capacity(eq.len());
        for m in eq {
            if m.degree() <= 1 {
                terms.push(m.clone());
                continue;
            }
            let factors: Vec<usize> = m
                .exponents()
                .iter()
                .flat_map(|(&v, &e)| std::iter::repeat(v).take(e as usize))
                .collect();
            let mut acc = factors[0];
            for &next in &factors[1..] {
                acc = product_var(acc, next, &mut names);
            }
            terms.push(Monomial::new(m.coefficient().clone(), [(acc, 1)]));
        }
        equations.push(terms);
    }
    let fresh = product_eqs.len();
    equations.extend(product_eqs);
    let system = MonotoneSystem::new(names, equations).expect("snf preserves validity");
    let forms = (0..n)
        .map(|_| Form::Linear)
        .chain((0..fresh).map(|_| Form::Product))
        .collect();
    SnfSystem { system, forms, projection: (0..n).collect() }
}

/// Indices `i` with `q*_i = 0`: variables never reached by a monomial whose
/// variables are all known to be positive.
pub fn detect_zero_variables(sys: &MonotoneSystem) -> Vec<usize> {
    let n = sys.len();
    let mut positive = vec![false; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if positive[i] {
                continue;
            }
            if sys.equation(i).iter().any(|m| m.variables().all(|v| positive[v])) {
                positive[i] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n).filter(|&i| !positive[i]).collect()
}

/// Result of removing the zero variables of a system.
#[derive(Clone, Debug)]
pub struct Cleaned {
    pub system: MonotoneSystem,
    /// `kept[j]` is the original index of cleaned variable `j`.
    pub kept: Vec<usize>,
    pub zero: Vec<usize>,
}

pub fn clean(sys: &MonotoneSystem) -> Cleaned {
    let zero = detect_zero_variables(sys);
    let zero_set: HashSet<usize> = zero.iter().copied().collect();
    let kept: Vec<usize> = (0..sys.len()).filter(|i| !zero_set.contains(i)).collect();
    let system = sys.restrict(&kept, |_| Rational::zero());
    Cleaned { system, kept, zero }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_rational;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    const HALF_SQUARE: &str = r#"{"vars":["x"],"eqs":[[{"c":"1/2","m":{"x":2}},{"c":"1/2","m":{}}]]}"#;

    #[test]
    fn parses_univariate_example() {
        let sys = MonotoneSystem::parse(HALF_SQUARE).unwrap();
        assert_eq!(sys.len(), 1);
        assert_eq!(sys.equation(0).len(), 2);
        assert_eq!(sys.equation(0)[0], Monomial::new(q("1/2"), [(0, 2)]));
        assert_eq!(sys.equation(0)[1], Monomial::constant(q("1/2")));
        assert_eq!(sys.to_string(), "x = 1/2*x^2 + 1/2\n");
    }

    #[test]
    fn rejects_negative_coefficient() {
        let err = MonotoneSystem::parse(r#"{"vars":["x"],"eqs":[[{"c":"-1","m":{}}]]}"#);
        assert!(matches!(err, Err(Error::NotMonotone { .. })));
        let err = MonotoneSystem::parse(r#"{"vars":["x"],"eqs":[[{"c":"0","m":{"x":1}}]]}"#);
        assert!(matches!(err, Err(Error::NotMonotone { .. })));
    }

    #[test]
    fn rejects_arity_mismatch_and_junk() {
        assert!(matches!(MonotoneSystem::parse(r#"{"vars":["x"],"eqs":[]}"#), Err(Error::Parse(_))));
        assert!(matches!(MonotoneSystem::parse("{"), Err(Error::Parse(_))));
        assert!(matches!(
            MonotoneSystem::parse(r#"{"vars":["x"],"eqs":[[{"c":"1","m":{"y":1}}]]}"#),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            MonotoneSystem::parse(r#"{"vars":["x","x"],"eqs":[[],[]]}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn merges_like_terms() {
        let sys = MonotoneSystem::parse(
            r#"{"vars":["x"],"eqs":[[{"c":"1/4","m":{"x":1}},{"c":"1/4","m":{"x":1}}]]}"#,
        )
        .unwrap();
        assert_eq!(sys.equation(0), &[Monomial::new(q("1/2"), [(0, 1)])]);
    }

    #[test]
    fn encoding_size_follows_bit_formula() {
        // 1/2*x^2: 1 + 2 coefficient bits, index 1 and exponent 2 -> 1 + 2; 1/2: 1 + 2.
        let sys = MonotoneSystem::parse(HALF_SQUARE).unwrap();
        assert_eq!(sys.encoding_size().bits(), 9);
        let one = MonotoneSystem::parse(r#"{"vars":["x"],"eqs":[[{"c":"1","m":{}}]]}"#).unwrap();
        assert_eq!(one.encoding_size().bits(), 2);
        let zero = MonotoneSystem::parse(r#"{"vars":["x","y"],"eqs":[[],[]]}"#).unwrap();
        assert_eq!(zero.encoding_size().bits(), 2);
    }

    #[test]
    fn evaluates_exactly() {
        let sys = MonotoneSystem::parse(HALF_SQUARE).unwrap();
        assert_eq!(sys.eval(&[q("0")]), vec![q("1/2")]);
        assert_eq!(sys.eval(&[q("5/8")]), vec![q("89/128")]);
        assert_eq!(sys.eval(&[q("1")]), vec![q("1")]);
    }

    #[test]
    fn jacobian_examples() {
        let sys = MonotoneSystem::parse(HALF_SQUARE).unwrap();
        assert_eq!(sys.eval_jacobian(&[q("3/7")]).unwrap()[(0, 0)], q("3/7"));

        let prod = MonotoneSystem::new(
            vec!["a".into(), "b".into()],
            vec![vec![Monomial::new(q("1"), [(0, 1), (1, 1)])], vec![Monomial::constant(q("1/2"))]],
        )
        .unwrap();
        let b = prod.eval_jacobian(&[q("2/3"), q("5/7")]).unwrap();
        assert_eq!(b.row(0), &[q("5/7"), q("2/3")]);
        assert_eq!(b.row(1), &[q("0"), q("0")]);

        let lin = MonotoneSystem::new(
            vec!["x".into()],
            vec![vec![Monomial::new(q("1/2"), [(0, 1)]), Monomial::constant(q("1/4"))]],
        )
        .unwrap();
        assert_eq!(lin.eval_jacobian(&[q("9")]).unwrap()[(0, 0)], q("1/2"));
    }

    #[test]
    fn jacobian_rejects_cubic() {
        let cubic = MonotoneSystem::new(
            vec!["x".into()],
            vec![vec![Monomial::new(q("2"), [(0, 3)]), Monomial::constant(q("1/3"))]],
        )
        .unwrap();
        assert!(matches!(
            cubic.eval_jacobian(&[q("0")]),
            Err(Error::DegreeTooHigh { degree: 3, .. })
        ));
    }

    #[test]
    fn snf_of_cubic() {
        let cubic = MonotoneSystem::new(
            vec!["x".into()],
            vec![vec![Monomial::new(q("2"), [(0, 3)]), Monomial::constant(q("1/3"))]],
        )
        .unwrap();
        let snf = to_snf(&cubic);
        assert!(snf.is_valid());
        let s = &snf.system;
        assert_eq!(s.len(), 3);
        assert_eq!(snf.forms, vec![Form::Linear, Form::Product, Form::Product]);
        // w1 = x*x, w2 = w1*x, x = 2 w2 + 1/3
        assert_eq!(s.equation(1), &[Monomial::new(q("1"), [(0, 2)])]);
        assert_eq!(s.equation(2), &[Monomial::new(q("1"), [(0, 1), (1, 1)])]);
        assert_eq!(
            s.equation(0),
            &[Monomial::new(q("2"), [(2, 1)]), Monomial::constant(q("1/3"))]
        );
        assert_eq!(s.name(1), "x*x");
        assert_eq!(s.name(2), "x*x*x");
    }

    #[test]
    fn snf_of_linear_is_identity() {
        let lin = MonotoneSystem::parse(
            r#"{"vars":["a","b"],"eqs":[[{"c":"1/3","m":{"b":1}},{"c":"1/3","m":{}}],[{"c":"1/2","m":{"a":1}}]]}"#,
        )
        .unwrap();
        let snf = to_snf(&lin);
        assert_eq!(snf.system, lin);
        assert_eq!(snf.forms, vec![Form::Linear, Form::Linear]);
    }

    #[test]
    fn snf_shares_products_and_avoids_name_clashes() {
        let sys = MonotoneSystem::parse(
            r#"{"vars":["x","x*x"],"eqs":[[{"c":"1/4","m":{"x":2}},{"c":"1/4","m":{"x":3}},{"c":"1/4","m":{}}],[{"c":"1","m":{}}]]}"#,
        )
        .unwrap();
        let snf = to_snf(&sys);
        assert!(snf.is_valid());
        // one product for x*x, one for (x*x)*x
        assert_eq!(snf.system.len(), 4);
        assert_eq!(snf.system.name(2), "x*x#2");
    }

    #[test]
    fn zero_detection_examples() {
        let sys = MonotoneSystem::parse(
            r#"{"vars":["a","b"],"eqs":[[{"c":"1","m":{"a":1,"b":1}}],[{"c":"1/2","m":{"b":1}},{"c":"1/2","m":{}}]]}"#,
        )
        .unwrap();
        assert_eq!(detect_zero_variables(&sys), vec![0]);
        let cleaned = clean(&sys);
        assert_eq!(cleaned.kept, vec![1]);
        assert_eq!(cleaned.system.to_string(), "b = 1/2*b + 1/2\n");

        let cyc = MonotoneSystem::parse(
            r#"{"vars":["a","b"],"eqs":[[{"c":"1","m":{"b":1}}],[{"c":"1","m":{"a":1}}]]}"#,
        )
        .unwrap();
        assert_eq!(detect_zero_variables(&cyc), vec![0, 1]);

        let consts = MonotoneSystem::parse(
            r#"{"vars":["a","b"],"eqs":[[{"c":"1","m":{"b":2}},{"c":"1/5","m":{}}],[{"c":"1/3","m":{}}]]}"#,
        )
        .unwrap();
        assert!(detect_zero_variables(&consts).is_empty());
        let cleaned = clean(&consts);
        assert_eq!(cleaned.system, consts);
        assert_eq!(cleaned.kept, vec![0, 1]);
    }

    #[test]
    fn clean_can_empty_the_system() {
        let sys = MonotoneSystem::parse(
            r#"{"vars":["a","b"],"eqs":[[{"c":"1","m":{"b":1}},{"c":"1","m":{"a":2}}],[{"c":"1","m":{"b":1}}]]}"#,
        )
        .unwrap();
        let cleaned = clean(&sys);
        assert!(cleaned.system.is_empty());
        assert_eq!(cleaned.zero, vec![0, 1]);
    }

    #[test]
    fn restrict_substitutes_values() {
        let sys = MonotoneSystem::parse(
            r#"{"vars":["x","y"],"eqs":[[{"c":"1/2","m":{"x":1,"y":1}},{"c":"1/2","m":{"y":2}}],[{"c":"1/2","m":{}}]]}"#,
        )
        .unwrap();
        let sub = sys.restrict(&[0], |_| q("1/2"));
        assert_eq!(sub.to_string(), "x = 1/4*x + 1/8\n");
    }
}
