use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational numbers used throughout theory reasoning.
pub type Rational = BigRational;

/// A real-valued theory variable, numbered in declaration order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RealVar(pub u32);

/// `sum(coeff * var) + constant` with no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LinExpr {
    coeffs: BTreeMap<RealVar, Rational>,
    constant: Rational,
}

impl LinExpr {
    pub fn zero() -> LinExpr {
        LinExpr::default()
    }

    pub fn constant(c: Rational) -> LinExpr {
        LinExpr { coeffs: BTreeMap::new(), constant: c }
    }

    pub fn var(v: RealVar) -> LinExpr {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(v, Rational::one());
        LinExpr { coeffs, constant: Rational::zero() }
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (RealVar, &Rational)> {
        self.coeffs.iter().map(|(v, c)| (*v, c))
    }

    pub fn coeff(&self, v: RealVar) -> Option<&Rational> {
        self.coeffs.get(&v)
    }

    pub fn constant_term(&self) -> &Rational {
        &self.constant
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, v: RealVar, c: &Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(v).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn add(&mut self, other: &LinExpr) {
        for (v, c) in &other.coeffs {
            self.add_term(*v, c);
        }
        self.constant += &other.constant;
    }

    pub fn sub(&mut self, other: &LinExpr) {
        let mut neg = other.clone();
        neg.scale(&-Rational::one());
        self.add(&neg);
    }

    pub fn scale(&mut self, k: &Rational) {
        if k.is_zero() {
            self.coeffs.clear();
            self.constant = Rational::zero();
            return;
        }
        for c in self.coeffs.values_mut() {
            *c *= k;
        }
        self.constant *= k;
    }

    pub fn eval(&self, value: impl Fn(RealVar) -> Rational) -> Rational {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * value(*v);
        }
        acc
    }
}

/// Relation of a canonical linear atom against zero.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Eq,
}

impl Rel {
    pub fn holds(self, lhs: &Rational) -> bool {
        match self {
            Rel::Le => !lhs.is_positive(),
            Rel::Lt => lhs.is_negative(),
            Rel::Eq => lhs.is_zero(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Eq => "=",
        }
    }
}

/// Canonical linear atom `sum(a_i * x_i) + k rel 0`.
///
/// Coefficients and constant are coprime integers and the first coefficient
/// (in declaration order) is positive. Two spellings of the same constraint
/// build the same value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LinearAtom {
    coeffs: Vec<(RealVar, BigInt)>,
    constant: BigInt,
    rel: Rel,
}

/// Result of normalizing a constraint: either a constant truth value or an
/// atom together with the polarity under which it expresses the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Canonical<A> {
    Const(bool),
    Lit(A, bool),
}

impl LinearAtom {
    /// Normalizes `expr rel 0`.
    pub fn canonicalize(expr: &LinExpr, rel: Rel) -> Canonical<LinearAtom> {
        if expr.is_constant() {
            return Canonical::Const(rel.holds(&expr.constant));
        }
        let mut lcm = BigInt::one();
        for c in expr.coeffs.values().chain(std::iter::once(&expr.constant)) {
            lcm = lcm.lcm(c.denom());
        }
        let to_int = |c: &Rational| -> BigInt { (c * Rational::from_integer(lcm.clone())).to_integer() };
        let mut coeffs: Vec<(RealVar, BigInt)> = expr.coeffs.iter().map(|(v, c)| (*v, to_int(c))).collect();
        let mut constant = to_int(&expr.constant);

        let mut g = constant.abs();
        for (_, c) in &coeffs {
            g = g.gcd(c);
        }
        if !g.is_one() {
            for (_, c) in coeffs.iter_mut() {
                *c /= &g;
            }
            constant /= &g;
        }

        let (rel, positive) = if coeffs[0].1.is_negative() {
            for (_, c) in coeffs.iter_mut() {
                *c = -&*c;
            }
            constant = -constant;
            // -e <= 0  <=>  !(e < 0),  -e < 0  <=>  !(e <= 0)
            match rel {
                Rel::Eq => (Rel::Eq, true),
                Rel::Le => (Rel::Lt, false),
                Rel::Lt => (Rel::Le, false),
            }
        } else {
            (rel, true)
        };
        Canonical::Lit(LinearAtom { coeffs, constant, rel }, positive)
    }

    pub fn coeffs(&self) -> &[(RealVar, BigInt)] {
        &self.coeffs
    }

    pub fn constant(&self) -> &BigInt {
        &self.constant
    }

    pub fn rel(&self) -> Rel {
        self.rel
    }

    /// The left-hand side as a rational expression.
    pub fn lhs(&self) -> LinExpr {
        let mut e = LinExpr::constant(Rational::from_integer(self.constant.clone()));
        for (v, c) in &self.coeffs {
            e.add_term(*v, &Rational::from_integer(c.clone()));
        }
        e
    }

    pub fn eval(&self, value: impl Fn(RealVar) -> Rational) -> bool {
        self.rel.holds(&self.lhs().eval(value))
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}
