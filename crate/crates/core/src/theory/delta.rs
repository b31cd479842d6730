use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::ir::Rational;

/// `real + delta * eps` for a positive infinitesimal `eps`. Strict bounds
/// `x < c` become `x <= c - eps`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct DeltaRational {
    pub real: Rational,
    pub delta: Rational,
}

impl DeltaRational {
    pub fn new(real: Rational, delta: Rational) -> DeltaRational {
        DeltaRational { real, delta }
    }

    pub fn exact(real: Rational) -> DeltaRational {
        DeltaRational { real, delta: Rational::zero() }
    }

    pub fn zero() -> DeltaRational {
        DeltaRational::default()
    }

    pub fn is_zero(&self) -> bool {
        self.real.is_zero() && self.delta.is_zero()
    }

    /// Value at a concrete `eps`.
    pub fn at(&self, eps: &Rational) -> Rational {
        &self.real + &self.delta * eps
    }
}

impl Ord for DeltaRational {
    fn cmp(&self, other: &Self) -> Ordering {
        self.real.cmp(&other.real).then_with(|| self.delta.cmp(&other.delta))
    }
}

impl PartialOrd for DeltaRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add for &DeltaRational {
    type Output = DeltaRational;
    fn add(self, o: &DeltaRational) -> DeltaRational {
        DeltaRational::new(&self.real + &o.real, &self.delta + &o.delta)
    }
}

impl Sub for &DeltaRational {
    type Output = DeltaRational;
    fn sub(self, o: &DeltaRational) -> DeltaRational {
        DeltaRational::new(&self.real - &o.real, &self.delta - &o.delta)
    }
}

impl Mul<&Rational> for &DeltaRational {
    type Output = DeltaRational;
    fn mul(self, k: &Rational) -> DeltaRational {
        DeltaRational::new(&self.real * k, &self.delta * k)
    }
}

impl Neg for &DeltaRational {
    type Output = DeltaRational;
    fn neg(self) -> DeltaRational {
        DeltaRational::new(-&self.real, -&self.delta)
    }
}

impl fmt::Display for DeltaRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.delta.is_zero() {
            write!(f, "{}", self.real)
        } else {
            let sign = if self.delta > Rational::zero() { "+" } else { "" };
            write!(f, "{}{}{}d", self.real, sign, self.delta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn ordering_is_lexicographic() {
        let a = DeltaRational::new(q(1), q(-1));
        let b = DeltaRational::exact(q(1));
        let c = DeltaRational::new(q(0), q(100));
        assert!(a < b);
        assert!(c < a);
        assert_eq!((&b - &a).delta, q(1));
    }
}
