//! Exact rational coefficients and the partial log/exp hooks of the
//! coefficient field.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficient type: arbitrary-precision rational.
pub type Coeff = BigRational;

pub fn q(num: i64, den: i64) -> Coeff {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn qi(n: i64) -> Coeff {
    BigRational::from_integer(BigInt::from(n))
}

/// How the coefficient field supplies log, exp and a numeric embedding.
///
/// `Rational` keeps the value domain closed: log is defined only at 1 and
/// exp only at 0. `Float` routes through f64 and taints exactness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoeffHooks {
    #[default]
    Rational,
    Float,
}

impl CoeffHooks {
    /// Partial logarithm on coefficients. `log_k(1) = 0` always holds.
    /// Returns the value together with an exactness flag.
    pub fn log_k(&self, c: &Coeff) -> Result<(Coeff, bool)> {
        if c.is_one() {
            return Ok((Coeff::zero(), true));
        }
        match self {
            CoeffHooks::Rational => Err(Error::HookUndefined(format!("log_k({c})"))),
            CoeffHooks::Float => {
                if !c.is_positive() {
                    return Err(Error::HookUndefined(format!("log_k({c})")));
                }
                let x = self.numeric(c);
                Ok((rational_from_f64(x.ln())?, false))
            }
        }
    }

    /// Partial exponential on coefficients. `exp_k(0) = 1` always holds.
    pub fn exp_k(&self, c: &Coeff) -> Result<(Coeff, bool)> {
        if c.is_zero() {
            return Ok((Coeff::one(), true));
        }
        match self {
            CoeffHooks::Rational => Err(Error::HookUndefined(format!("exp_k({c})"))),
            CoeffHooks::Float => {
                let x = self.numeric(c);
                Ok((rational_from_f64(x.exp())?, false))
            }
        }
    }

    /// Numeric embedding used by the germ bridge.
    pub fn numeric(&self, c: &Coeff) -> f64 {
        c.to_f64().unwrap_or(f64::NAN)
    }
}

fn rational_from_f64(x: f64) -> Result<Coeff> {
    BigRational::from_float(x).ok_or_else(|| Error::HookUndefined(format!("non-finite {x}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_hooks_are_partial() {
        let h = CoeffHooks::Rational;
        assert_eq!(h.log_k(&qi(1)).unwrap(), (qi(0), true));
        assert_eq!(h.exp_k(&qi(0)).unwrap(), (qi(1), true));
        assert!(h.log_k(&qi(2)).is_err());
        assert!(h.exp_k(&qi(1)).is_err());
    }

    #[test]
    fn float_hooks_round_trip_loosely() {
        let h = CoeffHooks::Float;
        let (l, exact) = h.log_k(&qi(2)).unwrap();
        assert!(!exact);
        assert!((h.numeric(&l) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(h.log_k(&qi(-3)).is_err());
    }
}
