//! Numeric interpretation of series as germs at +infinity, used to
//! cross-check the symbolic calculus against finite differences.

use num_traits::ToPrimitive;

use crate::coeff::CoeffHooks;
use crate::derivation::DerivationSpec;
use crate::el::{ElExponent, ElSeries};
use crate::error::{Error, Result};
use crate::hahn::SpineIndex;
use crate::series::Series;

/// Germ attached to one spine class: the monomial `t_phi` evaluates to the
/// reciprocal of the named growth scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GermKind {
    /// `t = 1 / exp_k(x)`
    ExpIterate(u32),
    /// `t = 1 / x`
    Power,
    /// `t = 1 / log_k(x)`
    LogIterate(u32),
}

impl GermKind {
    /// Growth-rate key: spine order must be descending in growth.
    fn order_key(&self) -> (u8, i64) {
        match self {
            GermKind::ExpIterate(k) => (0, -(*k as i64)),
            GermKind::Power => (1, 0),
            GermKind::LogIterate(k) => (2, *k as i64),
        }
    }

    /// Value of the germ at x, with domain checks.
    pub fn value(&self, x: f64) -> Result<f64> {
        let scale = match self {
            GermKind::ExpIterate(k) => {
                let mut v = x;
                for _ in 0..*k {
                    v = v.exp();
                }
                v
            }
            GermKind::Power => x,
            GermKind::LogIterate(k) => {
                let mut v = x;
                for _ in 0..*k {
                    v = v.ln();
                }
                v
            }
        };
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::GermDomain(format!(
                "{self:?} undefined or non-positive at x = {x}"
            )));
        }
        Ok(1.0 / scale)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GermMap {
    /// Per-class germs on a finite spine.
    Table(Vec<GermKind>),
    /// `t_n = 1 / log_n(x)` on the natural spine, with `log_0(x) = x`.
    LogIterates,
}

impl GermMap {
    pub fn kind(&self, idx: SpineIndex) -> Result<GermKind> {
        match self {
            GermMap::Table(kinds) => kinds
                .get(idx.0)
                .copied()
                .ok_or(Error::InvalidIndex(idx.0)),
            GermMap::LogIterates => Ok(if idx.0 == 0 {
                GermKind::Power
            } else {
                GermKind::LogIterate(idx.0 as u32)
            }),
        }
    }

    /// Germ kinds must be ordered consistently with the spine: faster
    /// growing reciprocals at smaller indices.
    pub fn check_ordering(&self) -> Result<()> {
        if let GermMap::Table(kinds) = self {
            for w in kinds.windows(2) {
                if w[0].order_key() >= w[1].order_key() {
                    return Err(Error::Config(
                        "germ kinds out of order with the spine".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Evaluate a base series: `sum coeff * prod germ(phi)^alpha_phi`.
pub fn eval_series(a: &Series, map: &GermMap, hooks: CoeffHooks, x: f64) -> Result<f64> {
    let mut total = 0.0;
    for (alpha, c) in a.terms() {
        let mut factor = hooks.numeric(c);
        for (idx, q) in alpha.iter() {
            let g = map.kind(idx)?.value(x)?;
            let p = q.to_f64().ok_or_else(|| {
                Error::GermDomain("exponent does not fit in a double".into())
            })?;
            factor *= g.powf(p);
        }
        total += factor;
    }
    if !total.is_finite() {
        return Err(Error::GermDomain(format!("overflow at x = {x}")));
    }
    Ok(total)
}

/// Evaluate a tower series, levels innermost first: a tower monomial
/// `t^payload` evaluates to `exp(payload(x))`.
pub fn eval_el(a: &ElSeries, map: &GermMap, hooks: CoeffHooks, x: f64) -> Result<f64> {
    let mut total = 0.0;
    for (e, c) in a.terms() {
        let factor = match e {
            ElExponent::Base(alpha) => {
                let mut f = 1.0;
                for (idx, q) in alpha.iter() {
                    let g = map.kind(idx)?.value(x)?;
                    let p = q.to_f64().ok_or_else(|| {
                        Error::GermDomain("exponent does not fit in a double".into())
                    })?;
                    f *= g.powf(p);
                }
                f
            }
            ElExponent::Tower { payload, .. } => eval_el(payload, map, hooks, x)?.exp(),
        };
        total += hooks.numeric(c) * factor;
    }
    if !total.is_finite() {
        return Err(Error::GermDomain(format!("overflow at x = {x}")));
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeCheck {
    pub symbolic: f64,
    pub numeric: f64,
    pub rel_err: f64,
}

/// Compare the symbolic derivative against a central difference of the
/// germ evaluation.
pub fn numeric_derivative_check(
    a: &Series,
    dspec: &DerivationSpec,
    map: &GermMap,
    hooks: CoeffHooks,
    x: f64,
    h: f64,
) -> Result<DerivativeCheck> {
    let symbolic = eval_series(&dspec.derive(a)?, map, hooks, x)?;
    let hi = eval_series(a, map, hooks, x + h)?;
    let lo = eval_series(a, map, hooks, x - h)?;
    let numeric = (hi - lo) / (2.0 * h);
    let denom = symbolic.abs().max(numeric.abs());
    let rel_err = if denom == 0.0 {
        0.0
    } else {
        (symbolic - numeric).abs() / denom
    };
    Ok(DerivativeCheck {
        symbolic,
        numeric,
        rel_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::el::ElContext;
    use crate::field::FieldConfig;

    fn leh3() -> FieldConfig {
        FieldConfig::builtin("leh3").unwrap()
    }

    #[test]
    fn eval_simple_values() {
        let f = leh3();
        let map = f.germs().unwrap();
        let a = f.parse_series("t1 + t2").unwrap();
        let got = eval_series(&a, map, f.hooks(), 10.0).unwrap();
        let want = (-10.0f64).exp() + 0.1;
        assert!((got - want).abs() < 1e-15, "{got} vs {want}");

        let one = f.parse_series("1").unwrap();
        assert_eq!(eval_series(&one, map, f.hooks(), 123.0).unwrap(), 1.0);
    }

    #[test]
    fn truncated_expansion_tracks_closed_form() {
        let f = leh3();
        let map = f.germs().unwrap();
        // sum_{n=0..3} t1^(n+1) t2^-n against 1/(e^5 - 5)
        let mut text = String::from("t1");
        for n in 1..4 {
            text.push_str(&format!(" + t1^{}*t2^-{}", n + 1, n));
        }
        let a = f.parse_series(&text).unwrap();
        let x = 5.0;
        let got = eval_series(&a, map, f.hooks(), x).unwrap();
        let want = 1.0 / (x.exp() - x);
        // truncation tail is of order t1^5 t2^-4 = e^-25 * 5^4
        let tail = (-25.0f64).exp() * 5.0f64.powi(4);
        assert!((got - want).abs() <= 2.0 * tail, "{got} vs {want}");
    }

    #[test]
    fn derivative_check_examples() {
        let f = leh3();
        let map = f.germs().unwrap();
        let x = 10.0;
        let h = x * 1e-6;
        let a = f.parse_series("t1").unwrap();
        let r = numeric_derivative_check(&a, f.derivation(), map, f.hooks(), x, h).unwrap();
        assert!(r.rel_err <= 1e-6, "rel_err = {}", r.rel_err);

        let c = f.parse_series("42").unwrap();
        let r = numeric_derivative_check(&c, f.derivation(), map, f.hooks(), x, h).unwrap();
        assert_eq!(r.symbolic, 0.0);
        assert!(r.numeric.abs() < 1e-9);
    }

    #[test]
    fn domain_violations_error() {
        let f = leh3();
        let map = f.germs().unwrap();
        let t3 = f.parse_series("t3").unwrap();
        // log(x) <= 0 at x = 1
        assert!(matches!(
            eval_series(&t3, map, f.hooks(), 1.0),
            Err(Error::GermDomain(_))
        ));
    }

    #[test]
    fn tower_monomial_is_exponential() {
        let logs = FieldConfig::builtin("logs").unwrap();
        let ctx = ElContext::new(&logs);
        let x_series = logs.parse_el("t0^-1", 32, 3).unwrap();
        let ex = crate::el::exp_el(&x_series, &ctx).unwrap();
        let map = logs.germs().unwrap();
        let got = eval_el(&ex, map, logs.hooks(), 3.0).unwrap();
        assert!((got - 3.0f64.exp()).abs() < 1e-12);
    }
}
