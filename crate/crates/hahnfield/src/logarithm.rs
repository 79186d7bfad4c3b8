//! Logarithms: the 1-unit series, the series-morphism pre-logarithm on
//! monomials, the full logarithm on positive series, and validation of the
//! pre-logarithm existence conditions.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::coeff::{Coeff, CoeffHooks};
use crate::derivation::{DerivationSpec, NatFamily, ThetaTilde};
use crate::error::{Error, Result};
use crate::hahn::{Exponent, Spine, SpineIndex};
use crate::integrate::{integrate, monomial_ai};
use crate::series::Series;

#[derive(Debug, Clone, PartialEq)]
enum PrelogData {
    /// Per-class values on a finite spine; None marks a missing entry
    /// (partial pre-logarithms are allowed and reported).
    Table(Vec<Option<Series>>),
    /// `log(t_n) = -t_{n+1}^-1` on the natural spine: the right-shift
    /// pre-logarithm.
    SigmaShift,
}

/// The monomial pre-logarithm data: `phi -> log(t_phi)`, a series with
/// strictly negative support.
#[derive(Debug, Clone, PartialEq)]
pub struct PreLogSpec {
    spine: Arc<Spine>,
    data: PrelogData,
}

impl PreLogSpec {
    pub fn table(spine: Arc<Spine>, entries: Vec<Option<Series>>) -> Result<PreLogSpec> {
        let rank = spine
            .rank()
            .ok_or_else(|| Error::Config("pre-log tables require a finite spine".into()))?;
        if entries.len() != rank {
            return Err(Error::Config(format!(
                "pre-log table has {} entries for rank {rank}",
                entries.len()
            )));
        }
        for (i, e) in entries.iter().enumerate() {
            if let Some(s) = e {
                if s.is_zero() || !s.terms().iter().all(|(e, _)| e.is_negative()) {
                    return Err(Error::Config(format!(
                        "log(t_{}) must have strictly negative support",
                        spine.label(SpineIndex(i))
                    )));
                }
            }
        }
        Ok(PreLogSpec {
            spine,
            data: PrelogData::Table(entries),
        })
    }

    pub fn sigma_shift(spine: Arc<Spine>) -> Result<PreLogSpec> {
        if spine.rank().is_some() {
            return Err(Error::Config(
                "the shift pre-logarithm requires the natural spine".into(),
            ));
        }
        Ok(PreLogSpec {
            spine,
            data: PrelogData::SigmaShift,
        })
    }

    /// Build the pre-logarithm by integrating each logarithmic derivative.
    /// On the natural spine this is available for the log-prefix family,
    /// where the integrals telescope to the shift form exactly.
    pub fn from_derivation(dspec: &DerivationSpec, max_iters: u32) -> Result<PreLogSpec> {
        match dspec.family() {
            None => {
                let rank = dspec.spine().rank().expect("finite table");
                let mut entries = Vec::with_capacity(rank);
                for i in 0..rank {
                    let ld = dspec.logderiv(SpineIndex(i))?;
                    let r = integrate(&ld, dspec, 32, max_iters)?;
                    if r.exact && !r.value.is_zero()
                        && r.value.terms().iter().all(|(e, _)| e.is_negative())
                    {
                        entries.push(Some(r.value));
                    } else {
                        entries.push(None);
                    }
                }
                PreLogSpec::table(dspec.spine().clone(), entries)
            }
            Some(NatFamily::LogPrefix { .. }) => PreLogSpec::sigma_shift(dspec.spine().clone()),
            Some(NatFamily::ShiftTemplate { .. }) => Err(Error::Config(
                "no exact pre-logarithm from a shift-template derivation".into(),
            )),
        }
    }

    pub fn spine(&self) -> &Arc<Spine> {
        &self.spine
    }

    pub fn has(&self, idx: SpineIndex) -> bool {
        match &self.data {
            PrelogData::Table(entries) => entries.get(idx.0).map(|e| e.is_some()).unwrap_or(false),
            PrelogData::SigmaShift => true,
        }
    }

    pub fn is_total(&self) -> bool {
        match &self.data {
            PrelogData::Table(entries) => entries.iter().all(|e| e.is_some()),
            PrelogData::SigmaShift => true,
        }
    }

    /// `log(t_phi)`.
    pub fn logmono(&self, idx: SpineIndex) -> Result<Series> {
        match &self.data {
            PrelogData::Table(entries) => entries
                .get(idx.0)
                .ok_or(Error::InvalidIndex(idx.0))?
                .clone()
                .ok_or_else(|| Error::MissingPrelog(self.spine.label(idx))),
            PrelogData::SigmaShift => {
                let up = self.spine.shift(idx).expect("natural spine shifts");
                Ok(Series::monomial(
                    self.spine.clone(),
                    Exponent::single(up, -Coeff::one()),
                    -Coeff::one(),
                ))
            }
        }
    }

    /// Morphism rule on monomials: `log(t^alpha) = sum alpha_phi log(t_phi)`.
    pub fn prelog_monomial(&self, alpha: &Exponent) -> Result<Series> {
        let mut out = Series::zero(self.spine.clone());
        for (idx, c) in alpha.iter() {
            out = out.add(&self.logmono(idx)?.scale(c))?;
        }
        Ok(out)
    }

    /// Recognize `s = sum alpha_phi log(t_phi)` and recover the exponent.
    /// Best effort: values the hook cannot decide stay unrecognized.
    pub fn recognize(&self, s: &Series) -> Option<Exponent> {
        match &self.data {
            PrelogData::SigmaShift => {
                let mut pairs = Vec::new();
                for (e, c) in s.terms() {
                    if e.support_len() != 1 {
                        return None;
                    }
                    let (idx, val) = e.iter().next()?;
                    if idx.0 == 0 || val != &-Coeff::one() {
                        return None;
                    }
                    pairs.push((idx.0 - 1, -c.clone()));
                }
                Some(Exponent::from_pairs(pairs))
            }
            PrelogData::Table(entries) => {
                let mut remaining = s.clone();
                let mut alpha = Exponent::zero();
                for _ in 0..64 {
                    if remaining.is_zero() {
                        return Some(alpha);
                    }
                    let (lead_e, lead_c) = remaining.leading().ok()?;
                    let (lead_e, lead_c) = (lead_e.clone(), lead_c.clone());
                    let hit = entries.iter().enumerate().find_map(|(i, entry)| {
                        entry.as_ref().and_then(|mono| {
                            (mono.valuation() == Some(&lead_e)).then_some((i, mono))
                        })
                    });
                    let (i, mono) = hit?;
                    let x = &lead_c / mono.leading().ok()?.1;
                    alpha = alpha.add(&Exponent::single(SpineIndex(i), x.clone()));
                    remaining = remaining.sub(&mono.scale(&x)).ok()?;
                    if let Some(v) = remaining.valuation() {
                        if v <= &lead_e {
                            return None;
                        }
                    }
                }
                None
            }
        }
    }
}

/// Logarithm of a 1-unit: `log(1 + eps) = sum (-1)^(n-1) eps^n / n`,
/// truncated at `max_terms` powers. Exact only for `eps = 0`.
pub fn log1p_unit(eps: &Series, max_terms: u32) -> Result<Series> {
    if !eps.is_zero() && !eps.valuation().map(|v| v.is_positive()).unwrap_or(false) {
        return Err(Error::NotInfinitesimal);
    }
    if eps.is_zero() {
        return Ok(Series::zero(eps.spine().clone()).with_exact(eps.exact()));
    }
    let mut sum = Series::zero(eps.spine().clone());
    let mut power = Series::one(eps.spine().clone());
    for n in 1..=max_terms as i64 {
        power = power.mul(eps)?;
        let sign = if n % 2 == 1 { Coeff::one() } else { -Coeff::one() };
        sum = sum.add(&power.scale(&(sign / Coeff::from_integer(n.into()))))?;
    }
    Ok(sum.with_exact(eps.exact()).into_inexact())
}

/// Full logarithm of a positive series `a = c t^alpha (1 + eps)`:
/// `prelog(alpha) + log_k(c) + log1p(eps)`.
pub fn log_series(
    a: &Series,
    pspec: &PreLogSpec,
    hooks: CoeffHooks,
    max_terms: u32,
) -> Result<Series> {
    if !a.is_positive() {
        return Err(Error::NotPositive);
    }
    let (alpha, c) = a.leading()?;
    let (alpha, c) = (alpha.clone(), c.clone());
    let mono_part = pspec.prelog_monomial(&alpha)?;
    let (logc, coeff_exact) = hooks.log_k(&c)?;
    let const_part = Series::constant(a.spine().clone(), logc);
    let eps = a
        .mul_monomial(&alpha.neg(), &c.recip())
        .sub(&Series::one(a.spine().clone()))?;
    let unit_part = log1p_unit(&eps, max_terms)?;
    Ok(mono_part
        .add(&const_part)?
        .add(&unit_part)?
        .with_exact(a.exact() && coeff_exact))
}

/// Report of the series-morphism pre-logarithm conditions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrelogReport {
    /// theta-tilde does not appear in any log-derivative support.
    pub cond1_ok: bool,
    pub cond1_witness: Option<String>,
    /// Every support exponent has a monomial asymptotic integral of
    /// negative valuation.
    pub cond2_ok: bool,
    pub cond2_witness: Option<String>,
    /// d(log t_phi) = d(t_phi)/t_phi exactly, entrywise.
    pub compat_ok: bool,
    pub compat_witness: Option<String>,
    /// Growth axiom on the generators: negative valuation whose class sits
    /// strictly above phi.
    pub ga_ok: bool,
    pub ga_witness: Option<String>,
    /// No missing entries.
    pub total: bool,
}

impl PrelogReport {
    pub fn accepted(&self) -> bool {
        self.cond1_ok && self.cond2_ok && self.compat_ok && self.ga_ok && self.total
    }
}

impl fmt::Display for PrelogReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn line(
            f: &mut fmt::Formatter<'_>,
            name: &str,
            ok: bool,
            witness: &Option<String>,
        ) -> fmt::Result {
            write!(f, "{name} {}", if ok { "ok" } else { "FAIL" })?;
            if let Some(w) = witness {
                write!(f, ": {w}")?;
            }
            writeln!(f)
        }
        line(f, "condition 1 (theta-tilde outside supports)", self.cond1_ok, &self.cond1_witness)?;
        line(f, "condition 2 (supports integrate negatively)", self.cond2_ok, &self.cond2_witness)?;
        line(f, "derivation compatibility", self.compat_ok, &self.compat_witness)?;
        line(f, "growth axiom", self.ga_ok, &self.ga_witness)?;
        write!(f, "total {}", if self.total { "yes" } else { "no (partial table)" })
    }
}

/// Indices checked per generated family; the generated shapes repeat with
/// the shift, so a prefix is representative.
const SAMPLE_INDICES: usize = 16;

/// Validate the two existence conditions of the series-morphism
/// pre-logarithm plus derivation compatibility and the growth axiom.
pub fn validate_prelog(dspec: &DerivationSpec, pspec: &PreLogSpec) -> Result<PrelogReport> {
    let hardy = dspec.validate_hardy()?;
    let spine = dspec.spine();
    let indices: Vec<SpineIndex> = match spine.rank() {
        Some(r) => (0..r).map(SpineIndex).collect(),
        None => (0..SAMPLE_INDICES).map(SpineIndex).collect(),
    };

    // Condition 1.
    let (mut cond1_ok, mut cond1_witness) = (true, None);
    if let ThetaTilde::InGamma(tt) = &hardy.theta_tilde {
        for &idx in &indices {
            let ld = dspec.logderiv(idx)?;
            if ld.terms().iter().any(|(e, _)| e == tt) {
                cond1_ok = false;
                cond1_witness = Some(format!(
                    "theta-tilde lies in supp d({0})/{0}",
                    spine.label(idx)
                ));
                break;
            }
        }
    }

    // Condition 2.
    let (mut cond2_ok, mut cond2_witness) = (true, None);
    'outer: for &idx in &indices {
        let ld = dspec.logderiv(idx)?;
        for (tau, _) in ld.terms() {
            let probe = Series::monomial(spine.clone(), tau.clone(), Coeff::one());
            match monomial_ai(&probe, dspec) {
                Ok(ai) => {
                    if !ai.valuation().map(|v| v.is_negative()).unwrap_or(false) {
                        cond2_ok = false;
                        cond2_witness = Some(format!(
                            "a.i. of a support exponent of d({0})/{0} is not large",
                            spine.label(idx)
                        ));
                        break 'outer;
                    }
                }
                Err(_) => {
                    cond2_ok = false;
                    cond2_witness = Some(format!(
                        "a support exponent of d({0})/{0} has no asymptotic integral",
                        spine.label(idx)
                    ));
                    break 'outer;
                }
            }
        }
    }

    // Compatibility and growth axiom over present entries.
    let (mut compat_ok, mut compat_witness) = (true, None);
    let (mut ga_ok, mut ga_witness) = (true, None);
    for &idx in &indices {
        if !pspec.has(idx) {
            continue;
        }
        let mono = pspec.logmono(idx)?;
        let want = dspec.logderiv(idx)?;
        let got = dspec.derive(&mono)?;
        if got != want || !mono.exact() {
            compat_ok = false;
            compat_witness = Some(format!(
                "d(log {0}) differs from d({0})/{0}",
                spine.label(idx)
            ));
        }
        let ga_here = mono
            .valuation()
            .map(|v| v.is_negative() && v.v_gamma() > Some(idx))
            .unwrap_or(false);
        if !ga_here {
            ga_ok = false;
            ga_witness = Some(format!(
                "v(log {0}) not large with class above {0}",
                spine.label(idx)
            ));
        }
    }

    Ok(PrelogReport {
        cond1_ok,
        cond1_witness,
        cond2_ok,
        cond2_witness,
        compat_ok,
        compat_witness,
        ga_ok,
        ga_witness,
        total: pspec.is_total(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, qi};
    use crate::field::FieldConfig;

    fn leh3() -> FieldConfig {
        FieldConfig::builtin("leh3").unwrap()
    }

    fn logs() -> FieldConfig {
        FieldConfig::builtin("logs").unwrap()
    }

    #[test]
    fn log1p_displayed_series() {
        let f = leh3();
        let t2 = f.parse_series("t2").unwrap();
        let got = log1p_unit(&t2, 3).unwrap();
        assert_eq!(got, f.parse_series("t2 - 1/2*t2^2 + 1/3*t2^3").unwrap().into_inexact());
        assert!(!got.exact());

        let zero = Series::zero(f.spine().clone());
        let log1 = log1p_unit(&zero, 5).unwrap();
        assert!(log1.is_zero() && log1.exact());

        let eps = f.parse_series("t1*t2^-1").unwrap();
        let got = log1p_unit(&eps, 2).unwrap();
        assert_eq!(
            got,
            f.parse_series("t1*t2^-1 - 1/2*t1^2*t2^-2").unwrap().into_inexact()
        );

        assert_eq!(
            log1p_unit(&f.parse_series("1 + t2").unwrap(), 3),
            Err(Error::NotInfinitesimal)
        );
    }

    #[test]
    fn prelog_monomials_logs() {
        let f = logs();
        let p = f.prelog().unwrap();
        // log(x) for the monomial x = t0^-1
        let alpha = Exponent::single(SpineIndex(0), qi(-1));
        assert_eq!(p.prelog_monomial(&alpha).unwrap(), f.parse_series("t1^-1").unwrap());
        assert!(p.prelog_monomial(&Exponent::zero()).unwrap().is_zero());
        // log(x * log x)
        let alpha = Exponent::from_pairs([(0, qi(-1)), (1, qi(-1))]);
        assert_eq!(
            p.prelog_monomial(&alpha).unwrap(),
            f.parse_series("t1^-1 + t2^-1").unwrap()
        );
    }

    #[test]
    fn prelog_partial_on_leh3() {
        let f = leh3();
        let p = f.prelog().unwrap();
        assert!(p.has(SpineIndex(0)) && p.has(SpineIndex(1)) && !p.has(SpineIndex(2)));
        // log(t1) = -x = -t2^-1
        assert_eq!(
            p.logmono(SpineIndex(0)).unwrap(),
            f.parse_series("-t2^-1").unwrap()
        );
        let alpha = Exponent::single(SpineIndex(2), qi(1));
        assert!(matches!(
            p.prelog_monomial(&alpha),
            Err(Error::MissingPrelog(_))
        ));
    }

    #[test]
    fn log_series_composition() {
        let f = logs();
        let p = f.prelog().unwrap();
        // a = x (1 + t0): log = t1^-1 + t0 - t0^2/2 + ...
        let a = f.parse_series("t0^-1 + 1").unwrap();
        let got = log_series(&a, p, CoeffHooks::Rational, 3).unwrap();
        let want = f
            .parse_series("t1^-1 + t0 - 1/2*t0^2 + 1/3*t0^3")
            .unwrap()
            .into_inexact();
        assert_eq!(got, want);

        let one = f.parse_series("1").unwrap();
        assert!(log_series(&one, p, CoeffHooks::Rational, 8).unwrap().is_zero());

        let two_x = f.parse_series("2*t0^-1").unwrap();
        assert!(matches!(
            log_series(&two_x, p, CoeffHooks::Rational, 8),
            Err(Error::HookUndefined(_))
        ));
        assert_eq!(
            log_series(&f.parse_series("-t0").unwrap(), p, CoeffHooks::Rational, 8),
            Err(Error::NotPositive)
        );
    }

    #[test]
    fn validate_rejects_leh3_accepts_logs() {
        let leh3 = leh3();
        let report = validate_prelog(leh3.derivation(), leh3.prelog().unwrap()).unwrap();
        assert!(!report.cond1_ok);
        assert!(!report.accepted());

        let logs = logs();
        let report = validate_prelog(logs.derivation(), logs.prelog().unwrap()).unwrap();
        assert!(report.cond1_ok && report.cond2_ok && report.compat_ok && report.ga_ok);
        assert!(report.accepted());
        // logmono(n) = -t_{n+1}^-1
        for n in 0..6 {
            let got = logs.prelog().unwrap().logmono(SpineIndex(n)).unwrap();
            let want = Series::monomial(
                logs.spine().clone(),
                Exponent::single(SpineIndex(n + 1), qi(-1)),
                qi(-1),
            );
            assert_eq!(got, want);
        }
    }

    #[test]
    fn ga_check_rejects_positive_valuation() {
        let f = leh3();
        // a "pre-log" whose value is small rather than large
        let bad = PreLogSpec::table(
            f.spine().clone(),
            vec![Some(f.parse_series("t2").unwrap()), None, None],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn from_derivation_matches_builtin_on_logs() {
        let f = logs();
        let derived = PreLogSpec::from_derivation(f.derivation(), 16).unwrap();
        for n in 0..5 {
            assert_eq!(
                derived.logmono(SpineIndex(n)).unwrap(),
                f.prelog().unwrap().logmono(SpineIndex(n)).unwrap()
            );
        }
    }

    #[test]
    fn recognize_inverts_prelog() {
        let f = logs();
        let p = f.prelog().unwrap();
        let alpha = Exponent::from_pairs([(0, q(-3, 2)), (2, qi(1))]);
        let s = p.prelog_monomial(&alpha).unwrap();
        assert_eq!(p.recognize(&s), Some(alpha));
        // not in the image: support at t0^-1 with the wrong shape
        let not_image = f.parse_series("t0^-1").unwrap();
        assert_eq!(p.recognize(&not_image), None);

        let leh3 = leh3();
        let p3 = leh3.prelog().unwrap();
        let alpha = Exponent::from_pairs([(0, qi(2)), (1, q(1, 2))]);
        let s = p3.prelog_monomial(&alpha).unwrap();
        assert_eq!(p3.recognize(&s), Some(alpha));
    }
}
