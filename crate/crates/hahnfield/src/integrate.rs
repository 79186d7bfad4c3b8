//! Asymptotic integrals and integration by valuation-guided refinement.
//!
//! The monomial asymptotic integral is exact and drives the refinement
//! loop; the Rosenlicht quotient formula serves as a verified candidate
//! generator where no closed form applies.

use std::cmp::Ordering;

use num_traits::{One, Signed, Zero};

use crate::coeff::Coeff;
use crate::derivation::{cmp_valuation, DerivationSpec, NatFamily, ThetaTilde};
use crate::error::{Error, Result};
use crate::hahn::{Exponent, SpineIndex};
use crate::series::Series;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntegrationStatus {
    /// The residual reached zero.
    Complete,
    /// A residual valuation hit the least upper bound of the thetas; the
    /// remainder has no asymptotic integral in this field.
    ResidualAtBound,
    /// The iteration budget ran out first.
    IterationBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationResult {
    pub value: Series,
    pub residual: Series,
    /// True exactly when the residual is the zero series.
    pub exact: bool,
    pub iterations: u32,
    pub status: IntegrationStatus,
}

/// Unique monomial asymptotic integral
/// `(a_alpha / (gamma_0 c_psi)) t^(alpha - theta_psi)`.
///
/// Requires a derivation whose Hardy validation passes; errors when `v(a)`
/// equals the least upper bound of the thetas.
pub fn monomial_ai(a: &Series, spec: &DerivationSpec) -> Result<Series> {
    let (alpha, lead) = a.leading()?;
    let tt = spec.validate_hardy()?.theta_tilde;
    if tt.equals(alpha) {
        return Err(Error::NoAsymptoticIntegral(format!("{alpha:?}")));
    }
    let psi = find_psi(alpha, spec)?;
    let shifted = alpha.sub(&spec.theta(psi)?);
    let gamma0 = shifted.coeff_at(psi);
    if gamma0.is_zero() || shifted.v_gamma() != Some(psi) {
        return Err(Error::Internal(format!(
            "psi search produced a non-witness at index {psi}"
        )));
    }
    let c_psi = spec.lead_coeff(psi)?;
    let coeff = lead / (gamma0 * c_psi);
    Ok(Series::monomial(a.spine().clone(), shifted, coeff).with_exact(a.exact()))
}

/// The index psi with `alpha - theta_psi = gamma_0 1_psi + higher terms`.
pub fn find_psi(alpha: &Exponent, spec: &DerivationSpec) -> Result<SpineIndex> {
    match spec.family() {
        None => {
            let rank = spec
                .spine()
                .rank()
                .ok_or_else(|| Error::Internal("table over infinite spine".into()))?;
            let mut found = Vec::new();
            for i in 0..rank {
                let idx = SpineIndex(i);
                let diff = alpha.sub(&spec.theta(idx)?);
                if diff.v_gamma() == Some(idx) {
                    found.push(idx);
                }
            }
            match found.as_slice() {
                [one] => Ok(*one),
                [] => Err(Error::Internal("no psi witness found".into())),
                _ => Err(Error::Internal("psi witness not unique".into())),
            }
        }
        Some(NatFamily::ShiftTemplate { .. }) => {
            // theta_psi is supported above psi, so psi must be the leading
            // index of alpha itself.
            alpha
                .v_gamma()
                .ok_or_else(|| Error::Internal("zero exponent reached psi search".into()))
        }
        Some(NatFamily::LogPrefix { .. }) => {
            // alpha - theta_n has coefficient alpha_j - 1 below n, so psi is
            // the length of the maximal all-ones prefix of alpha.
            let mut p = 0usize;
            while alpha.coeff_at(SpineIndex(p)).is_one() {
                p += 1;
            }
            Ok(SpineIndex(p))
        }
    }
}

/// Rosenlicht's quotient `a * w / d(w)` with `w = a u / d(u)`, computed at
/// the given budget. Returns the candidate together with the outcome of the
/// asymptotic-integral contract check `v(d(b) - a) > v(a)`, which compares
/// exact leading terms.
pub fn rosenlicht_ai(
    a: &Series,
    u: &Series,
    spec: &DerivationSpec,
    max_terms: u32,
) -> Result<(Series, bool)> {
    if a.is_zero() {
        return Err(Error::ZeroSeries);
    }
    if u.is_zero() || u.valuation().map(|v| v.is_zero()).unwrap_or(true) {
        return Err(Error::DegenerateCandidate);
    }
    let du = spec.derive(u)?;
    if du.is_zero() {
        return Err(Error::DegenerateCandidate);
    }
    let w = a.mul(u)?.mul(&du.invert(max_terms)?)?;
    let dw = spec.derive(&w)?;
    if dw.is_zero() {
        return Err(Error::DegenerateCandidate);
    }
    let b = a.mul(&w)?.mul(&dw.invert(max_terms)?)?;
    let ok = contract_holds(a, &b, spec)?;
    Ok((b, ok))
}

/// `v(d(b) - a) > v(a)`.
pub fn contract_holds(a: &Series, b: &Series, spec: &DerivationSpec) -> Result<bool> {
    let r = spec.derive(b)?.sub(a)?;
    Ok(cmp_valuation(r.valuation(), a.valuation()) == Ordering::Greater)
}

/// Try the Rosenlicht formula over a deterministic ladder of test elements:
/// the leading monomial of `a`, then the spine monomials in descending
/// absolute valuation. The first candidate passing the contract wins.
pub fn rosenlicht_ai_auto(a: &Series, spec: &DerivationSpec, max_terms: u32) -> Result<Series> {
    let (alpha, lead) = a.leading()?;
    let mut candidates: Vec<Series> = Vec::new();
    if !alpha.is_zero() {
        candidates.push(Series::monomial(a.spine().clone(), alpha.clone(), lead.clone()));
    }
    let index_bound = match spec.spine().rank() {
        Some(rank) => rank,
        None => {
            let in_terms = a
                .terms()
                .iter()
                .filter_map(|(e, _)| e.max_index())
                .map(|i| i.0)
                .max()
                .unwrap_or(0);
            let psi = find_psi(alpha, spec).map(|p| p.0).unwrap_or(0);
            in_terms.max(psi) + 2
        }
    };
    for i in 0..index_bound {
        candidates.push(Series::monomial(
            a.spine().clone(),
            Exponent::single(SpineIndex(i), Coeff::one()),
            Coeff::one(),
        ));
    }
    for u in &candidates {
        match rosenlicht_ai(a, u, spec, max_terms) {
            Ok((b, true)) => return Ok(b),
            Ok((_, false)) | Err(Error::DegenerateCandidate) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoAsymptoticIntegral(
        "no candidate passed the contract".into(),
    ))
}

/// Valuation-guided refinement: repeatedly add the monomial asymptotic
/// integral of the residual. Residual valuations strictly increase, so the
/// loop either empties the residual, hits the theta bound, or runs out of
/// iterations.
pub fn integrate(
    a: &Series,
    spec: &DerivationSpec,
    _max_terms: u32,
    max_iters: u32,
) -> Result<IntegrationResult> {
    let tt = spec.validate_hardy()?.theta_tilde;
    let mut value = Series::zero(a.spine().clone());
    let mut residual = a.clone();
    let mut iterations = 0u32;
    let status = loop {
        if residual.is_zero() {
            break IntegrationStatus::Complete;
        }
        if let ThetaTilde::InGamma(t) = &tt {
            if residual.valuation() == Some(t) {
                break IntegrationStatus::ResidualAtBound;
            }
        }
        if iterations >= max_iters {
            break IntegrationStatus::IterationBudget;
        }
        let step = monomial_ai(&residual, spec)?;
        let step_residual = residual.sub(&spec.derive(&step)?)?;
        if cmp_valuation(step_residual.valuation(), residual.valuation()) != Ordering::Greater {
            return Err(Error::Internal(
                "residual valuation did not increase".into(),
            ));
        }
        value = value.add(&step)?;
        residual = step_residual;
        iterations += 1;
    };
    let exact = residual.is_zero() && a.exact();
    Ok(IntegrationResult {
        value,
        residual,
        exact,
        iterations,
        status,
    })
}
