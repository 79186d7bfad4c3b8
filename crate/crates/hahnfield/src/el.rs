//! The exponential-logarithmic closure: leveled exponents, total log and
//! exp maps, the uniquely extended derivation, and integration in the
//! tower.
//!
//! A level-(n+1) exponent is a purely infinite level-n series; the
//! identification `t^(log t^alpha) = t^alpha` makes the pre-logarithm the
//! embedding between levels. Values are kept in canonical form: every
//! exponent is demoted to the lowest level at which the inverse pre-log
//! hook can express it.

use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::field::FieldConfig;
use crate::hahn::Exponent;
use crate::integrate::{integrate, IntegrationStatus};
use crate::logarithm::PreLogSpec;
use crate::series::Series;

/// Budgets threaded through every tower operation.
#[derive(Debug, Clone, Copy)]
pub struct ElContext<'a> {
    pub field: &'a FieldConfig,
    pub max_terms: u32,
    pub depth: u32,
    pub max_iters: u32,
}

impl<'a> ElContext<'a> {
    pub fn new(field: &'a FieldConfig) -> ElContext<'a> {
        ElContext {
            field,
            max_terms: 32,
            depth: 3,
            max_iters: 64,
        }
    }

    fn pspec(&self) -> Result<&'a PreLogSpec> {
        self.field
            .prelog()
            .ok_or_else(|| Error::MissingPrelog("no pre-logarithm configured".into()))
    }
}

/// Exponent of a tower monomial. `Base` lives in the Hahn group; a tower
/// exponent of level n+1 carries a purely infinite level-n series.
#[derive(Debug, Clone, PartialEq)]
pub enum ElExponent {
    Base(Exponent),
    Tower { level: u32, payload: Box<ElSeries> },
}

impl ElExponent {
    pub fn zero() -> ElExponent {
        ElExponent::Base(Exponent::zero())
    }

    pub fn level(&self) -> u32 {
        match self {
            ElExponent::Base(_) => 0,
            ElExponent::Tower { level, .. } => *level,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ElExponent::Base(e) if e.is_zero())
    }

    pub fn neg(&self) -> ElExponent {
        match self {
            ElExponent::Base(e) => ElExponent::Base(e.neg()),
            ElExponent::Tower { level, payload } => ElExponent::Tower {
                level: *level,
                payload: Box::new(payload.neg()),
            },
        }
    }

    /// View this exponent as a series at representation level `level - 1`,
    /// the payload of its level-`level` tower form.
    fn payload_at(&self, level: u32, ctx: &ElContext) -> Result<ElSeries> {
        assert!(level >= 1 && level >= self.level());
        match self {
            ElExponent::Base(e) => {
                let base = ElSeries::from_series(ctx.pspec()?.prelog_monomial(e)?);
                lift(&base, level - 1, ctx)
            }
            ElExponent::Tower { level: l, payload } => lift(payload, level - 1, ctx),
            // lift() is the identity when payload level already matches;
            // the assert above guarantees *l <= level.
        }
    }

    /// Add exponents after lifting to a common level; demotes the result.
    pub fn add(&self, other: &ElExponent, ctx: &ElContext) -> Result<ElExponent> {
        match (self, other) {
            (ElExponent::Base(a), ElExponent::Base(b)) => Ok(ElExponent::Base(a.add(b))),
            _ => {
                let level = self.level().max(other.level()).max(1);
                let pa = self.payload_at(level, ctx)?;
                let pb = other.payload_at(level, ctx)?;
                make_tower_exponent(pa.add(&pb, ctx)?, ctx)
            }
        }
    }

    /// Total order matching the Hahn-group convention: a bigger exponent
    /// names a smaller monomial. On payloads this reverses the series
    /// order, since `t^a` grows with `a`.
    pub fn cmp_in(&self, other: &ElExponent, ctx: &ElContext) -> Result<Ordering> {
        match (self, other) {
            (ElExponent::Base(a), ElExponent::Base(b)) => Ok(a.cmp(b)),
            _ => {
                if self == other {
                    return Ok(Ordering::Equal);
                }
                let level = self.level().max(other.level()).max(1);
                let pa = self.payload_at(level, ctx)?;
                let pb = other.payload_at(level, ctx)?;
                Ok(pa.compare(&pb, ctx)?.reverse())
            }
        }
    }

    pub fn is_negative_in(&self, ctx: &ElContext) -> Result<bool> {
        Ok(self.cmp_in(&ElExponent::zero(), ctx)? == Ordering::Less)
    }
}

/// Canonical tower exponent over a purely infinite payload: demotes through
/// the inverse pre-log hook, collapses a zero payload to the zero exponent.
fn make_tower_exponent(payload: ElSeries, ctx: &ElContext) -> Result<ElExponent> {
    if payload.is_zero() {
        return Ok(ElExponent::zero());
    }
    if payload.level() == 0 {
        let base = payload.to_series()?;
        if let Some(alpha) = ctx.pspec()?.recognize(&base) {
            return Ok(ElExponent::Base(alpha));
        }
        return Ok(ElExponent::Tower {
            level: 1,
            payload: Box::new(payload),
        });
    }
    Ok(ElExponent::Tower {
        level: payload.level() + 1,
        payload: Box::new(payload),
    })
}

/// Leveled series: ascending term list over tower exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct ElSeries {
    spine: Arc<crate::hahn::Spine>,
    terms: Vec<(ElExponent, Coeff)>,
    exact: bool,
}

impl ElSeries {
    pub fn zero(spine: Arc<crate::hahn::Spine>) -> ElSeries {
        ElSeries {
            spine,
            terms: Vec::new(),
            exact: true,
        }
    }

    pub fn one(spine: Arc<crate::hahn::Spine>) -> ElSeries {
        ElSeries {
            spine,
            terms: vec![(ElExponent::zero(), Coeff::one())],
            exact: true,
        }
    }

    pub fn monomial(spine: Arc<crate::hahn::Spine>, e: ElExponent, c: Coeff) -> ElSeries {
        let terms = if c.is_zero() { Vec::new() } else { vec![(e, c)] };
        ElSeries {
            spine,
            terms,
            exact: true,
        }
    }

    pub fn from_series(s: Series) -> ElSeries {
        let spine = s.spine().clone();
        let exact = s.exact();
        ElSeries {
            spine,
            terms: s
                .terms()
                .iter()
                .map(|(e, c)| (ElExponent::Base(e.clone()), c.clone()))
                .collect(),
            exact,
        }
    }

    /// Back to a plain series; all exponents must be at level 0.
    pub fn to_series(&self) -> Result<Series> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for (e, c) in &self.terms {
            match e {
                ElExponent::Base(b) => terms.push((b.clone(), c.clone())),
                ElExponent::Tower { level, .. } => {
                    return Err(Error::DepthExceeded(*level));
                }
            }
        }
        Ok(Series::from_terms(self.spine.clone(), terms).with_exact(self.exact))
    }

    pub fn spine(&self) -> &Arc<crate::hahn::Spine> {
        &self.spine
    }

    pub fn terms(&self) -> &[(ElExponent, Coeff)] {
        &self.terms
    }

    pub fn exact(&self) -> bool {
        self.exact
    }

    pub fn into_inexact(mut self) -> ElSeries {
        self.exact = false;
        self
    }

    pub fn with_exact(mut self, exact: bool) -> ElSeries {
        self.exact = self.exact && exact;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn level(&self) -> u32 {
        self.terms.iter().map(|(e, _)| e.level()).max().unwrap_or(0)
    }

    pub fn leading(&self) -> Result<(&ElExponent, &Coeff)> {
        self.terms.first().map(|(e, c)| (e, c)).ok_or(Error::ZeroSeries)
    }

    pub fn valuation(&self) -> Option<&ElExponent> {
        self.terms.first().map(|(e, _)| e)
    }

    pub fn is_positive(&self) -> bool {
        self.terms
            .first()
            .map(|(_, c)| c.is_positive())
            .unwrap_or(false)
    }

    pub fn leading_terms(&self, k: usize) -> &[(ElExponent, Coeff)] {
        &self.terms[..self.terms.len().min(k)]
    }

    /// Insert one term keeping ascending order; merges equal exponents.
    fn insert_term(&mut self, e: ElExponent, c: Coeff, ctx: &ElContext) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        for i in 0..self.terms.len() {
            match e.cmp_in(&self.terms[i].0, ctx)? {
                Ordering::Less => {
                    self.terms.insert(i, (e, c));
                    return Ok(());
                }
                Ordering::Equal => {
                    self.terms[i].1 += c;
                    if self.terms[i].1.is_zero() {
                        self.terms.remove(i);
                    }
                    return Ok(());
                }
                Ordering::Greater => {}
            }
        }
        self.terms.push((e, c));
        Ok(())
    }

    pub fn from_terms<I>(
        spine: Arc<crate::hahn::Spine>,
        pairs: I,
        ctx: &ElContext,
    ) -> Result<ElSeries>
    where
        I: IntoIterator<Item = (ElExponent, Coeff)>,
    {
        let mut out = ElSeries::zero(spine);
        for (e, c) in pairs {
            out.insert_term(e, c, ctx)?;
        }
        Ok(out)
    }

    pub fn add(&self, other: &ElSeries, ctx: &ElContext) -> Result<ElSeries> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.insert_term(e.clone(), c.clone(), ctx)?;
        }
        out.exact = self.exact && other.exact;
        Ok(out)
    }

    pub fn neg(&self) -> ElSeries {
        ElSeries {
            spine: self.spine.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
            exact: self.exact,
        }
    }

    pub fn sub(&self, other: &ElSeries, ctx: &ElContext) -> Result<ElSeries> {
        self.add(&other.neg(), ctx)
    }

    pub fn scale(&self, k: &Coeff) -> ElSeries {
        if k.is_zero() {
            return ElSeries::zero(self.spine.clone()).with_exact(self.exact);
        }
        ElSeries {
            spine: self.spine.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
            exact: self.exact,
        }
    }

    pub fn mul_monomial(&self, e: &ElExponent, c: &Coeff, ctx: &ElContext) -> Result<ElSeries> {
        let mut out = ElSeries::zero(self.spine.clone());
        for (te, tc) in &self.terms {
            out.insert_term(te.add(e, ctx)?, tc * c, ctx)?;
        }
        out.exact = self.exact;
        Ok(out)
    }

    pub fn mul(&self, other: &ElSeries, ctx: &ElContext) -> Result<ElSeries> {
        let mut out = ElSeries::zero(self.spine.clone());
        for (e, c) in &self.terms {
            let row = other.mul_monomial(e, c, ctx)?;
            out = out.add(&row, ctx)?;
        }
        out.exact = self.exact && other.exact;
        Ok(out)
    }

    /// Geometric-expansion inverse, as for plain series.
    pub fn invert(&self, ctx: &ElContext) -> Result<ElSeries> {
        let (lead_e, lead_c) = match self.terms.first() {
            Some((e, c)) => (e.clone(), c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        let inv_lead = ElSeries::monomial(self.spine.clone(), lead_e.neg(), lead_c.recip());
        let eps = ElSeries::one(self.spine.clone()).sub(&self.mul(&inv_lead, ctx)?, ctx)?;
        if eps.is_zero() {
            return Ok(inv_lead.with_exact(self.exact));
        }
        let mut sum = ElSeries::one(self.spine.clone());
        let mut power = ElSeries::one(self.spine.clone());
        for _ in 1..ctx.max_terms {
            power = power.mul(&eps, ctx)?;
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power, ctx)?;
        }
        Ok(sum.mul(&inv_lead, ctx)?.with_exact(self.exact).into_inexact())
    }

    pub fn compare(&self, other: &ElSeries, ctx: &ElContext) -> Result<Ordering> {
        let d = self.sub(other, ctx)?;
        Ok(match d.terms.first() {
            None => Ordering::Equal,
            Some((_, c)) => {
                if c.is_positive() {
                    Ordering::Greater
                } else {
                    Ordering::Less
                }
            }
        })
    }

    /// Split by exponent sign: (purely infinite part, constant coefficient,
    /// infinitesimal part).
    pub fn split_for_exp(&self, ctx: &ElContext) -> Result<(ElSeries, Coeff, ElSeries)> {
        let mut up = ElSeries::zero(self.spine.clone());
        let mut constant = Coeff::zero();
        let mut down = ElSeries::zero(self.spine.clone());
        up.exact = self.exact;
        down.exact = self.exact;
        for (e, c) in &self.terms {
            match e.cmp_in(&ElExponent::zero(), ctx)? {
                Ordering::Less => up.terms.push((e.clone(), c.clone())),
                Ordering::Equal => constant = c.clone(),
                Ordering::Greater => down.terms.push((e.clone(), c.clone())),
            }
        }
        Ok((up, constant, down))
    }
}

/// Order-preserving embedding into representation level `to_level`: every
/// nonzero exponent is rewritten through the pre-logarithm. Constants stay
/// as they are.
pub fn lift(x: &ElSeries, to_level: u32, ctx: &ElContext) -> Result<ElSeries> {
    if x.level() >= to_level {
        return Ok(x.clone());
    }
    let mut terms = Vec::with_capacity(x.terms.len());
    for (e, c) in &x.terms {
        terms.push((lift_exponent(e, to_level, ctx)?, c.clone()));
    }
    // The embedding preserves order, so the term list stays sorted.
    Ok(ElSeries {
        spine: x.spine.clone(),
        terms,
        exact: x.exact,
    })
}

fn lift_exponent(e: &ElExponent, to_level: u32, ctx: &ElContext) -> Result<ElExponent> {
    if e.is_zero() || e.level() >= to_level {
        return Ok(e.clone());
    }
    let payload = e.payload_at(to_level, ctx)?;
    Ok(ElExponent::Tower {
        level: to_level,
        payload: Box::new(payload),
    })
}

/// `exp` on the tower: `exp(a) = t^(-up part is the new exponent) *
/// exp_k(constant) * sum down^m / m!`. The purely infinite part becomes a
/// monomial exponent, demoted through the inverse pre-log when possible.
pub fn exp_el(a: &ElSeries, ctx: &ElContext) -> Result<ElSeries> {
    let (up, constant, down) = a.split_for_exp(ctx)?;
    let hooks = ctx.field.hooks();
    let (const_fac, const_exact) = hooks.exp_k(&constant)?;

    let mono = if up.is_zero() {
        ElSeries::one(a.spine().clone())
    } else {
        let e = make_tower_exponent(up, ctx)?;
        if e.level() > ctx.depth {
            return Err(Error::DepthExceeded(ctx.depth));
        }
        if e.level() >= 1 && !ctx.field.tower_allowed() {
            return Err(Error::TowerUnavailable);
        }
        ElSeries::monomial(a.spine().clone(), e, Coeff::one())
    };

    let mut unit = ElSeries::one(a.spine().clone());
    if !down.is_zero() {
        let mut power = ElSeries::one(a.spine().clone());
        let mut factorial = Coeff::one();
        for m in 1..ctx.max_terms as i64 {
            power = power.mul(&down, ctx)?;
            factorial *= Coeff::from_integer(m.into());
            unit = unit.add(&power.scale(&factorial.recip()), ctx)?;
        }
        unit = unit.into_inexact();
    }

    Ok(mono
        .scale(&const_fac)
        .mul(&unit, ctx)?
        .with_exact(a.exact() && const_exact))
}

/// `log` on the tower: the exponent contributes its payload (or the
/// pre-logarithm at level 0), the coefficient goes through `log_k`, the
/// unit part through the alternating series.
pub fn log_el(a: &ElSeries, ctx: &ElContext) -> Result<ElSeries> {
    if !a.is_positive() {
        return Err(Error::NotPositive);
    }
    let (lead_e, lead_c) = a.leading()?;
    let (lead_e, lead_c) = (lead_e.clone(), lead_c.clone());
    let hooks = ctx.field.hooks();

    let exp_part = match &lead_e {
        ElExponent::Base(alpha) => {
            if alpha.is_zero() {
                ElSeries::zero(a.spine().clone())
            } else {
                ElSeries::from_series(ctx.pspec()?.prelog_monomial(alpha)?)
            }
        }
        ElExponent::Tower { payload, .. } => payload.as_ref().clone(),
    };

    let (logc, const_exact) = hooks.log_k(&lead_c)?;
    let const_part = ElSeries::monomial(a.spine().clone(), ElExponent::zero(), logc);

    let inv_lead = ElSeries::monomial(a.spine().clone(), lead_e.neg(), lead_c.recip());
    let eps = a
        .mul(&inv_lead, ctx)?
        .sub(&ElSeries::one(a.spine().clone()), ctx)?;
    let mut unit_part = ElSeries::zero(a.spine().clone());
    if !eps.is_zero() {
        let mut power = ElSeries::one(a.spine().clone());
        for n in 1..=ctx.max_terms as i64 {
            power = power.mul(&eps, ctx)?;
            let sign = if n % 2 == 1 { Coeff::one() } else { -Coeff::one() };
            unit_part = unit_part.add(&power.scale(&(sign / Coeff::from_integer(n.into()))), ctx)?;
        }
        unit_part = unit_part.into_inexact();
    }

    exp_part
        .add(&const_part, ctx)?
        .add(&unit_part, ctx)
        .map(|s| s.with_exact(a.exact() && const_exact))
}

/// Strong linearity over terms; on a tower monomial the derivative is
/// `d(payload) * t^e`, matching the exponential differential equation, and
/// level 0 falls back to the strong Leibniz rule.
pub fn derive_el(a: &ElSeries, ctx: &ElContext) -> Result<ElSeries> {
    let mut out = ElSeries::zero(a.spine().clone());
    for (e, c) in a.terms() {
        let factor = match e {
            ElExponent::Base(alpha) => {
                ElSeries::from_series(ctx.field.derivation().monomial_logderiv(alpha)?)
            }
            ElExponent::Tower { payload, .. } => derive_el(payload, ctx)?,
        };
        out = out.add(&factor.mul_monomial(e, c, ctx)?, ctx)?;
    }
    Ok(out.with_exact(a.exact()))
}

/// `d(a)/a` in the tower.
pub fn log_derivative_el(a: &ElSeries, ctx: &ElContext) -> Result<ElSeries> {
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    if a.terms().len() == 1 {
        let (e, _) = a.leading()?;
        return match e {
            ElExponent::Base(alpha) => Ok(ElSeries::from_series(
                ctx.field.derivation().monomial_logderiv(alpha)?,
            )
            .with_exact(a.exact())),
            ElExponent::Tower { payload, .. } => {
                Ok(derive_el(payload, ctx)?.with_exact(a.exact()))
            }
        };
    }
    derive_el(a, ctx)?.mul(&a.invert(ctx)?, ctx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElIntegrationResult {
    pub value: ElSeries,
    pub residual: ElSeries,
    pub exact: bool,
    pub iterations: u32,
    pub status: IntegrationStatus,
}

/// Integration in the tower by the same refinement loop as at level 0.
/// Level-0 inputs delegate to the exact monomial loop; genuine tower values
/// use the Rosenlicht quotient as a contract-verified candidate generator.
pub fn integrate_el(a: &ElSeries, ctx: &ElContext) -> Result<ElIntegrationResult> {
    if a.level() == 0 {
        let base = a.to_series()?;
        let r = integrate(&base, ctx.field.derivation(), ctx.max_terms, ctx.max_iters)?;
        return Ok(ElIntegrationResult {
            value: ElSeries::from_series(r.value),
            residual: ElSeries::from_series(r.residual),
            exact: r.exact,
            iterations: r.iterations,
            status: r.status,
        });
    }

    let tt = ctx.field.derivation().validate_hardy()?.theta_tilde;
    let mut value = ElSeries::zero(a.spine().clone());
    let mut residual = a.clone();
    let mut iterations = 0u32;
    let status = loop {
        if residual.is_zero() {
            break IntegrationStatus::Complete;
        }
        if let crate::derivation::ThetaTilde::InGamma(t) = &tt {
            if residual.valuation() == Some(&ElExponent::Base(t.clone())) {
                break IntegrationStatus::ResidualAtBound;
            }
        }
        if iterations >= ctx.max_iters {
            break IntegrationStatus::IterationBudget;
        }
        match el_ai_candidate(&residual, ctx)? {
            Some(step) => {
                let step_residual = residual.sub(&derive_el(&step, ctx)?, ctx)?;
                let improved = match (step_residual.valuation(), residual.valuation()) {
                    (None, _) => true,
                    (Some(ne), Some(oe)) => ne.cmp_in(oe, ctx)? == Ordering::Greater,
                    (Some(_), None) => false,
                };
                if !improved {
                    break IntegrationStatus::ResidualAtBound;
                }
                value = value.add(&step, ctx)?;
                residual = step_residual;
                iterations += 1;
            }
            None => break IntegrationStatus::ResidualAtBound,
        }
    };
    let exact = residual.is_zero() && a.exact();
    Ok(ElIntegrationResult {
        value,
        residual,
        exact,
        iterations,
        status,
    })
}

/// One asymptotic-integral candidate for the tower: Rosenlicht's quotient
/// over the ladder of test monomials, verified against the contract
/// `v(d(b) - r) > v(r)`.
fn el_ai_candidate(r: &ElSeries, ctx: &ElContext) -> Result<Option<ElSeries>> {
    let (lead_e, lead_c) = r.leading()?;
    let mut candidates: Vec<ElSeries> = Vec::new();
    if !lead_e.is_zero() {
        candidates.push(ElSeries::monomial(
            r.spine().clone(),
            lead_e.clone(),
            lead_c.clone(),
        ));
    }
    let index_bound = match ctx.field.spine().rank() {
        Some(rank) => rank,
        None => 8,
    };
    for i in 0..index_bound {
        candidates.push(ElSeries::monomial(
            r.spine().clone(),
            ElExponent::Base(Exponent::single(crate::hahn::SpineIndex(i), Coeff::one())),
            Coeff::one(),
        ));
    }
    for u in &candidates {
        let du = derive_el(u, ctx)?;
        if du.is_zero() {
            continue;
        }
        let w = r.mul(u, ctx)?.mul(&du.invert(ctx)?, ctx)?;
        let dw = derive_el(&w, ctx)?;
        if dw.is_zero() {
            continue;
        }
        let b = r.mul(&w, ctx)?.mul(&dw.invert(ctx)?, ctx)?;
        let check = residual_improves(r, &b, ctx)?;
        if check {
            return Ok(Some(b));
        }
    }
    Ok(None)
}

fn residual_improves(r: &ElSeries, b: &ElSeries, ctx: &ElContext) -> Result<bool> {
    let rem = r.sub(&derive_el(b, ctx)?, ctx)?;
    match (rem.valuation(), r.valuation()) {
        (None, _) => Ok(true),
        (Some(ne), Some(oe)) => Ok(ne.cmp_in(oe, ctx)? == Ordering::Greater),
        (Some(_), None) => Ok(false),
    }
}
