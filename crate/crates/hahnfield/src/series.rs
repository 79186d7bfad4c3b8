//! Exact arithmetic on generalized series with finite stored support.
//!
//! A series is an ascending-ordered term list over Hahn-group exponents,
//! plus an exactness flag. The flag goes false the first time a truncation
//! budget binds anywhere in a value's history and propagates conjunctively
//! through every operation.

use std::cmp::Ordering;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::hahn::{Exponent, Spine};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    spine: Arc<Spine>,
    /// Strictly increasing exponents, nonzero coefficients.
    terms: Vec<(Exponent, Coeff)>,
    exact: bool,
}

impl Series {
    pub fn zero(spine: Arc<Spine>) -> Series {
        Series {
            spine,
            terms: Vec::new(),
            exact: true,
        }
    }

    pub fn constant(spine: Arc<Spine>, c: Coeff) -> Series {
        Series::monomial(spine, Exponent::zero(), c)
    }

    pub fn one(spine: Arc<Spine>) -> Series {
        Series::constant(spine, Coeff::one())
    }

    pub fn monomial(spine: Arc<Spine>, e: Exponent, c: Coeff) -> Series {
        let terms = if c.is_zero() { Vec::new() } else { vec![(e, c)] };
        Series {
            spine,
            terms,
            exact: true,
        }
    }

    /// Build from arbitrary pairs: sorts, merges duplicates, drops zeros.
    pub fn from_terms<I>(spine: Arc<Spine>, pairs: I) -> Series
    where
        I: IntoIterator<Item = (Exponent, Coeff)>,
    {
        let mut terms: Vec<(Exponent, Coeff)> = pairs.into_iter().collect();
        terms.sort_by(|(a, _), (b, _)| a.cmp(b));
        let mut out: Vec<(Exponent, Coeff)> = Vec::new();
        for (e, c) in terms {
            match out.last_mut() {
                Some((pe, pc)) if *pe == e => *pc += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Series {
            spine,
            terms: out,
            exact: true,
        }
    }

    pub fn spine(&self) -> &Arc<Spine> {
        &self.spine
    }

    pub fn terms(&self) -> &[(Exponent, Coeff)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn exact(&self) -> bool {
        self.exact
    }

    /// Marks the value as carrying a truncation somewhere in its history.
    pub fn into_inexact(mut self) -> Series {
        self.exact = false;
        self
    }

    pub fn with_exact(mut self, exact: bool) -> Series {
        self.exact = self.exact && exact;
        self
    }

    fn check_same_spine(&self, other: &Series) -> Result<()> {
        if Arc::ptr_eq(&self.spine, &other.spine) || self.spine == other.spine {
            Ok(())
        } else {
            Err(Error::SpineMismatch)
        }
    }

    /// Term of minimal exponent; its exponent is the canonical valuation.
    pub fn leading(&self) -> Result<(&Exponent, &Coeff)> {
        self.terms
            .first()
            .map(|(e, c)| (e, c))
            .ok_or(Error::ZeroSeries)
    }

    pub fn valuation(&self) -> Option<&Exponent> {
        self.terms.first().map(|(e, _)| e)
    }

    pub fn coeff_at(&self, e: &Exponent) -> Coeff {
        match self.terms.binary_search_by(|(t, _)| t.cmp(e)) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => Coeff::zero(),
        }
    }

    /// The constant-term coefficient.
    pub fn constant_coeff(&self) -> Coeff {
        self.coeff_at(&Exponent::zero())
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_same_spine(other)?;
        let mut out: Vec<(Exponent, Coeff)> =
            Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut i = 0;
        let mut j = 0;
        while i < self.terms.len() || j < other.terms.len() {
            match (self.terms.get(i), other.terms.get(j)) {
                (Some((ea, ca)), Some((eb, cb))) => match ea.cmp(eb) {
                    Ordering::Less => {
                        out.push((ea.clone(), ca.clone()));
                        i += 1;
                    }
                    Ordering::Greater => {
                        out.push((eb.clone(), cb.clone()));
                        j += 1;
                    }
                    Ordering::Equal => {
                        let c = ca + cb;
                        if !c.is_zero() {
                            out.push((ea.clone(), c));
                        }
                        i += 1;
                        j += 1;
                    }
                },
                (Some((ea, ca)), None) => {
                    out.push((ea.clone(), ca.clone()));
                    i += 1;
                }
                (None, Some((eb, cb))) => {
                    out.push((eb.clone(), cb.clone()));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Ok(Series {
            spine: self.spine.clone(),
            terms: out,
            exact: self.exact && other.exact,
        })
    }

    pub fn neg(&self) -> Series {
        Series {
            spine: self.spine.clone(),
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
            exact: self.exact,
        }
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Coeff) -> Series {
        if k.is_zero() {
            return Series::zero(self.spine.clone()).with_exact(self.exact);
        }
        Series {
            spine: self.spine.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * k)).collect(),
            exact: self.exact,
        }
    }

    /// Convolution product: all pairwise exponent sums, merged.
    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_same_spine(other)?;
        let mut out = Series::zero(self.spine.clone());
        for (ea, ca) in &self.terms {
            let row: Vec<(Exponent, Coeff)> = other
                .terms
                .iter()
                .map(|(eb, cb)| (ea.add(eb), ca * cb))
                .collect();
            let row = Series {
                spine: self.spine.clone(),
                terms: row,
                exact: true,
            };
            out = out.add(&row)?;
        }
        out.exact = self.exact && other.exact;
        Ok(out)
    }

    /// Multiply by the monomial c * t^e.
    pub fn mul_monomial(&self, e: &Exponent, c: &Coeff) -> Series {
        if c.is_zero() {
            return Series::zero(self.spine.clone()).with_exact(self.exact);
        }
        Series {
            spine: self.spine.clone(),
            terms: self
                .terms
                .iter()
                .map(|(te, tc)| (te.add(e), tc * c))
                .collect(),
            exact: self.exact,
        }
    }

    /// Geometric-expansion inverse. Writes `a = c t^e (1 - eps)` with
    /// v(eps) > 0 and returns `c^-1 t^-e * sum_{n<budget} eps^n`. The result
    /// is exact only when the expansion terminates, i.e. when `a` is a
    /// monomial.
    pub fn invert(&self, max_terms: u32) -> Result<Series> {
        let (lead_e, lead_c) = match self.terms.first() {
            Some((e, c)) => (e.clone(), c.clone()),
            None => return Err(Error::DivisionByZero),
        };
        let inv_lead = Series::monomial(self.spine.clone(), lead_e.neg(), lead_c.recip());
        // eps = 1 - a / (c t^e); all exponents of eps are > 0.
        let eps = Series::one(self.spine.clone()).sub(&self.mul(&inv_lead)?)?;
        if eps.is_zero() {
            return Ok(inv_lead.with_exact(self.exact));
        }
        let mut sum = Series::one(self.spine.clone());
        let mut power = Series::one(self.spine.clone());
        for _ in 1..max_terms {
            power = power.mul(&eps)?;
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power)?;
        }
        // The budget always binds for a non-monomial input.
        Ok(sum.mul(&inv_lead)?.with_exact(self.exact).into_inexact())
    }

    /// Divide with the given truncation budget.
    pub fn div(&self, other: &Series, max_terms: u32) -> Result<Series> {
        self.mul(&other.invert(max_terms)?)
    }

    /// Total order of the lexicographically ordered field: the sign of
    /// (a - b) is the sign of its leading coefficient.
    pub fn compare(&self, other: &Series) -> Result<Ordering> {
        let d = self.sub(other)?;
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

    pub fn is_positive(&self) -> bool {
        self.terms
            .first()
            .map(|(_, c)| c.is_positive())
            .unwrap_or(false)
    }

    /// Keep only terms with exponent strictly below `bound`.
    pub fn truncate_below(&self, bound: &Exponent) -> Series {
        let kept: Vec<_> = self
            .terms
            .iter()
            .take_while(|(e, _)| e < bound)
            .cloned()
            .collect();
        Series {
            spine: self.spine.clone(),
            terms: kept,
            exact: self.exact,
        }
    }

    /// First `k` terms (the asymptotically dominant block).
    pub fn leading_terms(&self, k: usize) -> &[(Exponent, Coeff)] {
        &self.terms[..self.terms.len().min(k)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, qi};
    use crate::hahn::SpineIndex;
    use proptest::prelude::*;

    fn rank3() -> Arc<Spine> {
        Arc::new(Spine::finite(vec!["t1", "t2", "t3"]))
    }

    fn e(pairs: &[(usize, i64)]) -> Exponent {
        Exponent::from_pairs(pairs.iter().map(|&(i, n)| (i, qi(n))))
    }

    fn mono(s: &Arc<Spine>, pairs: &[(usize, i64)], c: i64) -> Series {
        Series::monomial(s.clone(), e(pairs), qi(c))
    }

    #[test]
    fn add_examples() {
        let s = rank3();
        let t2 = mono(&s, &[(1, 1)], 1);
        assert!(t2.add(&t2.neg()).unwrap().is_zero());

        // (1 + t1) + t2 comes out in ascending exponent order: 1, t2, t1.
        let one = Series::one(s.clone());
        let t1 = mono(&s, &[(0, 1)], 1);
        let sum = one.add(&t1).unwrap().add(&t2).unwrap();
        let exps: Vec<_> = sum.terms().iter().map(|(e, _)| e.clone()).collect();
        assert_eq!(exps, vec![Exponent::zero(), e(&[(1, 1)]), e(&[(0, 1)])]);

        let a = mono(&s, &[(2, -3)], 5);
        assert_eq!(a.add(&Series::zero(s.clone())).unwrap(), a);
    }

    #[test]
    fn mul_examples() {
        let s = rank3();
        let a = mono(&s, &[(0, 1)], 1);
        let b = mono(&s, &[(1, -1)], 1);
        assert_eq!(a.mul(&b).unwrap(), mono(&s, &[(0, 1), (1, -1)], 1));

        // (1+t2)(1-t2) = 1 - t2^2
        let one = Series::one(s.clone());
        let t2 = mono(&s, &[(1, 1)], 1);
        let lhs = one.add(&t2).unwrap().mul(&one.sub(&t2).unwrap()).unwrap();
        let rhs = one.sub(&mono(&s, &[(1, 2)], 1)).unwrap();
        assert_eq!(lhs, rhs);

        let a = mono(&s, &[(1, 2), (2, -1)], 7);
        assert_eq!(a.mul(&one).unwrap(), a);
    }

    #[test]
    fn invert_expansion_of_exp_minus_x() {
        // 1/(exp x - x) = t1 * sum (t1 t2^-1)^n, truncated at the budget.
        let s = rank3();
        let a = mono(&s, &[(0, -1)], 1).sub(&mono(&s, &[(1, -1)], 1)).unwrap();
        let inv = a.invert(4).unwrap();
        assert!(!inv.exact());
        let expected: Vec<(Exponent, Coeff)> = (0..4)
            .map(|n| (e(&[(0, n + 1), (1, -n)]), qi(1)))
            .collect();
        assert_eq!(inv.terms(), &expected[..]);
    }

    #[test]
    fn invert_monomial_and_constant() {
        let s = rank3();
        let m = mono(&s, &[(0, 2), (2, -1)], 3);
        let inv = m.invert(8).unwrap();
        assert!(inv.exact());
        assert_eq!(inv, Series::monomial(s.clone(), e(&[(0, -2), (2, 1)]), q(1, 3)));
        assert_eq!(m.mul(&inv).unwrap(), Series::one(s.clone()));

        let two = Series::constant(s.clone(), qi(2));
        assert_eq!(two.invert(8).unwrap(), Series::constant(s.clone(), q(1, 2)));
        assert!(Series::zero(s).invert(8).is_err());
    }

    #[test]
    fn leading_examples() {
        let s = rank3();
        let t2_plus_t1 = mono(&s, &[(1, 1)], 1).add(&mono(&s, &[(0, 1)], 1)).unwrap();
        let (le, lc) = t2_plus_t1.leading().unwrap();
        assert_eq!((le, lc), (&e(&[(1, 1)]), &qi(1)));

        let five = Series::constant(s.clone(), qi(5));
        assert_eq!(five.leading().unwrap(), (&Exponent::zero(), &qi(5)));

        let mut expansion = Series::zero(s.clone());
        for n in 0..6 {
            expansion = expansion.add(&mono(&s, &[(0, n + 1), (1, -n)], 1)).unwrap();
        }
        assert_eq!(expansion.leading().unwrap().0, &e(&[(0, 1)]));
        assert!(Series::zero(s).leading().is_err());
    }

    #[test]
    fn compare_examples() {
        let s = rank3();
        let t1 = mono(&s, &[(0, 1)], 1);
        let t2 = mono(&s, &[(1, 1)], 1);
        let t3 = mono(&s, &[(2, 1)], 1);
        let one = Series::one(s.clone());
        assert_eq!(t1.compare(&t2).unwrap(), Ordering::Less);
        assert_eq!(t3.compare(&one).unwrap(), Ordering::Less);
        assert_eq!(t2.compare(&t2).unwrap(), Ordering::Equal);
    }

    #[test]
    fn spine_mismatch_detected() {
        let a = Series::one(rank3());
        let b = Series::one(Arc::new(Spine::Naturals));
        assert_eq!(a.add(&b), Err(Error::SpineMismatch));
    }

    fn arb_series(spine: Arc<Spine>) -> impl Strategy<Value = Series> {
        proptest::collection::vec(
            (
                proptest::collection::vec((0usize..3, -4i64..5), 0..3),
                -5i64..6,
                1i64..4,
            ),
            0..4,
        )
        .prop_map(move |raw| {
            Series::from_terms(
                spine.clone(),
                raw.into_iter().map(|(pairs, n, d)| {
                    (Exponent::from_pairs(pairs.into_iter().map(|(i, k)| (i, qi(k)))), q(n, d))
                }),
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn ring_axioms(
            a in arb_series(rank3()),
            b in arb_series(rank3()),
            c in arb_series(rank3()),
        ) {
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(ab_c, a_bc);
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        }

        #[test]
        fn valuation_laws(a in arb_series(rank3()), b in arb_series(rank3())) {
            if !a.is_zero() && !b.is_zero() {
                let p = a.mul(&b).unwrap();
                let want = a.valuation().unwrap().add(b.valuation().unwrap());
                prop_assert_eq!(p.valuation().unwrap(), &want);
            }
            if let Some(vs) = a.add(&b).unwrap().valuation() {
                let min = match (a.valuation(), b.valuation()) {
                    (Some(x), Some(y)) => x.min(y).clone(),
                    (Some(x), None) | (None, Some(x)) => x.clone(),
                    (None, None) => unreachable!(),
                };
                prop_assert!(vs >= &min);
            }
        }

        #[test]
        fn inverse_up_to_budget(a in arb_series(rank3())) {
            prop_assume!(!a.is_zero());
            let budget = 6u32;
            let inv = a.invert(budget).unwrap();
            let prod = a.mul(&inv).unwrap();
            let one = Series::one(a.spine().clone());
            if inv.exact() {
                prop_assert_eq!(prod, one);
            } else {
                // a * inv = 1 - eps^budget, so the residual valuation is
                // at least budget * v(eps) > 0.
                let r = prod.sub(&one).unwrap();
                prop_assert!(!r.is_zero());
                let lead = a.leading().unwrap();
                let eps_v = {
                    let inv_lead = Series::monomial(
                        a.spine().clone(), lead.0.neg(), lead.1.recip());
                    let eps = one.sub(&a.mul(&inv_lead).unwrap()).unwrap();
                    eps.valuation().unwrap().clone()
                };
                let bound = eps_v.scale(&qi(budget as i64));
                prop_assert!(r.valuation().unwrap() >= &bound);
            }
        }

        #[test]
        fn ordered_field(a in arb_series(rank3()), b in arb_series(rank3())) {
            if a.is_positive() && b.is_positive() {
                prop_assert!(a.add(&b).unwrap().is_positive());
                prop_assert!(a.mul(&b).unwrap().is_positive());
            }
            // positive-support series are infinitesimal
            if a.is_positive()
                && a.valuation().map(|v| v.is_positive()).unwrap_or(false)
            {
                for c in [1i64, 2, 100] {
                    let cst = Series::constant(a.spine().clone(), qi(c));
                    prop_assert_eq!(a.compare(&cst).unwrap(), Ordering::Less);
                }
            }
        }
    }
}
