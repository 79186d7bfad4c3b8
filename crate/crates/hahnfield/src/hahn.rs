//! Hahn-group exponents over a spine: lexicographic order, natural
//! valuation and Archimedean equivalence.
//!
//! An exponent is a finitely supported map from spine indices to rationals,
//! stored as a sorted association list. The group order is lexicographic:
//! the coefficient at the smallest index of the support of the difference
//! decides the sign.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::coeff::Coeff;
use crate::error::{Error, Result};

/// Position of an Archimedean class in the spine. Smaller index means a
/// faster-growing class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpineIndex(pub usize);

impl fmt::Display for SpineIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The ordered set of Archimedean classes. Two families are supported:
/// an explicit finite list of labels, and the natural numbers with the
/// right shift n -> n+1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Spine {
    Finite { labels: Vec<String> },
    Naturals,
}

impl Spine {
    pub fn finite<S: Into<String>>(labels: Vec<S>) -> Spine {
        Spine::Finite {
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }

    /// Number of classes, or None for the infinite spine.
    pub fn rank(&self) -> Option<usize> {
        match self {
            Spine::Finite { labels } => Some(labels.len()),
            Spine::Naturals => None,
        }
    }

    pub fn contains(&self, idx: SpineIndex) -> bool {
        match self {
            Spine::Finite { labels } => idx.0 < labels.len(),
            Spine::Naturals => true,
        }
    }

    /// Display label of a class: the declared label on finite spines,
    /// `t<n>` on the natural spine.
    pub fn label(&self, idx: SpineIndex) -> String {
        match self {
            Spine::Finite { labels } => labels
                .get(idx.0)
                .cloned()
                .unwrap_or_else(|| format!("t?{}", idx.0)),
            Spine::Naturals => format!("t{}", idx.0),
        }
    }

    /// Inverse of `label`.
    pub fn index_of(&self, name: &str) -> Option<SpineIndex> {
        match self {
            Spine::Finite { labels } => labels
                .iter()
                .position(|l| l == name)
                .map(SpineIndex),
            Spine::Naturals => {
                let digits = name.strip_prefix('t')?;
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return None;
                }
                digits.parse::<usize>().ok().map(SpineIndex)
            }
        }
    }

    /// The right shift, where the family carries one.
    pub fn shift(&self, idx: SpineIndex) -> Option<SpineIndex> {
        match self {
            Spine::Finite { .. } => None,
            Spine::Naturals => Some(SpineIndex(idx.0 + 1)),
        }
    }

    pub fn check_exponent(&self, e: &Exponent) -> Result<()> {
        for (idx, _) in e.iter() {
            if !self.contains(idx) {
                return Err(Error::InvalidIndex(idx.0));
            }
        }
        Ok(())
    }

    /// Lexicographic comparison after validating both exponents against
    /// this spine.
    pub fn compare_exponents(&self, a: &Exponent, b: &Exponent) -> Result<Ordering> {
        self.check_exponent(a)?;
        self.check_exponent(b)?;
        Ok(a.cmp(b))
    }
}

/// Finitely supported element of the Hahn group over the spine.
/// Stored values are nonzero and sorted by ascending index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Exponent {
    terms: Vec<(SpineIndex, Coeff)>,
}

impl Exponent {
    pub fn zero() -> Exponent {
        Exponent { terms: Vec::new() }
    }

    pub fn single(idx: SpineIndex, c: Coeff) -> Exponent {
        if c.is_zero() {
            Exponent::zero()
        } else {
            Exponent {
                terms: vec![(idx, c)],
            }
        }
    }

    /// Build from arbitrary pairs; merges duplicates and drops zeros.
    pub fn from_pairs<I: IntoIterator<Item = (usize, Coeff)>>(pairs: I) -> Exponent {
        let mut terms: Vec<(SpineIndex, Coeff)> = Vec::new();
        for (i, c) in pairs {
            terms.push((SpineIndex(i), c));
        }
        terms.sort_by_key(|(i, _)| *i);
        let mut out: Vec<(SpineIndex, Coeff)> = Vec::new();
        for (i, c) in terms {
            match out.last_mut() {
                Some((j, acc)) if *j == i => *acc += c,
                _ => out.push((i, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Exponent { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SpineIndex, &Coeff)> {
        self.terms.iter().map(|(i, c)| (*i, c))
    }

    pub fn support_len(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff_at(&self, idx: SpineIndex) -> Coeff {
        self.terms
            .iter()
            .find(|(i, _)| *i == idx)
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Coeff::zero)
    }

    /// Natural valuation: minimal index of the support, None for zero
    /// (the class "infinity").
    pub fn v_gamma(&self) -> Option<SpineIndex> {
        self.terms.first().map(|(i, _)| *i)
    }

    /// Largest index of the support.
    pub fn max_index(&self) -> Option<SpineIndex> {
        self.terms.last().map(|(i, _)| *i)
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        let mut out: Vec<(SpineIndex, Coeff)> = Vec::with_capacity(self.terms.len() + other.terms.len());
        let mut i = 0;
        let mut j = 0;
        while i < self.terms.len() || j < other.terms.len() {
            let pick_left = match (self.terms.get(i), other.terms.get(j)) {
                (Some((ia, _)), Some((ib, _))) => {
                    if ia == ib {
                        let c = &self.terms[i].1 + &other.terms[j].1;
                        if !c.is_zero() {
                            out.push((*ia, c));
                        }
                        i += 1;
                        j += 1;
                        continue;
                    }
                    ia < ib
                }
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (None, None) => unreachable!(),
            };
            if pick_left {
                out.push(self.terms[i].clone());
                i += 1;
            } else {
                out.push(other.terms[j].clone());
                j += 1;
            }
        }
        Exponent { terms: out }
    }

    pub fn neg(&self) -> Exponent {
        Exponent {
            terms: self.terms.iter().map(|(i, c)| (*i, -c.clone())).collect(),
        }
    }

    pub fn sub(&self, other: &Exponent) -> Exponent {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: &Coeff) -> Exponent {
        if k.is_zero() {
            return Exponent::zero();
        }
        Exponent {
            terms: self.terms.iter().map(|(i, c)| (*i, c * k)).collect(),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.terms
            .first()
            .map(|(_, c)| c.is_positive())
            .unwrap_or(false)
    }

    pub fn is_negative(&self) -> bool {
        self.terms
            .first()
            .map(|(_, c)| c.is_negative())
            .unwrap_or(false)
    }

    pub fn abs(&self) -> Exponent {
        if self.is_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Archimedean equivalence: both sides bound each other by an integer
    /// multiple, which for nonzero exponents is the same as having equal
    /// natural valuation. Zero is equivalent only to itself.
    pub fn archimedean_equiv(&self, other: &Exponent) -> bool {
        self.v_gamma() == other.v_gamma()
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        // Sign of (self - other) at the smallest differing index.
        let mut i = 0;
        let mut j = 0;
        loop {
            match (self.terms.get(i), other.terms.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, ca)), None) => return sign_order(ca),
                (None, Some((_, cb))) => return sign_order(cb).reverse(),
                (Some((ia, ca)), Some((ib, cb))) => {
                    if ia < ib {
                        return sign_order(ca);
                    }
                    if ib < ia {
                        return sign_order(cb).reverse();
                    }
                    match ca.cmp(cb) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        ord => return ord,
                    }
                }
            }
        }
    }
}

fn sign_order(c: &Coeff) -> Ordering {
    if c.is_positive() {
        Ordering::Greater
    } else {
        Ordering::Less
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeff::{q, qi};
    use proptest::prelude::*;

    fn e(pairs: &[(usize, i64)]) -> Exponent {
        Exponent::from_pairs(pairs.iter().map(|&(i, n)| (i, qi(n))))
    }

    /// Independent oracle: expand to a dense rational vector and compare
    /// entrywise left to right.
    fn dense_lex_cmp(a: &Exponent, b: &Exponent, width: usize) -> Ordering {
        for i in 0..width {
            let ca = a.coeff_at(SpineIndex(i));
            let cb = b.coeff_at(SpineIndex(i));
            match ca.cmp(&cb) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        Ordering::Equal
    }

    #[test]
    fn compare_examples() {
        // (1,0,0) vs (0,1,0): the smaller class index wins.
        assert_eq!(e(&[(0, 1)]).cmp(&e(&[(1, 1)])), Ordering::Greater);
        assert_eq!(Exponent::zero().cmp(&Exponent::zero()), Ordering::Equal);
        // (0,1,-5) vs 0: minimal support index has coefficient +1.
        assert_eq!(e(&[(1, 1), (2, -5)]).cmp(&Exponent::zero()), Ordering::Greater);
    }

    #[test]
    fn v_gamma_examples() {
        assert_eq!(e(&[(2, 1)]).v_gamma(), Some(SpineIndex(2)));
        assert_eq!(Exponent::zero().v_gamma(), None);
        assert_eq!(e(&[(1, 2), (2, 5)]).v_gamma(), Some(SpineIndex(1)));
    }

    #[test]
    fn archimedean_examples() {
        assert!(e(&[(1, 1)]).archimedean_equiv(&e(&[(1, 2), (2, 5)])));
        assert!(!e(&[(0, 1)]).archimedean_equiv(&e(&[(1, 1)])));
        assert!(Exponent::zero().archimedean_equiv(&Exponent::zero()));
        assert!(!Exponent::zero().archimedean_equiv(&e(&[(0, 1)])));
    }

    #[test]
    fn rational_entries() {
        let a = Exponent::from_pairs([(0, q(1, 2))]);
        let b = Exponent::from_pairs([(0, q(1, 3))]);
        assert_eq!(a.cmp(&b), Ordering::Greater);
        assert_eq!(a.sub(&a), Exponent::zero());
    }

    #[test]
    fn spine_labels() {
        let s = Spine::finite(vec!["t1", "t2", "t3"]);
        assert_eq!(s.rank(), Some(3));
        assert_eq!(s.label(SpineIndex(1)), "t2");
        assert_eq!(s.index_of("t3"), Some(SpineIndex(2)));
        assert_eq!(s.index_of("x"), None);
        assert!(s.shift(SpineIndex(0)).is_none());

        let n = Spine::Naturals;
        assert_eq!(n.index_of("t12"), Some(SpineIndex(12)));
        assert_eq!(n.shift(SpineIndex(3)), Some(SpineIndex(4)));
        assert!(n.contains(SpineIndex(1_000_000)));
    }

    #[test]
    fn invalid_index_rejected() {
        let s = Spine::finite(vec!["t1", "t2"]);
        let bad = e(&[(5, 1)]);
        assert_eq!(
            s.compare_exponents(&bad, &Exponent::zero()),
            Err(Error::InvalidIndex(5))
        );
    }

    fn arb_exponent() -> impl Strategy<Value = Exponent> {
        proptest::collection::vec((0usize..5, -6i64..7, 1i64..4), 0..4).prop_map(|v| {
            Exponent::from_pairs(v.into_iter().map(|(i, n, d)| (i, q(n, d))))
        })
    }

    proptest! {
        #[test]
        fn order_matches_dense_oracle(a in arb_exponent(), b in arb_exponent()) {
            prop_assert_eq!(a.cmp(&b), dense_lex_cmp(&a, &b, 5));
        }

        #[test]
        fn order_total_and_translation_invariant(
            a in arb_exponent(), b in arb_exponent(), c in arb_exponent()
        ) {
            // antisymmetry
            prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
            // compatibility with addition
            prop_assert_eq!(a.add(&c).cmp(&b.add(&c)), a.cmp(&b));
            // transitivity on a sorted triple
            let mut v = vec![a.clone(), b.clone(), c.clone()];
            v.sort();
            prop_assert!(v[0] <= v[2]);
        }

        #[test]
        fn v_gamma_ultrametric(a in arb_exponent(), b in arb_exponent()) {
            let s = a.add(&b);
            let min = match (a.v_gamma(), b.v_gamma()) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (Some(x), None) | (None, Some(x)) => Some(x),
                (None, None) => None,
            };
            match (s.v_gamma(), min) {
                (None, _) => {}
                (Some(vs), Some(m)) => {
                    prop_assert!(vs >= m);
                    if a.v_gamma() != b.v_gamma() {
                        prop_assert_eq!(vs, m);
                    }
                }
                (Some(_), None) => prop_assert!(false, "sum of zeros is zero"),
            }
        }

        #[test]
        fn archimedean_is_witnessed(a in arb_exponent(), b in arb_exponent()) {
            // Cross-check the v_gamma definition against the n-multiple one.
            let equivalent = a.archimedean_equiv(&b);
            let witness = (1i64..64).any(|n| {
                let k = qi(n);
                a.abs().scale(&k) >= b.abs() && b.abs().scale(&k) >= a.abs()
            });
            if a.is_zero() && b.is_zero() {
                prop_assert!(equivalent);
            } else {
                prop_assert_eq!(equivalent, witness);
            }
        }
    }
}
