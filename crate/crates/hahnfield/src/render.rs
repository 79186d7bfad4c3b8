//! Canonical text and JSON renderings. Term order is the stored ascending
//! exponent order, so output is deterministic for identical inputs.

use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::coeff::Coeff;
use crate::el::{ElExponent, ElSeries};
use crate::hahn::{Exponent, Spine, SpineIndex};
use crate::integrate::IntegrationResult;
use crate::series::Series;

fn rational_text(c: &Coeff) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

/// Power suffix after a label: nothing for 1, `^n` for integers,
/// `^(p/q)` for fractions.
fn power_suffix(q: &Coeff) -> String {
    if q.is_one() {
        String::new()
    } else if q.is_integer() {
        format!("^{}", q.numer())
    } else {
        format!("^({}/{})", q.numer(), q.denom())
    }
}

/// Monomial body `t1*t2^-1`; empty string for the zero exponent.
pub fn exponent_monomial_text(e: &Exponent, spine: &Spine) -> String {
    e.iter()
        .map(|(idx, q)| format!("{}{}", spine.label(idx), power_suffix(q)))
        .collect::<Vec<_>>()
        .join("*")
}

/// Tuple form over finite spines (`(1,0,-2)`), sparse map over the
/// naturals (`{0:1, 3:-2}`).
pub fn exponent_text(e: &Exponent, spine: &Spine) -> String {
    match spine.rank() {
        Some(rank) => {
            let entries: Vec<String> = (0..rank)
                .map(|i| rational_text(&e.coeff_at(SpineIndex(i))))
                .collect();
            format!("({})", entries.join(","))
        }
        None => {
            let entries: Vec<String> = e
                .iter()
                .map(|(idx, q)| format!("{}:{}", idx.0, rational_text(q)))
                .collect();
            format!("{{{}}}", entries.join(", "))
        }
    }
}

fn push_term(out: &mut String, c: &Coeff, body: String) {
    let first = out.is_empty();
    let abs = c.abs();
    let coeff_part = if body.is_empty() {
        rational_text(&abs)
    } else if abs.is_one() {
        body
    } else {
        format!("{}*{}", rational_text(&abs), body)
    };
    if first {
        if c.is_negative() {
            out.push('-');
        }
    } else if c.is_negative() {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    out.push_str(&coeff_part);
}

pub fn series_text(s: &Series) -> String {
    if s.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (e, c) in s.terms() {
        push_term(&mut out, c, exponent_monomial_text(e, s.spine()));
    }
    out
}

fn el_exponent_body(e: &ElExponent, spine: &Spine) -> String {
    match e {
        ElExponent::Base(b) => exponent_monomial_text(b, spine),
        ElExponent::Tower { payload, .. } => format!("t^{{{}}}", el_series_text(payload)),
    }
}

pub fn el_series_text(s: &ElSeries) -> String {
    if s.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (e, c) in s.terms() {
        push_term(&mut out, c, el_exponent_body(e, s.spine()));
    }
    out
}

pub fn series_json(s: &Series) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .iter()
        .map(|(e, c)| {
            json!({
                "exponent": exponent_text(e, s.spine()),
                "numerator": c.numer().to_string(),
                "denominator": c.denom().to_string(),
            })
        })
        .collect();
    json!({ "terms": terms, "exact": s.exact() })
}

fn el_exponent_json(e: &ElExponent, spine: &Spine) -> Value {
    match e {
        ElExponent::Base(b) => Value::String(exponent_text(b, spine)),
        ElExponent::Tower { level, payload } => json!({
            "level": level,
            "payload": el_series_json(payload),
        }),
    }
}

pub fn el_series_json(s: &ElSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .iter()
        .map(|(e, c)| {
            json!({
                "exponent": el_exponent_json(e, s.spine()),
                "numerator": c.numer().to_string(),
                "denominator": c.denom().to_string(),
            })
        })
        .collect();
    json!({ "level": s.level(), "terms": terms, "exact": s.exact() })
}

pub fn integration_json(r: &IntegrationResult) -> Value {
    json!({
        "value": series_json(&r.value),
        "residual": series_json(&r.residual),
        "exact": r.exact,
        "iterations": r.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldConfig;
    use proptest::prelude::*;

    fn leh3() -> FieldConfig {
        FieldConfig::builtin("leh3").unwrap()
    }

    #[test]
    fn canonical_text_examples() {
        let f = leh3();
        let s = f.parse_series("1 - 1/2*t2^2 + t1*t2^-1").unwrap();
        assert_eq!(series_text(&s), "1 - 1/2*t2^2 + t1*t2^-1");
        let s = f.parse_series("-t1").unwrap();
        assert_eq!(series_text(&s), "-t1");
        let s = f.parse_series("t2^(1/2)").unwrap();
        assert_eq!(series_text(&s), "t2^(1/2)");
        assert_eq!(series_text(&crate::series::Series::zero(f.spine().clone())), "0");
    }

    #[test]
    fn exponent_text_forms() {
        let f = leh3();
        let s = f.parse_series("t1*t3^-2").unwrap();
        assert_eq!(exponent_text(s.leading().unwrap().0, f.spine()), "(1,0,-2)");

        let logs = FieldConfig::builtin("logs").unwrap();
        let s = logs.parse_series("t0*t3^-2").unwrap();
        assert_eq!(exponent_text(s.leading().unwrap().0, logs.spine()), "{0:1, 3:-2}");
        assert_eq!(
            exponent_text(&Exponent::zero(), logs.spine()),
            "{}"
        );
    }

    #[test]
    fn tower_monomials_render_with_braces() {
        let logs = FieldConfig::builtin("logs").unwrap();
        let ctx = crate::el::ElContext::new(&logs);
        let v = logs.parse_el("exp(t0^-1)", 32, 3).unwrap();
        assert_eq!(el_series_text(&v), "t^{t0^-1}");
        let d = crate::el::derive_el(&v, &ctx).unwrap();
        assert_eq!(el_series_text(&d), "t^{t0^-1}");
    }

    #[test]
    fn json_shape() {
        let f = leh3();
        let s = f.parse_series("1/2*t2").unwrap();
        let v = series_json(&s);
        assert_eq!(
            v,
            serde_json::json!({
                "terms": [{"exponent": "(0,1,0)", "numerator": "1", "denominator": "2"}],
                "exact": true,
            })
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// parse(render(a)) evaluates back to a.
        #[test]
        fn parse_render_round_trip(raw in proptest::collection::vec(
            (proptest::collection::vec((0usize..3, -3i64..4), 0..3), -5i64..6, 1i64..4),
            0..4,
        )) {
            let f = leh3();
            let s = crate::series::Series::from_terms(
                f.spine().clone(),
                raw.into_iter().map(|(pairs, n, d)| {
                    (
                        Exponent::from_pairs(
                            pairs.into_iter().map(|(i, k)| (i, crate::coeff::qi(k))),
                        ),
                        crate::coeff::q(n, d),
                    )
                }),
            );
            let text = series_text(&s);
            let back = f.parse_series(&text).unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
