//! Field configuration: spine, log-derivative data, pre-logarithm, germ
//! map and coefficient hooks, bundled with their validation reports.
//!
//! Configurations load from a small sectioned text format. The two built-in
//! fields ship embedded and go through the same loader.

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::One;

use crate::coeff::{Coeff, CoeffHooks};
use crate::derivation::{DerivationSpec, HardyReport, NatFamily};
use crate::el::{ElContext, ElSeries};
use crate::error::{Error, Result};
use crate::germ::{GermKind, GermMap};
use crate::hahn::{Spine, SpineIndex};
use crate::logarithm::{validate_prelog, PreLogSpec, PrelogReport};
use crate::parse;
use crate::series::Series;

/// Rank-3 log-exp scale: t1 = 1/exp(x), t2 = 1/x, t3 = 1/log(x).
const LEH3_CONFIG: &str = "\
[spine]
kind = finite
labels = t1, t2, t3

[logderiv]
t1 = -1
t2 = -t2
t3 = -t2*t3

[prelog]
t1 = -t2^-1
t2 = -t3^-1

[germs]
t1 = exp(1)
t2 = power
t3 = log(1)
";

/// Iterated-logarithm scale: t_n = 1/log_n(x) with log_0(x) = x.
const LOGS_CONFIG: &str = "\
[spine]
kind = naturals

[logderiv]
generator = logs
coeff = -1

[prelog]
generator = sigma-shift

[germs]
generator = log-iterates
";

#[derive(Debug, Clone)]
pub struct FieldConfig {
    name: String,
    spine: Arc<Spine>,
    derivation: DerivationSpec,
    prelog: Option<PreLogSpec>,
    germs: Option<GermMap>,
    hooks: CoeffHooks,
    hardy: HardyReport,
    prelog_report: Option<PrelogReport>,
}

impl FieldConfig {
    pub fn builtin(name: &str) -> Result<FieldConfig> {
        match name {
            "leh3" => FieldConfig::from_config_str("leh3", LEH3_CONFIG),
            "logs" => FieldConfig::from_config_str("logs", LOGS_CONFIG),
            other => Err(Error::Config(format!("unknown built-in field '{other}'"))),
        }
    }

    pub fn builtin_names() -> &'static [&'static str] {
        &["leh3", "logs"]
    }

    pub fn from_config_str(name: &str, text: &str) -> Result<FieldConfig> {
        let sections = split_sections(text)?;
        let spine = Arc::new(parse_spine(section(&sections, "spine")?)?);
        let hooks = parse_hooks(sections.iter().find(|(n, _)| n == "hooks"))?;
        let derivation = parse_logderiv(section(&sections, "logderiv")?, &spine)?;
        let prelog = match sections.iter().find(|(n, _)| n == "prelog") {
            Some((_, entries)) => Some(parse_prelog(entries, &spine, &derivation)?),
            None => None,
        };
        let germs = match sections.iter().find(|(n, _)| n == "germs") {
            Some((_, entries)) => {
                let g = parse_germs(entries, &spine)?;
                g.check_ordering()?;
                Some(g)
            }
            None => None,
        };
        let hardy = derivation.validate_hardy()?;
        let prelog_report = match &prelog {
            Some(p) => Some(validate_prelog(&derivation, p)?),
            None => None,
        };
        Ok(FieldConfig {
            name: name.to_string(),
            spine,
            derivation,
            prelog,
            germs,
            hooks,
            hardy,
            prelog_report,
        })
    }

    pub fn from_file(path: &std::path::Path) -> Result<FieldConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("field")
            .to_string();
        FieldConfig::from_config_str(&name, &text)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn spine(&self) -> &Arc<Spine> {
        &self.spine
    }

    pub fn derivation(&self) -> &DerivationSpec {
        &self.derivation
    }

    pub fn prelog(&self) -> Option<&PreLogSpec> {
        self.prelog.as_ref()
    }

    pub fn germs(&self) -> Option<&GermMap> {
        self.germs.as_ref()
    }

    pub fn hooks(&self) -> CoeffHooks {
        self.hooks
    }

    pub fn hardy_report(&self) -> &HardyReport {
        &self.hardy
    }

    pub fn prelog_report(&self) -> Option<&PrelogReport> {
        self.prelog_report.as_ref()
    }

    /// Exponential extensions are admitted only when the pre-logarithm
    /// passes all series-morphism conditions.
    pub fn tower_allowed(&self) -> bool {
        self.prelog_report
            .as_ref()
            .map(|r| r.accepted())
            .unwrap_or(false)
    }

    /// Parse and evaluate an expression expected to stay at level 0.
    pub fn parse_series(&self, text: &str) -> Result<Series> {
        self.parse_el(text, 32, 3)?.to_series()
    }

    /// Parse and evaluate an expression in the tower.
    pub fn parse_el(&self, text: &str, max_terms: u32, depth: u32) -> Result<ElSeries> {
        let expr = parse::parse_expression(text, &self.spine)?;
        let ctx = ElContext {
            field: self,
            max_terms,
            depth,
            max_iters: 64,
        };
        parse::eval(&expr, &ctx)
    }
}

type Section = (String, Vec<(String, String)>);

fn split_sections(text: &str) -> Result<Vec<Section>> {
    let mut sections: Vec<Section> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Config(format!("line {}: unclosed section", lineno + 1)))?;
            sections.push((name.trim().to_string(), Vec::new()));
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value'", lineno + 1))
        })?;
        let current = sections
            .last_mut()
            .ok_or_else(|| Error::Config(format!("line {}: entry outside a section", lineno + 1)))?;
        current
            .1
            .push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(sections)
}

fn section<'a>(sections: &'a [Section], name: &str) -> Result<&'a [(String, String)]> {
    sections
        .iter()
        .find(|(n, _)| n == name)
        .map(|(_, entries)| entries.as_slice())
        .ok_or_else(|| Error::Config(format!("missing [{name}] section")))
}

fn lookup<'a>(entries: &'a [(String, String)], key: &str) -> Option<&'a str> {
    entries
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
}

fn parse_spine(entries: &[(String, String)]) -> Result<Spine> {
    match lookup(entries, "kind") {
        Some("finite") => {
            let labels: Vec<String> = lookup(entries, "labels")
                .ok_or_else(|| Error::Config("finite spine needs labels".into()))?
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if labels.is_empty() {
                return Err(Error::Config("finite spine needs at least one label".into()));
            }
            let mut seen = labels.clone();
            seen.sort();
            seen.dedup();
            if seen.len() != labels.len() {
                return Err(Error::Config("duplicate spine labels".into()));
            }
            Ok(Spine::Finite { labels })
        }
        Some("naturals") => Ok(Spine::Naturals),
        Some(other) => Err(Error::Config(format!("unknown spine kind '{other}'"))),
        None => Err(Error::Config("spine section needs a kind".into())),
    }
}

fn parse_hooks(section: Option<&Section>) -> Result<CoeffHooks> {
    match section.and_then(|(_, entries)| lookup(entries, "kind")) {
        None | Some("rational") => Ok(CoeffHooks::Rational),
        Some("float") => Ok(CoeffHooks::Float),
        Some(other) => Err(Error::Config(format!("unknown hook kind '{other}'"))),
    }
}

/// Parse a standalone rational like `-3/4` or `2`.
pub fn parse_rational(text: &str) -> Result<Coeff> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = num
        .parse()
        .map_err(|_| Error::Config(format!("bad rational '{text}'")))?;
    let d: BigInt = den
        .parse()
        .map_err(|_| Error::Config(format!("bad rational '{text}'")))?;
    if d == BigInt::from(0) {
        return Err(Error::Config(format!("zero denominator in '{text}'")));
    }
    Ok(Coeff::new(n, d))
}

fn parse_series_literal(text: &str, spine: &Arc<Spine>) -> Result<Series> {
    let expr = parse::parse_expression(text, spine)
        .map_err(|e| Error::Config(format!("in series '{text}': {e}")))?;
    parse::eval_literal(&expr, spine, 32)
        .map_err(|e| Error::Config(format!("in series '{text}': {e}")))
}

fn parse_logderiv(entries: &[(String, String)], spine: &Arc<Spine>) -> Result<DerivationSpec> {
    if let Some(generator) = lookup(entries, "generator") {
        let coeff = match lookup(entries, "coeff") {
            Some(c) => parse_rational(c)?,
            None => -Coeff::one(),
        };
        let family = match generator {
            "logs" => NatFamily::LogPrefix { coeff },
            "right-shift" => {
                let template = lookup(entries, "template")
                    .ok_or_else(|| Error::Config("right-shift generator needs a template".into()))?
                    .split(',')
                    .map(parse_rational)
                    .collect::<Result<Vec<_>>>()?;
                NatFamily::ShiftTemplate { coeff, template }
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown log-derivative generator '{other}'"
                )))
            }
        };
        return DerivationSpec::generated(spine.clone(), family);
    }
    let rank = spine.rank().ok_or_else(|| {
        Error::Config("log-derivative tables need a finite spine; use a generator".into())
    })?;
    let mut values: Vec<Option<Series>> = vec![None; rank];
    for (key, value) in entries {
        let idx = spine
            .index_of(key)
            .ok_or_else(|| Error::Config(format!("unknown spine label '{key}'")))?;
        values[idx.0] = Some(parse_series_literal(value, spine)?);
    }
    let values: Vec<Series> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                Error::Config(format!(
                    "missing log-derivative for {}",
                    spine.label(SpineIndex(i))
                ))
            })
        })
        .collect::<Result<_>>()?;
    DerivationSpec::finite_table(spine.clone(), values)
}

fn parse_prelog(
    entries: &[(String, String)],
    spine: &Arc<Spine>,
    derivation: &DerivationSpec,
) -> Result<PreLogSpec> {
    if let Some(generator) = lookup(entries, "generator") {
        return match generator {
            "sigma-shift" => PreLogSpec::sigma_shift(spine.clone()),
            "from-derivation" => PreLogSpec::from_derivation(derivation, 64),
            other => Err(Error::Config(format!(
                "unknown pre-logarithm generator '{other}'"
            ))),
        };
    }
    let rank = spine.rank().ok_or_else(|| {
        Error::Config("pre-logarithm tables need a finite spine; use a generator".into())
    })?;
    let mut values: Vec<Option<Series>> = vec![None; rank];
    for (key, value) in entries {
        let idx = spine
            .index_of(key)
            .ok_or_else(|| Error::Config(format!("unknown spine label '{key}'")))?;
        values[idx.0] = Some(parse_series_literal(value, spine)?);
    }
    PreLogSpec::table(spine.clone(), values)
}

fn parse_germ_kind(text: &str) -> Result<GermKind> {
    let text = text.trim();
    if text == "power" {
        return Ok(GermKind::Power);
    }
    let parse_arg = |inner: &str| -> Result<u32> {
        inner
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("bad germ '{text}'")))
    };
    if let Some(rest) = text.strip_prefix("exp(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Config(format!("bad germ '{text}'")))?;
        return Ok(GermKind::ExpIterate(parse_arg(inner)?));
    }
    if let Some(rest) = text.strip_prefix("log(") {
        let inner = rest
            .strip_suffix(')')
            .ok_or_else(|| Error::Config(format!("bad germ '{text}'")))?;
        return Ok(GermKind::LogIterate(parse_arg(inner)?));
    }
    Err(Error::Config(format!("unknown germ kind '{text}'")))
}

fn parse_germs(entries: &[(String, String)], spine: &Arc<Spine>) -> Result<GermMap> {
    if let Some(generator) = lookup(entries, "generator") {
        return match generator {
            "log-iterates" => {
                if spine.rank().is_some() {
                    Err(Error::Config(
                        "log-iterate germs require the natural spine".into(),
                    ))
                } else {
                    Ok(GermMap::LogIterates)
                }
            }
            other => Err(Error::Config(format!("unknown germ generator '{other}'"))),
        };
    }
    let rank = spine
        .rank()
        .ok_or_else(|| Error::Config("germ tables need a finite spine; use a generator".into()))?;
    let mut kinds: Vec<Option<GermKind>> = vec![None; rank];
    for (key, value) in entries {
        let idx = spine
            .index_of(key)
            .ok_or_else(|| Error::Config(format!("unknown spine label '{key}'")))?;
        kinds[idx.0] = Some(parse_germ_kind(value)?);
    }
    let kinds: Vec<GermKind> = kinds
        .into_iter()
        .enumerate()
        .map(|(i, k)| {
            k.ok_or_else(|| {
                Error::Config(format!("missing germ for {}", spine.label(SpineIndex(i))))
            })
        })
        .collect::<Result<_>>()?;
    Ok(GermMap::Table(kinds))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load_and_validate() {
        let leh3 = FieldConfig::builtin("leh3").unwrap();
        assert_eq!(leh3.spine().rank(), Some(3));
        assert!(leh3.hardy_report().all_ok());
        assert!(!leh3.tower_allowed());

        let logs = FieldConfig::builtin("logs").unwrap();
        assert_eq!(logs.spine().rank(), None);
        assert!(logs.hardy_report().all_ok());
        assert!(logs.tower_allowed());

        assert!(FieldConfig::builtin("nope").is_err());
    }

    #[test]
    fn custom_config_round_trip() {
        let text = "
# a rank-2 field of powers and logs
[spine]
kind = finite
labels = u, v

[logderiv]
u = -u
v = -u*v

[germs]
u = power
v = log(1)
";
        let f = FieldConfig::from_config_str("custom", text).unwrap();
        assert!(f.hardy_report().h3_ok);
        assert!(f.hardy_report().hfield_ok);
        assert!(f.prelog().is_none());
        let du = f.derivation().derive(&f.parse_series("u").unwrap()).unwrap();
        assert_eq!(du, f.parse_series("-u^2").unwrap());
    }

    #[test]
    fn config_errors_are_reported() {
        for (text, needle) in [
            ("[spine]\nkind = weird\n", "unknown spine kind"),
            ("[spine]\nkind = finite\nlabels = a, a\n", "duplicate"),
            (
                "[spine]\nkind = finite\nlabels = a\n[logderiv]\n",
                "missing log-derivative",
            ),
            (
                "[spine]\nkind = naturals\n[logderiv]\ngenerator = nope\n",
                "unknown log-derivative generator",
            ),
            ("no section\n", "outside a section"),
        ] {
            let err = FieldConfig::from_config_str("bad", text).unwrap_err();
            let msg = err.to_string();
            assert!(msg.contains(needle), "{msg} missing {needle}");
        }
    }

    #[test]
    fn germ_ordering_enforced() {
        let text = "
[spine]
kind = finite
labels = a, b

[logderiv]
a = -a
b = -a*b

[germs]
a = log(1)
b = power
";
        assert!(matches!(
            FieldConfig::from_config_str("bad", text),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn right_shift_template_field() {
        let text = "
[spine]
kind = naturals

[logderiv]
generator = right-shift
coeff = -1
template = -1, 1/2
";
        let f = FieldConfig::from_config_str("shift", text).unwrap();
        let report = f.hardy_report();
        assert!(report.h3_ok && report.hfield_ok && report.c1c2_ok);
        // theta_n = -1_{n+1} + 1/2 1_{n+2}
        let ld = f.derivation().logderiv(SpineIndex(0)).unwrap();
        assert_eq!(ld, f.parse_series("-t1^-1*t2^(1/2)").unwrap());
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3").unwrap(), Coeff::from_integer(3.into()));
        assert_eq!(parse_rational("-1/2").unwrap(), crate::coeff::q(-1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
