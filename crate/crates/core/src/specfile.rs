//! Line-oriented metric spec files (`.bwm`).
//!
//! ```text
//! metric "name"
//! family binary-general|table1-i|table1-ii|table1-iii|table1-iv|case-iv
//! m <rational>                    # table1-iv / case-iv
//! phi12 expr <expression>         # binary-general: all six pairs
//! U1 expr <expression>            # table rows: U1..U4, V1..V4, Q1..Q4
//! F1 expr <expression> | F1 poly <a0> <a1> ...
//! M expr <expression>
//! domain ordered|unordered
//! box x1 <lo> <hi>
//! ```
//!
//! Table rows take their one-variable functions (`U`, `V`, `Q`) and free
//! pair entries (`phi12` for rows i and ii, `phi34` for row i). Row iv and
//! case iv default to the ordered chart and `U_i = x^i`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::expr::{parse, Expr};
use crate::metric::{make_table1, CoordFn, Domain, Family, MetricSpec, Table1Row, PAIRS};
use crate::scalar::{format_rational, parse_rational};
use crate::Error;

struct Entry {
    line: usize,
    rest: String,
}

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::SpecFile {
        line,
        message: message.into(),
    }
}

fn strip_comment(line: &str) -> &str {
    // '#' inside a quoted name is not a comment
    let mut quoted = false;
    for (i, c) in line.char_indices() {
        match c {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn is_known_key(key: &str) -> bool {
    const FIXED: [&str; 5] = ["metric", "family", "m", "M", "domain"];
    if FIXED.contains(&key) {
        return true;
    }
    if PAIRS.iter().any(|&(i, j)| key == format!("phi{}{}", i + 1, j + 1)) {
        return true;
    }
    let bytes = key.as_bytes();
    bytes.len() == 2 && matches!(bytes[0], b'F' | b'U' | b'V' | b'Q') && matches!(bytes[1], b'1'..=b'4')
}

fn parse_expr_value(e: &Entry, key: &str) -> Result<Expr, Error> {
    let rest = e.rest.trim();
    let body = rest
        .strip_prefix("expr")
        .filter(|b| b.starts_with(char::is_whitespace))
        .ok_or_else(|| err(e.line, format!("{key} must be followed by `expr <expression>`")))?;
    parse(body.trim()).map_err(|pe| err(e.line, format!("{key}: {pe}")))
}

fn parse_coord_fn(e: &Entry, key: &str, var: usize) -> Result<CoordFn, Error> {
    let rest = e.rest.trim();
    if let Some(body) = rest.strip_prefix("poly").filter(|b| b.is_empty() || b.starts_with(char::is_whitespace)) {
        let coeffs = body
            .split_whitespace()
            .map(|t| parse_rational(t).ok_or_else(|| err(e.line, format!("{key}: bad coefficient {t:?}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if coeffs.is_empty() {
            return Err(err(e.line, format!("{key} poly needs at least one coefficient")));
        }
        Ok(CoordFn::poly(var, coeffs))
    } else {
        Ok(CoordFn::expr(parse_expr_value(e, key)?))
    }
}

/// Parses spec-file text into a validated [`MetricSpec`].
pub fn parse_spec(text: &str) -> Result<MetricSpec, Error> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut boxes: [Option<(f64, f64)>; 4] = [None; 4];
    let mut last_line = 0;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        last_line = line;
        let content = strip_comment(raw).trim();
        if content.is_empty() {
            continue;
        }
        let (key, rest) = content.split_once(char::is_whitespace).unwrap_or((content, ""));
        if key == "box" {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [var, lo, hi] = parts.as_slice() else {
                return Err(err(line, "box needs `box xN <lo> <hi>`"));
            };
            let idx = match *var {
                "x1" => 0,
                "x2" => 1,
                "x3" => 2,
                "x4" => 3,
                other => return Err(err(line, format!("unknown box variable {other:?}"))),
            };
            let num = |t: &str| -> Result<f64, Error> {
                parse_rational(t)
                    .map(|r| crate::scalar::rational_to_f64(&r))
                    .ok_or_else(|| err(line, format!("bad box bound {t:?}")))
            };
            let (lo, hi) = (num(lo)?, num(hi)?);
            if lo > hi {
                return Err(err(line, format!("empty box [{lo}, {hi}]")));
            }
            if boxes[idx].replace((lo, hi)).is_some() {
                return Err(err(line, format!("duplicate box for {var}")));
            }
            continue;
        }
        if !is_known_key(key) {
            return Err(err(line, format!("unknown key {key:?}")));
        }
        if entries.contains_key(key) {
            return Err(err(line, format!("duplicate key {key:?}")));
        }
        entries.insert(key.to_string(), Entry { line, rest: rest.to_string() });
    }

    let end = last_line + 1;
    let require = |key: &str| entries.get(key).ok_or_else(|| err(end, format!("missing mandatory `{key}` line")));

    let name = match entries.get("metric") {
        Some(e) => {
            let r = e.rest.trim();
            r.strip_prefix('"')
                .and_then(|s| s.strip_suffix('"'))
                .ok_or_else(|| err(e.line, "metric name must be quoted"))?
                .to_string()
        }
        None => "unnamed".to_string(),
    };
    let family_entry = require("family")?;
    let family: Family = family_entry
        .rest
        .trim()
        .parse()
        .map_err(|e: Error| err(family_entry.line, e.to_string()))?;

    let m = match entries.get("m") {
        Some(e) => Some(parse_rational(e.rest.trim()).ok_or_else(|| err(e.line, format!("bad rational {:?}", e.rest.trim())))?),
        None => None,
    };
    if family.has_parameter() != m.is_some() {
        let line = entries.get("m").map_or(family_entry.line, |e| e.line);
        return Err(err(
            line,
            if family.has_parameter() {
                format!("family {family} requires an `m` line")
            } else {
                format!("family {family} does not take `m`")
            },
        ));
    }

    let mut f: Vec<CoordFn> = Vec::with_capacity(4);
    for i in 0..4 {
        let key = format!("F{}", i + 1);
        f.push(parse_coord_fn(require(&key)?, &key, i)?);
    }
    let f: [CoordFn; 4] = f.try_into().expect("four F");
    let conformal = parse_expr_value(require("M")?, "M")?;

    let used = |keys: &[String]| -> Result<(), Error> {
        for (k, e) in &entries {
            let generic = ["metric", "family", "m", "M", "domain"].contains(&k.as_str()) || k.starts_with('F');
            if !generic && !keys.contains(k) {
                return Err(err(e.line, format!("key {k:?} is not used by family {family}")));
            }
        }
        Ok(())
    };
    let fns = |prefix: char, default_identity: bool| -> Result<[Expr; 4], Error> {
        let mut out = Vec::with_capacity(4);
        for i in 0..4 {
            let key = format!("{prefix}{}", i + 1);
            out.push(match entries.get(&key) {
                Some(e) => parse_expr_value(e, &key)?,
                None if default_identity => Expr::var(i),
                None => return Err(err(end, format!("missing mandatory `{key}` line"))),
            });
        }
        Ok(out.try_into().expect("four functions"))
    };
    let keys = |spec: &[&str]| -> Vec<String> {
        spec.iter()
            .flat_map(|s| {
                if s.len() == 1 {
                    (1..=4).map(|i| format!("{s}{i}")).collect::<Vec<_>>()
                } else {
                    vec![s.to_string()]
                }
            })
            .collect()
    };
    let phi_entry = |key: &str| -> Result<Expr, Error> { parse_expr_value(require(key)?, key) };

    let wrap = |e: Error, line: usize| match e {
        Error::InvalidMetric(msg) => err(line, msg),
        other => other,
    };
    let mut spec = match family {
        Family::BinaryGeneral => {
            let pair_keys: Vec<String> = PAIRS.iter().map(|&(i, j)| format!("phi{}{}", i + 1, j + 1)).collect();
            used(&pair_keys)?;
            let mut phi = Vec::with_capacity(6);
            for k in &pair_keys {
                phi.push(phi_entry(k)?);
            }
            MetricSpec::binary(&name, phi.try_into().expect("six phi"), f, conformal).map_err(|e| wrap(e, end))?
        }
        Family::CaseIV => {
            used(&[])?;
            MetricSpec::case_iv(&name, m.clone().expect("checked"), f, conformal).map_err(|e| wrap(e, end))?
        }
        Family::Table1I | Family::Table1II | Family::Table1III | Family::Table1IV => {
            let row = match family {
                Family::Table1I => {
                    used(&keys(&["U", "phi12", "phi34"]))?;
                    Table1Row::I { u: fns('U', false)?, phi12: phi_entry("phi12")?, phi34: phi_entry("phi34")? }
                }
                Family::Table1II => {
                    used(&keys(&["U", "V", "Q", "phi12"]))?;
                    Table1Row::II { u: fns('U', false)?, v: fns('V', false)?, q: fns('Q', false)?, phi12: phi_entry("phi12")? }
                }
                Family::Table1III => {
                    used(&keys(&["U", "V", "Q"]))?;
                    Table1Row::III { u: fns('U', false)?, v: fns('V', false)?, q: fns('Q', false)? }
                }
                _ => {
                    used(&keys(&["U"]))?;
                    Table1Row::IV { u: fns('U', true)?, m: m.clone().expect("checked") }
                }
            };
            let mut s = make_table1(&name, row, f, conformal).map_err(|e| wrap(e, end))?;
            if family == Family::Table1IV {
                s.domain = Domain::ordered_chart();
            }
            s
        }
    };

    if let Some(e) = entries.get("domain") {
        match e.rest.trim() {
            "ordered" => {
                if !spec.domain.ordered {
                    spec.domain = Domain::ordered_chart();
                }
            }
            "unordered" => spec.domain = Domain::default(),
            other => return Err(err(e.line, format!("unknown domain constraint {other:?}"))),
        }
    }
    for (i, b) in boxes.iter().enumerate() {
        if let Some(b) = b {
            spec.domain.boxes[i] = *b;
        }
    }
    spec.validate().map_err(|e| wrap(e, end))?;
    Ok(spec)
}

/// Spec-file text for a spec. General and case-iv families round-trip
/// through [`parse_spec`]; table rows are written in their expanded
/// `binary-general` form.
pub fn write_spec(spec: &MetricSpec) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "metric \"{}\"", spec.name);
    let family = match spec.family {
        Family::CaseIV => Family::CaseIV,
        Family::Table1IV => Family::Table1IV,
        _ => Family::BinaryGeneral,
    };
    let _ = writeln!(out, "family {family}");
    if let Some(m) = &spec.m {
        let _ = writeln!(out, "m {}", format_rational(m));
    }
    if family == Family::BinaryGeneral {
        for (p, &(i, j)) in PAIRS.iter().enumerate() {
            let _ = writeln!(out, "phi{}{} expr {}", i + 1, j + 1, spec.phi[p]);
        }
    }
    if family == Family::Table1IV {
        if let Some(u) = &spec.log_base {
            for (i, e) in u.iter().enumerate() {
                let _ = writeln!(out, "U{} expr {e}", i + 1);
            }
        }
    }
    for (i, f) in spec.f.iter().enumerate() {
        match &f.poly {
            Some(c) => {
                let cs: Vec<String> = c.iter().map(format_rational).collect();
                let _ = writeln!(out, "F{} poly {}", i + 1, cs.join(" "));
            }
            None => {
                let _ = writeln!(out, "F{} expr {}", i + 1, f.expr);
            }
        }
    }
    let _ = writeln!(out, "M expr {}", spec.conformal);
    let _ = writeln!(out, "domain {}", if spec.domain.ordered { "ordered" } else { "unordered" });
    for (i, (lo, hi)) in spec.domain.boxes.iter().enumerate() {
        let _ = writeln!(out, "box x{} {lo:e} {hi:e}", i + 1);
    }
    out
}
