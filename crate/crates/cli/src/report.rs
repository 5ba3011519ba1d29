//! Report rows and their two renderings.
//!
//! Machine mode: one `RESULT k=v k=v …` line per row, keys in insertion
//! order. Human mode: consecutive rows sharing a key set form one aligned
//! table.

use std::fmt::Write as _;

use isoweyl_core::scalar::format_rational;
use isoweyl_core::BigRational;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row {
    fields: Vec<(&'static str, String)>,
}

impl Row {
    pub fn new() -> Self {
        Row::default()
    }

    pub fn with(mut self, key: &'static str, value: impl Into<String>) -> Self {
        let value: String = value.into();
        // key=value tokens are space separated
        let value = value.split_whitespace().collect::<Vec<_>>().join("_");
        self.fields.push((key, if value.is_empty() { "-".into() } else { value }));
        self
    }

    fn keys(&self) -> Vec<&'static str> {
        self.fields.iter().map(|(k, _)| *k).collect()
    }
}

/// 17 significant digits, round-trippable.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Exact value as `p/q`.
pub fn rational(r: &BigRational) -> String {
    format_rational(r)
}

/// Input parameters: integers without a denominator.
pub fn short_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn point_f64(p: &[f64; 4]) -> String {
    p.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",")
}

pub fn point_rational(p: &[BigRational; 4]) -> String {
    p.iter().map(short_rational).collect::<Vec<_>>().join(",")
}

pub fn bool(b: bool) -> String {
    b.to_string()
}

pub fn render(rows: &[Row], machine: bool) -> String {
    let mut out = String::new();
    if machine {
        for row in rows {
            out.push_str("RESULT");
            for (k, v) in &row.fields {
                let _ = write!(out, " {k}={v}");
            }
            out.push('\n');
        }
        return out;
    }
    let mut start = 0;
    while start < rows.len() {
        let keys = rows[start].keys();
        let end = (start..rows.len()).find(|&i| rows[i].keys() != keys).unwrap_or(rows.len());
        let group = &rows[start..end];
        let widths: Vec<usize> = keys
            .iter()
            .enumerate()
            .map(|(c, k)| group.iter().map(|r| r.fields[c].1.len()).fold(k.len(), usize::max))
            .collect();
        let line = |cells: Vec<&str>| -> String {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            padded.join("  ").trim_end().to_string()
        };
        if start > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "{}", line(keys.clone()));
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        let _ = writeln!(out, "{}", rule.join("  "));
        for r in group {
            let _ = writeln!(out, "{}", line(r.fields.iter().map(|(_, v)| v.as_str()).collect()));
        }
        start = end;
    }
    out
}
