//! Report serialization: 17-significant-digit floats, canonical JSON with
//! sorted keys, and the tabulated-kernel CSV format.
//!
//! Tabulated CSV layout: first row nodes, second row weights, then one row
//! per matrix row. No header. The interval is reconstructed by centring the
//! weight-sum slack around the node span, which round-trips every built-in
//! rule kind exactly.

use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::quadrature::{Interval, QuadratureRule};
use serde_json::Value;

/// Fixed-width scientific form with 17 significant digits; parsing the
/// output recovers the exact same f64, so emit-parse-emit is stable.
pub fn format_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn format_number(n: &serde_json::Number) -> String {
    if let Some(u) = n.as_u64() {
        u.to_string()
    } else if let Some(i) = n.as_i64() {
        i.to_string()
    } else {
        format_f64(n.as_f64().expect("serde_json number is u64, i64 or f64"))
    }
}

fn escape_json(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn write_value(v: &Value, out: &mut String) {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => out.push_str(&format_number(n)),
        Value::String(s) => out.push_str(&escape_json(s)),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap, so iteration is
            // already sorted by key.
            out.push('{');
            for (i, (k, item)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&escape_json(k));
                out.push(':');
                write_value(item, out);
            }
            out.push('}');
        }
    }
}

/// Canonical single-line JSON: sorted object keys, floats at 17 significant
/// digits, trailing newline.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(v, &mut out);
    out.push('\n');
    out
}

/// (index, eigenvalue) rows in descending order, optionally truncated.
pub fn eigenvalues_csv(eigenvalues: &[f64], top: Option<usize>) -> String {
    let take = top.unwrap_or(eigenvalues.len()).min(eigenvalues.len());
    let mut out = String::from("index,eigenvalue\n");
    for (i, lam) in eigenvalues.iter().take(take).enumerate() {
        out.push_str(&(i + 1).to_string());
        out.push(',');
        out.push_str(&format_f64(*lam));
        out.push('\n');
    }
    out
}

/// Serializes a rule plus samples in the tabulated CSV format.
pub fn tabulated_csv(rule: &QuadratureRule, samples: &Mat) -> String {
    let mut out = String::new();
    let row_of = |vals: &[f64], out: &mut String| {
        for (i, v) in vals.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format_f64(*v));
        }
        out.push('\n');
    };
    row_of(rule.nodes(), &mut out);
    row_of(rule.weights(), &mut out);
    for i in 0..samples.rows() {
        row_of(samples.row(i), &mut out);
    }
    out
}

fn parse_row(line: &str, line_no: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|tok| {
            let v: f64 = tok
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("CSV line {line_no}: cannot parse `{tok}`")))?;
            if !v.is_finite() {
                return Err(Error::invalid(format!("CSV line {line_no}: non-finite entry")));
            }
            Ok(v)
        })
        .collect()
}

/// Parses the tabulated CSV format back into a rule and a sample matrix.
pub fn parse_tabulated_csv(text: &str) -> Result<(QuadratureRule, Mat)> {
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    if lines.len() < 3 {
        return Err(Error::invalid("tabulated CSV needs nodes, weights and matrix rows".to_string()));
    }
    let nodes = parse_row(lines[0], 1)?;
    let weights = parse_row(lines[1], 2)?;
    let n = nodes.len();
    if weights.len() != n {
        return Err(Error::invalid("tabulated CSV: node and weight rows differ in length".to_string()));
    }
    if lines.len() - 2 != n {
        return Err(Error::invalid(format!(
            "tabulated CSV: expected {n} matrix rows, found {}",
            lines.len() - 2
        )));
    }
    let mut rows = Vec::with_capacity(n);
    for (k, line) in lines[2..].iter().enumerate() {
        let row = parse_row(line, k + 3)?;
        if row.len() != n {
            return Err(Error::invalid(format!("tabulated CSV: matrix row {} is not length {n}", k + 1)));
        }
        rows.push(row);
    }
    let samples = Mat::from_rows(rows).expect("row lengths checked");

    // Recover [a, b]: the weight sum fixes the length; centre the slack
    // around the node span (exact for Gauss, midpoint and trapezoid rules).
    let span = nodes[n - 1] - nodes[0];
    let length: f64 = weights.iter().sum();
    let mut slack = length - span;
    if slack < 0.0 {
        if slack < -1e-9 * length.abs().max(1.0) {
            return Err(Error::invalid("tabulated CSV: weights sum to less than the node span".to_string()));
        }
        slack = 0.0;
    }
    let a = nodes[0] - 0.5 * slack;
    let b = nodes[n - 1] + 0.5 * slack;
    let iv = Interval::new(a, b)?;
    // from_parts re-checks monotonicity, positivity and the weight sum.
    let rule = QuadratureRule::from_parts(iv, nodes, weights)?;
    Ok((rule, samples))
}
