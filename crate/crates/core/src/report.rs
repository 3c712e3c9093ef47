//! Report serialization: fixed 12-significant-digit numbers, JSON documents
//! and the CSV summary.

use std::io;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::constants::KConstantReport;
use crate::verify::{BatteryRow, SharpnessReport, Status, VerificationReport};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` to 12 significant digits with trailing zeros removed; positional for
/// moderate exponents, scientific otherwise. Non-finite values become
/// `inf`, `-inf` or `nan`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    if !(-5..15).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        let frac = if tail.is_empty() { String::new() } else { format!(".{tail}") };
        return format!("{sign}{head}{frac}e{exp}");
    }
    let point = exp + 1;
    let body = if point <= 0 {
        format!("0.{}{}", "0".repeat((-point) as usize), digits)
    } else if point as usize >= digits.len() {
        format!("{}{}", digits, "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

/// JSON value of a number after 12-digit rounding; non-finite values become
/// strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        let rounded: f64 = fmt_num(x).parse().expect("formatted number parses");
        json!(rounded)
    } else {
        Value::String(fmt_num(x))
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

pub fn verification_json(r: &VerificationReport) -> Value {
    let diagnostics: Map<String, Value> = r.diagnostics.iter().map(|(k, v)| (k.clone(), num(*v))).collect();
    json!({
        "name": r.name,
        "lhs": num(r.lhs),
        "rhs": num(r.rhs),
        "slack": num(r.slack),
        "relative_slack": num(r.relative_slack),
        "passed": r.passed,
        "status": r.status.to_string(),
        "diagnostics": diagnostics,
        "notes": r.notes,
    })
}

pub fn kconstant_json(k: &KConstantReport) -> Value {
    json!({
        "value": num(k.value),
        "attaining_x": opt(k.attaining_x),
        "sup_terms": [num(k.sup_terms.0), num(k.sup_terms.1)],
        "sup_points": [opt(k.sup_points.0), opt(k.sup_points.1)],
        "refinement_history": k.refinement_history.iter().map(|(n, v)| json!([n, num(*v)])).collect::<Vec<_>>(),
        "converged": k.converged,
        "upper_estimate": num(k.upper_estimate),
        "infinite_at": opt(k.infinite_at),
        "notes": k.notes,
    })
}

pub fn sharpness_json(s: &SharpnessReport) -> Value {
    json!({
        "axis": match s.axis { crate::function::Axis::X => 1, crate::function::Axis::Y => 2 },
        "constant": num(s.constant),
        "k_tilde": kconstant_json(&s.k_tilde),
        "sup_ratio": num(s.sup_ratio),
        "sup_raw_ratio": num(s.sup_raw_ratio),
        "monotone": s.monotone,
        "growth": s.growth.iter().map(|(d, r)| json!([num(*d), num(*r)])).collect::<Vec<_>>(),
        "growth_factors": s.growth_factors.iter().map(|&g| num(g)).collect::<Vec<_>>(),
        "rows": s.rows.iter().map(|r| json!({
            "c": num(r.c),
            "delta": num(r.delta),
            "lhs": num(r.lhs),
            "norm": num(r.norm),
            "raw_ratio": num(r.raw_ratio),
            "ratio": num(r.ratio),
        })).collect::<Vec<_>>(),
    })
}

pub const CSV_HEADER: [&str; 8] = ["name", "lhs", "rhs", "slack", "relative_slack", "passed", "seed", "grid"];

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

/// Finite numbers unquoted, non-finite ones as quoted strings.
fn csv_num(x: f64) -> String {
    if x.is_finite() {
        fmt_num(x)
    } else {
        quoted(&fmt_num(x))
    }
}

/// CSV summary with one row per report; `passed` is `true`, `false` or
/// `skipped`.
pub fn csv_bytes(rows: &[BatteryRow], seed: u64) -> Vec<u8> {
    let mut out = CSV_HEADER.map(quoted).join(",");
    out.push('\n');
    for row in rows {
        let r = &row.report;
        let passed = match r.status {
            Status::Skipped => "skipped",
            _ if r.passed => "true",
            _ => "false",
        };
        let fields = [
            quoted(&r.name),
            csv_num(r.lhs),
            csv_num(r.rhs),
            csv_num(r.slack),
            csv_num(r.relative_slack),
            quoted(passed),
            seed.to_string(),
            quoted(&row.grid),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

pub fn write_json(path: &Path, value: &Value) -> io::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}
