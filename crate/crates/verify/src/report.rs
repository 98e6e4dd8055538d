//! Result serialization: JSON-lines with full instance descriptions and a
//! summary CSV. Both formats are byte-stable: fixed column order, floats
//! printed with 17 significant digits, and no locale or map-order effects.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::check::CheckResult;

/// A float rendered with 17 significant digits, round-trip exact.
pub fn float_repr(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".to_string()
    } else if x > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn json_number(x: f64) -> String {
    // {:.16e} is a valid JSON number for finite values; the rest need null.
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

/// One JSON-lines record carrying the full instance description.
pub fn jsonl_line(r: &CheckResult) -> String {
    format!(
        "{{\"statement_id\":\"{}\",\"instance\":\"{}\",\"instance_hash\":\"{:016x}\",\"lhs\":{},\"rhs\":{},\"margin\":{},\"pass\":{},\"method\":\"{}\",\"seed\":{}}}",
        json_escape(&r.statement_id),
        json_escape(&r.instance),
        r.instance_hash(),
        json_number(r.lhs),
        json_number(r.rhs),
        json_number(r.margin),
        r.pass,
        json_escape(&r.method),
        r.seed
    )
}

pub const CSV_HEADER: &str = "statement_id,instance_hash,lhs,rhs,margin,pass,method,seed";

fn csv_field(s: &str) -> String {
    // Methods and ids are comma-free by construction; quote defensively if not.
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV summary row in the fixed column order.
pub fn csv_line(r: &CheckResult) -> String {
    format!(
        "{},{:016x},{},{},{},{},{},{}",
        csv_field(&r.statement_id),
        r.instance_hash(),
        float_repr(r.lhs),
        float_repr(r.rhs),
        float_repr(r.margin),
        r.pass,
        csv_field(&r.method),
        r.seed
    )
}

/// Renders the whole result list as a JSON-lines document.
pub fn render_jsonl(results: &[CheckResult]) -> String {
    let mut out = String::new();
    for r in results {
        out.push_str(&jsonl_line(r));
        out.push('\n');
    }
    out
}

/// Renders the whole result list as a CSV document with header.
pub fn render_csv(results: &[CheckResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        out.push_str(&csv_line(r));
        out.push('\n');
    }
    out
}

/// Writes both artifacts under `dir` as `<name>.jsonl` and `<name>.csv`.
/// Refuses an empty result list rather than emitting empty files.
pub fn write_reports(
    dir: &Path,
    name: &str,
    results: &[CheckResult],
) -> std::io::Result<(PathBuf, PathBuf)> {
    if results.is_empty() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "refusing to write an empty report",
        ));
    }
    fs::create_dir_all(dir)?;
    let jsonl_path = dir.join(format!("{name}.jsonl"));
    let csv_path = dir.join(format!("{name}.csv"));
    let mut jf = fs::File::create(&jsonl_path)?;
    jf.write_all(render_jsonl(results).as_bytes())?;
    let mut cf = fs::File::create(&csv_path)?;
    cf.write_all(render_csv(results).as_bytes())?;
    Ok((jsonl_path, csv_path))
}
