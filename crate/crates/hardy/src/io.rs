//! Serialization of profiles and reports.
//!
//! Profiles are JSON arrays of pieces `{"c", "a", "k", "lo", "hi"}` where an
//! unbounded right end is written as the string `"inf"`. Non-finite numbers
//! elsewhere become `"inf"`, `"-inf"` or `null`.

use std::fs;
use std::io::Write;
use std::path::Path;

use hardy_core::limiting::LimitTrace;
use hardy_core::oracle::{Lemma21Row, McEstimate, NormContraction};
use hardy_core::profile::FlatTerm;
use hardy_core::sharpness::SharpnessReport;
use hardy_core::{RadialProfile, SpaceParams, WeakNormResult};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

/// Columns of a report row, in order.
pub const REPORT_COLUMNS: [&str; 12] = [
    "n",
    "p",
    "q",
    "alpha",
    "beta",
    "gamma",
    "kind",
    "formula",
    "ratio",
    "gap",
    "witness_lambda",
    "family_param",
];

/// Extra columns of a sweep row: `ok` or the error tag, and the message.
pub const SWEEP_EXTRA_COLUMNS: [&str; 2] = ["status", "reason"];

pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn read_num(v: &Value, key: &str) -> CliResult<f64> {
    match v.get(key) {
        Some(Value::Number(x)) => x
            .as_f64()
            .ok_or_else(|| CliError::ProfileJson(format!("`{key}` is not a float"))),
        Some(Value::String(s)) if s == "inf" => Ok(f64::INFINITY),
        Some(other) => Err(CliError::ProfileJson(format!("`{key}` must be a number, got {other}"))),
        None => Err(CliError::ProfileJson(format!("missing `{key}`"))),
    }
}

/// Text of a float in tables and CSV: shortest round-trip form.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, fmt_num)
}

pub fn profile_from_json(text: &str) -> CliResult<RadialProfile> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::ProfileJson(e.to_string()))?;
    let items = value
        .as_array()
        .ok_or_else(|| CliError::ProfileJson("expected an array of pieces".into()))?;
    let mut flat = Vec::with_capacity(items.len());
    for item in items {
        if !item.is_object() {
            return Err(CliError::ProfileJson(format!("piece must be an object, got {item}")));
        }
        let k = match item.get("k") {
            None => 0,
            Some(v) => v
                .as_u64()
                .and_then(|k| u32::try_from(k).ok())
                .ok_or_else(|| CliError::ProfileJson(format!("`k` must be a small non-negative integer, got {v}")))?,
        };
        flat.push(FlatTerm {
            c: read_num(item, "c")?,
            a: read_num(item, "a")?,
            k,
            lo: read_num(item, "lo")?,
            hi: read_num(item, "hi")?,
        });
    }
    Ok(RadialProfile::from_flat(&flat)?)
}

pub fn profile_to_json(f: &RadialProfile) -> Value {
    Value::Array(
        f.to_flat()
            .iter()
            .map(|t| json!({"c": num(t.c), "a": num(t.a), "k": t.k, "lo": num(t.lo), "hi": num(t.hi)}))
            .collect(),
    )
}

pub fn params_json(sp: &SpaceParams) -> Value {
    json!({
        "n": sp.n,
        "p": num(sp.p),
        "q": num(sp.q),
        "alpha": num(sp.alpha),
        "beta": num(sp.beta),
        "gamma": num(sp.gamma),
    })
}

pub fn report_json(r: &SharpnessReport) -> Value {
    let mut m = Map::new();
    m.insert("params".into(), params_json(&r.params));
    m.insert("kind".into(), json!(r.kind.tag()));
    m.insert("formula_constant".into(), num(r.formula_constant));
    m.insert("test_function".into(), json!(r.test_function));
    m.insert("profile".into(), profile_to_json(&r.profile));
    m.insert("ratio".into(), num(r.ratio));
    m.insert("gap".into(), num(r.gap));
    m.insert("witness_lambda".into(), opt_num(r.witness_lambda));
    m.insert("attained".into(), json!(r.attained.tag()));
    m.insert("family_param".into(), opt_num(r.family_param));
    m.insert("direct_ratio".into(), opt_num(r.direct_ratio));
    m.insert("note".into(), r.note.as_ref().map_or(Value::Null, |s| json!(s)));
    Value::Object(m)
}

pub fn report_record(r: &SharpnessReport) -> Vec<String> {
    let sp = &r.params;
    vec![
        sp.n.to_string(),
        fmt_num(sp.p),
        fmt_num(sp.q),
        fmt_num(sp.alpha),
        fmt_num(sp.beta),
        fmt_num(sp.gamma),
        r.kind.tag().to_string(),
        fmt_num(r.formula_constant),
        fmt_num(r.ratio),
        fmt_num(r.gap),
        fmt_opt(r.witness_lambda),
        fmt_opt(r.family_param),
    ]
}

pub fn weak_norm_json(w: &WeakNormResult) -> Value {
    json!({
        "value": num(w.value),
        "witness_lambda": opt_num(w.witness_lambda),
        "attained": w.attained.tag(),
        "probes": w.probes.iter().map(|p| json!({"lambda": num(p.lambda), "score": num(p.score)})).collect::<Vec<_>>(),
    })
}

pub fn limit_summary_json(t: &LimitTrace) -> Value {
    json!({
        "limit": num(t.extrapolated_limit),
        "target": num(t.target),
        "rel_err": num(t.rel_err()),
    })
}

pub fn mc_json(e: &McEstimate) -> Value {
    json!({
        "mean": num(e.mean),
        "std_error": num(e.std_error),
        "samples": e.samples,
        "seed": e.seed,
    })
}

pub fn lemma21_row_json(r: &Lemma21Row) -> Value {
    json!({
        "radius": num(r.radius),
        "mc": mc_json(&r.mc),
        "radial": num(r.radial),
        "radial_std_error": num(r.radial_std_error),
        "z": num(r.z),
        "pass": r.pass,
        "attempts": r.attempts,
    })
}

pub fn norm_contraction_json(c: &NormContraction) -> Value {
    json!({
        "field": mc_json(&c.field),
        "radial": num(c.radial),
        "radial_std_error": num(c.radial_std_error),
        "pass": c.pass,
    })
}

/// CSV text with a header row.
pub fn csv_text<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|s| s.as_ref()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is built from UTF-8 strings"))
}

/// Left-aligned columns separated by two spaces.
pub fn table_text<S: AsRef<str>>(header: &[&str], rows: &[Vec<S>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.as_ref().len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: Vec<&str>| {
        let text: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(text.join("  ").trim_end());
        out.push('\n');
    };
    line(header.to_vec());
    for row in rows {
        line(row.iter().map(|s| s.as_ref()).collect());
    }
    out
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values built from json! serialize");
    s.push('\n');
    s
}

/// Writes `text` to `out`, or to stdout when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_round_trip() {
        let text = r#"[{"c": 2.0, "a": -0.5, "k": 0, "lo": 0, "hi": 1},
                       {"c": 1.5, "a": -3.0, "lo": 1, "hi": "inf"}]"#;
        let f = profile_from_json(text).unwrap();
        assert_eq!(f.support_end(), f64::INFINITY);
        let back = profile_from_json(&profile_to_json(&f).to_string()).unwrap();
        for r in [0.1, 0.9, 1.0, 7.0] {
            let (a, b) = (f.evaluate(r).unwrap(), back.evaluate(r).unwrap());
            assert!((a - b).abs() <= 1e-15 * a.abs());
        }
    }

    #[test]
    fn malformed_profiles_are_rejected() {
        for bad in ["{", "{}", "[1]", r#"[{"c": 1, "a": 0, "lo": 0}]"#, r#"[{"c": "x", "a": 0, "lo": 0, "hi": 1}]"#] {
            assert!(matches!(profile_from_json(bad), Err(CliError::ProfileJson(_))), "{bad}");
        }
        // structurally fine but overlapping
        let overlap = r#"[{"c": 1, "a": 0, "lo": 0, "hi": 2}, {"c": 1, "a": 0, "lo": 1, "hi": 3}]"#;
        assert!(matches!(profile_from_json(overlap), Err(CliError::Core { .. })));
    }

    #[test]
    fn numbers_and_tables() {
        assert_eq!(fmt_num(0.1), "0.1");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(num(f64::NEG_INFINITY), json!("-inf"));
        let t = table_text(&["a", "bb"], &[vec!["xxx", "y"]]);
        assert_eq!(t, "a    bb\nxxx  y\n");
        let c = csv_text(&["a", "b"], &[vec!["1", "x,y"]]).unwrap();
        assert_eq!(c, "a,b\n1,\"x,y\"\n");
    }
}
