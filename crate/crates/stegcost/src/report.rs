//! JSON encoding of sweep reports.
//!
//! Real numbers are rounded to 12 significant digits before they are written,
//! so a decoded report re-encodes to the same bytes.

use serde_json::{json, Map, Value};
use stegcost_core::eval::{CostMethod, ExperimentReport, SweepRecord, SweepSummary, REPORT_VERSION};
use stegcost_core::Rule;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("invalid report JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("report field `{0}` is missing or has the wrong type")]
    Field(String),
    #[error("unsupported report version {0}")]
    Version(u64),
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap()
}

fn num(x: f64) -> Value {
    json!(round12(x))
}

fn summary_json(c: &SweepSummary) -> Value {
    json!({
        "cover_count": c.cover_count,
        "oracle_kind": c.oracle_kind,
        "oracle_id": c.oracle_id,
        "methods": c.methods.iter().map(|m| m.as_str()).collect::<Vec<_>>(),
        "filter_sizes": c.filter_sizes,
        "payloads": c.payloads.iter().map(|&a| num(a)).collect::<Vec<_>>(),
        "seeds": c.seeds,
        "train_count": c.train_count,
        "test_count": c.test_count,
        "rule": c.rule.as_str(),
        "detector": {
            "epochs": c.detector_epochs,
            "rate": num(c.detector_rate),
            "l2": num(c.detector_l2),
        },
        "feature_threshold": c.feature_threshold,
    })
}

fn record_json(r: &SweepRecord) -> Value {
    let mut m = Map::new();
    m.insert("method".into(), json!(r.method.as_str()));
    m.insert("oracle_id".into(), json!(r.oracle_id));
    m.insert("filter_size".into(), json!(r.filter_size));
    m.insert("payload".into(), num(r.payload));
    m.insert("rule".into(), json!(r.rule.as_str()));
    m.insert("seed".into(), json!(r.seed));
    m.insert("split_seed".into(), json!(r.split_seed));
    m.insert("embed_seed".into(), json!(r.embed_seed));
    m.insert("train_seed".into(), json!(r.train_seed));
    m.insert("detection_error".into(), num(r.detection_error));
    m.insert("false_alarm".into(), num(r.false_alarm));
    m.insert("missed_detection".into(), num(r.missed_detection));
    m.insert("change_rate".into(), num(r.change_rate));
    if let Some(t) = r.elapsed_seconds {
        m.insert("elapsed_seconds".into(), num(t));
    }
    Value::Object(m)
}

pub fn report_to_value(report: &ExperimentReport) -> Value {
    json!({
        "version": report.version,
        "config": summary_json(&report.config),
        "records": report.records.iter().map(record_json).collect::<Vec<_>>(),
    })
}

/// Pretty-printed JSON with a trailing newline.
pub fn report_to_json(report: &ExperimentReport) -> String {
    let mut s = serde_json::to_string_pretty(&report_to_value(report)).expect("report values are finite");
    s.push('\n');
    s
}

struct Obj<'a>(&'a Map<String, Value>, &'a str);

impl<'a> Obj<'a> {
    fn get(&self, key: &str) -> Result<&'a Value, ReportError> {
        self.0.get(key).ok_or_else(|| self.err(key))
    }

    fn err(&self, key: &str) -> ReportError {
        ReportError::Field(format!("{}{key}", self.1))
    }

    fn f64(&self, key: &str) -> Result<f64, ReportError> {
        self.get(key)?.as_f64().ok_or_else(|| self.err(key))
    }

    fn u64(&self, key: &str) -> Result<u64, ReportError> {
        self.get(key)?.as_u64().ok_or_else(|| self.err(key))
    }

    fn str(&self, key: &str) -> Result<&'a str, ReportError> {
        self.get(key)?.as_str().ok_or_else(|| self.err(key))
    }

    fn array(&self, key: &str) -> Result<&'a Vec<Value>, ReportError> {
        self.get(key)?.as_array().ok_or_else(|| self.err(key))
    }

    fn object(&self, key: &str, prefix: &'a str) -> Result<Obj<'a>, ReportError> {
        Ok(Obj(self.get(key)?.as_object().ok_or_else(|| self.err(key))?, prefix))
    }

    fn list<T>(&self, key: &str, f: impl Fn(&Value) -> Option<T>) -> Result<Vec<T>, ReportError> {
        self.array(key)?.iter().map(|v| f(v).ok_or_else(|| self.err(key))).collect()
    }

    fn method(&self, v: &Value, key: &str) -> Result<CostMethod, ReportError> {
        v.as_str().and_then(|s| s.parse().ok()).ok_or_else(|| self.err(key))
    }

    fn rule(&self) -> Result<Rule, ReportError> {
        self.str("rule")?.parse().map_err(|_| self.err("rule"))
    }
}

fn read_record(v: &Value) -> Result<SweepRecord, ReportError> {
    let o = Obj(v.as_object().ok_or_else(|| ReportError::Field("records[]".into()))?, "records[].");
    let oracle_id = match o.get("oracle_id")? {
        Value::Null => None,
        Value::String(s) => Some(s.clone()),
        _ => return Err(o.err("oracle_id")),
    };
    let filter_size = match o.get("filter_size")? {
        Value::Null => None,
        v => Some(v.as_u64().ok_or_else(|| o.err("filter_size"))? as usize),
    };
    let elapsed_seconds = match o.0.get("elapsed_seconds") {
        None => None,
        Some(v) => Some(v.as_f64().ok_or_else(|| o.err("elapsed_seconds"))?),
    };
    Ok(SweepRecord {
        method: o.method(o.get("method")?, "method")?,
        oracle_id,
        filter_size,
        payload: o.f64("payload")?,
        rule: o.rule()?,
        seed: o.u64("seed")?,
        split_seed: o.u64("split_seed")?,
        embed_seed: o.u64("embed_seed")?,
        train_seed: o.u64("train_seed")?,
        detection_error: o.f64("detection_error")?,
        false_alarm: o.f64("false_alarm")?,
        missed_detection: o.f64("missed_detection")?,
        change_rate: o.f64("change_rate")?,
        elapsed_seconds,
    })
}

pub fn report_from_json(text: &str) -> Result<ExperimentReport, ReportError> {
    let root: Value = serde_json::from_str(text)?;
    let top = Obj(root.as_object().ok_or_else(|| ReportError::Field("<root>".into()))?, "");
    let version = top.u64("version")?;
    if version != REPORT_VERSION as u64 {
        return Err(ReportError::Version(version));
    }
    let c = top.object("config", "config.")?;
    let d = c.object("detector", "config.detector.")?;
    let config = SweepSummary {
        cover_count: c.u64("cover_count")? as usize,
        oracle_kind: c.str("oracle_kind")?.to_owned(),
        oracle_id: c.str("oracle_id")?.to_owned(),
        methods: c.array("methods")?.iter().map(|v| c.method(v, "methods")).collect::<Result<_, _>>()?,
        filter_sizes: c.list("filter_sizes", |v| v.as_u64().map(|k| k as usize))?,
        payloads: c.list("payloads", Value::as_f64)?,
        seeds: c.list("seeds", Value::as_u64)?,
        train_count: c.u64("train_count")? as usize,
        test_count: c.u64("test_count")? as usize,
        rule: c.rule()?,
        detector_epochs: d.u64("epochs")? as usize,
        detector_rate: d.f64("rate")?,
        detector_l2: d.f64("l2")?,
        feature_threshold: c.u64("feature_threshold")? as u32,
    };
    let records = top.array("records")?.iter().map(read_record).collect::<Result<_, _>>()?;
    Ok(ExperimentReport { version: version as u32, config, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round12(5.0 / 12.0), 0.416666666667);
        assert_eq!(round12(0.1), 0.1);
        assert_eq!(round12(0.0), 0.0);
        assert_eq!(round12(123456789.0123456), 123456789.012);
        assert_eq!(round12(round12(2.0 / 3.0)), round12(2.0 / 3.0));
    }

    #[test]
    fn bad_documents() {
        assert!(matches!(report_from_json("[]"), Err(ReportError::Field(_))));
        assert!(matches!(report_from_json("{"), Err(ReportError::Json(_))));
        assert!(matches!(
            report_from_json(r#"{"version": 9, "config": {}, "records": []}"#),
            Err(ReportError::Version(9))
        ));
    }
}
