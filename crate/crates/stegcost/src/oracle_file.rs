//! Plain-text oracle weights.
//!
//! ```text
//! oracle v1 kind=linear-residual dims=14 T=3
//! <dims whitespace-separated weights>
//! <bias>
//! ```
//!
//! A `filter-logit` oracle stores its gain as the single weight (`dims=1`, no
//! `T`). Numbers use the shortest representation that parses back to the same
//! `f64`.

use std::fmt::Write as _;

use stegcost_core::features::feature_dim;
use stegcost_core::{FilterLogitOracle, LinearResidualOracle, Oracle};
use thiserror::Error;

pub const ORACLE_FORMAT_VERSION: &str = "v1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleFileError {
    #[error("line {line}: {what}")]
    Syntax { line: usize, what: String },
    #[error("oracle kind `{0}` cannot be stored in a weights file")]
    Unsupported(&'static str),
}

fn syntax(line: usize, what: impl Into<String>) -> OracleFileError {
    OracleFileError::Syntax { line, what: what.into() }
}

pub fn write_oracle(oracle: &Oracle) -> Result<String, OracleFileError> {
    let (header, weights, bias) = match oracle {
        Oracle::LinearResidual(o) => (
            format!("kind={} dims={} T={}", LinearResidualOracle::KIND, o.weights().len(), o.threshold()),
            o.weights().to_vec(),
            o.bias(),
        ),
        Oracle::FilterLogit(o) => (format!("kind={} dims=1", FilterLogitOracle::KIND), vec![o.gain], o.bias),
        other => return Err(OracleFileError::Unsupported(other.kind())),
    };
    let mut out = format!("oracle {ORACLE_FORMAT_VERSION} {header}\n");
    let line: Vec<String> = weights.iter().map(|w| format!("{w:?}")).collect();
    out.push_str(&line.join(" "));
    let _ = writeln!(out, "\n{bias:?}");
    Ok(out)
}

pub fn read_oracle(text: &str) -> Result<Oracle, OracleFileError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| syntax(1, "empty file"))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some("oracle") {
        return Err(syntax(1, "header must start with `oracle`"));
    }
    match fields.next() {
        Some(ORACLE_FORMAT_VERSION) => {}
        Some(v) => return Err(syntax(1, format!("unsupported version `{v}`"))),
        None => return Err(syntax(1, "missing version")),
    }
    let (mut kind, mut dims, mut threshold) = (None, None, None);
    for field in fields {
        let (key, value) = field.split_once('=').ok_or_else(|| syntax(1, format!("expected key=value, got `{field}`")))?;
        let bad = || syntax(1, format!("bad value for `{key}`"));
        match key {
            "kind" => kind = Some(value),
            "dims" => dims = Some(value.parse::<usize>().map_err(|_| bad())?),
            "T" => threshold = Some(value.parse::<u32>().map_err(|_| bad())?),
            _ => return Err(syntax(1, format!("unknown header key `{key}`"))),
        }
    }
    let dims = dims.ok_or_else(|| syntax(1, "missing dims"))?;

    let mut numbers = Vec::with_capacity(dims + 1);
    for (i, line) in lines.enumerate() {
        for token in line.split_whitespace() {
            let v: f64 = token.parse().map_err(|_| syntax(i + 2, format!("not a number: `{token}`")))?;
            if !v.is_finite() {
                return Err(syntax(i + 2, format!("non-finite value `{token}`")));
            }
            numbers.push(v);
        }
    }
    if numbers.len() != dims + 1 {
        return Err(syntax(1, format!("expected {} numbers ({dims} weights and a bias), found {}", dims + 1, numbers.len())));
    }
    let bias = numbers.pop().unwrap();

    match kind {
        Some(LinearResidualOracle::KIND) => {
            let t = threshold.ok_or_else(|| syntax(1, "missing T"))?;
            if dims != feature_dim(t) {
                return Err(syntax(1, format!("dims={dims} does not match T={t} (expected {})", feature_dim(t))));
            }
            LinearResidualOracle::new(t, numbers, bias)
                .map(Oracle::from)
                .map_err(|e| syntax(1, e.to_string()))
        }
        Some(FilterLogitOracle::KIND) => {
            if dims != 1 || threshold.is_some() {
                return Err(syntax(1, "filter-logit takes dims=1 and no T"));
            }
            Ok(FilterLogitOracle::new(numbers[0], bias).into())
        }
        Some(other) => Err(syntax(1, format!("unknown oracle kind `{other}`"))),
        None => Err(syntax(1, "missing kind")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use stegcost_core::PixelPolynomialOracle;

    #[test]
    fn linear_round_trip_is_exact() {
        let weights: Vec<f64> = (0..14).map(|i| (i as f64 - 6.5) / 3.0 * 1e-7f64.powi(i % 3)).collect();
        let oracle: Oracle = LinearResidualOracle::new(3, weights, -0.1).unwrap().into();
        let text = write_oracle(&oracle).unwrap();
        assert!(text.starts_with("oracle v1 kind=linear-residual dims=14 T=3\n"));
        assert_eq!(read_oracle(&text).unwrap(), oracle);
    }

    #[test]
    fn filter_logit_round_trip() {
        let oracle: Oracle = FilterLogitOracle::new(0.05, -2.0).into();
        let text = write_oracle(&oracle).unwrap();
        assert_eq!(text, "oracle v1 kind=filter-logit dims=1\n0.05\n-2.0\n");
        assert_eq!(read_oracle(&text).unwrap(), oracle);
    }

    #[test]
    fn malformed_files() {
        assert!(read_oracle("").is_err());
        assert!(read_oracle("oracle v2 kind=filter-logit dims=1\n1\n2\n").is_err());
        assert!(read_oracle("oracle v1 kind=filter-logit dims=1\n1\n").is_err());
        assert!(read_oracle("oracle v1 kind=linear-residual dims=4 T=3\n1 2 3 4\n0\n").is_err());
        assert!(read_oracle("oracle v1 kind=filter-logit dims=1\nNaN\n0\n").is_err());
        assert_eq!(
            read_oracle("oracle v1 kind=filter-logit dims=1\n1 x\n"),
            Err(OracleFileError::Syntax { line: 2, what: "not a number: `x`".into() })
        );
        let poly: Oracle = PixelPolynomialOracle::quadratic((0, 0), 1.0, 0.0, 0.0).into();
        assert!(matches!(write_oracle(&poly), Err(OracleFileError::Unsupported(_))));
    }
}
