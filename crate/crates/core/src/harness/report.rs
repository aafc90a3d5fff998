//! Verification reports and their canonical JSON form.
//!
//! Floats are written with 17 significant digits and a lowercase exponent,
//! keys are sorted, so a report read back and written again is byte
//! identical.

use std::collections::BTreeMap;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;
use serde_json::Value;

use crate::error::{Error, Result};

/// One checked instance of an identity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub name: String,
    pub parameters: BTreeMap<String, Value>,
    /// `None` when evaluation failed; see `error`.
    pub residual: Option<f64>,
    /// `None` marks an informational case that does not affect the verdict.
    pub tolerance: Option<f64>,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Case {
    /// A case passes when the residual is at most the tolerance.
    pub fn checked(name: impl Into<String>, residual: Result<f64>, tolerance: f64) -> Self {
        let (residual, error) = match residual {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = residual.is_some_and(|r| r <= tolerance);
        Self { name: name.into(), parameters: BTreeMap::new(), residual, tolerance: Some(tolerance), pass, error }
    }

    pub fn info(name: impl Into<String>, residual: Result<f64>) -> Self {
        let mut case = Self::checked(name, residual, 0.0);
        case.tolerance = None;
        case.pass = true;
        case
    }

    pub fn with(mut self, key: &str, value: impl Into<Param>) -> Self {
        self.parameters.insert(key.to_string(), value.into().0);
        self
    }
}

/// A case parameter; complex numbers become `[re, im]`.
pub struct Param(Value);

impl From<Complex64> for Param {
    fn from(z: Complex64) -> Self {
        Param(serde_json::json!([z.re, z.im]))
    }
}

impl From<&[Complex64]> for Param {
    fn from(zs: &[Complex64]) -> Self {
        Param(Value::Array(zs.iter().map(|&z| Param::from(z).0).collect()))
    }
}

impl From<f64> for Param {
    fn from(x: f64) -> Self {
        Param(serde_json::json!(x))
    }
}

impl From<usize> for Param {
    fn from(x: usize) -> Self {
        Param(serde_json::json!(x))
    }
}

impl From<i32> for Param {
    fn from(x: i32) -> Self {
        Param(serde_json::json!(x))
    }
}

impl From<&str> for Param {
    fn from(x: &str) -> Self {
        Param(serde_json::json!(x))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub cases: Vec<Case>,
    pub passed: usize,
    pub failed: usize,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(name: &str, cases: Vec<Case>) -> Self {
        let graded = cases.iter().filter(|c| c.tolerance.is_some());
        let passed = graded.clone().filter(|c| c.pass).count();
        let failed = graded.filter(|c| !c.pass).count();
        Self { name: name.to_string(), cases, passed, failed, pass: failed == 0 }
    }

    /// Largest graded residual, `None` if any graded case failed to evaluate.
    pub fn max_residual(&self) -> Option<f64> {
        self.cases.iter().filter(|c| c.tolerance.is_some()).try_fold(0.0_f64, |acc, c| c.residual.map(|r| acc.max(r)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub suites_passed: usize,
    pub suites_failed: usize,
    pub cases_passed: usize,
    pub cases_failed: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: Value,
    pub suites: Vec<SuiteReport>,
    pub summary: Summary,
    /// Wall-clock seconds per suite.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(config: Value, suites: Vec<SuiteReport>, timings: BTreeMap<String, f64>) -> Self {
        let summary = Summary {
            suites_passed: suites.iter().filter(|s| s.pass).count(),
            suites_failed: suites.iter().filter(|s| !s.pass).count(),
            cases_passed: suites.iter().map(|s| s.passed).sum(),
            cases_failed: suites.iter().map(|s| s.failed).sum(),
        };
        Self { config, suites, summary, timings }
    }

    pub fn pass(&self) -> bool {
        self.suites.iter().all(|s| s.pass)
    }

    pub fn failing_suites(&self) -> Vec<&str> {
        self.suites.iter().filter(|s| !s.pass).map(|s| s.name.as_str()).collect()
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteReport> {
        self.suites.iter().find(|s| s.name == name)
    }

    /// Canonical JSON of everything except the timings.
    pub fn body_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Value::Object(m) = &mut v {
            m.remove("timings");
        }
        to_canonical_json(&v)
    }

    pub fn to_json(&self) -> Result<String> {
        to_canonical_json(&serde_json::to_value(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Writes every float as `{:.16e}`.
struct FixedFloats;

impl Formatter for FixedFloats {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

/// Serialise with sorted keys and fixed float formatting, newline terminated.
pub fn to_canonical_json(value: &Value) -> Result<String> {
    // `Value` objects are ordered maps, so keys come out sorted.
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloats);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn emit_report(report: &Report, path: &Path) -> Result<()> {
    std::fs::write(path, report.to_json()?).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Report {
        let cases = vec![
            Case::checked("a", Ok(1.234e-13), 1e-9).with("u", Complex64::new(0.1, -1.0 / 3.0)),
            Case::checked("b", Ok(0.5), 1e-9),
            Case::checked("c", Err(Error::SingularJacobian), 1e-9),
            Case::info("d", Ok(2.0)),
        ];
        Report::new(serde_json::json!({"seed": 42}), vec![SuiteReport::new("x", cases)], BTreeMap::new())
    }

    #[test]
    fn counts_and_verdict() {
        let r = sample();
        assert_eq!((r.suites[0].passed, r.suites[0].failed), (1, 2));
        assert!(!r.pass());
        assert_eq!(r.failing_suites(), vec!["x"]);
        assert_eq!(r.suites[0].max_residual(), None);
    }

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_canonical_json(&serde_json::json!({"b": 0.1, "a": 1e300, "c": 0.0, "d": 7})).unwrap();
        assert_eq!(
            s,
            "{\"a\":1.0000000000000001e300,\"b\":1.0000000000000001e-1,\"c\":0.0000000000000000e0,\"d\":7}\n"
        );
    }

    #[test]
    fn reemit_is_byte_identical() {
        let text = sample().to_json().unwrap();
        let back = Report::from_json(&text).unwrap();
        assert_eq!(back, sample());
        assert_eq!(back.to_json().unwrap(), text);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(to_canonical_json(&v).unwrap(), text);
    }

    #[test]
    fn empty_report() {
        let r = Report::new(serde_json::json!({}), Vec::new(), BTreeMap::new());
        assert!(r.pass());
        assert!(r.to_json().unwrap().contains("\"suites\":[]"));
    }
}
