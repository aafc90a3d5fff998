//! Run configuration, read from a TOML file.
//!
//! ```toml
//! tau = "1.1i"
//! eta = "0.31"
//! theta_tol = 1e-14
//! guard_eps = 1e-8
//! sites = ["0", "0.17"]
//! transfer_sites = [2, 3]
//! seed = 42
//! suites = ["theta", "ybe"]
//! gauge = "functional-equation"   # or "unit", or "file:path/to/f.json"
//!
//! [lattice]
//! q0 = "0.137+0.45i"
//! K = 12
//!
//! [tolerances]
//! ybe = 1e-8
//! ```
//!
//! Complex values are strings of the form `a+bi` (or plain numbers). Every
//! key is optional.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};
use toml::{Table, Value as Toml};

use crate::elliptic::ModularParams;
use crate::error::{Error, Result};
use crate::harness::SUITES;
use crate::repspace::default_sites;

/// Environment variable consulted when no config path is given.
pub const CONFIG_ENV: &str = "ELLIPTIKA_CONFIG";

pub const MIN_HALF_WIDTH: i32 = 8;

/// How the pseudovacuum gauge `f(q)` is chosen for Bethe states.
#[derive(Clone, Debug, PartialEq)]
pub enum GaugeChoice {
    Unit,
    /// Propagated on the lattice so the Bethe equations lose their
    /// `q`-dependence.
    FunctionalEquation,
    /// JSON array of `[re, im]` values on `k = -K..=K`.
    File(PathBuf),
}

impl GaugeChoice {
    fn label(&self) -> String {
        match self {
            GaugeChoice::Unit => "unit".into(),
            GaugeChoice::FunctionalEquation => "functional-equation".into(),
            GaugeChoice::File(p) => format!("file:{}", p.display()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub params: ModularParams,
    /// Evaluation points of the chain; suites needing more sites continue
    /// with the defaults.
    pub sites: Vec<Complex64>,
    /// Chain lengths for the transfer-matrix suite.
    pub transfer_sites: Vec<usize>,
    pub q0: Complex64,
    /// Lattice half width `K`.
    pub half_width: i32,
    pub seed: u64,
    pub suites: Vec<String>,
    /// Per-suite tolerance overrides.
    pub tolerances: BTreeMap<String, f64>,
    pub gauge: GaugeChoice,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            params: ModularParams::default(),
            sites: default_sites(2),
            transfer_sites: vec![2, 3],
            q0: Complex64::new(0.137, 0.45),
            half_width: 12,
            seed: 42,
            suites: SUITES.iter().map(|s| s.to_string()).collect(),
            tolerances: BTreeMap::new(),
            gauge: GaugeChoice::FunctionalEquation,
        }
    }
}

/// Parse `a+bi`, `a-bi`, `bi`, `a`, `i`, `-i`; whitespace is ignored.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::ComplexParse(text.to_string());
    let num = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| bad()),
        }
    };
    if s.is_empty() {
        return Err(bad());
    }
    let Some(body) = s.strip_suffix(['i', 'j']) else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split =
        (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].parse::<f64>().map_err(|_| bad())?;
            Ok(Complex64::new(re, num(&body[k..])?))
        }
        None => Ok(Complex64::new(0.0, num(body)?)),
    }
}

/// Inverse of [`parse_complex`] with shortest round-trip digits.
pub fn format_complex(z: Complex64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn value_error(key: &str, message: impl Into<String>) -> Error {
    Error::ConfigValue { key: key.to_string(), message: message.into() }
}

fn complex_value(key: &str, v: &Toml) -> Result<Complex64> {
    match v {
        Toml::String(s) => parse_complex(s).map_err(|e| value_error(key, e.to_string())),
        Toml::Float(x) => Ok(Complex64::new(*x, 0.0)),
        Toml::Integer(x) => Ok(Complex64::new(*x as f64, 0.0)),
        _ => Err(value_error(key, "expected a complex number such as \"0.3+0.1i\"")),
    }
}

fn real_value(key: &str, v: &Toml) -> Result<f64> {
    match v {
        Toml::Float(x) => Ok(*x),
        Toml::Integer(x) => Ok(*x as f64),
        _ => Err(value_error(key, "expected a number")),
    }
}

fn int_value(key: &str, v: &Toml) -> Result<i64> {
    v.as_integer().ok_or_else(|| value_error(key, "expected an integer"))
}

fn array<'a>(key: &str, v: &'a Toml) -> Result<&'a Vec<Toml>> {
    v.as_array().ok_or_else(|| value_error(key, "expected an array"))
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Config {
    /// Parse and validate configuration text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: Table = text.parse().map_err(|e: toml::de::Error| Error::ConfigParse {
            line: e.span().map_or(1, |s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        let mut cfg = Config::default();
        let (mut tau, mut eta) = (cfg.params.tau, cfg.params.eta);
        let (mut tol, mut guard) = (cfg.params.theta_tol, cfg.params.guard_eps);
        for (key, v) in &table {
            match key.as_str() {
                "tau" => tau = complex_value(key, v)?,
                "eta" => eta = complex_value(key, v)?,
                "theta_tol" => tol = real_value(key, v)?,
                "guard_eps" => guard = real_value(key, v)?,
                "sites" => {
                    cfg.sites = array(key, v)?.iter().map(|z| complex_value(key, z)).collect::<Result<_>>()?;
                }
                "transfer_sites" => {
                    cfg.transfer_sites = array(key, v)?
                        .iter()
                        .map(|n| match int_value(key, n)? {
                            n @ 1..=4 => Ok(n as usize),
                            n => Err(value_error(key, format!("chain length {n} outside 1..=4"))),
                        })
                        .collect::<Result<_>>()?;
                }
                "seed" => {
                    cfg.seed =
                        u64::try_from(int_value(key, v)?).map_err(|_| value_error(key, "must be non-negative"))?;
                }
                "suites" => {
                    cfg.suites = array(key, v)?
                        .iter()
                        .map(|s| s.as_str().map(str::to_string).ok_or_else(|| value_error(key, "expected suite names")))
                        .collect::<Result<_>>()?;
                }
                "gauge" => {
                    let s = v.as_str().ok_or_else(|| value_error(key, "expected a string"))?;
                    cfg.gauge = match s {
                        "unit" => GaugeChoice::Unit,
                        "functional-equation" => GaugeChoice::FunctionalEquation,
                        _ => match s.strip_prefix("file:") {
                            Some(path) => GaugeChoice::File(PathBuf::from(path)),
                            None => return Err(value_error(key, "expected unit, functional-equation or file:<path>")),
                        },
                    };
                }
                "lattice" => {
                    let t = v.as_table().ok_or_else(|| value_error(key, "expected a table"))?;
                    for (sub, w) in t {
                        let full = format!("lattice.{sub}");
                        match sub.as_str() {
                            "q0" => cfg.q0 = complex_value(&full, w)?,
                            "K" => {
                                cfg.half_width = i32::try_from(int_value(&full, w)?)
                                    .map_err(|_| value_error(&full, "out of range"))?;
                            }
                            _ => return Err(value_error(&full, "unknown key")),
                        }
                    }
                }
                "tolerances" => {
                    let t = v.as_table().ok_or_else(|| value_error(key, "expected a table"))?;
                    for (sub, w) in t {
                        cfg.tolerances.insert(sub.clone(), real_value(&format!("tolerances.{sub}"), w)?);
                    }
                }
                _ => return Err(value_error(key, "unknown key")),
            }
        }
        cfg.params = ModularParams::new(tau, eta, tol, guard).map_err(|e| {
            let key = if tau.im <= 0.0 {
                "tau"
            } else if !(tol > 0.0) {
                "theta_tol"
            } else if !(guard > 0.0) {
                "guard_eps"
            } else {
                "eta"
            };
            value_error(key, e.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.half_width < MIN_HALF_WIDTH {
            return Err(value_error("lattice.K", format!("must be at least {MIN_HALF_WIDTH}")));
        }
        if self.sites.is_empty() {
            return Err(value_error("sites", "at least one site is required"));
        }
        for (i, a) in self.sites.iter().enumerate() {
            if self.sites[..i].iter().any(|b| (a - b).norm() < 1e-12) {
                return Err(value_error("sites", "evaluation points must be distinct"));
            }
        }
        for s in &self.suites {
            if !SUITES.contains(&s.as_str()) {
                return Err(value_error("suites", format!("unknown suite `{s}`")));
            }
        }
        for (k, &t) in &self.tolerances {
            if !SUITES.contains(&k.as_str()) {
                return Err(value_error(&format!("tolerances.{k}"), "unknown suite"));
            }
            if !(t > 0.0) {
                return Err(value_error(&format!("tolerances.{k}"), "must be positive"));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        Self::from_toml(&text)
    }

    /// Load from `path`, else from `$ELLIPTIKA_CONFIG`, else defaults.
    pub fn resolve(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(p) if !p.is_empty() => Self::load(Path::new(&p)),
                _ => Ok(Self::default()),
            },
        }
    }

    /// The first `n` evaluation points, padded with defaults.
    pub fn sites_for(&self, n: usize) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = self.sites.iter().take(n).copied().collect();
        for z in default_sites(n + self.sites.len()) {
            if out.len() == n {
                break;
            }
            if !out.iter().any(|w| (w - z).norm() < 1e-12) {
                out.push(z);
            }
        }
        out
    }

    /// Tolerance for a suite: the override if present, else `default`.
    pub fn tolerance(&self, suite: &str, default: f64) -> f64 {
        self.tolerances.get(suite).copied().unwrap_or(default)
    }

    /// Configuration as it appears in reports.
    pub fn echo(&self) -> Value {
        let c = |z: Complex64| json!([z.re, z.im]);
        json!({
            "tau": c(self.params.tau),
            "eta": c(self.params.eta),
            "theta_tol": self.params.theta_tol,
            "guard_eps": self.params.guard_eps,
            "sites": self.sites.iter().map(|&z| c(z)).collect::<Vec<_>>(),
            "transfer_sites": self.transfer_sites,
            "lattice": { "q0": c(self.q0), "K": self.half_width },
            "seed": self.seed,
            "suites": self.suites,
            "tolerances": self.tolerances,
            "gauge": self.gauge.label(),
        })
    }
}
