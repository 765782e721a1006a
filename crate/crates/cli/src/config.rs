//! Suite configuration: a `key = value` file with command-line overrides.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{CliError, Result};

pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Format> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            _ => Err(CliError::Config(format!("unknown format {s:?}"))),
        }
    }
}

/// What to run and how to judge it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSpec {
    pub name: String,
    pub samples: usize,
    pub seed: u64,
    /// Replaces every upper bound of the suite.
    pub tol: Option<f64>,
    /// Replaces the upper bound of one named residual; wins over `tol`.
    pub tolerances: BTreeMap<String, f64>,
    /// Replaces the sampling box of every chart of matching dimension.
    pub domain_box: Option<Vec<(f64, f64)>>,
}

impl SuiteSpec {
    pub fn new(name: &str) -> SuiteSpec {
        SuiteSpec {
            name: name.to_string(),
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            tol: None,
            tolerances: BTreeMap::new(),
            domain_box: None,
        }
    }

    pub fn with_samples(mut self, n: usize) -> SuiteSpec {
        self.samples = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> SuiteSpec {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> SuiteSpec {
        self.tol = Some(tol);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(CliError::Config("samples must be at least 1".into()));
        }
        let bad = |t: f64| !(t.is_finite() && t > 0.0);
        if self.tol.is_some_and(bad) || self.tolerances.values().any(|t| bad(*t)) {
            return Err(CliError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// The upper bound for `residual`, given the suite default.
    pub fn bound(&self, residual: &str, default: f64) -> f64 {
        self.tolerances
            .get(residual)
            .copied()
            .or(self.tol)
            .unwrap_or(default)
    }
}

/// Settings read from a config file; `None` means not given.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub suite: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub domain_box: Option<Vec<(f64, f64)>>,
    pub out: Option<String>,
    pub format: Option<Format>,
}

fn number<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}")))
}

/// Parses `lo:hi,lo:hi,...`.
pub fn parse_box(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|iv| {
            let (lo, hi) = iv
                .split_once(':')
                .ok_or_else(|| CliError::Config(format!("box interval {iv:?} is not lo:hi")))?;
            let (lo, hi): (f64, f64) = (number("box", lo.trim())?, number("box", hi.trim())?);
            if !(lo < hi) {
                return Err(CliError::Config(format!("empty box interval {iv:?}")));
            }
            Ok((lo, hi))
        })
        .collect()
}

/// Parses the line-oriented `key = value` format. Blank lines and lines
/// starting with `#` are ignored; `tol.<residual>` sets one bound.
pub fn parse_config(text: &str) -> Result<FileConfig> {
    let mut c = FileConfig::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        match k {
            "suite" => c.suite = Some(v.to_string()),
            "samples" => c.samples = Some(number(k, v)?),
            "seed" => c.seed = Some(number(k, v)?),
            "tol" => c.tol = Some(number(k, v)?),
            "box" => c.domain_box = Some(parse_box(v)?),
            "out" => c.out = Some(v.to_string()),
            "format" => c.format = Some(v.parse()?),
            _ => match k.strip_prefix("tol.") {
                Some(name) if !name.is_empty() => {
                    c.tolerances.insert(name.to_string(), number(k, v)?);
                }
                _ => return Err(CliError::Config(format!("line {}: unknown key {k:?}", i + 1))),
            },
        }
    }
    Ok(c)
}

impl FileConfig {
    pub fn into_spec(self, name: &str) -> SuiteSpec {
        SuiteSpec {
            name: name.to_string(),
            samples: self.samples.unwrap_or(DEFAULT_SAMPLES),
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            tol: self.tol,
            tolerances: self.tolerances,
            domain_box: self.domain_box,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let c = parse_config(
            "# comment\nsuite = kk-lift\nsamples=20\nseed = 3\ntol = 1e-9\ntol.einstein = 1e-6\nbox = -1:1, 0:2\nformat = text\n",
        )
        .unwrap();
        assert_eq!(c.suite.as_deref(), Some("kk-lift"));
        assert_eq!(c.samples, Some(20));
        assert_eq!(c.seed, Some(3));
        assert_eq!(c.tol, Some(1e-9));
        assert_eq!(c.tolerances["einstein"], 1e-6);
        assert_eq!(c.domain_box, Some(vec![(-1.0, 1.0), (0.0, 2.0)]));
        assert_eq!(c.format, Some(Format::Text));
        let s = c.into_spec("kk-lift");
        assert_eq!(s.bound("einstein", 1e-8), 1e-6);
        assert_eq!(s.bound("scalar", 1e-8), 1e-9);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_config("samples 3").is_err());
        assert!(parse_config("colour = red").is_err());
        assert!(parse_config("samples = many").is_err());
        assert!(parse_box("1:0").is_err());
    }

    #[test]
    fn validation() {
        assert!(SuiteSpec::new("x").with_samples(0).validate().is_err());
        assert!(SuiteSpec::new("x").with_tol(-1.0).validate().is_err());
        assert!(SuiteSpec::new("x").validate().is_ok());
    }
}
