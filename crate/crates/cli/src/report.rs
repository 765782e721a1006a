//! Per-check records, suite reports and their text rendering.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::conventions;

/// How a residual is judged: `Max` bounds a residual from above, `Min`
/// bounds a perturbation control from below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Max(f64),
    Min(f64),
}

impl Bound {
    pub fn holds(&self, v: f64) -> bool {
        match *self {
            Bound::Max(t) => v <= t,
            Bound::Min(t) => v >= t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub id: String,
    pub point: Vec<f64>,
    pub residuals: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, Bound>,
    pub pass: bool,
    /// Rejected draws spent before this point was accepted.
    pub resamples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CheckRecord {
    /// Residuals judged against an upper bound.
    pub fn bounded_residuals(&self) -> impl Iterator<Item = f64> + '_ {
        self.residuals
            .iter()
            .filter(|(k, _)| matches!(self.bounds.get(*k), Some(Bound::Max(_))))
            .map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub checks: usize,
    pub passed: usize,
    pub failed: usize,
    /// Largest residual with an upper bound, over all records.
    pub max_residual: f64,
    pub pass_rate: f64,
}

impl Summary {
    pub fn of(checks: &[CheckRecord]) -> Summary {
        let passed = checks.iter().filter(|c| c.pass).count();
        let max_residual = checks
            .iter()
            .flat_map(|c| c.bounded_residuals())
            .filter(|v| v.is_finite())
            .fold(0.0, f64::max);
        Summary {
            checks: checks.len(),
            passed,
            failed: checks.len() - passed,
            max_residual,
            pass_rate: if checks.is_empty() {
                1.0
            } else {
                passed as f64 / checks.len() as f64
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineMeta {
    pub version: &'static str,
    pub conventions: BTreeMap<&'static str, &'static str>,
    pub orientations: BTreeMap<&'static str, f64>,
}

impl EngineMeta {
    pub fn current() -> EngineMeta {
        EngineMeta {
            version: env!("CARGO_PKG_VERSION"),
            conventions: conventions::flags(),
            orientations: conventions::orientations(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub jet_order: usize,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    pub engine: EngineMeta,
}

impl Report {
    pub fn new(suite: &str, seed: u64, samples: usize, jet_order: usize, checks: Vec<CheckRecord>) -> Report {
        Report {
            suite: suite.to_string(),
            seed,
            samples,
            jet_order,
            summary: Summary::of(&checks),
            checks,
            engine: EngineMeta::current(),
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    /// One line per failing check, then the summary.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "suite {} (seed {}, {} samples, jet order {})",
            self.suite, self.seed, self.samples, self.jet_order
        );
        for c in self.failures() {
            let _ = write!(s, "FAIL {}", c.id);
            for (k, v) in &c.residuals {
                let b = match c.bounds.get(k) {
                    Some(Bound::Max(t)) => format!(" <= {t:e}"),
                    Some(Bound::Min(t)) => format!(" >= {t:e}"),
                    None => String::new(),
                };
                let _ = write!(s, "  {k}={v:e}{b}");
            }
            if let Some(e) = &c.error {
                let _ = write!(s, "  error: {e}");
            }
            s.push('\n');
        }
        let m = &self.summary;
        let _ = writeln!(
            s,
            "{}/{} checks passed ({:.1}%), max residual {:e}",
            m.passed,
            m.checks,
            100.0 * m.pass_rate,
            m.max_residual
        );
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, r: f64, b: Bound) -> CheckRecord {
        CheckRecord {
            id: id.into(),
            point: vec![0.0],
            residuals: BTreeMap::from([("r".to_string(), r)]),
            bounds: BTreeMap::from([("r".to_string(), b)]),
            pass: b.holds(r),
            resamples: 0,
            error: None,
        }
    }

    #[test]
    fn summary_counts_and_ignores_controls() {
        let s = Summary::of(&[
            rec("a", 1e-12, Bound::Max(1e-8)),
            rec("b", 1e-6, Bound::Max(1e-8)),
            rec("c", 0.5, Bound::Min(1e-3)),
        ]);
        assert_eq!((s.checks, s.passed, s.failed), (3, 2, 1));
        assert_eq!(s.max_residual, 1e-6);
    }

    #[test]
    fn nan_never_passes() {
        assert!(!Bound::Max(1.0).holds(f64::NAN));
        assert!(!Bound::Min(1.0).holds(f64::NAN));
    }
}
