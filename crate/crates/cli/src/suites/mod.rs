//! The suite registry and the sampling/evaluation harness shared by suites.

mod einstein;
mod oracle;
mod toda;
mod weyl;

use std::collections::BTreeMap;

use ewtoda::fields::Chart;
use ewtoda::projective::NormalFormData;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::SuiteSpec;
use crate::error::{CliError, Result};
use crate::report::{Bound, CheckRecord, Report};

type SuiteFn = fn(&mut Ctx) -> Result<()>;

/// Registered suites with the jet order their residuals rely on.
const REGISTRY: [(&str, SuiteFn, usize); 17] = [
    ("projective-invariance", einstein::projective_invariance, 2),
    ("dm-einstein", einstein::dm_einstein, 2),
    ("asd-weyl", einstein::asd_weyl, 2),
    ("kk-lift", einstein::kk_lift, 2),
    ("appendix-a", einstein::appendix_a, 2),
    ("jones-tod", weyl::jones_tod, 2),
    ("ew-residuals", weyl::ew_residuals, 2),
    ("monopoles", weyl::monopoles, 1),
    ("symmetry-criterion", weyl::symmetry_criterion, 2),
    ("minitwistor", weyl::minitwistor, 2),
    ("toda-catalog", toda::toda_catalog, 2),
    ("tod-steps", toda::tod_steps, 2),
    ("appendix-b", toda::appendix_b, 2),
    ("quadric", einstein::quadric, 1),
    ("incidence", einstein::incidence, 1),
    ("hyperhermitian", einstein::hyperhermitian, 1),
    ("oracle", oracle::oracle, 2),
];

pub fn suite_names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(n, _, _)| *n)
}

/// Runs one suite. Checks that fail are reported in the result; errors are
/// reserved for configuration problems and guard exhaustion.
pub fn run_suite(spec: &SuiteSpec) -> Result<Report> {
    spec.validate()?;
    let &(name, f, order) = REGISTRY
        .iter()
        .find(|(n, _, _)| *n == spec.name)
        .ok_or_else(|| CliError::UnknownSuite(spec.name.clone()))?;
    let mut ctx = Ctx::new(spec);
    f(&mut ctx)?;
    Ok(Report::new(name, spec.seed, spec.samples, order, ctx.records))
}

/// Named residuals of one check with their bounds.
#[derive(Debug, Clone, Default)]
pub struct Check {
    entries: Vec<(String, f64, Bound)>,
}

impl Check {
    pub fn new() -> Check {
        Check::default()
    }

    /// `value ≤ tol`; `tol` is subject to configuration overrides.
    pub fn max(mut self, name: &str, value: f64, tol: f64) -> Check {
        self.entries.push((name.to_string(), value, Bound::Max(tol)));
        self
    }

    /// `value ≥ floor`, for perturbation controls.
    pub fn min(mut self, name: &str, value: f64, floor: f64) -> Check {
        self.entries.push((name.to_string(), value, Bound::Min(floor)));
        self
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub point: Vec<f64>,
    pub resamples: usize,
}

pub struct Ctx<'a> {
    pub spec: &'a SuiteSpec,
    rng: ChaCha8Rng,
    records: Vec<CheckRecord>,
}

/// FNV-1a, for a per-suite random stream.
fn stream_id(name: &str) -> u64 {
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a SuiteSpec) -> Ctx<'a> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(stream_id(&spec.name));
        Ctx {
            spec,
            rng,
            records: Vec::new(),
        }
    }

    /// The configured sample count.
    pub fn n(&self) -> usize {
        self.spec.samples
    }

    /// `⌈n / k⌉`, for suites that split their budget across `k` families.
    pub fn share(&self, k: usize) -> usize {
        self.spec.samples.div_ceil(k).max(1)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    /// A coefficient in `[−1, 1]` rounded to two decimals, so that drawn
    /// expressions print exactly.
    pub fn coefficient(&mut self) -> f64 {
        (self.rng.gen_range(-100i32..=100)) as f64 / 100.0
    }

    /// A normal form `A = a₀ + a₁y + a₂ sin y`, `B = b₀ + b₁y² + b₂ cos y`.
    pub fn draw_normal_form(&mut self) -> Result<(String, NormalFormData)> {
        let c: Vec<f64> = (0..6).map(|_| self.coefficient()).collect();
        let a = format!("({}) + ({})*y + ({})*sin(y)", c[0], c[1], c[2]);
        let b = format!("({}) + ({})*y^2 + ({})*cos(y)", c[3], c[4], c[5]);
        let data = NormalFormData::parse(&a, &b)?;
        Ok((format!("A={a};B={b}"), data))
    }

    /// Applies the configured box to charts of matching dimension.
    pub fn chart(&self, mut chart: Chart) -> Chart {
        if let Some(b) = &self.spec.domain_box {
            if b.len() == chart.dim() {
                chart.domain_box = b.clone();
            }
        }
        chart
    }

    /// Rejection-samples `count` valid points, recording the rejected draws
    /// spent on each. Fails after `100 · count` draws.
    pub fn sample(&mut self, chart: &Chart, count: usize) -> Result<Vec<Sample>> {
        let chart = self.chart(chart.clone());
        let limit = 100 * count.max(1);
        let mut out = Vec::with_capacity(count);
        let (mut attempts, mut rejected) = (0, 0);
        while out.len() < count {
            if attempts >= limit {
                return Err(ewtoda::Error::GuardExhausted {
                    found: out.len(),
                    wanted: count,
                    attempts,
                }
                .into());
            }
            attempts += 1;
            let x: Vec<f64> = chart
                .domain_box
                .iter()
                .map(|(lo, hi)| lo + (hi - lo) * self.rng.gen::<f64>())
                .collect();
            if chart.is_valid(&x) {
                out.push(Sample {
                    point: x,
                    resamples: rejected,
                });
                rejected = 0;
            } else {
                rejected += 1;
            }
        }
        Ok(out)
    }

    fn record(&self, id: String, s: &Sample, r: ewtoda::Result<Check>) -> CheckRecord {
        let mut rec = CheckRecord {
            id,
            point: s.point.clone(),
            residuals: BTreeMap::new(),
            bounds: BTreeMap::new(),
            pass: false,
            resamples: s.resamples,
            error: None,
        };
        match r {
            Ok(c) => {
                for (name, v, b) in c.entries {
                    let b = match b {
                        Bound::Max(t) => Bound::Max(self.spec.bound(&name, t)),
                        other => other,
                    };
                    rec.residuals.insert(name.clone(), v);
                    rec.bounds.insert(name, b);
                }
                rec.pass = !rec.bounds.is_empty()
                    && rec.bounds.iter().all(|(k, b)| b.holds(rec.residuals[k]));
            }
            Err(e) => rec.error = Some(e.to_string()),
        }
        rec
    }

    /// Evaluates `f` at every sample in parallel; records `family/i` are
    /// appended in sample order.
    pub fn run<F>(&mut self, family: &str, samples: &[Sample], f: F)
    where
        F: Fn(&[f64]) -> ewtoda::Result<Check> + Sync,
    {
        let results: Vec<ewtoda::Result<Check>> = samples.par_iter().map(|s| f(&s.point)).collect();
        for (i, (s, r)) in samples.iter().zip(results).enumerate() {
            let rec = self.record(format!("{family}/{i}"), s, r);
            self.records.push(rec);
        }
    }

    /// A single check that is not tied to one sampled point.
    pub fn single(&mut self, id: &str, point: Vec<f64>, r: ewtoda::Result<Check>) {
        let s = Sample { point, resamples: 0 };
        let rec = self.record(id.to_string(), &s, r);
        self.records.push(rec);
    }
}

/// `|a − c·b| / |a|` with `c` the least-squares fit; zero iff `a ∥ b`.
pub fn proportionality_misfit(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let bb: f64 = b.iter().map(|y| y * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if bb == 0.0 || aa == 0.0 {
        return if aa == 0.0 && bb == 0.0 { 0.0 } else { 1.0 };
    }
    let c = ab / bb;
    let r: f64 = a.iter().zip(b).map(|(x, y)| (x - c * y).powi(2)).sum::<f64>().sqrt();
    r / aa
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportionality() {
        assert!(proportionality_misfit(&[2.0, 4.0], &[1.0, 2.0]) < 1e-15);
        assert!(proportionality_misfit(&[1.0, 0.0], &[0.0, 1.0]) > 0.9);
    }

    #[test]
    fn streams_differ_by_suite() {
        let a = SuiteSpec::new("quadric");
        let b = SuiteSpec::new("incidence");
        let (mut ca, mut cb) = (Ctx::new(&a), Ctx::new(&b));
        assert_ne!(ca.uniform(0.0, 1.0), cb.uniform(0.0, 1.0));
    }

    #[test]
    fn box_override_applies_by_dimension() {
        let mut spec = SuiteSpec::new("quadric");
        spec.domain_box = Some(vec![(0.0, 0.1), (0.0, 0.1)]);
        let mut ctx = Ctx::new(&spec);
        let c2 = Chart::new(&["a", "b"], &[(-1.0, 1.0), (-1.0, 1.0)]).unwrap();
        let c3 = Chart::new(&["a", "b", "c"], &[(5.0, 6.0); 3]).unwrap();
        for s in ctx.sample(&c2, 20).unwrap() {
            assert!(s.point.iter().all(|v| (0.0..0.1).contains(v)));
        }
        assert!(ctx.sample(&c3, 5).unwrap()[0].point[0] >= 5.0);
    }
}
