//! Monte Carlo propagation of database uncertainty through the maneuver,
//! empirical CDFs, failure rates and design inversion.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aerodb::{DatabaseModel, PreparedDatabase};
use crate::flightsim::{simulate, Metrics, SimConfig};
use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum McError {
    #[error("no values")]
    Empty,
    #[error("need at least {needed} values, got {found}")]
    TooFew { needed: usize, found: usize },
    #[error("success rate must lie in [0, 1], got {0}")]
    InvalidRate(f64),
    #[error("deflection limit must be positive, got {0}")]
    InvalidLimit(f64),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Outcome of one database draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: u64,
    /// Seed of the database draw, derived from the master seed and `index`.
    pub seed: u64,
    /// `None` when the simulation itself failed.
    pub metrics: Option<Metrics>,
    pub extrapolated: bool,
    pub error: Option<String>,
}

/// Draws sample `index` of the ensemble with master seed `master` and flies it.
pub fn simulate_sample(db: &PreparedDatabase, config: &SimConfig, master: u64, index: u64) -> SampleRecord {
    let seed = derive_seed(master, index);
    let sample = db.sample(seed);
    match simulate(&sample, config) {
        Ok(r) => SampleRecord {
            index,
            seed,
            metrics: Some(r.metrics),
            extrapolated: r.extrapolated,
            error: None,
        },
        Err(e) => SampleRecord {
            index,
            seed,
            metrics: None,
            extrapolated: false,
            error: Some(e.to_string()),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McRun {
    pub seed: u64,
    /// One record per sample, in index order.
    pub samples: Vec<SampleRecord>,
}

impl McRun {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Metrics of every successfully simulated sample, in index order.
    pub fn metrics(&self) -> Vec<Metrics> {
        self.samples.iter().filter_map(|s| s.metrics).collect()
    }

    pub fn failed_to_simulate(&self) -> usize {
        self.samples.iter().filter(|s| s.metrics.is_none()).count()
    }

    pub fn pitch(&self) -> Vec<f64> {
        self.metrics().iter().map(|m| m.pitch).collect()
    }

    pub fn roll(&self) -> Vec<f64> {
        self.metrics().iter().map(|m| m.roll).collect()
    }

    pub fn yaw(&self) -> Vec<f64> {
        self.metrics().iter().map(|m| m.yaw).collect()
    }

    pub fn summary(&self) -> Result<Summary, McError> {
        Ok(Summary {
            samples: self.len(),
            simulated: self.len() - self.failed_to_simulate(),
            failed_to_simulate: self.failed_to_simulate(),
            extrapolated: self.samples.iter().filter(|s| s.extrapolated).count(),
            pitch: MetricSummary::new(&self.pitch())?,
            roll: MetricSummary::new(&self.roll())?,
            yaw: MetricSummary::new(&self.yaw())?,
        })
    }
}

/// Flies `n` independent draws of `db`. Results do not depend on scheduling;
/// `jobs` bounds the worker threads (all available cores when `None`).
pub fn run(db: &DatabaseModel, config: &SimConfig, n: usize, seed: u64, jobs: Option<usize>) -> Result<McRun, crate::Error> {
    config.validate()?;
    db.check_complete()?;
    let prepared = db.prepare(&db.grid)?;
    Ok(run_prepared(&prepared, config, n, seed, jobs)?)
}

pub fn run_prepared(
    db: &PreparedDatabase,
    config: &SimConfig,
    n: usize,
    seed: u64,
    jobs: Option<usize>,
) -> Result<McRun, McError> {
    if n == 0 {
        return Err(McError::NoSamples);
    }
    let work = || -> Vec<SampleRecord> {
        (0..n as u64)
            .into_par_iter()
            .map(|i| simulate_sample(db, config, seed, i))
            .collect()
    };
    let samples = match jobs {
        None => work(),
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| McError::ThreadPool(e.to_string()))?
            .install(work),
    };
    Ok(McRun { seed, samples })
}

/// Mean, unbiased variance and failure rate of one metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    pub variance: f64,
    pub failure_rate: f64,
}

impl MetricSummary {
    pub fn new(values: &[f64]) -> Result<Self, McError> {
        let failure_rate = failure_rate(values)?;
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = if values.len() > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Ok(Self {
            mean,
            variance,
            failure_rate,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub samples: usize,
    pub simulated: usize,
    pub failed_to_simulate: usize,
    pub extrapolated: usize,
    pub pitch: MetricSummary,
    pub roll: MetricSummary,
    pub yaw: MetricSummary,
}

/// Fraction of values strictly below zero.
pub fn failure_rate(values: &[f64]) -> Result<f64, McError> {
    if values.is_empty() {
        return Err(McError::Empty);
    }
    Ok(values.iter().filter(|v| **v < 0.0).count() as f64 / values.len() as f64)
}

pub fn success_rate(values: &[f64]) -> Result<f64, McError> {
    Ok(1.0 - failure_rate(values)?)
}

/// Right-continuous empirical distribution function.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(values: &[f64]) -> Result<Self, McError> {
        if values.is_empty() {
            return Err(McError::Empty);
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(McError::NonFinite(*v));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Ok(Self { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    /// `#{v ≤ x} / N`.
    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|v| *v <= x) as f64 / self.sorted.len() as f64
    }

    /// Lower empirical quantile: the `⌈q·N⌉`-th smallest value (at least the first).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let k = ((q * n as f64 - 1e-9).ceil().max(1.0) as usize).min(n);
        self.sorted[k - 1]
    }

    /// `(value, i/N)` for the i-th smallest value.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        self.sorted
            .iter()
            .enumerate()
            .map(|(i, v)| (*v, (i + 1) as f64 / n))
            .collect()
    }
}

/// Running statistics after `count` values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunningStats {
    pub count: usize,
    pub mean: f64,
    /// Unbiased variance; undefined for a single value.
    pub variance: Option<f64>,
}

/// Prefix mean and variance by Welford's recurrence.
pub fn convergence_trace(values: &[f64]) -> Result<Vec<RunningStats>, McError> {
    if values.len() < 2 {
        return Err(McError::TooFew {
            needed: 2,
            found: values.len(),
        });
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    Ok(values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let n = (i + 1) as f64;
            let d = v - mean;
            mean += d / n;
            m2 += d * (v - mean);
            RunningStats {
                count: i + 1,
                mean,
                variance: (i > 0).then(|| m2 / (n - 1.0)),
            }
        })
        .collect())
}

/// Limit needed so that a fraction `success_rate` of the ensemble passes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignQuery {
    pub success_rate: f64,
    pub limit: f64,
    /// The `(1 − x)` quantile of the metric.
    pub quantile: f64,
    pub deflection: f64,
}

/// `δ^x = δ^lim·(1 − ρ^x)` with `ρ^x` the lower `(1 − x)` quantile.
pub fn design_deflection(cdf: &EmpiricalCdf, success_rate: f64, limit: f64) -> Result<DesignQuery, McError> {
    if !(0.0..=1.0).contains(&success_rate) {
        return Err(McError::InvalidRate(success_rate));
    }
    if !(limit > 0.0 && limit.is_finite()) {
        return Err(McError::InvalidLimit(limit));
    }
    if cdf.is_empty() {
        return Err(McError::Empty);
    }
    let quantile = cdf.quantile(1.0 - success_rate);
    Ok(DesignQuery {
        success_rate,
        limit,
        quantile,
        deflection: redesigned_limit(limit, quantile),
    })
}

pub fn redesigned_limit(limit: f64, quantile: f64) -> f64 {
    limit * (1.0 - quantile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn counts_and_steps() {
        assert_eq!(failure_rate(&[-0.1, 0.2, 0.3, -0.05]).unwrap(), 0.5);
        assert_eq!(failure_rate(&[0.1, 0.0, 0.7]).unwrap(), 0.0);
        let c = EmpiricalCdf::new(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(c.eval(2.0), 2.0 / 3.0);
        assert_eq!(c.eval(0.5), 0.0);
        assert_eq!(c.eval(3.0), 1.0);
        assert!(matches!(failure_rate(&[]), Err(McError::Empty)));
        assert!(matches!(EmpiricalCdf::new(&[]), Err(McError::Empty)));
    }

    #[test]
    fn single_atom() {
        let c = EmpiricalCdf::new(&[0.4]).unwrap();
        assert_eq!(c.quantile(0.0), 0.4);
        assert_eq!(c.quantile(1.0), 0.4);
        assert_eq!(c.points(), vec![(0.4, 1.0)]);
    }

    #[test]
    fn welford_hand_cases() {
        let t = convergence_trace(&[0.0, 2.0]).unwrap();
        assert_eq!(t[0].variance, None);
        assert_eq!(t[1].variance, Some(2.0));
        assert_eq!(t[1].mean, 1.0);
        let t = convergence_trace(&[0.7; 5]).unwrap();
        assert!(t.iter().skip(1).all(|s| s.variance == Some(0.0)));
        assert!(matches!(convergence_trace(&[1.0]), Err(McError::TooFew { .. })));
    }

    #[test]
    fn design_arithmetic() {
        let c = EmpiricalCdf::new(&[0.0, 0.5]).unwrap();
        assert_eq!(design_deflection(&c, 1.0, 15.0).unwrap().deflection, 15.0);
        assert!((redesigned_limit(15.0, -0.36) - 20.4).abs() < 1e-12);
        let d = redesigned_limit(15.0, -0.394);
        assert_eq!(format!("{d:.2}"), "20.91");
        assert!(design_deflection(&c, 1.5, 15.0).is_err());
        assert!(design_deflection(&c, 0.5, 0.0).is_err());
    }

    #[test]
    fn design_boundaries() {
        let c = EmpiricalCdf::new(&[-0.3, 0.1, 0.2, 0.6]).unwrap();
        assert_eq!(design_deflection(&c, 1.0, 10.0).unwrap().quantile, -0.3);
        assert_eq!(design_deflection(&c, 0.0, 10.0).unwrap().quantile, 0.6);
        assert_eq!(design_deflection(&c, 0.75, 10.0).unwrap().quantile, -0.3);
        assert_eq!(design_deflection(&c, 0.5, 10.0).unwrap().quantile, 0.1);
    }

    proptest! {
        #[test]
        fn rates_sum_to_one(v in prop::collection::vec(-1.0..1.0f64, 1..200)) {
            let mut v = v;
            v.push(0.0);
            prop_assert_eq!(failure_rate(&v).unwrap() + success_rate(&v).unwrap(), 1.0);
        }

        #[test]
        fn cdf_is_a_distribution(v in prop::collection::vec(-5.0..5.0f64, 1..100), probes in prop::collection::vec(-6.0..6.0f64, 1..20)) {
            let c = EmpiricalCdf::new(&v).unwrap();
            prop_assert_eq!(c.eval(f64::NEG_INFINITY), 0.0);
            prop_assert_eq!(c.eval(f64::INFINITY), 1.0);
            let mut p = probes;
            p.sort_by(f64::total_cmp);
            for w in p.windows(2) {
                prop_assert!(c.eval(w[0]) <= c.eval(w[1]));
            }
        }

        #[test]
        fn quantile_is_lower_inverse(v in prop::collection::vec(-5.0..5.0f64, 1..100), q in 0.001..1.0f64) {
            let c = EmpiricalCdf::new(&v).unwrap();
            let x = c.quantile(q);
            // smallest sample value whose CDF reaches q
            prop_assert!(c.eval(x) >= q - 1e-9);
            let below = c.values().iter().filter(|s| **s < x).count() as f64 / v.len() as f64;
            prop_assert!(below < q);
        }

        #[test]
        fn higher_success_never_shrinks_design(v in prop::collection::vec(-1.0..1.0f64, 1..100), a in 0.0..1.0f64, b in 0.0..1.0f64) {
            let c = EmpiricalCdf::new(&v).unwrap();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(design_deflection(&c, hi, 15.0).unwrap().deflection >= design_deflection(&c, lo, 15.0).unwrap().deflection);
        }

        #[test]
        fn trace_matches_two_pass(v in prop::collection::vec(-3.0..3.0f64, 2..300)) {
            let t = convergence_trace(&v).unwrap();
            let s = MetricSummary::new(&v).unwrap();
            let last = t.last().unwrap();
            prop_assert!((last.mean - s.mean).abs() < 1e-12);
            prop_assert!((last.variance.unwrap() - s.variance).abs() < 1e-12);
        }
    }
}
