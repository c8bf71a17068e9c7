//! Bounded multi-start Nelder–Mead search over log-hyperparameters.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;

/// Controls of the marginal-likelihood maximization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    /// Number of local searches; the first starts from a data-derived guess.
    pub starts: usize,
    pub seed: u64,
    /// Objective evaluations allowed per local search.
    pub max_evals: usize,
    /// Lower bound relative to the data scale of each hyperparameter.
    pub lower: f64,
    /// Upper bound relative to the data scale of each hyperparameter.
    pub upper: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            starts: 8,
            seed: 0,
            max_evals: 400,
            lower: 1e-6,
            upper: 1e6,
        }
    }
}

/// Box in log-space plus the data-derived starting point.
#[derive(Debug, Clone)]
pub(crate) struct SearchSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub initial: Vec<f64>,
}

impl SearchSpace {
    /// Scales: output variance for σ_f², squared input range for each l_d.
    pub fn for_data(data: &Dataset, targets: &nalgebra::DVector<f64>, cfg: &OptimizerConfig) -> Self {
        let n = targets.len();
        let signal_scale = if n > 1 {
            let mean = targets.mean();
            let var = targets.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n as f64;
            if var > 0.0 {
                var
            } else {
                fallback_scale(targets, data)
            }
        } else {
            fallback_scale(targets, data)
        };
        let mut scales = vec![signal_scale];
        for d in 0..data.dim() {
            let col = data.inputs().column(d);
            let range = if n > 0 { col.max() - col.min() } else { 0.0 };
            scales.push(if range > 0.0 { range * range } else { 1.0 });
        }
        let (lo, hi) = (cfg.lower.ln(), cfg.upper.ln());
        let lower = scales.iter().map(|s| s.ln() + lo).collect();
        let upper = scales.iter().map(|s| s.ln() + hi).collect();
        // ℓ ≈ 0.3·range as the first guess.
        let initial = scales
            .iter()
            .enumerate()
            .map(|(i, s)| if i == 0 { s.ln() } else { s.ln() + 0.09f64.ln() })
            .collect();
        Self {
            lower,
            upper,
            initial,
        }
    }

    fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

/// Mean square of the targets, else the mean noise variance, else 1.
fn fallback_scale(targets: &nalgebra::DVector<f64>, data: &Dataset) -> f64 {
    let n = targets.len().max(1) as f64;
    let m = targets.iter().map(|y| y * y).sum::<f64>() / n;
    let noise = data.noise_sd().iter().map(|s| s * s).sum::<f64>() / n;
    if m > 0.0 {
        m
    } else if noise > 0.0 {
        noise
    } else {
        1.0
    }
}

/// Maximizes `f` over the box. `f` returns `None` where it is undefined
/// (e.g. a covariance that cannot be factorized). Ties keep the first optimum found.
pub(crate) fn maximize<F>(f: F, space: &SearchSpace, cfg: &OptimizerConfig) -> Option<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> Option<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let neg = |x: &[f64]| f(x).map_or(f64::INFINITY, |v| if v.is_finite() { -v } else { f64::INFINITY });
    let mut best: Option<(Vec<f64>, f64)> = None;
    let spread = 100f64.ln();
    for start in 0..cfg.starts.max(1) {
        let mut x0 = if start == 0 {
            space.initial.clone()
        } else {
            space
                .initial
                .iter()
                .map(|c| c + rng.random_range(-spread..spread))
                .collect()
        };
        space.clamp(&mut x0);
        let (x, fx) = nelder_mead(&neg, x0, space, cfg.max_evals);
        if fx.is_finite() && best.as_ref().is_none_or(|(_, b)| -fx > *b) {
            best = Some((x, -fx));
        }
    }
    best
}

fn nelder_mead<F>(f: &F, x0: Vec<f64>, space: &SearchSpace, max_evals: usize) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut evals = 0usize;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let f0 = eval(&x0, &mut evals);
    simplex.push((x0.clone(), f0));
    for i in 0..dim {
        let mut x = x0.clone();
        x[i] += 1.0;
        if x[i] > space.upper[i] {
            x[i] = x0[i] - 1.0;
        }
        space.clamp(&mut x);
        let fx = eval(&x, &mut evals);
        simplex.push((x, fx));
    }

    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[dim].1);
        let size = simplex
            .iter()
            .skip(1)
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if best.is_finite() && (worst - best).abs() <= 1e-10 * (1.0 + best.abs()) && size < 1e-6 {
            break;
        }

        let mut centroid = vec![0.0; dim];
        for (x, _) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / dim as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(&simplex[dim].0)
                .map(|(c, w)| c + t * (c - w))
                .collect();
            space.clamp(&mut p);
            p
        };

        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
        } else {
            let (xc, fc) = if fr < simplex[dim].1 {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < simplex[dim].1.min(fr) {
                simplex[dim] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for item in simplex.iter_mut().skip(1) {
                    let mut x: Vec<f64> = x_best
                        .iter()
                        .zip(&item.0)
                        .map(|(b, v)| b + 0.5 * (v - b))
                        .collect();
                    space.clamp(&mut x);
                    let fx = eval(&x, &mut evals);
                    *item = (x, fx);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex.swap_remove(0)
}
