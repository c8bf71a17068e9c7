use nalgebra::DMatrix;

use mfdb::gp::{BasisSpec, Dataset, GpModel, OptimizerConfig};
use mfdb::mfgp::{LevelSpec, MfgpModel};
use mfdb::synthetic::{f_hf, f_lf, unit_grid, HF_POINTS};

fn column(x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(x.len(), 1, x)
}

fn data(x: &[f64], f: impl Fn(f64) -> f64) -> Dataset {
    let y: Vec<f64> = x.iter().map(|v| f(*v)).collect();
    Dataset::from_1d(x, &y, &vec![0.0; x.len()]).unwrap()
}

fn rmse(pred: &[f64], grid: &[f64]) -> f64 {
    (grid.iter().zip(pred).map(|(g, p)| (f_hf(*g) - p).powi(2)).sum::<f64>() / grid.len() as f64).sqrt()
}

fn opt() -> OptimizerConfig {
    OptimizerConfig { seed: 5, ..Default::default() }
}

fn two_level() -> MfgpModel {
    let mut lo = LevelSpec::new(1, data(&unit_grid(21), f_lf));
    lo.optimizer = opt();
    let mut hi = LevelSpec::new(2, data(&HF_POINTS, f_hf));
    hi.basis = BasisSpec::CONSTANT;
    hi.optimizer = opt();
    MfgpModel::build(vec![lo, hi]).unwrap()
}

#[test]
fn multi_fidelity_beats_high_fidelity_alone() {
    let grid = unit_grid(200);
    let mf = two_level().predict_mean_grid(&grid);
    let sf = GpModel::fit(data(&HF_POINTS, f_hf), BasisSpec::default(), &opt()).unwrap();
    let sf = sf.predict_mean(&column(&grid)).unwrap();
    let (e_mf, e_sf) = (rmse(&mf, &grid), rmse(sf.as_slice(), &grid));
    assert!(e_mf < e_sf, "MF {e_mf} vs SF {e_sf}");
}

trait GridMean {
    fn predict_mean_grid(&self, grid: &[f64]) -> Vec<f64>;
}

impl GridMean for MfgpModel {
    fn predict_mean_grid(&self, grid: &[f64]) -> Vec<f64> {
        self.predict(&column(grid)).unwrap().0.iter().cloned().collect()
    }
}

#[test]
fn high_fidelity_value_at_origin_within_two_sigma() {
    let (m, c) = two_level().predict(&column(&[0.0])).unwrap();
    let truth = 2.0 * (2.0 * (-4f64).sin() - 10.0) + 20.0 + 10f64.sin();
    assert!((truth - 2.4832).abs() < 1e-4);
    assert!((m[0] - truth).abs() <= 2.0 * c[(0, 0)].sqrt() + 1e-6, "{} ± {}", m[0], c[(0, 0)].sqrt());
}

#[test]
fn single_level_equals_plain_gp() {
    let d = data(&unit_grid(12), f_lf);
    let gp = GpModel::fit(d.clone(), BasisSpec::default(), &opt()).unwrap();
    let mut spec = LevelSpec::new(1, d);
    spec.optimizer = opt();
    let mf = MfgpModel::build(vec![spec]).unwrap();
    let q = column(&[0.03, 0.41, 0.77, 1.2]);
    let (a, ca) = gp.predict(&q).unwrap();
    let (b, cb) = mf.predict(&q).unwrap();
    assert!((a - b).amax() < 1e-12);
    assert!((ca - cb).amax() < 1e-12);
}

#[test]
fn pure_scaling_recovered() {
    let mut lo = LevelSpec::new(1, data(&unit_grid(25), f_lf));
    lo.optimizer = opt();
    let x2 = [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95];
    let mut hi = LevelSpec::new(2, data(&x2, |x| 2.0 * f_lf(x)));
    hi.basis = BasisSpec::CONSTANT;
    hi.optimizer = opt();
    let m = MfgpModel::build(vec![lo, hi]).unwrap();
    let rho = m.level(2).unwrap().beta_rho()[0];
    assert!((rho - 2.0).abs() / 2.0 < 0.02, "beta_rho {rho}");
}

#[test]
fn draws_respect_level_structure() {
    let m = two_level();
    let q = column(&unit_grid(7));
    let a = m.sample(&q, 3, 99).unwrap();
    assert_eq!(a.shape(), (3, 7));
    assert_eq!(a, m.sample(&q, 3, 99).unwrap());
    // draws interpolate exact high-fidelity data
    let at = column(&HF_POINTS);
    let s = m.sample(&at, 2, 4).unwrap();
    for (i, x) in HF_POINTS.iter().enumerate() {
        assert!((s[(0, i)] - f_hf(*x)).abs() < 1e-3);
    }
}
