use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DVector;

use mfdb::aerodb::*;
use mfdb::gp::{BasisSpec, OptimizerConfig};
use mfdb::mfgp::{LevelSpec, MfgpModel};
use mfdb::synthetic::{truth, TrainingPlan};

fn small_database() -> DatabaseModel {
    let plan = TrainingPlan::default();
    let mut db = DatabaseModel::new(ReferenceGeometry::default(), MassProperties::default(), plan.sampling_grid());
    for name in ["CL", "Cl_aileron"] {
        let key: CoefficientKey = name.parse().unwrap();
        let mut level = LevelSpec::new(1, plan.dataset(&key).unwrap());
        level.basis = BasisSpec::CONSTANT;
        level.optimizer = OptimizerConfig { seed: 3, starts: 2, ..Default::default() };
        db.insert(key, MfgpModel::build(vec![level]).unwrap()).unwrap();
    }
    db
}

fn grid() -> GridSpec {
    GridSpec {
        alpha: AxisSpec::Values(vec![-2.0, 5.0, 13.0, 22.0]),
        beta: AxisSpec::Values(vec![-15.0, 0.0, 7.0]),
        delta: BTreeMap::from([(Surface::Aileron, AxisSpec::Values(vec![-25.0, 0.0, 10.0]))]),
    }
}

#[test]
fn ensemble_statistics_match_posterior() {
    let db = small_database();
    let g = grid();
    let prepared = db.prepare(&g).unwrap();
    let n = 400;
    let samples: Vec<DatabaseSample> = (0..n).map(|s| prepared.sample(1000 + s)).collect();
    for key in prepared.keys() {
        let model = db.get(key).unwrap();
        let axes = g.axes_for(key, &[]).unwrap();
        let pts = tensor_points(&axes);
        let (mean, cov) = model.predict(&pts).unwrap();
        let pinned = |i: usize| key.delta_column().is_some_and(|d| pts[(i, d)] == 0.0);
        for i in 0..pts.nrows() {
            let vals = DVector::from_iterator(n as usize, samples.iter().map(|s| s.surface(key).unwrap().values()[i]));
            if pinned(i) {
                assert!(vals.iter().all(|v| *v == 0.0));
                continue;
            }
            let sd = cov[(i, i)].max(0.0).sqrt();
            let se = sd / (n as f64).sqrt();
            assert!((vals.mean() - mean[i]).abs() <= 3.0 * se + 1e-12, "{key} node {i}");
            // every draw inside a five sigma envelope
            assert!(vals.iter().all(|v| (v - mean[i]).abs() <= 5.0 * sd + 1e-12));
            // and the surrogate tracks the generating function
            let x: Vec<f64> = pts.row(i).iter().cloned().collect();
            let (a, b, d) = match key.signature().len() {
                2 => (x[0], x[1], 0.0),
                _ => (x[0], x[1], x[2]),
            };
            let t = truth(key, a, b, d);
            assert!((mean[i] - t).abs() < 0.05 * model.base().dataset().output_range().max(1e-3), "{key} {x:?}");
        }
    }
}

#[test]
fn sampling_is_seed_deterministic() {
    let db = small_database();
    let p = db.prepare(&grid()).unwrap();
    assert_eq!(p.sample(9), p.sample(9));
    assert_ne!(p.sample(9), p.sample(10));
    assert_eq!(sample_database(&db, &grid(), 9).unwrap(), p.sample(9));
    // incomplete databases are reported
    assert!(matches!(db.check_complete(), Err(AeroError::MissingKey(_))));
}

#[test]
fn csv_ingestion() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "alpha,beta,delta,y").unwrap();
    for (a, d, y) in [(0.0, 0.0, 0.0), (0.0, 10.0, 0.02), (4.0, 0.0, 0.0), (4.0, 10.0, 0.03)] {
        writeln!(f, "{a},0,{d},{y}").unwrap();
    }
    f.flush().unwrap();
    let key: CoefficientKey = "Cl_aileron".parse().unwrap();
    let data = ingest_file(&key, f.path(), UncertaintyModel::Wt).unwrap();
    assert_eq!(data.len(), 4);
    assert_eq!(data.noise_sd()[0], WT_FLOOR);
    assert!((data.noise_sd()[1] - 0.05 * 0.01).abs() < 1e-15);
    let avl = ingest_file(&key, f.path(), UncertaintyModel::Avl).unwrap();
    // C(0) = 0, range 0.03, ‖(4, 0, 10)‖
    let expect = 0.002 * (16.0f64 + 100.0).sqrt() * 0.03;
    assert!((avl.noise_sd()[3] - expect).abs() < 1e-15);
    let missing = std::path::Path::new("/nonexistent/table.csv");
    assert!(ingest_file(&key, missing, UncertaintyModel::Wt).is_err());
}

#[test]
fn increments_compose_additively() {
    let s = mfdb::synthetic::truth_sample();
    let (a, b) = (6.0, 4.0);
    let defl: Deflections = BTreeMap::from([(Surface::Aileron, 10.0), (Surface::Rudder, -5.0)]);
    let total = s.total_coefficient(Coefficient::Rolling, a, b, &defl).unwrap();
    let base = s.value(&"Cl".parse().unwrap(), a, b, 0.0).unwrap().value;
    let da = s.value(&"Cl_aileron".parse().unwrap(), a, b, 10.0).unwrap().value;
    let dr = s.value(&"Cl_rudder".parse().unwrap(), a, b, -5.0).unwrap().value;
    assert!((total.value - (base + da + dr)).abs() < 1e-15);
    assert!(!total.extrapolated);
}
