use std::sync::OnceLock;

use mfdb::aerodb::{DatabaseModel, PreparedDatabase};
use mfdb::flightsim::{EngineStatus, ManeuverSpec, SimConfig};
use mfdb::gp::OptimizerConfig;
use mfdb::montecarlo::*;
use mfdb::synthetic::TrainingPlan;

fn optimizer() -> OptimizerConfig {
    OptimizerConfig { seed: 17, starts: 2, ..Default::default() }
}

fn database() -> &'static (DatabaseModel, PreparedDatabase) {
    static DB: OnceLock<(DatabaseModel, PreparedDatabase)> = OnceLock::new();
    DB.get_or_init(|| {
        let db = TrainingPlan::default().fit(&optimizer()).unwrap();
        let prepared = db.prepare(&db.grid).unwrap();
        (db, prepared)
    })
}

fn reo() -> SimConfig {
    let mut cfg = SimConfig::new(ManeuverSpec::standard(80.0));
    cfg.engines.status = EngineStatus::RightOut;
    cfg
}

#[test]
fn results_do_not_depend_on_order_or_threads() {
    let (_, prepared) = database();
    let cfg = reo();
    let run = run_prepared(prepared, &cfg, 24, 99, Some(2)).unwrap();
    let serial = run_prepared(prepared, &cfg, 24, 99, Some(1)).unwrap();
    assert_eq!(run, serial);
    for i in (0..24u64).rev() {
        assert_eq!(simulate_sample(prepared, &cfg, 99, i), run.samples[i as usize]);
    }
    // a longer run extends a shorter one
    let longer = run_prepared(prepared, &cfg, 30, 99, Some(1)).unwrap();
    assert_eq!(&longer.samples[..24], &run.samples[..]);
    assert_eq!(run.failed_to_simulate(), 0);
}

#[test]
fn full_pipeline_matches_prepared_run() {
    let (db, prepared) = database();
    let a = run(db, &reo(), 8, 5, Some(1)).unwrap();
    let b = run_prepared(prepared, &reo(), 8, 5, Some(1)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn exact_training_data_gives_a_degenerate_ensemble() {
    let plan = TrainingPlan {
        noise_fraction: 0.0,
        noise_floor: 0.0,
        ..Default::default()
    };
    let mut db = plan.fit(&optimizer()).unwrap();
    // evaluate only where the data pins the surrogate
    db.grid.alpha = mfdb::aerodb::AxisSpec::Values(plan.alpha.clone());
    db.grid.beta = mfdb::aerodb::AxisSpec::Values(plan.beta.clone());
    let r = run(&db, &reo(), 20, 3, Some(1)).unwrap();
    let s = r.summary().unwrap();
    for m in [s.pitch, s.roll, s.yaw] {
        assert!(m.variance < 1e-10, "{m:?}");
    }
    let roll = r.roll();
    assert!(roll.iter().all(|v| (v - roll[0]).abs() < 1e-5));
}

#[test]
fn single_sample() {
    let (_, prepared) = database();
    let r = run_prepared(prepared, &reo(), 1, 4, None).unwrap();
    let s = r.summary().unwrap();
    assert_eq!(s.samples, 1);
    assert_eq!(s.roll.variance, 0.0);
    assert!(s.roll.failure_rate == 0.0 || s.roll.failure_rate == 1.0);
    assert!(convergence_trace(&r.roll()).is_err());
    let cdf = EmpiricalCdf::new(&r.roll()).unwrap();
    assert_eq!(cdf.quantile(0.1), r.roll()[0]);
    assert!(matches!(run_prepared(prepared, &reo(), 0, 4, None), Err(McError::NoSamples)));
}

#[test]
fn redesigned_aileron_limit_meets_the_target() {
    let (_, prepared) = database();
    let mut cfg = reo();
    cfg.limits.aileron = 12.0;
    let before = run_prepared(prepared, &cfg, 60, 21, None).unwrap();
    let x = 0.9;
    let q = design_deflection(&EmpiricalCdf::new(&before.roll()).unwrap(), x, cfg.limits.aileron).unwrap();
    cfg.limits.aileron = q.deflection;
    let after = run_prepared(prepared, &cfg, 60, 21, None).unwrap();
    assert!(success_rate(&after.roll()).unwrap() >= x);
    // the histories are unchanged, only the metric is rescaled
    for (a, b) in before.samples.iter().zip(&after.samples) {
        assert_eq!(a.metrics.unwrap().pitch, b.metrics.unwrap().pitch);
    }
}
