//! Brute-force calibration of the aileron limit at which the right-engine-out
//! reversal fails with probability 0.30 on the synthetic aircraft.
//!
//! ```text
//! cargo run --release -p mfdb --example calibrate -- 100000
//! ```

use mfdb::bundle::{maneuver_config, DATABASE_STARTS, FIT_SEED};
use mfdb::gp::OptimizerConfig;
use mfdb::montecarlo::{run_prepared, EmpiricalCdf};
use mfdb::synthetic::TrainingPlan;

/// Master seed of the calibration ensemble.
const SEED: u64 = 0x5EED_CA11;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let optimizer = OptimizerConfig {
        seed: FIT_SEED,
        starts: DATABASE_STARTS,
        ..Default::default()
    };
    let db = TrainingPlan::default().fit(&optimizer).expect("synthetic aircraft fits");
    let prepared = db.prepare(&db.grid).expect("grid posterior factorizes");
    let cfg = maneuver_config();
    let run = run_prepared(&prepared, &cfg, n, SEED, None).expect("nonempty ensemble");
    let peaks: Vec<f64> = run.roll().iter().map(|r| cfg.limits.aileron * (1.0 - r)).collect();
    let cdf = EmpiricalCdf::new(&peaks).expect("finite peaks");
    println!("samples {n}, failed to simulate {}", run.failed_to_simulate());
    for q in [0.5, 0.6, 0.7, 0.8] {
        println!("q{q}: {:.17e}", cdf.quantile(q));
    }
}
