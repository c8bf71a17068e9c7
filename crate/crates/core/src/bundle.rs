//! The example data set shipped in `data/`: the analytic two-fidelity pair,
//! training tables and configuration for the synthetic aircraft, and a small
//! Reynolds stress profile.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Rotation3, Vector3};

use crate::aerodb::{simulator_keys, UncertaintyModel};
use crate::flightsim::{EngineStatus, ManeuverSpec, SimConfig};
use crate::io::{write_table, IoError};
use crate::manifest::database_manifest_text;
use crate::synthetic::{f_hf, f_lf, unit_grid, TrainingPlan, HF_POINTS};
use crate::turbulence::{eigenvalues_from_barycentric, reconstruct_stress, AnisotropyTensor, X_1C, X_2C, X_3C};
use crate::Error;

/// Optimizer seed of the bundled manifests.
pub const FIT_SEED: u64 = 42;
/// Local searches per hyperparameter fit in the aircraft manifest.
pub const DATABASE_STARTS: usize = 2;
/// Airspeed of the bundled maneuver (m/s).
pub const AIRSPEED: f64 = 80.0;

const SURROGATE_MANIFEST: &str = r#"kind = "surrogate"

[optimizer]
seed = 42

[[level]]
fidelity = 1
csv = "lf.csv"
basis_degree = 1

[[level]]
fidelity = 2
csv = "hf.csv"
basis_degree = 0
"#;

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|source| {
        IoError::File {
            path: path.to_path_buf(),
            source,
        }
        .into()
    })
}

fn create(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|source| {
        IoError::File {
            path: dir.to_path_buf(),
            source,
        }
        .into()
    })
}

fn xy(x: &[f64], f: impl Fn(f64) -> f64) -> Vec<Vec<f64>> {
    x.iter().map(|v| vec![*v, f(*v)]).collect()
}

/// Right-engine-out reversal at the bundled airspeed.
pub fn maneuver_config() -> SimConfig {
    let mut cfg = SimConfig::new(ManeuverSpec::standard(AIRSPEED));
    cfg.engines.status = EngineStatus::RightOut;
    cfg
}

/// Reynolds stress profile across a wall layer: near two-component at the
/// wall, relaxing to isotropy at the edge, with the principal axes turning.
pub fn stress_profile(n: usize) -> Vec<Vec<f64>> {
    unit_grid(n)
        .into_iter()
        .map(|y| {
            let w1 = 0.35 * (PI * y).sin();
            let x = X_1C * w1 + X_2C * ((1.0 - y) * (1.0 - w1)) + X_3C * (y * (1.0 - w1));
            let l = eigenvalues_from_barycentric(x);
            let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), 0.6 * (1.0 - y)).into_inner();
            let b = rot * Matrix3::from_diagonal(&Vector3::new(l[0], l[1], l[2])) * rot.transpose();
            let k = 0.5 + 2.0 * y * (1.0 - y);
            let s = reconstruct_stress(&AnisotropyTensor(b), k).expect("positive k");
            let mut row = vec![y];
            row.extend(s.components());
            row.push(s.k());
            row
        })
        .collect()
}

/// Writes the data set under `dir` (`analytic/`, `aircraft/`, `turbulence/`).
pub fn write_bundle(dir: &Path) -> Result<(), Error> {
    let analytic = dir.join("analytic");
    create(&analytic)?;
    write_table(&analytic.join("lf.csv"), &["x", "y"], &xy(&unit_grid(21), f_lf))?;
    write_table(&analytic.join("hf.csv"), &["x", "y"], &xy(&HF_POINTS, f_hf))?;
    let grid: Vec<Vec<f64>> = unit_grid(200).into_iter().map(|x| vec![x]).collect();
    write_table(&analytic.join("grid.csv"), &["x"], &grid)?;
    write_text(&analytic.join("surrogate.toml"), SURROGATE_MANIFEST)?;

    let aircraft = dir.join("aircraft");
    create(&aircraft)?;
    let plan = TrainingPlan::default();
    let mut tables = BTreeMap::new();
    for key in simulator_keys() {
        let name = PathBuf::from(format!("{key}.csv"));
        let t = plan.table(&key);
        let headers: Vec<&str> = t.headers.iter().map(String::as_str).collect();
        write_table(&aircraft.join(&name), &headers, &t.rows)?;
        tables.insert(key, (name, UncertaintyModel::Explicit));
    }
    let manifest = database_manifest_text(FIT_SEED, DATABASE_STARTS, &plan.sampling_grid(), &tables);
    write_text(&aircraft.join("database.toml"), &manifest)?;
    let cfg = toml::to_string(&maneuver_config()).expect("configuration serializes");
    write_text(&aircraft.join("maneuver.toml"), &cfg)?;

    let turbulence = dir.join("turbulence");
    create(&turbulence)?;
    write_table(
        &turbulence.join("field.csv"),
        &["y", "R11", "R22", "R33", "R12", "R13", "R23", "k"],
        &stress_profile(12),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::turbulence::{anisotropy, eig_decompose, to_barycentric, StressState};

    #[test]
    fn profile_is_realizable() {
        for row in stress_profile(12) {
            let s = StressState::from_components([row[1], row[2], row[3], row[4], row[5], row[6]], row[7]).unwrap();
            let e = eig_decompose(&anisotropy(&s).unwrap());
            assert!(to_barycentric(e.values).unwrap().is_realizable());
        }
    }

    #[test]
    fn maneuver_round_trips() {
        let text = toml::to_string(&maneuver_config()).unwrap();
        assert_eq!(SimConfig::parse(&text, Path::new("m.toml")).unwrap(), maneuver_config());
    }
}
