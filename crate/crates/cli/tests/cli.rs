use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mfdb::gp::{BasisSpec, Dataset, GpModel, OptimizerConfig};
use mfdb::synthetic::{f_hf, unit_grid, HF_POINTS};
use nalgebra::DMatrix;

fn single_fidelity_rmse(xs: &[f64]) -> f64 {
    let y: Vec<f64> = HF_POINTS.iter().map(|x| f_hf(*x)).collect();
    let data = Dataset::from_1d(&HF_POINTS, &y, &[0.0; 4]).unwrap();
    let cfg = OptimizerConfig { seed: 42, ..Default::default() };
    let gp = GpModel::fit(data, BasisSpec::default(), &cfg).unwrap();
    let mean = gp.predict_mean(&DMatrix::from_column_slice(xs.len(), 1, xs)).unwrap();
    (xs.iter().zip(mean.iter()).map(|(x, m)| (m - f_hf(*x)).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_mfdb"));
    c.env_remove("MFDB_LOG");
    c
}

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn fit_surrogate(dir: &Path) -> PathBuf {
    let model = dir.join("surrogate.json");
    let manifest = data().join("analytic/surrogate.toml");
    let o = run(&["fit", "--manifest", p(&manifest), "--out", p(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    model
}

fn value(report: &str, key: &str) -> f64 {
    report
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("{key} missing from {report}"))
        .parse()
        .unwrap()
}

#[test]
fn every_command_has_help() {
    for cmd in ["fit", "predict", "sample", "perturb", "gci", "simulate", "montecarlo", "design"] {
        let o = run(&[cmd, "--help"]);
        assert!(o.status.success());
        assert!(stdout(&o).contains("--"), "{cmd}");
    }
    let o = run(&["gci", "--bogus"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gci_hand_case() {
    let o = run(&["gci", "--nodes", "16,4,1", "--phi", "1.0625,1.25,2", "--dim", "2"]);
    assert!(o.status.success());
    let r = stdout(&o);
    assert!((value(&r, "p") - 2.0).abs() < 1e-9);
    assert!((value(&r, "phi_ext") - 1.0).abs() < 1e-9);
    assert!((value(&r, "gci_fine") - 0.073529).abs() < 1e-6);
    let o = run(&["--json", "gci", "--nodes", "16,4,1", "--phi", "1.0625,1.25,2", "--dim", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["e_a"].as_f64().unwrap() - 0.17647).abs() < 1e-5);
}

#[test]
fn errors_are_single_tagged_lines() {
    let o = run(&["gci", "--nodes", "1,4,16", "--phi", "1.0625,1.25,2", "--dim", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert_eq!(e.lines().count(), 1);
    assert!(e.starts_with("error[gci]: "), "{e}");
    let o = run(&["design", "--cdf", "/nonexistent.csv", "--x", "0.5", "--limit", "25"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).starts_with("error[io]: "));
}

#[test]
fn surrogate_fit_predict_and_sample() {
    let dir = tempfile::tempdir().unwrap();
    let model = fit_surrogate(dir.path());
    let grid = data().join("analytic/grid.csv");
    let out = dir.path().join("pred.csv");
    let o = run(&["predict", "--model", p(&model), "--grid", p(&grid), "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,mean,sd,lower,upper"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 200);
    let xs = unit_grid(200);
    let mse = rows.iter().zip(&xs).map(|(r, x)| (r[1] - f_hf(*x)).powi(2)).sum::<f64>() / 200.0;
    let sf = single_fidelity_rmse(&xs);
    assert!(mse.sqrt() < sf, "rmse {} vs single-fidelity {sf}", mse.sqrt());
    assert!(rows.iter().all(|r| r[3] <= r[1] && r[1] <= r[4]));

    // empty grid: header only
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "x\n").unwrap();
    let o = run(&["predict", "--model", p(&model), "--grid", p(&empty)]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "x,mean,sd,lower,upper\n");

    // sampling needs a seed and is reproducible with one
    let o = run(&["sample", "--model", p(&model), "--grid", p(&grid), "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    let a = run(&["sample", "--model", p(&model), "--grid", p(&grid), "--n", "4", "--seed", "8"]);
    let b = run(&["sample", "--model", p(&model), "--grid", p(&grid), "--n", "4", "--seed", "8"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("x,draw_1,draw_2,draw_3,draw_4\n"));

    // wrong grid columns
    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "alpha\n1\n").unwrap();
    let o = run(&["predict", "--model", p(&model), "--grid", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_manifest_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("m.toml");
    fs::write(&m, "kind = \"surrogate\"\n[optimizer]\nstarts = 2\n").unwrap();
    let o = run(&["fit", "--manifest", p(&m), "--out", p(&dir.path().join("o.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
    let missing = dir.path().join("none.toml");
    let o = run(&["fit", "--manifest", p(&missing), "--out", p(&dir.path().join("o.json"))]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn zero_relaxation_leaves_the_field_unchanged() {
    let dir = tempfile::tempdir().unwrap();
    let field = data().join("turbulence/field.csv");
    let o = run(&["perturb", "--field", p(&field), "--out-dir", p(dir.path()), "--relaxation", "0"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let input = fs::read(&field).unwrap();
    for name in ["1c_max", "2c_max", "3c_max"] {
        assert_eq!(fs::read(dir.path().join(format!("{name}.csv"))).unwrap(), input, "{name}");
    }
    // the v_min files swap the extreme eigenvectors but keep k
    let swapped = fs::read_to_string(dir.path().join("1c_min.csv")).unwrap();
    assert_ne!(swapped.as_bytes(), &input[..]);
    let k_in: Vec<String> = String::from_utf8(input).unwrap().lines().map(|l| l.rsplit(',').next().unwrap().to_string()).collect();
    let k_out: Vec<String> = swapped.lines().map(|l| l.rsplit(',').next().unwrap().to_string()).collect();
    assert_eq!(k_in, k_out);

    let o = run(&["perturb", "--field", p(&field), "--out-dir", p(dir.path()), "--relaxation", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn single_perturbation_selection() {
    let dir = tempfile::tempdir().unwrap();
    let field = data().join("turbulence/field.csv");
    let o = run(&[
        "perturb", "--field", p(&field), "--out-dir", p(dir.path()), "--relaxation", "1", "--target", "3c",
        "--eigenvectors", "max",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files: Vec<_> = fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(files.len(), 1);
    // full relaxation to the isotropic state: R = (2k/3) I
    let text = fs::read_to_string(dir.path().join("3c_max.csv")).unwrap();
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let k = v[7];
        for i in 1..4 {
            assert!((v[i] - 2.0 * k / 3.0).abs() < 1e-10);
        }
        for i in 4..7 {
            assert!(v[i].abs() < 1e-10);
        }
    }
}

#[test]
fn design_boundaries() {
    let dir = tempfile::tempdir().unwrap();
    let cdf = dir.path().join("cdf.csv");
    fs::write(&cdf, "value,cumulative_probability\n-0.4,0.25\n-0.1,0.5\n0.2,0.75\n0.5,1\n").unwrap();
    let q = |x: &str| {
        let o = run(&["design", "--cdf", p(&cdf), "--x", x, "--limit", "15"]);
        assert!(o.status.success(), "{}", stderr(&o));
        let r = stdout(&o);
        (value(&r, "quantile"), value(&r, "deflection"))
    };
    assert_eq!(q("0").0, 0.5);
    assert_eq!(q("1"), (-0.4, 15.0 * 1.4));
    assert_eq!(q("0.5").0, -0.1);
    let o = run(&["design", "--cdf", p(&cdf), "--x", "1.2", "--limit", "15"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_requires_a_database_choice() {
    let dir = tempfile::tempdir().unwrap();
    let db = data().join("aircraft/database.toml");
    let man = data().join("aircraft/maneuver.toml");
    let o = run(&["simulate", "--db", p(&db), "--maneuver", p(&man), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--db", p(&db), "--maneuver", p(&man), "--out", p(dir.path()), "--seed", "3", "--mean"]);
    assert_eq!(o.status.code(), Some(2));
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn database_simulation_and_monte_carlo() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("db.json");
    let manifest = data().join("aircraft/database.toml");
    let man = data().join("aircraft/maneuver.toml");
    let o = run(&["fit", "--manifest", p(&manifest), "--out", p(&model)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("coefficients = 20"));

    let sim = dir.path().join("sim");
    let o = run(&["simulate", "--db", p(&model), "--maneuver", p(&man), "--out", p(&sim), "--mean"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let history = fs::read_to_string(sim.join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 602);
    assert!(history.starts_with("time,bank,aileron,elevator,rudder,"));
    let r = stdout(&o);
    assert!(value(&r, "rho_roll") < 1.0);
    assert_eq!(fs::read_to_string(sim.join("summary.txt")).unwrap(), r);

    // a table key can be queried directly from the database model
    let grid = dir.path().join("g.csv");
    fs::write(&grid, "alpha,beta,delta\n4,0,10\n").unwrap();
    let o = run(&["predict", "--model", p(&model), "--grid", p(&grid), "--key", "Cl_aileron"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = run(&["predict", "--model", p(&model), "--grid", p(&grid)]);
    assert_eq!(o.status.code(), Some(2));

    let mc = |jobs: &str, name: &str| {
        let out = dir.path().join(name);
        let o = run(&[
            "--json", "montecarlo", "--db", p(&model), "--maneuver", p(&man), "--samples", "16", "--seed", "11", "--jobs",
            jobs, "--out", p(&out),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        out
    };
    let a = read_dir_bytes(&mc("1", "mc1"));
    let b = read_dir_bytes(&mc("3", "mc3"));
    assert_eq!(a, b);
    let names: Vec<&str> = a.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        ["cdf_pitch.csv", "cdf_roll.csv", "cdf_yaw.csv", "convergence.csv", "metrics.csv", "summary.json"]
    );
    let summary: serde_json::Value = serde_json::from_slice(&a[5].1).unwrap();
    assert_eq!(summary["samples"], 16);
    // convergence rows start at n = 2
    let conv = String::from_utf8(a[3].1.clone()).unwrap();
    assert_eq!(conv.lines().count(), 16);
    assert!(conv.lines().nth(1).unwrap().starts_with("2,"));
}
