use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use mfdb::aerodb::{CoefficientKey, DatabaseModel};
use mfdb::flightsim::{simulate, SimConfig, SimResult};
use mfdb::gci::{gci_report, report_from_sizes, Dimension, GciReport, GridLevel};
use mfdb::io::{format_number, read_table, write_csv, write_table, IoError, Table};
use mfdb::manifest::{FittedModel, Manifest};
use mfdb::mfgp::MfgpModel;
use mfdb::montecarlo::{convergence_trace, design_deflection, EmpiricalCdf, McRun, Summary};
use mfdb::turbulence::{perturb, Componentiality, EigenvectorMode, PerturbationSpec, StressState};
use mfdb::Error;
use nalgebra::DMatrix;

use crate::args::*;
use crate::report::Report;

const STRESS_COLUMNS: [&str; 6] = ["R11", "R22", "R33", "R12", "R13", "R23"];

fn config_error(path: impl AsRef<Path>, msg: impl Into<String>) -> Error {
    Error::Config {
        path: path.as_ref().display().to_string(),
        msg: msg.into(),
    }
}

fn file_error(path: &Path, source: std::io::Error) -> Error {
    IoError::File {
        path: path.to_path_buf(),
        source,
    }
    .into()
}

fn create_dir(dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|e| file_error(dir, e))
}

fn emit(report: &Report, json: bool) {
    print!("{}", report.render(json));
}

fn summary_name(json: bool) -> &'static str {
    if json {
        "summary.json"
    } else {
        "summary.txt"
    }
}

pub fn fit(args: &FitArgs, json: bool) -> Result<(), Error> {
    let manifest = Manifest::load(&args.manifest)?;
    let dir = args.manifest.parent().unwrap_or(Path::new("."));
    let start = Instant::now();
    let model = manifest.fit(dir)?;
    info!("fitted {} in {:.2?}", args.manifest.display(), start.elapsed());
    model.save(&args.out)?;
    let mut r = Report::new();
    match &model {
        FittedModel::Surrogate { inputs, model } => {
            r.text("kind", "surrogate")
                .text("inputs", &inputs.join(","))
                .int("levels", model.levels() as u64);
            for t in 1..=model.levels() {
                r.num(&format!("log_likelihood_{t}"), level_likelihood(model, t));
            }
        }
        FittedModel::Database(db) => {
            r.text("kind", "database").int("coefficients", db.len() as u64);
            if let Err(e) = db.check_complete() {
                warn!("{e}; the database cannot be flown");
            }
        }
    }
    emit(&r, json);
    Ok(())
}

fn level_likelihood(model: &MfgpModel, t: usize) -> f64 {
    match model.level(t) {
        Some(l) => l.log_likelihood(),
        None => model.base().log_likelihood(),
    }
}

/// Model to evaluate, the names of its inputs and the fidelity level.
fn select_model<'a>(fitted: &'a FittedModel, args: &GridArgs) -> Result<(&'a MfgpModel, Vec<String>, usize), Error> {
    let (model, inputs) = match (fitted, &args.key) {
        (FittedModel::Surrogate { inputs, model }, None) => (model, inputs.clone()),
        (FittedModel::Surrogate { .. }, Some(_)) => {
            return Err(config_error("--key", "only database models have coefficient keys"))
        }
        (FittedModel::Database(_), None) => return Err(config_error("--key", "database models need a coefficient key")),
        (FittedModel::Database(db), Some(k)) => {
            let key: CoefficientKey = k.parse()?;
            let model = db.get(&key).ok_or_else(|| mfdb::aerodb::AeroError::MissingKey(key.to_string()))?;
            let inputs = key.signature().iter().map(|i| i.column().to_string()).collect();
            (model, inputs)
        }
    };
    let level = args.level.unwrap_or(model.levels());
    if level == 0 || level > model.levels() {
        return Err(config_error(
            "--level",
            format!("model has levels 1..={}, got {level}", model.levels()),
        ));
    }
    Ok((model, inputs, level))
}

/// Query points from a grid CSV whose header must equal `inputs`.
fn read_grid(path: &Path, inputs: &[String]) -> Result<(Table, DMatrix<f64>), Error> {
    let table = read_table(path)?;
    if table.headers != inputs {
        return Err(config_error(
            path,
            format!("grid columns {} do not match model inputs {}", table.headers.join(","), inputs.join(",")),
        ));
    }
    let n = table.rows.len();
    let x = DMatrix::from_fn(n, inputs.len(), |i, j| table.rows[i][j]);
    Ok((table, x))
}

fn write_output(out: Option<&PathBuf>, headers: &[&str], rows: &[Vec<f64>]) -> Result<(), Error> {
    match out {
        Some(p) => Ok(write_table(p, headers, rows)?),
        None => {
            let stdout = std::io::stdout();
            write_csv(stdout.lock(), headers, rows).map_err(|e| file_error(Path::new("<stdout>"), e))
        }
    }
}

pub fn predict(args: &PredictArgs) -> Result<(), Error> {
    let fitted = FittedModel::load(&args.grid.model)?;
    let (model, inputs, level) = select_model(&fitted, &args.grid)?;
    let (table, x) = read_grid(&args.grid.grid, &inputs)?;
    let mut headers: Vec<&str> = inputs.iter().map(String::as_str).collect();
    headers.extend(["mean", "sd", "lower", "upper"]);
    let mut rows = Vec::with_capacity(table.rows.len());
    if !table.rows.is_empty() {
        let (mean, cov) = model.predict_level(level, &x)?;
        for (i, input) in table.rows.iter().enumerate() {
            let sd = cov[(i, i)].max(0.0).sqrt();
            let mut row = input.clone();
            row.extend([mean[i], sd, mean[i] - 2.0 * sd, mean[i] + 2.0 * sd]);
            rows.push(row);
        }
    }
    write_output(args.grid.out.as_ref(), &headers, &rows)
}

pub fn sample(args: &SampleArgs) -> Result<(), Error> {
    let fitted = FittedModel::load(&args.grid.model)?;
    let (model, inputs, level) = select_model(&fitted, &args.grid)?;
    let (table, x) = read_grid(&args.grid.grid, &inputs)?;
    let names: Vec<String> = (1..=args.n).map(|i| format!("draw_{i}")).collect();
    let mut headers: Vec<&str> = inputs.iter().map(String::as_str).collect();
    headers.extend(names.iter().map(String::as_str));
    let mut rows: Vec<Vec<f64>> = table.rows.clone();
    if !rows.is_empty() && args.n > 0 {
        let draws = model.sample_level(level, &x, args.n, args.seed)?;
        for (i, row) in rows.iter_mut().enumerate() {
            row.extend(draws.column(i).iter());
        }
    }
    write_output(args.grid.out.as_ref(), &headers, &rows)
}

fn perturbation_specs(args: &PerturbArgs) -> Result<Vec<PerturbationSpec>, Error> {
    match (args.target, args.eigenvectors) {
        (Some(t), Some(v)) => {
            let target = match t {
                Target::One => Componentiality::One,
                Target::Two => Componentiality::Two,
                Target::Three => Componentiality::Three,
            };
            let mode = match v {
                Alignment::Max => EigenvectorMode::VMax,
                Alignment::Min => EigenvectorMode::VMin,
            };
            Ok(vec![PerturbationSpec::new(target, mode, args.relaxation)?])
        }
        _ => Ok(PerturbationSpec::canonical(args.relaxation)?.to_vec()),
    }
}

pub fn perturb_cmd(args: &PerturbArgs) -> Result<(), Error> {
    let specs = perturbation_specs(args)?;
    let table = read_table(&args.field)?;
    let cols: Vec<usize> = STRESS_COLUMNS
        .iter()
        .map(|c| {
            table.column_index(c).ok_or_else(|| IoError::MissingColumn {
                path: args.field.clone(),
                column: c.to_string(),
            })
        })
        .collect::<Result<_, _>>()?;
    let k_col = table.column_index("k");
    let states: Vec<StressState> = table
        .rows
        .iter()
        .map(|row| {
            let c = [0, 1, 2, 3, 4, 5].map(|j| row[cols[j]]);
            match k_col {
                Some(k) => StressState::from_components(c, row[k]),
                None => StressState::from_components(c, 0.5 * (c[0] + c[1] + c[2])),
            }
        })
        .collect::<Result<_, _>>()?;
    create_dir(&args.out_dir)?;
    let headers: Vec<&str> = table.headers.iter().map(String::as_str).collect();
    for spec in specs {
        let mut rows = table.rows.clone();
        for (row, state) in rows.iter_mut().zip(&states) {
            let p = perturb(state, &spec)?;
            for (j, v) in p.components().into_iter().enumerate() {
                row[cols[j]] = v;
            }
        }
        let path = args.out_dir.join(format!("{}.csv", spec.label()));
        write_table(&path, &headers, &rows)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn gci_summary(r: &GciReport) -> Report {
    let (lo, hi) = r.interval();
    let mut out = Report::new();
    out.num("h1", r.h[0])
        .num("h2", r.h[1])
        .num("h3", r.h[2])
        .num("r21", r.r21)
        .num("r32", r.r32)
        .num("p", r.p)
        .num("phi_fine", r.phi_fine)
        .num("phi_ext", r.phi_ext)
        .num("e_a", r.e_a)
        .num("gci_fine", r.gci_fine)
        .num("error_bar", r.error_bar)
        .num("lower", lo)
        .num("upper", hi);
    out
}

fn three<T: Copy>(flag: &str, v: &[T]) -> Result<[T; 3], Error> {
    match v {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => Err(config_error(flag, format!("expected 3 comma-separated values, got {}", v.len()))),
    }
}

pub fn gci(args: &GciArgs, json: bool) -> Result<(), Error> {
    let phi = three("--phi", &args.phi)?;
    let report = match (&args.nodes, &args.h) {
        (Some(n), None) => {
            let dim = match args.dim {
                Some(2) => Dimension::Two,
                Some(3) => Dimension::Three,
                other => return Err(config_error("--dim", format!("expected 2 or 3, got {other:?}"))),
            };
            let n = three("--nodes", n)?;
            let levels = [0, 1, 2].map(|i| GridLevel { nodes: n[i], phi: phi[i] });
            gci_report(&levels, dim)?
        }
        (None, Some(h)) => report_from_sizes(three("--h", h)?, phi)?,
        _ => return Err(config_error("--nodes", "give either --nodes with --dim or --h")),
    };
    emit(&gci_summary(&report), json);
    Ok(())
}

/// A fitted database, fitting it first when given a manifest.
fn load_database(path: &Path) -> Result<DatabaseModel, Error> {
    let fitted = if path.extension().is_some_and(|e| e == "toml") {
        let start = Instant::now();
        let m = Manifest::load(path)?.fit(path.parent().unwrap_or(Path::new(".")))?;
        info!("fitted {} in {:.2?}", path.display(), start.elapsed());
        m
    } else {
        FittedModel::load(path)?
    };
    match fitted {
        FittedModel::Database(db) => {
            db.check_complete()?;
            Ok(db)
        }
        FittedModel::Surrogate { .. } => Err(config_error(path, "expected a database model, found a surrogate")),
    }
}

fn sim_summary(r: &SimResult, seed: Option<u64>) -> Report {
    let peak = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut out = Report::new();
    match seed {
        Some(s) => out.int("seed", s),
        None => out.text("database", "mean"),
    };
    out.num("alpha_trim", r.trim.alpha)
        .num("elevator_trim", r.trim.elevator)
        .num("max_aileron", peak(&r.aileron))
        .num("max_elevator", peak(&r.elevator))
        .num("max_rudder", peak(&r.rudder))
        .num("rho_pitch", r.metrics.pitch)
        .num("rho_roll", r.metrics.roll)
        .num("rho_yaw", r.metrics.yaw)
        .text("success", if r.metrics.success() { "true" } else { "false" })
        .num("max_residual", r.max_residual())
        .text("extrapolated", if r.extrapolated { "true" } else { "false" });
    out
}

pub fn simulate_cmd(args: &SimulateArgs, json: bool) -> Result<(), Error> {
    let config = SimConfig::load(&args.inputs.maneuver)?;
    let db = load_database(&args.inputs.db)?;
    let prepared = db.prepare(&db.grid)?;
    let sample = match args.seed {
        Some(s) if !args.mean => prepared.sample(s),
        _ => prepared.mean_sample(),
    };
    let result = simulate(&sample, &config)?;
    if result.extrapolated {
        warn!("database tables were evaluated outside their grids");
    }
    create_dir(&args.inputs.out)?;
    write_table(
        &args.inputs.out.join("history.csv"),
        &SimResult::HISTORY_HEADERS,
        &result.history_rows(),
    )?;
    let report = sim_summary(&result, if args.mean { None } else { args.seed });
    report.save(&args.inputs.out.join(summary_name(json)), json)?;
    emit(&report, json);
    Ok(())
}

fn mc_summary(s: &Summary, seed: u64) -> Report {
    let mut out = Report::new();
    out.int("seed", seed)
        .int("samples", s.samples as u64)
        .int("simulated", s.simulated as u64)
        .int("failed_to_simulate", s.failed_to_simulate as u64)
        .int("extrapolated", s.extrapolated as u64);
    for (name, m) in [("pitch", &s.pitch), ("roll", &s.roll), ("yaw", &s.yaw)] {
        out.num(&format!("{name}_mean"), m.mean)
            .num(&format!("{name}_variance"), m.variance)
            .num(&format!("{name}_failure_rate"), m.failure_rate);
    }
    out
}

fn write_metrics(path: &Path, run: &McRun) -> Result<(), Error> {
    let file = File::create(path).map_err(|e| file_error(path, e))?;
    let csv_err = |source| IoError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["index", "seed", "simulated", "extrapolated", "pitch", "roll", "yaw"])
        .map_err(csv_err)?;
    for s in &run.samples {
        let mut rec = vec![
            s.index.to_string(),
            s.seed.to_string(),
            u8::from(s.metrics.is_some()).to_string(),
            u8::from(s.extrapolated).to_string(),
        ];
        match s.metrics {
            Some(m) => rec.extend(m.as_array().map(format_number)),
            None => rec.extend(["NaN", "NaN", "NaN"].map(String::from)),
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| file_error(path, e))
}

fn write_convergence(path: &Path, run: &McRun) -> Result<(), Error> {
    let headers = [
        "n",
        "pitch_mean",
        "pitch_variance",
        "roll_mean",
        "roll_variance",
        "yaw_mean",
        "yaw_variance",
    ];
    let mut rows = Vec::new();
    if run.metrics().len() >= 2 {
        let traces = [run.pitch(), run.roll(), run.yaw()]
            .map(|v| convergence_trace(&v))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        for i in 1..traces[0].len() {
            let mut row = vec![traces[0][i].count as f64];
            for t in &traces {
                row.push(t[i].mean);
                row.push(t[i].variance.expect("defined from the second value on"));
            }
            rows.push(row);
        }
    }
    Ok(write_table(path, &headers, &rows)?)
}

pub fn montecarlo(args: &MonteCarloArgs, json: bool) -> Result<(), Error> {
    let config = SimConfig::load(&args.inputs.maneuver)?;
    let db = load_database(&args.inputs.db)?;
    let start = Instant::now();
    let run = mfdb::montecarlo::run(&db, &config, args.samples, args.seed, args.jobs)?;
    info!("{} samples in {:.2?}", run.len(), start.elapsed());
    let failed = run.failed_to_simulate();
    if failed > 0 {
        warn!("{failed} of {} samples could not be simulated", run.len());
        if let Some(e) = run.samples.iter().find_map(|s| s.error.as_deref()) {
            warn!("first failure: {e}");
        }
    }
    let summary = run.summary()?;
    let out = &args.inputs.out;
    create_dir(out)?;
    write_metrics(&out.join("metrics.csv"), &run)?;
    for (name, values) in [("pitch", run.pitch()), ("roll", run.roll()), ("yaw", run.yaw())] {
        let cdf = EmpiricalCdf::new(&values)?;
        let rows: Vec<Vec<f64>> = cdf.points().into_iter().map(|(v, p)| vec![v, p]).collect();
        write_table(
            &out.join(format!("cdf_{name}.csv")),
            &["value", "cumulative_probability"],
            &rows,
        )?;
    }
    write_convergence(&out.join("convergence.csv"), &run)?;
    let report = mc_summary(&summary, args.seed);
    report.save(&out.join(summary_name(json)), json)?;
    emit(&report, json);
    Ok(())
}

pub fn design(args: &DesignArgs, json: bool) -> Result<(), Error> {
    let table = read_table(&args.cdf)?;
    let col = table.column_index("value").ok_or_else(|| IoError::MissingColumn {
        path: args.cdf.clone(),
        column: "value".into(),
    })?;
    let cdf = EmpiricalCdf::new(&table.column(col))?;
    let q = design_deflection(&cdf, args.x, args.limit)?;
    let mut r = Report::new();
    r.num("success_rate", q.success_rate)
        .num("limit", q.limit)
        .num("quantile", q.quantile)
        .num("deflection", q.deflection);
    emit(&r, json);
    Ok(())
}

/// Flushes standard output, reporting a closed pipe as an I/O failure.
pub fn flush_stdout() -> Result<(), Error> {
    std::io::stdout().flush().map_err(|e| file_error(Path::new("<stdout>"), e))
}
