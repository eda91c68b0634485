//! `run <config>`: semiclassical and exact amplitudes over the time grid.

use rayon::prelude::*;
use semiprop::exact::propagate_exact;
use semiprop::propagator::semiclassical_propagator;
use semiprop::C64;
use serde::Serialize;
use std::path::{Path, PathBuf};

use crate::config::{Format, ScenarioConfig, Validated};
use crate::CliError;

pub const CSV_HEADER: [&str; 9] =
    ["t", "Ksc_re", "Ksc_im", "Kex_re", "Kex_im", "abs_err", "rel_err", "n_traj", "config_hash"];

#[derive(Clone, Debug, Serialize)]
pub struct TrajectoryDiagnostic {
    pub zbar_i: Vec<[f64; 2]>,
    pub newton_iterations: usize,
    pub final_residual: f64,
    pub steps: usize,
    pub amplitude: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub sample: usize,
    pub t: f64,
    pub ksc: Option<[f64; 2]>,
    pub kex: Option<[f64; 2]>,
    pub abs_err: f64,
    pub rel_err: f64,
    pub n_traj: usize,
    pub discarded: usize,
    pub error: Option<String>,
    pub trajectories: Vec<TrajectoryDiagnostic>,
    pub config_hash: String,
}

impl Row {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config_hash: String,
    pub rows: Vec<Row>,
    pub failed_samples: usize,
    pub outputs: Vec<PathBuf>,
}

fn pair(c: C64) -> [f64; 2] {
    [c.re, c.im]
}

/// Runs one scenario and writes the requested files.
pub fn run_scenario(cfg: &ScenarioConfig, out_dir: &Path, stem: &str) -> Result<RunReport, CliError> {
    let v = cfg.validate()?;
    let hash = cfg.hash();
    let r = &cfg.run;
    let rows: Vec<Row> = v
        .times
        .par_iter()
        .enumerate()
        .map(|(k, &t)| evaluate(&v, r.t_i, k, t, r.filter_spurious, r.exact_tol, &hash))
        .collect();
    let failed_samples = rows.iter().filter(|r| r.failed()).count();
    std::fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();
    for f in &cfg.output.formats {
        match f {
            Format::Csv => {
                let path = out_dir.join(format!("{stem}.csv"));
                write_csv(&path, &rows)?;
                outputs.push(path);
            }
            Format::Json => {
                let path = out_dir.join(format!("{stem}.json"));
                let mirror = serde_json::json!({ "config": cfg, "config_hash": hash, "rows": rows });
                std::fs::write(&path, serde_json::to_string_pretty(&mirror)? + "\n")?;
                outputs.push(path);
            }
        }
    }
    Ok(RunReport { config_hash: hash, rows, failed_samples, outputs })
}

fn evaluate(v: &Validated, t_i: f64, k: usize, t: f64, filter: bool, exact_tol: f64, hash: &str) -> Row {
    let mut row = Row {
        sample: k,
        t,
        ksc: None,
        kex: None,
        abs_err: f64::NAN,
        rel_err: f64::NAN,
        n_traj: 0,
        discarded: 0,
        error: None,
        trajectories: Vec::new(),
        config_hash: hash.to_string(),
    };
    let mut errors = Vec::new();
    let sc = semiclassical_propagator(&v.family, &v.hamiltonian, &v.z_i, &v.z_f, t_i, t, v.strategy.as_ref(), &v.bvp, filter);
    match &sc {
        Ok(res) => {
            row.ksc = Some(pair(res.ksc));
            row.n_traj = res.trajectories.len();
            row.discarded = res.discarded.len();
            row.trajectories = res
                .trajectories
                .iter()
                .zip(&res.contributions)
                .map(|(tr, c)| TrajectoryDiagnostic {
                    zbar_i: tr.first().zbar.iter().map(|z| pair(*z)).collect(),
                    newton_iterations: tr.diagnostics.newton_iterations,
                    final_residual: tr.diagnostics.residual_history.last().copied().unwrap_or(0.0),
                    steps: tr.diagnostics.steps,
                    amplitude: pair(c.amplitude),
                })
                .collect();
        }
        Err(e) => errors.push(format!("semiclassical: {e}")),
    }
    match propagate_exact(&v.family, &v.hamiltonian, &v.z_i, &v.z_f, t_i, t, exact_tol) {
        Ok(ex) => {
            row.kex = Some(pair(ex.amplitude));
            if let Ok(res) = &sc {
                row.abs_err = (res.ksc - ex.amplitude).norm();
                row.rel_err = row.abs_err / ex.amplitude.norm();
            }
        }
        Err(e) => errors.push(format!("exact: {e}")),
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row
}

fn write_csv(path: &Path, rows: &[Row]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    let nan = [f64::NAN; 2];
    for r in rows {
        let ks = r.ksc.unwrap_or(nan);
        let ke = r.kex.unwrap_or(nan);
        let mut rec: Vec<String> = [r.t, ks[0], ks[1], ke[0], ke[1]].iter().map(|x| x.to_string()).collect();
        rec.push(format!("{:e}", r.abs_err));
        rec.push(format!("{:e}", r.rel_err));
        rec.push(r.n_traj.to_string());
        rec.push(r.config_hash.clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
