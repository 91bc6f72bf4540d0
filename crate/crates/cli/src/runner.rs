//! Runs experiments and writes their outputs.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use nufrecon::io::{mask_pbms, write_binary_map, write_image_csv, write_pgm16, write_pgm16_auto, write_rows};
use nufrecon::metrics::{jump_cells, ErrorReport};
use nufrecon::reconstruction::{edge_adaptive_l2, hotv_l1, ir_l1};
use nufrecon::{ErrorRow, ImageVector, ReconstructionResult, ScenarioData};
use serde::Serialize;

use crate::config::{ExperimentConfig, Method};
use crate::error::{CliError, Result};
use crate::presets::preset;

/// Truth differences above this mark a 2D jump cell.
const JUMP_CELL_THRESHOLD: f64 = 0.05;

/// Floor of the log-scale error images.
const LOG_ERROR_FLOOR: f64 = -8.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRow {
    pub experiment: String,
    pub method: String,
    pub stage: String,
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
    pub converged: bool,
}

/// What one experiment produced.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub rows: Vec<ErrorRow>,
    pub stages: Vec<StageRow>,
    pub warnings: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    crate_version: &'static str,
    fidelity_scale: f64,
    jump_cells: usize,
    files: Vec<String>,
    config: &'a ExperimentConfig,
}

fn create(dir: &Path, name: &str, files: &mut Vec<String>) -> Result<BufWriter<File>> {
    files.push(name.to_string());
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn log_error_image(err: &ImageVector) -> ImageVector {
    let data = err.data.iter().map(|&e| if e > 0.0 { e.log10().max(LOG_ERROR_FLOOR) } else { LOG_ERROR_FLOOR }).collect();
    ImageVector { grid: err.grid, data }
}

fn reconstruct(method: Method, problem: &ScenarioData, cfg: &ExperimentConfig) -> Result<ReconstructionResult> {
    let (op, data) = (&problem.operator, &problem.data);
    Ok(match method {
        Method::Hotv => hotv_l1(op, data, &cfg.recon)?,
        Method::Ir => ir_l1(op, data, &cfg.recon)?,
        Method::Ea => edge_adaptive_l2(op, data, &cfg.recon)?,
    })
}

/// Builds the problem, runs every method in `cfg`, and writes images,
/// error maps, edge maps and masks, `report.csv`, `stages.csv` and
/// `manifest.toml` into `dir`.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &Path) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    fs::create_dir_all(dir)?;
    let problem = cfg.scenario().build()?;
    let truth = &problem.truth;
    let grid = truth.grid;
    let jumps = jump_cells(cfg.phantom, truth, JUMP_CELL_THRESHOLD);
    let mut files = Vec::new();
    let lo = truth.data.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = truth.data.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo, lo + 1.0) };
    write_image_csv(truth, create(dir, "truth.csv", &mut files)?)?;
    write_pgm16(truth, lo, hi, create(dir, "truth.pgm", &mut files)?)?;

    let mut rows = Vec::new();
    let mut stages = Vec::new();
    let mut warnings = Vec::new();
    for &method in &cfg.methods {
        let label = method.label();
        let result = reconstruct(method, &problem, cfg)?;
        let report = ErrorReport::compute(&result.image, truth, &jumps, cfg.jump_window, result.total_seconds)?;
        write_image_csv(&result.image, create(dir, &format!("{label}_image.csv"), &mut files)?)?;
        write_pgm16(&result.image, lo, hi, create(dir, &format!("{label}_image.pgm"), &mut files)?)?;
        write_image_csv(&report.pointwise, create(dir, &format!("{label}_error.csv"), &mut files)?)?;
        write_pgm16(&log_error_image(&report.pointwise), LOG_ERROR_FLOOR, 0.0, create(dir, &format!("{label}_error_log10.pgm"), &mut files)?)?;
        if let Some(edges) = &result.edge_map {
            write_image_csv(&edges.as_image(), create(dir, &format!("{label}_edges.csv"), &mut files)?)?;
            write_pgm16_auto(&edges.as_image(), create(dir, &format!("{label}_edges.pgm"), &mut files)?)?;
        }
        let axes = ["x", "y"];
        for (b, axis) in result.binary_maps.iter().zip(axes) {
            write_binary_map(b, create(dir, &format!("{label}_binary_{axis}.pbm"), &mut files)?)?;
        }
        if let Some(mask) = &result.mask {
            for (buf, axis) in mask_pbms(mask, grid.n())?.into_iter().zip(axes) {
                fs::write(dir.join(format!("{label}_mask_{axis}.pbm")), buf)?;
                files.push(format!("{label}_mask_{axis}.pbm"));
            }
        }
        for (stage, r) in &result.stages {
            stages.push(StageRow {
                experiment: cfg.id.clone(),
                method: label.to_string(),
                stage: stage.clone(),
                iterations: r.iterations,
                residual: r.residual,
                seconds: r.seconds,
                converged: r.converged,
            });
        }
        warnings.extend(result.warnings.iter().map(|w| format!("{}/{label}: {w}", cfg.id)));
        rows.push(report.row(&cfg.id, label, &cfg.parameter_string(method)));
    }
    write_rows(&rows, create(dir, "report.csv", &mut files)?)?;
    write_rows(&stages, create(dir, "stages.csv", &mut files)?)?;
    files.push("manifest.toml".into());
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION"),
        fidelity_scale: cfg.recon.resolved_fidelity_scale((cfg.grid_points - 1) / 2, cfg.phantom.dims()),
        jump_cells: jumps.len(),
        files,
        config: cfg,
    };
    let text = toml::to_string_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
    fs::write(dir.join("manifest.toml"), text)?;
    Ok(ExperimentOutcome { rows, stages, warnings })
}

/// One line of the suite summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub preset: String,
    pub experiment: String,
    pub method: String,
    pub parameters: String,
    pub relative_error: Option<f64>,
    pub jump_error: Option<f64>,
    pub seconds: Option<f64>,
    pub status: String,
}

/// Runs every experiment of every preset, `threads` at a time, each in
/// `out/<experiment id>`. Failures are reported in the summary rather
/// than stopping the suite. Unknown preset names are config errors.
pub fn run_suite(presets: &[String], out: &Path, threads: usize, seed: Option<u64>) -> Result<Vec<SummaryRow>> {
    let mut jobs: Vec<(String, ExperimentConfig)> = Vec::new();
    for name in presets {
        for cfg in preset(name)? {
            let cfg = match seed {
                Some(s) => cfg.with_seed(s),
                None => cfg,
            };
            jobs.push((name.clone(), cfg));
        }
    }
    fs::create_dir_all(out)?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Vec<SummaryRow>>>> = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1).min(jobs.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some((name, cfg)) = jobs.get(i) else { break };
                let rows = summarize(name, cfg, run_experiment(cfg, &out.join(&cfg.id)));
                results.lock().expect("no panics while holding the lock")[i] = Some(rows);
            });
        }
    });
    let rows: Vec<SummaryRow> =
        results.into_inner().expect("workers finished").into_iter().flatten().flatten().collect();
    write_rows(&rows, BufWriter::new(File::create(out.join("summary.csv"))?))?;
    Ok(rows)
}

fn summarize(preset: &str, cfg: &ExperimentConfig, outcome: Result<ExperimentOutcome>) -> Vec<SummaryRow> {
    match outcome {
        Ok(o) => o
            .rows
            .into_iter()
            .map(|r| SummaryRow {
                preset: preset.to_string(),
                experiment: r.experiment,
                method: r.method,
                parameters: r.parameters,
                relative_error: Some(r.relative_error),
                jump_error: Some(r.jump_error),
                seconds: Some(r.seconds),
                status: "ok".into(),
            })
            .collect(),
        Err(e) => vec![SummaryRow {
            preset: preset.to_string(),
            experiment: cfg.id.clone(),
            method: cfg.methods.iter().map(|m| m.label()).collect::<Vec<_>>().join("+"),
            parameters: String::new(),
            relative_error: None,
            jump_error: None,
            seconds: None,
            status: format!("failed: {e}"),
        }],
    }
}

/// Default output directory of a single run.
pub fn default_output(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output.as_ref().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out").join(&cfg.id))
}
