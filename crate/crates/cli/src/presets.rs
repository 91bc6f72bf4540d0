//! Built-in experiments and their parameters.

use nufrecon::{Phantom, ReconstructionConfig, TransformMode};

use crate::config::{ExperimentConfig, Method};
use crate::error::{CliError, Result};

/// Every preset name, in suite order.
pub const PRESETS: &[&str] = &[
    "fig_1dcos",
    "fig_1dgelb_m1",
    "fig_1dgelb_m2",
    "fig_1dgelb_m3",
    "fig_1dnoise_f1",
    "fig_1dnoise_f2",
    "fig_1dlambda",
    "fig_1drho",
    "fig_f3",
    "fig_quarter",
    "fig_half",
    "fig_3quarters",
    "table1_129",
    "table1_257",
];

const SWEEP: [f64; 5] = [0.01, 0.1, 1.0, 10.0, 100.0];

fn one_d(id: &str, phantom: Phantom, recon: ReconstructionConfig) -> ExperimentConfig {
    ExperimentConfig {
        id: id.to_string(),
        phantom,
        grid_points: 257,
        modes: 257,
        jitter_seed: 1,
        snr_db: None,
        noise_seed: 2,
        keep: None,
        subsample_seed: 3,
        methods: vec![Method::Ir, Method::Ea],
        transform: TransformMode::Direct,
        jump_window: 5,
        recon,
        output: None,
    }
}

fn f1_params() -> ReconstructionConfig {
    ReconstructionConfig { m: 1, rho: 1.0, mu: 1.0, lambda: 1.0, epsilon: 1.9, l_max: 25, tau: 1.0 / 257.0, ..Default::default() }
}

fn f2_params(m: usize) -> ReconstructionConfig {
    ReconstructionConfig { m, epsilon: 2.9, ..f1_params() }
}

fn f3(id: &str, points: usize) -> ExperimentConfig {
    let recon = ReconstructionConfig { m: 2, rho: 0.01, epsilon: 0.9, l_max: 5, mu: 0.1, tau: 0.025, lambda: 1.0, ..Default::default() };
    ExperimentConfig { grid_points: points, modes: points, transform: TransformMode::Accelerated, ..one_d(id, Phantom::F3, recon) }
}

fn shepp_logan(id: &str, side: usize) -> ExperimentConfig {
    let recon = ReconstructionConfig { m: 1, rho: 0.01, epsilon: 0.9, l_max: 5, mu: 0.01, tau: 0.1, lambda: 0.1, ..Default::default() };
    ExperimentConfig { keep: Some(side * side), transform: TransformMode::Accelerated, ..one_d(id, Phantom::SheppLogan, recon) }
}

/// Expands a preset name into its experiments.
pub fn preset(name: &str) -> Result<Vec<ExperimentConfig>> {
    let list = match name {
        "fig_1dcos" => vec![one_d(name, Phantom::F1, f1_params())],
        "fig_1dgelb_m1" => vec![one_d(name, Phantom::F2, f2_params(1))],
        "fig_1dgelb_m2" => vec![one_d(name, Phantom::F2, f2_params(2))],
        "fig_1dgelb_m3" => vec![one_d(name, Phantom::F2, f2_params(3))],
        "fig_1dnoise_f1" => vec![ExperimentConfig { snr_db: Some(15.0), ..one_d(name, Phantom::F1, f1_params()) }],
        "fig_1dnoise_f2" => vec![ExperimentConfig { snr_db: Some(20.0), ..one_d(name, Phantom::F2, f2_params(1)) }],
        "fig_1dlambda" => {
            let mut v = vec![ExperimentConfig { methods: vec![Method::Ir], ..one_d(&format!("{name}_ir"), Phantom::F1, f1_params()) }];
            for l in SWEEP {
                let recon = ReconstructionConfig { lambda: l, ..f1_params() };
                v.push(ExperimentConfig { methods: vec![Method::Ea], ..one_d(&format!("{name}_ea_lambda{l}"), Phantom::F1, recon) });
            }
            v
        }
        "fig_1drho" => {
            let mut v = vec![ExperimentConfig { methods: vec![Method::Ea], ..one_d(&format!("{name}_ea"), Phantom::F1, f1_params()) }];
            for r in SWEEP {
                let recon = ReconstructionConfig { rho: r, ..f1_params() };
                v.push(ExperimentConfig { methods: vec![Method::Ir], ..one_d(&format!("{name}_ir_rho{r}"), Phantom::F1, recon) });
            }
            v
        }
        "fig_f3" => vec![f3(name, 257)],
        "fig_quarter" => vec![shepp_logan(name, 129)],
        "fig_half" => vec![shepp_logan(name, 181)],
        "fig_3quarters" => vec![shepp_logan(name, 225)],
        "table1_129" => vec![f3(name, 129)],
        "table1_257" => vec![f3(name, 257)],
        "table1_513" => vec![f3(name, 513)],
        _ => return Err(CliError::Config(format!("unknown preset {name:?}; known: {}", PRESETS.join(", ")))),
    };
    Ok(list)
}
