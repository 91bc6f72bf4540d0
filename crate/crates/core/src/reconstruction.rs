//! Reconstruction drivers: unweighted HOTV l1, iteratively reweighted l1 and
//! edge-adaptive l2.

use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::edge_detection::{
    combine_edge_maps, jump_recovery_1d, jump_recovery_2d, threshold, BinaryEdgeMap, EdgeMap,
};
use crate::error::{invalid, Result};
use crate::fourier_model::ForwardOperator;
use crate::grid::{norm2, ImageVector};
use crate::masking::{build_mask_1d, build_mask_2d, RegularizationMask};
use crate::pa_transform::Sparsifier;
use crate::sampling::FourierData;
use crate::solvers::{
    cg_solve, split_bregman, BregmanParams, CgParams, Fidelity, MaskedL2Problem, SolveReport, WeightedL1Problem,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReconstructionConfig {
    /// PA order.
    pub m: usize,
    /// Weight of the masked l2 penalty.
    pub lambda: f64,
    /// Weight of the l1 penalty in HOTV and IR.
    pub rho: f64,
    /// IR weighting offset.
    pub epsilon: f64,
    /// Maximum number of IR solves.
    pub l_max: usize,
    /// IR stops early once consecutive iterates differ by less than this, relatively.
    pub ir_tolerance: f64,
    /// Weight of the l1 penalty in edge detection.
    pub mu: f64,
    /// Edge and mask threshold.
    pub tau: f64,
    /// Multiplier `s` of the data-fit term `s || F g - f_hat ||^2`. `None`
    /// uses `(2J)^d`, which makes the diagonal of `s F^H F` close to one for
    /// fully sampled data.
    pub fidelity_scale: Option<f64>,
    pub bregman: BregmanParams,
    pub edge_bregman: BregmanParams,
    pub cg: CgParams,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            m: 1,
            lambda: 1.0,
            rho: 1.0,
            epsilon: 1.0,
            l_max: 25,
            ir_tolerance: 1e-4,
            mu: 1.0,
            tau: 1.0 / 257.0,
            fidelity_scale: None,
            bregman: BregmanParams::default(),
            edge_bregman: BregmanParams::default(),
            cg: CgParams::default(),
        }
    }
}

impl ReconstructionConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [("lambda", self.lambda), ("rho", self.rho), ("mu", self.mu), ("epsilon", self.epsilon)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return invalid(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.l_max == 0 {
            return invalid("l_max must be at least 1");
        }
        if !(self.tau >= 0.0) {
            return invalid(format!("tau must be non-negative, got {}", self.tau));
        }
        if let Some(s) = self.fidelity_scale {
            if !(s > 0.0) || !s.is_finite() {
                return invalid(format!("fidelity_scale must be positive and finite, got {s}"));
            }
        }
        Ok(())
    }

    /// The data-fit multiplier for a grid of `2J + 1` points per axis in `dims` dimensions.
    pub fn resolved_fidelity_scale(&self, half: usize, dims: usize) -> f64 {
        self.fidelity_scale.unwrap_or_else(|| ((2 * half) as f64).powi(dims as i32))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    pub image: ImageVector,
    /// Combined edge map (EA only).
    pub edge_map: Option<EdgeMap>,
    /// Per-axis jump estimates (EA only).
    pub axis_edge_maps: Vec<EdgeMap>,
    pub binary_maps: Vec<BinaryEdgeMap>,
    pub mask: Option<RegularizationMask>,
    /// Final IR weights per sparsifier.
    pub weights: Option<Vec<Vec<f64>>>,
    pub stages: Vec<(String, SolveReport)>,
    /// Wall time of stages that are not solves (thresholding, masks).
    pub overhead_seconds: f64,
    pub total_seconds: f64,
    pub warnings: Vec<String>,
}

impl ReconstructionResult {
    fn new(image: ImageVector) -> Self {
        Self {
            image,
            edge_map: None,
            axis_edge_maps: Vec::new(),
            binary_maps: Vec::new(),
            mask: None,
            weights: None,
            stages: Vec::new(),
            overhead_seconds: 0.0,
            total_seconds: 0.0,
            warnings: Vec::new(),
        }
    }
}

/// The data-fit term `s || F g - f_hat ||^2`.
pub fn data_fidelity<'a>(op: &'a ForwardOperator, data: &FourierData, scale: f64) -> Result<Fidelity<'a>> {
    data.check_aligned(op.freqs())?;
    if scale == 1.0 {
        return Fidelity::new(op, &data.values);
    }
    let r = scale.sqrt();
    let target: Vec<Complex64> = data.values.iter().map(|v| v * r).collect();
    Fidelity::scaled(op, vec![Complex64::new(r, 0.0); target.len()], &target)
}

fn fidelity_scale(op: &ForwardOperator, cfg: &ReconstructionConfig) -> f64 {
    let g = op.grid();
    cfg.resolved_fidelity_scale(g.half(), g.dims())
}

fn sparsifiers(op: &ForwardOperator, m: usize) -> Result<Vec<Sparsifier>> {
    let g = op.grid();
    Sparsifier::for_grid(m, g.n(), g.dims())
}

/// Single weighted-l1 solve with unit weights.
pub fn hotv_l1(op: &ForwardOperator, data: &FourierData, cfg: &ReconstructionConfig) -> Result<ReconstructionResult> {
    let start = Instant::now();
    cfg.validate()?;
    let fid = data_fidelity(op, data, fidelity_scale(op, cfg))?;
    let sp = sparsifiers(op, cfg.m)?;
    let weights: Vec<Vec<f64>> = sp.iter().map(|s| vec![1.0; s.output_len()]).collect();
    let problem = WeightedL1Problem { fidelity: &fid, sparsifiers: &sp, weights: &weights, reg: cfg.rho, params: cfg.bregman };
    let (image, report) = split_bregman(&problem, &ImageVector::zeros(op.grid()))?;
    let mut out = ReconstructionResult::new(image);
    out.stages.push(("hotv".into(), report));
    out.total_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// `w = 1 / (|L^m f| + epsilon)` per sparsifier.
pub fn reweight(sp: &[Sparsifier], f: &[f64], epsilon: f64) -> Vec<Vec<f64>> {
    sp.iter().map(|s| s.apply_vec(f).iter().map(|v| 1.0 / (v.abs() + epsilon)).collect()).collect()
}

/// Iteratively reweighted l1; returns the last iterate.
pub fn ir_l1(op: &ForwardOperator, data: &FourierData, cfg: &ReconstructionConfig) -> Result<ReconstructionResult> {
    let start = Instant::now();
    cfg.validate()?;
    let fid = data_fidelity(op, data, fidelity_scale(op, cfg))?;
    let sp = sparsifiers(op, cfg.m)?;
    let mut weights: Vec<Vec<f64>> = sp.iter().map(|s| vec![1.0; s.output_len()]).collect();
    let mut current = ImageVector::zeros(op.grid());
    let mut stages = Vec::new();
    for l in 0..cfg.l_max {
        let problem = WeightedL1Problem { fidelity: &fid, sparsifiers: &sp, weights: &weights, reg: cfg.rho, params: cfg.bregman };
        let (next, report) = split_bregman(&problem, &current)?;
        stages.push((format!("ir_{l}"), report));
        let diff: f64 = next.data.iter().zip(&current.data).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let scale = norm2(&next.data);
        let done = l > 0 && diff <= cfg.ir_tolerance * scale;
        current = next;
        if done || l + 1 == cfg.l_max {
            break;
        }
        weights = reweight(&sp, &current.data, cfg.epsilon);
    }
    let mut out = ReconstructionResult::new(current);
    out.weights = Some(weights);
    out.stages = stages;
    out.total_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Detect edges, build the mask, then solve the masked l2 problem.
pub fn edge_adaptive_l2(op: &ForwardOperator, data: &FourierData, cfg: &ReconstructionConfig) -> Result<ReconstructionResult> {
    let start = Instant::now();
    cfg.validate()?;
    let grid = op.grid();
    let mut stages = Vec::new();
    let (combined, axis_maps) = if grid.dims() == 1 {
        let (g, report) = jump_recovery_1d(op, data, cfg.mu, cfg.edge_bregman)?;
        stages.push(("edge".to_string(), report));
        (g.clone(), vec![g])
    } else {
        let ((gx, rx), (gy, ry)) = jump_recovery_2d(op, data, cfg.mu, cfg.edge_bregman)?;
        stages.push(("edge_x".to_string(), rx));
        stages.push(("edge_y".to_string(), ry));
        (combine_edge_maps(&gx, &gy)?, vec![gx, gy])
    };
    let overhead_start = Instant::now();
    let binary: Vec<BinaryEdgeMap> = axis_maps.iter().map(|g| threshold(g, cfg.tau)).collect::<Result<_>>()?;
    let mask = if grid.dims() == 1 {
        build_mask_1d(&binary[0], cfg.m, cfg.tau)?
    } else {
        build_mask_2d(&binary[0], &binary[1], cfg.m, cfg.tau)?
    };
    let overhead = overhead_start.elapsed().as_secs_f64();
    let mut out = edge_adaptive_l2_with_mask(op, data, &mask, cfg)?;
    stages.append(&mut out.stages);
    out.stages = stages;
    out.edge_map = Some(combined);
    out.axis_edge_maps = axis_maps;
    out.binary_maps = binary;
    out.overhead_seconds += overhead;
    out.total_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}

/// Masked l2 solve with a given mask.
pub fn edge_adaptive_l2_with_mask(
    op: &ForwardOperator,
    data: &FourierData,
    mask: &RegularizationMask,
    cfg: &ReconstructionConfig,
) -> Result<ReconstructionResult> {
    let start = Instant::now();
    cfg.validate()?;
    let grid = op.grid();
    if mask.dims != grid.dims() || mask.m != cfg.m {
        return invalid(format!(
            "mask (dims {}, m {}) does not match the problem (dims {}, m {})",
            mask.dims,
            mask.m,
            grid.dims(),
            cfg.m
        ));
    }
    let sp = sparsifiers(op, cfg.m)?;
    if mask.masks.len() != sp.len() || mask.masks.iter().zip(&sp).any(|(m, s)| m.len() != s.output_len()) {
        return invalid("mask shape does not match the grid");
    }
    let mut warnings = Vec::new();
    if mask.is_all_zero() {
        warnings.push("every mask entry is zero; solving the fidelity term alone".to_string());
    }
    let fid = data_fidelity(op, data, fidelity_scale(op, cfg))?;
    let problem = MaskedL2Problem { fidelity: &fid, sparsifiers: &sp, masks: &mask.masks, lambda: cfg.lambda, params: cfg.cg };
    let (image, report) = cg_solve(&problem, &ImageVector::zeros(grid))?;
    if !report.converged {
        warnings.push(format!("conjugate gradient stopped after {} iterations", report.iterations));
    }
    let mut out = ReconstructionResult::new(image);
    out.mask = Some(mask.clone());
    out.stages.push(("l2".into(), report));
    out.warnings = warnings;
    out.total_seconds = start.elapsed().as_secs_f64();
    Ok(out)
}
