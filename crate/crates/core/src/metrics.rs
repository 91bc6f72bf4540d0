//! Error measures and stage timing.

use std::time::Instant;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::grid::{norm2, ImageVector};
use crate::phantoms::Phantom;

/// Default half-width of the jump window, in cells, for 257-point grids.
pub const JUMP_WINDOW: usize = 5;

fn check_shapes(a: &ImageVector, b: &ImageVector) -> Result<()> {
    if a.grid != b.grid || a.data.len() != b.data.len() {
        return invalid(format!(
            "images differ in shape ({}D/{} vs {}D/{})",
            a.grid.dims(),
            a.len(),
            b.grid.dims(),
            b.len()
        ));
    }
    Ok(())
}

/// `||f_star - f_true|| / ||f_true||`.
pub fn relative_error(f_star: &ImageVector, f_true: &ImageVector) -> Result<f64> {
    check_shapes(f_star, f_true)?;
    let denom = f_true.norm();
    if denom == 0.0 {
        return invalid("reference image has zero norm");
    }
    let diff: Vec<f64> = f_star.data.iter().zip(&f_true.data).map(|(a, b)| a - b).collect();
    Ok(norm2(&diff) / denom)
}

/// Elementwise `|f_star - f_true|`.
pub fn pointwise_error(f_star: &ImageVector, f_true: &ImageVector) -> Result<ImageVector> {
    check_shapes(f_star, f_true)?;
    let data = f_star.data.iter().zip(&f_true.data).map(|(a, b)| (a - b).abs()).collect();
    ImageVector::new(f_star.grid, data)
}

/// Flat indices of the cells adjacent to a discontinuity of `phantom`.
///
/// In 1D these are the grid points nearest each breakpoint. In 2D a cell is
/// flagged when the phantom differs from an axis neighbour by more than
/// `min_jump`.
pub fn jump_cells(phantom: Phantom, f_true: &ImageVector, min_jump: f64) -> Vec<usize> {
    let grid = f_true.grid;
    if grid.dims() == 1 {
        let mut cells: Vec<usize> = phantom.breakpoints().iter().map(|&x| grid.nearest(x)).collect();
        cells.dedup();
        return cells;
    }
    let n = grid.n();
    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = f_true.at(i, j);
            let right = j + 1 < n && (f_true.at(i, j + 1) - v).abs() > min_jump;
            let down = i + 1 < n && (f_true.at(i + 1, j) - v).abs() > min_jump;
            if right || down {
                cells.push(i * n + j);
            }
        }
    }
    cells
}

/// Largest pointwise error within `w` cells (per axis) of any listed jump cell.
/// Returns 0 when `jumps` is empty.
pub fn jump_neighborhood_max(f_star: &ImageVector, f_true: &ImageVector, jumps: &[usize], w: usize) -> Result<f64> {
    let err = pointwise_error(f_star, f_true)?;
    let grid = f_true.grid;
    let n = grid.n();
    let mut best = 0.0f64;
    for &c in jumps {
        if c >= err.len() {
            return invalid(format!("jump cell {c} outside the image"));
        }
        let (ci, cj) = if grid.dims() == 1 { (c, 0) } else { (c / n, c % n) };
        let range = |center: usize| center.saturating_sub(w)..=(center + w).min(n - 1);
        if grid.dims() == 1 {
            for i in range(ci) {
                best = best.max(err.data[i]);
            }
        } else {
            for i in range(ci) {
                for j in range(cj) {
                    best = best.max(err.data[i * n + j]);
                }
            }
        }
    }
    Ok(best)
}

/// Runs `thunk` and returns its value with the elapsed wall time in seconds.
pub fn time_stage<T>(thunk: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = thunk();
    (out, start.elapsed().as_secs_f64())
}

/// One comparison of a reconstruction against its reference.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub relative_error: f64,
    pub pointwise: ImageVector,
    pub jump_neighborhood_max: f64,
    pub runtime_s: f64,
}

impl ErrorReport {
    pub fn compute(f_star: &ImageVector, f_true: &ImageVector, jumps: &[usize], w: usize, runtime_s: f64) -> Result<Self> {
        Ok(Self {
            relative_error: relative_error(f_star, f_true)?,
            pointwise: pointwise_error(f_star, f_true)?,
            jump_neighborhood_max: jump_neighborhood_max(f_star, f_true, jumps, w)?,
            runtime_s,
        })
    }

    pub fn row(&self, experiment: &str, method: &str, parameters: &str) -> ErrorRow {
        ErrorRow {
            experiment: experiment.to_string(),
            method: method.to_string(),
            parameters: parameters.to_string(),
            relative_error: self.relative_error,
            jump_error: self.jump_neighborhood_max,
            seconds: self.runtime_s,
        }
    }
}

/// Flat CSV record for an [`ErrorReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorRow {
    pub experiment: String,
    pub method: String,
    pub parameters: String,
    pub relative_error: f64,
    pub jump_error: f64,
    pub seconds: f64,
}
