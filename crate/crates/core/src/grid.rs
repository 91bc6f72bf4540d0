//! Uniform spatial grids and the real images that live on them.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform grid `x_j = j / J`, `j = -J..=J`, along each of `dims` axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpatialGrid {
    dims: usize,
    half: usize,
}

impl SpatialGrid {
    pub fn new(dims: usize, half: usize) -> Result<Self> {
        if dims != 1 && dims != 2 {
            return invalid(format!("grid dims must be 1 or 2, got {dims}"));
        }
        if half < 1 {
            return invalid("grid half-count J must be at least 1");
        }
        Ok(Self { dims, half })
    }

    pub fn one_d(half: usize) -> Result<Self> {
        Self::new(1, half)
    }

    pub fn two_d(half: usize) -> Result<Self> {
        Self::new(2, half)
    }

    /// Grid with `n` points per axis; `n` must be odd.
    pub fn with_points(dims: usize, n: usize) -> Result<Self> {
        if n < 3 || n % 2 == 0 {
            return invalid(format!("points per axis must be odd and >= 3, got {n}"));
        }
        Self::new(dims, (n - 1) / 2)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// The half-count `J`.
    pub fn half(&self) -> usize {
        self.half
    }

    /// Points per axis, `2J + 1`.
    pub fn n(&self) -> usize {
        2 * self.half + 1
    }

    /// Total number of grid values.
    pub fn len(&self) -> usize {
        self.n().pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.half as f64
    }

    /// Coordinate of the `idx`-th point along an axis (`idx` in `0..n`).
    pub fn coord(&self, idx: usize) -> f64 {
        (idx as f64 - self.half as f64) / self.half as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.coord(i)).collect()
    }

    /// Index of the grid point closest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let idx = (x * self.half as f64).round() + self.half as f64;
        idx.clamp(0.0, (self.n() - 1) as f64) as usize
    }
}

/// Real values on a [`SpatialGrid`]. 2D data is stored row-major with the
/// first index running along `x` and the second along `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageVector {
    pub grid: SpatialGrid,
    pub data: Vec<f64>,
}

impl ImageVector {
    pub fn zeros(grid: SpatialGrid) -> Self {
        Self { grid, data: vec![0.0; grid.len()] }
    }

    pub fn new(grid: SpatialGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return invalid(format!(
                "image has {} values but grid needs {}",
                data.len(),
                grid.len()
            ));
        }
        Ok(Self { grid, data })
    }

    pub fn from_fn_1d(grid: SpatialGrid, f: impl Fn(f64) -> f64) -> Self {
        let data = grid.points().into_iter().map(f).collect();
        Self { grid, data }
    }

    pub fn from_fn_2d(grid: SpatialGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let pts = grid.points();
        let mut data = Vec::with_capacity(grid.len());
        for &x in &pts {
            for &y in &pts {
                data.push(f(x, y));
            }
        }
        Self { grid, data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Value at `(i, j)` of a 2D image.
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.grid.n() + j]
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.data)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
