//! The discrete non-uniform Fourier operator `F_N` on a uniform grid, its
//! adjoint, and the Toeplitz structure of `F_N^H F_N`.
//!
//! `(F_N g)(lambda_k) = sum_j omega_j g_j exp(-i pi lambda_k . x_j)` where
//! `omega` is a product of per-axis trapezoid weights (`1/(2J)` inside,
//! `1/(4J)` at `x = +-1`), so that `F_N` applied to samples of a smooth `f`
//! approximates its continuous coefficients `(1/2)^d int f e^{-i pi lambda x}`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{ImageVector, SpatialGrid};
use crate::nufft::{smooth_size, NufftPlan, SquareFft};
use crate::sampling::{FourierData, FrequencySet, Provenance};

/// Default accuracy of the accelerated transform.
pub const DEFAULT_ACCEL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformMode {
    /// Exact summation over all grid points, `O(n^d K)`.
    Direct,
    /// Gaussian-gridding NUFFT.
    Accelerated,
}

/// Quadrature rule along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisWeights {
    /// `1/(2J)` at interior points, `1/(4J)` at the two endpoints.
    Trapezoid,
    /// Plain exponential sums.
    Ones,
}

impl AxisWeights {
    pub fn values(self, grid: SpatialGrid) -> Vec<f64> {
        let n = grid.n();
        match self {
            AxisWeights::Ones => vec![1.0; n],
            AxisWeights::Trapezoid => {
                let h = 0.5 * grid.spacing();
                let mut w = vec![h; n];
                w[0] = 0.5 * h;
                w[n - 1] = 0.5 * h;
                w
            }
        }
    }
}

fn node_weights(grid: SpatialGrid, axes: &[AxisWeights]) -> Vec<f64> {
    let wx = axes[0].values(grid);
    if grid.dims() == 1 {
        return wx;
    }
    let wy = axes[1].values(grid);
    wx.iter().flat_map(|a| wy.iter().map(move |b| a * b)).collect()
}

#[derive(Clone)]
pub struct ForwardOperator {
    grid: SpatialGrid,
    freqs: FrequencySet,
    mode: TransformMode,
    accel_tolerance: f64,
    plan: Option<Arc<NufftPlan>>,
    axes: Vec<AxisWeights>,
    nodes: Arc<Vec<f64>>,
}

impl std::fmt::Debug for ForwardOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ForwardOperator")
            .field("grid", &self.grid)
            .field("freqs", &self.freqs.len())
            .field("mode", &self.mode)
            .field("accel_tolerance", &self.accel_tolerance)
            .finish()
    }
}

impl ForwardOperator {
    pub fn new(grid: SpatialGrid, freqs: &FrequencySet, mode: TransformMode) -> Result<Self> {
        Self::with_tolerance(grid, freqs, mode, DEFAULT_ACCEL_TOLERANCE)
    }

    pub fn with_tolerance(
        grid: SpatialGrid,
        freqs: &FrequencySet,
        mode: TransformMode,
        accel_tolerance: f64,
    ) -> Result<Self> {
        if grid.dims() != freqs.dims() {
            return invalid(format!(
                "grid is {}D but frequencies are {}D",
                grid.dims(),
                freqs.dims()
            ));
        }
        let plan = match mode {
            TransformMode::Direct => None,
            TransformMode::Accelerated => Some(Arc::new(NufftPlan::new(
                grid.dims(),
                grid.n(),
                &angles(grid, freqs),
                accel_tolerance,
            )?)),
        };
        let axes = vec![AxisWeights::Trapezoid; grid.dims()];
        let nodes = Arc::new(node_weights(grid, &axes));
        Ok(Self { grid, freqs: freqs.clone(), mode, accel_tolerance, plan, axes, nodes })
    }

    /// The same operator with a different quadrature rule per axis.
    pub fn with_axis_weights(&self, axes: &[AxisWeights]) -> Result<Self> {
        if axes.len() != self.grid.dims() {
            return invalid(format!("need {} axis weightings, got {}", self.grid.dims(), axes.len()));
        }
        let nodes = Arc::new(node_weights(self.grid, axes));
        Ok(Self { axes: axes.to_vec(), nodes, ..self.clone() })
    }

    pub fn axis_weights(&self) -> &[AxisWeights] {
        &self.axes
    }

    pub fn grid(&self) -> SpatialGrid {
        self.grid
    }

    pub fn freqs(&self) -> &FrequencySet {
        &self.freqs
    }

    pub fn mode(&self) -> TransformMode {
        self.mode
    }

    pub fn accel_tolerance(&self) -> f64 {
        self.accel_tolerance
    }

    /// Quadrature weight of every grid node.
    pub fn node_weights(&self) -> &[f64] {
        &self.nodes
    }

    pub fn forward(&self, g: &ImageVector) -> Result<FourierData> {
        if g.grid != self.grid {
            return invalid("image grid does not match operator grid");
        }
        let input: Vec<Complex64> = g.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Ok(FourierData::new(self.forward_complex(&input)?, Provenance::DiscreteForward))
    }

    pub fn forward_complex(&self, g: &[Complex64]) -> Result<Vec<Complex64>> {
        if g.len() != self.grid.len() {
            return invalid(format!("expected {} grid values, got {}", self.grid.len(), g.len()));
        }
        let weighted: Vec<Complex64> = g.iter().zip(self.nodes.iter()).map(|(v, w)| v * w).collect();
        Ok(match &self.plan {
            Some(plan) => plan.type2(&weighted),
            None => direct_sum(self.grid, &self.freqs, &weighted, -1.0),
        })
    }

    /// `F_N^H d`, complex-valued.
    pub fn adjoint(&self, d: &FourierData) -> Result<Vec<Complex64>> {
        self.adjoint_complex(&d.values)
    }

    pub fn adjoint_complex(&self, d: &[Complex64]) -> Result<Vec<Complex64>> {
        if d.len() != self.freqs.len() {
            return invalid(format!("expected {} Fourier values, got {}", self.freqs.len(), d.len()));
        }
        let mut out = match &self.plan {
            Some(plan) => plan.type1(d),
            None => adjoint_sum(self.grid, &self.freqs, d),
        };
        out.iter_mut().zip(self.nodes.iter()).for_each(|(v, w)| *v *= w);
        Ok(out)
    }

    /// `Re(F_N^H diag(weights) F_N)` as a Toeplitz convolution.
    /// `weights` default to one.
    pub fn normal_operator(&self, weights: Option<&[f64]>) -> Result<ToeplitzNormal> {
        ToeplitzNormal::new(self, weights)
    }

    /// Dense `F_N` (1D only), rows indexed by frequency.
    pub fn dense_matrix(&self) -> Result<Vec<Vec<Complex64>>> {
        if self.grid.dims() != 1 || self.grid.n() > 1025 {
            return invalid("dense matrices are only built for 1D grids up to 1025 points");
        }
        let x = self.grid.points();
        Ok((0..self.freqs.len())
            .map(|k| {
                let l = self.freqs.coord(k, 0);
                x.iter().zip(self.nodes.iter()).map(|(&xj, &w)| Complex64::from_polar(w, -PI * l * xj)).collect()
            })
            .collect())
    }
}

/// Angles `t = pi lambda / J` seen by the NUFFT for mode index `j = J x`.
fn angles(grid: SpatialGrid, freqs: &FrequencySet) -> Vec<f64> {
    let j = grid.half() as f64;
    freqs.coords().iter().map(|l| PI * l / j).collect()
}

/// `sum_j g_j exp(sign * i pi lambda_k . x_j)` by exact summation.
fn direct_sum(grid: SpatialGrid, freqs: &FrequencySet, g: &[Complex64], sign: f64) -> Vec<Complex64> {
    let x = grid.points();
    let n = grid.n();
    let phases = |l: f64| -> Vec<Complex64> { x.iter().map(|&xj| Complex64::from_polar(1.0, sign * PI * l * xj)).collect() };
    (0..freqs.len())
        .map(|k| {
            if grid.dims() == 1 {
                phases(freqs.coord(k, 0)).iter().zip(g).map(|(e, v)| e * v).sum()
            } else {
                let ex = phases(freqs.coord(k, 0));
                let ey = phases(freqs.coord(k, 1));
                (0..n)
                    .map(|i| {
                        let row: Complex64 = g[i * n..(i + 1) * n].iter().zip(&ey).map(|(v, e)| v * e).sum();
                        row * ex[i]
                    })
                    .sum()
            }
        })
        .collect()
}

fn adjoint_sum(grid: SpatialGrid, freqs: &FrequencySet, d: &[Complex64]) -> Vec<Complex64> {
    let x = grid.points();
    let n = grid.n();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (k, dk) in d.iter().enumerate() {
        let ex: Vec<Complex64> = x.iter().map(|&xj| Complex64::from_polar(1.0, PI * freqs.coord(k, 0) * xj)).collect();
        if grid.dims() == 1 {
            out.iter_mut().zip(&ex).for_each(|(o, e)| *o += dk * e);
        } else {
            let ey: Vec<Complex64> =
                x.iter().map(|&yj| Complex64::from_polar(1.0, PI * freqs.coord(k, 1) * yj)).collect();
            for i in 0..n {
                let a = dk * ex[i];
                out[i * n..(i + 1) * n].iter_mut().zip(&ey).for_each(|(o, e)| *o += a * e);
            }
        }
    }
    out
}

/// Real part of a weighted normal operator `F^H diag(v) F`. With node
/// weights `Omega` this is `Omega T Omega`, where `T` is a convolution with
/// kernel `K(delta) = sum_k v_k exp(i pi lambda_k . delta / J)` applied by
/// circulant embedding.
#[derive(Clone)]
pub struct ToeplitzNormal {
    dims: usize,
    n: usize,
    size: usize,
    kernel_hat: Vec<Complex64>,
    fft: SquareFft,
    nodes: Arc<Vec<f64>>,
    diagonal: f64,
}

impl ToeplitzNormal {
    fn new(op: &ForwardOperator, weights: Option<&[f64]>) -> Result<Self> {
        let grid = op.grid;
        let freqs = &op.freqs;
        if let Some(w) = weights {
            if w.len() != freqs.len() {
                return invalid("normal-operator weights misaligned with frequencies");
            }
        }
        let dims = grid.dims();
        let n = grid.n();
        let wide = 2 * n - 1;
        let ones = vec![Complex64::new(1.0, 0.0); freqs.len()];
        let v: Vec<Complex64> = match weights {
            Some(w) => w.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            None => ones,
        };
        // kernel over delta in [-2J, 2J]^d, i.e. the adjoint on a grid twice as wide
        let wide_grid = SpatialGrid::new(dims, 2 * grid.half())?;
        let raw = match op.mode {
            TransformMode::Direct => adjoint_sum_scaled(grid, wide_grid, freqs, &v),
            TransformMode::Accelerated => {
                let t = angles(grid, freqs);
                let plan = NufftPlan::new(dims, wide, &t, op.accel_tolerance.min(1e-10))?;
                plan.type1(&v)
            }
        };
        let size = smooth_size(wide);
        let mut embed = vec![Complex64::new(0.0, 0.0); size.pow(dims as u32)];
        let half = 2 * grid.half();
        let wrap = |i: usize| (i + size - half) % size;
        if dims == 1 {
            for i in 0..wide {
                embed[wrap(i)] = Complex64::new(raw[i].re, 0.0);
            }
        } else {
            for i in 0..wide {
                for j in 0..wide {
                    embed[wrap(i) * size + wrap(j)] = Complex64::new(raw[i * wide + j].re, 0.0);
                }
            }
        }
        let wmax = op.nodes.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let diagonal = embed[0].re * wmax * wmax;
        let fft = SquareFft::new(size, dims);
        fft.forward(&mut embed);
        Ok(Self { dims, n, size, kernel_hat: embed, fft, nodes: op.nodes.clone(), diagonal })
    }

    /// Number of grid unknowns.
    pub fn len(&self) -> usize {
        self.n.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest diagonal entry.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    /// `out = Re(F^H V F) g`.
    pub fn apply(&self, g: &[f64], out: &mut [f64]) {
        let (n, size) = (self.n, self.size);
        let mut buf = vec![Complex64::new(0.0, 0.0); size.pow(self.dims as u32)];
        let w = &self.nodes;
        if self.dims == 1 {
            for i in 0..n {
                buf[i].re = g[i] * w[i];
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    buf[i * size + j].re = g[i * n + j] * w[i * n + j];
                }
            }
        }
        self.fft.forward(&mut buf);
        buf.iter_mut().zip(&self.kernel_hat).for_each(|(b, k)| *b *= k);
        self.fft.inverse(&mut buf);
        let scale = 1.0 / buf.len() as f64;
        if self.dims == 1 {
            for i in 0..n {
                out[i] = buf[i].re * scale * w[i];
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    out[i * n + j] = buf[i * size + j].re * scale * w[i * n + j];
                }
            }
        }
    }
}

/// Exact kernel sums `sum_k v_k exp(i pi lambda_k . x)` over `wide` points
/// spaced like `grid`.
fn adjoint_sum_scaled(
    grid: SpatialGrid,
    wide: SpatialGrid,
    freqs: &FrequencySet,
    v: &[Complex64],
) -> Vec<Complex64> {
    // wide points are delta / (2J); doubling lambda gives lambda . delta / J
    let ratio = wide.half() as f64 / grid.half() as f64;
    let coords: Vec<f64> = freqs.coords().iter().map(|l| l * ratio).collect();
    let nominal = vec![0; coords.len()];
    let scaled = FrequencySet::from_parts(freqs.dims(), freqs.half_bandwidth(), coords, nominal, None)
        .expect("rescaled frequencies stay valid");
    adjoint_sum(wide, &scaled, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::jittered_frequencies_1d;
    use rand::Rng;

    fn random_image(grid: SpatialGrid, seed: u64) -> ImageVector {
        let mut rng = crate::sampling::rng_from_seed(seed);
        ImageVector::new(grid, (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn zero_image_and_delta() {
        let grid = SpatialGrid::one_d(8).unwrap();
        let f = jittered_frequencies_1d(8, 1).unwrap();
        let op = ForwardOperator::new(grid, &f, TransformMode::Direct).unwrap();
        let z = op.forward(&ImageVector::zeros(grid)).unwrap();
        assert!(z.values.iter().all(|v| v.norm() == 0.0));
        let mut delta = ImageVector::zeros(grid);
        delta.data[8] = 1.0;
        let d = op.forward(&delta).unwrap();
        for v in d.values {
            assert!((v - Complex64::new(1.0 / 16.0, 0.0)).norm() < 1e-15);
        }
        // endpoints carry half the interior weight
        let mut edge = ImageVector::zeros(grid);
        edge.data[0] = 1.0;
        let d = op.forward(&edge).unwrap();
        assert!(d.values.iter().all(|v| (v.norm() - 1.0 / 32.0).abs() < 1e-15));
    }

    #[test]
    fn single_frequency_adjoint_is_constant() {
        let grid = SpatialGrid::one_d(8).unwrap();
        let f = FrequencySet::from_lambdas_1d(vec![0.0, 1.3, -2.2]).unwrap();
        let op = ForwardOperator::new(grid, &f, TransformMode::Direct).unwrap();
        let d = vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
        let out = op.adjoint_complex(&d).unwrap();
        for (j, v) in out.iter().enumerate() {
            let expect = if j == 0 || j == 16 { 1.0 / 32.0 } else { 1.0 / 16.0 };
            assert!((v.re - expect).abs() < 1e-15 && v.im.abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_sizes_rejected() {
        let grid = SpatialGrid::one_d(8).unwrap();
        let f = jittered_frequencies_1d(8, 1).unwrap();
        let op = ForwardOperator::new(grid, &f, TransformMode::Direct).unwrap();
        assert!(op.forward_complex(&[Complex64::new(0.0, 0.0); 3]).is_err());
        assert!(op.adjoint_complex(&[Complex64::new(0.0, 0.0); 3]).is_err());
        let f2 = crate::sampling::jittered_frequencies_2d(2, 1).unwrap();
        assert!(ForwardOperator::new(grid, &f2, TransformMode::Direct).is_err());
    }

    #[test]
    fn integer_frequencies_match_fft() {
        // x_j = (j - J)/J, so for integer k the trapezoid sum is a length-2J
        // DFT after folding the periodic endpoint x = 1 onto x = -1.
        let grid = SpatialGrid::one_d(16).unwrap();
        let p = 2 * grid.half();
        let f = FrequencySet::from_jitter_1d(16, &[0.5; 33]).unwrap();
        let g = random_image(grid, 4);
        let op = ForwardOperator::with_tolerance(grid, &f, TransformMode::Accelerated, 1e-12).unwrap();
        let fast = op.forward(&g).unwrap().values;
        let mut buf: Vec<Complex64> = g.data[..p].iter().map(|&v| Complex64::new(v, 0.0)).collect();
        buf[0].re = 0.5 * (g.data[0] + g.data[p]);
        rustfft::FftPlanner::new().plan_fft_forward(p).process(&mut buf);
        for (k, v) in fast.iter().enumerate() {
            let kk = f.nominal(k, 0);
            let sign = if kk % 2 == 0 { 1.0 } else { -1.0 };
            let exact = buf[kk.rem_euclid(p as i64) as usize] * (sign / p as f64);
            assert!((v - exact).norm() < 1e-10, "k = {kk}");
        }
    }

    #[test]
    fn toeplitz_normal_matches_explicit_product() {
        let grid = SpatialGrid::one_d(10).unwrap();
        let f = jittered_frequencies_1d(12, 3).unwrap();
        let mut rng = crate::sampling::rng_from_seed(5);
        let v: Vec<f64> = (0..f.len()).map(|_| rng.random_range(0.0..2.0)).collect();
        let g = random_image(grid, 6);
        for mode in [TransformMode::Direct, TransformMode::Accelerated] {
            let op = ForwardOperator::new(grid, &f, mode).unwrap();
            let nrm = op.normal_operator(Some(&v)).unwrap();
            let mut out = vec![0.0; grid.len()];
            nrm.apply(&g.data, &mut out);
            let exact_op = ForwardOperator::new(grid, &f, TransformMode::Direct).unwrap();
            let fg = exact_op.forward(&g).unwrap().values;
            let weighted: Vec<Complex64> = fg.iter().zip(&v).map(|(a, b)| a * b).collect();
            let back = exact_op.adjoint_complex(&weighted).unwrap();
            for (o, b) in out.iter().zip(&back) {
                assert!((o - b.re).abs() < 1e-12, "{mode:?}: {o} vs {}", b.re);
            }
        }
    }

    #[test]
    fn toeplitz_normal_2d() {
        let grid = SpatialGrid::two_d(4).unwrap();
        let f = crate::sampling::jittered_frequencies_2d(4, 3).unwrap();
        let g = random_image(grid, 8);
        let op = ForwardOperator::new(grid, &f, TransformMode::Accelerated).unwrap();
        let nrm = op.normal_operator(None).unwrap();
        let mut out = vec![0.0; grid.len()];
        nrm.apply(&g.data, &mut out);
        let exact_op = ForwardOperator::new(grid, &f, TransformMode::Direct).unwrap();
        let back = exact_op.adjoint_complex(&exact_op.forward(&g).unwrap().values).unwrap();
        for (o, b) in out.iter().zip(&back) {
            assert!((o - b.re).abs() < 1e-10);
        }
    }
}
