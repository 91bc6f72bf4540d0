//! Jump-function recovery from Fourier data with concentration factors.
//!
//! A piecewise-smooth `f` is modeled as a sum of translated ramps, one per
//! grid cell, weighted by the jump in that cell. Along a chosen axis the
//! ramp model gives `f_hat(lambda) ~ r_hat(lambda) E g` with `E` the plain
//! exponential sum along that axis (and the usual quadrature along the other
//! axis in 2D), so the jumps `g` solve
//!
//! ```text
//! min_g || diag(N sigma) (r_hat E g - f_hat) ||^2 + mu ||g||_1,
//! ```
//!
//! where `N = 2M+1`. The first-order factors `sigma = 2 i pi lambda / N`
//! make the rows `N sigma r_hat = 1 - sinc(lambda)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fourier_model::{AxisWeights, ForwardOperator};
use crate::grid::{ImageVector, SpatialGrid};
use crate::pa_transform::Sparsifier;
use crate::quadrature::integrate;
use crate::sampling::{FourierData, FrequencySet};
use crate::solvers::{split_bregman, BregmanParams, Fidelity, SolveReport, WeightedL1Problem};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Fourier coefficient `(1/2) int_{-1}^{1} r(x) e^{-i pi lambda x} dx` of the
/// unit ramp `r(x) = (sgn(x) - x) / 2`, which jumps by 1 at the origin.
pub fn ramp_fourier(lambda: f64) -> Complex64 {
    let t = PI * lambda;
    if t.abs() < 1e-3 {
        // (i / (2t)) (sinc - 1) expanded around zero
        let t2 = t * t;
        return Complex64::new(0.0, t * (-1.0 / 12.0 + t2 * (1.0 / 240.0 - t2 / 10080.0)));
    }
    Complex64::new(0.0, (t.sin() / t - 1.0) / (2.0 * t))
}

/// `sin(pi lambda) / (pi lambda)`.
fn sinc(lambda: f64) -> f64 {
    let t = PI * lambda;
    if t.abs() < 1e-8 {
        1.0
    } else {
        t.sin() / t
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CfGenerator {
    FirstOrder,
    Gaussian,
    CustomH,
}

/// Width parameters of the smoothing Gaussian `exp(-5 (x / 0.7)^2)`.
const GAUSSIAN_RATE: f64 = 5.0;
const GAUSSIAN_WIDTH: f64 = 0.7;

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationFactors {
    pub sigma: Vec<Complex64>,
    pub generator: CfGenerator,
    /// Axis whose frequency component the factors depend on.
    pub axis: usize,
    /// `2M+1`, the nominal number of modes per axis.
    pub modes: usize,
    /// Frequencies whose factor was zeroed because `r_hat` vanishes there.
    pub zeroed: Vec<usize>,
}

impl ConcentrationFactors {
    /// Factors along `axis` of `freqs`.
    pub fn new(freqs: &FrequencySet, generator: CfGenerator, axis: usize) -> Result<Self> {
        match generator {
            CfGenerator::FirstOrder => Self::first_order(freqs, axis),
            CfGenerator::Gaussian => Self::from_h(freqs, axis, |x| (-GAUSSIAN_RATE * (x / GAUSSIAN_WIDTH).powi(2)).exp())
                .map(|cf| Self { generator: CfGenerator::Gaussian, ..cf }),
            CfGenerator::CustomH => invalid("custom concentration factors need an h; use ConcentrationFactors::from_h"),
        }
    }

    /// `sigma_k = 2 i pi lambda_k / (2M+1)`.
    pub fn first_order(freqs: &FrequencySet, axis: usize) -> Result<Self> {
        check_axis(freqs, axis)?;
        let modes = 2 * freqs.half_bandwidth() + 1;
        let sigma = (0..freqs.len())
            .map(|k| Complex64::new(0.0, 2.0 * PI * freqs.coord(k, axis) / modes as f64))
            .collect();
        Ok(Self { sigma, generator: CfGenerator::FirstOrder, axis, modes, zeroed: Vec::new() })
    }

    /// `sigma_k = h_hat(lambda_k) / r_hat(lambda_k)` for an even, real `h`
    /// centered at the origin, with `h_hat` computed by quadrature.
    /// Entries where `r_hat` vanishes are set to zero and listed in `zeroed`.
    pub fn from_h(freqs: &FrequencySet, axis: usize, h: impl Fn(f64) -> f64) -> Result<Self> {
        check_axis(freqs, axis)?;
        let modes = 2 * freqs.half_bandwidth() + 1;
        let mut sigma = Vec::with_capacity(freqs.len());
        let mut zeroed = Vec::new();
        for k in 0..freqs.len() {
            let l = freqs.coord(k, axis);
            let r = ramp_fourier(l);
            if r.norm() == 0.0 {
                zeroed.push(k);
                sigma.push(ZERO);
                continue;
            }
            let hh = 0.5 * integrate(|x| Complex64::from_polar(h(x), -PI * l * x), -1.0, 1.0, 1e-12)?;
            sigma.push(hh / r);
        }
        Ok(Self { sigma, generator: CfGenerator::CustomH, axis, modes, zeroed })
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }
}

fn check_axis(freqs: &FrequencySet, axis: usize) -> Result<()> {
    if axis >= freqs.dims() {
        return invalid(format!("axis {axis} out of range for {}-dimensional frequencies", freqs.dims()));
    }
    Ok(())
}

/// Real jump values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeMap {
    pub grid: SpatialGrid,
    pub values: Vec<f64>,
}

impl EdgeMap {
    pub fn new(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return invalid(format!("edge map has {} values for a grid of {}", values.len(), grid.len()));
        }
        Ok(Self { grid, values })
    }

    /// Index and value of the largest magnitude.
    pub fn peak(&self) -> (usize, f64) {
        self.values
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |best, (i, v)| if v.abs() > best.1.abs() { (i, v) } else { best })
    }

    pub fn as_image(&self) -> ImageVector {
        ImageVector { grid: self.grid, data: self.values.clone() }
    }
}

/// 0/1 indicator of detected edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryEdgeMap {
    pub grid: SpatialGrid,
    pub indicator: Vec<u8>,
    pub tau: f64,
}

impl BinaryEdgeMap {
    pub fn count(&self) -> usize {
        self.indicator.iter().filter(|&&b| b == 1).count()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.indicator.iter().map(|&b| f64::from(b)).collect()
    }
}

/// Recovers the jump function along `cf.axis` from `data`.
pub fn jump_recovery(
    op: &ForwardOperator,
    data: &FourierData,
    mu: f64,
    cf: &ConcentrationFactors,
    params: BregmanParams,
) -> Result<(EdgeMap, SolveReport)> {
    let freqs = op.freqs();
    data.check_aligned(freqs)?;
    if cf.len() != freqs.len() {
        return invalid("concentration factors misaligned with frequencies");
    }
    if !(mu > 0.0) {
        return invalid(format!("edge regularization must be positive, got {mu}"));
    }
    let edge_op = edge_operator(op, cf.axis)?;
    let (row_scale, target) = edge_system(op, data, cf);
    let fid = Fidelity::scaled(&edge_op, row_scale, &target)?;
    let grid = op.grid();
    let sparsifiers = [Sparsifier::Identity(grid.len())];
    let weights = [vec![1.0; grid.len()]];
    let problem = WeightedL1Problem { fidelity: &fid, sparsifiers: &sparsifiers, weights: &weights, reg: mu, params };
    let (g, report) = split_bregman(&problem, &ImageVector::zeros(grid))?;
    Ok((EdgeMap { grid, values: g.data }, report))
}

/// `op` with plain sums along `axis` and trapezoid weights elsewhere.
pub fn edge_operator(op: &ForwardOperator, axis: usize) -> Result<ForwardOperator> {
    let axes: Vec<AxisWeights> =
        (0..op.grid().dims()).map(|a| if a == axis { AxisWeights::Ones } else { AxisWeights::Trapezoid }).collect();
    op.with_axis_weights(&axes)
}

/// Row scaling of [`edge_operator`] and the target of the edge fit.
pub fn edge_system(op: &ForwardOperator, data: &FourierData, cf: &ConcentrationFactors) -> (Vec<Complex64>, Vec<Complex64>) {
    let freqs = op.freqs();
    let modes = cf.modes as f64;
    let row_scale = (0..freqs.len())
        .map(|k| {
            let l = freqs.coord(k, cf.axis);
            if cf.generator == CfGenerator::FirstOrder {
                // N sigma r_hat in closed form, avoiding the cancellation near 0
                Complex64::new(1.0 - sinc(l), 0.0)
            } else {
                cf.sigma[k] * ramp_fourier(l) * modes
            }
        })
        .collect();
    let target = data.values.iter().zip(&cf.sigma).map(|(f, s)| f * s * modes).collect();
    (row_scale, target)
}

/// 1D jump recovery with first-order factors.
pub fn jump_recovery_1d(op: &ForwardOperator, data: &FourierData, mu: f64, params: BregmanParams) -> Result<(EdgeMap, SolveReport)> {
    if op.grid().dims() != 1 {
        return invalid("jump_recovery_1d needs a 1D operator");
    }
    let cf = ConcentrationFactors::first_order(op.freqs(), 0)?;
    jump_recovery(op, data, mu, &cf, params)
}

/// Jumps in the x and y directions, solved independently.
pub fn jump_recovery_2d(
    op: &ForwardOperator,
    data: &FourierData,
    mu: f64,
    params: BregmanParams,
) -> Result<((EdgeMap, SolveReport), (EdgeMap, SolveReport))> {
    if op.grid().dims() != 2 {
        return invalid("jump_recovery_2d needs a 2D operator");
    }
    let cx = ConcentrationFactors::first_order(op.freqs(), 0)?;
    let cy = ConcentrationFactors::first_order(op.freqs(), 1)?;
    Ok((jump_recovery(op, data, mu, &cx, params)?, jump_recovery(op, data, mu, &cy, params)?))
}

/// Pointwise `max(|gx|, |gy|)`.
pub fn combine_edge_maps(gx: &EdgeMap, gy: &EdgeMap) -> Result<EdgeMap> {
    if gx.grid != gy.grid || gx.values.len() != gy.values.len() {
        return invalid("edge maps have different shapes");
    }
    let values = gx.values.iter().zip(&gy.values).map(|(a, b)| a.abs().max(b.abs())).collect();
    Ok(EdgeMap { grid: gx.grid, values })
}

/// Flags entries with `|value| > tau`.
pub fn threshold(e: &EdgeMap, tau: f64) -> Result<BinaryEdgeMap> {
    if !(tau >= 0.0) {
        return invalid(format!("threshold must be non-negative, got {tau}"));
    }
    let indicator = e.values.iter().map(|v| u8::from(v.abs() > tau)).collect();
    Ok(BinaryEdgeMap { grid: e.grid, indicator, tau })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier_model::TransformMode;
    use crate::phantoms::Phantom;
    use crate::sampling::jittered_frequencies_1d;

    fn ramp(x: f64) -> f64 {
        (x.signum() - x) / 2.0
    }

    #[test]
    fn ramp_coefficients_match_fine_riemann_sums() {
        // midpoint rule on 10^6 cells, split at the jump
        let cells = 1_000_000;
        for &l in &[0.0, 1e-4, 0.3, 1.0, 2.75, -7.2, 40.1] {
            let h = 2.0 / cells as f64;
            let mut acc = Complex64::new(0.0, 0.0);
            for c in 0..cells {
                let x = -1.0 + (c as f64 + 0.5) * h;
                acc += Complex64::from_polar(ramp(x), -PI * l * x) * h;
            }
            let expect = acc * 0.5;
            let got = ramp_fourier(l);
            assert!((got - expect).norm() < 1e-9, "lambda {l}: {got} vs {expect}");
        }
    }

    #[test]
    fn ramp_series_joins_closed_form() {
        for &l in &[3.0e-4, 3.2e-4, 3.3e-4] {
            let t = PI * l;
            let closed = (t.sin() / t - 1.0) / (2.0 * t);
            assert!((ramp_fourier(l).im - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn first_order_factors() {
        let f = jittered_frequencies_1d(4, 9).unwrap();
        let cf = ConcentrationFactors::first_order(&f, 0).unwrap();
        assert_eq!(cf.modes, 9);
        for k in 0..f.len() {
            let expect = 2.0 * PI * f.coord(k, 0) / 9.0;
            assert_eq!(cf.sigma[k].re, 0.0);
            assert!((cf.sigma[k].im - expect).abs() < 1e-15);
        }
        assert!(ConcentrationFactors::first_order(&f, 1).is_err());
    }

    #[test]
    fn first_order_rows_equal_one_minus_sinc() {
        let f = jittered_frequencies_1d(6, 2).unwrap();
        let cf = ConcentrationFactors::first_order(&f, 0).unwrap();
        for k in 0..f.len() {
            let l = f.coord(k, 0);
            let row = cf.sigma[k] * ramp_fourier(l) * cf.modes as f64;
            assert!((row - Complex64::new(1.0 - sinc(l), 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn constant_h_gives_sinc_over_ramp() {
        let f = jittered_frequencies_1d(3, 5).unwrap();
        let cf = ConcentrationFactors::from_h(&f, 0, |_| 1.0).unwrap();
        for k in 0..f.len() {
            let l = f.coord(k, 0);
            let expect = Complex64::new(sinc(l), 0.0) / ramp_fourier(l);
            assert!((cf.sigma[k] - expect).norm() < 1e-8 * expect.norm().max(1.0));
        }
    }

    /// Coordinate descent on `|| B g - y ||^2 + mu ||g||_1` with a real
    /// stacked matrix `B = [Re A; Im A]`.
    fn lasso_oracle(a: &[Vec<Complex64>], y: &[Complex64], mu: f64) -> Vec<f64> {
        let n = a[0].len();
        let mut q = vec![vec![0.0; n]; n];
        let mut c = vec![0.0; n];
        for (row, yk) in a.iter().zip(y) {
            for i in 0..n {
                c[i] += (row[i].conj() * yk).re;
                for j in 0..n {
                    q[i][j] += (row[i].conj() * row[j]).re;
                }
            }
        }
        let mut g = vec![0.0; n];
        for _ in 0..200_000 {
            let mut change = 0.0f64;
            for i in 0..n {
                let partial: f64 = (0..n).filter(|&j| j != i).map(|j| q[i][j] * g[j]).sum();
                let z = c[i] - partial;
                let new = crate::solvers::shrink(z, mu / 2.0) / q[i][i];
                change = change.max((new - g[i]).abs());
                g[i] = new;
            }
            if change < 1e-15 {
                break;
            }
        }
        g
    }

    #[test]
    fn matrix_free_recovery_matches_dense_lasso() {
        let grid = SpatialGrid::one_d(32).unwrap();
        let freqs = jittered_frequencies_1d(32, 4).unwrap();
        let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
        let data = Phantom::F1.continuous_fourier_samples(&freqs).unwrap();
        let x = grid.points();
        let a: Vec<Vec<Complex64>> = (0..freqs.len())
            .map(|k| {
                let l = freqs.coord(k, 0);
                let s = 1.0 - if l == 0.0 { 1.0 } else { (PI * l).sin() / (PI * l) };
                x.iter().map(|&xj| Complex64::from_polar(s, -PI * l * xj)).collect()
            })
            .collect();
        let y: Vec<Complex64> =
            (0..freqs.len()).map(|k| data.values[k] * Complex64::new(0.0, 2.0 * PI * freqs.coord(k, 0))).collect();
        let mu = 1.0;
        let oracle = lasso_oracle(&a, &y, mu);
        let params = BregmanParams {
            splitting: None,
            inner_tolerance: 1e-13,
            inner_max_iterations: 500,
            outer_tolerance: 1e-13,
            max_outer_iterations: 20_000,
        };
        let (edges, report) = jump_recovery_1d(&op, &data, mu, params).unwrap();
        let diff: f64 = edges.values.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-6, "max difference {diff}, report {report:?}");
    }

    #[test]
    fn zero_data_gives_zero_edges() {
        let grid = SpatialGrid::one_d(16).unwrap();
        let freqs = jittered_frequencies_1d(16, 1).unwrap();
        let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
        let data = FourierData::new(vec![ZERO; freqs.len()], crate::sampling::Provenance::Measured);
        let (edges, _) = jump_recovery_1d(&op, &data, 1.0, BregmanParams::default()).unwrap();
        assert!(edges.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn f1_edge_peak_sits_at_the_origin() {
        let grid = SpatialGrid::one_d(64).unwrap();
        let freqs = jittered_frequencies_1d(64, 3).unwrap();
        let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
        let data = Phantom::F1.continuous_fourier_samples(&freqs).unwrap();
        let (edges, _) = jump_recovery_1d(&op, &data, 1.0, BregmanParams::default()).unwrap();
        let (idx, value) = edges.peak();
        assert_eq!(idx, grid.nearest(0.0));
        assert!((value - 2.0).abs() < 0.1, "peak {value}");
    }

    #[test]
    fn nonpositive_mu_is_rejected() {
        let grid = SpatialGrid::one_d(4).unwrap();
        let freqs = jittered_frequencies_1d(4, 1).unwrap();
        let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
        let data = FourierData::new(vec![ZERO; freqs.len()], crate::sampling::Provenance::Measured);
        assert!(jump_recovery_1d(&op, &data, 0.0, BregmanParams::default()).is_err());
    }

    #[test]
    fn threshold_is_strict_and_combination_takes_max() {
        let grid = SpatialGrid::one_d(1).unwrap();
        let a = EdgeMap::new(grid, vec![0.5, -0.2, 0.0]).unwrap();
        let b = EdgeMap::new(grid, vec![0.1, 0.3, -0.5]).unwrap();
        assert_eq!(threshold(&a, 0.5).unwrap().indicator, vec![0, 0, 0]);
        assert_eq!(threshold(&a, 0.1).unwrap().indicator, vec![1, 1, 0]);
        assert_eq!(combine_edge_maps(&a, &b).unwrap().values, vec![0.5, 0.3, 0.5]);
        assert!(threshold(&a, -1.0).is_err());
    }
}
