//! Gaussian-gridding non-uniform FFT (oversampling factor 2).
//!
//! Type 2 evaluates `c_k = sum_j g_j exp(-i j . t_k)` for centered integer
//! modes `j` in `[-(ms-1)/2, (ms-1)/2]^d` at arbitrary points `t_k`; type 1
//! is its exact adjoint `b_j = sum_k d_k exp(+i j . t_k)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, ReconError, Result};

/// Largest half-width of the spreading kernel accepted by default.
pub const MAX_SPREAD: usize = 24;

/// Smallest `2^a 3^b 5^c` that is `>= n`.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Separable d-dimensional FFT over a square `n^d` buffer.
#[derive(Clone)]
pub struct SquareFft {
    n: usize,
    dims: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl SquareFft {
    pub fn new(n: usize, dims: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, dims, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.fwd);
    }

    /// Unnormalized inverse transform.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, &self.inv);
    }

    fn run(&self, buf: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        fft.process(buf);
        if self.dims == 2 {
            transpose(buf, self.n);
            fft.process(buf);
            transpose(buf, self.n);
        }
    }
}

fn transpose(buf: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            buf.swap(i * n + j, j * n + i);
        }
    }
}

/// Precomputed spreading weights for one point along one axis.
#[derive(Clone)]
struct AxisStencil {
    start: usize,
    weights: Vec<f64>,
}

/// A planned transform for fixed modes and points.
#[derive(Clone)]
pub struct NufftPlan {
    dims: usize,
    modes: usize,
    nf: usize,
    spread: usize,
    /// `1 / g_hat(j)` per centered mode index along one axis.
    deconv: Vec<f64>,
    stencils: Vec<AxisStencil>,
    fft: SquareFft,
    npoints: usize,
}

impl NufftPlan {
    /// `points` holds `d` angles per entry (stride `dims`). `modes` is odd.
    pub fn new(dims: usize, modes: usize, points: &[f64], tol: f64) -> Result<Self> {
        Self::with_max_spread(dims, modes, points, tol, MAX_SPREAD)
    }

    pub fn with_max_spread(
        dims: usize,
        modes: usize,
        points: &[f64],
        tol: f64,
        max_spread: usize,
    ) -> Result<Self> {
        if modes % 2 == 0 || dims == 0 || dims > 2 || points.len() % dims != 0 {
            return invalid("nufft needs odd mode count and 1 or 2 dims");
        }
        if !(tol > 0.0 && tol < 1.0) {
            return invalid(format!("nufft tolerance must be in (0, 1), got {tol}"));
        }
        let nf = smooth_size(2 * modes).max(8);
        let ratio = nf as f64 / modes as f64;
        let base = (-tol.ln() / (PI * (ratio - 1.0) / (ratio - 0.5)) + 0.5).floor() as usize;
        // margin: the textbook width undershoots at tight tolerances
        let spread = base + 2;
        if spread > max_spread {
            return Err(ReconError::NumericFailure(format!(
                "tolerance {tol} needs kernel half-width {spread} > {max_spread}"
            )));
        }
        let tau = PI * (spread as f64 / (ratio * (ratio - 0.5))) / (modes * modes) as f64;
        let half = (modes / 2) as i64;
        let deconv = (-half..=half)
            .map(|j| (PI / tau).sqrt() * (tau * (j * j) as f64).exp())
            .collect();
        let h = 2.0 * PI / nf as f64;
        let lut: Vec<f64> = (0..2 * spread + 1).map(|l| (-((l * l) as f64) * h * h / (4.0 * tau)).exp()).collect();
        let stencils = points
            .iter()
            .map(|&t| {
                let t = t.rem_euclid(2.0 * PI);
                let p0 = (t / h).floor() as i64;
                let d0 = t - p0 as f64 * h;
                let start = (p0 - spread as i64 + 1).rem_euclid(nf as i64) as usize;
                // exp(-(d0 - l h)^2 / 4 tau), l = -spread+1 ..= spread
                let e0 = (-(d0 * d0) / (4.0 * tau)).exp();
                let ratio = (d0 * h / (2.0 * tau)).exp();
                let weights = (0..2 * spread)
                    .map(|m| {
                        let l = m as i64 - spread as i64 + 1;
                        e0 * ratio.powi(l as i32) * lut[l.unsigned_abs() as usize]
                    })
                    .collect();
                AxisStencil { start, weights }
            })
            .collect();
        Ok(Self {
            dims,
            modes,
            nf,
            spread,
            deconv,
            stencils,
            fft: SquareFft::new(nf, dims),
            npoints: points.len() / dims,
        })
    }

    pub fn spread(&self) -> usize {
        self.spread
    }

    pub fn num_points(&self) -> usize {
        self.npoints
    }

    /// Modes -> points. `modes` has `ms^d` entries, row-major, centered.
    pub fn type2(&self, modes: &[Complex64]) -> Vec<Complex64> {
        let (ms, nf) = (self.modes, self.nf);
        let half = ms / 2;
        let mut grid = vec![Complex64::new(0.0, 0.0); nf.pow(self.dims as u32)];
        let wrap = |j: usize| (j + nf - half) % nf;
        if self.dims == 1 {
            for j in 0..ms {
                grid[wrap(j)] = modes[j] * self.deconv[j];
            }
        } else {
            for i in 0..ms {
                for j in 0..ms {
                    grid[wrap(i) * nf + wrap(j)] = modes[i * ms + j] * (self.deconv[i] * self.deconv[j]);
                }
            }
        }
        self.fft.forward(&mut grid);
        let scale = 1.0 / (nf.pow(self.dims as u32) as f64);
        (0..self.npoints).map(|k| self.interp(&grid, k) * scale).collect()
    }

    /// Points -> modes, the adjoint of [`NufftPlan::type2`].
    pub fn type1(&self, values: &[Complex64]) -> Vec<Complex64> {
        let (ms, nf) = (self.modes, self.nf);
        let half = ms / 2;
        let mut grid = vec![Complex64::new(0.0, 0.0); nf.pow(self.dims as u32)];
        for (k, v) in values.iter().enumerate() {
            self.spread_point(&mut grid, k, *v);
        }
        self.fft.inverse(&mut grid);
        let scale = 1.0 / (nf.pow(self.dims as u32) as f64);
        let wrap = |j: usize| (j + nf - half) % nf;
        if self.dims == 1 {
            (0..ms).map(|j| grid[wrap(j)] * (self.deconv[j] * scale)).collect()
        } else {
            let mut out = Vec::with_capacity(ms * ms);
            for i in 0..ms {
                for j in 0..ms {
                    out.push(grid[wrap(i) * nf + wrap(j)] * (self.deconv[i] * self.deconv[j] * scale));
                }
            }
            out
        }
    }

    fn interp(&self, grid: &[Complex64], k: usize) -> Complex64 {
        let nf = self.nf;
        let mut acc = Complex64::new(0.0, 0.0);
        if self.dims == 1 {
            let s = &self.stencils[k];
            for (m, w) in s.weights.iter().enumerate() {
                acc += grid[(s.start + m) % nf] * *w;
            }
        } else {
            let sx = &self.stencils[2 * k];
            let sy = &self.stencils[2 * k + 1];
            for (a, wx) in sx.weights.iter().enumerate() {
                let row = ((sx.start + a) % nf) * nf;
                let mut inner = Complex64::new(0.0, 0.0);
                for (b, wy) in sy.weights.iter().enumerate() {
                    inner += grid[row + (sy.start + b) % nf] * *wy;
                }
                acc += inner * *wx;
            }
        }
        acc
    }

    fn spread_point(&self, grid: &mut [Complex64], k: usize, v: Complex64) {
        let nf = self.nf;
        if self.dims == 1 {
            let s = &self.stencils[k];
            for (m, w) in s.weights.iter().enumerate() {
                grid[(s.start + m) % nf] += v * *w;
            }
        } else {
            let sx = &self.stencils[2 * k];
            let sy = &self.stencils[2 * k + 1];
            for (a, wx) in sx.weights.iter().enumerate() {
                let row = ((sx.start + a) % nf) * nf;
                let vx = v * *wx;
                for (b, wy) in sy.weights.iter().enumerate() {
                    grid[row + (sy.start + b) % nf] += vx * *wy;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn direct_type2(modes: &[Complex64], ms: usize, t: &[f64]) -> Vec<Complex64> {
        let half = (ms / 2) as f64;
        t.iter()
            .map(|&tk| {
                modes
                    .iter()
                    .enumerate()
                    .map(|(j, m)| m * Complex64::from_polar(1.0, -(j as f64 - half) * tk))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(514), 540);
        assert_eq!(smooth_size(512), 512);
        assert_eq!(smooth_size(7), 8);
    }

    #[test]
    fn type2_matches_direct_1d() {
        let mut rng = crate::sampling::rng_from_seed(1);
        let ms = 65;
        let t: Vec<f64> = (0..80).map(|_| rng.random_range(-4.0..4.0)).collect();
        let g: Vec<Complex64> =
            (0..ms).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        for tol in [1e-6, 1e-10] {
            let plan = NufftPlan::new(1, ms, &t, tol).unwrap();
            let fast = plan.type2(&g);
            let slow = direct_type2(&g, ms, &t);
            let err = fast.iter().zip(&slow).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let scale: f64 = g.iter().map(|v| v.norm()).sum();
            assert!(err <= tol * scale, "tol {tol}: err {err}");
        }
    }

    #[test]
    fn type1_is_adjoint_of_type2() {
        let mut rng = crate::sampling::rng_from_seed(2);
        let ms = 9;
        let t: Vec<f64> = (0..2 * 40).map(|_| rng.random_range(-3.5..3.5)).collect();
        let plan = NufftPlan::new(2, ms, &t, 1e-8).unwrap();
        let g: Vec<Complex64> = (0..ms * ms).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let d: Vec<Complex64> = (0..40).map(|_| Complex64::new(rng.random(), rng.random())).collect();
        let lhs: Complex64 = plan.type2(&g).iter().zip(&d).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = g.iter().zip(plan.type1(&d)).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() < 1e-12 * lhs.norm().max(1.0));
    }

    #[test]
    fn unreachable_tolerance_fails() {
        assert!(NufftPlan::with_max_spread(1, 33, &[0.1], 1e-12, 6).is_err());
    }
}
