//! Analytic test functions and their continuous Fourier samples.
//!
//! All phantoms live on `[-1, 1]^d`. Fourier samples follow
//! `f^(lambda) = 2^-d * integral f(x) exp(-i pi lambda . x) dx`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::{ImageVector, SpatialGrid};
use crate::quadrature;
use crate::sampling::{FourierData, FrequencySet, Provenance};

/// Absolute tolerance for each quadrature-computed coefficient.
pub const QUADRATURE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phantom {
    /// `+-cos(x / 2)` with a unit-two jump at the origin.
    F1,
    /// Piecewise smooth function with six jumps, evaluated on `[-pi, pi]`
    /// rescaled to `[-1, 1]`.
    F2,
    /// Radial `cos(pi r^2)` / `sin(pi r^2)` with a jump on `r^2 = 1/2`.
    F3,
    /// Modified (high contrast) ten-ellipse Shepp-Logan head.
    SheppLogan,
}

/// One ellipse of the Shepp-Logan table.
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub intensity: f64,
    pub semi_x: f64,
    pub semi_y: f64,
    pub center_x: f64,
    pub center_y: f64,
    pub angle_deg: f64,
}

/// Modified Shepp-Logan intensities (Toft), which raise the contrast of the
/// interior structures relative to the original table.
pub const SHEPP_LOGAN_ELLIPSES: [Ellipse; 10] = [
    Ellipse { intensity: 1.0, semi_x: 0.69, semi_y: 0.92, center_x: 0.0, center_y: 0.0, angle_deg: 0.0 },
    Ellipse { intensity: -0.8, semi_x: 0.6624, semi_y: 0.874, center_x: 0.0, center_y: -0.0184, angle_deg: 0.0 },
    Ellipse { intensity: -0.2, semi_x: 0.11, semi_y: 0.31, center_x: 0.22, center_y: 0.0, angle_deg: -18.0 },
    Ellipse { intensity: -0.2, semi_x: 0.16, semi_y: 0.41, center_x: -0.22, center_y: 0.0, angle_deg: 18.0 },
    Ellipse { intensity: 0.1, semi_x: 0.21, semi_y: 0.25, center_x: 0.0, center_y: 0.35, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.046, semi_y: 0.046, center_x: 0.0, center_y: 0.1, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.046, semi_y: 0.046, center_x: 0.0, center_y: -0.1, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.046, semi_y: 0.023, center_x: -0.08, center_y: -0.605, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.023, semi_y: 0.023, center_x: 0.0, center_y: -0.606, angle_deg: 0.0 },
    Ellipse { intensity: 0.1, semi_x: 0.023, semi_y: 0.046, center_x: 0.06, center_y: -0.605, angle_deg: 0.0 },
];

impl Ellipse {
    fn local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.angle_deg.to_radians().sin_cos();
        let dx = x - self.center_x;
        let dy = y - self.center_y;
        (c * dx + s * dy, -s * dx + c * dy)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (u, v) = self.local(x, y);
        (u / self.semi_x).powi(2) + (v / self.semi_y).powi(2) <= 1.0
    }

    /// `(1/4) * integral over the ellipse of exp(-i pi lambda . p)`, times
    /// the intensity.
    pub fn fourier(&self, l1: f64, l2: f64) -> Complex64 {
        let (q1, q2) = self.local(l1 + self.center_x, l2 + self.center_y);
        let w = PI * (q1 * self.semi_x).hypot(q2 * self.semi_y);
        let disk = if w < 1e-8 { PI * (1.0 - w * w / 8.0) } else { 2.0 * PI * libm::j1(w) / w };
        let phase = Complex64::from_polar(1.0, -PI * (l1 * self.center_x + l2 * self.center_y));
        phase * (0.25 * self.intensity * self.semi_x * self.semi_y * disk)
    }
}

fn f2_scaled(x: f64) -> f64 {
    // Branches of f2 on [-pi, pi], with t = pi x.
    let t = PI * x;
    if (-0.75..-0.5).contains(&x) {
        1.5
    } else if (-0.25..0.125).contains(&x) {
        1.75 - t / 2.0 + (7.0 * t - 0.25).sin()
    } else if (0.375..0.75).contains(&x) {
        11.0 * t / 4.0 - 5.0
    } else {
        0.0
    }
}

impl Phantom {
    pub fn dims(&self) -> usize {
        match self {
            Phantom::F1 | Phantom::F2 => 1,
            Phantom::F3 | Phantom::SheppLogan => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Phantom::F1 => "f1",
            Phantom::F2 => "f2",
            Phantom::F3 => "f3",
            Phantom::SheppLogan => "shepp_logan",
        }
    }

    /// Discontinuity locations of a 1D phantom; empty for 2D phantoms.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Phantom::F1 => vec![0.0],
            Phantom::F2 => vec![-0.75, -0.5, -0.25, 0.125, 0.375, 0.75],
            _ => Vec::new(),
        }
    }

    /// Value of a 1D phantom; right-hand limit at breakpoints.
    pub fn eval_1d(&self, x: f64) -> Result<f64> {
        if self.dims() != 1 {
            return invalid(format!("{} is not a 1D phantom", self.name()));
        }
        if !(-1.0..=1.0).contains(&x) {
            return invalid(format!("x = {x} outside [-1, 1]"));
        }
        Ok(self.value_1d(x))
    }

    fn value_1d(&self, x: f64) -> f64 {
        match self {
            Phantom::F1 => {
                if x >= 0.0 {
                    (x / 2.0).cos()
                } else {
                    -(x / 2.0).cos()
                }
            }
            _ => f2_scaled(x),
        }
    }

    pub fn eval_2d(&self, x: f64, y: f64) -> Result<f64> {
        if self.dims() != 2 {
            return invalid(format!("{} is not a 2D phantom", self.name()));
        }
        if !(-1.0..=1.0).contains(&x) || !(-1.0..=1.0).contains(&y) {
            return invalid(format!("({x}, {y}) outside [-1, 1]^2"));
        }
        Ok(self.value_2d(x, y))
    }

    fn value_2d(&self, x: f64, y: f64) -> f64 {
        match self {
            Phantom::F3 => {
                let r2 = x * x + y * y;
                if r2 <= 0.5 {
                    (PI * r2).cos()
                } else {
                    (PI * r2 - PI / 2.0).cos()
                }
            }
            _ => SHEPP_LOGAN_ELLIPSES
                .iter()
                .filter(|e| e.contains(x, y))
                .map(|e| e.intensity)
                .sum(),
        }
    }

    /// Samples the phantom on every point of `grid`.
    pub fn rasterize(&self, grid: SpatialGrid) -> Result<ImageVector> {
        if grid.dims() != self.dims() {
            return invalid(format!("{} needs a {}D grid", self.name(), self.dims()));
        }
        Ok(match self.dims() {
            1 => ImageVector::from_fn_1d(grid, |x| self.value_1d(x)),
            _ => ImageVector::from_fn_2d(grid, |x, y| self.value_2d(x, y)),
        })
    }

    /// Continuous Fourier coefficients at each frequency of `freqs`.
    pub fn continuous_fourier_samples(&self, freqs: &FrequencySet) -> Result<FourierData> {
        if freqs.dims() != self.dims() {
            return invalid("phantom and frequency set dimensions differ");
        }
        let values = match self {
            Phantom::F1 | Phantom::F2 => {
                let mut pieces = vec![-1.0];
                pieces.extend(self.breakpoints());
                pieces.push(1.0);
                (0..freqs.len())
                    .map(|k| fourier_coefficient_1d(|x| self.value_1d(x), &pieces, freqs.coord(k, 0)))
                    .collect::<Result<Vec<_>>>()?
            }
            Phantom::F3 => f3_fourier(freqs)?,
            Phantom::SheppLogan => (0..freqs.len())
                .map(|k| {
                    let (l1, l2) = (freqs.coord(k, 0), freqs.coord(k, 1));
                    SHEPP_LOGAN_ELLIPSES.iter().map(|e| e.fourier(l1, l2)).sum()
                })
                .collect(),
        };
        Ok(FourierData::new(values, Provenance::ContinuousQuadrature))
    }
}

/// `(1/2) * integral_{-1}^{1} f(x) exp(-i pi lambda x) dx`, split at the
/// interior points of `pieces` (which must start at -1 and end at 1).
pub fn fourier_coefficient_1d<F: Fn(f64) -> f64>(f: F, pieces: &[f64], lambda: f64) -> Result<Complex64> {
    let v = quadrature::integrate_pieces(
        |x| Complex64::from_polar(f(x), -PI * lambda * x),
        pieces,
        2.0 * QUADRATURE_TOL,
    )
    .map_err(|e| crate::error::ReconError::NumericFailure(format!("{e} at lambda = {lambda}")))?;
    Ok(0.5 * v)
}

/// F3 splits into the separable `sin(pi (x^2 + y^2))` over the square plus a
/// radial correction `cos - sin` supported on the disk `r^2 <= 1/2`.
fn f3_fourier(freqs: &FrequencySet) -> Result<Vec<Complex64>> {
    // (1/2) int_{-1}^{1} e^{i pi x^2} cos(pi l x) dx = C(l) + i S(l)
    let cs = |l: f64| -> Result<Complex64> {
        quadrature::integrate(
            |x| Complex64::from_polar((PI * l * x).cos(), PI * x * x),
            0.0,
            1.0,
            QUADRATURE_TOL / 4.0,
        )
        .map_err(|e| crate::error::ReconError::NumericFailure(format!("{e} at lambda = {l}")))
    };
    let radius = FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(freqs.len());
    for k in 0..freqs.len() {
        let (l1, l2) = (freqs.coord(k, 0), freqs.coord(k, 1));
        let a = cs(l1)?;
        let b = cs(l2)?;
        let separable = a.im * b.re + a.re * b.im;
        let rho = l1.hypot(l2);
        let radial = quadrature::integrate(
            |r| {
                let h = (PI * r * r).cos() - (PI * r * r).sin();
                Complex64::new(h * r * libm::j0(PI * rho * r), 0.0)
            },
            0.0,
            radius,
            QUADRATURE_TOL / 4.0,
        )
        .map_err(|e| crate::error::ReconError::NumericFailure(format!("{e} at lambda = ({l1}, {l2})")))?;
        out.push(Complex64::new(separable + 0.5 * PI * radial.re, 0.0));
    }
    Ok(out)
}

/// The Shepp-Logan phantom rasterized on a 2D grid.
pub fn shepp_logan(grid: SpatialGrid) -> Result<ImageVector> {
    Phantom::SheppLogan.rasterize(grid)
}
