//! Polynomial annihilation (high order total variation) transforms.
//!
//! `L^m` has `n - m` rows, each holding the binomial stencil
//! `c_j = (-1)^(m-j) C(m, j) / q_m`, shifted one column per row. The scale
//! `q_m` makes the largest response to a unit step exactly one.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Axis of a 2D image a transform acts along. `Rows` is `L g` (differences
/// along the first index, the x direction); `Cols` is `g L^T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Rows,
    Cols,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PATransform {
    m: usize,
    n: usize,
    stencil: Vec<f64>,
}

fn binomial(m: usize, j: usize) -> f64 {
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Unnormalized stencil and its normalizing constant `q_m`.
fn raw_stencil(m: usize) -> (Vec<f64>, f64) {
    let c: Vec<f64> = (0..=m)
        .map(|j| if (m - j) % 2 == 0 { binomial(m, j) } else { -binomial(m, j) })
        .collect();
    let q = c[m / 2 + 1..].iter().sum::<f64>().abs();
    (c, q)
}

impl PATransform {
    pub fn build(m: usize, n: usize) -> Result<Self> {
        if m >= n {
            return invalid(format!("PA order {m} must be below grid size {n}"));
        }
        let stencil = if m == 0 {
            vec![1.0]
        } else {
            let (c, q) = raw_stencil(m);
            c.into_iter().map(|v| v / q).collect()
        };
        Ok(Self { m, n, stencil })
    }

    pub fn order(&self) -> usize {
        self.m
    }

    /// Input length.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Output length `n - m`.
    pub fn rows(&self) -> usize {
        self.n - self.m
    }

    pub fn stencil(&self) -> &[f64] {
        &self.stencil
    }

    /// The same band structure with every coefficient replaced by its magnitude.
    pub fn magnitude(&self) -> Self {
        Self { m: self.m, n: self.n, stencil: self.stencil.iter().map(|c| c.abs()).collect() }
    }

    pub fn apply_1d(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.n {
            return invalid(format!("PA transform expects {} values, got {}", self.n, g.len()));
        }
        let mut out = vec![0.0; self.rows()];
        self.apply_into(g, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_into(&self, g: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            *o = self.stencil.iter().zip(&g[r..]).map(|(c, v)| c * v).sum();
        }
    }

    /// `(L^m)^T v`.
    pub fn adjoint_apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.rows() {
            return invalid(format!("PA adjoint expects {} values, got {}", self.rows(), v.len()));
        }
        let mut out = vec![0.0; self.n];
        self.adjoint_add(v, &mut out, 1.0);
        Ok(out)
    }

    /// `out += scale * (L^m)^T v`.
    pub(crate) fn adjoint_add(&self, v: &[f64], out: &mut [f64], scale: f64) {
        for (r, &vr) in v.iter().enumerate() {
            let s = scale * vr;
            for (c, o) in self.stencil.iter().zip(&mut out[r..]) {
                *o += c * s;
            }
        }
    }

    /// Applies `L^m` along `axis` of a square `n x n` row-major image.
    /// `Rows` returns `(n - m) x n`, `Cols` returns `n x (n - m)`.
    pub fn apply_2d(&self, g: &[f64], axis: Axis) -> Result<Vec<f64>> {
        let n = self.n;
        if g.len() != n * n {
            return invalid(format!("PA 2D transform expects {}x{} values", n, n));
        }
        let mut out = vec![0.0; self.rows() * n];
        self.apply_2d_into(g, axis, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_2d_into(&self, g: &[f64], axis: Axis, out: &mut [f64]) {
        let n = self.n;
        let rows = self.rows();
        match axis {
            Axis::Rows => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for r in 0..rows {
                    let dst = &mut out[r * n..(r + 1) * n];
                    for (i, c) in self.stencil.iter().enumerate() {
                        let src = &g[(r + i) * n..(r + i + 1) * n];
                        dst.iter_mut().zip(src).for_each(|(d, s)| *d += c * s);
                    }
                }
            }
            Axis::Cols => {
                for i in 0..n {
                    self.apply_into(&g[i * n..(i + 1) * n], &mut out[i * rows..(i + 1) * rows]);
                }
            }
        }
    }

    /// Adjoint of [`PATransform::apply_2d`].
    pub fn adjoint_2d(&self, v: &[f64], axis: Axis) -> Result<Vec<f64>> {
        let n = self.n;
        if v.len() != self.rows() * n {
            return invalid("PA 2D adjoint input has the wrong size");
        }
        let mut out = vec![0.0; n * n];
        self.adjoint_2d_add(v, axis, &mut out, 1.0);
        Ok(out)
    }

    pub(crate) fn adjoint_2d_add(&self, v: &[f64], axis: Axis, out: &mut [f64], scale: f64) {
        let n = self.n;
        let rows = self.rows();
        match axis {
            Axis::Rows => {
                for r in 0..rows {
                    let src = &v[r * n..(r + 1) * n];
                    for (i, c) in self.stencil.iter().enumerate() {
                        let k = scale * c;
                        let dst = &mut out[(r + i) * n..(r + i + 1) * n];
                        dst.iter_mut().zip(src).for_each(|(d, s)| *d += k * s);
                    }
                }
            }
            Axis::Cols => {
                for i in 0..n {
                    self.adjoint_add(&v[i * rows..(i + 1) * rows], &mut out[i * n..(i + 1) * n], scale);
                }
            }
        }
    }
}

/// A linear sparsifying map `D` used in a regularizer `|| W D g ||`.
#[derive(Debug, Clone, PartialEq)]
pub enum Sparsifier {
    Identity(usize),
    Pa1d(PATransform),
    Pa2d(PATransform, Axis),
}

impl Sparsifier {
    /// The PA sparsifiers for a grid: one for 1D, one per axis for 2D.
    pub fn for_grid(m: usize, n: usize, dims: usize) -> Result<Vec<Sparsifier>> {
        let pa = PATransform::build(m, n)?;
        Ok(match dims {
            1 => vec![Sparsifier::Pa1d(pa)],
            _ => vec![Sparsifier::Pa2d(pa.clone(), Axis::Rows), Sparsifier::Pa2d(pa, Axis::Cols)],
        })
    }

    pub fn input_len(&self) -> usize {
        match self {
            Sparsifier::Identity(n) => *n,
            Sparsifier::Pa1d(p) => p.n(),
            Sparsifier::Pa2d(p, _) => p.n() * p.n(),
        }
    }

    pub fn output_len(&self) -> usize {
        match self {
            Sparsifier::Identity(n) => *n,
            Sparsifier::Pa1d(p) => p.rows(),
            Sparsifier::Pa2d(p, _) => p.rows() * p.n(),
        }
    }

    pub fn apply(&self, g: &[f64], out: &mut [f64]) {
        match self {
            Sparsifier::Identity(_) => out.copy_from_slice(g),
            Sparsifier::Pa1d(p) => p.apply_into(g, out),
            Sparsifier::Pa2d(p, axis) => p.apply_2d_into(g, *axis, out),
        }
    }

    pub fn apply_vec(&self, g: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.output_len()];
        self.apply(g, &mut out);
        out
    }

    /// `out += scale * D^T v`.
    pub fn adjoint_add(&self, v: &[f64], out: &mut [f64], scale: f64) {
        match self {
            Sparsifier::Identity(_) => out.iter_mut().zip(v).for_each(|(o, x)| *o += scale * x),
            Sparsifier::Pa1d(p) => p.adjoint_add(v, out, scale),
            Sparsifier::Pa2d(p, axis) => p.adjoint_2d_add(v, *axis, out, scale),
        }
    }
}
