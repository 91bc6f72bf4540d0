//! Optimization kernels over real images with a Fourier data-fit term
//! `|| S (F g) - y ||_2^2`, where `S` is an optional diagonal row scaling.
//!
//! * [`split_bregman`] for weighted-l1 regularization,
//! * [`cg_solve`] for masked quadratic regularization,
//! * [`direct_solve`] for the dense closed form in 1D.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, ReconError, Result};
use crate::fourier_model::{ForwardOperator, ToeplitzNormal};
use crate::grid::{dot, norm2, ImageVector};
use crate::pa_transform::Sparsifier;

/// The data-fit term `phi(g) = || S F g - y ||^2 = g^T N g - 2 b^T g + c`
/// restricted to real `g`, with `N = Re(F^H S^H S F)` applied through its
/// Toeplitz structure.
#[derive(Clone)]
pub struct Fidelity<'a> {
    op: &'a ForwardOperator,
    row_scale: Option<Vec<Complex64>>,
    target: Vec<Complex64>,
    normal: ToeplitzNormal,
    rhs: Vec<f64>,
    constant: f64,
}

impl<'a> Fidelity<'a> {
    /// `|| F g - y ||^2`.
    pub fn new(op: &'a ForwardOperator, target: &[Complex64]) -> Result<Self> {
        Self::build(op, None, target)
    }

    /// `|| diag(s) F g - y ||^2`.
    pub fn scaled(op: &'a ForwardOperator, row_scale: Vec<Complex64>, target: &[Complex64]) -> Result<Self> {
        Self::build(op, Some(row_scale), target)
    }

    fn build(op: &'a ForwardOperator, row_scale: Option<Vec<Complex64>>, target: &[Complex64]) -> Result<Self> {
        let k = op.freqs().len();
        if target.len() != k {
            return invalid(format!("fidelity target has {} entries for {k} frequencies", target.len()));
        }
        if row_scale.as_ref().is_some_and(|s| s.len() != k) {
            return invalid("row scaling misaligned with frequencies");
        }
        let (normal, back) = match &row_scale {
            None => (op.normal_operator(None)?, target.to_vec()),
            Some(s) => {
                let w: Vec<f64> = s.iter().map(|v| v.norm_sqr()).collect();
                let back = s.iter().zip(target).map(|(a, y)| a.conj() * y).collect();
                (op.normal_operator(Some(&w))?, back)
            }
        };
        let rhs = op.adjoint_complex(&back)?.into_iter().map(|v| v.re).collect();
        let constant = target.iter().map(|v| v.norm_sqr()).sum();
        Ok(Self { op, row_scale, target: target.to_vec(), normal, rhs, constant })
    }

    pub fn operator(&self) -> &ForwardOperator {
        self.op
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn normal(&self) -> &ToeplitzNormal {
        &self.normal
    }

    /// `Re(F^H S^H y)`.
    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `phi(g)` evaluated through the quadratic form.
    pub fn value(&self, g: &[f64]) -> f64 {
        let mut ng = vec![0.0; g.len()];
        self.normal.apply(g, &mut ng);
        (dot(g, &ng) - 2.0 * dot(g, &self.rhs) + self.constant).max(0.0)
    }

    /// `phi(g)` evaluated by applying the forward operator.
    pub fn value_explicit(&self, g: &[f64]) -> Result<f64> {
        let input: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let fg = self.op.forward_complex(&input)?;
        Ok(fg
            .iter()
            .enumerate()
            .map(|(k, v)| {
                let s = self.row_scale.as_ref().map_or(Complex64::new(1.0, 0.0), |s| s[k]);
                (s * v - self.target[k]).norm_sqr()
            })
            .sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BregmanParams {
    /// Splitting penalty; `None` picks the diagonal of the normal operator.
    pub splitting: Option<f64>,
    pub inner_tolerance: f64,
    pub inner_max_iterations: usize,
    /// Stop when the relative change of consecutive iterates drops below this.
    pub outer_tolerance: f64,
    pub max_outer_iterations: usize,
}

impl Default for BregmanParams {
    fn default() -> Self {
        Self {
            splitting: None,
            inner_tolerance: 1e-6,
            inner_max_iterations: 10,
            outer_tolerance: 1e-6,
            max_outer_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CgParams {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for CgParams {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 2000 }
    }
}

/// `min_g phi(g) + reg * sum_a || diag(w_a) D_a g ||_1`.
pub struct WeightedL1Problem<'a> {
    pub fidelity: &'a Fidelity<'a>,
    pub sparsifiers: &'a [Sparsifier],
    /// One non-negative weight vector per sparsifier.
    pub weights: &'a [Vec<f64>],
    pub reg: f64,
    pub params: BregmanParams,
}

/// `min_g phi(g) + lambda * sum_a || M_a D_a g ||_2^2` with binary masks.
pub struct MaskedL2Problem<'a> {
    pub fidelity: &'a Fidelity<'a>,
    pub sparsifiers: &'a [Sparsifier],
    /// One 0/1 mask per sparsifier, aligned with its output.
    pub masks: &'a [Vec<f64>],
    pub lambda: f64,
    pub params: CgParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
    pub converged: bool,
}

impl SolveReport {
    pub const CSV_HEADER: &'static str = "iterations,residual,seconds,converged";

    pub fn csv_row(&self) -> String {
        format!("{},{:e},{:.6},{}", self.iterations, self.residual, self.seconds, self.converged)
    }
}

/// Soft threshold; values exactly at the threshold map to zero.
pub fn shrink(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Outcome of [`conjugate_gradient`].
#[derive(Debug, Clone, Copy)]
pub struct CgOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// Conjugate gradient for a symmetric positive semidefinite operator.
/// `on_iterate` sees every iterate after its update.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    rhs: &[f64],
    x: &mut [f64],
    tolerance: f64,
    max_iterations: usize,
    mut on_iterate: impl FnMut(&[f64]),
) -> Result<CgOutcome> {
    let n = rhs.len();
    let bnorm = norm2(rhs);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgOutcome { iterations: 0, relative_residual: 0.0, converged: true });
    }
    let mut ax = vec![0.0; n];
    apply(x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![0.0; n];
    let mut it = 0;
    while it < max_iterations {
        if rr.sqrt() <= tolerance * bnorm {
            return Ok(CgOutcome { iterations: it, relative_residual: rr.sqrt() / bnorm, converged: true });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > f64::EPSILON * f64::EPSILON * dot(&p, &p)) {
            return Err(ReconError::NumericFailure(format!(
                "conjugate gradient breakdown at iteration {it} (p^T A p = {pap:e})"
            )));
        }
        let alpha = rr / pap;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&ap).for_each(|(ri, api)| *ri -= alpha * api);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        p.iter_mut().zip(&r).for_each(|(pi, ri)| *pi = ri + beta * *pi);
        it += 1;
        on_iterate(x);
    }
    let rel = rr.sqrt() / bnorm;
    Ok(CgOutcome { iterations: it, relative_residual: rel, converged: rel <= tolerance })
}

fn check_init(fid: &Fidelity, init: &ImageVector) -> Result<()> {
    if init.len() != fid.len() {
        return invalid(format!("initial image has {} values, problem has {}", init.len(), fid.len()));
    }
    Ok(())
}

/// Split Bregman iteration for [`WeightedL1Problem`].
///
/// Returns the last iterate; `converged` is false if the outer loop hit
/// its iteration cap first.
pub fn split_bregman(p: &WeightedL1Problem, init: &ImageVector) -> Result<(ImageVector, SolveReport)> {
    let start = Instant::now();
    if !(p.reg > 0.0) {
        return invalid(format!("l1 regularization parameter must be positive, got {}", p.reg));
    }
    check_init(p.fidelity, init)?;
    if p.weights.len() != p.sparsifiers.len() {
        return invalid("one weight vector is needed per sparsifier");
    }
    for (w, s) in p.weights.iter().zip(p.sparsifiers) {
        if w.len() != s.output_len() || s.input_len() != init.len() {
            return invalid("weights or sparsifier do not match the image size");
        }
        if w.iter().any(|v| !(*v >= 0.0)) {
            return invalid("l1 weights must be non-negative");
        }
    }
    let fid = p.fidelity;
    let normal = fid.normal();
    let beta = p.params.splitting.unwrap_or_else(|| normal.diagonal().max(f64::MIN_POSITIVE));
    let n = init.len();
    let mut g = init.data.clone();
    let mut d: Vec<Vec<f64>> = p.sparsifiers.iter().map(|s| s.apply_vec(&g)).collect();
    let mut b: Vec<Vec<f64>> = p.sparsifiers.iter().map(|s| vec![0.0; s.output_len()]).collect();
    let mut scratch: Vec<Vec<f64>> = p.sparsifiers.iter().map(|s| vec![0.0; s.output_len()]).collect();
    let apply = |x: &[f64], out: &mut [f64]| {
        normal.apply(x, out);
        let mut tmp = Vec::new();
        for s in p.sparsifiers {
            tmp.resize(s.output_len(), 0.0);
            s.apply(x, &mut tmp);
            s.adjoint_add(&tmp, out, beta);
        }
    };
    let mut rhs = vec![0.0; n];
    let mut iterations = 0;
    let mut change = f64::INFINITY;
    let mut converged = false;
    while iterations < p.params.max_outer_iterations {
        rhs.copy_from_slice(fid.rhs());
        for (a, s) in p.sparsifiers.iter().enumerate() {
            let diff: Vec<f64> = d[a].iter().zip(&b[a]).map(|(x, y)| x - y).collect();
            s.adjoint_add(&diff, &mut rhs, beta);
        }
        let prev = g.clone();
        conjugate_gradient(apply, &rhs, &mut g, p.params.inner_tolerance, p.params.inner_max_iterations, |_| {})?;
        for (a, s) in p.sparsifiers.iter().enumerate() {
            s.apply(&g, &mut scratch[a]);
            let thr = p.reg / (2.0 * beta);
            for (((v, di), bi), w) in scratch[a]
                .iter()
                .zip(d[a].iter_mut())
                .zip(b[a].iter_mut())
                .zip(&p.weights[a])
            {
                let u = v + *bi;
                *di = shrink(u, thr * w);
                *bi = u - *di;
            }
        }
        iterations += 1;
        let diff: f64 = g.iter().zip(&prev).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
        let scale = norm2(&g);
        change = if scale > 0.0 { diff / scale } else { diff };
        if change < p.params.outer_tolerance {
            converged = true;
            break;
        }
    }
    let report = SolveReport { iterations, residual: change, seconds: start.elapsed().as_secs_f64(), converged };
    Ok((ImageVector { grid: init.grid, data: g }, report))
}

fn check_masked(p: &MaskedL2Problem, n: usize) -> Result<()> {
    if !(p.lambda >= 0.0) {
        return invalid(format!("l2 regularization parameter must be non-negative, got {}", p.lambda));
    }
    if p.masks.len() != p.sparsifiers.len() {
        return invalid("one mask is needed per sparsifier");
    }
    for (m, s) in p.masks.iter().zip(p.sparsifiers) {
        if m.len() != s.output_len() || s.input_len() != n {
            return invalid("mask or sparsifier does not match the image size");
        }
        if m.iter().any(|v| *v != 0.0 && *v != 1.0) {
            return invalid("masks must be binary");
        }
    }
    Ok(())
}

/// Applies `N + lambda * sum_a D_a^T M_a D_a`.
pub fn masked_operator_apply(p: &MaskedL2Problem, x: &[f64], out: &mut [f64]) {
    p.fidelity.normal().apply(x, out);
    if p.lambda == 0.0 {
        return;
    }
    let mut tmp = Vec::new();
    for (s, m) in p.sparsifiers.iter().zip(p.masks) {
        tmp.resize(s.output_len(), 0.0);
        s.apply(x, &mut tmp);
        tmp.iter_mut().zip(m).for_each(|(t, mi)| *t *= mi);
        s.adjoint_add(&tmp, out, p.lambda);
    }
}

/// Objective of [`MaskedL2Problem`] at `g`.
pub fn masked_objective(p: &MaskedL2Problem, g: &[f64]) -> f64 {
    let mut reg = 0.0;
    for (s, m) in p.sparsifiers.iter().zip(p.masks) {
        let dg = s.apply_vec(g);
        reg += dg.iter().zip(m).map(|(v, mi)| mi * v * v).sum::<f64>();
    }
    p.fidelity.value(g) + p.lambda * reg
}

/// Conjugate gradient on the normal equations of [`MaskedL2Problem`].
pub fn cg_solve(p: &MaskedL2Problem, init: &ImageVector) -> Result<(ImageVector, SolveReport)> {
    cg_solve_observed(p, init, |_| {})
}

/// [`cg_solve`] with a hook that sees every iterate.
pub fn cg_solve_observed(
    p: &MaskedL2Problem,
    init: &ImageVector,
    on_iterate: impl FnMut(&[f64]),
) -> Result<(ImageVector, SolveReport)> {
    let start = Instant::now();
    check_init(p.fidelity, init)?;
    check_masked(p, init.len())?;
    let mut g = init.data.clone();
    let out = conjugate_gradient(
        |x, o| masked_operator_apply(p, x, o),
        p.fidelity.rhs(),
        &mut g,
        p.params.tolerance,
        p.params.max_iterations,
        on_iterate,
    )?;
    let report = SolveReport {
        iterations: out.iterations,
        residual: out.relative_residual,
        seconds: start.elapsed().as_secs_f64(),
        converged: out.converged,
    };
    Ok((ImageVector { grid: init.grid, data: g }, report))
}

/// Dense closed-form solution of a 1D [`MaskedL2Problem`].
///
/// Materializes `S F`, each `D_a` and `M_a`, and solves
/// `(Re(F^H S^H S F) + lambda sum D^T M D) g = Re(F^H S^H y)`.
pub fn direct_solve(p: &MaskedL2Problem) -> Result<ImageVector> {
    let fid = p.fidelity;
    let op = fid.operator();
    let grid = op.grid();
    if grid.dims() != 1 {
        return invalid("direct solve is only available in 1D");
    }
    let n = grid.len();
    check_masked(p, n)?;
    let f = op.dense_matrix()?;
    let k = f.len();
    let scaled = |r: usize, c: usize| {
        let s = fid.row_scale.as_ref().map_or(Complex64::new(1.0, 0.0), |s| s[r]);
        s * f[r][c]
    };
    let sf = DMatrix::from_fn(k, n, scaled);
    let mut a = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for r in 0..k {
                acc += (sf[(r, i)].conj() * sf[(r, j)]).re;
            }
            a[(i, j)] = acc;
            a[(j, i)] = acc;
        }
    }
    let mut rhs = DVector::<f64>::zeros(n);
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for r in 0..k {
            acc += sf[(r, i)].conj() * fid.target[r];
        }
        rhs[i] = acc.re;
    }
    for (s, m) in p.sparsifiers.iter().zip(p.masks) {
        let rows = s.output_len();
        let mut dmat = DMatrix::<f64>::zeros(rows, n);
        let mut e = vec![0.0; n];
        let mut col = vec![0.0; rows];
        for j in 0..n {
            e[j] = 1.0;
            s.apply(&e, &mut col);
            for i in 0..rows {
                dmat[(i, j)] = col[i] * m[i];
            }
            e[j] = 0.0;
        }
        a += (dmat.transpose() * &dmat) * p.lambda;
    }
    let solution = match a.clone().cholesky() {
        Some(ch) => ch.solve(&rhs),
        None => {
            let lu = a.lu();
            let u = lu.u();
            let diag_max = (0..n).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
            let diag_min = (0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
            if !(diag_min > 1e-13 * diag_max) {
                return Err(ReconError::NumericFailure("normal matrix is singular".into()));
            }
            lu.solve(&rhs).ok_or_else(|| ReconError::NumericFailure("normal matrix is singular".into()))?
        }
    };
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(ReconError::NumericFailure("direct solve produced non-finite values".into()));
    }
    Ok(ImageVector { grid, data: solution.iter().copied().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier_model::TransformMode;
    use crate::grid::SpatialGrid;
    use crate::sampling::{jittered_frequencies_1d, rng_from_seed};
    use rand::Rng;

    fn random_target(k: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = rng_from_seed(seed);
        (0..k).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    fn random_mask(len: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..len).map(|_| if rng.random_bool(0.8) { 1.0 } else { 0.0 }).collect()
    }

    #[test]
    fn shrink_values() {
        assert_eq!(shrink(3.0, 1.0), 2.0);
        assert_eq!(shrink(-3.0, 1.0), -2.0);
        assert_eq!(shrink(1.0, 1.0), 0.0);
        assert_eq!(shrink(-0.5, 1.0), 0.0);
        assert_eq!(shrink(0.7, 0.0), 0.7);
    }

    #[test]
    fn cg_matches_dense_solve_on_random_instances() {
        let mut rng = rng_from_seed(99);
        for case in 0..20u64 {
            let half = rng.random_range(4..=64);
            let grid = SpatialGrid::one_d(half).unwrap();
            let freqs = jittered_frequencies_1d(half, case).unwrap();
            let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
            let target = random_target(freqs.len(), 1000 + case);
            let fid = Fidelity::new(&op, &target).unwrap();
            let m = rng.random_range(1..=3);
            let sp = Sparsifier::for_grid(m, grid.n(), 1).unwrap();
            let masks = vec![random_mask(sp[0].output_len(), &mut rng)];
            let lambda = 10f64.powf(rng.random_range(-4.0..-1.0));
            let p = MaskedL2Problem {
                fidelity: &fid,
                sparsifiers: &sp,
                masks: &masks,
                lambda,
                params: CgParams { tolerance: 1e-13, max_iterations: 20_000 },
            };
            let (cg, report) = cg_solve(&p, &ImageVector::zeros(grid)).unwrap();
            let dense = direct_solve(&p).unwrap();
            let diff: Vec<f64> = cg.data.iter().zip(&dense.data).map(|(a, b)| a - b).collect();
            let rel = norm2(&diff) / norm2(&dense.data);
            assert!(rel < 1e-8, "case {case}: n {} m {m} rel {rel:e} {report:?}", grid.n());
        }
    }

    #[test]
    fn cg_objective_never_increases() {
        let grid = SpatialGrid::one_d(40).unwrap();
        let freqs = jittered_frequencies_1d(40, 5).unwrap();
        let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
        let target = random_target(freqs.len(), 8);
        let fid = Fidelity::new(&op, &target).unwrap();
        let sp = Sparsifier::for_grid(2, grid.n(), 1).unwrap();
        let masks = vec![vec![1.0; sp[0].output_len()]];
        let p = MaskedL2Problem { fidelity: &fid, sparsifiers: &sp, masks: &masks, lambda: 0.01, params: CgParams::default() };
        let mut values = vec![masked_objective(&p, &vec![0.0; grid.n()])];
        cg_solve_observed(&p, &ImageVector::zeros(grid), |g| values.push(masked_objective(&p, g))).unwrap();
        assert!(values.len() > 2);
        for w in values.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-14, "{} then {}", w[0], w[1]);
        }
    }

    #[test]
    fn zero_weights_give_least_squares() {
        let grid = SpatialGrid::one_d(16).unwrap();
        let freqs = jittered_frequencies_1d(16, 2).unwrap();
        let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
        let target = random_target(freqs.len(), 4);
        let fid = Fidelity::new(&op, &target).unwrap();
        let sp = Sparsifier::for_grid(1, grid.n(), 1).unwrap();
        let weights = vec![vec![0.0; sp[0].output_len()]];
        let params = BregmanParams {
            splitting: Some(1e-3),
            inner_tolerance: 1e-13,
            inner_max_iterations: 2000,
            outer_tolerance: 1e-13,
            max_outer_iterations: 1000,
        };
        let l1 = WeightedL1Problem { fidelity: &fid, sparsifiers: &sp, weights: &weights, reg: 1.0, params };
        let (g, report) = split_bregman(&l1, &ImageVector::zeros(grid)).unwrap();
        let masks = vec![vec![0.0; sp[0].output_len()]];
        let ls = MaskedL2Problem { fidelity: &fid, sparsifiers: &sp, masks: &masks, lambda: 0.0, params: CgParams::default() };
        let dense = direct_solve(&ls).unwrap();
        let diff: Vec<f64> = g.data.iter().zip(&dense.data).map(|(a, b)| a - b).collect();
        let rel = norm2(&diff) / norm2(&dense.data);
        assert!(rel < 1e-7, "rel {rel:e} {report:?}");
    }

    #[test]
    fn bregman_solution_is_a_fixed_point() {
        let grid = SpatialGrid::one_d(24).unwrap();
        let freqs = jittered_frequencies_1d(24, 6).unwrap();
        let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
        let truth = ImageVector::from_fn_1d(grid, |x| if x > 0.2 { 1.0 } else { -0.5 });
        let target = op.forward(&truth).unwrap().values;
        let fid = Fidelity::new(&op, &target).unwrap();
        let sp = Sparsifier::for_grid(1, grid.n(), 1).unwrap();
        let weights = vec![vec![1.0; sp[0].output_len()]];
        let params = BregmanParams { inner_tolerance: 1e-12, outer_tolerance: 1e-10, max_outer_iterations: 5000, ..Default::default() };
        let p = WeightedL1Problem { fidelity: &fid, sparsifiers: &sp, weights: &weights, reg: 1e-3, params };
        let (g, report) = split_bregman(&p, &ImageVector::zeros(grid)).unwrap();
        assert!(report.converged, "{report:?}");
        let (again, second) = split_bregman(&p, &g).unwrap();
        let diff: Vec<f64> = g.data.iter().zip(&again.data).map(|(a, b)| a - b).collect();
        assert!(norm2(&diff) < 1e-6 * norm2(&g.data), "{second:?}");
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let mut x = vec![3.0; 4];
        let out = conjugate_gradient(|v, o| o.copy_from_slice(v), &[0.0; 4], &mut x, 1e-10, 10, |_| {}).unwrap();
        assert!(out.converged);
        assert_eq!(x, vec![0.0; 4]);
    }

    #[test]
    fn indefinite_operator_breaks_down() {
        let mut x = vec![0.0; 2];
        let r = conjugate_gradient(|v, o| { o[0] = v[0]; o[1] = -v[1]; }, &[1.0, 1.0], &mut x, 1e-12, 10, |_| {});
        assert!(matches!(r, Err(ReconError::NumericFailure(_))));
    }

    #[test]
    fn fidelity_quadratic_form_matches_explicit() {
        let grid = SpatialGrid::one_d(12).unwrap();
        let freqs = jittered_frequencies_1d(12, 3).unwrap();
        let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
        let target = random_target(freqs.len(), 1);
        let scale: Vec<Complex64> = random_target(freqs.len(), 2);
        let fid = Fidelity::scaled(&op, scale, &target).unwrap();
        let g: Vec<f64> = (0..grid.n()).map(|i| (i as f64 * 0.37).sin()).collect();
        let (a, b) = (fid.value(&g), fid.value_explicit(&g).unwrap());
        assert!((a - b).abs() < 1e-10 * b.max(1.0), "{a} vs {b}");
    }

    #[test]
    fn invalid_problems_are_rejected() {
        let grid = SpatialGrid::one_d(4).unwrap();
        let freqs = jittered_frequencies_1d(4, 1).unwrap();
        let op = ForwardOperator::new(grid, &freqs, TransformMode::Direct).unwrap();
        let target = random_target(freqs.len(), 1);
        assert!(Fidelity::new(&op, &target[1..]).is_err());
        let fid = Fidelity::new(&op, &target).unwrap();
        let sp = Sparsifier::for_grid(1, grid.n(), 1).unwrap();
        let bad_mask = vec![vec![0.5; sp[0].output_len()]];
        let p = MaskedL2Problem { fidelity: &fid, sparsifiers: &sp, masks: &bad_mask, lambda: 1.0, params: CgParams::default() };
        assert!(cg_solve(&p, &ImageVector::zeros(grid)).is_err());
        let weights = vec![vec![1.0; sp[0].output_len()]];
        let l1 = WeightedL1Problem { fidelity: &fid, sparsifiers: &sp, weights: &weights, reg: 0.0, params: BregmanParams::default() };
        assert!(split_bregman(&l1, &ImageVector::zeros(grid)).is_err());
    }
}
