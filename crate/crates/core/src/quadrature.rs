//! Adaptive Gauss-Kronrod (7/15) quadrature for complex-valued integrands.

use num_complex::Complex64;

use crate::error::{ReconError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, tol: f64) -> Result<Complex64> {
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    const MAX_SEGMENTS: usize = 20_000;
    let mut stack = vec![(a, b, tol)];
    let mut total = Complex64::new(0.0, 0.0);
    let mut segments = 0;
    while let Some((lo, hi, t)) = stack.pop() {
        let (val, err) = kronrod(&f, lo, hi);
        segments += 1;
        if err <= t || (hi - lo).abs() < 1e-14 * (1.0 + lo.abs()) {
            total += val;
            continue;
        }
        if segments > MAX_SEGMENTS {
            return Err(ReconError::NumericFailure(format!(
                "quadrature did not converge on [{a}, {b}]"
            )));
        }
        let mid = 0.5 * (lo + hi);
        stack.push((mid, hi, 0.5 * t));
        stack.push((lo, mid, 0.5 * t));
    }
    Ok(total)
}

/// Integrates over consecutive pieces `[p_0, p_1], [p_1, p_2], ...`.
pub fn integrate_pieces<F: Fn(f64) -> Complex64>(f: F, pieces: &[f64], tol: f64) -> Result<Complex64> {
    let n = pieces.len().saturating_sub(1).max(1) as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for w in pieces.windows(2) {
        total += integrate(&f, w[0], w[1], tol / n)?;
    }
    Ok(total)
}
