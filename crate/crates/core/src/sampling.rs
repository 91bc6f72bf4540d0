//! Jittered non-uniform frequency sets, complex Gaussian noise, and random
//! subsampling of Fourier data.

use num_complex::Complex64;
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Seeded, portable generator used for every random draw in the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Non-uniform sample locations. Coordinates are stored flat with stride
/// `dims`; `nominal` holds the integer each coordinate jitters around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencySet {
    dims: usize,
    half_bandwidth: usize,
    coords: Vec<f64>,
    nominal: Vec<i64>,
    seed: Option<u64>,
}

impl FrequencySet {
    /// Builds a set from explicit coordinates (stride `dims`).
    pub fn from_parts(
        dims: usize,
        half_bandwidth: usize,
        coords: Vec<f64>,
        nominal: Vec<i64>,
        seed: Option<u64>,
    ) -> Result<Self> {
        if dims != 1 && dims != 2 {
            return invalid(format!("frequency dims must be 1 or 2, got {dims}"));
        }
        if coords.is_empty() || coords.len() % dims != 0 || coords.len() != nominal.len() {
            return invalid("frequency coordinates and nominal indices misaligned");
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("frequency coordinates must be finite");
        }
        Ok(Self { dims, half_bandwidth, coords, nominal, seed })
    }

    /// 1D set from a list of frequencies, nominal integers taken by rounding.
    pub fn from_lambdas_1d(lambdas: Vec<f64>) -> Result<Self> {
        let nominal: Vec<i64> = lambdas.iter().map(|l| l.round() as i64).collect();
        let half = nominal.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0) as usize;
        Self::from_parts(1, half, lambdas, nominal, None)
    }

    /// Jittered 1D set with explicit jitter draws `xi[k + M]` in `[0, 1]`.
    pub fn from_jitter_1d(half_bandwidth: usize, xi: &[f64]) -> Result<Self> {
        let m = check_bandwidth(half_bandwidth)?;
        if xi.len() != 2 * m + 1 {
            return invalid(format!("need {} jitter draws, got {}", 2 * m + 1, xi.len()));
        }
        let nominal: Vec<i64> = (-(m as i64)..=m as i64).collect();
        let coords = nominal.iter().zip(xi).map(|(&k, &x)| jitter(k, x)).collect();
        Self::from_parts(1, m, coords, nominal, None)
    }

    /// Jittered 2D set with explicit draws; `xi[2 * e]`, `xi[2 * e + 1]` jitter
    /// the two coordinates of entry `e` (row-major over `k1`, then `k2`).
    pub fn from_jitter_2d(half_bandwidth: usize, xi: &[f64]) -> Result<Self> {
        let m = check_bandwidth(half_bandwidth)?;
        let side = 2 * m + 1;
        if xi.len() != 2 * side * side {
            return invalid(format!("need {} jitter draws, got {}", 2 * side * side, xi.len()));
        }
        let mut coords = Vec::with_capacity(2 * side * side);
        let mut nominal = Vec::with_capacity(2 * side * side);
        let mut e = 0;
        for k1 in -(m as i64)..=m as i64 {
            for k2 in -(m as i64)..=m as i64 {
                coords.push(jitter(k1, xi[e]));
                coords.push(jitter(k2, xi[e + 1]));
                nominal.push(k1);
                nominal.push(k2);
                e += 2;
            }
        }
        Self::from_parts(2, m, coords, nominal, None)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Nominal half-bandwidth `M`.
    pub fn half_bandwidth(&self) -> usize {
        self.half_bandwidth
    }

    /// Number of frequency entries (pairs in 2D).
    pub fn len(&self) -> usize {
        self.coords.len() / self.dims
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Coordinate `axis` of entry `k`.
    pub fn coord(&self, k: usize, axis: usize) -> f64 {
        self.coords[k * self.dims + axis]
    }

    pub fn nominal(&self, k: usize, axis: usize) -> i64 {
        self.nominal[k * self.dims + axis]
    }

    /// All coordinates along one axis.
    pub fn axis(&self, axis: usize) -> Vec<f64> {
        self.coords.iter().skip(axis).step_by(self.dims).copied().collect()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Keeps the entries at `idx`, in that order.
    pub fn select(&self, idx: &[usize]) -> Self {
        let d = self.dims;
        let mut coords = Vec::with_capacity(idx.len() * d);
        let mut nominal = Vec::with_capacity(idx.len() * d);
        for &i in idx {
            coords.extend_from_slice(&self.coords[i * d..(i + 1) * d]);
            nominal.extend_from_slice(&self.nominal[i * d..(i + 1) * d]);
        }
        Self { dims: d, half_bandwidth: self.half_bandwidth, coords, nominal, seed: self.seed }
    }
}

fn check_bandwidth(m: usize) -> Result<usize> {
    if m < 1 {
        return invalid("half-bandwidth M must be at least 1");
    }
    Ok(m)
}

fn jitter(k: i64, xi: f64) -> f64 {
    k as f64 + (1.0 - 2.0 * xi) / 4.0
}

/// `2M + 1` frequencies `k + (1 - 2 xi_k) / 4`, `k = -M..=M`, centered at zero.
pub fn jittered_frequencies_1d(half_bandwidth: usize, seed: u64) -> Result<FrequencySet> {
    let m = check_bandwidth(half_bandwidth)?;
    let mut rng = rng_from_seed(seed);
    let xi: Vec<f64> = (0..2 * m + 1).map(|_| rng.random::<f64>()).collect();
    let mut set = FrequencySet::from_jitter_1d(m, &xi)?;
    set.seed = Some(seed);
    Ok(set)
}

/// `(2M + 1)^2` frequency pairs, every coordinate jittered independently.
pub fn jittered_frequencies_2d(half_bandwidth: usize, seed: u64) -> Result<FrequencySet> {
    let m = check_bandwidth(half_bandwidth)?;
    let side = 2 * m + 1;
    let mut rng = rng_from_seed(seed);
    let xi: Vec<f64> = (0..2 * side * side).map(|_| rng.random::<f64>()).collect();
    let mut set = FrequencySet::from_jitter_2d(m, &xi)?;
    set.seed = Some(seed);
    Ok(set)
}

/// Where a set of Fourier values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    ContinuousQuadrature,
    DiscreteForward,
    Measured,
}

/// Complex Fourier samples aligned entry-by-entry with a [`FrequencySet`].
#[derive(Debug, Clone, PartialEq)]
pub struct FourierData {
    pub values: Vec<Complex64>,
    pub provenance: Provenance,
    /// Noise level `(snr_db, seed)` applied to the values, if any.
    pub noise: Option<(f64, u64)>,
}

impl FourierData {
    pub fn new(values: Vec<Complex64>, provenance: Provenance) -> Self {
        Self { values, provenance, noise: None }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_aligned(&self, freqs: &FrequencySet) -> Result<()> {
        if self.values.len() != freqs.len() {
            return invalid(format!(
                "{} Fourier values for {} frequencies",
                self.values.len(),
                freqs.len()
            ));
        }
        Ok(())
    }

    /// Mean of `|f|^2` over the samples.
    pub fn mean_power(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }
}

/// Additive complex Gaussian noise at a target SNR. `snr_db = +inf`
/// disables noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn none() -> Self {
        Self { snr_db: f64::INFINITY, seed: 0 }
    }

    /// Noise variance giving `10 log10(P_signal / sigma^2) = snr_db`.
    pub fn variance(&self, signal_power: f64) -> f64 {
        signal_power / 10f64.powf(self.snr_db / 10.0)
    }
}

/// Returns `f + eta` with `eta_k ~ CN(0, sigma^2)`, i.e. real and imaginary
/// parts independent with variance `sigma^2 / 2` each.
pub fn add_noise(data: &FourierData, spec: NoiseSpec) -> Result<FourierData> {
    if data.is_empty() {
        return invalid("cannot add noise to empty data");
    }
    if spec.snr_db.is_nan() || spec.snr_db == f64::NEG_INFINITY {
        return invalid("snr_db must be finite or +inf");
    }
    if spec.snr_db == f64::INFINITY {
        return Ok(data.clone());
    }
    let sigma2 = spec.variance(data.mean_power());
    let normal = Normal::new(0.0, (sigma2 / 2.0).sqrt())
        .map_err(|e| crate::error::ReconError::NumericFailure(e.to_string()))?;
    let mut rng = rng_from_seed(spec.seed);
    let values = data
        .values
        .iter()
        .map(|v| v + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();
    Ok(FourierData { values, provenance: data.provenance, noise: Some((spec.snr_db, spec.seed)) })
}

/// Uniform random subset of `keep` entries without replacement, returned in
/// their original order.
pub fn subsample(
    freqs: &FrequencySet,
    data: &FourierData,
    keep: usize,
    seed: u64,
) -> Result<(FrequencySet, FourierData)> {
    data.check_aligned(freqs)?;
    let total = freqs.len();
    if keep == 0 || keep > total {
        return invalid(format!("keep must be in 1..={total}, got {keep}"));
    }
    let mut rng = rng_from_seed(seed);
    let mut idx = index::sample(&mut rng, total, keep).into_vec();
    idx.sort_unstable();
    let values = idx.iter().map(|&i| data.values[i]).collect();
    Ok((
        freqs.select(&idx),
        FourierData { values, provenance: data.provenance, noise: data.noise },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_jitter_gives_integers() {
        let f = FrequencySet::from_jitter_1d(2, &[0.5; 5]).unwrap();
        assert_eq!(f.axis(0), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn maximal_jitter_offsets_by_quarter() {
        let f = FrequencySet::from_jitter_1d(1, &[0.0; 3]).unwrap();
        assert_eq!(f.axis(0), vec![-0.75, 0.25, 1.25]);
    }

    #[test]
    fn two_d_grid_shapes() {
        let f = FrequencySet::from_jitter_2d(1, &[0.5; 18]).unwrap();
        assert_eq!(f.len(), 9);
        for k in 0..9 {
            for a in 0..2 {
                assert_eq!(f.coord(k, a), f.nominal(k, a) as f64);
            }
        }
        let g = FrequencySet::from_jitter_2d(1, &[0.0; 18]).unwrap();
        for k in 0..9 {
            for a in 0..2 {
                assert_eq!(g.coord(k, a) - g.nominal(k, a) as f64, 0.25);
            }
        }
    }

    #[test]
    fn jitter_bound_and_ordering() {
        for seed in 0..50 {
            let f = jittered_frequencies_1d(128, seed).unwrap();
            assert_eq!(f.len(), 257);
            let l = f.axis(0);
            for k in 0..l.len() {
                assert!((l[k] - f.nominal(k, 0) as f64).abs() <= 0.25);
                if k > 0 {
                    assert!(l[k] > l[k - 1]);
                }
            }
        }
        let f2 = jittered_frequencies_2d(128, 3).unwrap();
        assert_eq!(f2.len(), 257 * 257);
        for k in 0..f2.len() {
            for a in 0..2 {
                assert!((f2.coord(k, a) - f2.nominal(k, a) as f64).abs() <= 0.25);
            }
        }
    }

    #[test]
    fn seeds_reproduce() {
        assert_eq!(jittered_frequencies_1d(16, 9).unwrap(), jittered_frequencies_1d(16, 9).unwrap());
        assert_ne!(jittered_frequencies_1d(16, 9).unwrap(), jittered_frequencies_1d(16, 10).unwrap());
        assert!(jittered_frequencies_1d(0, 1).is_err());
        assert!(jittered_frequencies_2d(0, 1).is_err());
    }

    #[test]
    fn infinite_snr_is_identity() {
        let d = FourierData::new(vec![Complex64::new(1.0, -2.0); 4], Provenance::Measured);
        let out = add_noise(&d, NoiseSpec::none()).unwrap();
        assert_eq!(out.values, d.values);
    }

    #[test]
    fn noise_power_matches_snr_zero() {
        let n = 100_000;
        let d = FourierData::new(vec![Complex64::new(1.0, 0.0); n], Provenance::Measured);
        let out = add_noise(&d, NoiseSpec { snr_db: 0.0, seed: 7 }).unwrap();
        let eta: Vec<Complex64> = out.values.iter().zip(&d.values).map(|(a, b)| a - b).collect();
        let power = eta.iter().map(|e| e.norm_sqr()).sum::<f64>() / n as f64;
        assert!((power - 1.0).abs() < 0.05, "power {power}");
        let mean = eta.iter().sum::<Complex64>() / n as f64;
        // sigma = 1, so 3 sigma / sqrt(n)
        assert!(mean.norm() < 3.0 / (n as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn noise_rejects_empty() {
        let d = FourierData::new(vec![], Provenance::Measured);
        assert!(add_noise(&d, NoiseSpec { snr_db: 10.0, seed: 1 }).is_err());
    }

    #[test]
    fn subsample_edges() {
        let f = jittered_frequencies_1d(8, 1).unwrap();
        let d = FourierData::new(
            (0..f.len()).map(|k| Complex64::new(f.coord(k, 0), 0.0)).collect(),
            Provenance::Measured,
        );
        let (fa, da) = subsample(&f, &d, f.len(), 3).unwrap();
        assert_eq!(fa, f);
        assert_eq!(da.values, d.values);
        let (f1, d1) = subsample(&f, &d, 1, 3).unwrap();
        assert_eq!(f1.len(), 1);
        assert_eq!(d1.values[0].re, f1.coord(0, 0));
        assert!(subsample(&f, &d, 0, 3).is_err());
        assert!(subsample(&f, &d, f.len() + 1, 3).is_err());
    }

    #[test]
    fn subsample_quarter_grid_sizes() {
        let f = jittered_frequencies_2d(128, 1).unwrap();
        let d = FourierData::new(vec![Complex64::new(0.0, 0.0); f.len()], Provenance::Measured);
        let (fs, ds) = subsample(&f, &d, 129 * 129, 5).unwrap();
        assert_eq!(fs.len(), 129 * 129);
        assert_eq!(ds.len(), 129 * 129);
    }
}
