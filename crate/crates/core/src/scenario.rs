//! Synthetic test problems: a phantom sampled at jittered frequencies, with
//! optional noise and random subsampling.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fourier_model::{ForwardOperator, TransformMode};
use crate::grid::{ImageVector, SpatialGrid};
use crate::phantoms::Phantom;
use crate::sampling::{add_noise, jittered_frequencies_1d, jittered_frequencies_2d, subsample, FourierData, FrequencySet, NoiseSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub phantom: Phantom,
    /// Grid points per axis, `2J + 1`.
    pub grid_points: usize,
    /// Fourier modes per axis, `2M + 1`.
    pub modes: usize,
    pub jitter_seed: u64,
    pub noise: Option<NoiseSpec>,
    /// Number of frequencies kept and the seed of the random selection.
    pub keep: Option<(usize, u64)>,
    pub transform: TransformMode,
}

/// Everything a reconstruction needs, plus the reference image.
#[derive(Debug, Clone)]
pub struct ScenarioData {
    pub truth: ImageVector,
    pub freqs: FrequencySet,
    pub data: FourierData,
    pub operator: ForwardOperator,
}

impl Scenario {
    /// Noiseless, fully sampled problem with as many modes as grid points.
    pub fn new(phantom: Phantom, grid_points: usize, jitter_seed: u64) -> Self {
        let transform = if phantom.dims() == 1 { TransformMode::Direct } else { TransformMode::Accelerated };
        Self { phantom, grid_points, modes: grid_points, jitter_seed, noise: None, keep: None, transform }
    }

    pub fn build(&self) -> Result<ScenarioData> {
        if self.modes % 2 == 0 || self.modes == 0 {
            return invalid(format!("mode count must be odd, got {}", self.modes));
        }
        let grid = SpatialGrid::with_points(self.phantom.dims(), self.grid_points)?;
        let half_modes = (self.modes - 1) / 2;
        let freqs = match self.phantom.dims() {
            1 => jittered_frequencies_1d(half_modes, self.jitter_seed)?,
            _ => jittered_frequencies_2d(half_modes, self.jitter_seed)?,
        };
        let mut data = self.phantom.continuous_fourier_samples(&freqs)?;
        if let Some(noise) = self.noise {
            data = add_noise(&data, noise)?;
        }
        let (freqs, data) = match self.keep {
            Some((keep, seed)) => subsample(&freqs, &data, keep, seed)?,
            None => (freqs, data),
        };
        let operator = ForwardOperator::new(grid, &freqs, self.transform)?;
        let truth = self.phantom.rasterize(grid)?;
        Ok(ScenarioData { truth, freqs, data, operator })
    }
}
