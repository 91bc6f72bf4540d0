//! Experiment configuration files.

use std::path::Path;

use nufrecon::sampling::NoiseSpec;
use nufrecon::{Phantom, ReconstructionConfig, Scenario, TransformMode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Single unweighted HOTV solve.
    Hotv,
    /// Iteratively reweighted l1.
    Ir,
    /// Edge-adaptive l2.
    Ea,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Hotv => "hotv",
            Method::Ir => "ir",
            Method::Ea => "ea",
        }
    }
}

/// One experiment: a synthetic problem, the methods to run on it, and their
/// parameters. Serialized as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub phantom: Phantom,
    /// Grid points per axis, `2J + 1`.
    pub grid_points: usize,
    /// Fourier modes per axis, `2M + 1`.
    pub modes: usize,
    pub jitter_seed: u64,
    /// Noise level in dB; absent for noiseless data.
    #[serde(default)]
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub noise_seed: u64,
    /// Number of frequencies kept after random subsampling.
    #[serde(default)]
    pub keep: Option<usize>,
    #[serde(default)]
    pub subsample_seed: u64,
    pub methods: Vec<Method>,
    #[serde(default = "default_transform")]
    pub transform: TransformMode,
    /// Half-width of the jump window for the jump-neighborhood error.
    #[serde(default = "default_window")]
    pub jump_window: usize,
    #[serde(default)]
    pub recon: ReconstructionConfig,
    /// Output directory; overridden by `suite --out`.
    #[serde(default)]
    pub output: Option<String>,
}

fn default_transform() -> TransformMode {
    TransformMode::Accelerated
}

fn default_window() -> usize {
    nufrecon::metrics::JUMP_WINDOW
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("experiment configs always serialize")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CliError::Config(format!("{}: {m}", self.id)));
        if self.id.is_empty() || self.id.contains(['/', '\\']) {
            return bad(format!("id {:?} must be a non-empty file name", self.id));
        }
        if self.grid_points < 3 || self.grid_points % 2 == 0 {
            return bad(format!("grid_points must be odd and >= 3, got {}", self.grid_points));
        }
        if self.modes == 0 || self.modes % 2 == 0 {
            return bad(format!("modes must be odd, got {}", self.modes));
        }
        if self.methods.is_empty() {
            return bad("at least one method is required".into());
        }
        if let Some(snr) = self.snr_db {
            if snr.is_nan() {
                return bad("snr_db must be a number".into());
            }
        }
        let total = self.modes.pow(self.phantom.dims() as u32);
        if let Some(k) = self.keep {
            if k == 0 || k > total {
                return bad(format!("keep must be in 1..={total}, got {k}"));
            }
        }
        self.recon.validate().map_err(|e| CliError::Config(format!("{}: {e}", self.id)))
    }

    /// Replaces every seed with one derived from `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.jitter_seed = seed;
        self.noise_seed = seed.wrapping_add(1);
        self.subsample_seed = seed.wrapping_add(2);
        self
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            phantom: self.phantom,
            grid_points: self.grid_points,
            modes: self.modes,
            jitter_seed: self.jitter_seed,
            noise: self.snr_db.map(|snr_db| NoiseSpec { snr_db, seed: self.noise_seed }),
            keep: self.keep.map(|k| (k, self.subsample_seed)),
            transform: self.transform,
        }
    }

    /// Short `key=value` summary of the parameters a method depends on.
    pub fn parameter_string(&self, method: Method) -> String {
        let r = &self.recon;
        let mut s = format!("m={}", r.m);
        match method {
            Method::Hotv => s.push_str(&format!(";rho={}", r.rho)),
            Method::Ir => s.push_str(&format!(";rho={};epsilon={};l_max={}", r.rho, r.epsilon, r.l_max)),
            Method::Ea => s.push_str(&format!(";lambda={};mu={};tau={}", r.lambda, r.mu, r.tau)),
        }
        if let Some(snr) = self.snr_db {
            s.push_str(&format!(";snr_db={snr}"));
        }
        if let Some(k) = self.keep {
            s.push_str(&format!(";keep={k}"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
id = "demo"
phantom = "f1"
grid_points = 33
modes = 33
jitter_seed = 4
methods = ["ir", "ea"]

[recon]
epsilon = 1.9
"#;

    #[test]
    fn minimal_file_fills_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.recon.epsilon, 1.9);
        assert_eq!(cfg.recon.m, 1);
        assert_eq!(cfg.transform, TransformMode::Accelerated);
        assert_eq!(cfg.jump_window, 5);
        assert_eq!(cfg.snr_db, None);
    }

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for (from, to) in [("grid_points = 33", "grid_points = 32"), ("epsilon = 1.9", "epsilon = -1.0"), ("methods = [\"ir\", \"ea\"]", "methods = []")] {
            let text = MINIMAL.replace(from, to);
            assert!(matches!(ExperimentConfig::from_toml(&text), Err(CliError::Config(_))), "{to}");
        }
        assert!(ExperimentConfig::from_toml("id = 3").is_err());
        assert!(ExperimentConfig::from_toml(&format!("bogus = 1\n{MINIMAL}")).is_err());
    }
}
