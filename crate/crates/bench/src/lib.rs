//! Problem setups shared by the benchmarks.

use nufrecon::{Phantom, Scenario, ScenarioData, TransformMode};

/// Noiseless fully sampled problem with `points` grid points per axis.
pub fn problem(phantom: Phantom, points: usize, transform: TransformMode) -> ScenarioData {
    Scenario { transform, ..Scenario::new(phantom, points, 1) }.build().expect("benchmark problems are valid")
}

