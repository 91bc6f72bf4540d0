//! Reconstruction of piecewise-smooth images from non-uniform Fourier samples.
//!
//! The crate provides the sampling model, forward operator (direct and
//! NUFFT-accelerated), polynomial annihilation sparsifiers, edge detection
//! from Fourier data, and two reconstruction families: iteratively
//! reweighted l1 and edge-adaptive l2.

pub mod edge_detection;
pub mod error;
pub mod fourier_model;
pub mod grid;
pub mod io;
pub mod masking;
pub mod metrics;
pub mod nufft;
pub mod pa_transform;
pub mod phantoms;
pub mod quadrature;
pub mod reconstruction;
pub mod sampling;
pub mod scenario;
pub mod solvers;

pub use error::{ReconError, Result};
pub use fourier_model::{AxisWeights, ForwardOperator, ToeplitzNormal, TransformMode};
pub use grid::{ImageVector, SpatialGrid};
pub use pa_transform::{Axis, PATransform, Sparsifier};
pub use phantoms::Phantom;
pub use sampling::{FourierData, FrequencySet, NoiseSpec, Provenance};
pub use solvers::{BregmanParams, CgParams, Fidelity, MaskedL2Problem, SolveReport, WeightedL1Problem};
pub use edge_detection::{BinaryEdgeMap, CfGenerator, ConcentrationFactors, EdgeMap};
pub use masking::RegularizationMask;
pub use reconstruction::{ReconstructionConfig, ReconstructionResult};
pub use metrics::{ErrorReport, ErrorRow};
pub use scenario::{Scenario, ScenarioData};
