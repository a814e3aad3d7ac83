//! Integrators for stochastic differential equations driven by band-limited
//! colored noise, with the generalized Ito correction that makes Ito-type
//! schemes converge to the Stratonovich solution at any noise color.
//!
//! The test problem is a periodic advection-diffusion equation with a
//! multiplicatively perturbed velocity, solved spectrally; exact per-path
//! solutions serve as the error baseline for convergence studies.

pub mod correction;
pub mod error;
pub mod harness;
pub mod integrators;
pub mod noise;
pub mod oracle;
pub mod seed;
pub mod spectral;
pub mod step;

pub use correction::{
    decentered_correction, scalar_correction, spectral_factor, vector_correction, CorrectionFactor,
    LinearNoiseCoupling,
};
pub use error::{Error, Result};
pub use harness::{Aggregate, ConvergenceRecord, ExperimentConfig};
pub use integrators::{Scheme, SchemeKind, SchemeSpec, TrajectoryResult};
pub use noise::{NoiseRealization, NoiseSpec};
pub use spectral::{ModelConfig, OperatorSet, SpectralState};
pub use step::StepSize;
