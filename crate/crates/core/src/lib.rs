//! Spectral toolkit for compressible capillary fluids on periodic domains:
//! dyadic decompositions and hybrid Besov diagnostics, the linearized
//! stability theory of the coupled density/velocity/temperature system, an
//! exact-semigroup (ETD) time integrator for the nonlinear perturbation
//! system, and a frozen-coefficient Picard iteration.

pub mod besov;
pub mod dyadic;
pub mod error;
pub mod expm;
pub mod field;
pub mod grid;
pub mod helmholtz;
pub mod io;
pub mod linear;
pub mod physics;
pub mod picard;
pub mod quadrature;
pub mod random;
pub mod solver;
pub mod stats;

pub use besov::{chemin_lerner_norm, besov_norm, hybrid_norm, HybridIndex, TimeExponent, TimeSeries};
pub use dyadic::DyadicDecomposition;
pub use error::{Error, Result};
pub use field::SpectralField;
pub use grid::GridSpec;
pub use linear::{LinearCoeffs, StabilityReport};
pub use physics::{CoeffFamily, EquilibriumModel, FlowState};
pub use stats::StatsRecord;
