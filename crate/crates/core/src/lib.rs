//! Schmidt modes and angular photon statistics of bright squeezed vacuum
//! generated by high-gain parametric down-conversion.
//!
//! Units: lengths in µm (configuration uses mm, nm and mrad where noted),
//! transverse wavevectors in rad/µm, emission angles θ = q/k_s in mrad.

pub mod analysis;
pub mod config;
pub mod error;
pub mod eval;
pub mod fock;
pub mod gain;
pub mod grid;
pub mod kernel;
pub mod observables;
pub mod pipeline;
pub mod schmidt;
pub mod takagi;

pub use config::{Config, GridSpec, ObservableSpec, PumpBeam, ScanSpec, Segment, SegmentKind, Setup, SolverSpec};
pub use error::{Error, Result};
pub use fock::{evolve_tms, oracle_moments, oracle_moments_checked, OracleMoments, Squeezer, TruncatedState};
pub use gain::{bogolyubov, gain_scan, renormalized_eigenvalues, schmidt_number, GainState, ScanRow};
pub use grid::{default_grid, RadialGrid};
pub use kernel::{pump_envelope, sample_kernel, tpa_multi_segment, tpa_single_crystal, TpaKernel};
pub use observables::{
    AngularSpectrum, Correlators, GaussianMoments, MomentTables, Normalization, PixelGrid, PixelModes,
};
pub use pipeline::{peak_shape, CutAnalysis, Map2d, PeakShape, ScanPoint, Simulation};
pub use schmidt::{decompose, radial_schmidt, ModeProfile, SchmidtMode, SchmidtModes};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
