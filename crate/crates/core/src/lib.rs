//! Interference of an array of independent condensates released from an
//! optical lattice.
//!
//! The crate synthesizes time-of-flight densities, computes the harmonic
//! content of the contrast function `F(z)` for random or coherent phases,
//! fits fringe profiles the way absorption images are analysed, and runs
//! seeded Monte-Carlo ensembles over the phases.
//!
//! Numerical kernels are generic over [`Real`] (`f32` or `f64`). The
//! aliases below fix the scalar for the common cases.

pub mod density;
pub mod error;
pub mod fitting;
pub mod io;
pub mod lattice3d;
pub mod model;
pub mod monte_carlo;
pub mod rng;
pub mod scalar;
pub mod scales;
pub mod stats;

pub use density::{
    coherent_f, evaluate_f, f_extrema, harmonics_from_phases, synthesize_density, Extrema, GridSpec,
};
pub use error::{Error, Result};
pub use fitting::{
    convolve_psf, extract_harmonic, fit_fringes, radial_average, FitOptions, Image2D, WidthConvention,
};
pub use lattice3d::{f_extrema_3d, harmonics_3d, integrate_line_of_sight, Axis, Field2D};
pub use model::{
    validate, DensityProfile, EnsembleStats, FringeFit, GaussianEnvelope, Harmonic, HarmonicSpectrum,
    Lattice3DShot, LatticeShot, PhysicalParams, ValidationReport,
};
pub use monte_carlo::{
    average_profiles, mott_cn_analytic, mott_cn_sampled, run_ensemble, sample_phases, scaling_study,
    AmplitudeProfile, EnsembleConfig,
};
pub use scalar::Real;
pub use scales::ScalesReport;

pub type PhysicalParamsF64 = PhysicalParams<f64>;
pub type PhysicalParamsF32 = PhysicalParams<f32>;
pub type LatticeShotF64 = LatticeShot<f64>;
pub type LatticeShotF32 = LatticeShot<f32>;
pub type DensityProfileF64 = DensityProfile<f64>;
pub type DensityProfileF32 = DensityProfile<f32>;
pub type HarmonicSpectrumF64 = HarmonicSpectrum<f64>;
pub type HarmonicSpectrumF32 = HarmonicSpectrum<f32>;
pub type FringeFitF64 = FringeFit<f64>;
pub type FringeFitF32 = FringeFit<f32>;
pub type Lattice3DShotF64 = Lattice3DShot<f64>;
pub type Lattice3DShotF32 = Lattice3DShot<f32>;
pub type GridSpecF64 = GridSpec<f64>;
pub type GridSpecF32 = GridSpec<f32>;
pub type Image2DF64 = Image2D<f64>;
pub type Image2DF32 = Image2D<f32>;
