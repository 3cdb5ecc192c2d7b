//! Simulation and analysis of frequency-mode-entangled photon pairs from
//! parametric down-conversion: joint spectral amplitudes, Hong-Ou-Mandel
//! coincidence traces by independent analytic and numeric routes, the
//! p > 1/2 entanglement witness, Hermite broadband-mode decompositions and
//! least-squares fits of the analytic model to measured traces.

pub mod cli;
pub mod config;
pub mod error;
pub mod fit;
pub mod grid;
pub mod hom;
pub mod io;
pub mod modes;
pub mod spectra;
pub mod units;

pub use error::{FitError, GridError, HomError, ModesError, SpectraError, UnitError};
pub use fit::{
    discriminate_sinc, fit_trace, trace_from_counts, FitParam, FitResult, FitSpec, ParamValues,
    SincDiscrimination,
};
pub use grid::SpectralGrid;
pub use hom::{
    hom_analytic, hom_numeric, hom_separable, sweep_analytic, sweep_numeric, witness, HomTrace,
    NumericHom, TraceMeta, Verdict, WitnessReport,
};
pub use modes::{
    hermite_function, optimize_basis, project, schmidt_decompose, singlet_overlap, HermiteBasis,
    ModeDecomposition,
};
pub use spectra::{
    build_jsa, phasematching, pump_envelope, GridSpec, PhasematchModel, PhasematchShape,
    ProcessModel, PumpModel, SuperpositionModel,
};
pub use units::{AngularFrequency, Delay, Quantity};
