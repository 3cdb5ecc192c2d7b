//! Error types for each subsystem.

use thiserror::Error;

/// Unit-tag resolution failures.
#[derive(Debug, Error)]
pub enum UnitError {
    #[error("unknown frequency unit `{0}` (expected rad_per_ps, THz or nm)")]
    UnknownFrequencyUnit(String),
    #[error("unknown width unit `{0}` (expected rad_per_ps or THz)")]
    UnknownWidthUnit(String),
    #[error("wavelength must be positive, got {0}")]
    NonPositiveWavelength(f64),
}

/// Joint-spectral-amplitude construction failures.
#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(
        "grid too coarse: spacing {spacing:.6} rad/ps gives fewer than 8 samples \
         per beating period 2π/Δω = {period:.6} rad/ps"
    )]
    GridTooCoarse { spacing: f64, period: f64 },
    #[error(
        "grid too narrow: boundary amplitude is {ratio:.3e} of peak (limit {limit:.1e}); \
         widen the span or raise the sample count"
    )]
    GridTooNarrow { ratio: f64, limit: f64 },
    #[error("grid construction produced a non-normalizable amplitude (norm {0})")]
    DegenerateNorm(f64),
    #[error("requested grid needs {required} samples per axis, above the limit {limit}")]
    GridTooLarge { required: usize, limit: usize },
}

/// Grid validation failures (shared by construction and import paths).
#[derive(Debug, Error)]
pub enum GridError {
    #[error("axis spacing is not uniform: relative deviation {0:.3e} exceeds 1e-9")]
    NonUniformAxis(f64),
    #[error("amplitude dimensions {rows}x{cols} do not match axes {ns}x{ni}")]
    DimensionMismatch { rows: usize, cols: usize, ns: usize, ni: usize },
    #[error("amplitude contains non-finite entries")]
    NonFiniteAmplitude,
    #[error("axis must hold at least two samples")]
    AxisTooShort,
    #[error("grid norm is not positive")]
    ZeroNorm,
}

/// Broadband-mode algebra failures.
#[derive(Debug, Error)]
pub enum ModesError {
    #[error("Hermite order {order} out of range (basis holds orders 0..={max_order})")]
    OrderOutOfRange { order: usize, max_order: usize },
    #[error(
        "basis escapes grid: order-{order} Hermite mode has {mass_outside:.3e} of its \
         mass outside the grid (limit 1e-4)"
    )]
    BasisEscapesGrid { order: usize, mass_outside: f64 },
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("grids passed to the mode decomposition must be square with equal axes")]
    NonSquareGrid,
}

/// Hong-Ou-Mandel engine failures.
#[derive(Debug, Error)]
pub enum HomError {
    #[error(
        "delay {tau:.4} ps too large for grid: |τ|·Δω_step = {phase:.4} ≥ π, \
         the delay phase is unresolved"
    )]
    DelayTooLargeForGrid { tau: f64, phase: f64 },
    #[error("spectral amplitude has zero norm")]
    ZeroNorm,
    #[error(
        "degenerate group delay: |τ⁻| = {tau_minus:.3e} ps < 1e-6 ps makes the \
         analytic envelope singular"
    )]
    DegenerateGroupDelay { tau_minus: f64 },
    #[error("analytic engine requires the Gaussian phasematching approximation")]
    AnalyticRequiresGaussianShape,
    #[error("trace holds no samples")]
    EmptyTrace,
    #[error("witness guard band must be ≥ 0, got {0}")]
    InvalidGuardBand(f64),
    #[error("probability {value} at sample {index} outside [0, 1]")]
    ProbabilityOutOfRange { index: usize, value: f64 },
    #[error("delays must be strictly increasing (violated at index {0})")]
    DelaysNotIncreasing(usize),
    #[error("sweep failed at delay index {index} (τ = {tau:.4} ps): {source}")]
    SweepElement {
        index: usize,
        tau: f64,
        #[source]
        source: Box<HomError>,
    },
    #[error("numeric engine requires a square grid with equal axes")]
    NonSquareGrid,
    #[error("amplitudes must share one axis and length ({0} vs {1})")]
    AxisMismatch(usize, usize),
}

/// Trace-fitting failures.
#[derive(Debug, Error)]
pub enum FitError {
    #[error("too few samples: {samples} data points for {free} free parameters")]
    TooFewSamples { samples: usize, free: usize },
    #[error("non-finite data at sample {0}")]
    NonFiniteData(usize),
    #[error("invalid fit specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Hom(#[from] HomError),
}

/// One source of exit-code classes for the command-line front end.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error in {module}: {message}")]
    Numerical { module: &'static str, message: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 config, 3 numerical, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            CliError::Io { .. } => 4,
        }
    }
}
