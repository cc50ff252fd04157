use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: expected 1, 2 or 3")]
    InvalidDimension(usize),
    #[error("points per axis must be even and at least 4, got {0}")]
    OddPoints(usize),
    #[error("box length must be positive and finite, got {0}")]
    NonPositiveLength(f64),
    #[error("shape mismatch: expected {expected} samples, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("exponent p = {0} is outside [1, ∞]")]
    InvalidExponent(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dilation by {factor} leaves the box: boundary ratio {ratio:e}")]
    DilationOutsideBox { factor: f64, ratio: f64 },
    #[error("symbol is not finite at lattice radius {radius}")]
    NonFiniteSymbol { radius: f64 },
    #[error("symbol kernel does not decay inside the box: boundary ratio {ratio:e}")]
    NonIntegrableSymbol { ratio: f64 },
    #[error("shell {level} is not resolved: needs Nyquist ≥ {needed}, grid has {nyquist}")]
    UnresolvedShell { level: usize, needed: f64, nyquist: f64 },
    #[error("shell index {index} out of range 0..={levels}")]
    ShellOutOfRange { index: usize, levels: usize },
    #[error("spectral leakage above 2^J: relative magnitude {ratio:e} exceeds {tolerance:e}")]
    SpectralLeakage { ratio: f64, tolerance: f64 },
    #[error("singular parameterization: λ′ vanishes at r = {radius}")]
    SingularParameterization { radius: f64 },
    #[error("empty sample set")]
    EmptySamples,
    #[error("zero probe: {0}")]
    ZeroProbe(String),
    #[error("probe `{label}` does not vanish at the box boundary (ratio {ratio:e})")]
    ProbeNotLocalized { label: String, ratio: f64 },
    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("non-positive value {value} at abscissa {at} cannot enter a log-log fit")]
    NonPositiveValue { at: f64, value: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("Picard iteration did not converge in {iterations} iterations (last increment {increment:e})")]
    PicardDivergence { iterations: usize, increment: f64 },
    #[error("non-finite state at step {step}")]
    NumericalAbort { step: usize },
    #[error("nonlinearity overflowed")]
    Overflow,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),
    #[error("malformed snapshot: {0}")]
    Snapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
