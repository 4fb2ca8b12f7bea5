use thiserror::Error;

/// Errors raised while configuring or evaluating the sliding DFT.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SdftError {
    #[error("window length must be at least 4, got {0}")]
    TooFewBins(usize),
    #[error("damping factor must lie in (0, 1], got {0}")]
    InvalidDamping(f64),
    #[error("resync interval must be at least 1")]
    ZeroResyncInterval,
    #[error("window has {actual} samples but the transform needs {expected}")]
    LengthMismatch { expected: usize, actual: usize },
}

/// Errors raised by peak search and the fine estimators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimateError {
    #[error("spectrum is not valid yet: {samples_seen} of {n_bins} warm-up samples processed")]
    NotWarmedUp { samples_seen: u64, n_bins: usize },
    #[error("spectrum has no curvature at peak bin {peak}")]
    DegenerateDenominator { peak: usize },
    #[error("peak index {peak} is outside a {n_bins}-bin spectrum")]
    PeakOutOfRange { peak: usize, n_bins: usize },
    #[error(
        "estimator parameters (N={params_bins}, r={params_damping}) do not match \
         spectrum (N={spectrum_bins}, r={spectrum_damping})"
    )]
    ParamsMismatch {
        params_bins: usize,
        params_damping: f64,
        spectrum_bins: usize,
        spectrum_damping: f64,
    },
}

/// Errors raised by the test-signal generator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("sample rate must be positive and finite, got {0}")]
    InvalidSampleRate(f64),
    #[error("sample count must be positive")]
    NoSamples,
    #[error("amplitude must be positive and finite, got {0}")]
    InvalidAmplitude(f64),
}

/// Errors raised while loading an experiment configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration keys: {}", .0.join(", "))]
    UnknownKeys(Vec<String>),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("line {line} is not a key=value pair: `{text}`")]
    Syntax { line: usize, text: String },
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
