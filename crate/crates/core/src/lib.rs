//! Streaming frequency estimation with the guaranteed-stable sliding DFT.
//!
//! * [`sdft`] maintains the damped sliding DFT, both recursively and by direct summation.
//! * [`estimators`] finds the peak bin and interpolates the fractional offset
//!   with the damping-corrected three-bin estimator or the Jacobsen and Candan baselines.
//! * [`signal`] synthesises seeded test tones in complex white Gaussian noise.
//! * [`bench`] runs Monte-Carlo bias/RMSE experiments and writes CSV.
//! * [`cli`] is the `slidefreq` command line.
//!
//! ```
//! use slidefreq::{estimate, Complex64, EstimatorId, EstimatorParams, SdftConfig, SdftState};
//!
//! let config = SdftConfig::new(128, 0.9).unwrap();
//! let mut sdft = SdftState::new(config);
//! for n in 0..128 {
//!     let phase = std::f64::consts::TAU * 30.3 * n as f64 / 128.0;
//!     sdft.push_sample(Complex64::from_polar(1.0, phase));
//! }
//! let params = EstimatorParams::new(128, 0.9);
//! let res = estimate(&sdft.snapshot(), &params, EstimatorId::Proposed, Some(128e6)).unwrap();
//! assert!((res.freq_hz.unwrap() - 30.3e6).abs() < 1000.0);
//! ```

pub mod bench;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod sdft;
pub mod signal;

pub use num_complex::Complex64;

/// One complex baseband (I/Q) sample.
pub type ComplexSample = Complex64;

pub use bench::{run_experiment, run_trial, ExperimentSpec, TrialStats};
pub use error::{ConfigError, EstimateError, SdftError, SignalError};
pub use estimators::{
    coarse_peak, estimate, estimate_delta_candan, estimate_delta_jacobsen, estimate_delta_proposed, kernel_f,
    EstimateResult, EstimatorId, EstimatorParams, FineEstimate,
};
pub use sdft::{direct_damped_dft, ResyncPolicy, SdftConfig, SdftState, SpectrumSnapshot};
pub use signal::{add_awgn, gen_tone, NoiseSpec, ToneSpec};
