//! Seeded test signals: complex tones plus circular complex white Gaussian noise.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::SignalError;
use crate::ComplexSample;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToneSpec {
    pub amplitude: f64,
    pub freq_hz: f64,
    pub sample_rate_hz: f64,
    /// Initial phase in radians.
    pub phase0: f64,
    pub n_samples: usize,
}

impl ToneSpec {
    /// Radians per sample, with the frequency wrapped into `[0, fs)`.
    pub fn omega(&self) -> f64 {
        TAU * self.freq_hz.rem_euclid(self.sample_rate_hz) / self.sample_rate_hz
    }
}

/// Noise level relative to the tone. `snr_db = +inf` disables noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr_db: f64, seed: u64) -> Self {
        Self { snr_db, seed }
    }

    pub fn none() -> Self {
        Self {
            snr_db: f64::INFINITY,
            seed: 0,
        }
    }

    pub fn is_silent(&self) -> bool {
        self.snr_db == f64::INFINITY
    }

    /// Total complex noise power `σ² = A²·10^(-snr/10)`.
    pub fn variance(&self, tone_amplitude: f64) -> f64 {
        tone_amplitude * tone_amplitude * 10f64.powf(-self.snr_db / 10.0)
    }
}

/// `A·e^{j(ωn + φ0)}` for `n = 0..n_samples`.
pub fn gen_tone(spec: &ToneSpec) -> Result<Vec<ComplexSample>, SignalError> {
    if !(spec.sample_rate_hz > 0.0 && spec.sample_rate_hz.is_finite()) {
        return Err(SignalError::InvalidSampleRate(spec.sample_rate_hz));
    }
    if spec.n_samples == 0 {
        return Err(SignalError::NoSamples);
    }
    if !(spec.amplitude > 0.0 && spec.amplitude.is_finite()) {
        return Err(SignalError::InvalidAmplitude(spec.amplitude));
    }
    let omega = spec.omega();
    Ok((0..spec.n_samples)
        .map(|n| Complex64::from_polar(spec.amplitude, omega * n as f64 + spec.phase0))
        .collect())
}

/// Adds noise in place. Each quadrature gets variance `σ²/2`.
pub fn add_awgn_in_place(samples: &mut [ComplexSample], tone_amplitude: f64, noise: &NoiseSpec) {
    if noise.is_silent() {
        return;
    }
    let sigma = (noise.variance(tone_amplitude) / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    for x in samples.iter_mut() {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        *x += Complex64::new(re * sigma, im * sigma);
    }
}

pub fn add_awgn(samples: &[ComplexSample], tone_amplitude: f64, noise: &NoiseSpec) -> Vec<ComplexSample> {
    let mut out = samples.to_vec();
    add_awgn_in_place(&mut out, tone_amplitude, noise);
    out
}
