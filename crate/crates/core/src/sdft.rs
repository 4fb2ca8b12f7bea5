//! Guaranteed-stable (damped) sliding DFT.
//!
//! Each bin `k` of an `N`-point window is tracked by the one-pole recursion
//!
//! ```text
//! R_k[n] = r·e^{j2πk/N}·R_k[n-1] + x[n] - r^N·x[n-N]
//! ```
//!
//! The pole sits at radius `r < 1`, so coefficient rounding can never push it
//! outside the unit circle. The comb term `x[n] - r^N·x[n-N]` is shared by
//! every bin and computed once per sample.
//!
//! The raw accumulators `R_k` are referenced to the newest sample. Snapshots
//! rotate them by `e^{j2πk/N}` so that the exposed bins are referenced to the
//! start of the window:
//!
//! ```text
//! X[k] = Σ_{n=0}^{N-1} w[n]·r^{N-1-n}·e^{-j2πkn/N}
//! ```
//!
//! where `w[0]` is the oldest sample. With `r = 1` this is exactly the
//! textbook DFT of the window.

use std::f64::consts::TAU;
use std::num::NonZeroUsize;

use num_complex::Complex64;

use crate::error::SdftError;
use crate::ComplexSample;

/// Smallest window for which three-bin interpolation plus a guard bin makes sense.
pub const MIN_BINS: usize = 4;

/// How often the recursive accumulators are rebuilt from the delay line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResyncPolicy {
    /// Recompute all bins directly every `n` samples.
    Every(NonZeroUsize),
    /// Pure recursion; floating-point drift is left uncorrected.
    Never,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdftConfig {
    n_bins: usize,
    damping: f64,
    resync: ResyncPolicy,
}

impl SdftConfig {
    /// Validated configuration with the default resync interval of `4·N` samples.
    pub fn new(n_bins: usize, damping: f64) -> Result<Self, SdftError> {
        if n_bins < MIN_BINS {
            return Err(SdftError::TooFewBins(n_bins));
        }
        if !(damping > 0.0 && damping <= 1.0) {
            return Err(SdftError::InvalidDamping(damping));
        }
        let every = NonZeroUsize::new(4 * n_bins).expect("n_bins >= 4");
        Ok(Self {
            n_bins,
            damping,
            resync: ResyncPolicy::Every(every),
        })
    }

    /// Replace the resync policy. `Some(0)` is rejected; `None` means never.
    pub fn with_resync_interval(mut self, interval: Option<usize>) -> Result<Self, SdftError> {
        self.resync = match interval {
            None => ResyncPolicy::Never,
            Some(n) => ResyncPolicy::Every(NonZeroUsize::new(n).ok_or(SdftError::ZeroResyncInterval)?),
        };
        Ok(self)
    }

    pub fn with_resync(mut self, resync: ResyncPolicy) -> Self {
        self.resync = resync;
        self
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn resync(&self) -> ResyncPolicy {
        self.resync
    }
}

/// Immutable copy of a full spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSnapshot {
    bins: Vec<Complex64>,
    damping: f64,
    samples_seen: u64,
}

impl SpectrumSnapshot {
    /// Wrap externally computed bins. The snapshot is valid once
    /// `samples_seen >= bins.len()`.
    pub fn from_bins(bins: Vec<Complex64>, damping: f64, samples_seen: u64) -> Self {
        Self {
            bins,
            damping,
            samples_seen,
        }
    }

    pub fn bins(&self) -> &[Complex64] {
        &self.bins
    }

    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn samples_seen(&self) -> u64 {
        self.samples_seen
    }

    /// False during warm-up, before a full window has been observed.
    pub fn is_valid(&self) -> bool {
        self.samples_seen >= self.bins.len() as u64
    }
}

/// `e^{-j2πm/N}` for `m = 0..N`, evaluated per index to avoid accumulated
/// rotation error.
fn analysis_table(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|m| Complex64::from_polar(1.0, -TAU * m as f64 / n as f64))
        .collect()
}

fn direct_bins(window: &[ComplexSample], damping: f64, table: &[Complex64]) -> Vec<Complex64> {
    let n = window.len();
    // Newest sample carries weight 1, the oldest r^(N-1).
    let weighted: Vec<Complex64> = window
        .iter()
        .enumerate()
        .map(|(i, &x)| x * damping.powi((n - 1 - i) as i32))
        .collect();
    (0..n)
        .map(|k| weighted.iter().enumerate().map(|(i, &x)| x * table[(k * i) % n]).sum())
        .collect()
}

/// Batch evaluation of every damped bin of `window` (oldest sample first).
pub fn direct_damped_dft(window: &[ComplexSample], config: &SdftConfig) -> Result<SpectrumSnapshot, SdftError> {
    if window.len() != config.n_bins {
        return Err(SdftError::LengthMismatch {
            expected: config.n_bins,
            actual: window.len(),
        });
    }
    let table = analysis_table(config.n_bins);
    Ok(SpectrumSnapshot {
        bins: direct_bins(window, config.damping, &table),
        damping: config.damping,
        samples_seen: config.n_bins as u64,
    })
}

/// Streaming filter bank. Single writer: `push_sample` takes `&mut self`.
#[derive(Debug, Clone)]
pub struct SdftState {
    config: SdftConfig,
    /// Raw `R_k[n]`, referenced to the newest sample.
    accumulators: Vec<Complex64>,
    /// Ring buffer of the last N inputs; `head` is the oldest entry.
    delay_line: Vec<ComplexSample>,
    head: usize,
    samples_seen: u64,
    /// `r·e^{j2πk/N}`
    pole: Vec<Complex64>,
    /// `e^{j2πk/N}`, aligns accumulators to the window start.
    alignment: Vec<Complex64>,
    analysis: Vec<Complex64>,
    r_pow_n: f64,
}

impl SdftState {
    pub fn new(config: SdftConfig) -> Self {
        let n = config.n_bins;
        let alignment: Vec<Complex64> = (0..n)
            .map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n as f64))
            .collect();
        let pole = alignment.iter().map(|&w| w * config.damping).collect();
        Self {
            config,
            accumulators: vec![Complex64::new(0.0, 0.0); n],
            delay_line: vec![Complex64::new(0.0, 0.0); n],
            head: 0,
            samples_seen: 0,
            pole,
            alignment,
            analysis: analysis_table(n),
            r_pow_n: config.damping.powi(n as i32),
        }
    }

    pub fn config(&self) -> &SdftConfig {
        &self.config
    }

    pub fn samples_seen(&self) -> u64 {
        self.samples_seen
    }

    pub fn is_valid(&self) -> bool {
        self.samples_seen >= self.config.n_bins as u64
    }

    /// Raw recursion state, one accumulator per bin, referenced to the newest sample.
    pub fn accumulators(&self) -> &[Complex64] {
        &self.accumulators
    }

    /// Current window contents, oldest sample first.
    pub fn window(&self) -> Vec<ComplexSample> {
        let (newer, older) = self.delay_line.split_at(self.head);
        older.iter().chain(newer).copied().collect()
    }

    pub fn push_sample(&mut self, x: ComplexSample) {
        let evicted = std::mem::replace(&mut self.delay_line[self.head], x);
        self.head = (self.head + 1) % self.config.n_bins;
        let comb = x - evicted * self.r_pow_n;
        for (acc, &pole) in self.accumulators.iter_mut().zip(&self.pole) {
            *acc = *acc * pole + comb;
        }
        self.samples_seen += 1;
        if let ResyncPolicy::Every(every) = self.config.resync {
            if self.samples_seen.is_multiple_of(every.get() as u64) {
                self.resync();
            }
        }
    }

    pub fn push_samples(&mut self, samples: &[ComplexSample]) {
        for &x in samples {
            self.push_sample(x);
        }
    }

    /// Rebuild every accumulator from the delay line.
    pub fn resync(&mut self) {
        let window = self.window();
        let bins = direct_bins(&window, self.config.damping, &self.analysis);
        for ((acc, bin), align) in self.accumulators.iter_mut().zip(bins).zip(&self.alignment) {
            *acc = bin * align.conj();
        }
    }

    pub fn snapshot(&self) -> SpectrumSnapshot {
        SpectrumSnapshot {
            bins: self
                .accumulators
                .iter()
                .zip(&self.alignment)
                .map(|(&acc, &align)| acc * align)
                .collect(),
            damping: self.config.damping,
            samples_seen: self.samples_seen,
        }
    }

    #[cfg(test)]
    pub(crate) fn accumulators_mut(&mut self) -> &mut [Complex64] {
        &mut self.accumulators
    }
}
