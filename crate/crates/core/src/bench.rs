//! Monte-Carlo bias/RMSE harness.
//!
//! An experiment is a grid of operating points (tone frequency × SNR). At each
//! operating point every trial draws one noisy record, and every
//! (estimator, damping) cell is evaluated on that same record, so the
//! estimators are compared under common random numbers. Per-trial seeds depend
//! only on the base seed, the operating point and the trial index.

use std::fmt;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{ConfigError, EstimateError};
use crate::estimators::{estimate, EstimatorId, EstimatorParams};
use crate::sdft::{SdftConfig, SdftState, SpectrumSnapshot};
use crate::signal::{add_awgn_in_place, gen_tone, NoiseSpec, ToneSpec};
use crate::ComplexSample;

/// Tone amplitude used by the harness.
pub const DEFAULT_AMPLITUDE: f64 = 1.0;

pub const CSV_HEADER: [&str; 9] = [
    "freq_hz",
    "snr_db",
    "damping",
    "estimator",
    "mean_estimate_hz",
    "bias_hz",
    "rmse_hz",
    "clamp_count",
    "trials",
];

const CONFIG_KEYS: [&str; 9] = [
    "n_bins",
    "sample_rate_hz",
    "freq_list_hz",
    "damping_list",
    "snr_db_list",
    "trials",
    "base_seed",
    "estimators",
    "randomize_phase",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n_bins: usize,
    pub sample_rate_hz: f64,
    pub freq_list_hz: Vec<f64>,
    pub damping_list: Vec<f64>,
    /// `f64::INFINITY` is the no-noise entry.
    pub snr_db_list: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    pub estimators: Vec<EstimatorId>,
    pub randomize_phase: bool,
}

impl Default for ExperimentSpec {
    /// 128-point transform at 128 MHz, tones 30.1..30.9 MHz, r = 0.9,
    /// SNR 2 dB, 3 dB and noiseless, 10⁴ trials.
    fn default() -> Self {
        Self {
            n_bins: 128,
            sample_rate_hz: 128e6,
            freq_list_hz: (301..=309).map(|i| i as f64 * 1e5).collect(),
            damping_list: vec![0.9],
            snr_db_list: vec![2.0, 3.0, f64::INFINITY],
            trials: 10_000,
            base_seed: 0,
            estimators: EstimatorId::ALL.to_vec(),
            randomize_phase: false,
        }
    }
}

impl ExperimentSpec {
    /// Tone offset from its nearest bin, in bins.
    pub fn offset_bins(&self, freq_hz: f64) -> f64 {
        let bins = freq_hz * self.n_bins as f64 / self.sample_rate_hz;
        bins - bins.round()
    }

    /// Hard errors for unusable specs; otherwise the list of warnings for
    /// frequencies that sit at or beyond half a bin from every bin centre.
    pub fn validate(&self) -> Result<Vec<String>, ConfigError> {
        SdftConfig::new(self.n_bins, 0.5).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        for &r in &self.damping_list {
            SdftConfig::new(self.n_bins, r).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(ConfigError::Invalid(format!(
                "sample_rate_hz must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be positive".into()));
        }
        if self.freq_list_hz.iter().any(|f| !f.is_finite()) {
            return Err(ConfigError::Invalid("freq_list_hz entries must be finite".into()));
        }
        if self.snr_db_list.iter().any(|s| s.is_nan() || *s == f64::NEG_INFINITY) {
            return Err(ConfigError::Invalid(
                "snr_db_list entries must be numbers or `none`".into(),
            ));
        }
        for (name, empty) in [
            ("freq_list_hz", self.freq_list_hz.is_empty()),
            ("damping_list", self.damping_list.is_empty()),
            ("snr_db_list", self.snr_db_list.is_empty()),
            ("estimators", self.estimators.is_empty()),
        ] {
            if empty {
                return Err(ConfigError::Invalid(format!("{name} must not be empty")));
            }
        }
        Ok(self
            .freq_list_hz
            .iter()
            .filter(|&&f| self.offset_bins(f).abs() >= 0.5)
            .map(|f| {
                format!(
                    "frequency {f} Hz is {} bins from the nearest bin centre; |delta| < 0.5 does not hold",
                    self.offset_bins(*f).abs()
                )
            })
            .collect())
    }

    /// Parse `key = value` lines on top of the defaults. Lists are
    /// comma-separated; `#` starts a comment.
    pub fn from_config_str(text: &str) -> Result<Self, ConfigError> {
        let mut spec = Self::default();
        let mut unknown = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: idx + 1,
                text: raw.to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !CONFIG_KEYS.contains(&key) {
                unknown.push(key.to_string());
                continue;
            }
            spec.set(key, value)?;
        }
        if !unknown.is_empty() {
            return Err(ConfigError::UnknownKeys(unknown));
        }
        Ok(spec)
    }

    pub fn from_config_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_config_str(&fs::read_to_string(path)?)
    }

    /// Set one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "n_bins" => self.n_bins = parse_scalar(key, value)?,
            "sample_rate_hz" => self.sample_rate_hz = parse_scalar(key, value)?,
            "freq_list_hz" => self.freq_list_hz = parse_list(key, value)?,
            "damping_list" => self.damping_list = parse_list(key, value)?,
            "snr_db_list" => self.snr_db_list = parse_snr_list(key, value)?,
            "trials" => self.trials = parse_scalar(key, value)?,
            "base_seed" => self.base_seed = parse_scalar(key, value)?,
            "estimators" => {
                let mut ids: Vec<EstimatorId> = parse_list(key, value)?;
                ids.dedup();
                self.estimators = ids;
            }
            "randomize_phase" => self.randomize_phase = parse_scalar(key, value)?,
            _ => return Err(ConfigError::UnknownKeys(vec![key.to_string()])),
        }
        Ok(())
    }

    /// (estimator, spectrum damping) cells evaluated at each operating point.
    fn cells(&self) -> Vec<(EstimatorId, f64)> {
        let mut cells: Vec<(EstimatorId, f64)> = Vec::new();
        for &id in &self.estimators {
            for &r in &self.damping_list {
                let cell = (id, id.spectrum_damping(r));
                if !cells.contains(&cell) {
                    cells.push(cell);
                }
            }
        }
        cells
    }
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: e.to_string(),
    })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_scalar(key, s))
        .collect()
}

/// Like [`parse_list`] but accepts `none`/`inf` for the noiseless entry.
pub fn parse_snr_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.to_ascii_lowercase().as_str() {
            "none" | "inf" | "+inf" | "noiseless" => Ok(f64::INFINITY),
            _ => parse_scalar(key, s),
        })
        .collect()
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of one trial at one operating point.
pub fn trial_seed(base_seed: u64, freq_hz: f64, snr_db: f64, trial: u64) -> u64 {
    [freq_hz.to_bits(), snr_db.to_bits(), trial]
        .into_iter()
        .fold(mix(base_seed), |h, v| mix(h ^ v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub estimate_hz: f64,
    pub clamped: bool,
}

/// The received record for one trial: tone plus seeded noise.
pub fn trial_signal(spec: &ExperimentSpec, freq_hz: f64, snr_db: f64, seed: u64) -> Vec<ComplexSample> {
    let phase0 = if spec.randomize_phase {
        ChaCha8Rng::seed_from_u64(mix(seed ^ 0x0050_4841_5345)).random_range(0.0..std::f64::consts::TAU)
    } else {
        0.0
    };
    let tone = ToneSpec {
        amplitude: DEFAULT_AMPLITUDE,
        freq_hz,
        sample_rate_hz: spec.sample_rate_hz,
        phase0,
        n_samples: spec.n_bins,
    };
    let mut samples = gen_tone(&tone).expect("experiment spec validated");
    add_awgn_in_place(&mut samples, DEFAULT_AMPLITUDE, &NoiseSpec::new(snr_db, seed));
    samples
}

/// Stream a record through a fresh sliding DFT and capture the final spectrum.
pub fn streamed_spectrum(samples: &[ComplexSample], n_bins: usize, damping: f64) -> SpectrumSnapshot {
    let config = SdftConfig::new(n_bins, damping).expect("valid sliding DFT config");
    let mut state = SdftState::new(config);
    state.push_samples(samples);
    state.snapshot()
}

/// One trial. The proposed estimator sees a damped spectrum, the baselines
/// an undamped one.
pub fn run_trial(
    spec: &ExperimentSpec,
    freq_hz: f64,
    snr_db: f64,
    damping: f64,
    estimator: EstimatorId,
    seed: u64,
) -> Result<TrialOutcome, EstimateError> {
    let samples = trial_signal(spec, freq_hz, snr_db, seed);
    let r = estimator.spectrum_damping(damping);
    evaluate(&streamed_spectrum(&samples, spec.n_bins, r), spec, estimator)
}

fn evaluate(
    spectrum: &SpectrumSnapshot,
    spec: &ExperimentSpec,
    estimator: EstimatorId,
) -> Result<TrialOutcome, EstimateError> {
    let params = EstimatorParams::new(spec.n_bins, spectrum.damping());
    let res = estimate(spectrum, &params, estimator, Some(spec.sample_rate_hz))?;
    Ok(TrialOutcome {
        estimate_hz: res.freq_hz.expect("sample rate supplied"),
        clamped: res.clamped,
    })
}

/// Aggregate of one (frequency, SNR, damping, estimator) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialStats {
    pub freq_hz: f64,
    pub snr_db: f64,
    pub damping: f64,
    pub estimator: EstimatorId,
    pub mean_estimate_hz: f64,
    pub bias_hz: f64,
    pub rmse_hz: f64,
    pub clamp_count: usize,
    /// Trials that produced an estimate.
    pub trials: usize,
    /// Trials rejected by the estimator (not serialised).
    pub failures: usize,
}

impl TrialStats {
    /// Standard error of the mean estimate.
    pub fn standard_error_hz(&self) -> f64 {
        let var = (self.rmse_hz * self.rmse_hz - self.bias_hz * self.bias_hz).max(0.0);
        (var / self.trials as f64).sqrt()
    }

    fn sort_key(&self) -> impl Ord + '_ {
        (
            self.estimator.as_str(),
            TotalF64(self.damping),
            TotalF64(self.snr_db),
            TotalF64(self.freq_hz),
        )
    }
}

#[derive(PartialEq)]
struct TotalF64(f64);

impl Eq for TotalF64 {}

impl PartialOrd for TotalF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TotalF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

#[derive(Default)]
struct CellAccumulator {
    errors: Vec<f64>,
    clamp_count: usize,
    failures: usize,
}

impl CellAccumulator {
    fn finish(self, freq_hz: f64, snr_db: f64, damping: f64, estimator: EstimatorId) -> TrialStats {
        let n = self.errors.len();
        let (bias, rmse) = if n == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let bias = self.errors.iter().sum::<f64>() / n as f64;
            let var = self.errors.iter().map(|e| (e - bias) * (e - bias)).sum::<f64>() / n as f64;
            // hypot keeps rmse >= |bias| exactly.
            (bias, bias.hypot(var.sqrt()))
        };
        TrialStats {
            freq_hz,
            snr_db,
            damping,
            estimator,
            mean_estimate_hz: freq_hz + bias,
            bias_hz: bias,
            rmse_hz: rmse,
            clamp_count: self.clamp_count,
            trials: n,
            failures: self.failures,
        }
    }
}

/// Signed error, taking the short way round the frequency circle.
fn wrapped_error(estimate_hz: f64, truth_hz: f64, sample_rate_hz: f64) -> f64 {
    let half = sample_rate_hz / 2.0;
    (estimate_hz - truth_hz + half).rem_euclid(sample_rate_hz) - half
}

fn run_operating_point(spec: &ExperimentSpec, freq_hz: f64, snr_db: f64) -> Vec<TrialStats> {
    let cells = spec.cells();
    let mut dampings: Vec<f64> = cells.iter().map(|c| c.1).collect();
    dampings.dedup();
    dampings.sort_by(f64::total_cmp);
    dampings.dedup();
    let truth = freq_hz.rem_euclid(spec.sample_rate_hz);

    let mut acc: Vec<CellAccumulator> = cells.iter().map(|_| CellAccumulator::default()).collect();
    let mut spectra: Vec<SpectrumSnapshot> = Vec::with_capacity(dampings.len());
    for trial in 0..spec.trials as u64 {
        let seed = trial_seed(spec.base_seed, freq_hz, snr_db, trial);
        let samples = trial_signal(spec, freq_hz, snr_db, seed);
        spectra.clear();
        spectra.extend(dampings.iter().map(|&r| streamed_spectrum(&samples, spec.n_bins, r)));
        for (&(id, r), cell) in cells.iter().zip(acc.iter_mut()) {
            let idx = dampings.iter().position(|&d| d == r).expect("damping listed");
            match evaluate(&spectra[idx], spec, id) {
                Ok(out) => {
                    cell.errors
                        .push(wrapped_error(out.estimate_hz, truth, spec.sample_rate_hz));
                    cell.clamp_count += usize::from(out.clamped);
                }
                Err(_) => cell.failures += 1,
            }
        }
    }
    cells
        .iter()
        .zip(acc)
        .map(|(&(id, r), cell)| cell.finish(freq_hz, snr_db, r, id))
        .collect()
}

/// Run every cell of the experiment. Output order is independent of
/// scheduling; [`emit_csv`] sorts rows.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<TrialStats>, ConfigError> {
    spec.validate()?;
    let points: Vec<(f64, f64)> = spec
        .freq_list_hz
        .iter()
        .flat_map(|&f| spec.snr_db_list.iter().map(move |&s| (f, s)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(f, s)| run_operating_point(spec, f, s))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect())
}

/// Mean of `|bias|` across all cells of one estimator at one SNR, with the
/// standard error of that mean (cells treated as independent).
pub fn mean_abs_bias(stats: &[TrialStats], estimator: EstimatorId, snr_db: f64) -> Option<(f64, f64)> {
    let cells: Vec<&TrialStats> = stats
        .iter()
        .filter(|s| s.estimator == estimator && s.snr_db == snr_db)
        .collect();
    if cells.is_empty() {
        return None;
    }
    let n = cells.len() as f64;
    let mean = cells.iter().map(|s| s.bias_hz.abs()).sum::<f64>() / n;
    let se = cells.iter().map(|s| s.standard_error_hz().powi(2)).sum::<f64>().sqrt() / n;
    Some((mean, se))
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write the statistics as CSV, sorted by (estimator, damping, snr_db, freq_hz).
pub fn emit_csv<W: Write>(stats: &[TrialStats], destination: W) -> io::Result<()> {
    let mut rows: Vec<&TrialStats> = stats.iter().collect();
    rows.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    let mut w = csv::Writer::from_writer(destination);
    w.write_record(CSV_HEADER)?;
    for s in rows {
        w.write_record([
            fmt_f64(s.freq_hz),
            fmt_f64(s.snr_db),
            fmt_f64(s.damping),
            s.estimator.to_string(),
            fmt_f64(s.mean_estimate_hz),
            fmt_f64(s.bias_hz),
            fmt_f64(s.rmse_hz),
            s.clamp_count.to_string(),
            s.trials.to_string(),
        ])?;
    }
    w.flush()
}

pub fn emit_csv_file(stats: &[TrialStats], path: impl AsRef<Path>) -> io::Result<()> {
    let file = fs::File::create(path)?;
    let mut buf = io::BufWriter::new(file);
    emit_csv(stats, &mut buf)?;
    buf.flush()
}

/// Read back a file written by [`emit_csv`].
pub fn parse_csv<R: Read>(source: R) -> Result<Vec<TrialStats>, ConfigError> {
    let mut reader = csv::Reader::from_reader(source);
    let header = reader.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(ConfigError::Invalid(format!("unexpected CSV header: {header:?}")));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let r = record.map_err(csv_err)?;
        let field = |i: usize| &r[i];
        out.push(TrialStats {
            freq_hz: parse_scalar(CSV_HEADER[0], field(0))?,
            snr_db: parse_scalar(CSV_HEADER[1], field(1))?,
            damping: parse_scalar(CSV_HEADER[2], field(2))?,
            estimator: parse_scalar(CSV_HEADER[3], field(3))?,
            mean_estimate_hz: parse_scalar(CSV_HEADER[4], field(4))?,
            bias_hz: parse_scalar(CSV_HEADER[5], field(5))?,
            rmse_hz: parse_scalar(CSV_HEADER[6], field(6))?,
            clamp_count: parse_scalar(CSV_HEADER[7], field(7))?,
            trials: parse_scalar(CSV_HEADER[8], field(8))?,
            failures: 0,
        });
    }
    Ok(out)
}

fn csv_err(e: csv::Error) -> ConfigError {
    ConfigError::Invalid(e.to_string())
}
