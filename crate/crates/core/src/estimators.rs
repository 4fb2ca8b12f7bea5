//! Coarse peak search and three-bin fine frequency estimators.
//!
//! All three fine estimators share the interpolation ratio
//!
//! ```text
//! ρ = Re[(R[k-1] - R[k+1]) / (2R[k] - R[k-1] - R[k+1])]
//! ```
//!
//! and differ only in the scale applied to it:
//!
//! | estimator  | scale                                     |
//! |------------|-------------------------------------------|
//! | jacobsen   | 1                                         |
//! | candan     | tan(π/N)/(π/N)                            |
//! | proposed   | (1+r)²/(4r) · tan(π/N)/(π/N)              |
//!
//! The extra `(1+r)²/(4r)` term undoes the flattening of the peak caused by
//! the damping factor of the stable sliding DFT. It equals 1 at `r = 1`, so
//! the proposed estimator reduces to Candan's on an undamped spectrum.
//!
//! The ratio is invariant under a common complex scale and under complex
//! conjugation of all three bins, so amplitude, initial phase and the phase
//! reference of the spectrum all cancel.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::EstimateError;
use crate::sdft::SpectrumSnapshot;

/// Below this the three-bin denominator is treated as exactly zero.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-300;

/// Below this `|1 - r·e^{j2πα/N}|` the closed form of [`kernel_f`] is 0/0.
const KERNEL_SINGULARITY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EstimatorId {
    Proposed,
    Candan,
    Jacobsen,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 3] = [EstimatorId::Proposed, EstimatorId::Candan, EstimatorId::Jacobsen];

    pub fn as_str(self) -> &'static str {
        match self {
            EstimatorId::Proposed => "proposed",
            EstimatorId::Candan => "candan",
            EstimatorId::Jacobsen => "jacobsen",
        }
    }

    /// Damping of the spectrum this estimator is benchmarked on. The
    /// baselines always get an undamped DFT.
    pub fn spectrum_damping(self, damping: f64) -> f64 {
        match self {
            EstimatorId::Proposed => damping,
            EstimatorId::Candan | EstimatorId::Jacobsen => 1.0,
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownEstimator(pub String);

impl fmt::Display for UnknownEstimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "unknown estimator `{}` (expected proposed, candan or jacobsen)",
            self.0
        )
    }
}

impl std::error::Error for UnknownEstimator {}

impl FromStr for EstimatorId {
    type Err = UnknownEstimator;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(EstimatorId::Proposed),
            "candan" => Ok(EstimatorId::Candan),
            "jacobsen" => Ok(EstimatorId::Jacobsen),
            _ => Err(UnknownEstimator(s.to_string())),
        }
    }
}

/// Window length and damping the interpolated spectrum was produced with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    pub n_bins: usize,
    pub damping: f64,
}

impl EstimatorParams {
    pub fn new(n_bins: usize, damping: f64) -> Self {
        Self { n_bins, damping }
    }

    fn check(&self, spectrum: &SpectrumSnapshot) -> Result<(), EstimateError> {
        if self.n_bins != spectrum.n_bins() || self.damping != spectrum.damping() {
            return Err(self.mismatch(spectrum));
        }
        Ok(())
    }

    fn mismatch(&self, spectrum: &SpectrumSnapshot) -> EstimateError {
        EstimateError::ParamsMismatch {
            params_bins: self.n_bins,
            params_damping: self.damping,
            spectrum_bins: spectrum.n_bins(),
            spectrum_damping: spectrum.damping(),
        }
    }
}

/// Fine offset in bins, after clamping to the half-bin domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FineEstimate {
    pub delta: f64,
    /// Value before clamping.
    pub raw: f64,
    pub clamped: bool,
}

impl FineEstimate {
    fn from_raw(raw: f64) -> Self {
        let delta = raw.clamp(-0.5, 0.5);
        Self {
            delta,
            raw,
            clamped: delta != raw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub estimator: EstimatorId,
    pub peak_index: usize,
    pub delta: f64,
    pub clamped: bool,
    /// Radians per sample, `2π(peak_index + delta)/N`.
    pub omega: f64,
    /// `omega·fs/2π` wrapped into `[0, fs)`, when a sample rate was given.
    pub freq_hz: Option<f64>,
}

/// Damped geometric kernel `f(α) = Σ_{n=0}^{N-1} r^n e^{j2παn/N}`.
///
/// This is the noiseless value of a bin sitting `α` bins away from a
/// unit-amplitude tone. The closed form keeps the `r^N·e^{j2πα}` term, so it
/// is exact for fractional `α`; the explicit sum is used where the closed form
/// degenerates (`r = 1`, `α` a multiple of `N`).
pub fn kernel_f(alpha: f64, n_bins: usize, damping: f64) -> Complex64 {
    let n = n_bins as f64;
    let denom = Complex64::new(1.0, 0.0) - Complex64::from_polar(damping, TAU * alpha / n);
    if denom.norm() > KERNEL_SINGULARITY {
        let numer = Complex64::new(1.0, 0.0) - Complex64::from_polar(damping.powi(n_bins as i32), TAU * alpha);
        numer / denom
    } else {
        (0..n_bins)
            .map(|k| Complex64::from_polar(damping.powi(k as i32), TAU * alpha * k as f64 / n))
            .sum()
    }
}

/// `tan(π/N)/(π/N)`
pub fn candan_correction(n_bins: usize) -> f64 {
    let x = PI / n_bins as f64;
    x.tan() / x
}

/// `(1+r)²/(4r)`
pub fn damping_correction(damping: f64) -> f64 {
    (1.0 + damping) * (1.0 + damping) / (4.0 * damping)
}

/// Index of the largest-magnitude bin; ties resolve to the smallest index.
pub fn coarse_peak(spectrum: &SpectrumSnapshot) -> Result<usize, EstimateError> {
    if !spectrum.is_valid() {
        return Err(EstimateError::NotWarmedUp {
            samples_seen: spectrum.samples_seen(),
            n_bins: spectrum.n_bins(),
        });
    }
    let mut best = 0;
    let mut best_mag = f64::NEG_INFINITY;
    for (k, b) in spectrum.bins().iter().enumerate() {
        let mag = b.norm_sqr();
        if mag > best_mag {
            best = k;
            best_mag = mag;
        }
    }
    Ok(best)
}

/// Unscaled three-bin ratio around `peak`, neighbours taken modulo N.
pub fn interpolation_ratio(spectrum: &SpectrumSnapshot, peak: usize) -> Result<f64, EstimateError> {
    if !spectrum.is_valid() {
        return Err(EstimateError::NotWarmedUp {
            samples_seen: spectrum.samples_seen(),
            n_bins: spectrum.n_bins(),
        });
    }
    let n = spectrum.n_bins();
    if peak >= n {
        return Err(EstimateError::PeakOutOfRange { peak, n_bins: n });
    }
    let bins = spectrum.bins();
    let left = bins[(peak + n - 1) % n];
    let centre = bins[peak];
    let right = bins[(peak + 1) % n];
    let denom = centre * 2.0 - left - right;
    if denom.norm() < DEGENERATE_DENOMINATOR {
        return Err(EstimateError::DegenerateDenominator { peak });
    }
    Ok(((left - right) / denom).re)
}

pub fn estimate_delta_jacobsen(spectrum: &SpectrumSnapshot, peak: usize) -> Result<FineEstimate, EstimateError> {
    interpolation_ratio(spectrum, peak).map(FineEstimate::from_raw)
}

fn candan_raw(spectrum: &SpectrumSnapshot, peak: usize, n_bins: usize) -> Result<f64, EstimateError> {
    if n_bins != spectrum.n_bins() {
        return Err(EstimatorParams::new(n_bins, spectrum.damping()).mismatch(spectrum));
    }
    Ok(candan_correction(n_bins) * interpolation_ratio(spectrum, peak)?)
}

pub fn estimate_delta_candan(
    spectrum: &SpectrumSnapshot,
    peak: usize,
    n_bins: usize,
) -> Result<FineEstimate, EstimateError> {
    candan_raw(spectrum, peak, n_bins).map(FineEstimate::from_raw)
}

/// Damping-corrected estimator for spectra from the stable sliding DFT.
pub fn estimate_delta_proposed(
    spectrum: &SpectrumSnapshot,
    peak: usize,
    params: &EstimatorParams,
) -> Result<FineEstimate, EstimateError> {
    params.check(spectrum)?;
    // Scaling the Candan value (not the bare ratio) keeps r = 1 bit-identical to it.
    let raw = damping_correction(params.damping) * candan_raw(spectrum, peak, params.n_bins)?;
    Ok(FineEstimate::from_raw(raw))
}

/// Coarse peak followed by the selected fine estimator.
///
/// `params.damping` is only enforced for the proposed estimator; the
/// baselines interpolate whatever spectrum they are given.
pub fn estimate(
    spectrum: &SpectrumSnapshot,
    params: &EstimatorParams,
    which: EstimatorId,
    sample_rate_hz: Option<f64>,
) -> Result<EstimateResult, EstimateError> {
    if params.n_bins != spectrum.n_bins() {
        return Err(params.mismatch(spectrum));
    }
    let peak = coarse_peak(spectrum)?;
    let fine = match which {
        EstimatorId::Proposed => estimate_delta_proposed(spectrum, peak, params)?,
        EstimatorId::Candan => estimate_delta_candan(spectrum, peak, params.n_bins)?,
        EstimatorId::Jacobsen => estimate_delta_jacobsen(spectrum, peak)?,
    };
    let omega = TAU * (peak as f64 + fine.delta) / params.n_bins as f64;
    let freq_hz = sample_rate_hz.map(|fs| (omega * fs / TAU).rem_euclid(fs));
    Ok(EstimateResult {
        estimator: which,
        peak_index: peak,
        delta: fine.delta,
        clamped: fine.clamped,
        omega,
        freq_hz,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdft::{SdftConfig, SdftState};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Brute-force geometric sum, independent of the closed form.
    fn summed_kernel(alpha: f64, n: usize, r: f64) -> Complex64 {
        (0..n)
            .map(|k| c(r.powi(k as i32), 0.0) * Complex64::from_polar(1.0, TAU * alpha * k as f64 / n as f64))
            .sum()
    }

    /// Noiseless spectrum of a tone at `peak + delta` bins, synthesised from the kernel.
    fn kernel_spectrum(peak: usize, delta: f64, n: usize, r: f64) -> SpectrumSnapshot {
        let bins = (0..n).map(|k| kernel_f(peak as f64 + delta - k as f64, n, r)).collect();
        SpectrumSnapshot::from_bins(bins, r, n as u64)
    }

    /// Noiseless spectrum produced by streaming a tone through the SDFT.
    fn streamed_spectrum(bins_freq: f64, n: usize, r: f64) -> SpectrumSnapshot {
        let mut st = SdftState::new(SdftConfig::new(n, r).unwrap());
        for i in 0..n {
            st.push_sample(Complex64::from_polar(1.0, TAU * bins_freq * i as f64 / n as f64 + 0.7));
        }
        st.snapshot()
    }

    #[test]
    fn kernel_at_zero() {
        let f = kernel_f(0.0, 128, 0.9);
        let want = (1.0 - 0.9f64.powi(128)) / (1.0 - 0.9);
        assert!((f - c(want, 0.0)).norm() < 1e-12);
        assert!((want - 9.999_986_099).abs() < 1e-9);
        assert_eq!(kernel_f(0.0, 128, 1.0), c(128.0, 0.0));
    }

    #[test]
    fn kernel_matches_summation() {
        let f = kernel_f(0.3, 128, 0.9);
        let s = summed_kernel(0.3, 128, 0.9);
        assert!((f - s).norm() < 1e-12, "{f} vs {s}");
        for &(alpha, n, r) in &[(-1.7, 32, 1.0), (5.25, 64, 0.5), (128.0, 128, 1.0), (0.49, 8, 0.99)] {
            let f = kernel_f(alpha, n, r);
            let s = summed_kernel(alpha, n, r);
            assert!((f - s).norm() <= 1e-10 * s.norm().max(1.0), "alpha={alpha} N={n} r={r}");
        }
    }

    #[test]
    fn coarse_peak_on_bin_and_off_bin() {
        assert_eq!(coarse_peak(&streamed_spectrum(40.0, 128, 0.9)).unwrap(), 40);
        let oracle = (0..128)
            .max_by(|&a, &b| {
                let fa = kernel_f(40.3 - a as f64, 128, 0.9).norm();
                let fb = kernel_f(40.3 - b as f64, 128, 0.9).norm();
                fa.partial_cmp(&fb).unwrap()
            })
            .unwrap();
        assert_eq!(oracle, 40);
        assert_eq!(coarse_peak(&streamed_spectrum(40.3, 128, 0.9)).unwrap(), oracle);
    }

    #[test]
    fn coarse_peak_tie_and_warm_up() {
        let zero = SpectrumSnapshot::from_bins(vec![c(0.0, 0.0); 8], 0.9, 8);
        assert_eq!(coarse_peak(&zero).unwrap(), 0);
        let cold = SpectrumSnapshot::from_bins(vec![c(1.0, 0.0); 8], 0.9, 7);
        assert_eq!(
            coarse_peak(&cold),
            Err(EstimateError::NotWarmedUp {
                samples_seen: 7,
                n_bins: 8
            })
        );
    }

    #[test]
    fn zero_spectrum_is_degenerate() {
        let zero = SpectrumSnapshot::from_bins(vec![c(0.0, 0.0); 8], 1.0, 8);
        assert_eq!(
            estimate_delta_jacobsen(&zero, 0),
            Err(EstimateError::DegenerateDenominator { peak: 0 })
        );
        assert!(matches!(
            estimate(&zero, &EstimatorParams::new(8, 1.0), EstimatorId::Candan, None),
            Err(EstimateError::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn params_must_match_spectrum() {
        let spec = kernel_spectrum(10, 0.2, 32, 0.9);
        let err = estimate_delta_proposed(&spec, 10, &EstimatorParams::new(32, 0.8));
        assert!(matches!(err, Err(EstimateError::ParamsMismatch { .. })));
        assert!(estimate_delta_candan(&spec, 10, 64).is_err());
        assert!(estimate(&spec, &EstimatorParams::new(16, 0.9), EstimatorId::Jacobsen, None).is_err());
        assert_eq!(
            estimate_delta_jacobsen(&spec, 32),
            Err(EstimateError::PeakOutOfRange { peak: 32, n_bins: 32 })
        );
    }

    #[test]
    fn zero_offset_gives_zero_for_all_estimators() {
        for &r in &[0.5, 0.9, 1.0] {
            let spec = kernel_spectrum(40, 0.0, 128, r);
            let p = estimate_delta_proposed(&spec, 40, &EstimatorParams::new(128, r)).unwrap();
            let cd = estimate_delta_candan(&spec, 40, 128).unwrap();
            let j = estimate_delta_jacobsen(&spec, 40).unwrap();
            for d in [p.delta, cd.delta, j.delta] {
                assert!(d.abs() < 1e-12, "r={r}: {d}");
            }
        }
    }

    #[test]
    fn proposed_sweep_within_thousandth_of_a_bin() {
        let n = 128;
        for step in 1..=9 {
            let bins_freq = 30.0 + step as f64 / 10.0;
            let spec = streamed_spectrum(bins_freq, n, 0.9);
            let res = estimate(&spec, &EstimatorParams::new(n, 0.9), EstimatorId::Proposed, None).unwrap();
            let est = res.peak_index as f64 + res.delta;
            assert!((est - bins_freq).abs() < 1e-3, "{bins_freq}: {est}");
        }
    }

    #[test]
    fn proposed_against_grid_search() {
        let (n, r, delta, peak) = (128usize, 0.9f64, 0.25, 40usize);
        let signal: Vec<Complex64> = (0..n)
            .map(|i| Complex64::from_polar(1.0, TAU * (peak as f64 + delta) * i as f64 / n as f64))
            .collect();
        // Damped periodogram on a 10^6-point grid over the peak bin.
        let grid = 1_000_000;
        let mut best = (f64::NEG_INFINITY, 0.0);
        for g in 0..=grid {
            let alpha = peak as f64 - 0.5 + g as f64 / grid as f64;
            let proj: Complex64 = signal
                .iter()
                .enumerate()
                .map(|(i, &x)| {
                    x * r.powi((n - 1 - i) as i32) * Complex64::from_polar(1.0, -TAU * alpha * i as f64 / n as f64)
                })
                .sum();
            if proj.norm_sqr() > best.0 {
                best = (proj.norm_sqr(), alpha - peak as f64);
            }
        }
        let ml = best.1;
        assert!((ml - delta).abs() <= 1e-6, "grid ml {ml}");

        let spec = kernel_spectrum(peak, delta, n, r);
        let est = estimate_delta_proposed(&spec, peak, &EstimatorParams::new(n, r)).unwrap();
        let linearisation_bias = est.delta - ml;
        assert!(linearisation_bias.abs() < 1e-3, "bias {linearisation_bias:e}");
        assert!(!est.clamped);
    }

    #[test]
    fn candan_against_summed_bins() {
        let (n, delta) = (8usize, 0.4);
        let bins: Vec<Complex64> = (0..n)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        Complex64::from_polar(
                            1.0,
                            TAU * (2.0 + delta) * i as f64 / n as f64 - TAU * (k * i) as f64 / n as f64,
                        )
                    })
                    .sum()
            })
            .collect();
        let (l, m, rr) = (bins[1], bins[2], bins[3]);
        let x = PI / n as f64;
        let oracle = x.tan() / x * ((l - rr) / (m * 2.0 - l - rr)).re;
        let spec = SpectrumSnapshot::from_bins(bins, 1.0, n as u64);
        let got = estimate_delta_candan(&spec, 2, n).unwrap();
        assert!((got.delta - oracle).abs() < 1e-12);
        assert!(!got.clamped);
    }

    #[test]
    fn candan_jacobsen_scale() {
        let want = (PI / 128.0).tan() * 128.0 / PI;
        assert!((candan_correction(128) - want).abs() < 1e-15);
        assert!((candan_correction(128) - 1.000_201).abs() < 1e-6);
        assert_eq!(damping_correction(1.0), 1.0);
    }

    #[test]
    fn wraparound_near_bin_zero() {
        let n = 128;
        for &r in &[0.9, 1.0] {
            let spec = streamed_spectrum(-0.3, n, r);
            for which in EstimatorId::ALL {
                let res = estimate(&spec, &EstimatorParams::new(n, r), which, Some(128e6)).unwrap();
                assert_eq!(res.peak_index, 0);
                assert!((res.delta + 0.3).abs() < 1e-3, "{which}: {}", res.delta);
                let f = res.freq_hz.unwrap();
                assert!((0.0..128e6).contains(&f));
                assert!((f - (128e6 - 0.3e6)).abs() < 1e3, "{which}: {f}");
            }
        }
    }

    #[test]
    fn estimate_reports_frequency() {
        let spec = streamed_spectrum(40.0, 128, 0.9);
        let res = estimate(
            &spec,
            &EstimatorParams::new(128, 0.9),
            EstimatorId::Proposed,
            Some(128e6),
        )
        .unwrap();
        assert_eq!(res.peak_index, 40);
        assert!(res.delta.abs() < 1e-12);
        assert!((res.freq_hz.unwrap() - 40e6).abs() < 1e-3);
        assert_eq!(res.omega, TAU * (40.0 + res.delta) / 128.0);
        assert_eq!(res.estimator, EstimatorId::Proposed);

        let spec = streamed_spectrum(30.5, 128, 0.9);
        let res = estimate(
            &spec,
            &EstimatorParams::new(128, 0.9),
            EstimatorId::Proposed,
            Some(128e6),
        )
        .unwrap();
        assert!((res.freq_hz.unwrap() - 30.5e6).abs() < 1000.0);
    }

    #[test]
    fn clamping_is_flagged() {
        // Left neighbour dominates: the ratio overshoots the half-bin domain.
        let spec = SpectrumSnapshot::from_bins(vec![c(0.0, 0.0), c(0.9, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 1.0, 4);
        let j = estimate_delta_jacobsen(&spec, 2).unwrap();
        assert!(j.raw > 0.5 || j.raw < -0.5);
        assert!(j.clamped);
        assert_eq!(j.delta.abs(), 0.5);
    }

    #[test]
    fn estimator_names_round_trip() {
        for id in EstimatorId::ALL {
            assert_eq!(id.as_str().parse::<EstimatorId>().unwrap(), id);
        }
        assert!("burg".parse::<EstimatorId>().is_err());
    }

    #[test]
    fn difference_ratio_linearisation() {
        let (n, r) = (128usize, 0.9);
        for &d in &[0.001, -0.001, 0.005, -0.005, 0.01, -0.01] {
            let (fp, f0, fm) = (kernel_f(d + 1.0, n, r), kernel_f(d, n, r), kernel_f(d - 1.0, n, r));
            let lhs = ((fp - fm) / (fp - f0 * 2.0 + fm)).re;
            let x = PI / n as f64;
            let rhs = -4.0 * PI * r * d / (x.tan() * n as f64 * (1.0 + r).powi(2));
            let q = lhs / rhs;
            assert!((0.99..=1.01).contains(&q), "d={d}: {q}");
        }
    }

    #[test]
    fn proposed_dominates_uncorrected_on_damped_spectra() {
        let (n, r) = (128usize, 0.9);
        for i in -45..=45 {
            let d = i as f64 / 100.0;
            let spec = kernel_spectrum(60, d, n, r);
            let p = estimate_delta_proposed(&spec, 60, &EstimatorParams::new(n, r)).unwrap();
            let cd = estimate_delta_candan(&spec, 60, n).unwrap();
            assert!((p.delta - d).abs() <= (cd.delta - d).abs(), "d={d}");
        }
    }

    proptest! {
        #[test]
        fn prop_unit_damping_is_candan(
            bins in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 4..64),
            peak_seed in any::<usize>(),
        ) {
            let n = bins.len();
            let bins: Vec<_> = bins.into_iter().map(|(a, b)| c(a, b)).collect();
            let spec = SpectrumSnapshot::from_bins(bins, 1.0, n as u64);
            let peak = peak_seed % n;
            let p = estimate_delta_proposed(&spec, peak, &EstimatorParams::new(n, 1.0));
            let cd = estimate_delta_candan(&spec, peak, n);
            prop_assert_eq!(p.map(|e| e.raw.to_bits()), cd.map(|e| e.raw.to_bits()));
        }

        #[test]
        fn prop_sign_consistency(
            mag in 0.01f64..0.45,
            negative in any::<bool>(),
            r in prop::sample::select(vec![0.9, 1.0]),
            n in prop::sample::select(vec![32usize, 128]),
        ) {
            let d = if negative { -mag } else { mag };
            let peak = n / 3;
            let spec = kernel_spectrum(peak, d, n, r);
            let p = estimate_delta_proposed(&spec, peak, &EstimatorParams::new(n, r)).unwrap();
            let cd = estimate_delta_candan(&spec, peak, n).unwrap();
            let j = estimate_delta_jacobsen(&spec, peak).unwrap();
            for e in [p, cd, j] {
                prop_assert_eq!(e.delta.signum(), d.signum());
            }
        }
    }
}
