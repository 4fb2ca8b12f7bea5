//! C ABI over the `slidefreq` sliding DFT and frequency estimators.
//!
//! A sliding DFT lives behind an opaque `SfSdft` handle created with
//! [`sf_sdft_new`] and released with [`sf_sdft_free`]. Every fallible call
//! returns an [`SfStatus`]; [`sf_status_message`] turns it into static text.
//! Panics never cross the boundary; they surface as `SF_STATUS_PANIC`.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use slidefreq::{
    estimate, kernel_f, Complex64, EstimateError, EstimatorId, EstimatorParams, SdftConfig, SdftError, SdftState,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    LengthMismatch = 3,
    NotWarmedUp = 4,
    DegenerateDenominator = 5,
    ParamsMismatch = 6,
    InvalidArgument = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SfEstimator {
    Proposed = 0,
    Candan = 1,
    Jacobsen = 2,
}

impl From<SfEstimator> for EstimatorId {
    fn from(e: SfEstimator) -> Self {
        match e {
            SfEstimator::Proposed => EstimatorId::Proposed,
            SfEstimator::Candan => EstimatorId::Candan,
            SfEstimator::Jacobsen => EstimatorId::Jacobsen,
        }
    }
}

/// Result of [`sf_sdft_estimate`]. `freq_hz` is NaN when no sample rate was given.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfEstimate {
    pub estimator: SfEstimator,
    pub peak_index: usize,
    pub delta: f64,
    pub omega: f64,
    pub freq_hz: f64,
    pub clamped: bool,
}

/// Opaque streaming sliding-DFT state.
pub struct SfSdft {
    state: SdftState,
}

impl From<SdftError> for SfStatus {
    fn from(e: SdftError) -> Self {
        match e {
            SdftError::LengthMismatch { .. } => SfStatus::LengthMismatch,
            _ => SfStatus::InvalidConfig,
        }
    }
}

impl From<EstimateError> for SfStatus {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::NotWarmedUp { .. } => SfStatus::NotWarmedUp,
            EstimateError::DegenerateDenominator { .. } => SfStatus::DegenerateDenominator,
            EstimateError::ParamsMismatch { .. } => SfStatus::ParamsMismatch,
            EstimateError::PeakOutOfRange { .. } => SfStatus::InvalidArgument,
        }
    }
}

fn guard(f: impl FnOnce() -> Result<(), SfStatus>) -> SfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SfStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => SfStatus::Panic,
    }
}

/// # Safety
/// `handle` must be null or a live pointer from [`sf_sdft_new`].
unsafe fn state<'a>(handle: *const SfSdft) -> Result<&'a SdftState, SfStatus> {
    handle.as_ref().map(|h| &h.state).ok_or(SfStatus::NullPointer)
}

/// # Safety
/// `handle` must be null or a live pointer from [`sf_sdft_new`] with no other
/// reference in use.
unsafe fn state_mut<'a>(handle: *mut SfSdft) -> Result<&'a mut SdftState, SfStatus> {
    handle.as_mut().map(|h| &mut h.state).ok_or(SfStatus::NullPointer)
}

/// Create a sliding DFT with `n_bins` bins and damping `damping` in (0, 1].
/// `resync_interval` is the number of samples between exact recomputations;
/// 0 disables resynchronisation.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle pointer.
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_new(
    n_bins: usize,
    damping: f64,
    resync_interval: usize,
    out: *mut *mut SfSdft,
) -> SfStatus {
    guard(|| {
        if out.is_null() {
            return Err(SfStatus::NullPointer);
        }
        let interval = (resync_interval != 0).then_some(resync_interval);
        let config = SdftConfig::new(n_bins, damping)?.with_resync_interval(interval)?;
        let handle = Box::new(SfSdft {
            state: SdftState::new(config),
        });
        *out = Box::into_raw(handle);
        Ok(())
    })
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `handle` must be null or a pointer from [`sf_sdft_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_free(handle: *mut SfSdft) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be a live handle not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_push(handle: *mut SfSdft, re: f64, im: f64) -> SfStatus {
    guard(|| {
        state_mut(handle)?.push_sample(Complex64::new(re, im));
        Ok(())
    })
}

/// Push `n_samples` complex samples stored as interleaved `re, im` doubles.
///
/// # Safety
/// `handle` must be a live handle not used concurrently; `samples` must point
/// to `2 * n_samples` readable doubles (may be null when `n_samples` is 0).
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_push_interleaved(
    handle: *mut SfSdft,
    samples: *const f64,
    n_samples: usize,
) -> SfStatus {
    guard(|| {
        let st = state_mut(handle)?;
        if n_samples == 0 {
            return Ok(());
        }
        if samples.is_null() {
            return Err(SfStatus::NullPointer);
        }
        let data = std::slice::from_raw_parts(samples, 2 * n_samples);
        for pair in data.chunks_exact(2) {
            st.push_sample(Complex64::new(pair[0], pair[1]));
        }
        Ok(())
    })
}

/// Recompute every bin exactly from the current window.
///
/// # Safety
/// `handle` must be a live handle not used concurrently.
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_resync(handle: *mut SfSdft) -> SfStatus {
    guard(|| {
        state_mut(handle)?.resync();
        Ok(())
    })
}

/// Number of samples pushed so far; 0 for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_samples_seen(handle: *const SfSdft) -> u64 {
    state(handle).map(|s| s.samples_seen()).unwrap_or(0)
}

/// Whether a full window has been observed; false for a null handle.
///
/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_is_valid(handle: *const SfSdft) -> bool {
    state(handle).map(|s| s.is_valid()).unwrap_or(false)
}

/// # Safety
/// `handle` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_n_bins(handle: *const SfSdft) -> usize {
    state(handle).map(|s| s.config().n_bins()).unwrap_or(0)
}

/// Copy the current bins as interleaved `re, im` doubles into `out`, which
/// holds room for `capacity` complex values (at least `n_bins`).
///
/// # Safety
/// `handle` must be a live handle; `out` must point to `2 * capacity` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_bins(handle: *const SfSdft, out: *mut f64, capacity: usize) -> SfStatus {
    guard(|| {
        let st = state(handle)?;
        if out.is_null() {
            return Err(SfStatus::NullPointer);
        }
        let snap = st.snapshot();
        if capacity < snap.n_bins() {
            return Err(SfStatus::LengthMismatch);
        }
        let dst = std::slice::from_raw_parts_mut(out, 2 * snap.n_bins());
        for (pair, b) in dst.chunks_exact_mut(2).zip(snap.bins()) {
            pair[0] = b.re;
            pair[1] = b.im;
        }
        Ok(())
    })
}

/// Estimate the tone frequency from the current spectrum. Pass
/// `sample_rate_hz <= 0` to skip the conversion to Hz.
///
/// # Safety
/// `handle` must be a live handle; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sf_sdft_estimate(
    handle: *const SfSdft,
    estimator: SfEstimator,
    sample_rate_hz: f64,
    out: *mut SfEstimate,
) -> SfStatus {
    guard(|| {
        let st = state(handle)?;
        if out.is_null() {
            return Err(SfStatus::NullPointer);
        }
        let fs = (sample_rate_hz > 0.0 && sample_rate_hz.is_finite()).then_some(sample_rate_hz);
        let params = EstimatorParams::new(st.config().n_bins(), st.config().damping());
        let res = estimate(&st.snapshot(), &params, estimator.into(), fs)?;
        ptr::write(
            out,
            SfEstimate {
                estimator,
                peak_index: res.peak_index,
                delta: res.delta,
                omega: res.omega,
                freq_hz: res.freq_hz.unwrap_or(f64::NAN),
                clamped: res.clamped,
            },
        );
        Ok(())
    })
}

/// Damped geometric kernel value `f(alpha)` for an `n_bins`-point window.
///
/// # Safety
/// `out_re` and `out_im` must be valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn sf_kernel_f(
    alpha: f64,
    n_bins: usize,
    damping: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> SfStatus {
    guard(|| {
        if out_re.is_null() || out_im.is_null() {
            return Err(SfStatus::NullPointer);
        }
        if n_bins == 0 || !(damping > 0.0 && damping <= 1.0) || !alpha.is_finite() {
            return Err(SfStatus::InvalidArgument);
        }
        let f = kernel_f(alpha, n_bins, damping);
        *out_re = f.re;
        *out_im = f.im;
        Ok(())
    })
}

/// Static, NUL-terminated description of a status code.
#[no_mangle]
pub extern "C" fn sf_status_message(status: SfStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        SfStatus::Ok => b"ok\0",
        SfStatus::NullPointer => b"null pointer argument\0",
        SfStatus::InvalidConfig => b"invalid sliding DFT configuration\0",
        SfStatus::LengthMismatch => b"buffer length does not match the transform size\0",
        SfStatus::NotWarmedUp => b"fewer than n_bins samples processed\0",
        SfStatus::DegenerateDenominator => b"spectrum has no curvature at the peak\0",
        SfStatus::ParamsMismatch => b"estimator parameters do not match the spectrum\0",
        SfStatus::InvalidArgument => b"invalid argument\0",
        SfStatus::Panic => b"internal error\0",
    };
    msg.as_ptr().cast()
}

/// Library version, NUL-terminated.
#[no_mangle]
pub extern "C" fn sf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
