//! C ABI for the sdclip toolkit.
//!
//! Stateful objects (the clipping controller and the sphere decoder) are
//! exposed as opaque handles created by `*_new` and released by `*_free`.
//! Every fallible function returns an [`SdcStatus`]; on failure a description
//! is available from [`sdc_last_error_message`] on the same thread.
//! Complex values cross the boundary as [`SdcComplex`] pairs and matrices are
//! row-major.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use sdclip::adapt::{self, ClippingState};
use sdclip::cli::{config, csv};
use sdclip::fec;
use sdclip::harness;
use sdclip::linalg::{self, ComplexMatrix};
use sdclip::modem::Constellation;
use sdclip::sphere::{DetectionProblem, SphereDecoder};
use sdclip::{Complex64, Error};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    RankDeficient = 4,
    Config = 5,
    BufferTooSmall = 6,
    Internal = 7,
}

/// Complex number as two doubles.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdcComplex {
    pub re: f64,
    pub im: f64,
}

impl From<SdcComplex> for Complex64 {
    fn from(c: SdcComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for SdcComplex {
    fn from(c: Complex64) -> Self {
        SdcComplex { re: c.re, im: c.im }
    }
}

/// Opaque clipping-level controller.
pub struct SdcController {
    state: ClippingState,
}

/// Opaque sphere decoder bound to a constellation and antenna count.
pub struct SdcDetector {
    constellation: Constellation,
    m_t: usize,
    decoder: SphereDecoder,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> SdcStatus {
    match e {
        Error::DimensionMismatch(_) | Error::LengthMismatch { .. } | Error::BlockLength { .. } => {
            SdcStatus::DimensionMismatch
        }
        Error::RankDeficient { .. } | Error::DegenerateChannel(_) => SdcStatus::RankDeficient,
        Error::Config { .. } => SdcStatus::Config,
        _ => SdcStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into a status code.
fn guard<F>(f: F) -> SdcStatus
where
    F: FnOnce() -> Result<(), (SdcStatus, String)>,
{
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdcStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            SdcStatus::Internal
        }
    }
}

fn lib_err(e: Error) -> (SdcStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(name: &str) -> (SdcStatus, String) {
    (SdcStatus::NullPointer, format!("`{name}` is null"))
}

/// # Safety
/// `p` must be null or valid for reads of `len` elements.
unsafe fn slice<'a, T>(
    p: *const T,
    len: usize,
    name: &str,
) -> Result<&'a [T], (SdcStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// # Safety
/// `p` must be null or valid for writes of `len` elements.
unsafe fn slice_mut<'a, T>(
    p: *mut T,
    len: usize,
    name: &str,
) -> Result<&'a mut [T], (SdcStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

/// Description of the last failure on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sdc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sdc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must be null or a pointer obtained from this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sdc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Error probability `1 / (1 + e^|L|)` of a hard decision.
///
/// # Safety
/// `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sdc_bit_error_prob(llr_magnitude: f64, out: *mut f64) -> SdcStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = adapt::bit_error_prob(llr_magnitude).map_err(lib_err)?;
        Ok(())
    })
}

/// Block BER estimate from the `n` least reliable of `len` information LLRs.
///
/// # Safety
/// `llrs` must be valid for `len` reads and `out` for one write.
#[no_mangle]
pub unsafe extern "C" fn sdc_estimate_block_ber(
    llrs: *const f64,
    len: usize,
    n: usize,
    out: *mut f64,
) -> SdcStatus {
    guard(|| {
        let llrs = slice(llrs, len, "llrs")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = adapt::estimate_block_ber(llrs, n).map_err(lib_err)?.p_hat;
        Ok(())
    })
}

/// Creates a controller at `l_cl = ln(1/ter - 1)`.
///
/// # Safety
/// `out` must be valid for one write; the handle must be released with
/// [`sdc_controller_free`].
#[no_mangle]
pub unsafe extern "C" fn sdc_controller_new(
    ter: f64,
    mu: f64,
    l_min: f64,
    out: *mut *mut SdcController,
) -> SdcStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let state = adapt::init_clipping(ter, mu, l_min).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SdcController { state }));
        Ok(())
    })
}

/// Applies one controller step with the previous block's BER estimate.
///
/// # Safety
/// `handle` must come from [`sdc_controller_new`].
#[no_mangle]
pub unsafe extern "C" fn sdc_controller_update(
    handle: *mut SdcController,
    p_hat_prev: f64,
) -> SdcStatus {
    guard(|| {
        let h = handle.as_mut().ok_or_else(|| null("handle"))?;
        h.state = adapt::update_clipping(&h.state, p_hat_prev).map_err(lib_err)?;
        Ok(())
    })
}

/// Current clipping level.
///
/// # Safety
/// `handle` must come from [`sdc_controller_new`] and `out` be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sdc_controller_level(
    handle: *const SdcController,
    out: *mut f64,
) -> SdcStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = h.state.l_cl;
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`sdc_controller_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sdc_controller_free(handle: *mut SdcController) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Creates a detector for `m_t` antennas and a constellation of order 2, 4, 16 or 64.
///
/// # Safety
/// `out` must be valid for one write; release with [`sdc_detector_free`].
#[no_mangle]
pub unsafe extern "C" fn sdc_detector_new(
    order: usize,
    m_t: usize,
    out: *mut *mut SdcDetector,
) -> SdcStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if m_t == 0 {
            return Err((SdcStatus::InvalidArgument, "m_t must be positive".into()));
        }
        let constellation = Constellation::from_order(order).map_err(lib_err)?;
        *out = Box::into_raw(Box::new(SdcDetector {
            constellation,
            m_t,
            decoder: SphereDecoder::new(),
        }));
        Ok(())
    })
}

/// Number of LLRs one detection produces (`m_t * bits per symbol`).
///
/// # Safety
/// `handle` must come from [`sdc_detector_new`].
#[no_mangle]
pub unsafe extern "C" fn sdc_detector_num_bits(handle: *const SdcDetector) -> usize {
    handle
        .as_ref()
        .map_or(0, |h| h.m_t * h.constellation.bits_per_symbol())
}

/// Soft detection of one channel use.
///
/// `r` is the `m_t x m_t` upper-triangular factor (row-major) with a real
/// positive diagonal, `y_rot` the rotated received vector of length `m_t`.
/// Pass `clip = INFINITY` for unclipped LLRs. `visited_nodes` may be null.
///
/// # Safety
/// `r` must hold `m_t * m_t` elements, `y_rot` `m_t` elements and `llrs`
/// room for `llrs_len` doubles.
#[no_mangle]
pub unsafe extern "C" fn sdc_detector_detect(
    handle: *mut SdcDetector,
    r: *const SdcComplex,
    y_rot: *const SdcComplex,
    sigma2: f64,
    clip: f64,
    llrs: *mut f64,
    llrs_len: usize,
    visited_nodes: *mut u64,
) -> SdcStatus {
    guard(|| {
        let h = handle.as_mut().ok_or_else(|| null("handle"))?;
        let n = h.m_t;
        let nb = n * h.constellation.bits_per_symbol();
        if llrs_len < nb {
            return Err((
                SdcStatus::BufferTooSmall,
                format!("llrs buffer holds {llrs_len} values, need {nb}"),
            ));
        }
        let r_data: Vec<Complex64> = slice(r, n * n, "r")?.iter().map(|&c| c.into()).collect();
        let y: Vec<Complex64> = slice(y_rot, n, "y_rot")?
            .iter()
            .map(|&c| c.into())
            .collect();
        let out_llrs = slice_mut(llrs, nb, "llrs")?;
        let r_mat = ComplexMatrix::new(n, n, r_data).map_err(lib_err)?;
        let res = h
            .decoder
            .detect(&DetectionProblem {
                r: &r_mat,
                y_rot: &y,
                constellation: &h.constellation,
                sigma2,
                clip,
            })
            .map_err(lib_err)?;
        out_llrs.copy_from_slice(&res.llrs);
        if let Some(v) = visited_nodes.as_mut() {
            *v = res.visited_nodes;
        }
        Ok(())
    })
}

/// # Safety
/// `handle` must be null or come from [`sdc_detector_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn sdc_detector_free(handle: *mut SdcDetector) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Thin QR of an `m_r x m_t` row-major matrix with a real positive diagonal of `r`.
///
/// # Safety
/// `h` and `q` must hold `m_r * m_t` elements, `r` must hold `m_t * m_t`.
#[no_mangle]
pub unsafe extern "C" fn sdc_qr_decompose(
    h: *const SdcComplex,
    m_r: usize,
    m_t: usize,
    q: *mut SdcComplex,
    r: *mut SdcComplex,
) -> SdcStatus {
    guard(|| {
        let data: Vec<Complex64> = slice(h, m_r * m_t, "h")?
            .iter()
            .map(|&c| c.into())
            .collect();
        let q_out = slice_mut(q, m_r * m_t, "q")?;
        let r_out = slice_mut(r, m_t * m_t, "r")?;
        let mat = ComplexMatrix::new(m_r, m_t, data).map_err(lib_err)?;
        let f = linalg::qr_decompose(&mat).map_err(lib_err)?;
        for (dst, &src) in q_out.iter_mut().zip(f.q.as_slice()) {
            *dst = src.into();
        }
        for (dst, &src) in r_out.iter_mut().zip(f.r.as_slice()) {
            *dst = src.into();
        }
        Ok(())
    })
}

/// Log-MAP decoding of `2K` coded-bit a-priori LLRs.
///
/// Writes `K` information LLRs to `app_info`; `app_coded` may be null,
/// otherwise it receives `2K` coded-bit LLRs.
///
/// # Safety
/// `a_priori` must hold `len` doubles, `app_info` `len / 2` and `app_coded`
/// (when non-null) `len`.
#[no_mangle]
pub unsafe extern "C" fn sdc_bcjr_decode(
    a_priori: *const f64,
    len: usize,
    app_info: *mut f64,
    app_coded: *mut f64,
) -> SdcStatus {
    guard(|| {
        let input = slice(a_priori, len, "a_priori")?;
        let out = fec::bcjr_decode(input).map_err(lib_err)?;
        slice_mut(app_info, out.app_info.len(), "app_info")?.copy_from_slice(&out.app_info);
        if !app_coded.is_null() {
            slice_mut(app_coded, out.app_coded.len(), "app_coded")?.copy_from_slice(&out.app_coded);
        }
        Ok(())
    })
}

/// Runs an experiment described by flat `key = value` text and returns the
/// CSV output in `*csv_out` (free with [`sdc_string_free`]).
///
/// # Safety
/// `config_text` must be a NUL-terminated string and `csv_out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn sdc_run_experiment(
    config_text: *const c_char,
    csv_out: *mut *mut c_char,
) -> SdcStatus {
    guard(|| {
        if config_text.is_null() {
            return Err(null("config_text"));
        }
        let out = csv_out.as_mut().ok_or_else(|| null("csv_out"))?;
        let text = CStr::from_ptr(config_text).to_str().map_err(|_| {
            (
                SdcStatus::InvalidArgument,
                "config text is not UTF-8".to_string(),
            )
        })?;
        let cfg = config::from_text(text).map_err(lib_err)?;
        let report = harness::run_experiment(&cfg).map_err(lib_err)?;
        let mut buf = Vec::new();
        csv::write_csv(&mut buf, &report.rows).map_err(|e| (SdcStatus::Internal, e.to_string()))?;
        let s = CString::new(buf).map_err(|e| (SdcStatus::Internal, e.to_string()))?;
        *out = s.into_raw();
        Ok(())
    })
}
