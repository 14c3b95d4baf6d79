//! C ABI over `onebit`.
//!
//! Every function returns an [`OnebitStatus`] and writes its result through an
//! out-pointer. On failure the message is kept in a thread-local buffer and
//! read back with [`onebit_last_error`]. Panics are caught at the boundary and
//! reported as `ONEBIT_STATUS_INTERNAL`.
//!
//! Handles ([`OnebitPmf`], [`OnebitQSampler`], [`OnebitRadialSampler`]) are
//! opaque; each has a matching `*_free` that accepts null.

use onebit::cli::{evaluate, Operation, Outcome, Point};
use onebit::coherent::{self, RadialSampler};
use onebit::covariance::{self, CorrelationVector, UniformQSampler};
use onebit::orthant::{self, OutcomeDistribution};
use onebit::rng::{derive_seed, stream_rng, StreamRng};
use onebit::simulator::{self, Prior};
use onebit::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitStatus {
    Ok = 0,
    InvalidParameter = 1,
    Domain = 2,
    Unsupported = 3,
    NonConvergence = 4,
    Factorization = 5,
    NullPointer = 6,
    BufferTooSmall = 7,
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitCoherentMethod {
    Exact = 0,
    Spherical = 1,
    LowSnr = 2,
    HighSnr = 3,
    LargeNt = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitNoncoherentMethod {
    Exact = 0,
    LbUniform = 1,
    LbIndep = 2,
    LbIndepExact = 3,
    UbGenie = 4,
    LowSnr = 5,
    LargeTLb = 6,
    LargeTUb = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnebitPrior {
    Jeffreys = 0,
    Uniform = 1,
}

/// A capacity value in bits per channel use.
///
/// `std_err` is NaN for deterministic methods. The three terms are NaN when
/// `has_terms` is 0; otherwise they sum to `bits`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OnebitCapacity {
    pub bits: f64,
    pub std_err: f64,
    pub has_terms: u8,
    pub term_dimension: f64,
    pub term_volume: f64,
    pub term_alpha: f64,
}

/// A Monte Carlo estimate and its standard error.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct OnebitEstimate {
    pub value: f64,
    pub std_err: f64,
}

pub struct OnebitPmf(OutcomeDistribution);

pub struct OnebitQSampler {
    inner: UniformQSampler,
    rng: StreamRng,
    len: usize,
}

pub struct OnebitRadialSampler {
    inner: RadialSampler,
    rng: StreamRng,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> OnebitStatus {
    match e {
        Error::InvalidParameter(_) | Error::Config(_) => OnebitStatus::InvalidParameter,
        Error::Domain { .. } => OnebitStatus::Domain,
        Error::Unsupported(_) => OnebitStatus::Unsupported,
        Error::NonConvergence { .. } => OnebitStatus::NonConvergence,
        Error::Factorization(_) => OnebitStatus::Factorization,
        Error::Io(_) => OnebitStatus::Internal,
    }
}

struct Fail(OnebitStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(name: &str) -> Fail {
    Fail(OnebitStatus::NullPointer, format!("{name} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> OnebitStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            OnebitStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            OnebitStatus::Internal
        }
    }
}

unsafe fn write<T>(out: *mut T, v: T, name: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(v);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return if len == 0 { Ok(&[]) } else { Err(null(name)) };
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn count(v: u64, name: &str) -> Result<usize, Fail> {
    usize::try_from(v).map_err(|_| Fail(OnebitStatus::InvalidParameter, format!("{name} too large")))
}

fn capacity(o: Outcome) -> OnebitCapacity {
    let (has, d, v, a) = match o.terms {
        Some(t) => (1, t.dimension, t.volume, t.alpha),
        None => (0, f64::NAN, f64::NAN, f64::NAN),
    };
    OnebitCapacity {
        bits: o.value_bits,
        std_err: o.std_err.unwrap_or(f64::NAN),
        has_terms: has,
        term_dimension: d,
        term_volume: v,
        term_alpha: a,
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn onebit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or an empty string.
///
/// The pointer stays valid until the next call into the library on the same
/// thread.
#[no_mangle]
pub extern "C" fn onebit_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// `ζ_k(t) = E[S^k ξ(tS)]` for `k ∈ {0, 2}` and `t ≥ 0`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_zeta(k: u32, t: f64, out: *mut f64) -> OnebitStatus {
    guard(|| write(out, coherent::zeta(k, t)?, "out"))
}

/// Coherent Fisher-information integral `α(snr, n_t)`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_alpha_coherent(snr: f64, nt: u32, out: *mut f64) -> OnebitStatus {
    guard(|| write(out, coherent::alpha_coherent(snr, nt)?, "out"))
}

/// Coherent capacity at `n_r` receive antennas.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_capacity_coherent(
    snr: f64,
    nt: u32,
    nr: u64,
    method: OnebitCoherentMethod,
    out: *mut OnebitCapacity,
) -> OnebitStatus {
    guard(|| {
        let m = match method {
            OnebitCoherentMethod::Exact => "exact",
            OnebitCoherentMethod::Spherical => "spherical",
            OnebitCoherentMethod::LowSnr => "low-snr",
            OnebitCoherentMethod::HighSnr => "high-snr",
            OnebitCoherentMethod::LargeNt => "large-nt",
        };
        let p = Point { snr: Some(snr), nt: Some(nt as usize), nr: Some(nr), ..Point::default() };
        write(out, capacity(evaluate(Operation::CapacityCoherent, &p, m, 0, 0)?), "out")
    })
}

/// Non-coherent capacity, bound or approximation at coherence length `t`.
///
/// `samples` and `seed` are used by `ONEBIT_NONCOHERENT_METHOD_EXACT` when
/// `t = 3`; other methods ignore them.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_capacity_noncoherent(
    snr: f64,
    t: u32,
    nt: u32,
    nr: u64,
    method: OnebitNoncoherentMethod,
    samples: u64,
    seed: u64,
    out: *mut OnebitCapacity,
) -> OnebitStatus {
    guard(|| {
        let m = match method {
            OnebitNoncoherentMethod::Exact => "exact",
            OnebitNoncoherentMethod::LbUniform => "lb-uniform",
            OnebitNoncoherentMethod::LbIndep => "lb-indep",
            OnebitNoncoherentMethod::LbIndepExact => "lb-indep-exact",
            OnebitNoncoherentMethod::UbGenie => "ub-genie",
            OnebitNoncoherentMethod::LowSnr => "low-snr",
            OnebitNoncoherentMethod::LargeTLb => "large-t-lb",
            OnebitNoncoherentMethod::LargeTUb => "large-t-ub",
        };
        let p = Point {
            snr: Some(snr),
            t: Some(t as usize),
            nt: Some(nt as usize),
            nr: Some(nr),
            ..Point::default()
        };
        write(out, capacity(evaluate(Operation::CapacityNoncoherent, &p, m, samples, seed)?), "out")
    })
}

/// Closed-form `α` for `T = 2`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_alpha_t2(gamma: f64, out: *mut f64) -> OnebitStatus {
    guard(|| write(out, onebit::noncoherent::alpha_t2(gamma)?, "out"))
}

/// Monte Carlo `α` for `T = 3`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_alpha_t3(gamma: f64, samples: u64, seed: u64, out: *mut OnebitEstimate) -> OnebitStatus {
    guard(|| {
        let e = onebit::noncoherent::alpha_t3(gamma, count(samples, "samples")?, seed)?;
        write(out, OnebitEstimate { value: e.value, std_err: e.std_err }, "out")
    })
}

/// Exact volume of `Q_γ` for `t ∈ {2, 3, 4}`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_vol_q_exact(t: u32, gamma: f64, out: *mut f64) -> OnebitStatus {
    guard(|| write(out, covariance::vol_q_exact(t as usize, gamma)?, "out"))
}

/// Monte Carlo volume of `Q_γ`.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_vol_q_mc(t: u32, gamma: f64, samples: u64, seed: u64, out: *mut OnebitEstimate) -> OnebitStatus {
    guard(|| {
        let e = covariance::vol_q_mc(t as usize, gamma, count(samples, "samples")?, seed)?;
        write(out, OnebitEstimate { value: e.value, std_err: e.std_err }, "out")
    })
}

/// Exact mutual information of one `T = 2` block, in bits per block.
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_mi_exact_t2(nr: u64, gamma: f64, prior: OnebitPrior, out: *mut f64) -> OnebitStatus {
    guard(|| {
        let prior = match prior {
            OnebitPrior::Jeffreys => Prior::Jeffreys,
            OnebitPrior::Uniform => Prior::Uniform,
        };
        write(out, simulator::mi_exact_t2(count(nr, "nr")?, gamma, prior, None)?, "out")
    })
}

fn correlation(t: u32, q: *const f64, len: usize) -> Result<CorrelationVector, Fail> {
    let q = unsafe { slice(q, len, "q")? };
    Ok(CorrelationVector::new(t as usize, q.to_vec())?)
}

fn boxed_pmf(d: OutcomeDistribution, out: *mut *mut OnebitPmf) -> Result<(), Fail> {
    unsafe { write(out, Box::into_raw(Box::new(OnebitPmf(d))), "out") }
}

/// Sign-pattern distribution of `sign(z)`, `z ~ N(0, Σ(q))`, for `t ≤ 3`.
///
/// `q` holds the `t(t−1)/2` correlations in row-major upper-triangle order.
///
/// # Safety
/// `q` must point to `len` readable doubles; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_pmf_exact(t: u32, q: *const f64, len: usize, out: *mut *mut OnebitPmf) -> OnebitStatus {
    guard(|| boxed_pmf(orthant::pmf_exact(&correlation(t, q, len)?)?, out))
}

/// Monte Carlo sign-pattern distribution for any `t`.
///
/// # Safety
/// As for [`onebit_pmf_exact`].
#[no_mangle]
pub unsafe extern "C" fn onebit_pmf_mc(
    t: u32,
    q: *const f64,
    len: usize,
    samples: u64,
    seed: u64,
    out: *mut *mut OnebitPmf,
) -> OnebitStatus {
    guard(|| boxed_pmf(orthant::pmf_mc(&correlation(t, q, len)?, count(samples, "samples")?, seed)?, out))
}

/// Number of patterns, `2^t`.
///
/// # Safety
/// `pmf` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn onebit_pmf_len(pmf: *const OnebitPmf, out: *mut usize) -> OnebitStatus {
    guard(|| {
        let p = pmf.as_ref().ok_or_else(|| null("pmf"))?;
        write(out, p.0.pmf().len(), "out")
    })
}

/// Probability of pattern `index`; bit `k` of `index` set means `y_k = −1`.
///
/// # Safety
/// `pmf` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn onebit_pmf_get(pmf: *const OnebitPmf, index: usize, out: *mut f64) -> OnebitStatus {
    guard(|| {
        let p = pmf.as_ref().ok_or_else(|| null("pmf"))?;
        let v = p.0.pmf().get(index).copied().ok_or_else(|| {
            Fail(OnebitStatus::InvalidParameter, format!("index {index} out of range"))
        })?;
        write(out, v, "out")
    })
}

/// Copies the whole distribution into `buf`, which must hold `2^t` doubles.
///
/// # Safety
/// `pmf` must be null or a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_pmf_copy(pmf: *const OnebitPmf, buf: *mut f64, len: usize) -> OnebitStatus {
    guard(|| {
        let p = pmf.as_ref().ok_or_else(|| null("pmf"))?.0.pmf();
        if len < p.len() {
            return Err(Fail(OnebitStatus::BufferTooSmall, format!("need {} entries, got {len}", p.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(p.as_ptr(), buf, p.len());
        Ok(())
    })
}

/// # Safety
/// `pmf` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn onebit_pmf_free(pmf: *mut OnebitPmf) {
    if !pmf.is_null() {
        drop(Box::from_raw(pmf));
    }
}

/// Uniform sampler on `Q_γ`. Draws depend only on `seed` and the call order.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_q_sampler_new(t: u32, gamma: f64, seed: u64, out: *mut *mut OnebitQSampler) -> OnebitStatus {
    guard(|| {
        let inner = UniformQSampler::new(t as usize, gamma)?;
        let s = OnebitQSampler {
            inner,
            rng: stream_rng(derive_seed(seed, "ffi-q-sampler", 0), 0),
            len: covariance::pair_count(t as usize),
        };
        write(out, Box::into_raw(Box::new(s)), "out")
    })
}

/// Writes the next draw, `t(t−1)/2` doubles, into `buf`.
///
/// # Safety
/// `sampler` must be null or a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_q_sampler_next(sampler: *mut OnebitQSampler, buf: *mut f64, len: usize) -> OnebitStatus {
    guard(|| {
        let s = sampler.as_mut().ok_or_else(|| null("sampler"))?;
        if len < s.len {
            return Err(Fail(OnebitStatus::BufferTooSmall, format!("need {} entries, got {len}", s.len)));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, s.len);
        s.inner.fill(&mut s.rng, dst);
        Ok(())
    })
}

/// # Safety
/// `sampler` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn onebit_q_sampler_free(sampler: *mut OnebitQSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// Sampler for the capacity-achieving coherent input law at `(snr, n_t)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_radial_sampler_new(
    snr: f64,
    nt: u32,
    seed: u64,
    out: *mut *mut OnebitRadialSampler,
) -> OnebitStatus {
    guard(|| {
        let s = OnebitRadialSampler {
            inner: RadialSampler::new(snr, nt)?,
            rng: stream_rng(derive_seed(seed, "ffi-radial-sampler", 0), 0),
        };
        write(out, Box::into_raw(Box::new(s)), "out")
    })
}

/// Writes the next input vector, `n_t` doubles, into `buf`.
///
/// # Safety
/// `sampler` must be null or a live handle; `buf` must be valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn onebit_radial_sampler_next(
    sampler: *mut OnebitRadialSampler,
    buf: *mut f64,
    len: usize,
) -> OnebitStatus {
    guard(|| {
        let s = sampler.as_mut().ok_or_else(|| null("sampler"))?;
        let nt = s.inner.nt() as usize;
        if len < nt {
            return Err(Fail(OnebitStatus::BufferTooSmall, format!("need {nt} entries, got {len}")));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let x = s.inner.sample(&mut s.rng);
        ptr::copy_nonoverlapping(x.as_ptr(), buf, nt);
        Ok(())
    })
}

/// # Safety
/// `sampler` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn onebit_radial_sampler_free(sampler: *mut OnebitRadialSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}
