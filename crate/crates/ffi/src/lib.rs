//! C ABI over `romcover`.
//!
//! Every fallible call returns an [`RcStatus`] and writes its result through
//! an out pointer. On failure the message is kept per thread and can be read
//! with [`rc_last_error`]. Instances are opaque handles owned by the caller
//! and released with [`rc_instance_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use romcover::gen::GeneratedInstance;
use romcover::harness::estimate_rom;
use romcover::opt::{exact_rom_value, DEFAULT_NODE_BUDGET};
use romcover::rng::seeded;
use romcover::talent::{lambert_w0, lemma8_bound, theorem10_lower_bound, zeta};
use romcover::{algorithm1_schedule, greedy_schedule, opt_exact, opt_upper_bound, Algo, Error, Instance, Order, Provenance};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    TooLarge = 3,
    Domain = 4,
    LogDomainUnsupported = 5,
    Exhausted = 6,
    Io = 7,
    Parse = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcAlgo {
    Greedy = 0,
    Algorithm1 = 1,
}

/// Opaque instance handle.
pub struct RcInstance(Instance);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RcStatus {
    match e {
        Error::InvalidArgument(_) | Error::Strategy(_) => RcStatus::InvalidArgument,
        Error::TooLarge { .. } => RcStatus::TooLarge,
        Error::Domain(_) => RcStatus::Domain,
        Error::LogDomainUnsupported(_) => RcStatus::LogDomainUnsupported,
        Error::Exhausted { .. } => RcStatus::Exhausted,
        Error::Io(_) => RcStatus::Io,
        Error::Json(_) | Error::Csv(_) => RcStatus::Parse,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, records any failure and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RcStatus::Ok
        }
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            RcStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Err(_) => {
            set_error("internal panic".to_string());
            RcStatus::Panic
        }
    }
}

fn put<T>(out: *mut T, v: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    unsafe { out.write(v) };
    Ok(())
}

unsafe fn instance<'a>(p: *const RcInstance) -> Result<&'a Instance, Fail> {
    p.as_ref().map(|h| &h.0).ok_or(Fail::Null("instance"))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn order_from(perm: *const usize, len: usize, inst: &Instance) -> Result<Order, Fail> {
    if perm.is_null() {
        return Ok(Order::given(inst.n()));
    }
    let p = slice(perm, len, "perm")?.to_vec();
    if p.len() != inst.n() {
        return Err(Error::InvalidArgument(format!("order has {} entries, instance has {}", p.len(), inst.n())).into());
    }
    Ok(Order::new(p, Provenance::AdversarialGiven)?)
}

fn algo_of(algo: RcAlgo, forced_t: i32, has_forced_t: bool) -> Algo {
    match algo {
        RcAlgo::Greedy => Algo::Greedy,
        RcAlgo::Algorithm1 => Algo::Algorithm1 {
            forced_t: has_forced_t.then_some(forced_t),
        },
    }
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn rc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// New linear-size instance with `m` machines and `n` sizes.
///
/// # Safety
/// `sizes` must point to `n` doubles (may be NULL when `n == 0`); `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_instance_new(m: usize, sizes: *const f64, n: usize, out: *mut *mut RcInstance) -> RcStatus {
    guard(|| {
        let s = slice(sizes, n, "sizes")?.to_vec();
        let inst = Instance::new(m, s)?;
        put(out, Box::into_raw(Box::new(RcInstance(inst))), "out")
    })
}

/// New instance whose sizes are natural-log exponents (`-INFINITY` is a zero job).
///
/// # Safety
/// As for [`rc_instance_new`].
#[no_mangle]
pub unsafe extern "C" fn rc_instance_new_log(
    m: usize,
    exponents: *const f64,
    n: usize,
    out: *mut *mut RcInstance,
) -> RcStatus {
    guard(|| {
        let s = slice(exponents, n, "exponents")?.to_vec();
        let inst = Instance::new_log(m, s)?;
        put(out, Box::into_raw(Box::new(RcInstance(inst))), "out")
    })
}

/// Parse an instance from JSON text `{"m": .., "sizes": [..]}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_instance_from_json(json: *const c_char, out: *mut *mut RcInstance) -> RcStatus {
    guard(|| {
        if json.is_null() {
            return Err(Fail::Null("json"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Error::InvalidArgument(format!("json is not UTF-8: {e}")))?;
        let inst = Instance::from_json_str(text)?;
        put(out, Box::into_raw(Box::new(RcInstance(inst))), "out")
    })
}

/// Release an instance. NULL is ignored.
///
/// # Safety
/// `inst` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn rc_instance_free(inst: *mut RcInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// # Safety
/// `inst` must be a live handle or NULL (then 0 is returned).
#[no_mangle]
pub unsafe extern "C" fn rc_instance_m(inst: *const RcInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.0.m())
}

/// # Safety
/// `inst` must be a live handle or NULL (then 0 is returned).
#[no_mangle]
pub unsafe extern "C" fn rc_instance_n(inst: *const RcInstance) -> usize {
    inst.as_ref().map_or(0, |h| h.0.n())
}

/// Exact offline optimum by branch and bound. `node_budget == 0` picks the
/// library default.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_opt_exact(inst: *const RcInstance, node_budget: u64, out: *mut f64) -> RcStatus {
    guard(|| {
        let budget = if node_budget == 0 { DEFAULT_NODE_BUDGET } else { node_budget };
        let r = opt_exact(instance(inst)?, budget)?;
        put(out, r.value, "out")
    })
}

/// Average load, an upper bound on the optimum.
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_opt_upper_bound(inst: *const RcInstance, out: *mut f64) -> RcStatus {
    guard(|| put(out, opt_upper_bound(instance(inst)?), "out"))
}

/// Greedy's minimum load in the order `perm` (job indices, length `n`), or
/// in listed order when `perm` is NULL.
///
/// # Safety
/// `inst` must be a live handle; `perm`, if not NULL, must point to `n`
/// entries; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_greedy_min_load(
    inst: *const RcInstance,
    perm: *const usize,
    perm_len: usize,
    out: *mut f64,
) -> RcStatus {
    guard(|| {
        let inst = instance(inst)?;
        let order = order_from(perm, perm_len, inst)?;
        put(out, greedy_schedule(inst, &order).min_load(), "out")
    })
}

/// One run of Algorithm 1 seeded with `seed`. The guess is drawn unless
/// `has_forced_t` is set, in which case `forced_t` is used.
///
/// # Safety
/// As for [`rc_greedy_min_load`].
#[no_mangle]
pub unsafe extern "C" fn rc_algorithm1_min_load(
    inst: *const RcInstance,
    perm: *const usize,
    perm_len: usize,
    seed: u64,
    forced_t: i32,
    has_forced_t: bool,
    out: *mut f64,
) -> RcStatus {
    guard(|| {
        let inst = instance(inst)?;
        let order = order_from(perm, perm_len, inst)?;
        let (s, _) = algorithm1_schedule(inst, &order, seeded(seed), has_forced_t.then_some(forced_t), None)?;
        put(out, s.min_load(), "out")
    })
}

/// Exact expected minimum load over uniformly random orders (n <= 8).
///
/// # Safety
/// `inst` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_exact_rom_value(
    inst: *const RcInstance,
    algo: RcAlgo,
    forced_t: i32,
    has_forced_t: bool,
    out: *mut f64,
) -> RcStatus {
    guard(|| {
        let v = exact_rom_value(instance(inst)?, algo_of(algo, forced_t, has_forced_t))?;
        put(out, v, "out")
    })
}

/// Monte Carlo mean minimum load over `trials` random orders, with the
/// 95% half-width.
///
/// # Safety
/// `inst` must be a live handle; `mean` and `ci95` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_estimate_rom(
    inst: *const RcInstance,
    algo: RcAlgo,
    trials: usize,
    seed: u64,
    mean: *mut f64,
    ci95: *mut f64,
) -> RcStatus {
    guard(|| {
        let gi = GeneratedInstance::from_parts(instance(inst)?.clone(), None)?;
        let r = estimate_rom(&gi, algo_of(algo, 0, false), trials, seed)?;
        put(mean, r.mean_min_load.unwrap_or(f64::NAN), "mean")?;
        put(ci95, r.ci95.unwrap_or(f64::NAN), "ci95")
    })
}

/// Riemann zeta for real `s > 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_zeta(s: f64, out: *mut f64) -> RcStatus {
    guard(|| put(out, zeta(s)?, "out"))
}

/// Principal branch of the Lambert W function.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_lambert_w0(x: f64, out: *mut f64) -> RcStatus {
    guard(|| put(out, lambert_w0(x)?, "out"))
}

/// Upper bound on the optimal expected points of the talent contest.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_talent_points_bound(k: usize, t: u32, out: *mut f64) -> RcStatus {
    guard(|| put(out, lemma8_bound(k, t)?, "out"))
}

/// Lower bound on the random-order competitive ratio for `m` machines.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rc_ratio_lower_bound(m: u64, out: *mut f64) -> RcStatus {
    guard(|| put(out, theorem10_lower_bound(m)?, "out"))
}
