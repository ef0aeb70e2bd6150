//! C interface to `btsbm`.
//!
//! Every function returns a [`BtsbmStatus`]; on failure a message for the
//! calling thread is available from [`btsbm_last_error`]. Handles are opaque
//! and must be released with their `_free` function. Panics never cross the
//! boundary; they are reported as `BTSBM_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use btsbm::compare::SeDeltaMethod;
use btsbm::io::{compare_models, load_matches};
use btsbm::postprocess::{consensus_partition, k_posterior, relabel};
use btsbm::prior::{mean_k, pmf_k_table, var_k, GnedinParams};
use btsbm::sampler::{run_chains, RescaleMode};
use btsbm::{ComparisonData, Error, Hyperparameters, SamplerConfig, Trace};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BtsbmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidConfig = 2,
    InvalidData = 3,
    Numeric = 4,
    Io = 5,
    BufferTooSmall = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Opaque comparison data.
pub struct BtsbmData(ComparisonData);

/// Opaque posterior trace.
pub struct BtsbmTrace(Trace);

/// Sampler settings. A non-positive `b` selects the aligned rate
/// `exp(digamma(a))`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BtsbmConfig {
    pub total_iters: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub n_chains: usize,
    pub seed: u64,
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    /// Nonzero to renormalize strengths inside the chain every sweep.
    pub rescale_in_chain: u8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BtsbmComparison {
    pub elpd_btsbm: f64,
    pub se_btsbm: f64,
    pub elpd_bt: f64,
    pub se_bt: f64,
    pub delta: f64,
    pub se_delta: f64,
    pub n_bad_k_btsbm: usize,
    pub n_bad_k_bt: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BtsbmStatus {
    match e {
        Error::File { .. } | Error::Io(_) => BtsbmStatus::Io,
        Error::Range { .. } => BtsbmStatus::OutOfRange,
        _ => match e.exit_code() {
            2 => BtsbmStatus::InvalidConfig,
            4 => BtsbmStatus::Numeric,
            _ => BtsbmStatus::InvalidData,
        },
    }
}

struct Fail(BtsbmStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> BtsbmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BtsbmStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(&format!("internal panic: {msg}"));
            BtsbmStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(BtsbmStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_slice<'a, T>(p: *mut T, len: usize, need: usize, what: &str) -> Result<&'a mut [T], Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    if len < need {
        return Err(Fail(
            BtsbmStatus::BufferTooSmall,
            format!("{what} holds {len} entries, {need} needed"),
        ));
    }
    Ok(std::slice::from_raw_parts_mut(p, need))
}

unsafe fn write<T>(p: *mut T, v: T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(v);
    Ok(())
}

/// Message describing the last failure on this thread; empty after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn btsbm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn btsbm_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Build data from `len` results; `counts` may be null (each row counts once).
///
/// # Safety
/// `winners` and `losers` (and `counts` if not null) must point to `len`
/// readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_data_from_results(
    n_items: usize,
    winners: *const u32,
    losers: *const u32,
    counts: *const u32,
    len: usize,
    out: *mut *mut BtsbmData,
) -> BtsbmStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if len > 0 && (winners.is_null() || losers.is_null()) {
            return Err(null("winners/losers"));
        }
        let (w, l) = if len == 0 {
            (&[][..], &[][..])
        } else {
            (std::slice::from_raw_parts(winners, len), std::slice::from_raw_parts(losers, len))
        };
        let c = if counts.is_null() || len == 0 {
            None
        } else {
            Some(std::slice::from_raw_parts(counts, len))
        };
        let rows = (0..len).map(|r| (w[r] as usize, l[r] as usize, c.map_or(1, |c| c[r])));
        let data = ComparisonData::from_results(n_items, rows)?;
        *out = Box::into_raw(Box::new(BtsbmData(data)));
        Ok(())
    })
}

/// Load a `winner,loser[,count]` CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_data_load_csv(path: *const c_char, out: *mut *mut BtsbmData) -> BtsbmStatus {
    guard(|| {
        if path.is_null() || out.is_null() {
            return Err(null("path/out"));
        }
        let p = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Fail(BtsbmStatus::InvalidData, "path is not UTF-8".into()))?;
        let data = load_matches(Path::new(p))?;
        *out = Box::into_raw(Box::new(BtsbmData(data)));
        Ok(())
    })
}

/// # Safety
/// `data` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_data_shape(data: *const BtsbmData, n_items: *mut usize, n_edges: *mut usize) -> BtsbmStatus {
    guard(|| {
        let d = &deref(data, "data")?.0;
        write(n_items, d.n_items(), "n_items")?;
        write(n_edges, d.n_edges(), "n_edges")
    })
}

/// # Safety
/// `data` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn btsbm_data_free(data: *mut BtsbmData) {
    if !data.is_null() {
        drop(Box::from_raw(data));
    }
}

/// Prior probabilities of K = 1..n written to `out[0..n]`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn btsbm_prior_pmf(n: usize, gamma: f64, out: *mut f64, len: usize) -> BtsbmStatus {
    guard(|| {
        let params = GnedinParams::new(gamma, n).map_err(Error::into_config)?;
        let pmf = pmf_k_table(&params);
        out_slice(out, len, pmf.len(), "out")?.copy_from_slice(&pmf);
        Ok(())
    })
}

/// # Safety
/// `mean` and `var` must be writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_prior_moments(n: usize, gamma: f64, mean: *mut f64, var: *mut f64) -> BtsbmStatus {
    guard(|| {
        let params = GnedinParams::new(gamma, n).map_err(Error::into_config)?;
        write(mean, mean_k(&params), "mean")?;
        write(var, var_k(&params), "var")
    })
}

/// Defaults: 30000 sweeps, 10000 burn-in, thin 1, one chain, seed 1,
/// a = 2 with the aligned rate, gamma = 0.8, output-only rescaling.
#[no_mangle]
pub extern "C" fn btsbm_config_default() -> BtsbmConfig {
    let d = SamplerConfig::default();
    BtsbmConfig {
        total_iters: d.total_iters,
        burn_in: d.burn_in,
        thin: d.thin,
        n_chains: d.n_chains,
        seed: d.seed,
        a: d.hyper.a,
        b: 0.0,
        gamma: d.hyper.gamma,
        rescale_in_chain: 0,
    }
}

fn sampler_config(c: &BtsbmConfig) -> Result<SamplerConfig, Fail> {
    let hyper = if c.b > 0.0 {
        Hyperparameters::new(c.a, c.b, c.gamma)
    } else {
        Hyperparameters::aligned(c.a, c.gamma)
    }
    .map_err(Error::into_config)?;
    let cfg = SamplerConfig {
        total_iters: c.total_iters,
        burn_in: c.burn_in,
        thin: c.thin,
        hyper,
        seed: c.seed,
        n_chains: c.n_chains,
        rescale: if c.rescale_in_chain != 0 {
            RescaleMode::InChain
        } else {
            RescaleMode::OutputOnly
        },
    };
    cfg.validate().map_err(Error::into_config)?;
    Ok(cfg)
}

/// Run the clustered-model sampler.
///
/// # Safety
/// `data` must be a live handle, `config` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_fit(
    data: *const BtsbmData,
    config: *const BtsbmConfig,
    out: *mut *mut BtsbmTrace,
) -> BtsbmStatus {
    guard(|| {
        let d = &deref(data, "data")?.0;
        let cfg = sampler_config(deref(config, "config")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let trace = run_chains(d, &cfg)?;
        *out = Box::into_raw(Box::new(BtsbmTrace(trace)));
        Ok(())
    })
}

/// Fit both models and compare them by PSIS-LOO; the standard error of the
/// difference uses the halved formula.
///
/// # Safety
/// `data` must be a live handle, `config` readable, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_compare(
    data: *const BtsbmData,
    config: *const BtsbmConfig,
    out: *mut BtsbmComparison,
) -> BtsbmStatus {
    guard(|| {
        let d = &deref(data, "data")?.0;
        let cfg = sampler_config(deref(config, "config")?)?;
        if out.is_null() {
            return Err(null("out"));
        }
        let c = compare_models(d, &cfg, SeDeltaMethod::Halved)?;
        *out = BtsbmComparison {
            elpd_btsbm: c.bt_sbm.elpd,
            se_btsbm: c.bt_sbm.se,
            elpd_bt: c.bt.elpd,
            se_bt: c.bt.se,
            delta: c.delta.delta,
            se_delta: c.delta.se_delta,
            n_bad_k_btsbm: c.bt_sbm.n_bad_k,
            n_bad_k_bt: c.bt.n_bad_k,
        };
        Ok(())
    })
}

/// # Safety
/// `trace` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_trace_shape(
    trace: *const BtsbmTrace,
    n_draws: *mut usize,
    n_items: *mut usize,
    max_k: *mut usize,
) -> BtsbmStatus {
    guard(|| {
        let t = &deref(trace, "trace")?.0;
        write(n_draws, t.len(), "n_draws")?;
        write(n_items, t.n_items(), "n_items")?;
        write(max_k, t.k_values().into_iter().max().unwrap_or(0), "max_k")
    })
}

fn draw_at(t: &Trace, draw: usize) -> Result<&btsbm::sampler::Draw, Fail> {
    t.draws.get(draw).ok_or_else(|| {
        Fail(
            BtsbmStatus::OutOfRange,
            format!("draw {draw} out of range for {} draws", t.len()),
        )
    })
}

/// Block labels (0-based) of one draw into `labels[0..n_items]`.
///
/// # Safety
/// `trace` must be a live handle; `labels` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn btsbm_trace_labels(
    trace: *const BtsbmTrace,
    draw: usize,
    labels: *mut u32,
    len: usize,
) -> BtsbmStatus {
    guard(|| {
        let d = draw_at(&deref(trace, "trace")?.0, draw)?;
        let out = out_slice(labels, len, d.partition.n_items(), "labels")?;
        for (o, &l) in out.iter_mut().zip(d.partition.labels()) {
            *o = l as u32;
        }
        Ok(())
    })
}

/// Block strengths of one draw (geometric mean one) into `out[0..K]`; K is
/// written to `k`.
///
/// # Safety
/// `trace` must be a live handle; `out` must hold `len` values; `k` writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_trace_strengths(
    trace: *const BtsbmTrace,
    draw: usize,
    out: *mut f64,
    len: usize,
    k: *mut usize,
) -> BtsbmStatus {
    guard(|| {
        let d = draw_at(&deref(trace, "trace")?.0, draw)?;
        write(k, d.k(), "k")?;
        out_slice(out, len, d.k(), "out")?.copy_from_slice(d.strengths.values());
        Ok(())
    })
}

/// Posterior probabilities of K = 1..max_k into `out[0..max_k]`, plus the
/// mode (smaller K on ties).
///
/// # Safety
/// `trace` must be a live handle; `out` must hold `len` values; `mode` writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_trace_k_pmf(
    trace: *const BtsbmTrace,
    out: *mut f64,
    len: usize,
    mode: *mut usize,
) -> BtsbmStatus {
    guard(|| {
        let t = &deref(trace, "trace")?.0;
        let kp = k_posterior(&t.k_values())?;
        let max_k = kp.pmf.keys().next_back().copied().unwrap_or(0);
        let dst = out_slice(out, len, max_k, "out")?;
        dst.fill(0.0);
        for (&k, &p) in &kp.pmf {
            dst[k - 1] = p;
        }
        write(mode, kp.mode, "mode")
    })
}

/// Partition minimizing the posterior expected variation of information,
/// as 0-based labels in `labels[0..n_items]`.
///
/// # Safety
/// `trace` must be a live handle; `labels` must hold `len` values; `k` and
/// `expected_vi` writable.
#[no_mangle]
pub unsafe extern "C" fn btsbm_trace_consensus(
    trace: *const BtsbmTrace,
    labels: *mut u32,
    len: usize,
    k: *mut usize,
    expected_vi: *mut f64,
) -> BtsbmStatus {
    guard(|| {
        let t = &deref(trace, "trace")?.0;
        let c = consensus_partition(&relabel(t))?;
        let dst = out_slice(labels, len, c.point_partition.n_items(), "labels")?;
        for (o, &l) in dst.iter_mut().zip(c.point_partition.labels()) {
            *o = l as u32;
        }
        write(k, c.k_point, "k")?;
        write(expected_vi, c.expected_vi, "expected_vi")
    })
}

/// # Safety
/// `trace` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn btsbm_trace_free(trace: *mut BtsbmTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}
