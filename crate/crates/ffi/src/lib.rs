//! C interface to the stable-euler library.
//!
//! Objects are opaque handles created by `se_*_new` functions and released
//! by the matching `se_*_free`. Every fallible call returns an [`SeStatus`];
//! the message of the most recent failure on the calling thread is available
//! from [`se_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use stable_euler::besov::{DriftKind, DriftSpec, Mollifier};
use stable_euler::euler::{simulate_population, CompiledDrift, Drift, EulerConfig, SineDrift};
use stable_euler::harness::{run, ExperimentConfig, ExperimentReport};
use stable_euler::metrics::{theoretical_exponent, Regime, Verdict};
use stable_euler::sampling::IncrementSampler;
use stable_euler::stable_model::{Atom, Nondegeneracy, SpectralMeasure, StableSpec};
use stable_euler::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The spectral measure annihilates some direction.
    Degenerate = 3,
    /// The output buffer is shorter than required; nothing was written.
    BufferTooSmall = 4,
    /// A simulated path left the finite range.
    SimulationFailed = 5,
    Io = 6,
    /// A quadrature or truncation tolerance was not met.
    Numerical = 7,
    /// A panic was caught at the boundary.
    Internal = 8,
}

/// Verdict of an experiment, as reported by [`se_report_verdict`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeVerdict {
    Consistent = 0,
    Inconsistent = 1,
    Inconclusive = 2,
}

/// Error-bound regime for [`se_theoretical_exponent`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeRegime {
    Bounded = 0,
    DistI = 1,
    DistIi = 2,
}

/// Stability index plus spectral measure.
pub struct SeStableSpec {
    inner: StableSpec,
}

/// Increment sampler for a stable spec.
pub struct SeSampler {
    inner: IncrementSampler,
}

/// Drift field: closed-form or lacunary (optionally mollified).
pub struct SeDrift {
    spec: Option<DriftSpec>,
    eval: Box<dyn Drift + Send>,
}

/// Completed experiment.
pub struct SeReport {
    inner: ExperimentReport,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> SeStatus {
    match e {
        Error::Degenerate { .. } => SeStatus::Degenerate,
        Error::PathAborted { .. } | Error::Simulation { .. } => SeStatus::SimulationFailed,
        Error::Io(_) => SeStatus::Io,
        Error::Quadrature { .. } | Error::Truncation { .. } => SeStatus::Numerical,
        _ => SeStatus::InvalidArgument,
    }
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard<F: FnOnce() -> Result<(), (SeStatus, String)>>(f: F) -> SeStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SeStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            SeStatus::Internal
        }
    }
}

fn lib<T>(r: stable_euler::Result<T>) -> Result<T, (SeStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (SeStatus, String) {
    (SeStatus::NullPointer, format!("`{what}` is null"))
}

fn invalid(msg: impl Into<String>) -> (SeStatus, String) {
    (SeStatus::InvalidArgument, msg.into())
}

/// Borrows `len` values at `p`; a null pointer is accepted only when `len == 0`.
unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (SeStatus, String)> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (SeStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<T>(p: *mut T, what: &str) -> Result<&mut T, (SeStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, (SeStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("`{what}` is not valid UTF-8")))
}

/// Copies `values` into `out` when it fits; `needed` always receives the length.
unsafe fn copy_out<T: Copy>(values: &[T], out: *mut T, capacity: usize, needed: *mut usize) -> Result<(), (SeStatus, String)> {
    if !needed.is_null() {
        *needed = values.len();
    }
    if capacity < values.len() {
        return Err((SeStatus::BufferTooSmall, format!("buffer holds {capacity}, need {}", values.len())));
    }
    if values.is_empty() {
        return Ok(());
    }
    if out.is_null() {
        return Err(null("out"));
    }
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

/// Builds a spec, rejecting measures that annihilate some direction.
fn nondegenerate_spec(alpha: f64, measure: SpectralMeasure) -> Result<SeStableSpec, (SeStatus, String)> {
    let spec = lib(StableSpec::new(alpha, measure.clone()))?;
    if let Nondegeneracy::Degenerate { witness } = lib(spec.nondegeneracy())? {
        let value = measure.projection_mass(&witness);
        let e = Error::Degenerate { witness, value };
        return Err((status_of(&e), e.to_string()));
    }
    Ok(SeStableSpec { inner: spec })
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Writes the last error message of this thread as a NUL-terminated string
/// into `buf` (truncated to `len − 1` bytes) and returns the full message
/// length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn se_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn se_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Spec with the rotation-invariant measure of total mass `mass` on
/// `S^{dim−1}`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn se_spec_new_uniform(alpha: f64, dim: usize, mass: f64, out: *mut *mut SeStableSpec) -> SeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let measure = lib(SpectralMeasure::uniform(dim, mass))?;
        *out = boxed(nondegenerate_spec(alpha, measure)?);
        Ok(())
    })
}

/// Spec with `count` atoms; `dirs` holds `count × dim` unit vectors row by
/// row and `weights` their masses. The atom set must be symmetric.
///
/// # Safety
/// `dirs` must point to `count·dim` values, `weights` to `count` values and
/// `out` to writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn se_spec_new_atoms(
    alpha: f64,
    dim: usize,
    dirs: *const f64,
    weights: *const f64,
    count: usize,
    out: *mut *mut SeStableSpec,
) -> SeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if dim == 0 {
            return Err(invalid("dim must be positive"));
        }
        let dirs = slice(dirs, count * dim, "dirs")?;
        let weights = slice(weights, count, "weights")?;
        let atoms = dirs.chunks(dim).zip(weights).map(|(d, &w)| Atom { dir: d.to_vec(), w }).collect();
        let measure = lib(SpectralMeasure::atoms(atoms))?;
        *out = boxed(nondegenerate_spec(alpha, measure)?);
        Ok(())
    })
}

/// # Safety
/// `spec` must be null or a handle from `se_spec_new_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn se_spec_free(spec: *mut SeStableSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Dimension of the spec, or 0 for a null handle.
///
/// # Safety
/// `spec` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn se_spec_dim(spec: *const SeStableSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.inner.dim())
}

/// Characteristic exponent `ψ(ξ)`.
///
/// # Safety
/// `xi` must point to `dim` values and `out` to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn se_spec_characteristic_exponent(
    spec: *const SeStableSpec,
    xi: *const f64,
    dim: usize,
    out: *mut f64,
) -> SeStatus {
    guard(|| {
        let spec = handle(spec, "spec")?;
        if dim != spec.inner.dim() {
            return Err(invalid(format!("ξ has {dim} components, spec has {}", spec.inner.dim())));
        }
        let xi = slice(xi, dim, "xi")?;
        *out_ptr(out, "out")? = spec.inner.characteristic_exponent(xi);
        Ok(())
    })
}

/// Sampler for the increments of the process with the given spec.
///
/// # Safety
/// `spec` must be a live handle and `out` writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn se_sampler_new(spec: *const SeStableSpec, out: *mut *mut SeSampler) -> SeStatus {
    guard(|| {
        let spec = handle(spec, "spec")?;
        let out = out_ptr(out, "out")?;
        let sampler = lib(IncrementSampler::new(spec.inner.clone()))?;
        *out = boxed(SeSampler { inner: sampler });
        Ok(())
    })
}

/// # Safety
/// `sampler` must be null or a handle from [`se_sampler_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn se_sampler_free(sampler: *mut SeSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}

/// `n` independent increments `L_{t+dt} − L_t` as a row-major `n × d` array.
/// `needed` (may be null) receives `n·d`.
///
/// # Safety
/// `out` must point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn se_sampler_sample(
    sampler: *const SeSampler,
    dt: f64,
    n: usize,
    seed: u64,
    out: *mut f64,
    capacity: usize,
    needed: *mut usize,
) -> SeStatus {
    guard(|| {
        let sampler = handle(sampler, "sampler")?;
        let d = sampler.inner.dim();
        if capacity < n * d {
            if !needed.is_null() {
                *needed = n * d;
            }
            return Err((SeStatus::BufferTooSmall, format!("buffer holds {capacity}, need {}", n * d)));
        }
        let values = lib(sampler.inner.sample_population(dt, n, seed))?;
        copy_out(&values, out, capacity, needed)
    })
}

/// `b_i(x) = amplitude · sin(x_i)`.
///
/// # Safety
/// `out` must be writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn se_drift_new_sine(dim: usize, amplitude: f64, out: *mut *mut SeDrift) -> SeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if !(dim == 1 || dim == 2) || !amplitude.is_finite() {
            return Err(invalid(format!("need d ∈ {{1, 2}} and finite amplitude, got d = {dim}")));
        }
        *out = boxed(SeDrift {
            spec: None,
            eval: Box::new(SineDrift { dim, amplitude }),
        });
        Ok(())
    })
}

fn lacunary_handle(spec: DriftSpec) -> SeDrift {
    let compiled = CompiledDrift::new(&spec);
    SeDrift {
        spec: Some(spec),
        eval: Box::new(compiled),
    }
}

/// Lacunary drift in `B^{−β}_{∞,∞}` with levels `0..=levels`.
///
/// # Safety
/// `out` must be writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn se_drift_new_lacunary(
    beta: f64,
    levels: i32,
    amplitude: f64,
    seed: u64,
    dim: usize,
    divergence_free: bool,
    out: *mut *mut SeDrift,
) -> SeStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let kind = if divergence_free { DriftKind::DivergenceFree } else { DriftKind::Componentwise };
        let spec = lib(DriftSpec::synthesize(beta, levels, amplitude, seed, dim, kind))?;
        *out = boxed(lacunary_handle(spec));
        Ok(())
    })
}

/// Mollification `b_m = b ∗ ρ_m` of a lacunary drift.
///
/// # Safety
/// `drift` must be a live handle and `out` writable storage for a handle.
#[no_mangle]
pub unsafe extern "C" fn se_drift_mollify(drift: *const SeDrift, m: f64, out: *mut *mut SeDrift) -> SeStatus {
    guard(|| {
        let drift = handle(drift, "drift")?;
        let out = out_ptr(out, "out")?;
        let spec = drift.spec.as_ref().ok_or_else(|| invalid("only lacunary drifts can be mollified"))?;
        let mollifier = lib(Mollifier::standard(spec.dim))?;
        let bm = lib(spec.mollify(mollifier, m))?;
        *out = boxed(lacunary_handle(bm));
        Ok(())
    })
}

/// # Safety
/// `drift` must be null or a handle from `se_drift_*` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn se_drift_free(drift: *mut SeDrift) {
    if !drift.is_null() {
        drop(Box::from_raw(drift));
    }
}

/// `b(x)` into `out[0..dim]`.
///
/// # Safety
/// `x` and `out` must each point to `dim` values.
#[no_mangle]
pub unsafe extern "C" fn se_drift_eval(drift: *const SeDrift, x: *const f64, out: *mut f64, dim: usize) -> SeStatus {
    guard(|| {
        let drift = handle(drift, "drift")?;
        if dim != drift.eval.dim() {
            return Err(invalid(format!("x has {dim} components, drift has {}", drift.eval.dim())));
        }
        let x = slice(x, dim, "x")?;
        if out.is_null() {
            return Err(null("out"));
        }
        drift.eval.eval(x, std::slice::from_raw_parts_mut(out, dim));
        Ok(())
    })
}

/// `‖b‖_{B^s_{∞,∞}}` of a lacunary drift.
///
/// # Safety
/// `out` must point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn se_drift_besov_norm(drift: *const SeDrift, s: f64, out: *mut f64) -> SeStatus {
    guard(|| {
        let drift = handle(drift, "drift")?;
        let spec = drift.spec.as_ref().ok_or_else(|| invalid("Besov norms are available for lacunary drifts"))?;
        *out_ptr(out, "out")? = spec.besov_norm(s);
        Ok(())
    })
}

/// Endpoints at time `horizon` of `paths` scheme paths with `n` steps per
/// unit time, as a row-major `paths × d` array. `x0` may be null for the
/// origin.
///
/// # Safety
/// `x0` must be null or point to `d` values; `out` must point to `capacity`
/// writable values.
#[no_mangle]
pub unsafe extern "C" fn se_simulate(
    sampler: *const SeSampler,
    drift: *const SeDrift,
    n: u64,
    horizon: f64,
    x0: *const f64,
    paths: usize,
    seed: u64,
    out: *mut f64,
    capacity: usize,
    needed: *mut usize,
) -> SeStatus {
    guard(|| {
        let sampler = handle(sampler, "sampler")?;
        let drift = handle(drift, "drift")?;
        let d = sampler.inner.dim();
        if capacity < paths * d {
            if !needed.is_null() {
                *needed = paths * d;
            }
            return Err((SeStatus::BufferTooSmall, format!("buffer holds {capacity}, need {}", paths * d)));
        }
        let x0 = if x0.is_null() { vec![0.0; d] } else { slice(x0, d, "x0")?.to_vec() };
        let config = EulerConfig {
            n,
            horizon,
            x0,
            paths,
            master_seed: seed,
        };
        let run = lib(simulate_population(&config, &sampler.inner, drift.eval.as_ref(), &[]))?;
        copy_out(&run.samples[0], out, capacity, needed)
    })
}

/// Predicted exponent of `n` in the weak-error bound.
///
/// # Safety
/// `out` must point to a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn se_theoretical_exponent(
    alpha: f64,
    beta: f64,
    gamma: f64,
    theta: f64,
    eps: f64,
    regime: SeRegime,
    out: *mut f64,
) -> SeStatus {
    guard(|| {
        let regime = match regime {
            SeRegime::Bounded => Regime::Bounded,
            SeRegime::DistI => Regime::DistI,
            SeRegime::DistIi => Regime::DistIi,
        };
        *out_ptr(out, "out")? = lib(theoretical_exponent(alpha, beta, gamma, theta, eps, regime))?;
        Ok(())
    })
}

/// Validates and runs the experiment described by the JSON `config`.
///
/// # Safety
/// `config` must be a NUL-terminated string and `out` writable storage for a
/// handle.
#[no_mangle]
pub unsafe extern "C" fn se_experiment_run(config: *const c_char, out: *mut *mut SeReport) -> SeStatus {
    guard(|| {
        let text = string(config, "config")?;
        let out = out_ptr(out, "out")?;
        let cfg = lib(ExperimentConfig::from_json(text))?;
        let report = lib(run(&cfg))?;
        *out = boxed(SeReport { inner: report });
        Ok(())
    })
}

/// # Safety
/// `report` must be null or a handle from [`se_experiment_run`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn se_report_free(report: *mut SeReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `report` must be a live handle and `out` a writable verdict.
#[no_mangle]
pub unsafe extern "C" fn se_report_verdict(report: *const SeReport, out: *mut SeVerdict) -> SeStatus {
    guard(|| {
        let report = handle(report, "report")?;
        *out_ptr(out, "out")? = match report.inner.verdict {
            Verdict::Consistent => SeVerdict::Consistent,
            Verdict::Inconsistent => SeVerdict::Inconsistent,
            Verdict::Inconclusive => SeVerdict::Inconclusive,
        };
        Ok(())
    })
}

/// Fitted slope; writes NaN when fewer than four points cleared the noise
/// floor or the experiment fits no rate.
///
/// # Safety
/// `report` must be a live handle and `out` a writable `double`.
#[no_mangle]
pub unsafe extern "C" fn se_report_slope(report: *const SeReport, out: *mut f64) -> SeStatus {
    guard(|| {
        let report = handle(report, "report")?;
        let slope = match (&report.inner.fit, &report.inner.moments) {
            (Some(fit), _) => fit.slope(),
            (None, Some(m)) => Some(m.slope),
            _ => None,
        };
        *out_ptr(out, "out")? = slope.unwrap_or(f64::NAN);
        Ok(())
    })
}

/// The report as NUL-terminated JSON. `needed` (may be null) receives the
/// byte count including the terminator.
///
/// # Safety
/// `buf` must point to `capacity` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn se_report_json(
    report: *const SeReport,
    buf: *mut c_char,
    capacity: usize,
    needed: *mut usize,
) -> SeStatus {
    guard(|| {
        let report = handle(report, "report")?;
        let mut bytes = report.inner.to_json().into_bytes();
        bytes.push(0);
        let bytes: Vec<c_char> = bytes.into_iter().map(|b| b as c_char).collect();
        copy_out(&bytes, buf, capacity, needed)
    })
}

/// Writes `report.json`, `errors.csv`, `meta.json`, `log.txt` and any saved
/// populations into the directory `dir`.
///
/// # Safety
/// `dir` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn se_report_write(report: *const SeReport, dir: *const c_char) -> SeStatus {
    guard(|| {
        let report = handle(report, "report")?;
        let dir = string(dir, "dir")?;
        lib(report.inner.write_to(Path::new(dir)))
    })
}
