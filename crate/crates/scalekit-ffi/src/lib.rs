//! C ABI over the scalekit core: opaque network and runtime-model handles,
//! status codes, and JSON-based exchange. Every function is panic-safe; on
//! failure a status code is returned and a message is available from
//! [`sk_last_error_message`] on the same thread.
//!
//! Strings returned through `char**` out-parameters are owned by the caller
//! and must be released with [`sk_string_free`].

use scalekit::complexity::{network_complexity, ComplexityError};
use scalekit::families::FamilyError;
use scalekit::ir::{deserialize, serialize, validate_network, DocumentError, NetworkSpec};
use scalekit::runtime::{
    fit_runtime, predict_runtime, read_measurements_csv, FeatureSet, RuntimeError, RuntimeModel,
};
use scalekit::scaling::{
    fast_policy, policy_from_name, predicted_multipliers, scale_continuous, scale_network,
    ScaleRequest, ScalingError, ScalingPolicy,
};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkStatus {
    SkOk = 0,
    SkNullPointer = 1,
    SkInvalidUtf8 = 2,
    SkParseError = 3,
    SkValidationError = 4,
    SkUsageError = 5,
    SkUnknownModel = 6,
    SkExhausted = 7,
    SkInternalError = 8,
}

/// Complexity totals (also used for multiplier triples).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkComplexity {
    pub flops: f64,
    pub params: f64,
    pub acts: f64,
}

/// A scaling strategy as exponents; `alpha` is meaningful only when
/// `has_alpha` is true.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkPolicy {
    pub e_d: f64,
    pub e_w: f64,
    pub e_r: f64,
    pub alpha: f64,
    pub has_alpha: bool,
}

pub struct SkNetwork(NetworkSpec);
pub struct SkRuntimeModel(RuntimeModel);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = CString::new(message.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = text);
}

fn fail(status: SkStatus, message: impl Into<String>) -> SkStatus {
    set_error(message);
    status
}

/// Message describing the most recent failure on this thread. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

fn guarded(body: impl FnOnce() -> SkStatus) -> SkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(SkStatus::SkInternalError, "internal panic"),
    }
}

/// # Safety
/// `text` must be a valid nul-terminated string or null.
unsafe fn read_str<'a>(text: *const c_char) -> Result<&'a str, SkStatus> {
    if text.is_null() {
        return Err(fail(SkStatus::SkNullPointer, "null string argument"));
    }
    unsafe { CStr::from_ptr(text) }
        .to_str()
        .map_err(|_| fail(SkStatus::SkInvalidUtf8, "argument is not valid UTF-8"))
}

fn write_string(out: *mut *mut c_char, text: String) -> SkStatus {
    if out.is_null() {
        return fail(SkStatus::SkNullPointer, "null output pointer");
    }
    match CString::new(text) {
        Ok(s) => {
            unsafe { *out = s.into_raw() };
            SkStatus::SkOk
        }
        Err(_) => fail(SkStatus::SkInternalError, "string contains nul"),
    }
}

fn scaling_status(e: &ScalingError) -> SkStatus {
    match e {
        ScalingError::AlphaOutOfRange(_)
        | ScalingError::UnknownPolicy { .. }
        | ScalingError::BadGrid
        | ScalingError::ScaleFactorBelowOne(_) => SkStatus::SkUsageError,
        _ => SkStatus::SkValidationError,
    }
}

/// Frees a string returned by this library. Null is a no-op.
///
/// # Safety
/// `text` must have been returned by a `scalekit` function and not freed yet.
#[no_mangle]
pub unsafe extern "C" fn sk_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(unsafe { CString::from_raw(text) });
    }
}

/// Parses a canonical network document.
///
/// # Safety
/// `json` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_network_from_json(
    json: *const c_char,
    out: *mut *mut SkNetwork,
) -> SkStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SkStatus::SkNullPointer, "null output pointer");
        }
        let text = match unsafe { read_str(json) } {
            Ok(t) => t,
            Err(status) => return status,
        };
        match deserialize(text) {
            Ok(spec) => {
                unsafe { *out = Box::into_raw(Box::new(SkNetwork(spec))) };
                SkStatus::SkOk
            }
            Err(e @ DocumentError::Parse { .. }) => fail(SkStatus::SkParseError, e.to_string()),
            Err(e @ DocumentError::Schema { .. }) => {
                fail(SkStatus::SkValidationError, e.to_string())
            }
        }
    })
}

/// Builds one of the built-in registry models by name.
///
/// # Safety
/// `name` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_network_from_registry(
    name: *const c_char,
    out: *mut *mut SkNetwork,
) -> SkStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SkStatus::SkNullPointer, "null output pointer");
        }
        let name = match unsafe { read_str(name) } {
            Ok(t) => t,
            Err(status) => return status,
        };
        match scalekit::families::registry_model(name) {
            Some(spec) => {
                unsafe { *out = Box::into_raw(Box::new(SkNetwork(spec))) };
                SkStatus::SkOk
            }
            None => fail(
                SkStatus::SkUnknownModel,
                format!(
                    "unknown model {name:?}; built-in models: {}",
                    scalekit::families::REGISTRY_NAMES.join(", ")
                ),
            ),
        }
    })
}

/// Destroys a network handle. Null is a no-op.
///
/// # Safety
/// `network` must have come from this library and not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sk_network_free(network: *mut SkNetwork) {
    if !network.is_null() {
        drop(unsafe { Box::from_raw(network) });
    }
}

/// # Safety
/// `network` must be a live handle or null.
unsafe fn borrow_network<'a>(network: *const SkNetwork) -> Result<&'a NetworkSpec, SkStatus> {
    if network.is_null() {
        return Err(fail(SkStatus::SkNullPointer, "null network handle"));
    }
    Ok(unsafe { &(*network).0 })
}

/// Serializes a network back to its canonical document.
///
/// # Safety
/// `network` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_network_to_json(
    network: *const SkNetwork,
    out: *mut *mut c_char,
) -> SkStatus {
    guarded(|| {
        let spec = match unsafe { borrow_network(network) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        write_string(out, serialize(spec))
    })
}

/// Validates a network. Returns `SkOk` when valid; otherwise
/// `SkValidationError` with a newline-separated violation list in `out_report`
/// (which may be null if the caller does not want the text).
///
/// # Safety
/// `network` must be a live handle; `out_report` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn sk_network_validate(
    network: *const SkNetwork,
    out_report: *mut *mut c_char,
) -> SkStatus {
    guarded(|| {
        let spec = match unsafe { borrow_network(network) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        let violations = validate_network(spec);
        if violations.is_empty() {
            return SkStatus::SkOk;
        }
        let text = violations.join("\n");
        if !out_report.is_null() {
            let status = write_string(out_report, text.clone());
            if status != SkStatus::SkOk {
                return status;
            }
        }
        fail(SkStatus::SkValidationError, text)
    })
}

/// Computes flop/parameter/activation totals of a network.
///
/// # Safety
/// `network` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_network_complexity(
    network: *const SkNetwork,
    out: *mut SkComplexity,
) -> SkStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SkStatus::SkNullPointer, "null output pointer");
        }
        let spec = match unsafe { borrow_network(network) } {
            Ok(s) => s,
            Err(status) => return status,
        };
        match network_complexity(spec) {
            Ok(report) => {
                unsafe {
                    *out = SkComplexity {
                        flops: report.flops,
                        params: report.params,
                        acts: report.acts,
                    }
                };
                SkStatus::SkOk
            }
            Err(e @ ComplexityError::InvalidNetwork(_)) => {
                fail(SkStatus::SkValidationError, e.to_string())
            }
            Err(e) => fail(SkStatus::SkValidationError, e.to_string()),
        }
    })
}

fn to_policy(policy: &SkPolicy) -> Result<ScalingPolicy, SkStatus> {
    if policy.has_alpha {
        fast_policy(policy.alpha).map_err(|e| fail(SkStatus::SkUsageError, e.to_string()))
    } else {
        ScalingPolicy::from_exponents(policy.e_d, policy.e_w, policy.e_r)
            .map_err(|e| fail(SkStatus::SkUsageError, e.to_string()))
    }
}

fn from_policy(policy: &ScalingPolicy) -> SkPolicy {
    let (e_d, e_w, e_r) = policy.exponents();
    SkPolicy {
        e_d,
        e_w,
        e_r,
        alpha: policy.alpha().unwrap_or(f64::NAN),
        has_alpha: policy.alpha().is_some(),
    }
}

/// Looks up a named strategy (d, w, r, dw, wr, dr, dwr, dWr).
///
/// # Safety
/// `name` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_policy_from_name(name: *const c_char, out: *mut SkPolicy) -> SkStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SkStatus::SkNullPointer, "null output pointer");
        }
        let name = match unsafe { read_str(name) } {
            Ok(t) => t,
            Err(status) => return status,
        };
        match policy_from_name(name) {
            Ok(policy) => {
                unsafe { *out = from_policy(&policy) };
                SkStatus::SkOk
            }
            Err(e) => fail(SkStatus::SkUsageError, e.to_string()),
        }
    })
}

/// Builds the alpha-family strategy for `alpha` in [0, 1].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_fast_policy(alpha: f64, out: *mut SkPolicy) -> SkStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SkStatus::SkNullPointer, "null output pointer");
        }
        match fast_policy(alpha) {
            Ok(policy) => {
                unsafe { *out = from_policy(&policy) };
                SkStatus::SkOk
            }
            Err(e) => fail(SkStatus::SkUsageError, e.to_string()),
        }
    })
}

/// Predicted complexity multipliers of scaling by `s` under `policy`.
///
/// # Safety
/// `policy` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn sk_predicted_multipliers(
    policy: *const SkPolicy,
    s: f64,
    out: *mut SkComplexity,
) -> SkStatus {
    guarded(|| {
        if policy.is_null() || out.is_null() {
            return fail(SkStatus::SkNullPointer, "null pointer argument");
        }
        let policy = match to_policy(unsafe { &*policy }) {
            Ok(p) => p,
            Err(status) => return status,
        };
        let (flops, params, acts) = predicted_multipliers(&policy, s);
        unsafe {
            *out = SkComplexity {
                flops,
                params,
                acts,
            }
        };
        SkStatus::SkOk
    })
}

/// Scales a network by flop factor `s` and discretizes the result into a new
/// handle.
///
/// # Safety
/// `network` must be a live handle; `policy` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_network_scale(
    network: *const SkNetwork,
    policy: *const SkPolicy,
    s: f64,
    out: *mut *mut SkNetwork,
) -> SkStatus {
    guarded(|| {
        if policy.is_null() || out.is_null() {
            return fail(SkStatus::SkNullPointer, "null pointer argument");
        }
        let spec = match unsafe { borrow_network(network) } {
            Ok(spec) => spec,
            Err(status) => return status,
        };
        let policy = match to_policy(unsafe { &*policy }) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match scale_network(
            spec,
            &ScaleRequest {
                s,
                policy,
                quantize: true,
            },
        ) {
            Ok(scaled) => {
                let spec = scaled
                    .as_discrete()
                    .expect("quantized scaling yields a discrete spec")
                    .clone();
                unsafe { *out = Box::into_raw(Box::new(SkNetwork(spec))) };
                SkStatus::SkOk
            }
            Err(e) => fail(scaling_status(&e), e.to_string()),
        }
    })
}

/// Complexity of the continuous (unquantized) scaled network, without
/// materializing it.
///
/// # Safety
/// `network` must be a live handle; `policy` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn sk_scaled_complexity(
    network: *const SkNetwork,
    policy: *const SkPolicy,
    s: f64,
    out: *mut SkComplexity,
) -> SkStatus {
    guarded(|| {
        if policy.is_null() || out.is_null() {
            return fail(SkStatus::SkNullPointer, "null pointer argument");
        }
        let spec = match unsafe { borrow_network(network) } {
            Ok(spec) => spec,
            Err(status) => return status,
        };
        let policy = match to_policy(unsafe { &*policy }) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match scale_continuous(spec, &policy, s) {
            Ok(net) => {
                let report = net.complexity();
                unsafe {
                    *out = SkComplexity {
                        flops: report.flops,
                        params: report.params,
                        acts: report.acts,
                    }
                };
                SkStatus::SkOk
            }
            Err(e) => fail(scaling_status(&e), e.to_string()),
        }
    })
}

/// Fits the linear epoch-time model from measurement CSV text (header
/// `model,strategy,flops,params,acts,epoch_time_min,batch_size`).
///
/// # Safety
/// `csv_text` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_runtime_model_fit_csv(
    csv_text: *const c_char,
    with_flops: bool,
    out: *mut *mut SkRuntimeModel,
) -> SkStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SkStatus::SkNullPointer, "null output pointer");
        }
        let text = match unsafe { read_str(csv_text) } {
            Ok(t) => t,
            Err(status) => return status,
        };
        let feature_set = if with_flops {
            FeatureSet::ActsPlusFlops
        } else {
            FeatureSet::ActsOnly
        };
        let measurements = match read_measurements_csv(text) {
            Ok(m) => m,
            Err(e @ (RuntimeError::Row { .. } | RuntimeError::Csv(_))) => {
                return fail(SkStatus::SkParseError, e.to_string())
            }
            Err(e) => return fail(SkStatus::SkValidationError, e.to_string()),
        };
        match fit_runtime(&measurements, feature_set) {
            Ok(model) => {
                unsafe { *out = Box::into_raw(Box::new(SkRuntimeModel(model))) };
                SkStatus::SkOk
            }
            Err(e) => fail(SkStatus::SkValidationError, e.to_string()),
        }
    })
}

/// Parses a fitted runtime model from its JSON document.
///
/// # Safety
/// `json` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_runtime_model_from_json(
    json: *const c_char,
    out: *mut *mut SkRuntimeModel,
) -> SkStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SkStatus::SkNullPointer, "null output pointer");
        }
        let text = match unsafe { read_str(json) } {
            Ok(t) => t,
            Err(status) => return status,
        };
        match serde_json::from_str::<RuntimeModel>(text) {
            Ok(model) => {
                unsafe { *out = Box::into_raw(Box::new(SkRuntimeModel(model))) };
                SkStatus::SkOk
            }
            Err(e) => fail(SkStatus::SkParseError, e.to_string()),
        }
    })
}

/// Serializes a runtime model to JSON.
///
/// # Safety
/// `model` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_runtime_model_to_json(
    model: *const SkRuntimeModel,
    out: *mut *mut c_char,
) -> SkStatus {
    guarded(|| {
        if model.is_null() {
            return fail(SkStatus::SkNullPointer, "null model handle");
        }
        let model = unsafe { &(*model).0 };
        match serde_json::to_string_pretty(model) {
            Ok(mut text) => {
                text.push('\n');
                write_string(out, text)
            }
            Err(e) => fail(SkStatus::SkInternalError, e.to_string()),
        }
    })
}

/// Destroys a runtime-model handle. Null is a no-op.
///
/// # Safety
/// `model` must have come from this library and not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn sk_runtime_model_free(model: *mut SkRuntimeModel) {
    if !model.is_null() {
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Predicts epoch minutes for a network under a fitted model. `clamped` is
/// set when a negative linear value was clamped to zero; it may be null.
///
/// # Safety
/// `model` and `network` must be live handles; `minutes` must be writable;
/// `clamped` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn sk_predict_minutes(
    model: *const SkRuntimeModel,
    network: *const SkNetwork,
    minutes: *mut f64,
    clamped: *mut bool,
) -> SkStatus {
    guarded(|| {
        if model.is_null() || minutes.is_null() {
            return fail(SkStatus::SkNullPointer, "null pointer argument");
        }
        let spec = match unsafe { borrow_network(network) } {
            Ok(spec) => spec,
            Err(status) => return status,
        };
        let report = match network_complexity(spec) {
            Ok(r) => r,
            Err(e) => return fail(SkStatus::SkValidationError, e.to_string()),
        };
        let prediction = predict_runtime(unsafe { &(*model).0 }, &report);
        unsafe {
            *minutes = prediction.minutes;
            if !clamped.is_null() {
                *clamped = prediction.clamped;
            }
        }
        SkStatus::SkOk
    })
}

/// Samples RegNet models of the given kind ("Y" or "Z") inside
/// `target_flops * (1 +/- tolerance)` using the default design-space ranges,
/// and returns a JSON array of `{name, params, flops, params_count, acts}`
/// objects. Deterministic for a fixed seed.
///
/// # Safety
/// `kind` must be a valid nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sk_sample_regnet(
    kind: *const c_char,
    target_flops: f64,
    tolerance: f64,
    count: usize,
    seed: u64,
    out: *mut *mut c_char,
) -> SkStatus {
    guarded(|| {
        if out.is_null() {
            return fail(SkStatus::SkNullPointer, "null output pointer");
        }
        let kind = match unsafe { read_str(kind) } {
            Ok(text) => match text.parse::<scalekit::families::RegNetKind>() {
                Ok(k) => k,
                Err(e) => return fail(SkStatus::SkUsageError, e.to_string()),
            },
            Err(status) => return status,
        };
        let ranges =
            scalekit::families::DesignSpaceRanges::default_for(kind, target_flops, tolerance);
        match scalekit::families::sample_design_space(&ranges, count, seed) {
            Ok(models) => {
                let rows: Vec<serde_json::Value> = models
                    .iter()
                    .map(|m| {
                        serde_json::json!({
                            "name": m.spec.name,
                            "depth": m.params.depth,
                            "w0": m.params.w0,
                            "w_slope": m.params.w_slope,
                            "w_mult": m.params.w_mult,
                            "group_width": m.params.group_width,
                            "resolution": m.params.resolution,
                            "flops": m.report.flops,
                            "params_count": m.report.params,
                            "acts": m.report.acts,
                        })
                    })
                    .collect();
                write_string(out, serde_json::Value::Array(rows).to_string())
            }
            Err(e @ FamilyError::Exhausted(_)) => fail(SkStatus::SkExhausted, e.to_string()),
            Err(e @ (FamilyError::UnknownKind(_) | FamilyError::InvalidRanges(_))) => {
                fail(SkStatus::SkUsageError, e.to_string())
            }
            Err(e) => fail(SkStatus::SkValidationError, e.to_string()),
        }
    })
}
