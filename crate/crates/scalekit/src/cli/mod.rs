//! Command implementations behind the `scalekit` binary: complexity
//! analysis, scaling, sweeps, design-space sampling, and runtime fitting,
//! with deterministic file outputs.
//!
//! Every command returns a [`CommandResult`]; the binary prints the summary
//! and exits with the embedded code. Exit codes: 0 success, 2 resolution/IO,
//! 3 validation/parse, 4 exhaustion, 64 usage.

use crate::complexity::{network_complexity, ComplexityError, ComplexityReport, REPORT_CSV_HEADER};
use crate::families::{
    registry_model, sample_design_space, DesignSpaceRanges, RegNetKind, REGISTRY_NAMES,
};
use crate::ir::{deserialize, serialize, validate_network, DocumentError, NetworkSpec};
use crate::runtime::{
    correlation_report, fit_runtime, predict_runtime, read_measurements_csv, FeatureSet,
    RuntimeError, RuntimeModel, CORRELATION_CSV_HEADER,
};
use crate::scaling::{
    fast_policy, policy_from_name, predicted_multipliers, scale_network, sweep, ScaleRequest,
    ScaledNetwork, ScalingError, ScalingPolicy, SWEEP_CSV_HEADER,
};
use serde_json::json;
use std::path::{Path, PathBuf};

pub mod exit_code {
    pub const OK: i32 = 0;
    pub const RESOLUTION: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const EXHAUSTION: i32 = 4;
    pub const USAGE: i32 = 64;
}

/// Outcome of one command invocation.
#[derive(Debug, Clone)]
pub struct CommandResult {
    pub exit_code: i32,
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
}

#[derive(Debug)]
enum CliError {
    Resolution(String),
    Validation(String),
    Exhaustion(String),
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Resolution(_) => exit_code::RESOLUTION,
            CliError::Validation(_) => exit_code::VALIDATION,
            CliError::Exhaustion(_) => exit_code::EXHAUSTION,
            CliError::Usage(_) => exit_code::USAGE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Resolution(m)
            | CliError::Validation(m)
            | CliError::Exhaustion(m)
            | CliError::Usage(m) => m,
        }
    }
}

impl From<ComplexityError> for CliError {
    fn from(e: ComplexityError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ScalingError> for CliError {
    fn from(e: ScalingError) -> Self {
        match e {
            ScalingError::AlphaOutOfRange(_)
            | ScalingError::UnknownPolicy { .. }
            | ScalingError::BadGrid
            | ScalingError::ScaleFactorBelowOne(_) => CliError::Usage(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<crate::families::FamilyError> for CliError {
    fn from(e: crate::families::FamilyError) -> Self {
        use crate::families::FamilyError::*;
        match e {
            Exhausted(_) => CliError::Exhaustion(e.to_string()),
            UnknownKind(_) | UnknownVariant(_) | InvalidRanges(_) => CliError::Usage(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<RuntimeError> for CliError {
    fn from(e: RuntimeError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn finish(result: Result<CommandResult, CliError>) -> CommandResult {
    result.unwrap_or_else(|e| CommandResult {
        exit_code: e.exit_code(),
        artifacts: Vec::new(),
        summary: format!("error: {}", e.message()),
    })
}

/// Output serialization for tabular artifacts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    JsonLines,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::JsonLines => "jsonl",
        }
    }
}

/// Options shared by all commands.
#[derive(Debug, Clone)]
pub struct GlobalOpts {
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub seed: u64,
}

impl Default for GlobalOpts {
    fn default() -> Self {
        GlobalOpts {
            out_dir: PathBuf::from("."),
            format: OutputFormat::Csv,
            seed: 0,
        }
    }
}

/// Environment variable naming a directory of extra `<name>.json` specs.
pub const REGISTRY_ENV: &str = "SCALEKIT_REGISTRY";

fn load_spec_file(path: &Path) -> Result<NetworkSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Resolution(format!("cannot read {}: {e}", path.display())))?;
    deserialize(&text).map_err(|e| match e {
        DocumentError::Parse { .. } | DocumentError::Schema { .. } => {
            CliError::Validation(format!("{}: {e}", path.display()))
        }
    })
}

/// Resolves a model argument: registry name, then `$SCALEKIT_REGISTRY/<name>.json`,
/// then a file path.
fn resolve_model(target: &str) -> Result<NetworkSpec, CliError> {
    if let Some(spec) = registry_model(target) {
        return Ok(spec);
    }
    if let Ok(dir) = std::env::var(REGISTRY_ENV) {
        let candidate = Path::new(&dir).join(format!("{target}.json"));
        if candidate.is_file() {
            return load_spec_file(&candidate);
        }
    }
    let path = Path::new(target);
    if path.is_file() {
        return load_spec_file(path);
    }
    Err(CliError::Resolution(format!(
        "unknown model or missing file {target:?}; built-in models: {}",
        REGISTRY_NAMES.join(", ")
    )))
}

fn validated(spec: NetworkSpec) -> Result<NetworkSpec, CliError> {
    let violations = validate_network(&spec);
    if violations.is_empty() {
        Ok(spec)
    } else {
        Err(CliError::Validation(format!(
            "invalid spec {:?}: {}",
            spec.name,
            violations.join("; ")
        )))
    }
}

/// Parses a flop count with optional MF/GF suffix (10^6 / 10^9 multiply-adds).
pub fn parse_flops(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let lower = t.to_ascii_lowercase();
    let (digits, mult) = if let Some(x) = lower.strip_suffix("gf") {
        (x, 1e9)
    } else if let Some(x) = lower.strip_suffix("mf") {
        (x, 1e6)
    } else {
        (lower.as_str(), 1.0)
    };
    let value: f64 = digits
        .trim()
        .parse()
        .map_err(|_| format!("cannot parse flop count {text:?} (use e.g. 500MF or 4GF)"))?;
    if value <= 0.0 || value.is_nan() {
        return Err(format!("flop count must be positive, got {text:?}"));
    }
    Ok(value * mult)
}

fn human(x: f64) -> String {
    if x >= 1e9 {
        format!("{:.2}B", x / 1e9)
    } else if x >= 1e6 {
        format!("{:.2}M", x / 1e6)
    } else {
        format!("{x:.0}")
    }
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '-'
            }
        })
        .collect()
}

fn write_artifact(
    opts: &GlobalOpts,
    file_name: &str,
    contents: &str,
    artifacts: &mut Vec<PathBuf>,
) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| {
        CliError::Resolution(format!(
            "cannot create output directory {}: {e}",
            opts.out_dir.display()
        ))
    })?;
    let path = opts.out_dir.join(file_name);
    std::fs::write(&path, contents)
        .map_err(|e| CliError::Resolution(format!("cannot write {}: {e}", path.display())))?;
    artifacts.push(path.clone());
    Ok(path)
}

fn report_lines(name: &str, report: &ComplexityReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => format!("{REPORT_CSV_HEADER}\n{}\n", report.csv_row(name)),
        OutputFormat::JsonLines => {
            let breakdown: Vec<_> = report
                .breakdown
                .iter()
                .map(|e| {
                    json!({"label": e.label, "flops": e.flops, "params": e.params, "acts": e.acts})
                })
                .collect();
            let mut line = json!({
                "name": name,
                "flops": report.flops,
                "params": report.params,
                "acts": report.acts,
                "breakdown": breakdown,
            })
            .to_string();
            line.push('\n');
            line
        }
    }
}

fn breakdown_table(report: &ComplexityReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "  {:<14} {:>16} {:>14} {:>14}\n",
        "component", "flops", "params", "acts"
    ));
    for e in &report.breakdown {
        out.push_str(&format!(
            "  {:<14} {:>16} {:>14} {:>14}\n",
            e.label, e.flops, e.params, e.acts
        ));
    }
    out
}

/// `complexity MODEL`: prints and writes the complexity report.
pub fn cmd_complexity(target: &str, opts: &GlobalOpts) -> CommandResult {
    finish((|| {
        let spec = validated(resolve_model(target)?)?;
        let report = network_complexity(&spec)?;
        let mut artifacts = Vec::new();
        let file = format!(
            "{}_complexity.{}",
            sanitize(&spec.name),
            opts.format.extension()
        );
        write_artifact(
            opts,
            &file,
            &report_lines(&spec.name, &report, opts.format),
            &mut artifacts,
        )?;
        let mut summary = format!(
            "{}: flops {} params {} acts {}\n",
            spec.name,
            human(report.flops),
            human(report.params),
            human(report.acts)
        );
        summary.push_str(&breakdown_table(&report));
        summary.push_str(&format!("wrote {}", artifacts[0].display()));
        Ok(CommandResult {
            exit_code: exit_code::OK,
            artifacts,
            summary,
        })
    })())
}

fn policy_from_flags(policy: Option<&str>, alpha: Option<f64>) -> Result<ScalingPolicy, CliError> {
    match (policy, alpha) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "--policy and --alpha are mutually exclusive".to_string(),
        )),
        (Some(name), None) => Ok(policy_from_name(name)?),
        (None, Some(a)) => Ok(fast_policy(a)?),
        (None, None) => Ok(policy_from_name("dWr").expect("built-in policy")),
    }
}

/// `scale MODEL --policy P | --alpha A --s S [--no-quantize]`: writes the
/// scaled spec and a before/after comparison with predicted vs achieved
/// multipliers.
pub fn cmd_scale(
    target: &str,
    policy: Option<&str>,
    alpha: Option<f64>,
    s: f64,
    quantize: bool,
    opts: &GlobalOpts,
) -> CommandResult {
    finish((|| {
        let policy = policy_from_flags(policy, alpha)?;
        let spec = validated(resolve_model(target)?)?;
        let base_report = network_complexity(&spec)?;
        let scaled = scale_network(
            &spec,
            &ScaleRequest {
                s,
                policy: policy.clone(),
                quantize,
            },
        )?;
        let scaled_report = scaled.complexity()?;
        let (pf, pp, pa) = predicted_multipliers(&policy, s);
        let mut artifacts = Vec::new();
        if let ScaledNetwork::Discrete(scaled_spec) = &scaled {
            let file = format!("{}.json", sanitize(&scaled_spec.name));
            write_artifact(opts, &file, &serialize(scaled_spec), &mut artifacts)?;
        }
        let rows = [
            ("flops", base_report.flops, scaled_report.flops, pf),
            ("params", base_report.params, scaled_report.params, pp),
            ("acts", base_report.acts, scaled_report.acts, pa),
        ];
        let comparison = match opts.format {
            OutputFormat::Csv => {
                let mut text =
                    String::from("metric,base,scaled,achieved_multiplier,predicted_multiplier\n");
                for (metric, base, scaled_v, predicted) in rows {
                    text.push_str(&format!(
                        "{},{},{},{},{}\n",
                        metric,
                        base,
                        scaled_v,
                        scaled_v / base,
                        predicted
                    ));
                }
                text
            }
            OutputFormat::JsonLines => {
                let mut text = String::new();
                for (metric, base, scaled_v, predicted) in rows {
                    text.push_str(
                        &json!({
                            "metric": metric,
                            "base": base,
                            "scaled": scaled_v,
                            "achieved_multiplier": scaled_v / base,
                            "predicted_multiplier": predicted,
                        })
                        .to_string(),
                    );
                    text.push('\n');
                }
                text
            }
        };
        let comparison_file = format!(
            "{}_comparison.{}",
            sanitize(scaled.name()),
            opts.format.extension()
        );
        write_artifact(opts, &comparison_file, &comparison, &mut artifacts)?;
        let mut summary = format!(
            "{} --{}--> {} (s = {s}, {})\n",
            spec.name,
            policy.label(),
            scaled.name(),
            if quantize { "quantized" } else { "continuous" },
        );
        summary.push_str(&format!(
            "  {:<7} {:>14} {:>14} {:>10} {:>10}\n",
            "metric", "base", "scaled", "achieved", "predicted"
        ));
        for (metric, base, scaled_v, predicted) in rows {
            summary.push_str(&format!(
                "  {:<7} {:>14} {:>14} {:>10.4} {:>10.4}\n",
                metric,
                human(base),
                human(scaled_v),
                scaled_v / base,
                predicted
            ));
        }
        for artifact in &artifacts {
            summary.push_str(&format!("wrote {}\n", artifact.display()));
        }
        summary.pop();
        Ok(CommandResult {
            exit_code: exit_code::OK,
            artifacts,
            summary,
        })
    })())
}

fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0.ln()).sum();
    let sy: f64 = points.iter().map(|p| p.1.ln()).sum();
    let sxx: f64 = points.iter().map(|p| p.0.ln() * p.0.ln()).sum();
    let sxy: f64 = points.iter().map(|p| p.0.ln() * p.1.ln()).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// `sweep MODEL --policies P1,P2 --s-grid 1,2,4`: writes one CSV row per
/// policy and scale factor, ready for log-log plotting.
pub fn cmd_sweep(
    target: &str,
    policies: &[String],
    s_grid: &[f64],
    quantize: bool,
    opts: &GlobalOpts,
) -> CommandResult {
    finish((|| {
        if policies.is_empty() {
            return Err(CliError::Usage("no policies given".to_string()));
        }
        if s_grid.is_empty() {
            return Err(CliError::Usage("empty scale grid".to_string()));
        }
        let spec = validated(resolve_model(target)?)?;
        let mut lines = String::new();
        if opts.format == OutputFormat::Csv {
            lines.push_str(SWEEP_CSV_HEADER);
            lines.push('\n');
        }
        let mut summary = format!("sweep of {} over s = {:?}\n", spec.name, s_grid);
        for name in policies {
            let policy = policy_from_name(name)?;
            let series = sweep(&spec, &policy, s_grid, quantize)?;
            match opts.format {
                OutputFormat::Csv => {
                    for row in series.csv_rows() {
                        lines.push_str(&row);
                        lines.push('\n');
                    }
                }
                OutputFormat::JsonLines => {
                    for p in &series.points {
                        lines.push_str(
                            &json!({
                                "name": series.base_name,
                                "policy": policy.label(),
                                "alpha": policy.alpha(),
                                "s": p.s,
                                "flops": p.report.flops,
                                "params": p.report.params,
                                "acts": p.report.acts,
                                "quantized": quantize,
                            })
                            .to_string(),
                        );
                        lines.push('\n');
                    }
                }
            }
            if series.points.len() >= 2 {
                let pts: Vec<(f64, f64)> = series
                    .points
                    .iter()
                    .map(|p| (p.report.flops, p.report.acts))
                    .collect();
                summary.push_str(&format!(
                    "  {:<4} acts-vs-flops log-log slope {:.4}\n",
                    name,
                    log_log_slope(&pts)
                ));
            }
        }
        let mut artifacts = Vec::new();
        let file = format!("{}_sweep.{}", sanitize(&spec.name), opts.format.extension());
        write_artifact(opts, &file, &lines, &mut artifacts)?;
        summary.push_str(&format!("wrote {}", artifacts[0].display()));
        Ok(CommandResult {
            exit_code: exit_code::OK,
            artifacts,
            summary,
        })
    })())
}

/// `sample --kind Y --flops 500MF --tolerance 0.1 --count 32`: writes one
/// spec file per accepted model plus an index.
pub fn cmd_sample(
    kind: &str,
    flops: &str,
    tolerance: f64,
    count: usize,
    opts: &GlobalOpts,
) -> CommandResult {
    finish((|| {
        let kind: RegNetKind = kind.parse()?;
        let target = parse_flops(flops).map_err(CliError::Usage)?;
        if tolerance.is_nan() || tolerance <= 0.0 || tolerance >= 1.0 {
            return Err(CliError::Usage(format!(
                "tolerance must lie in (0, 1), got {tolerance}"
            )));
        }
        let ranges = DesignSpaceRanges::default_for(kind, target, tolerance);
        let models = sample_design_space(&ranges, count, opts.seed)?;
        let mut artifacts = Vec::new();
        let mut index = String::new();
        if opts.format == OutputFormat::Csv {
            index.push_str(
                "name,depth,w0,w_slope,w_mult,group_width,resolution,flops,params,acts\n",
            );
        }
        for m in &models {
            let file = format!("{}.json", sanitize(&m.spec.name));
            write_artifact(opts, &file, &serialize(&m.spec), &mut artifacts)?;
            match opts.format {
                OutputFormat::Csv => index.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    m.spec.name,
                    m.params.depth,
                    m.params.w0,
                    m.params.w_slope,
                    m.params.w_mult,
                    m.params.group_width,
                    m.params.resolution,
                    m.report.flops,
                    m.report.params,
                    m.report.acts,
                )),
                OutputFormat::JsonLines => {
                    index.push_str(
                        &json!({
                            "name": m.spec.name,
                            "depth": m.params.depth,
                            "w0": m.params.w0,
                            "w_slope": m.params.w_slope,
                            "w_mult": m.params.w_mult,
                            "group_width": m.params.group_width,
                            "resolution": m.params.resolution,
                            "flops": m.report.flops,
                            "params": m.report.params,
                            "acts": m.report.acts,
                        })
                        .to_string(),
                    );
                    index.push('\n');
                }
            }
        }
        let index_file = format!(
            "regnet{}_sampled_seed{}_index.{}",
            kind.to_string().to_ascii_lowercase(),
            opts.seed,
            opts.format.extension()
        );
        write_artifact(opts, &index_file, &index, &mut artifacts)?;
        let flops_all: Vec<f64> = models.iter().map(|m| m.report.flops).collect();
        let lo = flops_all.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = flops_all.iter().cloned().fold(0.0, f64::max);
        let summary = format!(
            "accepted {} RegNet{} models at {} +/- {:.0}% (flops {} .. {})\nwrote index {}",
            models.len(),
            kind,
            human(target),
            tolerance * 100.0,
            human(lo),
            human(hi),
            artifacts.last().unwrap().display()
        );
        Ok(CommandResult {
            exit_code: exit_code::OK,
            artifacts,
            summary,
        })
    })())
}

fn parse_features(text: &str) -> Result<FeatureSet, CliError> {
    match text {
        "acts" => Ok(FeatureSet::ActsOnly),
        "acts+flops" => Ok(FeatureSet::ActsPlusFlops),
        other => Err(CliError::Usage(format!(
            "unknown feature set {other:?}; use acts or acts+flops"
        ))),
    }
}

/// `fit-runtime MEASUREMENTS.csv [--features acts|acts+flops]`: fits the
/// linear epoch-time model and writes it with a correlation report.
pub fn cmd_fit_runtime(path: &Path, features: &str, opts: &GlobalOpts) -> CommandResult {
    finish((|| {
        let features = parse_features(features)?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Resolution(format!("cannot read {}: {e}", path.display())))?;
        let measurements = read_measurements_csv(&text)?;
        let model = fit_runtime(&measurements, features)?;
        let correlations = correlation_report(&measurements)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "measurements".to_string());
        let mut artifacts = Vec::new();
        let mut model_doc =
            serde_json::to_string_pretty(&model).expect("model serialization cannot fail");
        model_doc.push('\n');
        write_artifact(
            opts,
            &format!("{}_model.json", sanitize(&stem)),
            &model_doc,
            &mut artifacts,
        )?;
        let correlation_text = match opts.format {
            OutputFormat::Csv => {
                let mut text = String::from(CORRELATION_CSV_HEADER);
                text.push('\n');
                for row in correlations.csv_rows() {
                    text.push_str(&row);
                    text.push('\n');
                }
                text
            }
            OutputFormat::JsonLines => {
                let mut text = String::new();
                for (name, n, c) in &correlations.per_strategy {
                    text.push_str(
                        &json!({"strategy": name, "n": n, "r_flops": c.flops, "r_params": c.params, "r_acts": c.acts})
                            .to_string(),
                    );
                    text.push('\n');
                }
                text.push_str(
                    &json!({"strategy": "pooled", "n": measurements.len(), "r_flops": correlations.pooled.flops, "r_params": correlations.pooled.params, "r_acts": correlations.pooled.acts})
                        .to_string(),
                );
                text.push('\n');
                text
            }
        };
        write_artifact(
            opts,
            &format!(
                "{}_correlations.{}",
                sanitize(&stem),
                opts.format.extension()
            ),
            &correlation_text,
            &mut artifacts,
        )?;
        let mut summary = format!(
            "fitted {:?} on {} measurements: time = {:.6} + {:.3e} * acts",
            model.feature_set,
            measurements.len(),
            model.intercept,
            model.coef_acts
        );
        if model.feature_set == FeatureSet::ActsPlusFlops {
            summary.push_str(&format!(" + {:.3e} * flops", model.coef_flops));
        }
        summary.push_str(&format!(" (fit_r = {:.4})\n", model.fit_r));
        summary.push_str(&format!(
            "pooled r vs epoch time: flops {:.4}, params {:.4}, acts {:.4}\n",
            correlations.pooled.flops, correlations.pooled.params, correlations.pooled.acts
        ));
        for notice in &correlations.notices {
            summary.push_str(&format!("note: {notice}\n"));
        }
        for artifact in &artifacts {
            summary.push_str(&format!("wrote {}\n", artifact.display()));
        }
        summary.pop();
        Ok(CommandResult {
            exit_code: exit_code::OK,
            artifacts,
            summary,
        })
    })())
}

/// `predict MODEL.json SPEC`: applies a fitted runtime model to a network.
pub fn cmd_predict(model_path: &Path, target: &str, _opts: &GlobalOpts) -> CommandResult {
    finish((|| {
        let text = std::fs::read_to_string(model_path).map_err(|e| {
            CliError::Resolution(format!("cannot read {}: {e}", model_path.display()))
        })?;
        let model: RuntimeModel = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", model_path.display())))?;
        let spec = validated(resolve_model(target)?)?;
        let report = network_complexity(&spec)?;
        let prediction = predict_runtime(&model, &report);
        let mut summary = format!(
            "{}: predicted epoch time {:.4} min (acts {})",
            spec.name,
            prediction.minutes,
            human(report.acts)
        );
        if prediction.clamped {
            summary.push_str("\nwarning: raw prediction was negative and was clamped to 0");
        }
        Ok(CommandResult {
            exit_code: exit_code::OK,
            artifacts: Vec::new(),
            summary,
        })
    })())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flop_suffixes_parse() {
        assert_eq!(parse_flops("500MF").unwrap(), 500e6);
        assert_eq!(parse_flops("4GF").unwrap(), 4e9);
        assert_eq!(parse_flops("0.5gf").unwrap(), 0.5e9);
        assert_eq!(parse_flops("123456").unwrap(), 123456.0);
        assert!(parse_flops("4XF").is_err());
        assert!(parse_flops("-1GF").is_err());
    }

    #[test]
    fn conflicting_policy_flags_are_usage_errors() {
        let err = policy_from_flags(Some("w"), Some(0.5)).unwrap_err();
        assert_eq!(err.exit_code(), exit_code::USAGE);
    }

    #[test]
    fn alpha_out_of_range_is_usage_error() {
        let err = policy_from_flags(None, Some(1.5)).unwrap_err();
        assert_eq!(err.exit_code(), exit_code::USAGE);
    }

    #[test]
    fn default_policy_is_fast_scaling() {
        let p = policy_from_flags(None, None).unwrap();
        assert_eq!(p.name(), Some("dWr"));
    }
}
