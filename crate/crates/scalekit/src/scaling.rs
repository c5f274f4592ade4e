//! The exponent family of scaling strategies, complexity-multiplier
//! predictions, network transformation, and discretization.
//!
//! Every strategy is a triple of exponents `(e_d, e_w, e_r)` on the simplex
//! `e_d + e_w + e_r = 1`. Scaling by a flop factor `s` sets
//! `d' = s^e_d * d`, `w' = sqrt(s)^e_w * w`, `r' = sqrt(s)^e_r * r`,
//! and scales group widths with `w` (depthwise stages keep `g = 1`). The
//! width/resolution half-exponents make the flop multiplier exactly `s` for
//! uniform stages, with parameter and activation multipliers
//! `s^(e_d + e_w)` and `s^(e_d + e_w/2 + e_r)`.

use crate::complexity::{continuous_network_complexity, ComplexityError, ComplexityReport};
use crate::ir::{validate_network, BlockKind, HeadSpec, NetworkSpec, StageSpec, StemSpec};
use thiserror::Error;

/// Names of the built-in strategies.
pub const POLICY_NAMES: [&str; 8] = ["d", "w", "r", "dw", "wr", "dr", "dwr", "dWr"];

/// Default width-scaling share of fast scaling.
pub const DEFAULT_FAST_ALPHA: f64 = 0.8;

/// Width granularity used by discretization.
pub const WIDTH_GRANULARITY: u32 = 8;

const SIMPLEX_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("unknown policy {name:?}; legal names are {}", POLICY_NAMES.join(", "))]
    UnknownPolicy { name: String },
    #[error("exponents ({e_d}, {e_w}, {e_r}) must be in [0, 1] and sum to 1")]
    InvalidExponents { e_d: f64, e_w: f64, e_r: f64 },
    #[error("scale factor must be >= 1, got {0}")]
    ScaleFactorBelowOne(f64),
    #[error("scale grid must be non-empty and strictly increasing")]
    BadGrid,
    #[error("invalid network: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),
    #[error(transparent)]
    Complexity(#[from] ComplexityError),
}

/// An exponent triple on the simplex, optionally tagged with the `alpha` that
/// generated it and a strategy name.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPolicy {
    e_d: f64,
    e_w: f64,
    e_r: f64,
    alpha: Option<f64>,
    name: Option<String>,
}

impl ScalingPolicy {
    /// Builds a policy from raw exponents, enforcing the simplex invariant.
    pub fn from_exponents(e_d: f64, e_w: f64, e_r: f64) -> Result<Self, ScalingError> {
        let ok = |e: f64| (0.0..=1.0).contains(&e);
        if !ok(e_d) || !ok(e_w) || !ok(e_r) || (e_d + e_w + e_r - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(ScalingError::InvalidExponents { e_d, e_w, e_r });
        }
        Ok(Self {
            e_d,
            e_w,
            e_r,
            alpha: None,
            name: None,
        })
    }

    pub fn exponents(&self) -> (f64, f64, f64) {
        (self.e_d, self.e_w, self.e_r)
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Short label for file names and CSV rows.
    pub fn label(&self) -> String {
        match (&self.name, self.alpha) {
            (Some(name), _) => name.clone(),
            (None, Some(alpha)) => format!("a{alpha}"),
            (None, None) => format!("e{}-{}-{}", self.e_d, self.e_w, self.e_r),
        }
    }
}

/// The alpha-parameterized family: `e_d = (1 - alpha)/2`, `e_w = alpha`,
/// `e_r = (1 - alpha)/2`. `alpha = 1` is width scaling, `alpha = 1/3` uniform
/// compound scaling, `alpha = 0` depth-and-resolution scaling.
pub fn fast_policy(alpha: f64) -> Result<ScalingPolicy, ScalingError> {
    if !(0.0..=1.0).contains(&alpha) || alpha.is_nan() {
        return Err(ScalingError::AlphaOutOfRange(alpha));
    }
    let side = (1.0 - alpha) / 2.0;
    Ok(ScalingPolicy {
        e_d: side,
        e_w: alpha,
        e_r: side,
        alpha: Some(alpha),
        name: None,
    })
}

/// Looks up one of the named strategies: the simple ones (`d`, `w`, `r`),
/// the uniform compound ones (`dw`, `wr`, `dr`, `dwr`), and fast scaling
/// (`dWr`, alpha = 0.8).
pub fn policy_from_name(name: &str) -> Result<ScalingPolicy, ScalingError> {
    let (e_d, e_w, e_r, alpha) = match name {
        "d" => (1.0, 0.0, 0.0, None),
        "w" => (0.0, 1.0, 0.0, None),
        "r" => (0.0, 0.0, 1.0, None),
        "dw" => (0.5, 0.5, 0.0, None),
        "wr" => (0.0, 0.5, 0.5, None),
        "dr" => (0.5, 0.0, 0.5, None),
        "dwr" => (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, None),
        "dWr" => {
            let side = (1.0 - DEFAULT_FAST_ALPHA) / 2.0;
            (side, DEFAULT_FAST_ALPHA, side, Some(DEFAULT_FAST_ALPHA))
        }
        _ => {
            return Err(ScalingError::UnknownPolicy {
                name: name.to_string(),
            })
        }
    };
    Ok(ScalingPolicy {
        e_d,
        e_w,
        e_r,
        alpha,
        name: Some(name.to_string()),
    })
}

/// Predicted complexity multipliers `(f, p, a)` of scaling by `s`:
/// `f = s`, `p = s^(e_d + e_w)`, `a = s^(e_d + e_w/2 + e_r)`.
pub fn predicted_multipliers(policy: &ScalingPolicy, s: f64) -> (f64, f64, f64) {
    let (e_d, e_w, e_r) = policy.exponents();
    (s, s.powf(e_d + e_w), s.powf(e_d + e_w / 2.0 + e_r))
}

/// A scaling request: flop multiplier, strategy, and whether to discretize.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleRequest {
    pub s: f64,
    pub policy: ScalingPolicy,
    pub quantize: bool,
}

impl ScaleRequest {
    pub fn validate(&self) -> Result<(), ScalingError> {
        if self.s < 1.0 || self.s.is_nan() {
            return Err(ScalingError::ScaleFactorBelowOne(self.s));
        }
        Ok(())
    }
}

/// Continuous counterpart of [`StageSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousStage {
    pub depth: f64,
    pub width: f64,
    pub group_width: f64,
    pub bottleneck_ratio: f64,
    pub stride: u32,
    pub block_kind: BlockKind,
    pub kernel: u32,
}

impl ContinuousStage {
    /// Integer expansion factor `1/b`; the bottleneck ratio is never scaled.
    pub fn expansion(&self) -> u32 {
        let e = (1.0 / self.bottleneck_ratio).round();
        if e < 1.0 {
            1
        } else {
            e as u32
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousStem {
    pub width: f64,
    pub kernel: u32,
    pub stride: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousHead {
    pub width: f64,
    pub num_classes: u32,
}

/// A network with real-valued depths, widths, and resolution. This is the
/// unquantized result of scaling; the IR proper stays integral.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousNetwork {
    pub name: String,
    pub input_resolution: f64,
    pub stem: Option<ContinuousStem>,
    pub stages: Vec<ContinuousStage>,
    pub head: Option<ContinuousHead>,
}

impl ContinuousNetwork {
    pub fn from_spec(spec: &NetworkSpec) -> Self {
        ContinuousNetwork {
            name: spec.name.clone(),
            input_resolution: f64::from(spec.input_resolution),
            stem: spec.stem.as_ref().map(|s| ContinuousStem {
                width: f64::from(s.width),
                kernel: s.kernel,
                stride: s.stride,
            }),
            stages: spec
                .stages
                .iter()
                .map(|st| ContinuousStage {
                    depth: f64::from(st.depth),
                    width: f64::from(st.width),
                    group_width: f64::from(st.group_width),
                    bottleneck_ratio: st.bottleneck_ratio,
                    stride: st.stride,
                    block_kind: st.block_kind,
                    kernel: st.kernel,
                })
                .collect(),
            head: spec.head.as_ref().map(|h| ContinuousHead {
                width: f64::from(h.width),
                num_classes: h.num_classes,
            }),
        }
    }

    /// Exact complexity of the continuous network.
    pub fn complexity(&self) -> ComplexityReport {
        continuous_network_complexity(self)
    }
}

/// Either form a scaled network can take.
#[derive(Debug, Clone, PartialEq)]
pub enum ScaledNetwork {
    Continuous(ContinuousNetwork),
    Discrete(NetworkSpec),
}

impl ScaledNetwork {
    pub fn name(&self) -> &str {
        match self {
            ScaledNetwork::Continuous(n) => &n.name,
            ScaledNetwork::Discrete(n) => &n.name,
        }
    }

    pub fn complexity(&self) -> Result<ComplexityReport, ComplexityError> {
        match self {
            ScaledNetwork::Continuous(n) => Ok(n.complexity()),
            ScaledNetwork::Discrete(n) => crate::complexity::network_complexity(n),
        }
    }

    pub fn as_discrete(&self) -> Option<&NetworkSpec> {
        match self {
            ScaledNetwork::Discrete(n) => Some(n),
            ScaledNetwork::Continuous(_) => None,
        }
    }
}

fn scaled_name(base: &str, policy: &ScalingPolicy, s: f64) -> String {
    // scaling by 1 is the identity, name included
    if s == 1.0 {
        base.to_string()
    } else {
        format!("{}_{}_s{}", base, policy.label(), s)
    }
}

/// Applies a policy at factor `s` without discretizing. Every stage receives
/// the same multipliers; group widths follow the width multiplier except on
/// depthwise stages, which keep `g = 1`; stem and head widths follow the
/// width multiplier and the input resolution follows the resolution
/// multiplier.
pub fn scale_continuous(
    spec: &NetworkSpec,
    policy: &ScalingPolicy,
    s: f64,
) -> Result<ContinuousNetwork, ScalingError> {
    if s < 1.0 || s.is_nan() {
        return Err(ScalingError::ScaleFactorBelowOne(s));
    }
    let violations = validate_network(spec);
    if !violations.is_empty() {
        return Err(ScalingError::InvalidSpec(violations));
    }
    let (e_d, e_w, e_r) = policy.exponents();
    let d_mult = s.powf(e_d);
    let w_mult = s.powf(e_w / 2.0);
    let r_mult = s.powf(e_r / 2.0);
    let mut net = ContinuousNetwork::from_spec(spec);
    net.name = scaled_name(&spec.name, policy, s);
    net.input_resolution *= r_mult;
    if let Some(stem) = &mut net.stem {
        stem.width *= w_mult;
    }
    if let Some(head) = &mut net.head {
        head.width *= w_mult;
    }
    for stage in &mut net.stages {
        stage.depth *= d_mult;
        stage.width *= w_mult;
        if stage.group_width != 1.0 {
            stage.group_width *= w_mult;
        }
    }
    Ok(net)
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// Nearest positive multiple of `unit`, ties rounding up.
fn round_to_multiple(x: f64, unit: f64) -> f64 {
    (round_half_up(x / unit)).max(1.0) * unit
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Discretizes one stage's width and group width. Already-compatible integer
/// stages pass through unchanged, keeping discrete specs fixed points.
/// Otherwise the group width rounds in multiples of the expansion factor and
/// is capped at the inner width, the width rounds to the granularity when
/// that stays divisible, and re-rounds from the continuous value to the
/// smallest compatible modulus when it does not. The width moves by at most a
/// third of its continuous value.
fn quantize_stage_widths(w_c: f64, g_c: f64, e: u32) -> (u32, u32) {
    let e_f = f64::from(e);
    if w_c.fract() == 0.0 && g_c.fract() == 0.0 && w_c >= 1.0 && g_c >= 1.0 {
        let (w_i, g_i) = (w_c as u64, g_c as u64);
        let inner = w_i * u64::from(e);
        if g_i <= inner && inner % g_i == 0 {
            return (w_i as u32, g_i as u32);
        }
    }
    let g = if g_c == 1.0 {
        1.0
    } else {
        let inner = round_half_up(w_c * e_f).max(1.0);
        if inner < e_f {
            inner
        } else {
            let units = round_half_up(g_c / e_f).max(1.0);
            let cap = (inner / e_f).floor().max(1.0);
            units.min(cap) * e_f
        }
    };
    let granular = round_to_multiple(w_c, f64::from(WIDTH_GRANULARITY)).max(8.0);
    let w = if (granular * e_f) % g == 0.0 {
        granular
    } else {
        let m = g / (gcd(g as u64, u64::from(e)) as f64);
        round_to_multiple(w_c, m)
    };
    (w as u32, g as u32)
}

fn quantize_aux_width(w: f64) -> u32 {
    if w.fract() == 0.0 && w >= 1.0 {
        w as u32
    } else {
        round_to_multiple(w, f64::from(WIDTH_GRANULARITY)) as u32
    }
}

/// Discretizes a continuous network: depths round to the nearest integer
/// (minimum 1), widths to the granularity with group-width repair, the input
/// resolution to the nearest even integer. Integral, already-valid fields
/// pass through unchanged, so discrete specs are fixed points.
pub fn quantize_network(net: &ContinuousNetwork) -> NetworkSpec {
    let input_resolution = if net.input_resolution.fract() == 0.0 && net.input_resolution >= 1.0 {
        net.input_resolution as u32
    } else {
        (round_to_multiple(net.input_resolution / 2.0, 1.0) * 2.0) as u32
    };
    NetworkSpec {
        name: net.name.clone(),
        input_resolution,
        stem: net.stem.as_ref().map(|s| StemSpec {
            width: quantize_aux_width(s.width),
            kernel: s.kernel,
            stride: s.stride,
        }),
        stages: {
            let mut prev_width: Option<u32> =
                net.stem.as_ref().map(|s| quantize_aux_width(s.width));
            let mut stages = Vec::with_capacity(net.stages.len());
            for st in &net.stages {
                let depth = round_half_up(st.depth).max(1.0) as u32;
                let (width, mut group_width) =
                    quantize_stage_widths(st.width, st.group_width, st.expansion());
                // a plain conv groups over its input channels, so stage
                // transitions must keep dividing after rounding
                if st.block_kind == BlockKind::PlainConv {
                    if let Some(prev) = prev_width {
                        if prev % group_width != 0 {
                            group_width = gcd(u64::from(group_width), u64::from(prev)) as u32;
                        }
                    }
                }
                prev_width = Some(width);
                stages.push(StageSpec {
                    depth,
                    width,
                    group_width,
                    bottleneck_ratio: st.bottleneck_ratio,
                    stride: st.stride,
                    block_kind: st.block_kind,
                    kernel: st.kernel,
                });
            }
            stages
        },
        head: net.head.as_ref().map(|h| HeadSpec {
            width: if h.width == 0.0 {
                0
            } else {
                quantize_aux_width(h.width)
            },
            num_classes: h.num_classes,
        }),
    }
}

/// Scales a network per the request, discretizing when asked.
pub fn scale_network(
    spec: &NetworkSpec,
    req: &ScaleRequest,
) -> Result<ScaledNetwork, ScalingError> {
    req.validate()?;
    let continuous = scale_continuous(spec, &req.policy, req.s)?;
    if req.quantize {
        let discrete = quantize_network(&continuous);
        let violations = validate_network(&discrete);
        if !violations.is_empty() {
            return Err(ScalingError::InvalidSpec(violations));
        }
        Ok(ScaledNetwork::Discrete(discrete))
    } else {
        Ok(ScaledNetwork::Continuous(continuous))
    }
}

/// One point of a scaling sweep.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub s: f64,
    pub network: ScaledNetwork,
    pub report: ComplexityReport,
}

/// A sweep of one policy over increasing scale factors.
#[derive(Debug, Clone)]
pub struct ScaledSeries {
    pub base_name: String,
    pub policy: ScalingPolicy,
    pub quantized: bool,
    pub points: Vec<SweepPoint>,
}

impl ScaledSeries {
    /// CSV rows `{name, policy, alpha, s, flops, params, acts, quantized}`.
    pub fn csv_rows(&self) -> Vec<String> {
        self.points
            .iter()
            .map(|p| {
                format!(
                    "{},{},{},{},{},{},{},{}",
                    self.base_name,
                    self.policy.label(),
                    self.policy
                        .alpha()
                        .map(|a| a.to_string())
                        .unwrap_or_default(),
                    p.s,
                    p.report.flops,
                    p.report.params,
                    p.report.acts,
                    self.quantized,
                )
            })
            .collect()
    }
}

/// Header matching [`ScaledSeries::csv_rows`].
pub const SWEEP_CSV_HEADER: &str = "name,policy,alpha,s,flops,params,acts,quantized";

/// Scales `spec` at every grid point and attaches the computed complexity.
/// The grid must be non-empty and strictly increasing with every `s >= 1`.
pub fn sweep(
    spec: &NetworkSpec,
    policy: &ScalingPolicy,
    s_values: &[f64],
    quantize: bool,
) -> Result<ScaledSeries, ScalingError> {
    if s_values.is_empty() || s_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScalingError::BadGrid);
    }
    let mut points = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let network = scale_network(
            spec,
            &ScaleRequest {
                s,
                policy: policy.clone(),
                quantize,
            },
        )?;
        let report = network.complexity()?;
        points.push(SweepPoint { s, network, report });
    }
    Ok(ScaledSeries {
        base_name: spec.name.clone(),
        policy: policy.clone(),
        quantized: quantize,
        points,
    })
}
