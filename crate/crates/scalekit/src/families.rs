//! Concrete model families: the RegNet generator, the EfficientNet variants,
//! a registry of named models, and flop-regime rejection sampling.

use crate::complexity::{network_complexity, ComplexityError, ComplexityReport};
use crate::ir::{BlockKind, HeadSpec, NetworkSpec, StageSpec, StemSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// RegNet block family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegNetKind {
    Y,
    Z,
}

impl RegNetKind {
    fn block_kind(self) -> BlockKind {
        match self {
            RegNetKind::Y => BlockKind::ResidualBottleneckY,
            RegNetKind::Z => BlockKind::InvertedBottleneckZ,
        }
    }

    fn bottleneck_ratio(self) -> f64 {
        match self {
            RegNetKind::Y => 1.0,
            RegNetKind::Z => 0.25,
        }
    }
}

impl fmt::Display for RegNetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegNetKind::Y => write!(f, "Y"),
            RegNetKind::Z => write!(f, "Z"),
        }
    }
}

impl FromStr for RegNetKind {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, FamilyError> {
        match s {
            "Y" | "y" => Ok(RegNetKind::Y),
            "Z" | "z" => Ok(RegNetKind::Z),
            other => Err(FamilyError::UnknownKind(other.to_string())),
        }
    }
}

/// Generator parameters of a RegNet: total block count, initial width, width
/// slope, width multiplier, group width, bottleneck ratio, input resolution,
/// and block family.
#[derive(Debug, Clone, PartialEq)]
pub struct RegNetParams {
    pub depth: u32,
    pub w0: u32,
    pub w_slope: f64,
    pub w_mult: f64,
    pub group_width: u32,
    pub bottleneck_ratio: f64,
    pub resolution: u32,
    pub kind: RegNetKind,
}

pub const REGNET_STEM_WIDTH: u32 = 32;
pub const REGNET_Z_HEAD_WIDTH: u32 = 1792;
pub const REGNET_NUM_CLASSES: u32 = 1000;
const MAX_STAGES: usize = 4;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("invalid RegNet parameters: {}", .0.join("; "))]
    InvalidParams(Vec<String>),
    #[error("parameters yield {0} distinct widths; at most {MAX_STAGES} stages are supported")]
    DesignError(usize),
    #[error("unknown RegNet kind {0:?}, expected Y or Z")]
    UnknownKind(String),
    #[error("unknown EfficientNet variant {0:?}, expected B0..B5")]
    UnknownVariant(String),
    #[error("invalid design-space ranges: {0}")]
    InvalidRanges(String),
    #[error("design space exhausted: {0}")]
    Exhausted(String),
    #[error(transparent)]
    Complexity(#[from] ComplexityError),
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn validate_params(p: &RegNetParams) -> Vec<String> {
    let mut out = Vec::new();
    if p.depth < 1 {
        out.push("depth must be >= 1".to_string());
    }
    if p.w0 < 1 {
        out.push("w0 must be >= 1".to_string());
    }
    if p.w_slope < 0.0 || p.w_slope.is_nan() {
        out.push("w_slope must be >= 0".to_string());
    }
    if p.w_mult <= 1.0 || p.w_mult.is_nan() {
        out.push("w_mult must be > 1".to_string());
    }
    if p.group_width < 1 {
        out.push("group_width must be >= 1".to_string());
    }
    if p.resolution < 32 {
        out.push("resolution must be >= 32".to_string());
    }
    if p.bottleneck_ratio <= 0.0 || p.bottleneck_ratio.is_nan() {
        out.push("bottleneck_ratio must be > 0".to_string());
    }
    out
}

/// Builds a staged network from RegNet generator parameters.
///
/// Per-block continuous widths follow the linear ramp `u_j = w0 + w_slope * j`;
/// each is quantized onto the geometric grid `w0 * w_mult^k` and rounded to a
/// multiple of 8. Runs of equal width become stages (first block stride 2).
/// Group widths are capped at the inner width and stage widths re-rounded so
/// the group divides evenly.
pub fn build_regnet(params: &RegNetParams) -> Result<NetworkSpec, FamilyError> {
    let violations = validate_params(params);
    if !violations.is_empty() {
        return Err(FamilyError::InvalidParams(violations));
    }
    let w0 = f64::from(params.w0);
    let log_mult = params.w_mult.ln();
    let mut runs: Vec<(u32, u32)> = Vec::new(); // (width, depth)
    for j in 0..params.depth {
        let u = w0 + params.w_slope * f64::from(j);
        let exponent = round_half_up((u / w0).ln() / log_mult);
        let width = (round_half_up(w0 * params.w_mult.powf(exponent) / 8.0) * 8.0).max(8.0) as u32;
        match runs.last_mut() {
            Some((w, d)) if *w == width => *d += 1,
            _ => runs.push((width, 1)),
        }
    }
    if runs.len() > MAX_STAGES {
        return Err(FamilyError::DesignError(runs.len()));
    }
    let expansion = (1.0 / params.bottleneck_ratio).round() as u64;
    let stages = runs
        .into_iter()
        .map(|(width, depth)| {
            let inner = u64::from(width) * expansion;
            let g = u64::from(params.group_width).min(inner);
            let m = g / gcd(g, expansion);
            let width = ((m as f64) * round_half_up(f64::from(width) / m as f64)).max(m as f64);
            StageSpec {
                depth,
                width: width as u32,
                group_width: g as u32,
                bottleneck_ratio: params.bottleneck_ratio,
                stride: 2,
                block_kind: params.kind.block_kind(),
                kernel: 3,
            }
        })
        .collect();
    let head_width = match params.kind {
        RegNetKind::Y => 0,
        RegNetKind::Z => REGNET_Z_HEAD_WIDTH,
    };
    Ok(NetworkSpec {
        name: format!("RegNet{}", params.kind),
        input_resolution: params.resolution,
        stem: Some(StemSpec {
            width: REGNET_STEM_WIDTH,
            kernel: 3,
            stride: 2,
        }),
        stages,
        head: Some(HeadSpec {
            width: head_width,
            num_classes: REGNET_NUM_CLASSES,
        }),
    })
}

/// EfficientNet model size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfficientNetVariant {
    B0,
    B1,
    B2,
    B3,
    B4,
    B5,
}

impl EfficientNetVariant {
    pub const ALL: [EfficientNetVariant; 6] = [
        EfficientNetVariant::B0,
        EfficientNetVariant::B1,
        EfficientNetVariant::B2,
        EfficientNetVariant::B3,
        EfficientNetVariant::B4,
        EfficientNetVariant::B5,
    ];

    /// `(width multiplier, depth multiplier, input resolution)` of the
    /// reference design.
    fn coefficients(self) -> (f64, f64, u32) {
        match self {
            EfficientNetVariant::B0 => (1.0, 1.0, 224),
            EfficientNetVariant::B1 => (1.0, 1.1, 240),
            EfficientNetVariant::B2 => (1.1, 1.2, 260),
            EfficientNetVariant::B3 => (1.2, 1.4, 300),
            EfficientNetVariant::B4 => (1.4, 1.8, 380),
            EfficientNetVariant::B5 => (1.6, 2.2, 456),
        }
    }
}

impl fmt::Display for EfficientNetVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B{}", *self as u8)
    }
}

impl FromStr for EfficientNetVariant {
    type Err = FamilyError;

    fn from_str(s: &str) -> Result<Self, FamilyError> {
        match s.to_ascii_uppercase().as_str() {
            "B0" => Ok(EfficientNetVariant::B0),
            "B1" => Ok(EfficientNetVariant::B1),
            "B2" => Ok(EfficientNetVariant::B2),
            "B3" => Ok(EfficientNetVariant::B3),
            "B4" => Ok(EfficientNetVariant::B4),
            "B5" => Ok(EfficientNetVariant::B5),
            other => Err(FamilyError::UnknownVariant(other.to_string())),
        }
    }
}

/// B0 stage table: (expansion, kernel, stride, width, depth).
const EFFICIENTNET_B0_STAGES: [(u32, u32, u32, u32, u32); 7] = [
    (1, 3, 1, 16, 1),
    (6, 3, 2, 24, 2),
    (6, 5, 2, 40, 2),
    (6, 3, 2, 80, 3),
    (6, 5, 1, 112, 3),
    (6, 5, 2, 192, 4),
    (6, 3, 1, 320, 1),
];
const EFFICIENTNET_STEM_WIDTH: u32 = 32;
const EFFICIENTNET_HEAD_WIDTH: u32 = 1280;

/// Reference channel rounding: nearest multiple of 8, never dropping below
/// 90% of the requested value, minimum 8.
fn make_divisible(v: f64) -> u32 {
    let new_v = (((v + 4.0) as u32) / 8 * 8).max(8);
    if f64::from(new_v) < 0.9 * v {
        new_v + 8
    } else {
        new_v
    }
}

/// Builds an EfficientNet variant: B0 from the embedded seven-stage MBConv
/// table, B1..B5 by the reference per-variant width/depth coefficients and
/// resolutions (channels rounded with [`make_divisible`], depths ceiled).
pub fn build_efficientnet(variant: EfficientNetVariant) -> NetworkSpec {
    let (w_mult, d_mult, resolution) = variant.coefficients();
    let stages = EFFICIENTNET_B0_STAGES
        .iter()
        .map(|&(expansion, kernel, stride, width, depth)| StageSpec {
            depth: (f64::from(depth) * d_mult).ceil() as u32,
            width: make_divisible(f64::from(width) * w_mult),
            group_width: 1,
            bottleneck_ratio: 1.0 / f64::from(expansion),
            stride,
            block_kind: BlockKind::MBConv,
            kernel,
        })
        .collect();
    NetworkSpec {
        name: format!("EfficientNet-{variant}"),
        input_resolution: resolution,
        stem: Some(StemSpec {
            width: make_divisible(f64::from(EFFICIENTNET_STEM_WIDTH) * w_mult),
            kernel: 3,
            stride: 2,
        }),
        stages,
        head: Some(HeadSpec {
            width: make_divisible(f64::from(EFFICIENTNET_HEAD_WIDTH) * w_mult),
            num_classes: 1000,
        }),
    }
}

/// Names served by [`registry_model`].
pub const REGISTRY_NAMES: [&str; 10] = [
    "EfficientNet-B0",
    "EfficientNet-B1",
    "EfficientNet-B2",
    "EfficientNet-B3",
    "EfficientNet-B4",
    "EfficientNet-B5",
    "RegNetY-500MF",
    "RegNetZ-500MF",
    "RegNetY-4GF",
    "RegNetZ-4GF",
];

// The RegNet entries are complexity-matched reconstructions: the original
// generator parameters for these model names are not published, so these were
// found by random search against the familiar flops/params/acts figures.
fn registry_regnet(name: &str) -> Option<RegNetParams> {
    let (depth, w0, w_slope, w_mult, group_width, kind) = match name {
        "RegNetY-500MF" => (25, 32, 15.11, 2.311, 16, RegNetKind::Y),
        "RegNetZ-500MF" => (20, 24, 10.82, 2.02, 8, RegNetKind::Z),
        "RegNetY-4GF" => (20, 96, 45.66, 2.468, 56, RegNetKind::Y),
        "RegNetZ-4GF" => (16, 80, 33.11, 2.147, 8, RegNetKind::Z),
        _ => return None,
    };
    Some(RegNetParams {
        depth,
        w0,
        w_slope,
        w_mult,
        group_width,
        bottleneck_ratio: kind.bottleneck_ratio(),
        resolution: 224,
        kind,
    })
}

/// Builds a named built-in model, or `None` if the name is not in the
/// registry.
pub fn registry_model(name: &str) -> Option<NetworkSpec> {
    if let Some(rest) = name.strip_prefix("EfficientNet-") {
        let variant = EfficientNetVariant::from_str(rest).ok()?;
        return Some(build_efficientnet(variant));
    }
    let params = registry_regnet(name)?;
    let mut spec = build_regnet(&params).expect("registry parameters are valid");
    spec.name = name.to_string();
    Some(spec)
}

/// Inclusive sampling ranges for each RegNet generator parameter, plus the
/// flop acceptance window.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSpaceRanges {
    pub depth: (u32, u32),
    pub w0: (u32, u32),
    pub w_slope: (f64, f64),
    pub w_mult: (f64, f64),
    pub group_width: (u32, u32),
    pub resolution: (u32, u32),
    pub kind: RegNetKind,
    pub flop_target: f64,
    pub flop_tolerance: f64,
}

impl DesignSpaceRanges {
    /// Default search ranges per block family.
    pub fn default_for(kind: RegNetKind, flop_target: f64, flop_tolerance: f64) -> Self {
        match kind {
            RegNetKind::Y => DesignSpaceRanges {
                depth: (6, 25),
                w0: (48, 136),
                w_slope: (8.0, 64.0),
                w_mult: (2.0, 2.75),
                group_width: (8, 48),
                resolution: (224, 224),
                kind,
                flop_target,
                flop_tolerance,
            },
            RegNetKind::Z => DesignSpaceRanges {
                depth: (6, 25),
                w0: (16, 96),
                w_slope: (8.0, 48.0),
                w_mult: (2.0, 2.75),
                group_width: (8, 32),
                resolution: (224, 224),
                kind,
                flop_target,
                flop_tolerance,
            },
        }
    }

    fn validate(&self) -> Result<(), FamilyError> {
        let bad = |msg: &str| Err(FamilyError::InvalidRanges(msg.to_string()));
        if self.depth.0 < 1 || self.depth.0 > self.depth.1 {
            return bad("depth range is empty or starts below 1");
        }
        if self.w0.0 < 8 || self.w0.0 > self.w0.1 {
            return bad("w0 range is empty or starts below 8");
        }
        if self.w_slope.0 < 0.0 || self.w_slope.0.is_nan() || self.w_slope.0 > self.w_slope.1 {
            return bad("w_slope range is empty or negative");
        }
        if self.w_mult.0 <= 1.0 || self.w_mult.0.is_nan() || self.w_mult.0 > self.w_mult.1 {
            return bad("w_mult range is empty or starts at or below 1");
        }
        if self.group_width.0 < 1 || self.group_width.0 > self.group_width.1 {
            return bad("group_width range is empty or starts below 1");
        }
        if self.resolution.0 < 32 || self.resolution.0 > self.resolution.1 {
            return bad("resolution range is empty or starts below 32");
        }
        if self.flop_target <= 0.0 || self.flop_target.is_nan() {
            return bad("flop_target must be positive");
        }
        if self.flop_tolerance.is_nan() || self.flop_tolerance <= 0.0 || self.flop_tolerance >= 1.0
        {
            return bad("flop_tolerance must lie in (0, 1)");
        }
        Ok(())
    }

    fn corner(&self, low: bool) -> Vec<RegNetParams> {
        let pick_u = |(lo, hi): (u32, u32)| if low { lo } else { hi };
        let pick_f = |(lo, hi): (f64, f64)| if low { lo } else { hi };
        // Flops are monotone in every parameter except w_mult (it controls
        // quantization coarseness, not scale), so both endpoints are tried.
        [self.w_mult.0, self.w_mult.1]
            .iter()
            .map(|&w_mult| RegNetParams {
                depth: pick_u(self.depth),
                w0: pick_u(self.w0),
                w_slope: pick_f(self.w_slope),
                w_mult,
                group_width: pick_u(self.group_width),
                bottleneck_ratio: self.kind.bottleneck_ratio(),
                resolution: pick_u(self.resolution),
                kind: self.kind,
            })
            .collect()
    }
}

/// One accepted sample: the generator parameters, the built spec, and its
/// complexity.
#[derive(Debug, Clone)]
pub struct SampledModel {
    pub params: RegNetParams,
    pub spec: NetworkSpec,
    pub report: ComplexityReport,
}

/// Give up when this many consecutive draws miss the acceptance window.
const EXHAUSTION_DRAWS: u64 = 1_000_000;
/// Safety margin on the corner-based infeasibility check; flops are not
/// perfectly monotone in `w_mult`.
const CORNER_MARGIN: f64 = 1.5;

fn draw_params(ranges: &DesignSpaceRanges, rng: &mut ChaCha8Rng) -> RegNetParams {
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| {
        if lo >= hi {
            lo
        } else {
            (rng.gen_range(lo.ln()..=hi.ln())).exp()
        }
    };
    let depth = rng.gen_range(ranges.depth.0..=ranges.depth.1);
    // widths are drawn log-uniformly (they set the flop scale), then snapped
    // to multiples of 8 inside the range
    let w0 = {
        let (lo, hi) = ranges.w0;
        let lo8 = lo.div_ceil(8) * 8;
        let hi8 = hi / 8 * 8;
        if lo8 > hi8 {
            rng.gen_range(lo..=hi)
        } else {
            let x = log_uniform(rng, f64::from(lo), f64::from(hi));
            ((round_half_up(x / 8.0) * 8.0) as u32).clamp(lo8, hi8)
        }
    };
    let w_slope = log_uniform(rng, ranges.w_slope.0, ranges.w_slope.1);
    let w_mult = rng.gen_range(ranges.w_mult.0..=ranges.w_mult.1);
    let group_width = {
        let (lo, hi) = ranges.group_width;
        let lo8 = lo.div_ceil(8) * 8;
        let hi8 = hi / 8 * 8;
        if lo8 > hi8 {
            rng.gen_range(lo..=hi)
        } else {
            lo8 + 8 * rng.gen_range(0..=(hi8 - lo8) / 8)
        }
    };
    let resolution = {
        let (lo, hi) = ranges.resolution;
        let lo2 = lo.div_ceil(2) * 2;
        let hi2 = hi / 2 * 2;
        if lo2 > hi2 {
            lo
        } else {
            lo2 + 2 * rng.gen_range(0..=(hi2 - lo2) / 2)
        }
    };
    RegNetParams {
        depth,
        w0,
        w_slope,
        w_mult,
        group_width,
        bottleneck_ratio: ranges.kind.bottleneck_ratio(),
        resolution,
        kind: ranges.kind,
    }
}

/// Rejection-samples the design space until `count` models land inside the
/// flop window. Deterministic given `seed`: draw `i` comes from an
/// independent counter-derived stream, so candidates may be evaluated in
/// parallel without changing the result.
pub fn sample_design_space(
    ranges: &DesignSpaceRanges,
    count: usize,
    seed: u64,
) -> Result<Vec<SampledModel>, FamilyError> {
    ranges.validate()?;
    if count < 1 {
        return Err(FamilyError::InvalidRanges("count must be >= 1".to_string()));
    }
    let lo = ranges.flop_target * (1.0 - ranges.flop_tolerance);
    let hi = ranges.flop_target * (1.0 + ranges.flop_tolerance);

    // Fast infeasibility check on the range corners.
    let corner_flops = |corners: Vec<RegNetParams>| -> Option<Vec<f64>> {
        let flops: Vec<f64> = corners
            .iter()
            .filter_map(|p| {
                let spec = build_regnet(p).ok()?;
                Some(network_complexity(&spec).ok()?.flops)
            })
            .collect();
        (!flops.is_empty()).then_some(flops)
    };
    if let Some(flops) = corner_flops(ranges.corner(true)) {
        let min = flops.iter().cloned().fold(f64::INFINITY, f64::min);
        if min > hi * CORNER_MARGIN {
            return Err(FamilyError::Exhausted(format!(
                "smallest constructible model has ~{min:.3e} flops, above the window [{lo:.3e}, {hi:.3e}]"
            )));
        }
    }
    if let Some(flops) = corner_flops(ranges.corner(false)) {
        let max = flops.iter().cloned().fold(0.0, f64::max);
        if max < lo / CORNER_MARGIN {
            return Err(FamilyError::Exhausted(format!(
                "largest constructible model has ~{max:.3e} flops, below the window [{lo:.3e}, {hi:.3e}]"
            )));
        }
    }

    let mut accepted = Vec::with_capacity(count);
    let mut draw_index = 0u64;
    let mut misses_since_accept = 0u64;
    while accepted.len() < count {
        if misses_since_accept >= EXHAUSTION_DRAWS {
            return Err(FamilyError::Exhausted(format!(
                "no acceptable model in {EXHAUSTION_DRAWS} consecutive draws \
                 ({} accepted so far); ranges are inconsistent with the target",
                accepted.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(draw_index);
        draw_index += 1;
        let params = draw_params(ranges, &mut rng);
        let Ok(mut spec) = build_regnet(&params) else {
            misses_since_accept += 1;
            continue;
        };
        let report = network_complexity(&spec)?;
        if report.flops >= lo && report.flops <= hi {
            spec.name = format!(
                "RegNet{}-sampled-seed{}-{:02}",
                ranges.kind,
                seed,
                accepted.len()
            );
            accepted.push(SampledModel {
                params,
                spec,
                report,
            });
            misses_since_accept = 0;
        } else {
            misses_since_accept += 1;
        }
    }
    Ok(accepted)
}
