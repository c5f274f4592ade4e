//! Flop, parameter, and activation accounting for convs, blocks, stages, and
//! whole networks.
//!
//! Conventions: flops are multiply-adds, params count conv weights, and
//! activations count elements of conv output tensors only. Pooling,
//! normalization, nonlinearities, and the classifier output contribute zero
//! activations. The classifier is counted as a 1x1 conv at resolution 1.
//!
//! A grouped conv with input width `w_in`, output width `w_out`, group width
//! `g`, kernel `k`, and output resolution `r` costs
//! `f = w_out * g * k^2 * r^2`, `p = f / r^2`, `a = w_out * r^2`.
//! Full conv is the `g = w_in` case; depthwise is `g = 1`.
//!
//! All quantities are carried as `f64`; for discrete networks every value is
//! an exactly-representable integer. The same decomposition also evaluates
//! continuous (unquantized) networks produced by the scaling module, where it
//! uses exact resolution division instead of the integer ceiling schedule.

use crate::ir::{
    resolution_schedule, validate_network, BlockKind, NetworkSpec, StageSpec, INPUT_CHANNELS,
};
use crate::scaling::ContinuousNetwork;
use thiserror::Error;

/// One labeled component of a complexity report.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakdownEntry {
    pub label: String,
    pub flops: f64,
    pub params: f64,
    pub acts: f64,
}

/// Totals plus a per-component breakdown. Totals always equal the sum of the
/// breakdown entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ComplexityReport {
    pub flops: f64,
    pub params: f64,
    pub acts: f64,
    pub breakdown: Vec<BreakdownEntry>,
}

impl ComplexityReport {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, label: impl Into<String>, flops: f64, params: f64, acts: f64) {
        self.flops += flops;
        self.params += params;
        self.acts += acts;
        self.breakdown.push(BreakdownEntry {
            label: label.into(),
            flops,
            params,
            acts,
        });
    }

    /// Folds another report in as a single labeled entry.
    fn push_total(&mut self, label: impl Into<String>, other: &ComplexityReport) {
        self.push(label, other.flops, other.params, other.acts);
    }

    /// Flat CSV row `{name, flops, params, acts}`.
    pub fn csv_row(&self, name: &str) -> String {
        format!("{},{},{},{}", name, self.flops, self.params, self.acts)
    }
}

/// Header matching [`ComplexityReport::csv_row`].
pub const REPORT_CSV_HEADER: &str = "name,flops,params,acts";

#[derive(Debug, Error)]
pub enum ComplexityError {
    #[error("conv dimensions must be >= 1")]
    ZeroDimension,
    #[error("group width {group} does not divide conv width {width}")]
    GroupDivisibility { group: u64, width: u64 },
    #[error("incompatible groups: output width {w_out} does not split into {groups} groups")]
    GroupCount { w_out: u64, groups: u64 },
    #[error(transparent)]
    Schedule(#[from] crate::ir::ScheduleError),
    #[error("invalid network: {}", .0.join("; "))]
    InvalidNetwork(Vec<String>),
}

/// Raw conv metrics over reals; exact for integral inputs.
pub(crate) fn conv_metrics(w_out: f64, r: f64, k: f64, g: f64) -> (f64, f64, f64) {
    let p = w_out * g * k * k;
    (p * r * r, p, w_out * r * r)
}

/// Complexity of one grouped conv layer. `g` is the group width on the input
/// side; it must divide `w_in`, and `w_out` must split evenly over the
/// `w_in / g` groups.
pub fn conv_complexity(
    w_in: u64,
    w_out: u64,
    r_out: u64,
    k: u64,
    g: u64,
) -> Result<ComplexityReport, ComplexityError> {
    if w_in == 0 || w_out == 0 || r_out == 0 || k == 0 || g == 0 {
        return Err(ComplexityError::ZeroDimension);
    }
    if !w_in.is_multiple_of(g) {
        return Err(ComplexityError::GroupDivisibility {
            group: g,
            width: w_in,
        });
    }
    let groups = w_in / g;
    if !w_out.is_multiple_of(groups) {
        return Err(ComplexityError::GroupCount { w_out, groups });
    }
    let (f, p, a) = conv_metrics(w_out as f64, r_out as f64, k as f64, g as f64);
    let mut report = ComplexityReport::new();
    report.push("conv", f, p, a);
    Ok(report)
}

/// One conv inside a block, in block-decomposition form.
struct ConvShape {
    label: &'static str,
    w_in: f64,
    w_out: f64,
    r: f64,
    k: f64,
    g: f64,
}

/// Geometry of a single block. `r_in` is the resolution entering the block
/// (the 1x1 expansion runs there); the grouped conv carries the stride and
/// produces `r_out`.
struct BlockShape {
    kind: BlockKind,
    w_in: f64,
    w_out: f64,
    group: f64,
    expansion: u32,
    kernel: f64,
    strided: bool,
    r_in: f64,
    r_out: f64,
    discrete: bool,
}

fn block_convs(b: &BlockShape) -> Vec<ConvShape> {
    if b.kind == BlockKind::PlainConv {
        return vec![ConvShape {
            label: "conv",
            w_in: b.w_in,
            w_out: b.w_out,
            r: b.r_out,
            k: b.kernel,
            g: b.group,
        }];
    }
    let e = f64::from(b.expansion);
    // MBConv expands from the block input (reference design); Y and Z expand
    // to the stage width over the bottleneck ratio.
    let w_b = if b.kind.input_derived_expansion() {
        b.w_in * e
    } else {
        b.w_out * e
    };
    let w_b = if b.discrete { w_b.round() } else { w_b };
    let mut convs = Vec::with_capacity(6);
    // An MBConv with expansion 1 has no expansion conv at all.
    if !(b.kind == BlockKind::MBConv && b.expansion == 1) {
        convs.push(ConvShape {
            label: "expand_1x1",
            w_in: b.w_in,
            w_out: w_b,
            r: b.r_in,
            k: 1.0,
            g: b.w_in,
        });
    }
    convs.push(ConvShape {
        label: "group_conv",
        w_in: w_b,
        w_out: w_b,
        r: b.r_out,
        k: b.kernel,
        g: b.group,
    });
    if b.kind.uses_se() {
        // SE reduces to a quarter of the block input width, at resolution 1.
        let w_se = if b.discrete {
            (b.w_in / 4.0).round().max(1.0)
        } else {
            b.w_in / 4.0
        };
        convs.push(ConvShape {
            label: "se_reduce",
            w_in: w_b,
            w_out: w_se,
            r: 1.0,
            k: 1.0,
            g: w_b,
        });
        convs.push(ConvShape {
            label: "se_expand",
            w_in: w_se,
            w_out: w_b,
            r: 1.0,
            k: 1.0,
            g: w_se,
        });
    }
    convs.push(ConvShape {
        label: "project_1x1",
        w_in: w_b,
        w_out: b.w_out,
        r: b.r_out,
        k: 1.0,
        g: w_b,
    });
    if b.kind.strided_shortcut() && b.strided {
        convs.push(ConvShape {
            label: "shortcut_1x1",
            w_in: b.w_in,
            w_out: b.w_out,
            r: b.r_out,
            k: 1.0,
            g: b.w_in,
        });
    }
    convs
}

fn eval_block(b: &BlockShape) -> Result<ComplexityReport, ComplexityError> {
    let mut report = ComplexityReport::new();
    for conv in block_convs(b) {
        if b.discrete {
            let (w_in, g) = (conv.w_in as u64, conv.g as u64);
            if g == 0 || w_in == 0 {
                return Err(ComplexityError::ZeroDimension);
            }
            if !w_in.is_multiple_of(g) {
                return Err(ComplexityError::GroupDivisibility {
                    group: g,
                    width: w_in,
                });
            }
        }
        let (f, p, a) = conv_metrics(conv.w_out, conv.r, conv.k, conv.g);
        report.push(conv.label, f, p, a);
    }
    Ok(report)
}

fn shape_for(stage: &StageSpec, w_in: u32, stride: u32, r_in: u32, r_out: u32) -> BlockShape {
    BlockShape {
        kind: stage.block_kind,
        w_in: f64::from(w_in),
        w_out: f64::from(stage.width),
        group: f64::from(stage.group_width),
        expansion: stage.expansion(),
        kernel: f64::from(stage.kernel),
        strided: stride > 1,
        r_in: f64::from(r_in),
        r_out: f64::from(r_out),
        discrete: true,
    }
}

/// Complexity of a single block of `stage`, entering at width `w_in` and
/// resolution `r_in`, producing `r_out`. The block applies the stage stride.
pub fn block_complexity(
    stage: &StageSpec,
    w_in: u32,
    r_in: u32,
    r_out: u32,
) -> Result<ComplexityReport, ComplexityError> {
    eval_block(&shape_for(stage, w_in, stage.stride, r_in, r_out))
}

/// Complexity of a whole stage: the first block applies `(w_in, stride)`, the
/// remaining `depth - 1` blocks run at `(width, stride 1)`.
pub fn stage_complexity(
    stage: &StageSpec,
    w_in: u32,
    r_in: u32,
    r_out: u32,
) -> Result<ComplexityReport, ComplexityError> {
    let first = eval_block(&shape_for(stage, w_in, stage.stride, r_in, r_out))?;
    let mut report = ComplexityReport::new();
    report.push_total("block0", &first);
    if stage.depth > 1 {
        let inner = eval_block(&shape_for(stage, stage.width, 1, r_out, r_out))?;
        let n = f64::from(stage.depth - 1);
        report.push(
            format!("blocks1-{}", stage.depth - 1),
            inner.flops * n,
            inner.params * n,
            inner.acts * n,
        );
    }
    Ok(report)
}

/// Complexity of the whole network: stem conv, every stage, the optional head
/// 1x1 conv, and the classifier (a 1x1 conv at resolution 1 whose output
/// contributes zero activations).
pub fn network_complexity(spec: &NetworkSpec) -> Result<ComplexityReport, ComplexityError> {
    let violations = validate_network(spec);
    if !violations.is_empty() {
        return Err(ComplexityError::InvalidNetwork(violations));
    }
    let sched = resolution_schedule(spec)?;
    let mut report = ComplexityReport::new();
    let mut w_in = match &spec.stem {
        Some(stem) => {
            let r = sched.stem_output.expect("stem present");
            let (f, p, a) = conv_metrics(
                f64::from(stem.width),
                f64::from(r),
                f64::from(stem.kernel),
                f64::from(INPUT_CHANNELS),
            );
            report.push("stem", f, p, a);
            stem.width
        }
        // With no stem the first stage enters at its own width, matching the
        // uniform-stage algebra.
        None => spec.stages[0].width,
    };
    for (i, stage) in spec.stages.iter().enumerate() {
        let r_in = sched.stage_input(spec, i);
        let r_out = sched.stage_outputs[i];
        let stage_report = stage_complexity(stage, w_in, r_in, r_out)?;
        report.push_total(format!("stage{i}"), &stage_report);
        w_in = stage.width;
    }
    if let Some(head) = &spec.head {
        let r = *sched.stage_outputs.last().expect("stages non-empty");
        let mut cls_in = w_in;
        if head.width > 0 {
            let (f, p, a) = conv_metrics(f64::from(head.width), f64::from(r), 1.0, f64::from(w_in));
            report.push("head_1x1", f, p, a);
            cls_in = head.width;
        }
        let (f, p, _) = conv_metrics(f64::from(head.num_classes), 1.0, 1.0, f64::from(cls_in));
        report.push("classifier", f, p, 0.0);
    }
    Ok(report)
}

/// Complexity of a continuous network: the same decomposition with exact
/// resolution division and no rounding anywhere.
pub fn continuous_network_complexity(net: &ContinuousNetwork) -> ComplexityReport {
    let mut report = ComplexityReport::new();
    let mut r = net.input_resolution;
    let mut w_in = match &net.stem {
        Some(stem) => {
            r /= f64::from(stem.stride);
            let (f, p, a) = conv_metrics(
                stem.width,
                r,
                f64::from(stem.kernel),
                f64::from(INPUT_CHANNELS),
            );
            report.push("stem", f, p, a);
            stem.width
        }
        None => net.stages[0].width,
    };
    for (i, stage) in net.stages.iter().enumerate() {
        let r_in = r;
        r /= f64::from(stage.stride);
        let make = |w_in: f64, strided: bool, r_in: f64| BlockShape {
            kind: stage.block_kind,
            w_in,
            w_out: stage.width,
            group: stage.group_width,
            expansion: stage.expansion(),
            kernel: f64::from(stage.kernel),
            strided,
            r_in,
            r_out: r,
            discrete: false,
        };
        let first = eval_block(&make(w_in, stage.stride > 1, r_in))
            .expect("continuous evaluation cannot fail");
        let inner =
            eval_block(&make(stage.width, false, r)).expect("continuous evaluation cannot fail");
        let rest = stage.depth - 1.0;
        report.push(
            format!("stage{i}"),
            first.flops + rest * inner.flops,
            first.params + rest * inner.params,
            first.acts + rest * inner.acts,
        );
        w_in = stage.width;
    }
    if let Some(head) = &net.head {
        let mut cls_in = w_in;
        if head.width > 0.0 {
            let (f, p, a) = conv_metrics(head.width, r, 1.0, w_in);
            report.push("head_1x1", f, p, a);
            cls_in = head.width;
        }
        let (f, p, _) = conv_metrics(f64::from(head.num_classes), 1.0, 1.0, cls_in);
        report.push("classifier", f, p, 0.0);
    }
    report
}
