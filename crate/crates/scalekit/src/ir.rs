//! Network intermediate representation: staged conv networks, validation,
//! resolution schedules, and the canonical serialized form.
//!
//! All IR values are immutable plain data; they are `Send + Sync` and carry no
//! interior mutability. Widths, depths, and resolutions are integers here; the
//! [`crate::scaling`] module owns the continuous (unquantized) representation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Schema tag written into every serialized network document.
pub const SCHEMA_VERSION: &str = "scalekit/1";

/// Input channels of the first conv (RGB images).
pub const INPUT_CHANNELS: u32 = 3;

/// The block family a stage is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    /// Residual bottleneck with group conv and SE (RegNetY-style), `b = 1`.
    ResidualBottleneckY,
    /// Inverted bottleneck with group conv and SE (RegNetZ-style), `b < 1`,
    /// no residual on strided blocks.
    InvertedBottleneckZ,
    /// Inverted bottleneck with depthwise conv and SE (EfficientNet-style).
    MBConv,
    /// A bare k x k group conv; the idealized stage of the scaling algebra.
    PlainConv,
}

impl BlockKind {
    pub const ALL: [BlockKind; 4] = [
        BlockKind::ResidualBottleneckY,
        BlockKind::InvertedBottleneckZ,
        BlockKind::MBConv,
        BlockKind::PlainConv,
    ];

    /// Whether blocks of this kind carry a squeeze-and-excitation pair.
    pub fn uses_se(self) -> bool {
        !matches!(self, BlockKind::PlainConv)
    }

    /// Whether the expansion width is derived from the block input width
    /// (MBConv) rather than the stage output width (Y/Z).
    pub fn input_derived_expansion(self) -> bool {
        matches!(self, BlockKind::MBConv)
    }

    /// Whether a strided block adds a 1x1 projection shortcut.
    pub fn strided_shortcut(self) -> bool {
        matches!(self, BlockKind::ResidualBottleneckY)
    }
}

/// One stage: a run of `depth` blocks sharing width, group width, and kind.
/// The first block applies `stride` and takes the preceding width as input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub depth: u32,
    pub width: u32,
    pub group_width: u32,
    pub bottleneck_ratio: f64,
    pub stride: u32,
    pub block_kind: BlockKind,
    pub kernel: u32,
}

impl StageSpec {
    /// Integer expansion factor `1/b`. Stages are validated so that the
    /// bottleneck ratio is the reciprocal of a positive integer.
    pub fn expansion(&self) -> u32 {
        if self.bottleneck_ratio <= 0.0 {
            return 1;
        }
        let e = (1.0 / self.bottleneck_ratio).round();
        if e < 1.0 {
            1
        } else {
            e as u32
        }
    }

    /// Width of the grouped conv inside a steady-state block of this stage.
    pub fn inner_width(&self) -> u64 {
        u64::from(self.width) * u64::from(self.expansion())
    }
}

/// Stem conv ahead of the first stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StemSpec {
    pub width: u32,
    pub kernel: u32,
    pub stride: u32,
}

/// Head: optional pre-classifier 1x1 conv (`width = 0` means none) and the
/// classifier output count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeadSpec {
    pub width: u32,
    pub num_classes: u32,
}

/// A staged conv network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub name: String,
    pub input_resolution: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<StemSpec>,
    pub stages: Vec<StageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<HeadSpec>,
}

/// Per-stage output resolutions, derived from the input resolution and the
/// stem/stage strides by successive ceiling division.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolutionSchedule {
    /// Output resolution of the stem conv, if a stem is present.
    pub stem_output: Option<u32>,
    /// Output resolution of each stage, aligned with `spec.stages`.
    pub stage_outputs: Vec<u32>,
}

impl ResolutionSchedule {
    /// Input resolution seen by stage `i`.
    pub fn stage_input(&self, spec: &NetworkSpec, i: usize) -> u32 {
        if i == 0 {
            self.stem_output.unwrap_or(spec.input_resolution)
        } else {
            self.stage_outputs[i - 1]
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    /// A stride no longer fits the incoming resolution; integer division
    /// would reach zero.
    #[error("degenerate resolution at {at}: stride {stride} does not fit resolution {resolution}")]
    Degenerate {
        at: String,
        resolution: u32,
        stride: u32,
    },
}

/// Errors raised when reading or writing the canonical document form.
#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema version {found:?}, expected {expected:?}")]
    Schema { found: String, expected: String },
}

/// Checks every typed invariant and returns one description per violation.
/// An empty list means the spec is valid. Violations are data, not failures.
pub fn validate_network(spec: &NetworkSpec) -> Vec<String> {
    let mut out = Vec::new();
    if spec.input_resolution < 1 {
        out.push("input_resolution must be >= 1".to_string());
    }
    if spec.stages.is_empty() {
        out.push("stages must be non-empty".to_string());
    }
    if let Some(stem) = &spec.stem {
        if stem.width < 1 {
            out.push("stem: width must be >= 1".to_string());
        }
        if stem.kernel < 1 {
            out.push("stem: kernel must be >= 1".to_string());
        }
        if stem.stride < 1 {
            out.push("stem: stride must be >= 1".to_string());
        }
    }
    if let Some(head) = &spec.head {
        if head.num_classes < 1 {
            out.push("head: num_classes must be >= 1".to_string());
        }
    }
    let mut prev_width = spec.stem.as_ref().map(|s| s.width);
    for (i, stage) in spec.stages.iter().enumerate() {
        validate_stage(i, stage, prev_width, &mut out);
        prev_width = Some(stage.width);
    }
    out
}

fn validate_stage(i: usize, stage: &StageSpec, prev_width: Option<u32>, out: &mut Vec<String>) {
    if stage.depth < 1 {
        out.push(format!("stage {i}: depth must be >= 1"));
    }
    if stage.width < 1 {
        out.push(format!("stage {i}: width must be >= 1"));
    }
    if stage.kernel < 1 {
        out.push(format!("stage {i}: kernel must be >= 1"));
    }
    if stage.stride < 1 {
        out.push(format!("stage {i}: stride must be >= 1"));
    }
    if stage.group_width < 1 {
        out.push(format!("stage {i}: group width must be >= 1"));
    }
    let b = stage.bottleneck_ratio;
    if b <= 0.0 || b.is_nan() {
        out.push(format!("stage {i}: bottleneck ratio must be > 0"));
        return;
    }
    let recip = 1.0 / b;
    if (recip - recip.round()).abs() > 1e-9 || recip < 1.0 - 1e-9 {
        out.push(format!(
            "stage {i}: bottleneck ratio must be the reciprocal of a positive integer, got {b}"
        ));
    }
    match stage.block_kind {
        BlockKind::ResidualBottleneckY | BlockKind::PlainConv => {
            if (b - 1.0).abs() > 1e-12 {
                out.push(format!(
                    "stage {i}: bottleneck ratio must be 1 for {:?} blocks, got {b}",
                    stage.block_kind
                ));
            }
        }
        BlockKind::InvertedBottleneckZ => {
            if b >= 1.0 {
                out.push(format!(
                    "stage {i}: bottleneck ratio must be < 1 for InvertedBottleneckZ blocks, got {b}"
                ));
            }
        }
        BlockKind::MBConv => {
            if b > 1.0 + 1e-12 {
                out.push(format!(
                    "stage {i}: bottleneck ratio must be <= 1 for MBConv blocks, got {b}"
                ));
            }
        }
    }
    if stage.width >= 1 && stage.group_width >= 1 {
        let inner = stage.inner_width();
        let g = u64::from(stage.group_width);
        if g > inner {
            out.push(format!(
                "stage {i}: group width {g} exceeds inner width {inner}"
            ));
        } else if !inner.is_multiple_of(g) {
            out.push(format!(
                "stage {i}: group width {g} does not divide inner width {inner}"
            ));
        }
        // A plain conv groups directly over its input channels, so stage
        // transitions must also divide.
        if stage.block_kind == BlockKind::PlainConv {
            if let Some(w_in) = prev_width {
                if w_in >= 1 && w_in != stage.width && !u64::from(w_in).is_multiple_of(g) {
                    out.push(format!(
                        "stage {i}: group width {g} does not divide input width {w_in}"
                    ));
                }
            }
        }
    }
}

/// Derives per-stage output resolutions. Each stride-`s` step maps `r` to
/// `ceil(r / s)`, matching same-padded conv arithmetic; a step whose stride
/// exceeds the incoming resolution (so that floor division would reach zero)
/// is degenerate.
pub fn resolution_schedule(spec: &NetworkSpec) -> Result<ResolutionSchedule, ScheduleError> {
    let mut r = spec.input_resolution;
    let mut stem_output = None;
    if let Some(stem) = &spec.stem {
        r = divide_resolution(r, stem.stride, "stem")?;
        stem_output = Some(r);
    }
    let mut stage_outputs = Vec::with_capacity(spec.stages.len());
    for (i, stage) in spec.stages.iter().enumerate() {
        r = divide_resolution(r, stage.stride, &format!("stage {i}"))?;
        stage_outputs.push(r);
    }
    Ok(ResolutionSchedule {
        stem_output,
        stage_outputs,
    })
}

fn divide_resolution(r: u32, stride: u32, at: &str) -> Result<u32, ScheduleError> {
    if stride == 0 || r < stride {
        return Err(ScheduleError::Degenerate {
            at: at.to_string(),
            resolution: r,
            stride,
        });
    }
    Ok(r.div_ceil(stride))
}

#[derive(Serialize, Deserialize)]
struct Document {
    schema: String,
    name: String,
    input_resolution: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stem: Option<StemSpec>,
    stages: Vec<StageSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    head: Option<HeadSpec>,
}

/// Serializes a spec to the canonical versioned document (pretty JSON with a
/// fixed key order). `deserialize(serialize(x)) == x` for every valid spec.
pub fn serialize(spec: &NetworkSpec) -> String {
    let doc = Document {
        schema: SCHEMA_VERSION.to_string(),
        name: spec.name.clone(),
        input_resolution: spec.input_resolution,
        stem: spec.stem.clone(),
        stages: spec.stages.clone(),
        head: spec.head.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("spec serialization cannot fail");
    text.push('\n');
    text
}

/// Parses a canonical document back into a spec. Malformed documents yield a
/// parse error with the offending location; an unrecognized schema tag is a
/// schema error.
pub fn deserialize(text: &str) -> Result<NetworkSpec, DocumentError> {
    let doc: Document = serde_json::from_str(text).map_err(|e| DocumentError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.schema != SCHEMA_VERSION {
        return Err(DocumentError::Schema {
            found: doc.schema,
            expected: SCHEMA_VERSION.to_string(),
        });
    }
    Ok(NetworkSpec {
        name: doc.name,
        input_resolution: doc.input_resolution,
        stem: doc.stem,
        stages: doc.stages,
        head: doc.head,
    })
}
