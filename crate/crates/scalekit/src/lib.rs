//! Staged convolutional network modeling: an IR for stem/stages/head
//! networks, exact flop/parameter/activation accounting, the exponent family
//! of scaling strategies with discretization, concrete model families
//! (EfficientNet, RegNetY/Z) with flop-regime sampling, and a linear
//! runtime-from-activations model.
//!
//! The `scalekit` binary exposes the same operations as subcommands; see
//! [`cli`].

pub mod cli;
pub mod complexity;
pub mod families;
pub mod ir;
pub mod runtime;
pub mod scaling;

pub use complexity::{
    block_complexity, conv_complexity, network_complexity, stage_complexity, ComplexityReport,
};
pub use families::{
    build_efficientnet, build_regnet, registry_model, sample_design_space, DesignSpaceRanges,
    EfficientNetVariant, RegNetKind, RegNetParams,
};
pub use ir::{
    deserialize, resolution_schedule, serialize, validate_network, BlockKind, HeadSpec,
    NetworkSpec, StageSpec, StemSpec,
};
pub use runtime::{
    correlation_report, fit_runtime, pearson, predict_runtime, FeatureSet, Measurement,
    RuntimeModel,
};
pub use scaling::{
    fast_policy, policy_from_name, predicted_multipliers, quantize_network, scale_continuous,
    scale_network, sweep, ContinuousNetwork, ScaleRequest, ScaledNetwork, ScalingPolicy,
};
