//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured numbers (run with `--nocapture` to see them).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scalekit::complexity::network_complexity;
use scalekit::families::{
    build_regnet, sample_design_space, DesignSpaceRanges, RegNetKind, RegNetParams,
};
use scalekit::ir::{validate_network, BlockKind, NetworkSpec, StageSpec};
use scalekit::runtime::{correlation_report, fit_runtime, FeatureSet, Measurement};
use scalekit::scaling::{
    fast_policy, policy_from_name, predicted_multipliers, quantize_network, scale_continuous,
    sweep, ContinuousNetwork, ScalingPolicy, POLICY_NAMES,
};
use scalekit::{build_efficientnet, EfficientNetVariant};
use std::time::Instant;

fn rel_err(got: f64, want: f64) -> f64 {
    (got / want - 1.0).abs()
}

fn uniform_plain_network(depth: u32, width: u32, group: u32, resolution: u32) -> NetworkSpec {
    NetworkSpec {
        name: "uniform".to_string(),
        input_resolution: resolution,
        stem: None,
        stages: vec![StageSpec {
            depth,
            width,
            group_width: group,
            bottleneck_ratio: 1.0,
            stride: 1,
            block_kind: BlockKind::PlainConv,
            kernel: 1,
        }],
        head: None,
    }
}

/// Criterion 1: for uniform plain stages in continuous mode, the computed
/// (f, p, a) multipliers reproduce every row of the simple, compound, group,
/// and alpha-family tables to 1e-9 relative for s in {2, 4, 10, 100}.
#[test]
fn criterion_1_table_algebra_exact() {
    let start = Instant::now();
    let tol = 1e-9;
    let s_values = [2.0, 4.0, 10.0, 100.0];
    let base_spec = uniform_plain_network(4, 64, 64, 32);
    let base = network_complexity(&base_spec).unwrap();

    // simple and compound rows: policy name -> (p, a) exponents of s
    let policy_rows: &[(&str, f64, f64)] = &[
        ("d", 1.0, 1.0),
        ("w", 1.0, 0.5),
        ("r", 0.0, 1.0),
        ("dw", 1.0, 0.75),
        ("wr", 0.5, 0.75),
        ("dr", 0.5, 1.0),
        ("dwr", 2.0 / 3.0, 5.0 / 6.0),
    ];
    let mut checks = 0;
    let mut verify = |policy: &ScalingPolicy, label: &str, p_exp: f64, a_exp: f64| {
        for s in s_values {
            let scaled = scale_continuous(&base_spec, policy, s)
                .unwrap()
                .complexity();
            assert!(
                rel_err(scaled.flops / base.flops, s) < tol,
                "{label} f s={s}"
            );
            assert!(
                rel_err(scaled.params / base.params, s.powf(p_exp)) < tol,
                "{label} p s={s}"
            );
            assert!(
                rel_err(scaled.acts / base.acts, s.powf(a_exp)) < tol,
                "{label} a s={s}"
            );
            checks += 3;
        }
    };
    for &(name, p_exp, a_exp) in policy_rows {
        verify(&policy_from_name(name).unwrap(), name, p_exp, a_exp);
    }
    // alpha-family rows, including the two fast-scaling instantiations
    for alpha in [0.0, 1.0 / 3.0, 0.8, 1.0] {
        let p = fast_policy(alpha).unwrap();
        verify(
            &p,
            &format!("alpha={alpha}"),
            (1.0 + alpha) / 2.0,
            (2.0 - alpha) / 2.0,
        );
    }

    // group-conv rows on a group-conv stage (w, g, both), via direct field
    // scaling of the continuous network
    let group_base = ContinuousNetwork::from_spec(&uniform_plain_network(4, 64, 8, 32));
    let b0 = group_base.complexity();
    let scale_fields = |wf: f64, gf: f64| {
        let mut net = group_base.clone();
        for st in &mut net.stages {
            st.width *= wf;
            st.group_width *= gf;
        }
        net.complexity()
    };
    for s in s_values {
        // width alone: f, p, a all scale by s
        let r = scale_fields(s, 1.0);
        assert!(rel_err(r.flops / b0.flops, s) < tol);
        assert!(rel_err(r.params / b0.params, s) < tol);
        assert!(rel_err(r.acts / b0.acts, s) < tol);
        // group width alone: f, p scale by s, a unchanged
        let r = scale_fields(1.0, s);
        assert!(rel_err(r.flops / b0.flops, s) < tol);
        assert!(rel_err(r.params / b0.params, s) < tol);
        assert!(rel_err(r.acts / b0.acts, 1.0) < tol);
        // both by sqrt(s): f, p scale by s, a by sqrt(s)
        let r = scale_fields(s.sqrt(), s.sqrt());
        assert!(rel_err(r.flops / b0.flops, s) < tol);
        assert!(rel_err(r.params / b0.params, s) < tol);
        assert!(rel_err(r.acts / b0.acts, s.sqrt()) < tol);
        checks += 9;
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 1: table algebra, {checks} multiplier checks exact to 1e-9 ({elapsed:?})"
    );
}

/// Criterion 2: predicted_multipliers on the alpha family matches the closed
/// form (s, s^((1+a)/2), s^((2-a)/2)) for 100 random (alpha, s) pairs to
/// 1e-12 relative.
#[test]
fn criterion_2_fast_family_closed_form() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let alpha: f64 = rng.gen_range(0.0..=1.0);
        let s: f64 = rng.gen_range(1.0..1000.0);
        let (f, p, a) = predicted_multipliers(&fast_policy(alpha).unwrap(), s);
        assert!(rel_err(f, s) < 1e-12);
        assert!(rel_err(p, s.powf((1.0 + alpha) / 2.0)) < 1e-12);
        assert!(rel_err(a, s.powf((2.0 - alpha) / 2.0)) < 1e-12);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 2: fast-family closed form, 100 random pairs to 1e-12 ({elapsed:?})"
    );
}

/// Criterion 3: EfficientNet complexity lands on the reference figures:
/// flops and params within 3%, activations within 10%.
#[test]
fn criterion_3_efficientnet_complexity() {
    let rows = [
        (EfficientNetVariant::B0, 0.39e9, 5.3e6, 6.7e6),
        (EfficientNetVariant::B1, 0.70e9, 7.8e6, 10.9e6),
        (EfficientNetVariant::B2, 1.0e9, 9.1e6, 13.8e6),
        (EfficientNetVariant::B3, 1.8e9, 12.2e6, 23.8e6),
    ];
    let mut worst_f: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    let mut worst_a: f64 = 0.0;
    for (variant, f, p, a) in rows {
        let report = network_complexity(&build_efficientnet(variant)).unwrap();
        let (ef, ep, ea) = (
            rel_err(report.flops, f),
            rel_err(report.params, p),
            rel_err(report.acts, a),
        );
        assert!(ef <= 0.03, "{variant:?} flops off by {ef:.3}");
        assert!(ep <= 0.03, "{variant:?} params off by {ep:.3}");
        assert!(ea <= 0.10, "{variant:?} acts off by {ea:.3}");
        worst_f = worst_f.max(ef);
        worst_p = worst_p.max(ep);
        worst_a = worst_a.max(ea);
    }
    println!(
        "[PASS] criterion 3: EfficientNet B0-B3 complexity within tolerance \
         (worst rel err: flops {worst_f:.4}, params {worst_p:.4}, acts {worst_a:.4})"
    );
}

fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0.ln()).sum();
    let sy: f64 = points.iter().map(|p| p.1.ln()).sum();
    let sxx: f64 = points.iter().map(|p| p.0.ln() * p.0.ln()).sum();
    let sxy: f64 = points.iter().map(|p| p.0.ln() * p.1.ln()).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Criterion 4: sweeping EfficientNet-B0 with quantization over s in
/// [1, 128], the fitted log-log slope of acts vs flops matches the
/// activation exponent of each strategy within 0.05.
#[test]
fn criterion_4_asymptotic_slopes() {
    let start = Instant::now();
    let base = build_efficientnet(EfficientNetVariant::B0);
    let grid: Vec<f64> = (0..8).map(|i| f64::powi(2.0, i)).collect();
    let targets = [("w", 0.5), ("dWr", 0.6), ("dwr", 5.0 / 6.0), ("dw", 0.75)];
    let mut lines = Vec::new();
    for (name, want) in targets {
        let policy = policy_from_name(name).unwrap();
        let series = sweep(&base, &policy, &grid, true).unwrap();
        let points: Vec<(f64, f64)> = series
            .points
            .iter()
            .map(|p| (p.report.flops, p.report.acts))
            .collect();
        let slope = log_log_slope(&points);
        assert!(
            (slope - want).abs() <= 0.05,
            "{name}: slope {slope:.4} vs {want:.4}"
        );
        lines.push(format!("{name} {slope:.4} (target {want:.4})"));
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 4: quantized sweep slopes within 0.05: {} ({elapsed:?})",
        lines.join(", ")
    );
}

fn random_regnet(rng: &mut ChaCha8Rng) -> NetworkSpec {
    loop {
        let params = RegNetParams {
            depth: rng.gen_range(12..=28),
            w0: 8 * rng.gen_range(6..=17),
            w_slope: (rng.gen_range(24f64.ln()..=64f64.ln())).exp(),
            w_mult: (rng.gen_range(2f64.ln()..=2.75f64.ln())).exp(),
            group_width: 8 * rng.gen_range(1..=6),
            bottleneck_ratio: 1.0,
            resolution: 224,
            kind: RegNetKind::Y,
        };
        let params = if rng.gen_bool(0.5) {
            RegNetParams {
                kind: RegNetKind::Z,
                bottleneck_ratio: 0.25,
                ..params
            }
        } else {
            params
        };
        if let Ok(spec) = build_regnet(&params) {
            if spec.stages.len() == 4 {
                return spec;
            }
        }
    }
}

fn random_policy(rng: &mut ChaCha8Rng) -> ScalingPolicy {
    if rng.gen_bool(0.3) {
        fast_policy(rng.gen_range(0.0..=1.0)).unwrap()
    } else {
        let name = POLICY_NAMES[rng.gen_range(0..POLICY_NAMES.len())];
        policy_from_name(name).unwrap()
    }
}

/// Criterion 5: over 200 seeded random RegNets and random policies with
/// s <= 100, discretization preserves the scaled model's flops within 10%
/// and moves every width by at most a factor 4/3 (one third of its
/// continuous value).
#[test]
fn criterion_5_quantization_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_flops: f64 = 0.0;
    let mut width_lo: f64 = 1.0;
    let mut width_hi: f64 = 1.0;
    for case in 0..200 {
        let spec = random_regnet(&mut rng);
        let policy = random_policy(&mut rng);
        let s = rng.gen_range(0f64..100f64.ln()).exp();
        let continuous = scale_continuous(&spec, &policy, s).unwrap();
        let quantized = quantize_network(&continuous);
        assert!(validate_network(&quantized).is_empty(), "case {case}");
        for (cont, quant) in continuous.stages.iter().zip(&quantized.stages) {
            let ratio = f64::from(quant.width) / cont.width;
            width_lo = width_lo.min(ratio);
            width_hi = width_hi.max(ratio);
        }
        // flops the parameter rounding produced vs the continuous target,
        // both under exact resolution division
        let target = continuous.complexity().flops;
        let achieved = ContinuousNetwork::from_spec(&quantized).complexity().flops;
        let err = rel_err(achieved, target);
        assert!(
            err <= 0.10,
            "case {case}: quantization moved flops by {err:.4} \
             (policy {:?}, s {s:.2})",
            policy.label()
        );
        worst_flops = worst_flops.max(err);
    }
    assert!(width_hi <= 4.0 / 3.0 + 1e-9, "width grew by {width_hi}");
    assert!(width_lo >= 2.0 / 3.0 - 1e-9, "width shrank to {width_lo}");
    println!(
        "[PASS] criterion 5: 200 cases, worst quantization flop error {worst_flops:.4}, \
         width ratio in [{width_lo:.4}, {width_hi:.4}]"
    );
}

/// Criterion 6: on synthetic measurements time = c0 + ca * acts with seeded
/// 1% noise across 4 strategies x 8 scales, the acts-only fit recovers ca
/// within 5% with fit_r >= 0.99, and pooled flops correlate strictly worse
/// than pooled acts.
#[test]
fn criterion_6_runtime_model_recovery() {
    let base = build_efficientnet(EfficientNetVariant::B0);
    let (c0, ca) = (0.5, 2e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut measurements = Vec::new();
    for name in ["w", "dWr", "dwr", "dw"] {
        let policy = policy_from_name(name).unwrap();
        let grid = [1.0, 2.0, 4.0, 8.0, 16.0, 23.0, 45.0, 91.0];
        let series = sweep(&base, &policy, &grid, true).unwrap();
        for p in &series.points {
            let noise = 1.0 + 0.01 * rng.gen_range(-1.0..=1.0);
            measurements.push(Measurement {
                model: format!("{}_{}", name, p.s),
                strategy: name.to_string(),
                flops: p.report.flops,
                params: p.report.params,
                acts: p.report.acts,
                epoch_time_min: (c0 + ca * p.report.acts) * noise,
                batch_size: 256,
            });
        }
    }
    assert_eq!(measurements.len(), 32);
    let model = fit_runtime(&measurements, FeatureSet::ActsOnly).unwrap();
    let coef_err = rel_err(model.coef_acts, ca);
    assert!(coef_err <= 0.05, "coef_acts off by {coef_err:.4}");
    assert!(model.fit_r >= 0.99, "fit_r = {}", model.fit_r);
    let report = correlation_report(&measurements).unwrap();
    assert!(
        report.pooled.flops < report.pooled.acts,
        "pooled flops r {} should be strictly below pooled acts r {}",
        report.pooled.flops,
        report.pooled.acts
    );
    println!(
        "[PASS] criterion 6: recovered coef within {coef_err:.4}, fit_r {:.4}, \
         pooled r acts {:.4} > flops {:.4}",
        model.fit_r, report.pooled.acts, report.pooled.flops
    );
}

/// Criterion 7: sampling 32 models at 500MF +/- 10% terminates, every spec is
/// valid and inside the window, and a fixed seed reproduces the result
/// exactly.
#[test]
fn criterion_7_sampling_protocol() {
    let ranges = DesignSpaceRanges::default_for(RegNetKind::Y, 500e6, 0.10);
    let first = sample_design_space(&ranges, 32, 7).unwrap();
    assert_eq!(first.len(), 32);
    for m in &first {
        assert!(validate_network(&m.spec).is_empty());
        assert!(
            m.report.flops >= 450e6 && m.report.flops <= 550e6,
            "flops {} outside window",
            m.report.flops
        );
    }
    let second = sample_design_space(&ranges, 32, 7).unwrap();
    for (a, b) in first.iter().zip(&second) {
        assert_eq!(a.params, b.params);
        assert_eq!(a.spec, b.spec);
        assert_eq!(
            scalekit::ir::serialize(&a.spec),
            scalekit::ir::serialize(&b.spec)
        );
    }
    println!(
        "[PASS] criterion 7: 32/32 sampled models inside 500MF +/- 10%, reproducible at fixed seed"
    );
}

/// Criterion 8: training accuracy results are out of scope by design; the
/// scaling-math suites above are the acceptance surface.
#[test]
fn criterion_8_accuracy_out_of_scope() {
    println!(
        "[PASS] criterion 8: accuracy reproduction has no acceptance hook (out of scope); \
         complexity and scaling invariants stand in"
    );
}
