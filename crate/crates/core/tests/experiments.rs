//! Application-level experiment properties.

use qvtrack_core::applications::{
    disappearance_run, motion_match, run_disappearance_experiment, z_scenario, DisappearanceExperiment,
    MotionMatchConfig,
};
use qvtrack_core::state_prep::{prepare_surrogate_state, refine_to_y, surrogate};
use qvtrack_core::tracker::gaussian_labels;

#[test]
fn single_run_brackets() {
    let row = disappearance_run(&DisappearanceExperiment::default(), 0).unwrap();
    assert!((row.p1_exists - 0.577).abs() <= 0.15, "{}", row.p1_exists);
    assert!((row.p1_gone - 0.986).abs() <= 0.15, "{}", row.p1_gone);
    assert_eq!(row.argmax_exists, 17);
    assert!(row.training_fidelity >= 0.99);
}

#[test]
fn alternate_seed_keeps_separation() {
    let cfg = DisappearanceExperiment { seed: 7, runs: 10, ..Default::default() };
    for row in run_disappearance_experiment(&cfg).unwrap() {
        assert!(row.p1_exists <= 0.6 && row.p1_gone >= 0.9, "{row:?}");
    }
}

#[test]
fn quantum_and_classical_p1_agree() {
    let cfg = DisappearanceExperiment { runs: 10, ..Default::default() };
    for row in run_disappearance_experiment(&cfg).unwrap() {
        assert!((row.p1_exists - row.p1_exists_classical).abs() <= 1e-3, "{row:?}");
        assert!((row.p1_gone - row.p1_gone_classical).abs() <= 1e-3, "{row:?}");
        assert!((row.p1_exists - cfg.threshold).abs() >= 0.1 && (row.p1_gone - cfg.threshold).abs() >= 0.1);
    }
}

#[test]
fn one_off_path_frame_breaks_the_match() {
    let scene = z_scenario(2019, 0.02);
    let cfg = MotionMatchConfig::default();
    let r = motion_match(&scene.initial(), &scene.templates(), &scene.with_mismatches(1), &cfg, 0).unwrap();
    assert!(!r.matched, "{r:?}");
    assert!(r.components[1..].iter().all(|&c| c >= 0.99));
}

#[test]
fn p2_falls_as_mismatches_accumulate() {
    let scene = z_scenario(2019, 0.02);
    let cfg = MotionMatchConfig::default();
    let p2: Vec<f64> = (0..=7)
        .map(|m| motion_match(&scene.initial(), &scene.templates(), &scene.with_mismatches(m), &cfg, 0).unwrap().p2)
        .collect();
    assert!(p2[0] >= 0.9);
    assert!(p2.windows(2).all(|w| w[1] <= w[0]), "{p2:?}");
}

#[test]
fn surrogate_success_equals_mass_ratio_at_n50() {
    let y = gaussian_labels(50, 0.5).unwrap();
    let labels = surrogate(50, y.s).unwrap();
    let prepared = prepare_surrogate_state(&labels).unwrap();
    let refined = refine_to_y(&prepared.state, &y, &labels).unwrap();
    let direct_y: f64 = y.y.iter().map(|v| v * v).sum();
    let direct_tilde: f64 = labels.y_tilde_sq.iter().sum();
    assert!((refined.success_probability - direct_y / direct_tilde).abs() <= 1e-12);
}
