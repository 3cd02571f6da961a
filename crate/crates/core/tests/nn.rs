use classtab_core::catalog;
use classtab_core::construct::HField;
use classtab_core::nn::{
    default_compact, stability_chain, train_narrow_deep, train_shallow, verify, ChainConfig, TrainConfig,
};
use classtab_core::stability::Integrator;
use classtab_core::{extend, Activation, BoundaryMode, DistanceSpec, Error, ExtLabel, NormP};

fn f1_config(boundary: BoundaryMode) -> TrainConfig {
    TrainConfig {
        epsilon: 0.2,
        p: NormP::L1,
        boundary,
        width: 64,
        ..TrainConfig::default()
    }
}

#[test]
fn interior_f1_net_classifies_and_keeps_stability() {
    let f = extend(catalog::f1());
    let cfg = f1_config(BoundaryMode::Interior);
    let k = default_compact(&f, cfg.epsilon, cfg.boundary).unwrap();
    let (net, report) = train_shallow(&f, &k, &cfg).unwrap();
    assert!(report.passed, "{report:?}");
    assert_eq!(report.interpolation_fraction, 1.0);
    assert_eq!(net.slots[net.predict_slot(&[0.5]) - 1], ExtLabel::Class(1));
    assert_eq!(net.slots[net.predict_slot(&[-0.5]) - 1], ExtLabel::Class(-1));
    let spec = DistanceSpec::pointwise(NormP::L1, BoundaryMode::Interior);
    let s = classtab_core::nn::stability_of_net(&net, f.domain(), &spec, Integrator::MonteCarlo, 20_000, 3).unwrap();
    assert!((s.value - 1.0).abs() < 0.05, "{s:?}");
}

#[test]
fn epsilon_beyond_diameter_is_vacuous() {
    let f = extend(catalog::f1());
    let cfg = TrainConfig { epsilon: 5.0, width: 8, refine_steps: 0, ..f1_config(BoundaryMode::Interior) };
    let k = default_compact(&f, cfg.epsilon, cfg.boundary).unwrap();
    let (_, report) = train_shallow(&f, &k, &cfg).unwrap();
    assert!(report.vacuous);
    assert_eq!(report.stable_points, 0);
    assert_eq!(report.interpolation_fraction, 1.0);
}

#[test]
fn narrow_deep_f1_has_fixed_width() {
    let f = extend(catalog::f1());
    let (cfg, k) = classtab_core::reproduce::f1_deep_task(0);
    let (deep, report) = train_narrow_deep(&f, &k, &cfg, 256).unwrap();
    assert_eq!(deep.network.width(), 1 + 3 + 2);
    assert!(report.passed, "{report:?}");
    assert_eq!(report.interpolation_fraction, 1.0);
    let h = HField::new(f.clone(), cfg.p, cfg.boundary);
    let again = verify(&deep.network, Some(&deep.source), &h, &k, cfg.epsilon, 0.0025).unwrap();
    assert!(again.sup_error_bound < cfg.epsilon / 2.0);
}

#[test]
fn depth_cap_reports_failure_without_error() {
    let f = extend(catalog::f1());
    let (cfg, k) = classtab_core::reproduce::f1_deep_task(0);
    let (deep, report) = train_narrow_deep(&f, &k, &cfg, 1).unwrap();
    assert_eq!(deep.network.width(), 6);
    assert_eq!(deep.source.width(), 2);
    assert!(!report.passed);
}

#[test]
fn smooth_activations_have_no_deep_variant() {
    let f = extend(catalog::f1());
    let (cfg, k) = classtab_core::reproduce::f1_deep_task(0);
    let cfg = TrainConfig { activation: Activation::Tanh, ..cfg };
    assert!(matches!(train_narrow_deep(&f, &k, &cfg, 4), Err(Error::Unsupported(_))));
}

#[test]
fn tanh_shallow_net_verifies() {
    let f = extend(catalog::f1());
    let cfg = TrainConfig { activation: Activation::Tanh, ..f1_config(BoundaryMode::Extension) };
    let k = default_compact(&f, cfg.epsilon, cfg.boundary).unwrap();
    let (net, report) = train_shallow(&f, &k, &cfg).unwrap();
    let h = HField::new(f, cfg.p, cfg.boundary);
    let again = verify(&net, None, &h, &k, cfg.epsilon, cfg.train_resolution / 4.0).unwrap();
    assert_eq!(again.sup_error_bound.to_bits(), report.sup_error_bound.to_bits());
    assert!(report.sup_error_grid <= report.sup_error_bound);
}

#[test]
fn chain_rejects_anchors_on_the_boundary() {
    let f = extend(catalog::f1());
    let cfg = f1_config(BoundaryMode::Interior);
    let k = default_compact(&f, cfg.epsilon, cfg.boundary).unwrap();
    let (net, _) = train_shallow(&f, &k, &TrainConfig { refine_steps: 0, ..cfg }).unwrap();
    let spec = DistanceSpec::pointwise(NormP::L1, BoundaryMode::Interior);
    let anchors = vec![vec![0.5], vec![0.0]];
    let err = stability_chain(&f, &net, f.domain(), &spec, &anchors, &ChainConfig::default()).unwrap_err();
    assert!(matches!(err, Error::AtIndex { index: 1, .. }), "{err:?}");
}

#[test]
fn retraining_is_deterministic() {
    let f = extend(catalog::f4());
    let cfg = TrainConfig { width: 32, refine_steps: 40, seed: 11, ..f1_config(BoundaryMode::Extension) };
    let k = default_compact(&f, cfg.epsilon, cfg.boundary).unwrap();
    let (a, ra) = train_shallow(&f, &k, &cfg).unwrap();
    let (b, rb) = train_shallow(&f, &k, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra, rb);
}
