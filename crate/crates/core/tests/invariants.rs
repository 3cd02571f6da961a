use std::collections::BTreeMap;

use proptest::prelude::*;

use classtab_core::catalog;
use classtab_core::construct::{class_prediction, lipschitz_ratio, stable_set, HField};
use classtab_core::distance::{measure_distance, pointwise_distance};
use classtab_core::io::{read_grid, read_point_cloud, write_grid, write_point_cloud};
use classtab_core::nn::{Layer, Network};
use classtab_core::stability::{class_stability, Integrator};
use classtab_core::{
    extend, relabel, rescale_domain, Activation, BoundaryMode, DistanceSpec, LabelField, MeasureConfig, NormP,
};

fn grid_field(labels: Vec<i64>, nx: usize) -> LabelField {
    let ny = labels.len() / nx;
    LabelField::grid(vec![-1.0, 0.0], vec![1.0, 1.5], vec![nx, ny], labels, None).unwrap()
}

fn arb_grid() -> impl Strategy<Value = LabelField> {
    (2usize..7, 2usize..7).prop_flat_map(|(nx, ny)| {
        prop::collection::vec(0i64..3, nx * ny).prop_map(move |l| grid_field(l, nx))
    })
}

fn norms() -> impl Strategy<Value = NormP> {
    prop_oneof![Just(NormP::L1), Just(NormP::L2), Just(NormP::LINF), (1.0f64..5.0).prop_map(|p| NormP::new(p).unwrap())]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn relabel_keeps_grid_stability_exactly(field in arb_grid(), shift in 1i64..50, flip in any::<bool>()) {
        let map: BTreeMap<i64, i64> = field
            .label_set()
            .iter()
            .map(|&l| (l, if flip { -l * 7 - shift } else { l + shift }))
            .collect();
        let g = relabel(&field, &map).unwrap();
        let spec = DistanceSpec::pointwise(NormP::L2, BoundaryMode::Interior);
        let (a, b) = (extend(field), extend(g));
        let dom = a.domain().clone();
        let sa = class_stability(&a, &dom, &spec, Integrator::Grid, 2500, 0).unwrap();
        let sb = class_stability(&b, &dom, &spec, Integrator::Grid, 2500, 0).unwrap();
        prop_assert_eq!(sa.value.to_bits(), sb.value.to_bits());
    }

    #[test]
    fn extension_never_exceeds_interior(x in -1.0f64..1.0, y in 0.0f64..1.5, field in arb_grid(), p in norms()) {
        let f = extend(field);
        let e = pointwise_distance(&f, &[x, y], p, BoundaryMode::Extension).unwrap();
        let i = pointwise_distance(&f, &[x, y], p, BoundaryMode::Interior).unwrap();
        prop_assert!(e.value <= i.value + 1e-12);
    }

    #[test]
    fn measure_mode_dominates_pointwise_on_grids(x in -0.95f64..0.95, y in 0.05f64..1.45, field in arb_grid()) {
        let f = extend(field);
        for boundary in [BoundaryMode::Interior, BoundaryMode::Extension] {
            let pw = pointwise_distance(&f, &[x, y], NormP::L2, boundary).unwrap();
            let cfg = MeasureConfig { samples_per_radius: 512, bisection_depth: 30, ..MeasureConfig::default() };
            let m = measure_distance(&f, &[x, y], NormP::L2, boundary, &cfg).unwrap();
            prop_assert!(m.value + m.error_bound >= pw.value - pw.error_bound, "{m:?} vs {pw:?}");
        }
    }

    #[test]
    fn stable_sets_are_nested(field in arb_grid(), e1 in 0.01f64..0.3, de in 0.0f64..0.3) {
        let f = extend(field);
        let small = stable_set(&f, e1, NormP::L2, BoundaryMode::Interior, 0.1).unwrap();
        let large = stable_set(&f, e1 + de, NormP::L2, BoundaryMode::Interior, 0.1).unwrap();
        for x in &large.members {
            prop_assert!(small.members.contains(x));
        }
    }

    #[test]
    fn h_is_one_lipschitz(
        x in -1.0f64..1.0, y in -1.0f64..1.0,
        u in -1.0f64..1.0, v in -1.0f64..1.0,
        p in norms(), interior in any::<bool>(),
    ) {
        let boundary = if interior { BoundaryMode::Interior } else { BoundaryMode::Extension };
        let h = HField::new(extend(catalog::disk_in_square()), p, boundary);
        if let Some(r) = lipschitz_ratio(&h, &[x, y], &[u, v]).unwrap() {
            prop_assert!(r <= 1.0 + 1e-9, "{r}");
        }
        let h1 = HField::new(extend(catalog::f4()), p, boundary);
        if let Some(r) = lipschitz_ratio(&h1, &[x], &[u]).unwrap() {
            prop_assert!(r <= 1.0 + 1e-9, "{r}");
        }
    }

    #[test]
    fn h_argmax_recovers_label(x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let h = HField::new(extend(catalog::disk_in_square()), NormP::L2, BoundaryMode::Interior);
        let v = h.evaluate(&[x, y]).unwrap();
        if v.vector[v.slot - 1] > 0.0 {
            prop_assert_eq!(class_prediction(&v.vector).unwrap(), v.slot);
        }
    }

    #[test]
    fn class_prediction_is_first_max(v in prop::collection::vec(-3i32..3, 1..8)) {
        let v: Vec<f64> = v.into_iter().map(f64::from).collect();
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let first = v.iter().position(|x| *x == max).unwrap() + 1;
        prop_assert_eq!(class_prediction(&v).unwrap(), first);
    }

    #[test]
    fn network_json_is_bit_exact(w in prop::collection::vec(-1e3f64..1e3, 6), b in prop::collection::vec(-1e-3f64..1e-3, 3)) {
        let hidden = Layer { weights: w[..4].to_vec(), biases: b[..2].to_vec() };
        let out = Layer { weights: w[4..].to_vec(), biases: b[2..].to_vec() };
        let net = Network::new(Activation::Sigmoid, vec![hidden, out], vec![]).unwrap();
        let back: Network = serde_json::from_str(&serde_json::to_string(&net).unwrap()).unwrap();
        prop_assert_eq!(&back, &net);
        prop_assert_eq!(back.forward(&[0.3, -0.7])[0].to_bits(), net.forward(&[0.3, -0.7])[0].to_bits());
    }

    #[test]
    fn point_cloud_files_round_trip(
        pts in prop::collection::vec((any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e6f64..1e6), 1..20),
        labels in prop::collection::vec(1i64..100, 22),
    ) {
        let mut points: Vec<Vec<f64>> = pts.iter().map(|(a, b)| vec![*a, *b]).collect();
        points.push(vec![f64::MIN / 4.0, -2e6]);
        points.push(vec![f64::MAX / 4.0, 2e6]);
        let n = points.len();
        let f = LabelField::point_cloud(points, labels[..n].to_vec(), None).unwrap();
        let mut buf = Vec::new();
        write_point_cloud(&f, &mut buf).unwrap();
        let g = read_point_cloud(buf.as_slice()).unwrap();
        let mut again = Vec::new();
        write_point_cloud(&g, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn grid_files_round_trip(field in arb_grid()) {
        let mut buf = Vec::new();
        write_grid(&field, &mut buf).unwrap();
        let g = read_grid(buf.as_slice()).unwrap();
        let mut again = Vec::new();
        write_grid(&g, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }
}

#[test]
fn scaling_covariance() {
    let spec = DistanceSpec::pointwise(NormP::L2, BoundaryMode::Interior);
    for field in [catalog::f4(), catalog::disk_in_square()] {
        let d = field.dim() as i32;
        let base = extend(field.clone());
        let dom = base.domain().clone();
        let s = class_stability(&base, &dom, &spec, Integrator::MonteCarlo, 40_000, 5).unwrap();
        for c in [1e-3, 0.5, 2.0] {
            let scaled = extend(rescale_domain(&field, c).unwrap());
            let sdom = scaled.domain().clone();
            let sc = class_stability(&scaled, &sdom, &spec, Integrator::MonteCarlo, 40_000, 6).unwrap();
            let k = c.powi(d + 1);
            let tol = 3.0 * (sc.std_error.powi(2) + (k * s.std_error).powi(2)).sqrt();
            assert!((sc.value - k * s.value).abs() <= tol, "c={c}: {} vs {}", sc.value, k * s.value);
        }
    }
}
