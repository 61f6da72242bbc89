use modelrisk_core::densities::eval_pdf;
use modelrisk_core::kernel::{sphere_profile_constant, KERNEL_TOLERANCE};
use modelrisk_core::prelude::*;

fn reference(t_samples: usize) -> Neighbourhood {
    Neighbourhood::from_targets(
        &FamilyParams::normal(2.0, 10.0).unwrap(),
        &[FamilyParams::skew_normal(1.95, 9.98, 2.0).unwrap()],
        &GridSpec::default(),
        t_samples,
    )
    .unwrap()
}

fn linear(nb: &Neighbourhood) -> WeightKernel {
    pull_forward(
        &make_profile(ProfileKind::linear(), nb.directions().len()).unwrap(),
        nb,
    )
    .unwrap()
}

fn var() -> OutputFunctional {
    OutputFunctional::VaR { beta: 0.999 }
}

#[test]
fn ray_ends_at_the_target() {
    let nb = reference(65);
    let rho = nb.directions()[0].rho();
    assert!((rho - 0.510_513_924_428_532_8).abs() < 1e-6);
    let end = nb.point(0, rho).unwrap();
    let target = FamilyParams::skew_normal(1.95, 9.98, 2.0).unwrap();
    let grid = *end.grid();
    for (i, v) in end.values().iter().enumerate() {
        assert!((v - eval_pdf(&target, grid.x(i)).unwrap()).abs() < 1e-4);
    }
}

#[test]
fn kernel_is_linear_in_t() {
    let nb = reference(65);
    let k = linear(&nb);
    let rho = nb.directions()[0].rho();
    let (c1, c2) = k.linear_coefficients(0).unwrap();
    for node in k.ray(0) {
        assert!((node.k - c1 * (1.0 - c2 * node.t)).abs() < 1e-9);
    }
    assert!((c1 - 1.0 / rho).abs() < 1e-9);
    assert_eq!(k.value_at(0, rho + 1e-3), 0.0);
    assert!(k.normalization_residual() < KERNEL_TOLERANCE);
    let total: f64 = measure_weights(&k).iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(sphere_profile_constant(1), 1.0);
}

#[test]
fn profiles_integrate_to_one() {
    for kind in [
        ProfileKind::linear(),
        ProfileKind::LinearDecreasing { slope: 0.5 },
        ProfileKind::Constant,
        ProfileKind::GaussianBump {
            center: 0.4,
            width: 0.15,
        },
    ] {
        for n in [1, 2, 5] {
            let profile = make_profile(kind, n).unwrap();
            profile.verify().unwrap();
            let h0 = profile.h(0.0, 0);
            assert!(h0 > 0.0);
            for dir in 0..n {
                assert_eq!(profile.h(0.0, dir), h0);
                assert_eq!(profile.h(1.5, dir), 0.0);
            }
        }
    }
    assert!(make_profile(ProfileKind::LinearDecreasing { slope: 1.5 }, 1).is_err());
}

#[test]
fn change_of_variables_identity() {
    let nb = reference(4097);
    let k = linear(&nb);
    let rho = nb.directions()[0].rho();
    let profile = k.profile().clone();
    let table = NodeTable::evaluate(&OutputFunctional::Mean, &nb).unwrap();
    let lhs: f64 = table
        .values()
        .iter()
        .zip(k.nodes())
        .map(|(v, n)| v * n.weight)
        .sum();

    let n = 1025;
    let h = 1.0 / (n - 1) as f64;
    let mut rhs = 0.0;
    for i in 0..n {
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let u = i as f64 * h;
        let f = apply_functional(&OutputFunctional::Mean, &nb.point(0, rho * u).unwrap()).unwrap();
        rhs += w * f * profile.direction_weights()[0] * profile.h(u, 0);
    }
    rhs *= h / 3.0;
    assert!((lhs - rhs).abs() < 1e-6, "{lhs} vs {rhs}");
}

#[test]
fn norms_are_stable_under_t_refinement() {
    let z = |m| {
        let nb = reference(m);
        let k = linear(&nb);
        let t = NodeTable::evaluate(&var(), &nb).unwrap();
        (risk_l1(&t, &k).unwrap(), risk_l2(&t, &k).unwrap())
    };
    let (a1, a2) = z(65);
    let (b1, b2) = z(129);
    assert!((a1 - b1).abs() / b1 < 1e-3);
    assert!((a2 - b2).abs() / b2 < 1e-3);
}

#[test]
fn worst_case_sits_at_the_ray_end() {
    let nb = reference(65);
    let k = linear(&nb);
    let report = assess(
        &nb,
        &k,
        &RiskRequest {
            functional: var(),
            norms: vec![Norm::L1, Norm::L2, Norm::Linf],
            deviation: Deviation::Difference,
        },
    )
    .unwrap();
    assert_eq!(report.worst_case.t, nb.directions()[0].rho());
    let (z1, z2, zi) = (
        report.value(&Norm::L1).unwrap(),
        report.value(&Norm::L2).unwrap(),
        report.value(&Norm::Linf).unwrap(),
    );
    assert!(z1 <= z2 && z2 <= zi);
    assert_eq!(report.nodes.len(), 65);
    assert!(report.nodes[0].d < 1e-7, "{}", report.nodes[0].d);
}

#[test]
fn sobolev_of_a_linear_table() {
    // f(γ(t)) = t with the constant profile: K ≡ 1/(2ρ) on one ray of weight 2
    let nb = reference(257);
    let k = pull_forward(&make_profile(ProfileKind::Constant, 1).unwrap(), &nb).unwrap();
    let rho = nb.directions()[0].rho();
    let ts: Vec<f64> = k.nodes().iter().map(|n| n.t).collect();
    let table = NodeTable::new(0.0, ts).unwrap();
    let got = risk_sobolev(&table, &k, 1, 2.0).unwrap();
    let want = (rho * rho / 3.0 + 1.0).sqrt();
    assert!((got - want).abs() < 1e-4, "{got} vs {want}");
    assert!(risk_sobolev(&table, &k, 2, 2.0).unwrap() >= got);
}

#[test]
fn relative_deviations() {
    let nb = reference(65);
    let k = linear(&nb);
    let t = NodeTable::evaluate(&var(), &nb).unwrap();
    let f0 = t.f0();
    let abs = risk_l1(&t, &k).unwrap();
    let rel = risk_l1(&t.clone().with_deviation(Deviation::Relative).unwrap(), &k).unwrap();
    assert!((rel - abs / f0.abs()).abs() < 1e-12);
    let zero = NodeTable::new(0.0, vec![1.0; 65]).unwrap();
    assert!(zero.with_deviation(Deviation::Ratio).is_err());
}

#[test]
fn shape_mismatch_is_reported() {
    let nb = reference(65);
    let k = linear(&nb);
    let short = NodeTable::new(1.0, vec![1.0; 10]).unwrap();
    assert!(matches!(risk_l2(&short, &k), Err(Error::Shape(_))));
    assert!(risk_sobolev(&NodeTable::new(0.0, vec![0.0; 65]).unwrap(), &k, 3, 2.0).is_err());
}
