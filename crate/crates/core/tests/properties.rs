use modelrisk_core::densities::{quantile, MASS_TOLERANCE};
use modelrisk_core::prelude::*;
use proptest::prelude::*;

fn model() -> impl Strategy<Value = FamilyParams> {
    (-20.0..20.0f64, 0.5..50.0f64, prop::option::of(-5.0..5.0f64)).prop_map(
        |(mu, sigma, s)| match s {
            Some(s) => FamilyParams::skew_normal(mu, sigma, s).unwrap(),
            None => FamilyParams::normal(mu, sigma).unwrap(),
        },
    )
}

/// Shared grid, refined until every model is resolved.
fn embed(models: &[FamilyParams]) -> Vec<SphereDensity> {
    let mut points = GridSpec::default().points;
    loop {
        let spec = GridSpec {
            points,
            ..GridSpec::default()
        };
        let grid = spec.grid_for(models.iter()).unwrap();
        match models
            .iter()
            .map(|m| sqrt_embed(&discretize_on(m, &grid)?))
            .collect::<Result<Vec<_>>>()
        {
            Ok(v) => return v,
            Err(Error::Discretization(_)) => points *= 2,
            Err(e) => panic!("{e}"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn metric_axioms(a in model(), b in model(), c in model()) {
        let psi = embed(&[a, b, c]);
        let ab = distance(&psi[0], &psi[1]).unwrap();
        prop_assert_eq!(ab.to_bits(), distance(&psi[1], &psi[0]).unwrap().to_bits());
        prop_assert_eq!(distance(&psi[0], &psi[0]).unwrap(), 0.0);
        prop_assert!((0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&ab));
        let ac = distance(&psi[0], &psi[2]).unwrap();
        let bc = distance(&psi[1], &psi[2]).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn log_has_length_of_distance(a in model(), b in model()) {
        let psi = embed(&[a, b]);
        let d = distance(&psi[0], &psi[1]).unwrap();
        let v = log_map(&psi[0], &psi[1]).unwrap();
        prop_assert!((v.norm() - d).abs() < 1e-8);
        prop_assert!(inner(&psi[0], &v).unwrap().abs() < 1e-8);
    }

    #[test]
    fn exp_inverts_log(a in model(), b in model()) {
        let psi = embed(&[a, b]);
        let v = log_map(&psi[0], &psi[1]).unwrap();
        let back = exp_map(&psi[0], &v, 1.0).unwrap();
        let err = back.values().iter().zip(psi[1].values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-6);
    }

    #[test]
    fn geodesics_have_unit_speed(a in model(), b in model(), u in 0.05..0.95f64) {
        let psi = embed(&[a, b]);
        let d = distance(&psi[0], &psi[1]).unwrap();
        prop_assume!(d > 1e-3);
        let v = log_map(&psi[0], &psi[1]).unwrap().scaled(1.0 / d);
        let mid = exp_map(&psi[0], &v, u * d).unwrap();
        prop_assert!((mid.norm() - 1.0).abs() < 1e-9);
        let mid = SphereDensity::new(*mid.grid(), mid.values().to_vec()).unwrap();
        prop_assert!((distance(&psi[0], &mid).unwrap() - u * d).abs() < 1e-8);
        prop_assert!((distance(&mid, &psi[1]).unwrap() - (1.0 - u) * d).abs() < 1e-8);
    }

    #[test]
    fn discretized_mass_is_one(mu in -20.0..20.0f64, sigma in 0.1..100.0f64, s in -10.0..10.0f64) {
        let p = FamilyParams::skew_normal(mu, sigma, s).unwrap();
        let mut points = GridSpec::default().points;
        let density = loop {
            match discretize(&p, &GridSpec { points, ..GridSpec::default() }) {
                Ok(d) => break d,
                Err(Error::Discretization(_)) => points *= 2,
                Err(e) => panic!("{e}"),
            }
        };
        prop_assert!((density.mass() - 1.0).abs() < MASS_TOLERANCE);
    }

    #[test]
    fn var_is_monotone_in_beta(p in model(), b1 in 0.5..0.999f64, b2 in 0.5..0.999f64) {
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        let density = discretize(&p, &GridSpec { points: 16_384, ..GridSpec::default() }).unwrap();
        let v_lo = apply_functional(&OutputFunctional::VaR { beta: lo }, &density).unwrap();
        let v_hi = apply_functional(&OutputFunctional::VaR { beta: hi }, &density).unwrap();
        prop_assert!(v_hi <= v_lo);
    }

    #[test]
    fn skew_normal_at_zero_shape_is_normal(mu in -20.0..20.0f64, sigma in 0.5..50.0f64) {
        let spec = GridSpec::default();
        let n = FamilyParams::normal(mu, sigma).unwrap();
        let sn = FamilyParams::skew_normal(mu, sigma, 0.0).unwrap();
        let grid = spec.grid_for([&n]).unwrap();
        let a = discretize_on(&n, &grid).unwrap();
        let b = discretize_on(&sn, &grid).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn normal_fisher_quadrature_matches_closed_form(mu in -20.0..20.0f64, sigma in 0.5..50.0f64) {
        let p = FamilyParams::normal(mu, sigma).unwrap();
        let exact = fisher_matrix(&p).unwrap();
        let quad = fisher_matrix_quadrature(&p, &GridSpec::default()).unwrap();
        let scale = exact.get(0, 0);
        for (a, b) in quad.entries().iter().zip(exact.entries()) {
            prop_assert!((a - b).abs() < 1e-4 * scale);
        }
    }

    #[test]
    fn skew_normal_fisher_is_positive_definite(
        mu in -20.0..20.0f64,
        sigma in 0.5..50.0f64,
        s in prop_oneof![-5.0..-0.25f64, 0.25..5.0f64],
    ) {
        let m = fisher_matrix(&FamilyParams::skew_normal(mu, sigma, s).unwrap()).unwrap();
        prop_assert!(m.eigenvalues()[0] > 0.0);
    }
}

#[test]
fn var_of_standard_normal() {
    let p = discretize(
        &FamilyParams::normal(0.0, 1.0).unwrap(),
        &GridSpec {
            points: 16_384,
            ..GridSpec::default()
        },
    )
    .unwrap();
    // Φ⁻¹(0.05)
    assert!((quantile(&p, 0.05).unwrap() + 1.644_853_626_951_472_2).abs() < 1e-5);
}
