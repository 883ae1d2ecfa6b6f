use proptest::prelude::*;
use qng_core::gaussian_boundary::{
    appendix_a_leading_term, appendix_a_perturbation_check, appendix_b_polynomial, boundary_point,
    dx_opt, nbar_threshold, p0_gaussian, q0_gaussian, q0_threshold, GaussianStateParams,
};
use qng_oracle as oracle;

#[test]
fn closed_forms_match_reference() {
    for &(v, dx, dp, t) in &[
        (0.5, 0.0, 0.0, 0.5),
        (0.2, 1.3, 0.4, 0.1),
        (0.9, 0.2, 2.0, 0.8),
        (1.0, 1.0, 0.0, 0.5),
    ] {
        let g = GaussianStateParams::new(v, dx, dp).unwrap();
        assert!((p0_gaussian(&g).unwrap() - oracle::p0(v, dx, dp)).abs() < 1e-14);
        assert!((q0_gaussian(&g, t).unwrap() - oracle::q0(v, dx, dp, t)).abs() < 1e-14);
    }
}

#[test]
fn threshold_matches_brute_force() {
    // a subset of the acceptance run, on a fixed lattice
    for &t in &[0.1, 0.37, 0.5, 0.83] {
        for &p in &[0.02, 0.3, 0.61, 0.95] {
            let exact = q0_threshold(p, t).unwrap();
            let brute = oracle::max_q0_at_p0(p, t);
            assert!(brute <= exact + 1e-6, "p0 = {p}, T = {t}");
            assert!((brute - exact).abs() < 1e-4, "p0 = {p}, T = {t}");
        }
    }
}

#[test]
fn displacement_along_squeezed_axis_is_optimal() {
    for &(p, t) in &[(0.4, 0.5), (0.8, 0.25), (0.1, 0.7)] {
        let (best, phi) = oracle::max_q0_at_p0_any_direction(p, t, 300, 13);
        assert_eq!(phi, 0.0);
        assert!(best <= q0_threshold(p, t).unwrap() + 1e-9);
    }
}

#[test]
fn two_mode_products_do_not_beat_one_mode() {
    for &(p, t) in &[(0.2, 0.5), (0.6, 0.25), (0.9, 0.75)] {
        let two = oracle::max_two_mode_q0(p, t, 300);
        assert!(two <= q0_threshold(p, t).unwrap() + 1e-6);
    }
}

#[test]
fn vacuum_end_of_the_boundary() {
    for t in [0.01, 0.25, 0.5, 0.9] {
        let b = boundary_point(1.0, t).unwrap();
        assert_eq!(b.lambda, t);
        assert_eq!(b.w_g, 1.0 - t);
    }
}

#[test]
fn polynomial_positive_on_coarse_grid() {
    for i in 1..=200 {
        for j in 1..200 {
            let (v, t) = (i as f64 / 200.0, j as f64 / 200.0);
            let p = appendix_b_polynomial(v, t);
            assert!(p >= 8.0 * v * v * (1.0 - 1e-12), "V = {v}, T = {t}");
        }
    }
}

#[test]
fn squeezed_vacuum_loses_to_displacement() {
    for &(v, t) in &[(0.2, 0.3), (0.5, 0.5), (0.8, 0.9)] {
        let (_, dq) = appendix_a_perturbation_check(v, t, 1e-6).unwrap();
        let lead = appendix_a_leading_term(v, t, 1e-6);
        assert!(dq < 0.0);
        assert!((dq - lead).abs() < 0.01 * lead.abs());
    }
}

#[test]
fn weak_loss_limit_of_threshold() {
    for p in [0.2, 0.5, 0.9] {
        let t = 1e-4;
        let slope = (1.0 - q0_threshold(p, t).unwrap()) / t;
        assert!((slope - nbar_threshold(p).unwrap()).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Tangent witnesses bound every pure Gaussian state.
    #[test]
    fn witness_cap_holds(v in 0.05f64..=1.0, t in 0.05f64..0.95, vs in 0.05f64..=1.0, dx in 0.0f64..4.0, dp in 0.0f64..2.0) {
        let b = boundary_point(v, t).unwrap();
        let w = oracle::q0(vs, dx, dp, t) - b.lambda * oracle::p0(vs, dx, dp);
        prop_assert!(w <= b.w_g + 1e-9);
    }

    #[test]
    fn threshold_inside_physical_range(p in 0.001f64..0.999, t in 0.01f64..0.99) {
        let q = q0_threshold(p, t).unwrap();
        prop_assert!(q >= p - 1e-12);
        prop_assert!(q <= 1.0 - t * (1.0 - p) + 1e-12);
    }

    #[test]
    fn threshold_increasing_in_p0(p in 0.001f64..0.99, t in 0.01f64..0.99) {
        prop_assert!(q0_threshold(p + 0.005, t).unwrap() > q0_threshold(p, t).unwrap());
    }

    #[test]
    fn boundary_point_is_optimally_displaced(v in 0.05f64..1.0, t in 0.05f64..0.95) {
        let b = boundary_point(v, t).unwrap();
        let g = GaussianStateParams::new(v, dx_opt(v, t).unwrap(), 0.0).unwrap();
        prop_assert!((b.p0 - p0_gaussian(&g).unwrap()).abs() < 1e-13);
        prop_assert!((b.q0 - q0_gaussian(&g, t).unwrap()).abs() < 1e-13);
    }
}
