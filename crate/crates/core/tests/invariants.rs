use fbns::field::inverse_transform;
use fbns::lp::{build_partition, x_norm, Exponent};
use fbns::ops::{curl, divergence, gradient, helmholtz_project};
use fbns::picard::{picard_solve, picard_solve_from, SolverConfig3D};
use fbns::random::{random_divfree_field, random_scalar_field, random_vector_field, SpectrumProfile};
use fbns::semigroup::{apply_semigroup, relative_divergence};
use fbns::solver2d::{advance_vorticity, biot_savart, VorticityState};
use fbns::{Grid, SpectralField, Trajectory};
use proptest::prelude::*;

fn g3() -> Grid {
    Grid::new(3, 16, 1.0).unwrap()
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).unwrap().l2_norm() / b.l2_norm().max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn curl_of_gradient_and_divergence_of_curl_vanish(seed in 0u64..10_000) {
        let g = g3();
        let f = random_scalar_field(g, seed, SpectrumProfile::Gaussian { xi_c: 5.0 });
        let grad = gradient(&f).unwrap();
        // ξ × ξ vanishes identically; only rounding of the products remains.
        prop_assert!(curl(&grad).unwrap().max_abs() <= 1e-15 * grad.l2_norm());
        let v = random_vector_field(g, seed, SpectrumProfile::Gaussian { xi_c: 5.0 });
        prop_assert!(divergence(&curl(&v).unwrap()).unwrap().max_abs() <= 1e-15 * v.l2_norm());
    }

    #[test]
    fn semigroup_composes_for_arbitrary_times(
        seed in 0u64..10_000,
        t in 0.0f64..0.5,
        s in 0.0f64..0.5,
        omega in -50.0f64..50.0,
    ) {
        let f = random_divfree_field(g3(), seed, SpectrumProfile::Gaussian { xi_c: 4.0 }).unwrap();
        let a = apply_semigroup(&f, t + s, omega).unwrap();
        let b = apply_semigroup(&apply_semigroup(&f, s, omega).unwrap(), t, omega).unwrap();
        prop_assert!(rel(&b, &a) <= 1e-12);
        prop_assert!(relative_divergence(&a).unwrap() <= 1e-12);
    }

    #[test]
    fn semigroup_commutes_with_projection_and_decays(
        seed in 0u64..10_000,
        t in 0.0f64..1.0,
        omega in -50.0f64..50.0,
    ) {
        let g = g3();
        let f = random_vector_field(g, seed, SpectrumProfile::Gaussian { xi_c: 4.0 });
        let pf = helmholtz_project(&f).unwrap();
        let lhs = apply_semigroup(&pf, t, omega).unwrap();
        let rhs = helmholtz_project(&apply_semigroup(&pf, t, omega).unwrap()).unwrap();
        prop_assert!(rel(&lhs, &rhs) <= 1e-12);
        let bound = (-g.xi_min().powi(2) * t).exp() * pf.l2_norm();
        prop_assert!(lhs.l2_norm() <= bound * (1.0 + 1e-12));
    }

    #[test]
    fn biot_savart_inverts_curl(seed in 0u64..10_000) {
        let g = Grid::new(2, 32, 1.0).unwrap();
        let w = random_scalar_field(g, seed, SpectrumProfile::Gaussian { xi_c: 6.0 });
        let v = biot_savart(&w).unwrap();
        let dv1 = fbns::ops::derivative(&v.scalar(1), 0).unwrap();
        let dv0 = fbns::ops::derivative(&v.scalar(0), 1).unwrap();
        let mut w_back = dv1.sub(&dv0).unwrap();
        w_back.dealias();
        let mut w_ref = w.clone();
        w_ref.dealias();
        prop_assert!(rel(&w_back, &w_ref) <= 1e-12);
        prop_assert!(divergence(&v).unwrap().max_abs() <= 1e-12 * v.l2_norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn vorticity_maximum_does_not_grow(seed in 0u64..10_000) {
        let g = Grid::new(2, 64, 1.0).unwrap();
        let w0 = random_scalar_field(g, seed, SpectrumProfile::Gaussian { xi_c: 4.0 }).scaled(10.0);
        let mut s = VorticityState::new(w0, 0.0).unwrap();
        let mut prev = inverse_transform(&s.w).lp_norm(f64::INFINITY);
        for _ in 0..10 {
            s = advance_vorticity(&s, 2e-3, 5).unwrap();
            let cur = inverse_transform(&s.w).lp_norm(f64::INFINITY);
            prop_assert!(prev - cur >= -1e-10, "{} > {}", cur, prev);
            prev = cur;
        }
    }

    #[test]
    fn picard_fixed_point_is_unique_in_the_small_ball(seed in 0u64..10_000) {
        let g = Grid::new(3, 8, 4.0).unwrap();
        let mut cfg = SolverConfig3D::new(g, Exponent::TWO, Exponent::TWO, 0.25, 1.0 / 16.0);
        cfg.tolerance = 1e-11;
        let u0 = random_divfree_field(g, seed, SpectrumProfile::default()).unwrap().scaled(0.2);
        let a = picard_solve(&u0, &cfg).unwrap();
        let zero = Trajectory::new(cfg.dt, vec![SpectralField::zeros(g, 3); cfg.steps() + 1]).unwrap();
        let b = picard_solve_from(&u0, &cfg, zero).unwrap();
        prop_assert!(a.diagnostics.converged && b.diagnostics.converged);
        let part = build_partition(&g);
        let dist = x_norm(&a.trajectory.sub(&b.trajectory).unwrap(), &part, cfg.p, cfg.r).unwrap();
        prop_assert!(dist <= 10.0 * cfg.tolerance, "{}", dist);

        let d = &a.diagnostics.iterations;
        if d.iter().skip(1).all(|r| r.ratio.unwrap() <= 0.5) && d.len() > 2 {
            for (k, r) in d.iter().enumerate().skip(1) {
                let bound = 0.5f64.powi(k as i32 - 1) * d[1].diff_x_norm;
                prop_assert!(r.diff_x_norm <= bound * (1.0 + 1e-12));
            }
        }
    }
}
