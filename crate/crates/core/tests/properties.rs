use proptest::prelude::*;

use warped_soliton::invariant::{
    classify_direction, ode_residuals_unit, phase_rhs, pull_back, ray_slopes, scale_free_residuals, PhaseState,
};
use warped_soliton::solutions::{build_power_law, Branch, PowerLawParams};
use warped_soliton::tensor::FdScheme;
use warped_soliton::warped::{oracle_residual, pde_residuals};
use warped_soliton::{Signature, SolitonConfig};

fn branch() -> impl Strategy<Value = Branch> {
    prop_oneof![Just(Branch::Plus), Just(Branch::Minus)]
}

fn signature(n: usize, negatives: usize) -> Signature {
    Signature::new((0..n).map(|i| if i < negatives.min(n - 1) { -1 } else { 1 }).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ray_slopes_solve_the_quadratic(k in 0.01f64..10.0, n in 3usize..12, m in 1usize..12) {
        let (p, q) = ray_slopes(k, n, m);
        let c = m as f64 + (n as f64 - 2.0) * k * k;
        prop_assert!(p > 0.0 && q < 0.0);
        for r in [p, q] {
            prop_assert!((r * r + 2.0 * k * r - c).abs() <= 1e-12 * c.max(1.0) * 4.0);
        }
    }

    #[test]
    fn rays_are_invariant(k in 0.05f64..5.0, n in 3usize..8, m in 1usize..6, x in -3.0f64..3.0) {
        let cfg = SolitonConfig::steady(Signature::riemannian(n).unwrap(), m).unwrap();
        let (p, q) = ray_slopes(k, n, m);
        for slope in [p, q] {
            let (dx, dy) = phase_rhs(&PhaseState::new(x, slope * x, k).unwrap(), &cfg);
            prop_assert!((dy - slope * dx).abs() <= 1e-12 * dy.abs().max(1.0));
        }
    }

    #[test]
    fn power_law_family_is_exact(
        k in 0.1f64..3.0, n in 3usize..7, m in 1usize..5, br in branch(),
        c1 in 0.2f64..5.0, c2 in 0.2f64..5.0, u in 0.3f64..4.0,
    ) {
        let cfg = SolitonConfig::steady(Signature::riemannian(n).unwrap(), m).unwrap();
        let params = PowerLawParams { c1, c2, b: 0.5, ..PowerLawParams::new(k, br) };
        let t = build_power_law(&params, n, m).unwrap();
        let xi = (u - 0.5) / params.slope(n, m);
        let j = t.eval(xi).unwrap();
        for eps in [1.0, -1.0] {
            let r = scale_free_residuals(&cfg, &j, eps);
            prop_assert!(r.iter().all(|v| v.abs() < 1e-9), "{r:?}");
        }
        // φ'/φ = k f'/f
        prop_assert!((j.phi.d1 / j.phi.value - k * j.f.d1 / j.f.value).abs() <= 1e-9 * (j.phi.d1 / j.phi.value).abs().max(1.0));
    }

    #[test]
    fn gauge_shift_is_exact(k in 0.1f64..3.0, shift in -50.0f64..50.0, u in 0.3f64..4.0, br in branch()) {
        let cfg = SolitonConfig::steady(Signature::lorentzian(4).unwrap(), 2).unwrap();
        let params = PowerLawParams { b: 1.0, ..PowerLawParams::new(k, br) };
        let t = build_power_law(&params, 4, 2).unwrap();
        let s = t.shift_h(shift);
        let xi = (u - 1.0) / params.slope(4, 2);
        prop_assert_eq!(ode_residuals_unit(&cfg, &t, xi, 1).unwrap(), ode_residuals_unit(&cfg, &s, xi, 1).unwrap());
    }

    #[test]
    fn residuals_are_translation_invariant(
        k in 0.2f64..2.0, negatives in 0usize..2, a0 in 0.5f64..1.5, a1 in -1.0f64..1.0, a2 in -1.0f64..1.0,
        shift in -2.0f64..2.0,
    ) {
        let sig = signature(3, negatives);
        let alpha = [a0, a1, a2];
        prop_assume!(classify_direction(&sig, &alpha).map(|d| !d.is_null()).unwrap_or(false));
        let dir = classify_direction(&sig, &alpha).unwrap();
        let cfg = SolitonConfig::steady(sig.clone(), 2).unwrap();
        // Perturbed potential, so the residuals are not zero.
        let params = PowerLawParams { b: 2.0, ..PowerLawParams::new(k, Branch::Plus) };
        let t = build_power_law(&params, 3, 2).unwrap();
        let t = t.with_h(build_power_law(&PowerLawParams { b: 2.0, ..PowerLawParams::new(k * 1.5, Branch::Plus) }, 3, 2).unwrap().h);
        let data = pull_back(&cfg, &dir, &t).unwrap();
        let x = dir.base_point(0.1, &[0.0, 0.0, 0.0]);
        // v with Σ α_i v_i = 0
        let v = [-(alpha[1] + alpha[2]) / alpha[0] * shift, shift, shift];
        let y: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + b).collect();
        let (r0, r1) = (pde_residuals(&data, &x).unwrap(), pde_residuals(&data, &y).unwrap());
        let scale = r0.max_abs().max(1.0);
        prop_assert!(r0.offdiag.sub(&r1.offdiag).max_abs() <= 1e-12 * scale);
        for (p, q) in r0.diag.iter().zip(&r1.diag) {
            prop_assert!((p - q).abs() <= 1e-12 * scale);
        }
        prop_assert!((r0.fiber - r1.fiber).abs() <= 1e-12 * scale);
    }
}

#[test]
fn oracle_error_quarters_when_step_halves() {
    let sig = Signature::riemannian(3).unwrap();
    let cfg = SolitonConfig::steady(sig.clone(), 2).unwrap();
    let dir = classify_direction(&sig, &[1.0, 0.2, 0.1]).unwrap();
    let params = PowerLawParams { b: 1.0, ..PowerLawParams::new(1.0, Branch::Plus) };
    let t = build_power_law(&params, 3, 2).unwrap();
    let data = pull_back(&cfg, &dir, &t).unwrap().with_flat_torus_fiber().unwrap();
    let x = dir.base_point(1.0, &[0.1, -0.2, 0.3]);
    let r = |h: f64| oracle_residual(&data, &x, &FdScheme::order2(h)).unwrap().full.max_abs();
    let ratio = r(4e-3) / r(2e-3);
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    let r4 = |h: f64| oracle_residual(&data, &x, &FdScheme::new(h, 4).unwrap()).unwrap().full.max_abs();
    assert!(r4(4e-3) < r(4e-3) * 1e-2);
}

#[test]
fn single_precision_pipeline() {
    let sig = Signature::riemannian(3).unwrap();
    let cfg = SolitonConfig::<f32>::steady(sig.clone(), 2).unwrap();
    let dir = classify_direction::<f32>(&sig, &[1.0, 0.0, 0.0]).unwrap();
    let params = PowerLawParams::<f32> { b: 1.0, ..PowerLawParams::new(1.0, Branch::Plus) };
    let t = build_power_law(&params, 3, 2).unwrap();
    let r = ode_residuals_unit(&cfg, &t, 0.5, 1).unwrap();
    assert!(r.iter().all(|v| v.abs() < 1e-4), "{r:?}");
    let data = pull_back(&cfg, &dir, &t).unwrap();
    assert!(pde_residuals(&data, &[0.5, 0.3, -0.2]).unwrap().max_abs() < 1e-4);
}
