use warped_soliton::invariant::{pde_ode_consistency, pull_back, reduce_profiles};
use warped_soliton::solutions::{presets, FamilySpec};
use warped_soliton::tensor::FdScheme;
use warped_soliton::warped::{oracle_residual, residual_sweep};
use warped_soliton::{PresetSpec, Result};

fn samples(p: &PresetSpec, count: usize) -> Vec<f64> {
    let [a, b] = p.xi_range;
    (0..count).map(|i| a + (b - a) * i as f64 / (count - 1) as f64).collect()
}

fn base_points(p: &PresetSpec) -> Result<Vec<Vec<f64>>> {
    let built = p.build::<f64>()?;
    let n = built.config.n();
    Ok(samples(p, 5)
        .into_iter()
        .enumerate()
        .map(|(i, xi)| {
            let offset: Vec<f64> = (0..n).map(|j| 0.1 * ((i + j) as f64).sin()).collect();
            built.direction.base_point(xi, &offset)
        })
        .collect())
}

#[test]
fn every_preset_passes_its_residual_suite() {
    for p in presets() {
        let built = p.build::<f64>().unwrap();
        let pts = base_points(&p).unwrap();
        let rep = pde_ode_consistency(&built.config, &built.triple, &built.direction, &pts).unwrap();
        assert!(rep.max_ode_residual < 1e-9, "{}: {rep:?}", p.name);
        assert!(rep.max_pde_residual < 1e-9, "{}: {rep:?}", p.name);
        assert!(rep.max_relation_error() < 1e-10, "{}: {rep:?}", p.name);
        let data = pull_back(&built.config, &built.direction, &built.triple).unwrap();
        assert!(residual_sweep(&data, &pts).unwrap().max_abs() < 1e-9, "{}", p.name);
    }
}

#[test]
fn presets_agree_with_the_curvature_oracle() {
    let scheme = FdScheme::new(2e-3, 4).unwrap();
    for p in presets() {
        let built = p.build::<f64>().unwrap();
        let data = pull_back(&built.config, &built.direction, &built.triple).unwrap().with_flat_torus_fiber().unwrap();
        for x in base_points(&p).unwrap().iter().skip(1).take(3) {
            let r = oracle_residual(&data, x, &scheme).unwrap();
            assert!(r.full.max_abs() < 1e-6, "{}: {:.3e} at {x:?}", p.name, r.full.max_abs());
        }
    }
}

#[test]
fn proportional_presets_reduce_to_the_phase_flow() {
    for p in presets() {
        let built = p.build::<f64>().unwrap();
        let (Some(k), false) = (built.k, built.direction.is_null()) else { continue };
        if matches!(p.family, FamilySpec::FlatProduct { .. }) {
            continue;
        }
        let path = reduce_profiles(&built.config, &built.triple, k, &samples(&p, 21)).unwrap();
        let flow = path.max_flow_residual(&built.config);
        assert!(flow < 1e-8, "{}: {flow:.3e}", p.name);
    }
}
