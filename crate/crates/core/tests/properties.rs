use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use loggas::cli::RunConfig;
use loggas::electrostatics::{
    discrepancy, electric_field, minimal_distances, next_order_energy, renormalized_energy_field_form, splitting_check,
    Background,
};
use loggas::equilibrium::{energy_functional, solve_equilibrium, EquilibriumMeasure, GridDensity, Method, Potential};
use loggas::fluctuations::{fluct, h_half_norm_squared, TestFunction};
use loggas::sampler::{hamiltonian, sample_tridiagonal};
use loggas::transport::solve_transport;
use proptest::prelude::*;

fn quadratic() -> &'static (Potential, Arc<EquilibriumMeasure>) {
    static EQ: OnceLock<(Potential, Arc<EquilibriumMeasure>)> = OnceLock::new();
    EQ.get_or_init(|| {
        let v = Potential::quadratic();
        let eq = solve_equilibrium(&v, 512, Method::AnalyticOneCut).unwrap();
        (v, Arc::new(eq))
    })
}

fn discrete_minimizer() -> &'static EquilibriumMeasure {
    static EQ: OnceLock<EquilibriumMeasure> = OnceLock::new();
    EQ.get_or_init(|| solve_equilibrium(&Potential::quadratic(), 512, Method::DiscretizedMinimization).unwrap())
}

/// Sorted configurations with distinct points in `(-1.3, 1.3)`.
fn configuration(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.3f64..1.3, 2..=max_n).prop_filter_map("distinct points", |mut p| {
        p.sort_by(f64::total_cmp);
        p.windows(2).all(|w| w[1] - w[0] > 1e-6).then_some(p)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mixtures_never_lower_the_energy(eps in 0.02f64..0.5, weights in prop::collection::vec(0.0f64..1.0, 8)) {
        let v = Potential::quadratic();
        let eq = discrete_minimizer();
        let g = &eq.grid;
        // a random probability density made of eight blocks over the grid
        let m = g.values.len();
        let mut nu: Vec<f64> = (0..m).map(|i| weights[i * 8 / m]).collect();
        let mass: f64 = nu.iter().sum::<f64>() * g.dx;
        prop_assume!(mass > 1e-3);
        nu.iter_mut().for_each(|x| *x /= mass);
        let mix = GridDensity { values: g.values.iter().zip(&nu).map(|(a, b)| (1.0 - eps) * a + eps * b).collect(), ..g.clone() };
        prop_assert!(energy_functional(&mix, &v).unwrap() >= energy_functional(g, &v).unwrap());
    }

    #[test]
    fn hamiltonian_ignores_order(mut pts in configuration(12), seed in any::<u64>()) {
        let v = Potential::quadratic();
        let h0 = hamiltonian(&pts, &v).unwrap();
        let k = (seed as usize) % pts.len();
        pts.rotate_left(k);
        pts.reverse();
        prop_assert!((hamiltonian(&pts, &v).unwrap() - h0).abs() <= 1e-12 * h0.abs().max(1.0));
    }

    #[test]
    fn fluct_is_linear_and_kills_constants(pts in configuration(20), a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
        let (_, eq) = quadratic();
        let p = TestFunction::Polynomial { coefficients: vec![c, a, b] };
        let x = TestFunction::Polynomial { coefficients: vec![0.0, 1.0] };
        let x2 = TestFunction::Polynomial { coefficients: vec![0.0, 0.0, 1.0] };
        let one = TestFunction::Polynomial { coefficients: vec![c] };
        prop_assert!(fluct(&pts, &one, eq).abs() < 1e-12 * (1.0 + c.abs()) * pts.len() as f64);
        let sum = a * fluct(&pts, &x, eq) + b * fluct(&pts, &x2, eq);
        prop_assert!((fluct(&pts, &p, eq) - sum).abs() < 1e-11 * pts.len() as f64);
    }

    #[test]
    fn splitting_formula_closes(pts in configuration(40)) {
        let (v, eq) = quadratic();
        let r = splitting_check(&pts, v, eq).unwrap();
        prop_assert!(r.abs() <= 1e-3 * pts.len() as f64, "{}", r);
    }

    #[test]
    fn discrepancy_is_additive(pts in configuration(30), cut in -1.2f64..1.2) {
        let (_, eq) = quadratic();
        let n = pts.len();
        let bg = eq.blow_up(n);
        let blown: Vec<f64> = pts.iter().map(|x| x * n as f64).collect();
        let c = cut * n as f64 + 0.5e-3;
        let (lo, hi) = (-2.0 * n as f64, 2.0 * n as f64);
        let whole = discrepancy(&blown, &bg, (lo, hi));
        prop_assert!(whole.abs() < 1e-6 * n as f64);
        let parts = discrepancy(&blown, &bg, (lo, c)) + discrepancy(&blown, &bg, (c, hi));
        // a point exactly at the cut would be counted twice; the offset above avoids that
        prop_assert!((parts - whole).abs() < 1e-6 * n as f64);
    }

    #[test]
    fn h_half_norm_is_scale_and_translation_invariant(z in -0.8f64..0.8, l in 0.005f64..1.0) {
        let base = h_half_norm_squared(&TestFunction::bump(0.0, 1.0)).unwrap();
        let v = h_half_norm_squared(&TestFunction::bump(z, l)).unwrap();
        prop_assert!((v - base).abs() < 1e-6 * base);
    }

    #[test]
    fn unknown_config_keys_are_rejected(key in "[a-z_]{3,12}") {
        let known = ["version", "command", "experiment", "io", "workers", "verbosity", "enforce_thresholds"];
        prop_assume!(!known.contains(&key.as_str()));
        let text = format!(r#"{{"version": 1, "command": "clt", "{key}": 0}}"#);
        prop_assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn config_round_trips(seed in any::<u64>(), workers in 1usize..64, replicas in 1usize..5000) {
        let mut cfg = RunConfig::default();
        cfg.experiment.seed = seed;
        cfg.experiment.replicas = replicas;
        cfg.workers = workers;
        let text = serde_json::to_string(&cfg).unwrap();
        prop_assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn field_components_are_kernel_fluctuations(seed in 0u64..1000, a in -30.0f64..30.0, h in 0.05f64..5.0) {
        let (_, eq) = quadratic();
        let n = 32;
        let bg = eq.blow_up(n);
        let pts = sample_tridiagonal(n, 2.0, seed).unwrap().blown_up();
        let (ex, ey) = electric_field(&pts, &bg, (a, h), None).unwrap();
        for (xi, e) in [(TestFunction::Kappa { a, h }, ex), (TestFunction::Zeta { a, h }, ey)] {
            let mean = bg.integrate(&|x| xi.value(x), &[a], 1e-13);
            let want = (pts.iter().map(|&x| xi.value(x)).sum::<f64>() - mean) / (2.0 * PI);
            prop_assert!((e - want).abs() < 1e-10, "{} {}", e, want);
        }
    }

    #[test]
    fn field_form_matches_sum_form_for_any_admissible_truncation(seed in 0u64..1000, n in 2usize..12, shrink in 0.1f64..1.0) {
        let (_, eq) = quadratic();
        let bg = eq.blow_up(n);
        let pts = sample_tridiagonal(n, 2.0, seed).unwrap().blown_up();
        let sum = next_order_energy(&pts, &bg).unwrap().total;
        let r = minimal_distances(&pts).scaled(shrink);
        let field = renormalized_energy_field_form(&pts, &bg, &r, 20.0 * n as f64).unwrap().total;
        prop_assert!((field - sum).abs() < 0.01 * sum.abs().max(1.0), "{} vs {}", field, sum);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn transport_residual_is_constant_and_main_identity_holds(z in -0.4f64..0.4, l in 0.15f64..0.5) {
        let (v, eq) = quadratic();
        let map = solve_transport(&TestFunction::bump(z, l), eq, v).unwrap();
        prop_assert!(map.residual < 1e-5 && map.residual_spread < 1e-5, "{} {}", map.residual, map.residual_spread);

        // in the bulk the support edges stop mattering once the bump is mesoscopic
        let xi = TestFunction::bump(z, l / 8.0);
        let map = solve_transport(&xi, eq, v).unwrap();
        let lhs = eq.integrate(|x| -xi.derivative(1, x) * map.psi(x), &xi.breaks(), 1e-12);
        let norm = h_half_norm_squared(&xi).unwrap();
        prop_assert!((lhs - 2.0 * norm).abs() < 0.01 * 2.0 * norm, "{} {}", lhs, norm);
    }

    #[test]
    fn transport_is_linear_in_the_source(a in -2.0f64..2.0, b in -2.0f64..2.0, x in -0.9f64..0.9) {
        let (v, eq) = quadratic();
        let p = |c: Vec<f64>| solve_transport(&TestFunction::Polynomial { coefficients: c }, eq, v).unwrap();
        let both = p(vec![0.0, a, 0.0, b]);
        let (m1, m3) = (p(vec![0.0, 1.0]), p(vec![0.0, 0.0, 0.0, 1.0]));
        prop_assert!((both.psi(x) - a * m1.psi(x) - b * m3.psi(x)).abs() < 1e-9);
        prop_assert!((both.c_xi - a * m1.c_xi - b * m3.c_xi).abs() < 1e-9);
    }
}
