use beg_core::canonical::{big_g, canonical_free_energy, lift_canonical, solve_canonical};
use beg_core::limits::{exact_spin_pmf, phase_weights};
use beg_core::micro::{lift_micro, solve_micro};
use beg_core::model::{
    canonical_rate, cramer_j, cramer_j_prime, cumulant, energy_range, f_k, micro_rate,
    rel_entropy, rho_beta,
};
use beg_core::sampler::metropolis_sampler;
use beg_core::{CanonicalParams, Macrostate, MicroParams};
use proptest::prelude::*;

fn simplex_point() -> impl Strategy<Value = Macrostate> {
    (0.0f64..1.0, 0.0f64..1.0).prop_map(|(a, b)| {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Macrostate::new(lo, hi - lo, 1.0 - hi).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cumulant_derivatives_match_differences(beta in 0.1f64..4.0, t in -6.0f64..6.0, order in 1usize..=6) {
        let h = 1e-4;
        let fd = (cumulant(beta, t + h, order - 1).unwrap()
            - cumulant(beta, t - h, order - 1).unwrap()) / (2.0 * h);
        let exact = cumulant(beta, t, order).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{fd} vs {exact}");
    }

    #[test]
    fn cumulant_is_even(beta in 0.1f64..4.0, t in 0.0f64..20.0) {
        let a = cumulant(beta, t, 0).unwrap();
        let b = cumulant(beta, -t, 0).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn cramer_slope_inverts_cumulant_slope(beta in 0.1f64..4.0, z in -0.99f64..0.99) {
        let t = cramer_j_prime(beta, z).unwrap();
        let back = cumulant(beta, t, 1).unwrap();
        prop_assert!((back - z).abs() < 1e-11);
        // Fenchel equality J(z) = t z - c(t)
        let j = cramer_j(beta, z).unwrap();
        prop_assert!((j - (t * z - cumulant(beta, t, 0).unwrap())).abs() < 1e-10);
    }

    #[test]
    fn relative_entropy_is_nonnegative(mu in simplex_point(), beta in 0.0f64..4.0) {
        let rho = rho_beta(beta).unwrap();
        prop_assert!(rel_entropy(&mu, &rho) >= -1e-15);
        prop_assert!(rel_entropy(&rho, &rho).abs() < 1e-15);
    }

    #[test]
    fn canonical_lift_has_prescribed_mean(beta in 0.2f64..4.0, k in 0.2f64..3.0, z in -0.95f64..0.95) {
        let params = CanonicalParams::new(beta, k).unwrap();
        prop_assert!((lift_canonical(&params, z).mean() - cumulant(beta, 2.0 * beta * k * z, 1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn canonical_minimizers_are_zeros_of_the_rate(beta in 0.2f64..4.0, k in 0.2f64..3.0) {
        let params = CanonicalParams::new(beta, k).unwrap();
        let sol = solve_canonical(&params).unwrap();
        for (z, nu) in sol.z_points.iter().zip(&sol.macrostates) {
            prop_assert!((nu.mean() - z).abs() < 1e-9);
            prop_assert!(canonical_rate(nu, &params).unwrap().abs() < 1e-9);
            prop_assert!((big_g(&params, *z) - sol.min_value).abs() < 1e-10);
        }
        let phi = canonical_free_energy(&params).unwrap();
        let nu = &sol.macrostates[0];
        let direct = rel_entropy(nu, &Macrostate::uniform()) + beta * f_k(nu, k);
        prop_assert!((phi - direct).abs() < 1e-9);
    }

    #[test]
    fn micro_minimizers_satisfy_the_constraint(u in 0.05f64..0.95, k in 0.2f64..3.0) {
        prop_assume!(u >= energy_range(k).0);
        let params = MicroParams::new(u, k).unwrap();
        let sol = solve_micro(&params).unwrap();
        for (z, nu) in sol.z_points.iter().zip(&sol.macrostates) {
            prop_assert!((nu.mean() - z).abs() < 1e-12);
            prop_assert!((f_k(nu, k) - u).abs() < 1e-12);
            prop_assert!(micro_rate(nu, &params, 1e-9).unwrap().abs() < 1e-9);
            prop_assert!(lift_micro(&params, *z).approx_eq(nu, 1e-12));
        }
        prop_assert!(sol.entropy <= 1e-15);
    }

    #[test]
    fn phase_weights_are_normalized(beta in 0.3f64..3.0, k in 1.3f64..3.0) {
        let params = CanonicalParams::new(beta, k).unwrap();
        let sol = solve_canonical(&params).unwrap();
        prop_assume!(sol.z_points.len() == 2);
        let b = phase_weights(&params, &sol.z_points).unwrap();
        prop_assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        prop_assert!((b[0] - 0.5).abs() < 1e-12);
    }
}

fn brute_force_pmf(n: usize, params: &CanonicalParams) -> Vec<f64> {
    let mut weights = vec![0.0; 2 * n + 1];
    for code in 0..3usize.pow(n as u32) {
        let (mut c, mut s, mut q) = (code, 0i64, 0i64);
        for _ in 0..n {
            let spin = (c % 3) as i64 - 1;
            c /= 3;
            s += spin;
            q += spin * spin;
        }
        let energy = q as f64 - params.k / n as f64 * (s * s) as f64;
        weights[(s + n as i64) as usize] += (-params.beta * energy).exp();
    }
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

#[test]
fn exact_pmf_matches_enumeration() {
    for n in 1..=8 {
        for (beta, k) in [(0.5, 0.7), (1.0, 1.5), (2.5, 1.1)] {
            let params = CanonicalParams::new(beta, k).unwrap();
            let exact = exact_spin_pmf(n, &params).unwrap();
            for (a, b) in exact.probabilities.iter().zip(brute_force_pmf(n, &params)) {
                assert!((a - b).abs() < 1e-13, "n={n}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn sampler_is_reproducible() {
    let params = CanonicalParams::new(1.0, 1.0).unwrap();
    let a = metropolis_sampler(20, &params, 5000, 9).unwrap();
    let b = metropolis_sampler(20, &params, 5000, 9).unwrap();
    assert_eq!(a.trace, b.trace);
    let c = metropolis_sampler(20, &params, 5000, 10).unwrap();
    assert_ne!(a.trace, c.trace);
}

#[test]
fn sampler_detailed_balance_on_tiny_system() {
    let params = CanonicalParams::new(1.0, 1.0).unwrap();
    let exact = brute_force_pmf(4, &params);
    let run = metropolis_sampler(4, &params, 10_000_000, 1).unwrap();
    assert!(run.total_variation(&exact) < 0.01);
}
