//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use beg_core::canonical::{
    big_g_derivative, canonical_criticals, kc2_of_beta, solve_canonical, CanonicalSolution,
};
use beg_core::diagram::{equivalence_report, linear_grid, Verdict};
use beg_core::limits::{
    classify_type, conditioned_clt_check, convergence_diagnostic, default_window, exact_spin_pmf,
    Branch,
};
use beg_core::micro::{micro_criticals, micro_tricritical, solve_micro};
use beg_core::model::{cramer_j, cramer_j_prime, energy_range};
use beg_core::numerics::bisect;
use beg_core::oracle::{simplex_oracle, OracleObjective};
use beg_core::sampler::metropolis_sampler;
use beg_core::{CanonicalParams, MicroParams, Result, BETA_C};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = fn() -> Result<Outcome>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn tricritical_canonical() -> Result<Outcome> {
    let k = kc2_of_beta(BETA_C)?;
    let closed = 3.0 / (2.0 * 4f64.ln());
    let pass = (k - 1.0820).abs() < 5e-5 && (k - closed).abs() < 1e-12;
    outcome(pass, format!("kc2(log 4) = {k:.15}, closed form {closed:.15}"))
}

fn tricritical_micro() -> Result<Outcome> {
    let (u, k) = micro_tricritical()?;
    outcome((k - 1.0813).abs() < 1e-3, format!("u = {u:.6}, K = {k:.6}"))
}

// Minimizes J_beta(z) - beta K z^2 over [0, 1) independently of the
// canonical solver: grid scan, then bisection on J'(z) - 2 beta K z.
fn dual_minimum(beta: f64, k: f64) -> Result<(f64, f64)> {
    let obj = |z: f64| Ok::<f64, beg_core::BegError>(cramer_j(beta, z)? - beta * k * z * z);
    let m = 4000;
    let top = 1.0 - 1e-15;
    let mut best = (0usize, obj(0.0)?);
    for i in 1..m {
        let z = i as f64 / m as f64;
        let v = obj(z)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let (i, _) = best;
    let z = if i == 0 {
        let h = |z: f64| cramer_j_prime(beta, z).unwrap() - 2.0 * beta * k * z;
        if h(1.0 / m as f64) >= 0.0 {
            0.0
        } else {
            bisect(h, 0.0, 2.0 / m as f64, 0.0, 0.0)?
        }
    } else {
        let lo = (i - 1) as f64 / m as f64;
        let hi = ((i + 1) as f64 / m as f64).min(top);
        let h = |z: f64| cramer_j_prime(beta, z).unwrap() - 2.0 * beta * k * z;
        if h(hi) < 0.0 {
            bisect(h, hi, top, 0.0, 0.0)?
        } else {
            bisect(h, lo, hi, 0.0, 0.0)?
        }
    };
    Ok((z, obj(z)?))
}

fn duality() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut dv, mut dz) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let beta = rng.gen_range(0.2..4.0);
        let k = rng.gen_range(0.2..3.0);
        let sol = solve_canonical(&CanonicalParams::new(beta, k)?)?;
        let (z, v) = dual_minimum(beta, k)?;
        dv = dv.max((v - sol.min_value).abs());
        dz = dz.max((z - sol.order_parameter()).abs());
    }
    outcome(
        dv < 1e-9 && dz < 1e-8,
        format!("max value gap {dv:.2e}, max argmin gap {dz:.2e}"),
    )
}

fn oracle_equivalence() -> Result<Outcome> {
    const STEP: f64 = 5e-4;
    const MARGIN: f64 = 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 20 {
        let beta = rng.gen_range(0.3..3.5);
        let k = rng.gen_range(0.3..2.5);
        let crit = canonical_criticals(beta)?;
        let near = (k - crit.transition_k()).abs() < MARGIN || (beta - BETA_C).abs() < MARGIN;
        if near {
            continue;
        }
        let params = CanonicalParams::new(beta, k)?;
        let sol = solve_canonical(&params)?;
        let res = simplex_oracle(&OracleObjective::Canonical(params), STEP)?;
        worst = worst.max(res.hausdorff(&sol.macrostates));
        done += 1;
    }
    let canon = worst;
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < 20 {
        let u = rng.gen_range(0.05..0.95);
        let k = rng.gen_range(0.3..2.5);
        if u < energy_range(k).0 + MARGIN {
            continue;
        }
        let crit = micro_criticals(u)?;
        let near = [crit.kc2, crit.kc1, crit.c_u]
            .iter()
            .flatten()
            .any(|c| (k - c).abs() < MARGIN);
        if near {
            continue;
        }
        let params = MicroParams::new(u, k)?;
        let sol = solve_micro(&params)?;
        let tol = STEP * (1.0 + 2.0 * k);
        let res = simplex_oracle(&OracleObjective::Micro { params, tol }, STEP)?;
        worst = worst.max(res.hausdorff(&sol.macrostates));
        done += 1;
    }
    outcome(
        canon < 2e-3 && worst < 2e-3,
        format!("max componentwise distance: canonical {canon:.2e}, micro {worst:.2e}"),
    )
}

fn count(beta: f64, k: f64) -> Result<usize> {
    Ok(solve_canonical(&CanonicalParams::new(beta, k)?)?.z_points.len())
}

fn branch_structure() -> Result<Outcome> {
    const DELTA: f64 = 1e-4;
    let mut seen = Vec::new();
    let mut pass = true;
    for beta in [0.7, 1.0, BETA_C, 2.0, 3.0] {
        let crit = canonical_criticals(beta)?;
        let kc = crit.transition_k();
        let counts = [count(beta, kc - DELTA)?, count(beta, kc)?, count(beta, kc + DELTA)?];
        let expect = if beta <= BETA_C { [1, 1, 2] } else { [1, 3, 2] };
        pass &= counts == expect;
        seen.push(format!("{beta:.4}:{counts:?}"));
    }
    outcome(pass, seen.join(" "))
}

fn z_tilde(sol: &CanonicalSolution) -> f64 {
    sol.z_tilde().unwrap_or(0.0)
}

fn continuity_and_jump() -> Result<Outcome> {
    let deltas = [1e-2, 1e-3, 1e-4];
    let kc2 = kc2_of_beta(1.0)?;
    let ladder: Vec<f64> = deltas
        .iter()
        .map(|d| Ok(z_tilde(&solve_canonical(&CanonicalParams::new(1.0, kc2 + d)?)?)))
        .collect::<Result<_>>()?;
    let continuous = ladder.windows(2).all(|w| w[1] < w[0]) && ladder[2] < 0.05;
    let kc1 = canonical_criticals(2.0)?.kc1.expect("first-order at beta = 2");
    let at = z_tilde(&solve_canonical(&CanonicalParams::new(2.0, kc1)?)?);
    let jump: Vec<f64> = deltas
        .iter()
        .map(|d| Ok(z_tilde(&solve_canonical(&CanonicalParams::new(2.0, kc1 + d)?)?)))
        .collect::<Result<_>>()?;
    let jumps = at > 0.1 && jump.iter().all(|z| *z >= at);
    outcome(
        continuous && jumps,
        format!(
            "beta=1 ladder {:.3e} {:.3e} {:.3e}; beta=2 z(kc1) = {at:.6}, ladder min {:.6}",
            ladder[0],
            ladder[1],
            ladder[2],
            jump.iter().cloned().fold(f64::INFINITY, f64::min)
        ),
    )
}

fn limit_constants() -> Result<Outcome> {
    let tri = CanonicalParams::new(BETA_C, kc2_of_beta(BETA_C)?)?;
    let g6 = big_g_derivative(&tri, 0.0, 6)?;
    let at1 = CanonicalParams::new(1.0, kc2_of_beta(1.0)?)?;
    let rep = classify_type(&at1, 0.0)?;
    let pass = (g6 - 162.0).abs() < 1e-9 && rep.r == 2 && rep.derivative_values[1] > 0.0;
    outcome(
        pass,
        format!(
            "G6(0) at tricritical = {g6:.12}; beta=1 type r = {}, G4(0) = {:.6}",
            rep.r, rep.derivative_values[1]
        ),
    )
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn distribution_ladders() -> Result<Outcome> {
    let ns = [500, 1000, 2000];
    let regimes = [
        (1.0, 1.0, 1u8),
        (1.0, kc2_of_beta(1.0)?, 2),
        (BETA_C, kc2_of_beta(BETA_C)?, 3),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (beta, k, r) in regimes {
        let params = CanonicalParams::new(beta, k)?;
        let rep = classify_type(&params, 0.0)?;
        let ks: Vec<f64> = convergence_diagnostic(&ns, &params, &rep)?
            .iter()
            .map(|p| p.ks)
            .collect();
        pass &= rep.r == r && strictly_decreasing(&ks);
        detail.push(format!("r={} KS {:.2e} {:.2e} {:.2e}", rep.r, ks[0], ks[1], ks[2]));
    }
    let params = CanonicalParams::new(1.0, 1.5)?;
    let a = default_window(solve_canonical(&params)?.z_tilde().unwrap_or(0.0));
    let clt: Vec<f64> = [1000, 2000]
        .iter()
        .map(|&n| Ok(conditioned_clt_check(n, &params, Branch::Plus, a)?.ks))
        .collect::<Result<_>>()?;
    pass &= strictly_decreasing(&clt);
    detail.push(format!("conditioned KS {:.2e} {:.2e}", clt[0], clt[1]));
    outcome(pass, detail.join("; "))
}

fn variance_identity() -> Result<Outcome> {
    let params = CanonicalParams::new(1.0, 1.0)?;
    let sigma2 = classify_type(&params, 0.0)?.sigma2.expect("type 1");
    let gap = |n| -> Result<f64> {
        Ok((exact_spin_pmf(n, &params)?.scaled_variance() - sigma2).abs() / sigma2)
    };
    let (g1, g4) = (gap(1000)?, gap(4000)?);
    outcome(
        g4 < 0.05 && g4 < g1,
        format!("sigma2 = {sigma2:.6}, relative gap n=1000 {g1:.2e}, n=4000 {g4:.2e}"),
    )
}

fn nonequivalence() -> Result<Outcome> {
    let betas = linear_grid(0.5, 3.0, 1e-3)?;
    let us = linear_grid(0.05, 0.95, 1e-3)?;
    let near = equivalence_report(1.0817, &betas, &us)?;
    let far = equivalence_report(1.5, &betas, &us)?;
    let pass = near.verdict == Verdict::Nonequivalent
        && !near.gap.is_empty()
        && far.verdict == Verdict::Equivalent;
    outcome(
        pass,
        format!(
            "K=1.0817 {} gap {:?}; K=1.5 {} gap measure {:.2e}",
            near.verdict.as_str(),
            near.gap,
            far.verdict.as_str(),
            far.gap_measure
        ),
    )
}

fn metropolis() -> Result<Outcome> {
    let params = CanonicalParams::new(1.0, 1.0)?;
    let exact = exact_spin_pmf(50, &params)?;
    let run = metropolis_sampler(50, &params, 1_000_000, 2024)?;
    let tv = run.total_variation(&exact.probabilities);
    outcome(tv < 0.02, format!("TV = {tv:.4e}, acceptance {:.3}", run.acceptance_rate))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 11] = [
        ("canonical tricritical constant", tricritical_canonical),
        ("microcanonical tricritical constant", tricritical_micro),
        ("duality identity", duality),
        ("oracle equivalence", oracle_equivalence),
        ("branch structure", branch_structure),
        ("continuity vs jump", continuity_and_jump),
        ("limit-law constants", limit_constants),
        ("distribution ladders", distribution_ladders),
        ("variance identity", variance_identity),
        ("nonequivalence regime", nonequivalence),
        ("metropolis cross-check", metropolis),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({detail}) [{:.1}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            name,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
