//! Canonical ensemble: global minimizers of `G_{beta,K}`, the critical
//! couplings of the continuous and discontinuous bifurcations, the lift of
//! minimizers to macrostates and the canonical free energy.
//!
//! `G_{beta,K}(z) = beta K z^2 - c_beta(2 beta K z)` and its rescaling
//! `F_{beta,K}(w) = w^2 / (4 beta K) - c_beta(w)` share minimizers through
//! `w = 2 beta K z`. All roots are located with the bisection/Newton hybrid
//! on brackets that follow from the convexity structure of `c'_beta`.

use serde::Serialize;

use crate::error::{domain, precondition, BegError, Result};
use crate::limits::{classify_type, TypeReport};
use crate::model::{
    c0, c1, c2, cumulant_ladder, f_k, rel_entropy, CanonicalParams, Macrostate, BETA_C,
};
use crate::numerics::{bisect, bisect_newton};

/// A coupling within this distance of a computed critical value is treated
/// as exactly critical when selecting the branch.
pub const CRITICAL_SNAP: f64 = 1e-9;

/// Width of the `[K1, K2]` bracket below which the first-order critical
/// value is reported as the continuation of the second-order one.
pub const TRICRITICAL_BRACKET: f64 = 1e-8;

/// Within this distance above `log 4` an unresolvable tangency bracket is
/// treated as collapsed.
const COLLAPSE_WIDTH: f64 = 1e-4;

/// `G_{beta,K}(z)`.
pub fn big_g(params: &CanonicalParams, z: f64) -> f64 {
    params.beta * params.k * z * z - c0(params.beta, params.tilt_scale() * z)
}

/// `G_{beta,K}^{(order)}(z)` for `order` in `0..=6`.
pub fn big_g_derivative(params: &CanonicalParams, z: f64, order: usize) -> Result<f64> {
    if order > 6 {
        return Err(domain(format!("derivative order must be 0..=6, got {order}")));
    }
    let s = params.tilt_scale();
    let c = cumulant_ladder(params.beta, s * z);
    let quad = match order {
        0 => params.beta * params.k * z * z,
        1 => s * z,
        2 => s,
        _ => 0.0,
    };
    Ok(quad - s.powi(order as i32) * c[order])
}

/// `F_{beta,K}(w)`.
pub fn big_f(params: &CanonicalParams, w: f64) -> f64 {
    w * w / (2.0 * params.tilt_scale()) - c0(params.beta, w)
}

/// `F_{beta,K}^{(order)}(w)` for `order` in `0..=6`.
pub fn big_f_derivative(params: &CanonicalParams, w: f64, order: usize) -> Result<f64> {
    if order > 6 {
        return Err(domain(format!("derivative order must be 0..=6, got {order}")));
    }
    let s = params.tilt_scale();
    let c = cumulant_ladder(params.beta, w);
    let quad = match order {
        0 => w * w / (2.0 * s),
        1 => w / s,
        2 => 1.0 / s,
        _ => 0.0,
    };
    Ok(quad - c[order])
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("beta must be finite and > 0, got {beta}")))
    }
}

/// Second-order critical coupling `1 / (2 beta c''_beta(0))`. For
/// `beta > log 4` the same expression is the upper scaffolding value `K2`.
pub fn kc2_of_beta(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(1.0 / (4.0 * beta * (-beta).exp()) + 1.0 / (2.0 * beta))
}

/// Inflection point of `c'_beta` on `w > 0`, `arccosh(e^beta / 2 - 4 e^-beta)`.
pub fn w_c_of_beta(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let arg = 0.5 * beta.exp() - 4.0 * (-beta).exp();
    if beta < BETA_C || arg < 1.0 - 1e-12 {
        return Err(domain(format!(
            "w_c(beta) requires beta >= log 4, got beta = {beta}"
        )));
    }
    let arg = arg.max(1.0);
    Ok((arg + (arg * arg - 1.0).sqrt()).ln())
}

/// Simultaneous solution of `F' = 0` and `F'' = 0` on `w > 0` for
/// `beta > log 4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tangency {
    pub w1: f64,
    pub k1: f64,
    pub k2: f64,
}

pub fn tangency(beta: f64) -> Result<Tangency> {
    check_beta(beta)?;
    if beta <= BETA_C {
        return Err(precondition(format!(
            "tangency requires beta > log 4, got {beta}"
        )));
    }
    let wc = w_c_of_beta(beta)?;
    // g(w) = w c''(w) - c'(w), g'(w) = w c'''(w); g > 0 just past w_c and
    // tends to -1.
    let g = |w: f64| {
        let c = cumulant_ladder(beta, w);
        (w * c[2] - c[1], w * c[3])
    };
    let mut hi = wc + 1.0;
    while g(hi).0 >= 0.0 {
        hi *= 2.0;
        if hi > 1e4 {
            return Err(BegError::Bracket(format!(
                "g(w) stays positive beyond w = {hi} at beta = {beta}"
            )));
        }
    }
    let lo = wc.max(f64::MIN_POSITIVE);
    let w1 = if g(lo).0 > 0.0 {
        bisect_newton(g, lo, hi, 1e-15)?
    } else if beta - BETA_C < COLLAPSE_WIDTH {
        // g is below rounding on the whole bracket: w1 has merged into w_c.
        lo
    } else {
        return Err(BegError::Bracket(format!(
            "g(w_c) = {} is not positive at beta = {beta}",
            g(lo).0
        )));
    };
    let k1 = w1 / (2.0 * beta * c1(beta, w1));
    Ok(Tangency {
        w1,
        k1,
        k2: kc2_of_beta(beta)?,
    })
}

/// Positive local minimizer `w~(beta, K)` of `F_{beta,K}`.
///
/// For `beta <= log 4` and `K > Kc2(beta)`, solves `c'(w)/w = 1/(2 beta K)`
/// on `(0, 2 beta K]`, where `c'(w)/w` is strictly decreasing. For
/// `beta > log 4` and `K >= K1`, `F'` is convex on `(w1, inf)` and negative
/// at `w1`, so `(w1, max(2 beta K, w1 + 1)]` holds exactly one root.
pub fn positive_min_w(beta: f64, k: f64) -> Result<f64> {
    let params = CanonicalParams::new(beta, k)?;
    if beta <= BETA_C {
        let kc2 = kc2_of_beta(beta)?;
        if k <= kc2 {
            return Err(precondition(format!(
                "positive minimizer needs K > Kc2(beta) = {kc2}, got K = {k}"
            )));
        }
        positive_min_w_continuous(&params)
    } else {
        let tan = tangency(beta)?;
        if k < tan.k1 {
            return Err(precondition(format!(
                "positive minimizer needs K >= K1(beta) = {}, got K = {k}",
                tan.k1
            )));
        }
        positive_min_w_discontinuous(&params, &tan)
    }
}

fn positive_min_w_continuous(params: &CanonicalParams) -> Result<f64> {
    let beta = params.beta;
    let inv = 1.0 / params.tilt_scale();
    // h(w) = F'(w) / w, extended continuously to w = 0.
    let h = |w: f64| {
        if w == 0.0 {
            return (inv - c2(beta, 0.0), 0.0);
        }
        let c = cumulant_ladder(beta, w);
        (inv - c[1] / w, -(c[2] * w - c[1]) / (w * w))
    };
    let w = bisect_newton(h, 0.0, params.tilt_scale(), 1e-14)?;
    polish_stationary(params, w, 0.0, params.tilt_scale())
}

fn positive_min_w_discontinuous(params: &CanonicalParams, tan: &Tangency) -> Result<f64> {
    let beta = params.beta;
    let inv = 1.0 / params.tilt_scale();
    let f1 = |w: f64| {
        let c = cumulant_ladder(beta, w);
        (w * inv - c[1], inv - c[2])
    };
    let hi = params.tilt_scale().max(tan.w1 + 1.0);
    let w = bisect_newton(f1, tan.w1, hi, 1e-14)?;
    polish_stationary(params, w, tan.w1, hi)
}

// A few extra Newton steps on F' itself so that the residual of the
// original equation, not of a rescaled one, is small.
fn polish_stationary(params: &CanonicalParams, w: f64, lo: f64, hi: f64) -> Result<f64> {
    let inv = 1.0 / params.tilt_scale();
    let mut x = w;
    for _ in 0..4 {
        let c = cumulant_ladder(params.beta, x);
        let fp = x * inv - c[1];
        let fpp = inv - c[2];
        if fp.abs() < 1e-15 || fpp <= 0.0 {
            break;
        }
        let next = x - fp / fpp;
        if !(next > lo && next <= hi) {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Depth function `D(K) = F_{beta,K}(w~(beta,K))` for `beta > log 4` and
/// `K >= K1`; its unique zero is the first-order critical coupling.
pub fn d_of_k(beta: f64, k: f64) -> Result<f64> {
    let params = CanonicalParams::new(beta, k)?;
    if beta <= BETA_C {
        return Err(precondition(format!(
            "D(K) is defined for beta > log 4, got {beta}"
        )));
    }
    let tan = tangency(beta)?;
    if k < tan.k1 {
        return Err(precondition(format!(
            "D(K) needs K >= K1(beta) = {}, got K = {k}",
            tan.k1
        )));
    }
    depth(&params, &tan)
}

fn depth(params: &CanonicalParams, tan: &Tangency) -> Result<f64> {
    if params.k == tan.k1 {
        return Ok(big_f(params, tan.w1));
    }
    let w = positive_min_w_discontinuous(params, tan)?;
    Ok(big_f(params, w))
}

/// Critical values at a fixed `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalCriticals {
    pub beta: f64,
    /// Second-order critical coupling, for `beta <= log 4`.
    pub kc2: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    /// First-order critical coupling, for `beta > log 4`.
    pub kc1: Option<f64>,
    pub w1: Option<f64>,
    /// Set when `K2 - K1` collapsed below [`TRICRITICAL_BRACKET`] and `kc1`
    /// is the continuation `K2`.
    pub near_tricritical: bool,
}

impl CanonicalCriticals {
    /// The coupling at which the solution set changes size.
    pub fn transition_k(&self) -> f64 {
        self.kc2.or(self.kc1).expect("one critical value is always set")
    }

    pub fn is_first_order(&self) -> bool {
        self.kc1.is_some()
    }
}

pub fn canonical_criticals(beta: f64) -> Result<CanonicalCriticals> {
    check_beta(beta)?;
    if beta <= BETA_C {
        return Ok(CanonicalCriticals {
            beta,
            kc2: Some(kc2_of_beta(beta)?),
            k1: None,
            k2: None,
            kc1: None,
            w1: None,
            near_tricritical: false,
        });
    }
    let tan = tangency(beta)?;
    let (kc1, near) = if tan.k2 - tan.k1 < TRICRITICAL_BRACKET {
        (tan.k2, true)
    } else {
        (first_order_root(beta, &tan)?, false)
    };
    Ok(CanonicalCriticals {
        beta,
        kc2: None,
        k1: Some(tan.k1),
        k2: Some(tan.k2),
        kc1: Some(kc1),
        w1: Some(tan.w1),
        near_tricritical: near,
    })
}

fn first_order_root(beta: f64, tan: &Tangency) -> Result<f64> {
    let mut failure = None;
    let root = bisect(
        |k| {
            let params = CanonicalParams { beta, k };
            match depth(&params, tan) {
                Ok(d) => d,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        tan.k1,
        tan.k2,
        0.0,
        1e-14,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(root),
    }
}

/// First-order critical coupling `K_c^{(1)}(beta)` for `beta > log 4`.
pub fn kc1_of_beta(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if beta <= BETA_C {
        return Err(precondition(format!(
            "K_c^(1)(beta) is defined for beta > log 4, got {beta}"
        )));
    }
    Ok(canonical_criticals(beta)?.kc1.expect("set for beta > log 4"))
}

/// Number of global minimizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseLabel {
    Unique,
    Pair,
    Triple,
}

impl PhaseLabel {
    pub fn from_count(n: usize) -> Self {
        match n {
            1 => PhaseLabel::Unique,
            2 => PhaseLabel::Pair,
            _ => PhaseLabel::Triple,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::Unique => "unique",
            PhaseLabel::Pair => "pair",
            PhaseLabel::Triple => "triple",
        }
    }
}

/// Global minimizers of `G_{beta,K}` and their lifted macrostates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalSolution {
    pub params: CanonicalParams,
    /// Sorted ascending.
    pub z_points: Vec<f64>,
    pub w_points: Vec<f64>,
    pub macrostates: Vec<Macrostate>,
    pub min_value: f64,
    pub types: Vec<TypeReport>,
    pub phase_label: PhaseLabel,
}

impl CanonicalSolution {
    /// Largest `|z|`, the order parameter.
    pub fn order_parameter(&self) -> f64 {
        self.z_points.iter().fold(0.0, |m, z| m.max(z.abs()))
    }

    /// The positive minimizer, if any.
    pub fn z_tilde(&self) -> Option<f64> {
        self.z_points.iter().copied().find(|z| *z > 0.0)
    }
}

/// Lift of a stationary point `z` to the macrostate tilted by `t = 2 beta K z`.
pub fn lift_canonical(params: &CanonicalParams, z: f64) -> Macrostate {
    let t = params.tilt_scale() * z;
    let beta = params.beta;
    let logs = [-t - beta, 0.0, t - beta];
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    Macrostate::from_masses(w[0] / total, w[1] / total, w[2] / total)
}

pub fn solve_canonical(params: &CanonicalParams) -> Result<CanonicalSolution> {
    let crit = canonical_criticals(params.beta)?;
    solve_canonical_with(params, &crit)
}

/// Same as [`solve_canonical`] with critical values computed once by the
/// caller, for sweeps at fixed `beta`.
pub fn solve_canonical_with(
    params: &CanonicalParams,
    crit: &CanonicalCriticals,
) -> Result<CanonicalSolution> {
    if crit.beta != params.beta {
        return Err(precondition("critical values were computed for another beta"));
    }
    let k = params.k;
    let w_tilde = match (crit.kc2, crit.kc1) {
        (Some(kc2), _) => {
            if k <= kc2 + CRITICAL_SNAP {
                None
            } else {
                Some((positive_min_w_continuous(params)?, false))
            }
        }
        (None, Some(kc1)) => {
            let tan = Tangency {
                w1: crit.w1.expect("set with kc1"),
                k1: crit.k1.expect("set with kc1"),
                k2: crit.k2.expect("set with kc1"),
            };
            if k < kc1 - CRITICAL_SNAP {
                None
            } else {
                let keep_zero = (k - kc1).abs() <= CRITICAL_SNAP;
                if crit.near_tricritical && k <= tan.k2 + CRITICAL_SNAP {
                    // Collapsed bracket: the positive branch has merged into 0.
                    None
                } else {
                    Some((positive_min_w_discontinuous(params, &tan)?, keep_zero))
                }
            }
        }
        (None, None) => unreachable!("criticals always carry one value"),
    };

    let z_points = match w_tilde {
        None => vec![0.0],
        Some((w, keep_zero)) => {
            let z = w / params.tilt_scale();
            if keep_zero {
                vec![-z, 0.0, z]
            } else {
                vec![-z, z]
            }
        }
    };
    let w_points = z_points.iter().map(|z| z * params.tilt_scale()).collect();
    let macrostates = z_points.iter().map(|&z| lift_canonical(params, z)).collect();
    let min_value = z_points
        .iter()
        .map(|&z| big_g(params, z))
        .fold(f64::INFINITY, f64::min);
    // Couplings snapped onto the second-order line are classified there.
    let type_params = match crit.kc2 {
        Some(kc2) if (k - kc2).abs() <= CRITICAL_SNAP => CanonicalParams::new(params.beta, kc2)?,
        _ => *params,
    };
    let types = z_points
        .iter()
        .map(|&z| classify_type(&type_params, z))
        .collect::<Result<Vec<_>>>()?;
    Ok(CanonicalSolution {
        params: *params,
        phase_label: PhaseLabel::from_count(z_points.len()),
        z_points,
        w_points,
        macrostates,
        min_value,
        types,
    })
}

/// `phi_K(beta) = inf_mu { R(mu | rho) + beta f_K(mu) }`, evaluated at a
/// lifted minimizer.
pub fn canonical_free_energy(params: &CanonicalParams) -> Result<f64> {
    let sol = solve_canonical(params)?;
    let nu = sol.macrostates[0];
    Ok(rel_entropy(&nu, &Macrostate::uniform()) + params.beta * f_k(&nu, params.k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(beta: f64, k: f64) -> CanonicalParams {
        CanonicalParams::new(beta, k).unwrap()
    }

    #[test]
    fn g_and_f_agree() {
        let params = p(1.3, 0.9);
        for &z in &[-0.7, -0.1, 0.0, 0.2, 0.95] {
            let w = params.tilt_scale() * z;
            assert!((big_g(&params, z) - big_f(&params, w)).abs() < 1e-15);
        }
        assert_eq!(big_g(&params, 0.0), 0.0);
        let v = big_f(&p(1.0, 1.0), 1.0);
        assert!((v - (0.25 - c0(1.0, 1.0))).abs() < 1e-15);
    }

    #[test]
    fn g_derivatives_match_chain_rule() {
        let params = p(1.7, 1.2);
        let z = 0.31;
        let s = params.tilt_scale();
        for order in 0..=6 {
            let g = big_g_derivative(&params, z, order).unwrap();
            let f = big_f_derivative(&params, s * z, order).unwrap();
            assert!((g - s.powi(order as i32) * f).abs() < 1e-12 * g.abs().max(1.0));
        }
    }

    #[test]
    fn kc2_examples() {
        let v = kc2_of_beta(BETA_C).unwrap();
        assert!((v - 3.0 / (2.0 * BETA_C)).abs() < 1e-12);
        let v1 = kc2_of_beta(1.0).unwrap();
        assert!((v1 - (1.0 / (4.0 * (-1.0f64).exp()) + 0.5)).abs() < 1e-15);
        assert!((v1 - 1.179_570_457).abs() < 1e-8);
        let alt = 1.0 / (2.0 * 1.0 * c2(1.0, 0.0));
        assert!((v1 - alt).abs() < 1e-12);
        let g2 = big_g_derivative(&p(1.0, v1), 0.0, 2).unwrap();
        assert!(g2.abs() < 1e-14);
        assert!(kc2_of_beta(0.0).is_err());
    }

    #[test]
    fn w_c_examples() {
        assert_eq!(w_c_of_beta(BETA_C).unwrap(), 0.0);
        let v = w_c_of_beta(5f64.ln()).unwrap();
        assert!((v - (1.7f64 + (1.7f64 * 1.7 - 1.0).sqrt()).ln()).abs() < 1e-12);
        assert!((v - 1.1233).abs() < 1e-4);
        let wc = w_c_of_beta(2.0).unwrap();
        let lo = cumulant_ladder(2.0, wc - 0.01)[3];
        let hi = cumulant_ladder(2.0, wc + 0.01)[3];
        assert!(lo > 0.0 && hi < 0.0);
        assert!(w_c_of_beta(1.0).is_err());
    }

    #[test]
    fn tangency_at_beta_two() {
        let tan = tangency(2.0).unwrap();
        let c = cumulant_ladder(2.0, tan.w1);
        assert!((tan.w1 * c[2] - c[1]).abs() < 1e-11);
        let k1_alt = 1.0 / (2.0 * 2.0 * c[2]);
        assert!((tan.k1 - k1_alt).abs() < 1e-11);
        assert!(tan.w1 > w_c_of_beta(2.0).unwrap());
        assert!(tan.k1 < tan.k2);
        assert!(tangency(1.0).is_err());
    }

    #[test]
    fn positive_minimizer_continuous_regime() {
        let w = positive_min_w(1.0, 1.5).unwrap();
        let params = p(1.0, 1.5);
        assert!(w > 0.0);
        assert!(big_f_derivative(&params, w, 1).unwrap().abs() < 1e-12);
        assert!(big_f_derivative(&params, w, 2).unwrap() > 0.0);
        assert!(positive_min_w(1.0, 1.3).unwrap() < positive_min_w(1.0, 1.6).unwrap());
        assert!(positive_min_w(1.0, 1.1).is_err());
    }

    #[test]
    fn positive_minimizer_tends_to_tangency_point() {
        let tan = tangency(2.0).unwrap();
        let near = positive_min_w(2.0, tan.k1 + 1e-10).unwrap();
        let farther = positive_min_w(2.0, tan.k1 + 1e-4).unwrap();
        assert!((near - tan.w1).abs() < (farther - tan.w1).abs());
        assert!((near - tan.w1).abs() < 1e-3);
    }

    #[test]
    fn depth_function_signs_and_monotonicity() {
        let tan = tangency(2.0).unwrap();
        assert!(d_of_k(2.0, tan.k1).unwrap() > 0.0);
        assert!(d_of_k(2.0, tan.k2).unwrap() < 0.0);
        let vals: Vec<f64> = (0..20)
            .map(|i| tan.k1 + (tan.k2 - tan.k1) * i as f64 / 19.0)
            .map(|k| d_of_k(2.0, k).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));
        assert!(d_of_k(2.0, tan.k1 * 0.9).is_err());
    }

    #[test]
    fn first_order_critical_values() {
        let kc1 = kc1_of_beta(2.0).unwrap();
        let tan = tangency(2.0).unwrap();
        assert!(tan.k1 < kc1 && kc1 < tan.k2);
        assert!(d_of_k(2.0, kc1).unwrap().abs() < 1e-10);
        let near = kc1_of_beta(BETA_C + 1e-3).unwrap();
        assert!((near - 1.0820).abs() < 1e-2);
        let far = kc1_of_beta(5.0).unwrap();
        assert!(far > 1.0 && far < 1.0820);
        assert!(kc1_of_beta(1.0).is_err());
    }

    #[test]
    fn solve_examples() {
        let s = solve_canonical(&p(1.0, 1.0)).unwrap();
        assert_eq!(s.z_points, vec![0.0]);
        assert!(s.macrostates[0].approx_eq(&crate::model::rho_beta(1.0).unwrap(), 1e-15));

        let s = solve_canonical(&p(1.0, 1.5)).unwrap();
        assert_eq!(s.phase_label, PhaseLabel::Pair);
        assert!(s.macrostates[0].approx_eq(&s.macrostates[1].mirrored(), 1e-15));

        let kc1 = kc1_of_beta(2.0).unwrap();
        let s = solve_canonical(&p(2.0, kc1)).unwrap();
        assert_eq!(s.phase_label, PhaseLabel::Triple);
        let gz = big_g(&p(2.0, kc1), s.z_points[2]);
        assert!(gz.abs() < 1e-12);
    }

    #[test]
    fn lifted_mean_equals_z() {
        for &(beta, k) in &[(1.0, 1.5), (2.0, 1.3), (0.5, 4.0), (3.0, 2.0)] {
            let s = solve_canonical(&p(beta, k)).unwrap();
            for (z, m) in s.z_points.iter().zip(&s.macrostates) {
                assert!((m.mean() - z).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn free_energy_is_symmetric_across_pair() {
        let params = p(1.0, 1.5);
        let s = solve_canonical(&params).unwrap();
        let v: Vec<f64> = s
            .macrostates
            .iter()
            .map(|nu| rel_entropy(nu, &Macrostate::uniform()) + params.beta * f_k(nu, params.k))
            .collect();
        assert!((v[0] - v[1]).abs() < 1e-12);
        assert!((canonical_free_energy(&params).unwrap() - v[0]).abs() < 1e-15);
    }
}
