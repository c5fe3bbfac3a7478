//! Model primitives: macrostates on the spin alphabet {-1, 0, 1}, the
//! tilted single-site measure, the cumulant generating function and its
//! derivatives, the energy functional, relative entropy and the Cramér
//! rate function.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::numerics::{bisect_newton, xlogx};

/// Critical inverse temperature `log 4` separating the continuous and
/// discontinuous bifurcation regimes of the canonical ensemble.
pub const BETA_C: f64 = 2.0 * std::f64::consts::LN_2;

/// Componentwise tolerance for comparing macrostates.
pub const MACROSTATE_TOL: f64 = 1e-9;

const MASS_TOL: f64 = 1e-12;

/// A probability vector on {-1, 0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Macrostate {
    pub nu_minus: f64,
    pub nu_zero: f64,
    pub nu_plus: f64,
}

impl Macrostate {
    pub fn new(nu_minus: f64, nu_zero: f64, nu_plus: f64) -> Result<Self> {
        let masses = [nu_minus, nu_zero, nu_plus];
        if masses
            .iter()
            .any(|m| !m.is_finite() || *m < -MASS_TOL || *m > 1.0 + MASS_TOL)
        {
            return Err(domain(format!(
                "macrostate masses must lie in [0, 1], got {masses:?}"
            )));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(domain(format!("macrostate masses sum to {total}, not 1")));
        }
        Ok(Self::from_masses(nu_minus, nu_zero, nu_plus))
    }

    /// Builds a macrostate from masses the caller already knows to be
    /// valid, clamping roundoff below zero.
    pub(crate) fn from_masses(nu_minus: f64, nu_zero: f64, nu_plus: f64) -> Self {
        Self {
            nu_minus: nu_minus.max(0.0),
            nu_zero: nu_zero.max(0.0),
            nu_plus: nu_plus.max(0.0),
        }
    }

    pub fn uniform() -> Self {
        Self::from_masses(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    }

    pub fn point_mass(spin: i8) -> Self {
        match spin {
            -1 => Self::from_masses(1.0, 0.0, 0.0),
            0 => Self::from_masses(0.0, 1.0, 0.0),
            _ => Self::from_masses(0.0, 0.0, 1.0),
        }
    }

    /// `nu_plus - nu_minus`, the spin per site.
    pub fn mean(&self) -> f64 {
        self.nu_plus - self.nu_minus
    }

    /// `nu_plus + nu_minus`, the expected squared spin.
    pub fn quad(&self) -> f64 {
        self.nu_plus + self.nu_minus
    }

    /// Image under the spin flip `w -> -w`.
    pub fn mirrored(&self) -> Self {
        Self::from_masses(self.nu_plus, self.nu_zero, self.nu_minus)
    }

    pub fn masses(&self) -> [f64; 3] {
        [self.nu_minus, self.nu_zero, self.nu_plus]
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.masses()
            .iter()
            .zip(other.masses())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_abs_diff(other) <= tol
    }
}

/// Inverse temperature and coupling of the canonical ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalParams {
    pub beta: f64,
    pub k: f64,
}

impl CanonicalParams {
    pub fn new(beta: f64, k: f64) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(domain(format!("beta must be finite and > 0, got {beta}")));
        }
        if !(k.is_finite() && k > 0.0) {
            return Err(domain(format!("K must be finite and > 0, got {k}")));
        }
        Ok(Self { beta, k })
    }

    /// `2 beta K`, the tilt scale linking magnetizations and tilts.
    pub fn tilt_scale(&self) -> f64 {
        2.0 * self.beta * self.k
    }
}

/// Energy per particle and coupling of the microcanonical ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MicroParams {
    pub u: f64,
    pub k: f64,
}

impl MicroParams {
    pub fn new(u: f64, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(domain(format!("K must be finite and > 0, got {k}")));
        }
        let (lo, hi) = energy_range(k);
        if !u.is_finite() || u < lo - 1e-14 || u > hi + 1e-14 {
            return Err(domain(format!(
                "u = {u} lies outside dom s_K = [{lo}, {hi}] for K = {k}"
            )));
        }
        Ok(Self {
            u: u.clamp(lo, hi),
            k,
        })
    }
}

/// The range `[min(1 - K, 0), 1]` of the energy functional, which is the
/// effective domain of the microcanonical entropy.
pub fn energy_range(k: f64) -> (f64, f64) {
    ((1.0 - k).min(0.0), 1.0)
}

/// Values of the cumulant generating function and its first six derivatives
/// at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CumulantLadder {
    pub t: f64,
    pub values: [f64; 7],
}

impl CumulantLadder {
    pub fn at(beta: f64, t: f64) -> Result<Self> {
        check_cumulant_args(beta, t)?;
        Ok(Self {
            t,
            values: cumulant_ladder(beta, t),
        })
    }

    pub fn order(&self, j: usize) -> f64 {
        self.values[j]
    }
}

fn check_cumulant_args(beta: f64, t: f64) -> Result<()> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(domain(format!("beta must be finite and > 0, got {beta}")));
    }
    if !t.is_finite() {
        return Err(domain(format!("cumulant argument must be finite, got {t}")));
    }
    Ok(())
}

/// `c_beta^{(order)}(t)` for `order` in `0..=6`.
pub fn cumulant(beta: f64, t: f64, order: usize) -> Result<f64> {
    check_cumulant_args(beta, t)?;
    if order > 6 {
        return Err(domain(format!("cumulant order must be 0..=6, got {order}")));
    }
    Ok(cumulant_ladder(beta, t)[order])
}

// With D(t) = 1 + a cosh t and a = 2 exp(-beta), returns
// (a sinh t / D, a cosh t / D), evaluated without overflow.
#[inline]
fn tilt_ratios(beta: f64, t: f64) -> (f64, f64) {
    let a = 2.0 * (-beta).exp();
    let e = (-t.abs()).exp();
    let half = 0.5 * a;
    let den = e + half * (1.0 + e * e);
    let h = half * (1.0 + e * e) / den;
    let s = half * (1.0 - e * e) / den;
    (s.copysign(t), h)
}

#[inline]
pub(crate) fn c0(beta: f64, t: f64) -> f64 {
    let a = 2.0 * (-beta).exp();
    let at = t.abs();
    if at < 1.0 {
        let sh = (0.5 * t).sinh();
        (a * 2.0 * sh * sh / (1.0 + a)).ln_1p()
    } else {
        let e = (-at).exp();
        at + (e + 0.5 * a * (1.0 + e * e)).ln() - a.ln_1p()
    }
}

#[inline]
pub(crate) fn c1(beta: f64, t: f64) -> f64 {
    tilt_ratios(beta, t).0
}

#[inline]
pub(crate) fn c2(beta: f64, t: f64) -> f64 {
    let (s, h) = tilt_ratios(beta, t);
    h - s * s
}

/// All derivatives of `c_beta` through order 6.
///
/// The derivatives of `log D` follow from the moment-to-cumulant recursion
/// `k_n = m_n - sum_{j=1}^{n-1} C(n-1, j-1) k_j m_{n-j}` with
/// `m_n = D^{(n)} / D`, which is `a sinh t / D` for odd `n` and
/// `a cosh t / D` for even `n`.
pub(crate) fn cumulant_ladder(beta: f64, t: f64) -> [f64; 7] {
    const BINOM: [[f64; 6]; 6] = [
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0, 0.0],
        [1.0, 5.0, 10.0, 10.0, 5.0, 1.0],
    ];
    let (s, h) = tilt_ratios(beta, t);
    let m = |n: usize| if n % 2 == 1 { s } else { h };
    let mut k = [0.0; 7];
    k[0] = c0(beta, t);
    for n in 1..=6 {
        let mut v = m(n);
        for j in 1..n {
            v -= BINOM[n - 1][j - 1] * k[j] * m(n - j);
        }
        k[n] = v;
    }
    k
}

/// The tilted single-site measure `rho_beta = (e^-beta, 1, e^-beta) / (1 + 2 e^-beta)`.
pub fn rho_beta(beta: f64) -> Result<Macrostate> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(domain(format!("beta must be finite and >= 0, got {beta}")));
    }
    let e = (-beta).exp();
    let z = 1.0 + 2.0 * e;
    Ok(Macrostate::from_masses(e / z, 1.0 / z, e / z))
}

/// Energy functional `f_K(mu) = quad(mu) - K mean(mu)^2`.
pub fn f_k(mu: &Macrostate, k: f64) -> f64 {
    let m = mu.mean();
    mu.quad() - k * m * m
}

/// Relative entropy `sum_i mu_i log(mu_i / base_i)` with `0 log 0 = 0`.
/// `base` must have strictly positive masses.
pub fn rel_entropy(mu: &Macrostate, base: &Macrostate) -> f64 {
    mu.masses()
        .iter()
        .zip(base.masses())
        .map(|(&m, b)| {
            debug_assert!(b > 0.0, "base measure must be strictly positive");
            xlogx(m) - m * b.ln()
        })
        .sum()
}

/// Solves `c'_beta(t) = z` for `|z| < 1`; this is `J'_beta(z)`.
pub fn cramer_j_prime(beta: f64, z: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(domain(format!("beta must be finite and > 0, got {beta}")));
    }
    if !(z.abs() < 1.0) {
        return Err(domain(format!(
            "J' is finite only on the open interval (-1, 1), got z = {z}"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let bound = beta + ((1.0 + z.abs()) / (1.0 - z.abs())).ln() + 10.0;
    bisect_newton(
        |t| {
            let (s, h) = tilt_ratios(beta, t);
            (s - z, h - s * s)
        },
        -bound,
        bound,
        1e-13,
    )
}

/// Cramér rate function `J_beta(z) = sup_t { t z - c_beta(t) }` on `[-1, 1]`.
pub fn cramer_j(beta: f64, z: f64) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(domain(format!("beta must be finite and > 0, got {beta}")));
    }
    if !z.is_finite() || z.abs() > 1.0 {
        return Err(domain(format!("J is defined on [-1, 1], got z = {z}")));
    }
    if z.abs() == 1.0 {
        return Ok(beta + (2.0 * (-beta).exp()).ln_1p());
    }
    let t = cramer_j_prime(beta, z)?;
    Ok(t * z - c0(beta, t))
}

/// Canonical rate function `R(mu | rho) + beta f_K(mu) - phi_K(beta)`.
pub fn canonical_rate(mu: &Macrostate, params: &CanonicalParams) -> Result<f64> {
    let phi = crate::canonical::canonical_free_energy(params)?;
    Ok(rel_entropy(mu, &Macrostate::uniform()) + params.beta * f_k(mu, params.k) - phi)
}

/// Microcanonical rate function: `R(mu | rho) + s_K(u)` on the constraint
/// set `|f_K(mu) - u| <= tol`, `+inf` elsewhere.
pub fn micro_rate(mu: &Macrostate, params: &MicroParams, tol: f64) -> Result<f64> {
    if (f_k(mu, params.k) - params.u).abs() > tol {
        return Ok(f64::INFINITY);
    }
    let s = crate::micro::micro_entropy(params)?;
    Ok(rel_entropy(mu, &Macrostate::uniform()) + s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_next(beta: f64, t: f64, order: usize, h: f64) -> f64 {
        let lower = |x: f64| cumulant_ladder(beta, x)[order - 1];
        (lower(t + h) - lower(t - h)) / (2.0 * h)
    }

    #[test]
    fn cumulant_basic_values() {
        assert_eq!(cumulant(1.0, 0.0, 0).unwrap(), 0.0);
        assert_eq!(cumulant(1.0, 0.0, 1).unwrap(), 0.0);
        let v = cumulant(BETA_C, 0.0, 2).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        let fd = fd_next(BETA_C, 0.0, 2, 1e-4);
        assert!((fd - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn third_derivative_negative_below_critical_beta() {
        let v = cumulant(1.0, 0.7, 3).unwrap();
        assert!(v < 0.0);
        assert!(fd_next(1.0, 0.7, 3, 1e-4) < 0.0);
    }

    #[test]
    fn third_derivative_matches_closed_form() {
        for &(beta, w) in &[(0.5f64, 0.3f64), (1.0, 0.7), (2.0, 1.5), (3.0, -2.2)] {
            let e = (-beta).exp();
            let d = 1.0 + 2.0 * e * f64::cosh(w);
            let closed = 2.0 * e * w.sinh() * (1.0 - 2.0 * e * w.cosh() - 8.0 * e * e) / d.powi(3);
            let v = cumulant(beta, w, 3).unwrap();
            assert!((v - closed).abs() < 1e-14, "{beta} {w}: {v} vs {closed}");
        }
    }

    #[test]
    fn fourth_derivative_at_zero_closed_form() {
        // (1 + 2e^-b)^4 in the denominator after cancelling one factor of
        // (1 + 2e^-b) against the numerator.
        for &beta in &[0.3, 1.0, BETA_C, 2.5] {
            let e = (-beta).exp();
            let closed = 2.0 * e * (1.0 + 2.0 * e) * (1.0 - 2.0 * e - 8.0 * e * e)
                / (1.0 + 2.0 * e).powi(4);
            let v = cumulant(beta, 0.0, 4).unwrap();
            assert!((v - closed).abs() < 1e-14);
        }
    }

    #[test]
    fn cumulant_rejects_bad_input() {
        assert!(cumulant(f64::NAN, 0.0, 0).is_err());
        assert!(cumulant(1.0, f64::INFINITY, 0).is_err());
        assert!(cumulant(-1.0, 0.0, 0).is_err());
        assert!(cumulant(1.0, 0.0, 7).is_err());
    }

    #[test]
    fn c0_is_stable_for_large_arguments() {
        let v = c0(1.0, 800.0);
        assert!(v.is_finite());
        assert!((v - (800.0 - 1.0 - (2.0 * (-1.0f64).exp()).ln_1p())).abs() < 1e-9);
    }

    #[test]
    fn rho_beta_values() {
        let r = rho_beta(BETA_C).unwrap();
        assert!(r.approx_eq(&Macrostate::new(1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0).unwrap(), 1e-15));
        assert!(rho_beta(0.0).unwrap().approx_eq(&Macrostate::uniform(), 1e-15));
        assert_eq!(rho_beta(2.7).unwrap().mean(), 0.0);
    }

    #[test]
    fn energy_functional_examples() {
        assert!((f_k(&Macrostate::uniform(), 3.7) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f_k(&Macrostate::point_mass(1), 2.0), -1.0);
        let m = Macrostate::new(0.25, 0.5, 0.25).unwrap();
        assert!((f_k(&m, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn relative_entropy_examples() {
        let r = rho_beta(1.0).unwrap();
        assert_eq!(rel_entropy(&r, &r), 0.0);
        let v = rel_entropy(&Macrostate::point_mass(1), &r);
        assert!((v - (1.0 + (2.0 * (-1.0f64).exp()).ln_1p())).abs() < 1e-14);
        let half = Macrostate::new(0.5, 0.0, 0.5).unwrap();
        assert!((rel_entropy(&half, &Macrostate::uniform()) - 1.5f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn cramer_examples() {
        assert_eq!(cramer_j(0.8, 0.0).unwrap(), 0.0);
        let j1 = cramer_j(1.0, 1.0).unwrap();
        let r = rho_beta(1.0).unwrap();
        assert!((j1 - rel_entropy(&Macrostate::point_mass(1), &r)).abs() < 1e-14);
        assert!((cramer_j(1.0, -1.0).unwrap() - j1).abs() < 1e-15);
        assert!(cramer_j(1.0, 1.0 + 1e-9).is_err());
        // J approaches its endpoint value continuously.
        let near = cramer_j(1.0, 1.0 - 1e-12).unwrap();
        assert!((near - j1).abs() < 1e-9);
    }

    #[test]
    fn macrostate_validation() {
        assert!(Macrostate::new(0.5, 0.5, 0.1).is_err());
        assert!(Macrostate::new(-0.1, 0.6, 0.5).is_err());
        let m = Macrostate::new(0.2, 0.3, 0.5).unwrap();
        assert!((m.mean() - 0.3).abs() < 1e-15);
        assert!((m.quad() - 0.7).abs() < 1e-15);
        assert_eq!(m.mirrored().nu_plus, 0.2);
    }

    #[test]
    fn micro_params_respect_domain() {
        assert!(MicroParams::new(1.0, 0.5).is_ok());
        assert!(MicroParams::new(-1.0, 2.0).is_ok());
        assert!(MicroParams::new(-1.1, 2.0).is_err());
        assert!(MicroParams::new(-0.1, 0.9).is_err());
        assert!(MicroParams::new(1.01, 0.9).is_err());
    }
}
