//! Finite-n distribution of the total spin under the canonical ensemble and
//! diagnostics for its scaling limits.
//!
//! The law of `S_n` is computed exactly: for each total spin `k`, the
//! multinomial weights of all occupation numbers `(n+, n0, n-)` with
//! `n+ - n- = k` are accumulated in log space. Convergence toward the limit
//! laws is measured by Kolmogorov-Smirnov distances along a ladder of sizes.

use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::canonical::{big_g_derivative, solve_canonical};
use crate::error::{domain, BegError, Result};
use crate::model::{c2, CanonicalParams};
use crate::numerics::{adaptive_simpson, LogSumExp};

/// Largest system size accepted by [`exact_spin_pmf`].
pub const MAX_N: usize = 20_000;

/// Even derivatives below this magnitude count as vanishing.
pub const TYPE_TOL: f64 = 1e-10;

/// Exact probability mass function of the total spin `S_n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpinPmf {
    pub n: usize,
    pub params: CanonicalParams,
    /// Unnormalized log masses, indexed by `k + n` for `k` in `-n..=n`.
    pub log_weights: Vec<f64>,
    /// Normalized masses, same indexing.
    pub probabilities: Vec<f64>,
    log_total: f64,
}

impl SpinPmf {
    pub fn spins(&self) -> impl Iterator<Item = i64> + '_ {
        let n = self.n as i64;
        -n..=n
    }

    pub fn mass(&self, k: i64) -> f64 {
        let idx = k + self.n as i64;
        if idx < 0 || idx as usize >= self.probabilities.len() {
            0.0
        } else {
            self.probabilities[idx as usize]
        }
    }

    /// `log Z_n(beta, K)` with the uniform product measure as reference.
    pub fn log_partition(&self) -> f64 {
        self.log_total - self.n as f64 * 3f64.ln()
    }

    pub fn mean(&self) -> f64 {
        self.spins()
            .zip(&self.probabilities)
            .map(|(k, p)| k as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.spins()
            .zip(&self.probabilities)
            .map(|(k, p)| (k as f64 - m).powi(2) * p)
            .sum()
    }

    /// `n Var(S_n / n)`.
    pub fn scaled_variance(&self) -> f64 {
        self.variance() / self.n as f64
    }

    /// `P{|S_n / n| > eps}`.
    pub fn tail_mass(&self, eps: f64) -> f64 {
        let n = self.n as f64;
        self.spins()
            .zip(&self.probabilities)
            .filter(|(k, _)| (*k as f64 / n).abs() > eps)
            .map(|(_, p)| p)
            .sum()
    }

    /// `P{S_n / n in [lo, hi]}`.
    pub fn window_mass(&self, lo: f64, hi: f64) -> f64 {
        self.window(lo, hi).map(|(_, p)| p).sum()
    }

    fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = (i64, f64)> + '_ {
        let n = self.n as f64;
        let eps = 1e-12;
        self.spins()
            .zip(self.probabilities.iter().copied())
            .filter(move |(k, _)| {
                let x = *k as f64 / n;
                x >= lo - eps && x <= hi + eps
            })
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// Exact law of `S_n` under `P_{n,beta,K}`.
pub fn exact_spin_pmf(n: usize, params: &CanonicalParams) -> Result<SpinPmf> {
    if n == 0 || n > MAX_N {
        return Err(domain(format!("n must lie in 1..={MAX_N}, got {n}")));
    }
    let lf = ln_factorials(n);
    let (beta, coupling) = (params.beta, params.k);
    let ni = n as i64;
    let log_weights: Vec<f64> = (-ni..=ni)
        .into_par_iter()
        .map(|k| {
            let mut acc = LogSumExp::default();
            let lo = k.max(0);
            let hi = (ni + k) / 2;
            for plus in lo..=hi {
                let minus = plus - k;
                let zero = ni - plus - minus;
                let lw = lf[n] - lf[plus as usize] - lf[minus as usize] - lf[zero as usize]
                    - beta * (plus + minus) as f64;
                acc.push(lw);
            }
            acc.value() + beta * coupling * (k * k) as f64 / n as f64
        })
        .collect();
    let mut total = LogSumExp::default();
    log_weights.iter().for_each(|&w| total.push(w));
    let log_total = total.value();
    let probabilities = log_weights.iter().map(|w| (w - log_total).exp()).collect();
    Ok(SpinPmf {
        n,
        params: *params,
        log_weights,
        probabilities,
        log_total,
    })
}

/// Type of a global minimizer of `G_{beta,K}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypeReport {
    pub z: f64,
    pub r: u8,
    /// `G''`, `G''''` and `G^{(6)}` at `z`.
    pub derivative_values: [f64; 3],
    /// Asymptotic variance of the scaled fluctuations, set iff `r = 1`.
    pub sigma2: Option<f64>,
}

impl TypeReport {
    /// Exponent `1 - 1/(2r)` of the fluctuation scaling `S_n / n^{1 - 1/(2r)}`.
    pub fn scaling_exponent(&self) -> f64 {
        1.0 - 1.0 / (2.0 * self.r as f64)
    }
}

/// Classifies a minimizer by the first even derivative of `G_{beta,K}` that
/// is positive.
pub fn classify_type(params: &CanonicalParams, z: f64) -> Result<TypeReport> {
    let g2 = big_g_derivative(params, z, 2)?;
    let g4 = big_g_derivative(params, z, 4)?;
    let g6 = big_g_derivative(params, z, 6)?;
    let r = if g2 > TYPE_TOL {
        1
    } else if g2.abs() < TYPE_TOL && g4 > TYPE_TOL {
        2
    } else if g2.abs() < TYPE_TOL && g4.abs() < TYPE_TOL && g6 > TYPE_TOL {
        3
    } else {
        return Err(BegError::Classification { z });
    };
    let sigma2 = (r == 1).then(|| asymptotic_variance(params, z, g2));
    Ok(TypeReport {
        z,
        r,
        derivative_values: [g2, g4, g6],
        sigma2,
    })
}

fn asymptotic_variance(params: &CanonicalParams, z: f64, g2: f64) -> f64 {
    let s = params.tilt_scale();
    s * c2(params.beta, s * z) / g2
}

/// Limit law of the scaled total spin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LimitDensity {
    Normal { variance: f64 },
    /// Density proportional to `exp(-coefficient * x^power)`.
    Power { power: u32, coefficient: f64, norm: f64 },
}

const NORM_QUAD_TOL: f64 = 1e-14;

impl LimitDensity {
    pub fn normal(variance: f64) -> Self {
        LimitDensity::Normal { variance }
    }

    /// Density proportional to `exp(-coefficient * x^power)`, normalized by
    /// quadrature.
    pub fn power(power: u32, coefficient: f64) -> Self {
        let cut = Self::power_cutoff(power, coefficient);
        let half = adaptive_simpson(
            &|x: f64| (-coefficient * x.powi(power as i32)).exp(),
            0.0,
            cut,
            NORM_QUAD_TOL,
        );
        LimitDensity::Power {
            power,
            coefficient,
            norm: 2.0 * half,
        }
    }

    // Beyond this point the unnormalized density is below e^-40.
    fn power_cutoff(power: u32, coefficient: f64) -> f64 {
        (40.0 / coefficient).powf(1.0 / power as f64)
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            LimitDensity::Normal { variance } => {
                (-0.5 * x * x / variance).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
            }
            LimitDensity::Power {
                power,
                coefficient,
                norm,
            } => (-coefficient * x.powi(power as i32)).exp() / norm,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LimitDensity::Normal { variance } => {
                0.5 * erfc(-x / (2.0 * variance).sqrt())
            }
            LimitDensity::Power {
                power, coefficient, ..
            } => {
                let cut = Self::power_cutoff(power, coefficient);
                let ax = x.abs().min(cut);
                let half = adaptive_simpson(&|y: f64| self.pdf(y), 0.0, ax, 1e-14);
                if x >= 0.0 {
                    0.5 + half
                } else {
                    0.5 - half
                }
            }
        }
    }
}

/// Limit density for a minimizer of type `r`: normal with variance
/// `sigma2` for `r = 1`, `exp(-G^{(2r)} x^{2r} / (2r)!)` otherwise.
pub fn limit_density(report: &TypeReport) -> Result<LimitDensity> {
    match report.r {
        1 => Ok(LimitDensity::normal(report.sigma2.ok_or_else(|| {
            domain("type-1 report without asymptotic variance")
        })?)),
        2 => Ok(LimitDensity::power(4, report.derivative_values[1] / 24.0)),
        3 => Ok(LimitDensity::power(6, report.derivative_values[2] / 720.0)),
        r => Err(domain(format!("minimum-point type must be 1, 2 or 3, got {r}"))),
    }
}

/// Kolmogorov-Smirnov distance between the law of `(S_n - shift) / scale`
/// restricted to `atoms`, and a continuous limit CDF. The limit CDF is
/// evaluated half a lattice spacing to the right of each atom.
fn lattice_ks<I>(atoms: I, scale: f64, shift: f64, limit: &LimitDensity) -> f64
where
    I: Iterator<Item = (i64, f64)>,
{
    let half = 0.5 / scale;
    let mut cum = 0.0;
    let mut ks: f64 = 0.0;
    for (k, p) in atoms {
        cum += p;
        let x = (k as f64 - shift) / scale;
        ks = ks.max((cum - limit.cdf(x + half)).abs());
    }
    ks
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsPoint {
    pub n: usize,
    pub ks: f64,
}

/// KS distances between the exact law of `S_n / n^{1 - 1/(2r)}` and the
/// limit law in the unique-minimizer regime, for each `n` in the ladder.
pub fn convergence_diagnostic(
    ns: &[usize],
    params: &CanonicalParams,
    report: &TypeReport,
) -> Result<Vec<KsPoint>> {
    let limit = limit_density(report)?;
    let gamma = report.scaling_exponent();
    ns.iter()
        .map(|&n| {
            let pmf = exact_spin_pmf(n, params)?;
            let scale = (n as f64).powf(gamma);
            let atoms = pmf.spins().zip(pmf.probabilities.iter().copied());
            Ok(KsPoint {
                n,
                ks: lattice_ks(atoms, scale, 0.0, &limit),
            })
        })
        .collect()
}

/// Weights `b_j = sigma^2(z_j) / sum_l sigma^2(z_l)` over the minimizers.
pub fn phase_weights(params: &CanonicalParams, z_points: &[f64]) -> Result<Vec<f64>> {
    let sig = z_points
        .iter()
        .map(|&z| {
            classify_type(params, z)?
                .sigma2
                .ok_or_else(|| domain(format!("minimizer {z} is not of type 1")))
        })
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = sig.iter().sum();
    Ok(sig.iter().map(|s| s / total).collect())
}

/// Default half-width of the conditioning window around `z_j`.
pub fn default_window(z_tilde: f64) -> f64 {
    0.1f64.min(0.5 * z_tilde)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseSplitPoint {
    pub n: usize,
    pub z_points: Vec<f64>,
    pub weights: Vec<f64>,
    /// `P{S_n/n in [z_j - a, z_j + a]}` per minimizer.
    pub window_masses: Vec<f64>,
    /// Total variation distance between the binned law of `S_n/n` and
    /// `sum_j b_j delta_{z_j}`; mass outside every window counts in full.
    pub tv: f64,
}

/// Law-of-large-numbers diagnostic in the multiple-minimizer regime.
pub fn phase_split_diagnostic(
    ns: &[usize],
    params: &CanonicalParams,
    a: f64,
) -> Result<Vec<PhaseSplitPoint>> {
    let sol = solve_canonical(params)?;
    if sol.z_points.len() < 2 {
        return Err(domain(format!(
            "beta = {}, K = {} has a unique minimizer",
            params.beta, params.k
        )));
    }
    let weights = phase_weights(params, &sol.z_points)?;
    ns.iter()
        .map(|&n| {
            let pmf = exact_spin_pmf(n, params)?;
            let window_masses: Vec<f64> = sol
                .z_points
                .iter()
                .map(|&z| pmf.window_mass(z - a, z + a))
                .collect();
            let inside: f64 = window_masses.iter().sum();
            let tv = 0.5
                * (window_masses
                    .iter()
                    .zip(&weights)
                    .map(|(m, b)| (m - b).abs())
                    .sum::<f64>()
                    + (1.0 - inside).max(0.0));
            Ok(PhaseSplitPoint {
                n,
                z_points: sol.z_points.clone(),
                weights: weights.clone(),
                window_masses,
                tv,
            })
        })
        .collect()
}

/// Which minimizer to condition on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Minus,
    Zero,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionedClt {
    pub n: usize,
    pub z_j: f64,
    pub a: f64,
    pub sigma2: f64,
    pub window_mass: f64,
    /// Conditional mean of `(S_n - n z_j) / sqrt(n)`.
    pub centered_mean: f64,
    pub ks: f64,
}

/// KS distance between the law of `(S_n - n z_j)/sqrt(n)` conditioned on
/// `S_n/n in [z_j - a, z_j + a]` and the normal law with variance
/// `sigma^2(beta, K, z_j)`.
pub fn conditioned_clt_check(
    n: usize,
    params: &CanonicalParams,
    branch: Branch,
    a: f64,
) -> Result<ConditionedClt> {
    let sol = solve_canonical(params)?;
    let z_j = match branch {
        Branch::Minus => sol.z_points.first().copied().filter(|z| *z < 0.0),
        Branch::Plus => sol.z_points.last().copied().filter(|z| *z > 0.0),
        Branch::Zero => sol.z_points.iter().copied().find(|z| *z == 0.0),
    }
    .ok_or_else(|| domain(format!("no minimizer on the {branch:?} branch")))?;
    let sigma2 = classify_type(params, z_j)?
        .sigma2
        .ok_or_else(|| domain(format!("minimizer {z_j} is not of type 1")))?;
    let pmf = exact_spin_pmf(n, params)?;
    let (lo, hi) = (z_j - a, z_j + a);
    let mass = pmf.window_mass(lo, hi);
    if !(mass > 0.0) {
        return Err(BegError::EmptyWindow { lo, hi });
    }
    let scale = (n as f64).sqrt();
    let shift = n as f64 * z_j;
    let centered_mean = pmf
        .window(lo, hi)
        .map(|(k, p)| (k as f64 - shift) / scale * p / mass)
        .sum();
    let atoms = pmf.window(lo, hi).map(|(k, p)| (k, p / mass));
    let ks = lattice_ks(atoms, scale, shift, &LimitDensity::normal(sigma2));
    Ok(ConditionedClt {
        n,
        z_j,
        a,
        sigma2,
        window_mass: mass,
        centered_mean,
        ks,
    })
}
