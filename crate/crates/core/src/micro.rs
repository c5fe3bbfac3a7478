//! Microcanonical ensemble.
//!
//! Macrostates with `f_K(nu) = u` and mean `z` are parameterized by
//! `q = u + K z^2`: `nu = ((q - z)/2, 1 - q, (q + z)/2)`. Minimizing the
//! relative entropy over the constraint set reduces to minimizing
//! `R_{u,K}(z) = phi_{u,K}(z) - q log 2 + log 3` over the admissible set
//! `{z : |z| <= q <= 1}`, where
//! `phi_{u,K}(z) = (q+z)/2 log(q+z) + (q-z)/2 log(q-z) + (1-q) log(1-q)`.

use serde::Serialize;

use crate::canonical::PhaseLabel;
use crate::error::{domain, BegError, Result};
use crate::model::{Macrostate, MicroParams};
use crate::numerics::{bisect, golden_section, xlogx};

/// Grid step of the global scan over `|z|`.
pub const SCAN_STEP: f64 = 1e-4;

/// Golden-section refinement width.
pub const REFINE_WIDTH: f64 = 1e-12;

/// Minimum values closer than this are reported as ties.
pub const TIE_TOL: f64 = 1e-12;

/// Grid step and boundary margin of the convexity indicator.
pub const CONVEXITY_STEP: f64 = 1e-3;
pub const CONVEXITY_MARGIN: f64 = 1e-6;

const DOMAIN_TOL: f64 = 1e-12;

/// Admissible magnetizations, stored as closed intervals of `|z|`. The set
/// itself is the union of each piece and its mirror image.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibleDomain {
    pub pieces: Vec<(f64, f64)>,
}

impl AdmissibleDomain {
    pub fn contains(&self, z: f64) -> bool {
        let t = z.abs();
        self.pieces
            .iter()
            .any(|&(lo, hi)| t >= lo - DOMAIN_TOL && t <= hi + DOMAIN_TOL)
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Upper end of the piece that contains `z = 0`.
    pub fn zero_piece_end(&self) -> Option<f64> {
        self.pieces.iter().find(|p| p.0 == 0.0).map(|p| p.1)
    }

    /// Symmetric intervals in `z`, negative side first.
    pub fn intervals(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for &(lo, hi) in self.pieces.iter().rev() {
            if lo == 0.0 {
                out.push((-hi, hi));
            } else {
                out.push((-hi, -lo));
            }
        }
        for &(lo, hi) in &self.pieces {
            if lo > 0.0 {
                out.push((lo, hi));
            }
        }
        out
    }
}

/// Solves `|z| <= u + K z^2 <= 1`.
pub fn admissible_domain(params: &MicroParams) -> Result<AdmissibleDomain> {
    let (u, k) = (params.u, params.k);
    let top = ((1.0 - u).max(0.0) / k).sqrt();
    let disc = 1.0 - 4.0 * k * u;
    let mut pieces = Vec::new();
    if disc < 0.0 {
        pieces.push((0.0, top));
    } else {
        let sq = disc.sqrt();
        // Roots of K t^2 - t + u, the small one in cancellation-free form.
        let r_small = 2.0 * u / (1.0 + sq);
        let r_large = (1.0 + sq) / (2.0 * k);
        if u >= 0.0 {
            pieces.push((0.0, r_small.min(top)));
        }
        if r_large <= top + DOMAIN_TOL {
            pieces.push((r_large.min(top), top));
        }
    }
    if pieces.is_empty() {
        return Err(domain(format!(
            "no admissible magnetization for u = {u}, K = {k}"
        )));
    }
    Ok(AdmissibleDomain { pieces })
}

fn r_raw(u: f64, k: f64, z: f64) -> f64 {
    let q = u + k * z * z;
    0.5 * xlogx((q + z).max(0.0)) + 0.5 * xlogx((q - z).max(0.0)) + xlogx((1.0 - q).max(0.0))
        - q * std::f64::consts::LN_2
        + 3f64.ln()
}

// (R', R'') for the Newton polish; only used away from the boundary.
fn r_slope_curvature(u: f64, k: f64, z: f64) -> (f64, f64) {
    let q = u + k * z * z;
    let (a, b, c) = (q + z, q - z, 1.0 - q);
    let (da, db, dc) = (2.0 * k * z + 1.0, 2.0 * k * z - 1.0, -2.0 * k * z);
    let dd = 2.0 * k;
    let ln2 = std::f64::consts::LN_2;
    let d1 = 0.5 * (a.ln() + 1.0) * da + 0.5 * (b.ln() + 1.0) * db + (c.ln() + 1.0) * dc
        - 2.0 * k * z * ln2;
    let d2 = 0.5 * (da * da / a + (a.ln() + 1.0) * dd)
        + 0.5 * (db * db / b + (b.ln() + 1.0) * dd)
        + (dc * dc / c - (c.ln() + 1.0) * dd)
        - 2.0 * k * ln2;
    (d1, d2)
}

/// `R_{u,K}(z)`, the relative entropy of the lifted macrostate.
pub fn r_u_k(params: &MicroParams, z: f64) -> Result<f64> {
    let dom = admissible_domain(params)?;
    if !z.is_finite() || !dom.contains(z) {
        return Err(domain(format!(
            "z = {z} is not admissible for u = {}, K = {}",
            params.u, params.k
        )));
    }
    Ok(r_raw(params.u, params.k, z))
}

/// `phi_{u,K}(z)`.
pub fn phi_u_k(params: &MicroParams, z: f64) -> f64 {
    let q = params.u + params.k * z * z;
    0.5 * xlogx(q + z) + 0.5 * xlogx(q - z) + xlogx(1.0 - q)
}

/// Third derivative of `phi_{u,K}` on the interior of the admissible set.
pub fn phi_third_derivative(params: &MicroParams, z: f64) -> f64 {
    let k = params.k;
    let q = params.u + k * z * z;
    let (a, b, c) = (q + z, q - z, 1.0 - q);
    let (da, db, dc) = (2.0 * k * z + 1.0, 2.0 * k * z - 1.0, -2.0 * k * z);
    // d^3/dz^3 [x log x] = 3 x' x'' / x - x'^3 / x^2 when x''' = 0.
    let term = |x: f64, dx: f64, ddx: f64| 3.0 * dx * ddx / x - dx * dx * dx / (x * x);
    0.5 * term(a, da, 2.0 * k) + 0.5 * term(b, db, 2.0 * k) + term(c, dc, -2.0 * k)
}

/// Macrostate with mean `z` on the energy shell `u`.
pub fn lift_micro(params: &MicroParams, z: f64) -> Macrostate {
    let q = (params.u + params.k * z * z).clamp(0.0, 1.0);
    Macrostate::from_masses(0.5 * (q - z), 1.0 - q, 0.5 * (q + z))
}

/// Global minimizers of `R_{u,K}` and their lifted macrostates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MicroSolution {
    pub params: MicroParams,
    /// Sorted ascending.
    pub z_points: Vec<f64>,
    pub macrostates: Vec<Macrostate>,
    /// `s_K(u) = -min R_{u,K}`, never positive.
    pub entropy: f64,
    pub min_value: f64,
    pub phase_label: PhaseLabel,
    /// Set when distinct minimizers were merged by the tie tolerance
    /// rather than being exactly equal.
    pub near_tie: bool,
}

impl MicroSolution {
    pub fn order_parameter(&self) -> f64 {
        self.z_points.iter().fold(0.0, |m, z| m.max(z.abs()))
    }

    pub fn z_tilde(&self) -> Option<f64> {
        self.z_points.iter().copied().find(|z| *z > 0.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    t: f64,
    value: f64,
}

// Local minima of t -> R(t) on the nonnegative pieces, each refined by
// golden section and, in the interior, a Newton polish.
fn local_minima(params: &MicroParams, dom: &AdmissibleDomain) -> Vec<Candidate> {
    let (u, k) = (params.u, params.k);
    let f = |t: f64| r_raw(u, k, t);
    let mut out = Vec::new();
    for &(lo, hi) in &dom.pieces {
        if hi - lo <= REFINE_WIDTH {
            out.push(Candidate { t: lo, value: f(lo) });
            continue;
        }
        let n = ((hi - lo) / SCAN_STEP).ceil() as usize;
        let grid: Vec<f64> = (0..=n)
            .map(|i| if i == n { hi } else { lo + i as f64 * SCAN_STEP })
            .collect();
        let vals: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
        for i in 0..=n {
            let left_ok = i == 0 || vals[i] <= vals[i - 1];
            let right_ok = i == n || vals[i] < vals[i + 1];
            if !(left_ok && right_ok) {
                continue;
            }
            if i == 0 && lo == 0.0 {
                // t = 0 is a stationary point by symmetry.
                out.push(Candidate { t: 0.0, value: vals[0] });
                continue;
            }
            let a = grid[i.saturating_sub(1)];
            let b = grid[(i + 1).min(n)];
            let (mut t, mut v) = golden_section(f, a, b, REFINE_WIDTH);
            if t > lo && t < hi {
                for _ in 0..3 {
                    let (d1, d2) = r_slope_curvature(u, k, t);
                    if !(d2 > 0.0) || d1 == 0.0 {
                        break;
                    }
                    let next = t - d1 / d2;
                    if !(next > a && next < b) {
                        break;
                    }
                    let vn = f(next);
                    if vn > v {
                        break;
                    }
                    t = next;
                    v = vn;
                }
            }
            out.push(Candidate { t, value: v });
        }
    }
    out
}

pub fn solve_micro(params: &MicroParams) -> Result<MicroSolution> {
    let dom = admissible_domain(params)?;
    let cands = local_minima(params, &dom);
    let best = cands
        .iter()
        .map(|c| c.value)
        .fold(f64::INFINITY, f64::min);
    let mut kept: Vec<Candidate> = cands
        .into_iter()
        .filter(|c| c.value - best <= TIE_TOL)
        .collect();
    kept.sort_by(|a, b| a.t.total_cmp(&b.t));
    kept.dedup_by(|a, b| (a.t - b.t).abs() < 1e-7);
    let near_tie = kept.len() > 1 && kept.iter().any(|c| c.value != best);

    let mut z_points = Vec::new();
    for c in &kept {
        if c.t == 0.0 {
            z_points.push(0.0);
        } else {
            z_points.push(-c.t);
            z_points.push(c.t);
        }
    }
    z_points.sort_by(f64::total_cmp);
    if z_points.len() > 3 {
        return Err(BegError::TooManyMinima {
            count: z_points.len(),
        });
    }
    let macrostates = z_points.iter().map(|&z| lift_micro(params, z)).collect();
    Ok(MicroSolution {
        params: *params,
        phase_label: PhaseLabel::from_count(z_points.len()),
        z_points,
        macrostates,
        entropy: -best,
        min_value: best,
        near_tie,
    })
}

/// Microcanonical entropy `s_K(u) = -inf { R(mu | rho) : f_K(mu) = u }`.
pub fn micro_entropy(params: &MicroParams) -> Result<f64> {
    Ok(solve_micro(params)?.entropy)
}

/// Second-order critical coupling `1 / (2 u log(2 (1 - u) / u))`, defined
/// for `0 < u < 2/3`.
pub fn kc2_of_u(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 2.0 / 3.0) {
        return Err(domain(format!(
            "K_c^(2)(u) needs 0 < u < 2/3, got u = {u}: the second-order relation \
             R''(0) = 0 degenerates because log(2(1-u)/u) <= 0"
        )));
    }
    Ok(1.0 / (2.0 * u * (2.0 * (1.0 - u) / u).ln()))
}

/// Minimum of `phi'''_{u,K}` over the positive part of the admissible
/// interval containing 0 (grid step [`CONVEXITY_STEP`], boundary margin
/// [`CONVEXITY_MARGIN`]). `+inf` when the grid is empty.
pub fn convexity_indicator(params: &MicroParams) -> Result<f64> {
    let dom = admissible_domain(params)?;
    let Some(end) = dom.zero_piece_end() else {
        return Ok(f64::INFINITY);
    };
    let end = end - CONVEXITY_MARGIN;
    let mut min = f64::INFINITY;
    let mut i = 1;
    loop {
        let z = i as f64 * CONVEXITY_STEP;
        if z >= end {
            break;
        }
        min = min.min(phi_third_derivative(params, z));
        i += 1;
    }
    Ok(min)
}

fn convex_at(u: f64, k: f64) -> Result<bool> {
    Ok(convexity_indicator(&MicroParams::new(u, k)?)? >= 0.0)
}

const CURVE_K_MIN: f64 = 1e-3;
const CURVE_K_MAX: f64 = 1e3;
const CURVE_SCAN_POINTS: usize = 600;

/// Threshold `C(u)`: the smallest K above which `phi'_{u,K}` is convex on
/// its positive domain for every larger K.
///
/// The indicator fails on a bounded K-window, so the curve is the upper
/// edge of that window: located on a log-spaced scan of `(1e-3, 1e3)` and
/// then bisected.
pub fn convexity_curve_c(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(domain(format!("C(u) is searched for 0 < u < 1, got {u}")));
    }
    let ratio = (CURVE_K_MAX / CURVE_K_MIN).ln() / (CURVE_SCAN_POINTS - 1) as f64;
    let ks: Vec<f64> = (0..CURVE_SCAN_POINTS)
        .map(|i| CURVE_K_MIN * (ratio * i as f64).exp())
        .collect();
    let mut last_fail = None;
    for (i, &k) in ks.iter().enumerate() {
        if !convex_at(u, k)? {
            last_fail = Some(i);
        }
    }
    let Some(i) = last_fail else {
        return Err(BegError::CurveUndefined { u });
    };
    if i + 1 == ks.len() {
        return Err(BegError::CurveUndefined { u });
    }
    let (mut lo, mut hi) = (ks[i], ks[i + 1]);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if convex_at(u, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Intersection of `C(u)` with `K_c^{(2)}(u)`: returns `(u_tri, K_tri)`.
pub fn micro_tricritical() -> Result<(f64, f64)> {
    let gap = |u: f64| -> Result<f64> { Ok(convexity_curve_c(u)? - kc2_of_u(u)?) };
    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for i in 0..=150 {
        let u = 0.25 + 0.001 * i as f64;
        let g = match gap(u) {
            Ok(g) => g,
            Err(BegError::CurveUndefined { .. }) => {
                prev = None;
                continue;
            }
            Err(e) => return Err(e),
        };
        if let Some((pu, pg)) = prev {
            if pg > 0.0 && g <= 0.0 {
                bracket = Some((pu, u));
                break;
            }
        }
        prev = Some((u, g));
    }
    let (lo, hi) = bracket.ok_or_else(|| {
        BegError::NoConvergence("C(u) - K_c^(2)(u) shows no sign change on [0.25, 0.40]".into())
    })?;
    let mut failure = None;
    let u = bisect(
        |u| match gap(u) {
            Ok(g) => g,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-12,
        0.0,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok((u, kc2_of_u(u)?))
}

// R at the best positive local minimizer minus R(0); +inf when no positive
// local minimizer exists.
fn depth_gap(u: f64, k: f64) -> Result<(f64, Option<f64>)> {
    let params = MicroParams::new(u, k)?;
    let dom = admissible_domain(&params)?;
    let r0 = r_raw(u, k, 0.0);
    let best = local_minima(&params, &dom)
        .into_iter()
        .filter(|c| c.t > 0.0)
        .min_by(|a, b| a.value.total_cmp(&b.value));
    Ok(match best {
        Some(c) => (c.value - r0, Some(c.t)),
        None => (f64::INFINITY, None),
    })
}

// Smallest coupling for which `u` is an admissible energy, nudged inside.
fn energy_range_floor(u: f64) -> f64 {
    (1.0 - u).max(0.0) * (1.0 + 1e-9) + 1e-12
}

/// First-order critical coupling `K_c^{(1)}(u)` in the region below the
/// convexity curve, located where the positive local minimum of `R_{u,K}`
/// drops through `R_{u,K}(0)`.
pub fn kc1_of_u(u: f64) -> Result<f64> {
    let hi = kc2_of_u(u)?;
    let (d_hi, branch) = depth_gap(u, hi)?;
    if branch.is_none() || d_hi >= 0.0 {
        return Err(BegError::NotFirstOrder {
            u,
            reason: format!("no positive minimum below R(0) at K = K_c^(2)(u) = {hi}"),
        });
    }
    // Geometric scan down to the smallest admissible coupling K = 1 - u.
    let floor = energy_range_floor(u);
    let mut upper = (hi, d_hi);
    let mut lower = None;
    for j in 1..=1000 {
        let k = (hi * 0.98f64.powi(j)).max(floor);
        let (d, _) = depth_gap(u, k)?;
        if d.is_finite() && d < upper.1 {
            return Err(BegError::NotFirstOrder {
                u,
                reason: format!("depth difference is not decreasing in K near K = {k}"),
            });
        }
        if d > 0.0 {
            lower = Some(k);
            break;
        }
        upper = (k, d);
        if k == floor {
            break;
        }
    }
    let lo = lower.ok_or_else(|| BegError::NotFirstOrder {
        u,
        reason: "positive minimum stays below R(0) for all scanned K".into(),
    })?;
    let mut failure = None;
    let k = bisect(
        |k| match depth_gap(u, k) {
            Ok((d, _)) => d,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        upper.0,
        0.0,
        0.0,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(k)
}

/// Order of the K-driven bifurcation at a fixed `u`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionOrder {
    First,
    Second,
    None,
}

impl TransitionOrder {
    pub fn as_str(&self) -> &'static str {
        match self {
            TransitionOrder::First => "first",
            TransitionOrder::Second => "second",
            TransitionOrder::None => "none",
        }
    }
}

/// Critical values at a fixed energy `u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MicroCriticals {
    pub u: f64,
    pub kc2: Option<f64>,
    pub kc1: Option<f64>,
    pub c_u: Option<f64>,
    /// `Second` when `(u, K_c^(2)(u))` lies on or above the convexity curve.
    pub order: TransitionOrder,
}

impl MicroCriticals {
    pub fn transition_k(&self) -> Option<f64> {
        match self.order {
            TransitionOrder::First => self.kc1,
            TransitionOrder::Second => self.kc2,
            TransitionOrder::None => None,
        }
    }
}

pub fn micro_criticals(u: f64) -> Result<MicroCriticals> {
    let kc2 = kc2_of_u(u).ok();
    let c_u = match convexity_curve_c(u) {
        Ok(c) => Some(c),
        Err(BegError::CurveUndefined { .. }) | Err(BegError::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    let order = match (kc2, c_u) {
        (None, _) => TransitionOrder::None,
        (Some(k2), Some(c)) if k2 < c => TransitionOrder::First,
        _ => TransitionOrder::Second,
    };
    let kc1 = if order == TransitionOrder::First {
        Some(kc1_of_u(u)?)
    } else {
        None
    };
    Ok(MicroCriticals {
        u,
        kc2,
        kc1,
        c_u,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{f_k, rel_entropy};

    fn mp(u: f64, k: f64) -> MicroParams {
        MicroParams::new(u, k).unwrap()
    }

    #[test]
    fn r_examples() {
        for &k in &[0.3, 1.0, 2.5] {
            assert!(r_u_k(&mp(2.0 / 3.0, k), 0.0).unwrap().abs() < 1e-15);
        }
        let v = r_u_k(&mp(0.4, 1.2), 0.0).unwrap();
        let expect = 0.4 * 0.4f64.ln() + 0.6 * 0.6f64.ln() - 0.4 * 2f64.ln() + 3f64.ln();
        assert!((v - expect).abs() < 1e-15);
        assert!(r_u_k(&mp(0.4, 1.2), 0.9).is_err());
    }

    #[test]
    fn domain_at_zero_energy() {
        let dom = admissible_domain(&mp(0.0, 2.0)).unwrap();
        assert_eq!(dom.pieces.len(), 2);
        assert_eq!(dom.pieces[0], (0.0, 0.0));
        assert!((dom.pieces[1].0 - 0.5).abs() < 1e-15);
        assert!((dom.pieces[1].1 - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(dom.contains(0.0) && dom.contains(-0.6) && !dom.contains(0.3));
        assert!(admissible_domain(&mp(2.0 / 3.0, 1.0)).unwrap().contains(0.0));
    }

    #[test]
    fn domain_boundaries() {
        let top = admissible_domain(&mp(1.0, 0.7)).unwrap();
        assert_eq!(top.pieces, vec![(0.0, 0.0)]);
        let bottom = admissible_domain(&mp(-1.0, 2.0)).unwrap();
        assert_eq!(bottom.pieces.len(), 1);
        assert!((bottom.pieces[0].0 - 1.0).abs() < 1e-12);
        assert!(!bottom.contains(0.0));
    }

    #[test]
    fn lift_identity_and_feasibility() {
        let params = mp(0.3, 1.4);
        let dom = admissible_domain(&params).unwrap();
        for &(lo, hi) in &dom.intervals() {
            for i in 0..=20 {
                let z = lo + (hi - lo) * i as f64 / 20.0;
                let nu = lift_micro(&params, z);
                assert!(nu.masses().iter().all(|m| (0.0..=1.0).contains(m)));
                assert!((f_k(&nu, params.k) - params.u).abs() < 1e-12);
                let r = r_u_k(&params, z).unwrap();
                assert!((r - rel_entropy(&nu, &Macrostate::uniform())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn solve_examples() {
        let s = solve_micro(&mp(2.0 / 3.0, 1.0)).unwrap();
        assert_eq!(s.z_points, vec![0.0]);
        assert!(s.macrostates[0].approx_eq(&Macrostate::uniform(), 1e-12));
        assert!(s.entropy.abs() < 1e-15);

        let s = solve_micro(&mp(0.5, 2.0)).unwrap();
        assert_eq!(s.phase_label, PhaseLabel::Pair);
        assert!(s.z_points[1] > 0.0);
        assert_eq!(s.z_points[0], -s.z_points[1]);
    }

    #[test]
    fn entropy_at_top_energy() {
        let s = micro_entropy(&mp(1.0, 0.8)).unwrap();
        assert!((s + 1.5f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn kc2_examples() {
        let v = kc2_of_u(0.5).unwrap();
        assert!((v - 1.0 / 2f64.ln()).abs() < 1e-14);
        assert!(kc2_of_u(2.0 / 3.0 - 1e-9).unwrap() > 1e6);
        assert!(kc2_of_u(0.7).is_err());
        assert!(kc2_of_u(0.0).is_err());
    }

    #[test]
    fn phi_third_matches_finite_differences() {
        let params = mp(0.33, 1.08);
        let h = 1e-3;
        for &z in &[0.05, 0.2, 0.4] {
            let f = |x: f64| phi_u_k(&params, x);
            let fd = (-f(z + 3.0 * h) + 8.0 * f(z + 2.0 * h) - 13.0 * f(z + h) + 13.0 * f(z - h)
                - 8.0 * f(z - 2.0 * h)
                + f(z - 3.0 * h))
                / (8.0 * h * h * h);
            assert!((fd - phi_third_derivative(&params, z)).abs() < 1e-5);
        }
    }
}
