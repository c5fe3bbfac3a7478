//! Phase diagrams of both ensembles, inversion of the critical curves to
//! the thermodynamic axes, and the comparison of equilibrium macrostates
//! realized by each ensemble at fixed coupling.

use rayon::prelude::*;
use serde::Serialize;

use crate::canonical::{
    canonical_criticals, kc1_of_beta, kc2_of_beta, solve_canonical, solve_canonical_with,
    CanonicalCriticals, PhaseLabel,
};
use crate::error::{domain, BegError, Result};
use crate::micro::{
    kc1_of_u, kc2_of_u, micro_criticals, micro_tricritical, solve_micro, MicroCriticals,
    TransitionOrder,
};
use crate::model::{energy_range, CanonicalParams, MicroParams, BETA_C};
use crate::output::{fmt_opt, fmt_sig};

/// Couplings within this distance of the tricritical region get a refined
/// K-grid in sweeps.
pub const TRICRITICAL_WINDOW: f64 = 5e-3;
pub const TRICRITICAL_CENTER: f64 = 1.082;
const MAX_HALVINGS: usize = 6;

/// Resolution used to cluster attained order-parameter values.
pub const Z_RESOLUTION: f64 = 1e-3;
/// A micro-only gap wider than this many resolution steps means
/// nonequivalence.
pub const GAP_STEPS: f64 = 3.0;

/// Largest inverse temperature used when inverting `K_c^(1)(beta)`.
pub const BETA_MAX: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Canonical,
    Micro,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseDiagramRow {
    pub ensemble: Ensemble,
    /// `beta` for canonical rows, `u` for microcanonical rows.
    pub control: f64,
    pub k: f64,
    pub z_points: Vec<f64>,
    pub order_parameter: f64,
    pub branch: PhaseLabel,
    /// Order of the K-driven transition at this control value.
    pub transition: TransitionOrder,
    /// `min G_{beta,K}` or `min R_{u,K}`.
    pub min_value: f64,
}

impl PhaseDiagramRow {
    pub fn csv_header(ensemble: Ensemble) -> &'static str {
        match ensemble {
            Ensemble::Canonical => "beta,K,branch,z1,z2,z3,G_min",
            Ensemble::Micro => "u,K,branch,z1,z2,z3,R_min",
        }
    }

    pub fn to_csv(&self) -> String {
        let z: Vec<String> = (0..3)
            .map(|i| fmt_opt(self.z_points.get(i).copied()))
            .collect();
        format!(
            "{},{},{},{},{},{},{}",
            fmt_sig(self.control),
            fmt_sig(self.k),
            self.branch.as_str(),
            z[0],
            z[1],
            z[2],
            fmt_sig(self.min_value)
        )
    }
}

fn sort_rows(rows: &mut [PhaseDiagramRow]) {
    rows.sort_by(|a, b| a.control.total_cmp(&b.control).then(a.k.total_cmp(&b.k)));
}

// Local halving of the K-grid around label changes inside the tricritical
// window, until the located transition stops moving by more than the local
// spacing.
fn refine_near_tricritical<F>(k_grid: &[f64], label_at: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<PhaseLabel>,
{
    let mut pts: Vec<f64> = k_grid
        .iter()
        .copied()
        .filter(|k| (k - TRICRITICAL_CENTER).abs() < TRICRITICAL_WINDOW)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    if pts.len() < 2 {
        return Ok(Vec::new());
    }
    let mut extra = Vec::new();
    let mut labels = pts.iter().map(|&k| label_at(k)).collect::<Result<Vec<_>>>()?;
    let mut previous: Option<f64> = None;
    for _ in 0..MAX_HALVINGS {
        let Some(i) = (0..pts.len() - 1).find(|&i| labels[i] != labels[i + 1]) else {
            break;
        };
        let spacing = pts[i + 1] - pts[i];
        let estimate = 0.5 * (pts[i] + pts[i + 1]);
        if let Some(p) = previous {
            if (estimate - p).abs() < 0.5 * spacing {
                break;
            }
        }
        previous = Some(estimate);
        let mid = estimate;
        let label = label_at(mid)?;
        extra.push(mid);
        pts.insert(i + 1, mid);
        labels.insert(i + 1, label);
    }
    Ok(extra)
}

fn merged_grid(k_grid: &[f64], extra: Vec<f64>) -> Vec<f64> {
    let mut ks: Vec<f64> = k_grid.iter().copied().chain(extra).collect();
    ks.sort_by(f64::total_cmp);
    ks.dedup();
    ks
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain(format!("{name} grid is empty")));
    }
    if let Some(x) = grid.iter().find(|x| !x.is_finite()) {
        return Err(domain(format!("{name} grid contains non-finite value {x}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CanonicalSweep {
    pub rows: Vec<PhaseDiagramRow>,
    /// Critical values per beta of the grid, sorted by beta.
    pub curves: Vec<CanonicalCriticals>,
}

/// Solves the canonical ensemble on a (beta, K) grid.
pub fn sweep_canonical(beta_grid: &[f64], k_grid: &[f64]) -> Result<CanonicalSweep> {
    check_grid("beta", beta_grid)?;
    check_grid("K", k_grid)?;
    if let Some(x) = beta_grid.iter().chain(k_grid).find(|x| **x <= 0.0) {
        return Err(domain(format!("grid values must be positive, got {x}")));
    }
    let per_beta: Vec<(CanonicalCriticals, Vec<PhaseDiagramRow>)> = beta_grid
        .par_iter()
        .map(|&beta| {
            let crit = canonical_criticals(beta)?;
            let label_at = |k: f64| {
                Ok(solve_canonical_with(&CanonicalParams::new(beta, k)?, &crit)?.phase_label)
            };
            let ks = merged_grid(k_grid, refine_near_tricritical(k_grid, label_at)?);
            let transition = if crit.is_first_order() {
                TransitionOrder::First
            } else {
                TransitionOrder::Second
            };
            let rows = ks
                .iter()
                .map(|&k| {
                    let sol = solve_canonical_with(&CanonicalParams::new(beta, k)?, &crit)?;
                    Ok(PhaseDiagramRow {
                        ensemble: Ensemble::Canonical,
                        control: beta,
                        k,
                        order_parameter: sol.order_parameter(),
                        z_points: sol.z_points,
                        branch: sol.phase_label,
                        transition,
                        min_value: sol.min_value,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((crit, rows))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut curves: Vec<CanonicalCriticals> = per_beta.iter().map(|(c, _)| *c).collect();
    curves.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    curves.dedup_by(|a, b| a.beta == b.beta);
    let mut rows: Vec<PhaseDiagramRow> = per_beta.into_iter().flat_map(|(_, r)| r).collect();
    sort_rows(&mut rows);
    rows.dedup_by(|a, b| a.control == b.control && a.k == b.k);
    Ok(CanonicalSweep { rows, curves })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MicroSweep {
    pub rows: Vec<PhaseDiagramRow>,
    pub curves: Vec<MicroCriticals>,
}

fn admissible(u: f64, k: f64) -> bool {
    let (lo, hi) = energy_range(k);
    u >= lo && u <= hi
}

/// Solves the microcanonical ensemble on a (u, K) grid, skipping
/// inadmissible pairs.
pub fn sweep_micro(u_grid: &[f64], k_grid: &[f64]) -> Result<MicroSweep> {
    check_grid("u", u_grid)?;
    check_grid("K", k_grid)?;
    if let Some(x) = k_grid.iter().find(|x| **x <= 0.0) {
        return Err(domain(format!("K grid values must be positive, got {x}")));
    }
    let per_u: Vec<(MicroCriticals, Vec<PhaseDiagramRow>)> = u_grid
        .par_iter()
        .map(|&u| {
            let crit = micro_criticals(u)?;
            let label_at =
                |k: f64| Ok(solve_micro(&MicroParams::new(u, k)?)?.phase_label);
            let admissible_ks: Vec<f64> =
                k_grid.iter().copied().filter(|&k| admissible(u, k)).collect();
            let ks = merged_grid(
                &admissible_ks,
                refine_near_tricritical(&admissible_ks, label_at)?,
            );
            let rows = ks
                .iter()
                .map(|&k| {
                    let sol = solve_micro(&MicroParams::new(u, k)?)?;
                    Ok(PhaseDiagramRow {
                        ensemble: Ensemble::Micro,
                        control: u,
                        k,
                        order_parameter: sol.order_parameter(),
                        z_points: sol.z_points,
                        branch: sol.phase_label,
                        transition: crit.order,
                        min_value: sol.min_value,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((crit, rows))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut curves: Vec<MicroCriticals> = per_u.iter().map(|(c, _)| *c).collect();
    curves.sort_by(|a, b| a.u.total_cmp(&b.u));
    curves.dedup_by(|a, b| a.u == b.u);
    let mut rows: Vec<PhaseDiagramRow> = per_u.into_iter().flat_map(|(_, r)| r).collect();
    sort_rows(&mut rows);
    rows.dedup_by(|a, b| a.control == b.control && a.k == b.k);
    Ok(MicroSweep { rows, curves })
}

/// Inverts a monotone curve `K = curve(x)` on `[lo, hi]` by bisection to
/// `1e-9` in `x`.
pub fn invert_monotone<F>(curve: F, lo: f64, hi: f64, target: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let f_lo = curve(lo)?;
    let f_hi = curve(hi)?;
    let (k_min, k_max) = (f_lo.min(f_hi), f_lo.max(f_hi));
    if !(target >= k_min && target <= k_max) {
        return Err(domain(format!(
            "K = {target} is outside the curve's range [{k_min}, {k_max}]"
        )));
    }
    let increasing = f_hi > f_lo;
    let (mut a, mut b) = (lo, hi);
    while b - a > 1e-10 {
        let m = 0.5 * (a + b);
        let v = curve(m)?;
        if (v < target) == increasing {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Critical curves that can be inverted to a thermodynamic axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CriticalCurve {
    /// `beta_c^(2)(K)`, the inverse of `K_c^(2)(beta)` on `(0, log 4]`.
    BetaSecondOrder,
    /// `beta_c^(1)(K)`, the inverse of `K_c^(1)(beta)` on `(log 4, BETA_MAX]`.
    BetaFirstOrder,
    /// `u_c^(2)(K)`, the inverse of `K_c^(2)(u)` above the microcanonical
    /// tricritical energy.
    USecondOrder,
    /// `u_c^(1)(K)`, the inverse of `K_c^(1)(u)` below it.
    UFirstOrder,
}

/// Lower end of the `u`-range on which `K_c^(1)(u)` is inverted.
pub const U_FIRST_ORDER_MIN: f64 = 0.01;

pub fn invert_critical_curve(curve: CriticalCurve, k: f64) -> Result<f64> {
    match curve {
        CriticalCurve::BetaSecondOrder => {
            invert_monotone(kc2_of_beta, 1e-8, BETA_C, k)
        }
        CriticalCurve::BetaFirstOrder => {
            invert_monotone(kc1_of_beta, BETA_C * (1.0 + 1e-12), BETA_MAX, k)
        }
        CriticalCurve::USecondOrder => {
            let (u_tri, _) = micro_tricritical()?;
            invert_monotone(kc2_of_u, u_tri, 2.0 / 3.0 - 1e-9, k)
        }
        CriticalCurve::UFirstOrder => {
            let (u_tri, _) = micro_tricritical()?;
            invert_monotone(kc1_of_u, U_FIRST_ORDER_MIN, u_tri - 1e-9, k)
        }
    }
}

/// Verdict of an ensemble comparison at fixed K.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equivalent,
    Nonequivalent,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Equivalent => "equivalent",
            Verdict::Nonequivalent => "nonequivalent",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub k: f64,
    /// Attained `|z|` values over the beta grid, as merged closed intervals.
    pub canonical_z_range: Vec<(f64, f64)>,
    /// Attained `|z|` values over the u grid.
    pub micro_z_range: Vec<(f64, f64)>,
    /// Micro-only `|z|` intervals within the common range.
    pub gap: Vec<(f64, f64)>,
    pub gap_measure: f64,
    pub verdict: Verdict,
}

// Attained order-parameter values along a 1-D control path. Consecutive
// ordered points are joined by continuity; a disordered-to-ordered step is
// bisected to 1e-10 in the control, and joined to 0 only if the order
// parameter at the ordered edge is below the clustering resolution.
fn attained_set<F>(controls: &[f64], z_of: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<Option<f64>> + Sync,
{
    let mut cs: Vec<f64> = controls.to_vec();
    cs.sort_by(f64::total_cmp);
    cs.dedup();
    let pts: Vec<(f64, f64)> = cs
        .par_iter()
        .map(|&c| Ok(z_of(c)?.map(|z| (c, z))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut intervals = Vec::new();
    for &(_, z) in &pts {
        intervals.push((z, z));
    }
    for w in pts.windows(2) {
        let ((c0, z0), (c1, z1)) = (w[0], w[1]);
        match (z0 > 0.0, z1 > 0.0) {
            (true, true) => intervals.push((z0.min(z1), z0.max(z1))),
            (false, false) => {}
            (o0, _) => {
                let (mut dis, mut ord, mut z_edge) = if o0 { (c1, c0, z0) } else { (c0, c1, z1) };
                let z_far = z_edge;
                while (ord - dis).abs() > 1e-10 {
                    let m = 0.5 * (dis + ord);
                    match z_of(m)? {
                        Some(z) if z > 0.0 => {
                            ord = m;
                            z_edge = z;
                        }
                        Some(_) => dis = m,
                        None => break,
                    }
                }
                let lo = if z_edge <= Z_RESOLUTION { 0.0 } else { z_edge };
                intervals.push((lo, z_far));
            }
        }
    }
    Ok(merge_intervals(intervals, Z_RESOLUTION))
}

fn merge_intervals(mut v: Vec<(f64, f64)>, join: f64) -> Vec<(f64, f64)> {
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 + join => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn subtract(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(lo, hi) in a {
        let mut pieces = vec![(lo, hi)];
        for &(blo, bhi) in b {
            pieces = pieces
                .into_iter()
                .flat_map(|(plo, phi)| {
                    let mut v = Vec::new();
                    if blo > plo {
                        v.push((plo, phi.min(blo)));
                    }
                    if bhi < phi {
                        v.push((plo.max(bhi), phi));
                    }
                    v.into_iter().filter(|(x, y)| y > x)
                })
                .collect();
        }
        out.extend(pieces);
    }
    out
}

/// Compares the `|z|` values realized by the canonical ensemble over
/// `beta_grid` with those realized by the microcanonical ensemble over
/// `u_grid` at coupling `k`.
pub fn equivalence_report(k: f64, beta_grid: &[f64], u_grid: &[f64]) -> Result<EquivalenceReport> {
    check_grid("beta", beta_grid)?;
    check_grid("u", u_grid)?;
    if !(k.is_finite() && k > 0.0) {
        return Err(domain(format!("K must be finite and > 0, got {k}")));
    }
    let canonical = attained_set(beta_grid, |beta| {
        if beta <= 0.0 {
            return Ok(None);
        }
        Ok(Some(solve_canonical(&CanonicalParams::new(beta, k)?)?.order_parameter()))
    })?;
    let micro = attained_set(u_grid, |u| {
        if !admissible(u, k) {
            return Ok(None);
        }
        match solve_micro(&MicroParams::new(u, k)?) {
            Ok(sol) => Ok(Some(sol.order_parameter())),
            Err(BegError::Domain(_)) => Ok(None),
            Err(e) => Err(e),
        }
    })?;
    let top = |v: &[(f64, f64)]| v.iter().fold(0.0f64, |m, p| m.max(p.1));
    let common = top(&canonical).min(top(&micro));
    let padded: Vec<(f64, f64)> = canonical
        .iter()
        .map(|&(lo, hi)| (lo - 0.5 * Z_RESOLUTION, hi + 0.5 * Z_RESOLUTION))
        .collect();
    let clipped: Vec<(f64, f64)> = micro
        .iter()
        .filter(|p| p.0 <= common)
        .map(|&(lo, hi)| (lo, hi.min(common)))
        .collect();
    let gap: Vec<(f64, f64)> = subtract(&clipped, &padded)
        .into_iter()
        .filter(|(lo, hi)| hi - lo > Z_RESOLUTION)
        .collect();
    let gap_measure = gap.iter().fold(0.0, |acc, (lo, hi)| acc + (hi - lo));
    let verdict = if gap_measure > GAP_STEPS * Z_RESOLUTION {
        Verdict::Nonequivalent
    } else {
        Verdict::Equivalent
    };
    Ok(EquivalenceReport {
        k,
        canonical_z_range: canonical,
        micro_z_range: micro,
        gap,
        gap_measure,
        verdict,
    })
}

/// Regular grid `start, start + step, ...` up to and including `stop`.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(domain(format!(
            "grid needs finite start <= stop and step > 0, got ({start}, {stop}, {step})"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}
