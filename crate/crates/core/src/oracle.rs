//! Brute-force minimization over a regular grid on the 2-simplex, used as
//! ground truth for both solvers.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::model::{f_k, rel_entropy, CanonicalParams, Macrostate, MicroParams};

/// Grid points within this distance of the scanned minimum are returned.
pub const ORACLE_TIE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "ensemble", rename_all = "lowercase")]
pub enum OracleObjective {
    /// `R(nu | rho) + beta f_K(nu)`.
    Canonical(CanonicalParams),
    /// `R(nu | rho)` on the energy curve `f_K(nu) = u`, accepting points
    /// with `|f_K(nu) - u| <= tol`.
    Micro { params: MicroParams, tol: f64 },
}

impl OracleObjective {
    fn eval(&self, nu: &Macrostate, uniform: &Macrostate) -> f64 {
        match self {
            OracleObjective::Canonical(p) => rel_entropy(nu, uniform) + p.beta * f_k(nu, p.k),
            OracleObjective::Micro { params, tol } => {
                if (f_k(nu, params.k) - params.u).abs() <= *tol {
                    rel_entropy(nu, uniform)
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub grid_step: f64,
    pub min_value: f64,
    /// All grid points within [`ORACLE_TIE`] of `min_value`.
    pub points: Vec<Macrostate>,
}

impl OracleResult {
    /// Groups the returned points into clusters of diameter about `radius`
    /// and returns the componentwise mean of each cluster.
    pub fn clusters(&self, radius: f64) -> Vec<Macrostate> {
        let mut groups: Vec<Vec<Macrostate>> = Vec::new();
        for p in &self.points {
            match groups
                .iter_mut()
                .find(|g| g[0].max_abs_diff(p) <= radius)
            {
                Some(g) => g.push(*p),
                None => groups.push(vec![*p]),
            }
        }
        groups
            .iter()
            .map(|g| {
                let n = g.len() as f64;
                let s = g.iter().fold([0.0; 3], |acc, m| {
                    let v = m.masses();
                    [acc[0] + v[0], acc[1] + v[1], acc[2] + v[2]]
                });
                Macrostate::from_masses(s[0] / n, s[1] / n, s[2] / n)
            })
            .collect()
    }

    /// Largest distance from a solver macrostate to the nearest oracle
    /// point, and from an oracle point to the nearest solver macrostate.
    pub fn hausdorff(&self, solver: &[Macrostate]) -> f64 {
        let one_way = |a: &[Macrostate], b: &[Macrostate]| {
            a.iter()
                .map(|x| {
                    b.iter()
                        .map(|y| x.max_abs_diff(y))
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        one_way(solver, &self.points).max(one_way(&self.points, solver))
    }
}

// Points where the energy curve crosses the grid lines `nu_- = a` and
// `nu_+ = a`. With `d = nu_+ - nu_-` the constraint reads
// `K d^2 -/+ d + u - 2a = 0`; the two scans are exact mirrors.
fn curve_crossings(params: &MicroParams, a: f64) -> Vec<Macrostate> {
    let k = params.k;
    let disc = 1.0 - 4.0 * k * (params.u - 2.0 * a);
    if disc < 0.0 {
        return Vec::new();
    }
    let s = disc.sqrt();
    let mut out = Vec::new();
    for d in [(1.0 - s) / (2.0 * k), (1.0 + s) / (2.0 * k)] {
        for (minus, plus) in [(a, a + d), (a + d, a)] {
            let zero = 1.0 - minus - plus;
            if minus >= 0.0 && plus >= 0.0 && zero >= -1e-15 {
                out.push(Macrostate::from_masses(minus, zero.max(0.0), plus));
            }
        }
    }
    out
}

/// Exhaustive scan of the simplex grid with spacing `grid_step`.
///
/// The canonical objective is evaluated at every grid point. The
/// microcanonical constraint is a curve, which a band of grid points
/// resolves poorly since `R` keeps decreasing across the band; instead
/// the curve is intersected exactly with every grid line.
pub fn simplex_oracle(objective: &OracleObjective, grid_step: f64) -> Result<OracleResult> {
    if !(1e-4..=1e-2).contains(&grid_step) {
        return Err(domain(format!(
            "grid_step must lie in [1e-4, 1e-2], got {grid_step}"
        )));
    }
    if let OracleObjective::Micro { params, .. } = objective {
        return micro_oracle(objective, params, grid_step);
    }
    let n = (1.0 / grid_step).round() as usize;
    let h = 1.0 / n as f64;
    let uniform = Macrostate::uniform();
    let point = |i: usize, j: usize| {
        let minus = i as f64 * h;
        let plus = j as f64 * h;
        Macrostate::from_masses(minus, (1.0 - minus - plus).max(0.0), plus)
    };
    let row_min = |i: usize| {
        (0..=n - i)
            .map(|j| objective.eval(&point(i, j), &uniform))
            .fold(f64::INFINITY, f64::min)
    };
    let min_value = (0..=n)
        .into_par_iter()
        .map(row_min)
        .reduce(|| f64::INFINITY, f64::min);
    let points: Vec<Macrostate> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|i| {
            (0..=n - i).filter_map(move |j| {
                let p = point(i, j);
                (objective.eval(&p, &uniform) <= min_value + ORACLE_TIE).then_some(p)
            })
        })
        .collect();
    Ok(OracleResult {
        grid_step: h,
        min_value,
        points,
    })
}

fn micro_oracle(
    objective: &OracleObjective,
    params: &MicroParams,
    grid_step: f64,
) -> Result<OracleResult> {
    let n = (1.0 / grid_step).round() as usize;
    let h = 1.0 / n as f64;
    let uniform = Macrostate::uniform();
    let candidates: Vec<(Macrostate, f64)> = (0..=n)
        .into_par_iter()
        .flat_map_iter(|i| {
            curve_crossings(params, i as f64 * h)
                .into_iter()
                .map(|p| (p, objective.eval(&p, &uniform)))
        })
        .collect();
    let min_value = candidates
        .iter()
        .map(|c| c.1)
        .fold(f64::INFINITY, f64::min);
    let points = candidates
        .into_iter()
        .filter(|c| c.1 <= min_value + ORACLE_TIE)
        .map(|c| c.0)
        .collect();
    Ok(OracleResult {
        grid_step: h,
        min_value,
        points,
    })
}
