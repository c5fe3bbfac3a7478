use beg_core::canonical::{
    canonical_criticals, canonical_free_energy, kc2_of_beta, solve_canonical,
};
use beg_core::diagram::{
    equivalence_report, invert_critical_curve, sweep_canonical, sweep_micro, CriticalCurve,
    PhaseDiagramRow,
};
use beg_core::limits::{
    classify_type, conditioned_clt_check, convergence_diagnostic, default_window,
    exact_spin_pmf, phase_split_diagnostic, Branch,
};
use beg_core::micro::{micro_criticals, micro_tricritical, solve_micro};
use beg_core::model::Macrostate;
use beg_core::oracle::{simplex_oracle, OracleObjective};
use beg_core::sampler::metropolis_sampler;
use beg_core::{BegError, CanonicalParams, MicroParams, BETA_C};
use clap::{ArgGroup, Subcommand, ValueEnum};

use crate::grid::GridSpec;
use crate::report::{Cell, Report, Table};

/// Default control grids of the equivalence report.
const EQUIVALENCE_BETA_GRID: &str = "0.5:3:0.001";
const EQUIVALENCE_U_GRID: &str = "0.05:0.95:0.001";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Minus,
    Zero,
    Plus,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Minus => Branch::Minus,
            BranchArg::Zero => Branch::Zero,
            BranchArg::Plus => Branch::Plus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnsembleArg {
    Canonical,
    Micro,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical equilibrium macrostates at (beta, K)
    Canon {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
    },
    /// Canonical critical couplings at beta, or the critical beta at K
    #[command(group(ArgGroup::new("at").required(true).args(["beta", "k"])))]
    CanonCritical {
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long = "K", allow_negative_numbers = true)]
        k: Option<f64>,
    },
    /// Microcanonical equilibrium macrostates at (u, K)
    Micro {
        #[arg(long, allow_negative_numbers = true)]
        u: f64,
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
    },
    /// Microcanonical critical couplings at u, the critical u at K, or the
    /// tricritical point
    #[command(group(ArgGroup::new("at").required(true).args(["u", "k", "tricritical"])))]
    MicroCritical {
        #[arg(long, allow_negative_numbers = true)]
        u: Option<f64>,
        #[arg(long = "K", allow_negative_numbers = true)]
        k: Option<f64>,
        #[arg(long)]
        tricritical: bool,
    },
    /// Canonical phase diagram on a (beta, K) grid
    DiagramCanon {
        /// start:stop:step or comma-separated list
        #[arg(long = "beta-grid")]
        beta_grid: GridSpec,
        #[arg(long = "K-grid")]
        k_grid: GridSpec,
    },
    /// Microcanonical phase diagram on a (u, K) grid
    DiagramMicro {
        #[arg(long = "u-grid")]
        u_grid: GridSpec,
        #[arg(long = "K-grid")]
        k_grid: GridSpec,
    },
    /// Compare the order parameters realized by both ensembles at fixed K
    Equivalence {
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        #[arg(long = "beta-grid", default_value = EQUIVALENCE_BETA_GRID)]
        beta_grid: GridSpec,
        #[arg(long = "u-grid", default_value = EQUIVALENCE_U_GRID)]
        u_grid: GridSpec,
    },
    /// Minimizer types and convergence of the total spin to its limit law
    Limits {
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        /// System sizes, comma-separated
        #[arg(long, value_delimiter = ',', default_value = "500,1000,2000")]
        n: Vec<usize>,
        /// Conditioning half-width (default min(0.1, z/2))
        #[arg(long)]
        window: Option<f64>,
        /// Minimizer to condition on when several coexist
        #[arg(long, value_enum, default_value_t = BranchArg::Plus)]
        branch: BranchArg,
    },
    /// Exact distribution of the total spin, optionally against Metropolis
    Pmf {
        #[arg(long)]
        n: usize,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        /// Recorded Metropolis steps; omit to skip sampling
        #[arg(long = "metropolis-steps")]
        metropolis_steps: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Brute-force minimization over a grid on the simplex
    Oracle {
        #[arg(long, value_enum)]
        ensemble: EnsembleArg,
        #[arg(long, allow_negative_numbers = true)]
        beta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        u: Option<f64>,
        #[arg(long = "K", allow_negative_numbers = true)]
        k: f64,
        #[arg(long = "grid-step", default_value_t = 1e-3)]
        grid_step: f64,
        /// Energy tolerance of the microcanonical constraint
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn domain(msg: String) -> anyhow::Error {
    BegError::Domain(msg).into()
}

fn macrostate_columns() -> [&'static str; 3] {
    ["nu_minus", "nu_zero", "nu_plus"]
}

fn macrostate_cells(nu: &Macrostate) -> Vec<Cell> {
    nu.masses().iter().map(|&m| Cell::Num(m)).collect()
}

impl Command {
    pub fn run(&self) -> anyhow::Result<Report> {
        match self {
            Command::Canon { beta, k } => canon(*beta, *k),
            Command::CanonCritical { beta, k } => canon_critical(*beta, *k),
            Command::Micro { u, k } => micro(*u, *k),
            Command::MicroCritical { u, k, tricritical } => micro_critical(*u, *k, *tricritical),
            Command::DiagramCanon { beta_grid, k_grid } => diagram_canon(beta_grid, k_grid),
            Command::DiagramMicro { u_grid, k_grid } => diagram_micro(u_grid, k_grid),
            Command::Equivalence {
                k,
                beta_grid,
                u_grid,
            } => equivalence(*k, beta_grid, u_grid),
            Command::Limits {
                beta,
                k,
                n,
                window,
                branch,
            } => limits(*beta, *k, n, *window, *branch),
            Command::Pmf {
                n,
                beta,
                k,
                metropolis_steps,
                seed,
            } => pmf(*n, *beta, *k, *metropolis_steps, *seed),
            Command::Oracle {
                ensemble,
                beta,
                u,
                k,
                grid_step,
                tol,
            } => oracle(*ensemble, *beta, *u, *k, *grid_step, *tol),
        }
    }
}

fn canon(beta: f64, k: f64) -> anyhow::Result<Report> {
    let params = CanonicalParams::new(beta, k)?;
    let sol = solve_canonical(&params)?;
    let mut report = Report::new("canon");
    report.num("beta", beta);
    report.num("K", k);
    let mut cols = vec!["z", "w"];
    cols.extend(macrostate_columns());
    cols.extend(["type_r", "sigma2"]);
    let mut minimizers = Table::new("minimizers", &cols);
    for (i, z) in sol.z_points.iter().enumerate() {
        let mut row = vec![Cell::Num(*z), Cell::Num(sol.w_points[i])];
        row.extend(macrostate_cells(&sol.macrostates[i]));
        row.push(Cell::Int(sol.types[i].r as i64));
        row.push(sol.types[i].sigma2.into());
        minimizers.push(row);
    }
    let mut summary = Table::new("summary", &["phase", "order_parameter", "G_min", "free_energy"]);
    summary.push(vec![
        sol.phase_label.as_str().into(),
        sol.order_parameter().into(),
        sol.min_value.into(),
        canonical_free_energy(&params)?.into(),
    ]);
    report.tables = vec![minimizers, summary];
    Ok(report)
}

fn canon_critical(beta: Option<f64>, k: Option<f64>) -> anyhow::Result<Report> {
    let mut report = Report::new("canon-critical");
    if let Some(beta) = beta {
        report.num("beta", beta);
        let crit = canonical_criticals(beta)?;
        let order = if crit.is_first_order() { "first" } else { "second" };
        let mut t = Table::new(
            "criticals",
            &["beta", "order", "Kc2", "K1", "K2", "Kc1", "w1", "transition_K", "near_tricritical"],
        );
        t.push(vec![
            beta.into(),
            order.into(),
            kc2_of_beta(beta)?.into(),
            crit.k1.into(),
            crit.k2.into(),
            crit.kc1.into(),
            crit.w1.into(),
            crit.transition_k().into(),
            crit.near_tricritical.into(),
        ]);
        report.tables.push(t);
    } else if let Some(k) = k {
        report.num("K", k);
        let tri = kc2_of_beta(BETA_C)?;
        let (curve, name) = if k >= tri {
            (CriticalCurve::BetaSecondOrder, "beta_c2")
        } else {
            (CriticalCurve::BetaFirstOrder, "beta_c1")
        };
        let beta = invert_critical_curve(curve, k)?;
        let mut t = Table::new("inverse", &["K", "curve", "beta"]);
        t.push(vec![k.into(), name.into(), beta.into()]);
        report.tables.push(t);
    }
    Ok(report)
}

fn micro(u: f64, k: f64) -> anyhow::Result<Report> {
    let params = MicroParams::new(u, k)?;
    let sol = solve_micro(&params)?;
    let mut report = Report::new("micro");
    report.num("u", u);
    report.num("K", k);
    let mut cols = vec!["z"];
    cols.extend(macrostate_columns());
    let mut minimizers = Table::new("minimizers", &cols);
    for (z, nu) in sol.z_points.iter().zip(&sol.macrostates) {
        let mut row = vec![Cell::Num(*z)];
        row.extend(macrostate_cells(nu));
        minimizers.push(row);
    }
    let mut summary = Table::new(
        "summary",
        &["phase", "order_parameter", "R_min", "entropy", "near_tie"],
    );
    summary.push(vec![
        sol.phase_label.as_str().into(),
        sol.order_parameter().into(),
        sol.min_value.into(),
        sol.entropy.into(),
        sol.near_tie.into(),
    ]);
    report.tables = vec![minimizers, summary];
    Ok(report)
}

fn micro_critical(u: Option<f64>, k: Option<f64>, tricritical: bool) -> anyhow::Result<Report> {
    let mut report = Report::new("micro-critical");
    if tricritical {
        report.param("tricritical", "true");
        let (u, k) = micro_tricritical()?;
        let mut t = Table::new("tricritical", &["u", "K"]);
        t.push(vec![u.into(), k.into()]);
        report.tables.push(t);
    } else if let Some(u) = u {
        report.num("u", u);
        let crit = micro_criticals(u)?;
        let mut t = Table::new("criticals", &["u", "order", "Kc2", "C", "Kc1", "transition_K"]);
        t.push(vec![
            u.into(),
            crit.order.as_str().into(),
            crit.kc2.into(),
            crit.c_u.into(),
            crit.kc1.into(),
            crit.transition_k().into(),
        ]);
        report.tables.push(t);
    } else if let Some(k) = k {
        report.num("K", k);
        let (_, k_tri) = micro_tricritical()?;
        let (curve, name) = if k >= k_tri {
            (CriticalCurve::USecondOrder, "u_c2")
        } else {
            (CriticalCurve::UFirstOrder, "u_c1")
        };
        let u = invert_critical_curve(curve, k)?;
        let mut t = Table::new("inverse", &["K", "curve", "u"]);
        t.push(vec![k.into(), name.into(), u.into()]);
        report.tables.push(t);
    }
    Ok(report)
}

fn rows_table(rows: &[PhaseDiagramRow], header: &'static str) -> Table {
    let cols: Vec<&'static str> = header.split(',').collect();
    let mut t = Table::new("rows", &cols);
    for r in rows {
        let z = |i: usize| Cell::from(r.z_points.get(i).copied());
        t.push(vec![
            r.control.into(),
            r.k.into(),
            r.branch.as_str().into(),
            z(0),
            z(1),
            z(2),
            r.min_value.into(),
        ]);
    }
    t
}

fn diagram_canon(beta_grid: &GridSpec, k_grid: &GridSpec) -> anyhow::Result<Report> {
    let sweep = sweep_canonical(&beta_grid.values, &k_grid.values)?;
    let mut report = Report::new("diagram-canon");
    report.param("beta-grid", beta_grid.text.clone());
    report.param("K-grid", k_grid.text.clone());
    let rows = rows_table(&sweep.rows, "beta,K,branch,z1,z2,z3,G_min");
    let mut curves = Table::new(
        "curves",
        &["beta", "order", "Kc2", "K1", "K2", "Kc1", "near_tricritical"],
    );
    for c in &sweep.curves {
        curves.push(vec![
            c.beta.into(),
            if c.is_first_order() { "first" } else { "second" }.into(),
            c.kc2.into(),
            c.k1.into(),
            c.k2.into(),
            c.kc1.into(),
            c.near_tricritical.into(),
        ]);
    }
    report.tables = vec![rows, curves];
    Ok(report)
}

fn diagram_micro(u_grid: &GridSpec, k_grid: &GridSpec) -> anyhow::Result<Report> {
    let sweep = sweep_micro(&u_grid.values, &k_grid.values)?;
    let mut report = Report::new("diagram-micro");
    report.param("u-grid", u_grid.text.clone());
    report.param("K-grid", k_grid.text.clone());
    let rows = rows_table(&sweep.rows, "u,K,branch,z1,z2,z3,R_min");
    let mut curves = Table::new("curves", &["u", "order", "Kc2", "C", "Kc1"]);
    for c in &sweep.curves {
        curves.push(vec![
            c.u.into(),
            c.order.as_str().into(),
            c.kc2.into(),
            c.c_u.into(),
            c.kc1.into(),
        ]);
    }
    report.tables = vec![rows, curves];
    Ok(report)
}

fn equivalence(k: f64, beta_grid: &GridSpec, u_grid: &GridSpec) -> anyhow::Result<Report> {
    let rep = equivalence_report(k, &beta_grid.values, &u_grid.values)?;
    let mut report = Report::new("equivalence");
    report.num("K", k);
    report.param("beta-grid", beta_grid.text.clone());
    report.param("u-grid", u_grid.text.clone());
    let mut summary = Table::new("summary", &["K", "verdict", "gap_measure"]);
    summary.push(vec![k.into(), rep.verdict.as_str().into(), rep.gap_measure.into()]);
    let mut sets = Table::new("intervals", &["set", "z_lo", "z_hi"]);
    for (name, set) in [
        ("canonical", &rep.canonical_z_range),
        ("micro", &rep.micro_z_range),
        ("gap", &rep.gap),
    ] {
        for &(lo, hi) in set {
            sets.push(vec![name.into(), lo.into(), hi.into()]);
        }
    }
    report.tables = vec![summary, sets];
    Ok(report)
}

fn limits(
    beta: f64,
    k: f64,
    ns: &[usize],
    window: Option<f64>,
    branch: BranchArg,
) -> anyhow::Result<Report> {
    let params = CanonicalParams::new(beta, k)?;
    let sol = solve_canonical(&params)?;
    let mut report = Report::new("limits");
    report.num("beta", beta);
    report.num("K", k);
    report.param(
        "n",
        ns.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","),
    );
    if let Some(a) = window {
        report.num("window", a);
    }
    let mut types = Table::new(
        "types",
        &["z", "r", "G2", "G4", "G6", "sigma2", "scaling_exponent"],
    );
    for rep in &sol.types {
        let [g2, g4, g6] = rep.derivative_values;
        types.push(vec![
            rep.z.into(),
            Cell::Int(rep.r as i64),
            g2.into(),
            g4.into(),
            g6.into(),
            rep.sigma2.into(),
            rep.scaling_exponent().into(),
        ]);
    }
    report.tables.push(types);
    if sol.z_points.len() == 1 {
        let rep = classify_type(&params, sol.z_points[0])?;
        let ladder = convergence_diagnostic(ns, &params, &rep)?;
        let mut t = Table::new("ladder", &["n", "ks", "scaled_variance", "tail_mass"]);
        for p in ladder {
            let pmf = exact_spin_pmf(p.n, &params)?;
            t.push(vec![
                p.n.into(),
                p.ks.into(),
                pmf.scaled_variance().into(),
                pmf.tail_mass(0.05).into(),
            ]);
        }
        report.tables.push(t);
    } else {
        report.param("branch", format!("{branch:?}").to_lowercase());
        let z_tilde = sol.z_tilde().unwrap_or(0.0);
        let a = window.unwrap_or_else(|| default_window(z_tilde));
        let split = phase_split_diagnostic(ns, &params, a)?;
        let mut t = Table::new("phase_split", &["n", "z", "weight", "window_mass", "tv"]);
        for p in &split {
            for i in 0..p.z_points.len() {
                t.push(vec![
                    p.n.into(),
                    p.z_points[i].into(),
                    p.weights[i].into(),
                    p.window_masses[i].into(),
                    p.tv.into(),
                ]);
            }
        }
        report.tables.push(t);
        let mut c = Table::new(
            "conditioned",
            &["n", "z_j", "a", "sigma2", "window_mass", "centered_mean", "ks"],
        );
        for &n in ns {
            let r = conditioned_clt_check(n, &params, branch.into(), a)?;
            c.push(vec![
                r.n.into(),
                r.z_j.into(),
                r.a.into(),
                r.sigma2.into(),
                r.window_mass.into(),
                r.centered_mean.into(),
                r.ks.into(),
            ]);
        }
        report.tables.push(c);
    }
    Ok(report)
}

fn pmf(
    n: usize,
    beta: f64,
    k: f64,
    steps: Option<usize>,
    seed: u64,
) -> anyhow::Result<Report> {
    let params = CanonicalParams::new(beta, k)?;
    let exact = exact_spin_pmf(n, &params)?;
    let mut report = Report::new("pmf");
    report.param("n", n.to_string());
    report.num("beta", beta);
    report.num("K", k);
    let run = match steps {
        Some(steps) => {
            report.param("metropolis-steps", steps.to_string());
            report.param("seed", seed.to_string());
            Some(metropolis_sampler(n, &params, steps, seed)?)
        }
        None => None,
    };
    let cols: &[&'static str] = if run.is_some() {
        &["k", "s_over_n", "probability", "frequency"]
    } else {
        &["k", "s_over_n", "probability"]
    };
    let mut t = Table::new("pmf", cols);
    for (i, s) in exact.spins().enumerate() {
        let mut row = vec![
            Cell::Int(s),
            Cell::Num(s as f64 / n as f64),
            Cell::Num(exact.probabilities[i]),
        ];
        if let Some(r) = &run {
            row.push(Cell::Num(r.spin_frequencies[i]));
        }
        t.push(row);
    }
    report.tables.push(t);
    if let Some(r) = run {
        let mut s = Table::new(
            "metropolis",
            &["steps", "burn_in", "seed", "acceptance_rate", "tv"],
        );
        s.push(vec![
            r.steps.into(),
            r.burn_in.into(),
            Cell::Text(r.seed.to_string()),
            r.acceptance_rate.into(),
            r.total_variation(&exact.probabilities).into(),
        ]);
        report.tables.push(s);
    }
    Ok(report)
}

fn oracle(
    ensemble: EnsembleArg,
    beta: Option<f64>,
    u: Option<f64>,
    k: f64,
    grid_step: f64,
    tol: f64,
) -> anyhow::Result<Report> {
    let mut report = Report::new("oracle");
    let (objective, solver) = match ensemble {
        EnsembleArg::Canonical => {
            let beta = beta.ok_or_else(|| domain("--beta is required for --ensemble canonical".into()))?;
            report.param("ensemble", "canonical");
            report.num("beta", beta);
            let params = CanonicalParams::new(beta, k)?;
            (
                OracleObjective::Canonical(params),
                solve_canonical(&params)?.macrostates,
            )
        }
        EnsembleArg::Micro => {
            let u = u.ok_or_else(|| domain("--u is required for --ensemble micro".into()))?;
            if !(1e-14..=1e-2).contains(&tol) {
                return Err(domain(format!("--tol must lie in [1e-14, 1e-2], got {tol}")));
            }
            report.param("ensemble", "micro");
            report.num("u", u);
            let params = MicroParams::new(u, k)?;
            (
                OracleObjective::Micro { params, tol },
                solve_micro(&params)?.macrostates,
            )
        }
    };
    report.num("K", k);
    report.num("grid-step", grid_step);
    if ensemble == EnsembleArg::Micro {
        report.num("tol", tol);
    }
    let res = simplex_oracle(&objective, grid_step)?;
    let mut cols = vec!["source"];
    cols.extend(macrostate_columns());
    cols.push("mean");
    let mut points = Table::new("points", &cols);
    let mut sorted = res.points.clone();
    sorted.sort_by(|a, b| a.mean().total_cmp(&b.mean()));
    for (source, set) in [("oracle", &sorted), ("solver", &solver)] {
        for nu in set {
            let mut row = vec![Cell::from(source)];
            row.extend(macrostate_cells(nu));
            row.push(nu.mean().into());
            points.push(row);
        }
    }
    let mut summary = Table::new("summary", &["grid_step", "oracle_min", "max_distance"]);
    summary.push(vec![
        res.grid_step.into(),
        res.min_value.into(),
        res.hausdorff(&solver).into(),
    ]);
    report.tables = vec![points, summary];
    Ok(report)
}
