//! Grid-refinement and timestep-stability tables for the porous example.
//!
//! Cells are independent runs and execute in parallel; rows are always
//! assembled in the fixed grid order so the output is reproducible.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::Duration;

use rayon::prelude::*;

use crate::report::{format_ratio, format_value};
use crate::solver::{run_to_steady, ErrorMetrics, ResidualChoice, RunConfig};

/// A steady run counts as failed once the interface error exceeds this.
pub const FAILURE_ERR_INF: f64 = 0.5;

pub const FULL_GRIDS: [usize; 3] = [10, 20, 40];
pub const QUICK_GRIDS: [usize; 2] = [10, 20];

/// Neumann timestep of the refinement table.
pub const NEUMANN_DT: f64 = 0.02;
/// Dirichlet timestep used everywhere.
pub const DIRICHLET_DT: f64 = 0.2;

/// Neumann timesteps probed at each grid size, largest first.
pub fn neumann_sweep(n: usize) -> &'static [f64] {
    match n {
        10 => &[0.2, 0.15, 0.12],
        20 => &[0.12, 0.08, 0.06],
        40 => &[0.06, 0.04, 0.03],
        _ => &[],
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSpec {
    pub n: usize,
    pub dt: f64,
    pub choice: ResidualChoice,
}

impl CellSpec {
    fn key(&self) -> (usize, u64, ResidualChoice) {
        (self.n, self.dt.to_bits(), self.choice)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Converged,
    NotConverged,
    Diverged,
}

impl CellStatus {
    pub fn label(self) -> &'static str {
        match self {
            CellStatus::Converged => "converged",
            CellStatus::NotConverged => "not-converged",
            CellStatus::Diverged => "diverged",
        }
    }
}

/// Outcome of one run. Solver errors (a collapsed subdomain, a failed
/// factorization) are folded into the diverged status with the message kept.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub spec: CellSpec,
    pub status: CellStatus,
    pub errors: Option<ErrorMetrics>,
    pub steps: usize,
    pub failure: Option<String>,
    pub wall_time: Duration,
}

impl CellResult {
    /// Diverged, aborted, or steady with `errInf > 0.5`.
    pub fn failed(&self) -> bool {
        self.status == CellStatus::Diverged
            || self
                .errors
                .is_none_or(|e| e.err_inf.is_nan() || e.err_inf > FAILURE_ERR_INF)
    }

    pub fn converged(&self) -> bool {
        self.status == CellStatus::Converged
    }
}

fn velocity_tag(choice: ResidualChoice) -> &'static str {
    match choice {
        ResidualChoice::Neumann => "VN",
        ResidualChoice::Dirichlet => "VD",
    }
}

pub fn run_cell(spec: CellSpec, template: &RunConfig) -> CellResult {
    let config = RunConfig {
        n: spec.n,
        dt: spec.dt,
        choice: spec.choice,
        ..template.clone()
    };
    match run_to_steady(&config) {
        Ok(report) => CellResult {
            spec,
            status: if report.diverged {
                CellStatus::Diverged
            } else if report.converged {
                CellStatus::Converged
            } else {
                CellStatus::NotConverged
            },
            errors: report.errors,
            steps: report.steps(),
            failure: None,
            wall_time: report.wall_time,
        },
        Err(e) => CellResult {
            spec,
            status: CellStatus::Diverged,
            errors: None,
            steps: match &e {
                crate::solver::SolverError::AtStep { step, .. } => *step,
                _ => 0,
            },
            failure: Some(e.to_string()),
            wall_time: Duration::ZERO,
        },
    }
}

/// Runs every distinct cell once, in parallel, returning results in input order.
pub fn run_cells(specs: &[CellSpec], template: &RunConfig) -> Vec<CellResult> {
    let mut unique: Vec<CellSpec> = Vec::new();
    for s in specs {
        if !unique.iter().any(|u| u.key() == s.key()) {
            unique.push(*s);
        }
    }
    let results: Vec<CellResult> = unique.par_iter().map(|s| run_cell(*s, template)).collect();
    let by_key: HashMap<_, _> = results.into_iter().map(|r| (r.spec.key(), r)).collect();
    specs.iter().map(|s| by_key[&s.key()].clone()).collect()
}

/// Errors at successive grid sizes for one velocity and timestep.
#[derive(Clone, Debug)]
pub struct ConvergenceTable {
    pub title: String,
    pub rows: Vec<CellResult>,
}

impl ConvergenceTable {
    /// `err(Nₖ₋₁)/err(Nₖ)` for each metric, `None` where either cell failed.
    pub fn ratios(&self) -> Vec<Option<[f64; 3]>> {
        let mut out = vec![None];
        for w in self.rows.windows(2) {
            out.push(match (&w[0].errors, &w[1].errors) {
                (Some(a), Some(b)) if !w[0].failed() && !w[1].failed() => {
                    Some([a.err_inf / b.err_inf, a.err_t / b.err_t, a.err_s / b.err_s])
                }
                _ => None,
            });
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,dt,velocity,status,err_inf,ratio_inf,err_t,ratio_t,err_s,ratio_s,steps\n",
        );
        for (i, row) in self.rows.iter().enumerate() {
            let (e, r) = cells(row, self.rows.get(i.wrapping_sub(1)), "");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                row.spec.n,
                row.spec.dt,
                velocity_tag(row.spec.choice),
                row.status.label(),
                e[0],
                r[0],
                e[1],
                r[1],
                e[2],
                r[2],
                row.steps
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.title);
        let _ = writeln!(
            out,
            "{:<8} {:>12} {:>8} {:>12} {:>8} {:>12} {:>8}",
            "grid", "errInf", "ratio", "errT", "ratio", "errS", "ratio"
        );
        for (i, row) in self.rows.iter().enumerate() {
            let (e, r) = cells(row, self.rows.get(i.wrapping_sub(1)), "***");
            let _ = writeln!(
                out,
                "{:<8} {:>12} {:>8} {:>12} {:>8} {:>12} {:>8}",
                format!("{0}x{0}", row.spec.n),
                e[0],
                r[0],
                e[1],
                r[1],
                e[2],
                r[2]
            );
        }
        out
    }
}

fn cells(row: &CellResult, prev: Option<&CellResult>, first: &str) -> ([String; 3], [String; 3]) {
    let errors = match (&row.errors, row.status) {
        (Some(e), s) if s != CellStatus::Diverged => [
            format_value(e.err_inf),
            format_value(e.err_t),
            format_value(e.err_s),
        ],
        _ => [
            "diverged".to_string(),
            "diverged".to_string(),
            "diverged".to_string(),
        ],
    };
    let ratios = match prev {
        None => [first.to_string(), first.to_string(), first.to_string()],
        Some(p) => match (&p.errors, &row.errors) {
            (Some(a), Some(b)) if !p.failed() && !row.failed() => [
                format_ratio(a.err_inf, b.err_inf),
                format_ratio(a.err_t, b.err_t),
                format_ratio(a.err_s, b.err_s),
            ],
            _ => ["-".to_string(), "-".to_string(), "-".to_string()],
        },
    };
    (errors, ratios)
}

/// Neumann timestep sweep alongside the Dirichlet run at each grid size.
#[derive(Clone, Debug)]
pub struct StabilityTable {
    pub rows: Vec<CellResult>,
}

impl StabilityTable {
    /// Largest converged Neumann timestep per grid size.
    pub fn max_stable_neumann_dt(&self) -> Vec<(usize, Option<f64>)> {
        let mut grids: Vec<usize> = self.rows.iter().map(|r| r.spec.n).collect();
        grids.dedup();
        grids
            .into_iter()
            .map(|n| {
                let dt = self
                    .rows
                    .iter()
                    .filter(|r| {
                        r.spec.n == n && r.spec.choice == ResidualChoice::Neumann && r.converged()
                    })
                    .map(|r| r.spec.dt)
                    .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
                (n, dt)
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,dt,velocity,status,err_inf,err_t,err_s,steps\n");
        for row in &self.rows {
            let (e, _) = cells(row, None, "");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                row.spec.n,
                row.spec.dt,
                velocity_tag(row.spec.choice),
                row.status.label(),
                e[0],
                e[1],
                e[2],
                row.steps
            );
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("Timestep stability of the residual velocities\n");
        let _ = writeln!(
            out,
            "{:<8} {:>8} {:>4} {:>14} {:>12} {:>12} {:>12}",
            "grid", "dt", "RV", "status", "errInf", "errT", "errS"
        );
        for row in &self.rows {
            let (e, _) = cells(row, None, "");
            let _ = writeln!(
                out,
                "{:<8} {:>8} {:>4} {:>14} {:>12} {:>12} {:>12}",
                format!("{0}x{0}", row.spec.n),
                format!("{:.2}", row.spec.dt),
                velocity_tag(row.spec.choice),
                row.status.label(),
                e[0],
                e[1],
                e[2]
            );
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct TableSet {
    pub neumann: ConvergenceTable,
    pub dirichlet: ConvergenceTable,
    pub stability: StabilityTable,
}

impl TableSet {
    pub fn to_text(&self) -> String {
        format!(
            "{}\n{}\n{}",
            self.neumann.to_text(),
            self.dirichlet.to_text(),
            self.stability.to_text()
        )
    }
}

fn refinement_specs(grids: &[usize], dt: f64, choice: ResidualChoice) -> Vec<CellSpec> {
    grids.iter().map(|&n| CellSpec { n, dt, choice }).collect()
}

fn stability_specs(grids: &[usize]) -> Vec<CellSpec> {
    let mut out = Vec::new();
    for &n in grids {
        for &dt in neumann_sweep(n) {
            out.push(CellSpec {
                n,
                dt,
                choice: ResidualChoice::Neumann,
            });
        }
        out.push(CellSpec {
            n,
            dt: DIRICHLET_DT,
            choice: ResidualChoice::Dirichlet,
        });
    }
    out
}

/// Runs all three tables on `grids` using `template` for everything except
/// `N`, `Δt` and the velocity.
pub fn run_tables(template: &RunConfig, grids: &[usize]) -> TableSet {
    let t1 = refinement_specs(grids, NEUMANN_DT, ResidualChoice::Neumann);
    let t2 = refinement_specs(grids, DIRICHLET_DT, ResidualChoice::Dirichlet);
    let t3 = stability_specs(grids);
    let all: Vec<CellSpec> = t1.iter().chain(&t2).chain(&t3).copied().collect();
    let mut results = run_cells(&all, template).into_iter();
    let mut take = |k: usize| results.by_ref().take(k).collect::<Vec<_>>();
    let neumann = take(t1.len());
    let dirichlet = take(t2.len());
    let stability = take(t3.len());
    TableSet {
        neumann: ConvergenceTable {
            title: format!("Grid refinement, Neumann residual velocity (dt = {NEUMANN_DT})"),
            rows: neumann,
        },
        dirichlet: ConvergenceTable {
            title: format!("Grid refinement, Dirichlet residual velocity (dt = {DIRICHLET_DT})"),
            rows: dirichlet,
        },
        stability: StabilityTable { rows: stability },
    }
}
