use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use fbplab::interface::VARIABLE_LABELS;
use fbplab::porous::{exact_interface, flat_base_state};
use fbplab::report::{format_value, run_csv, trace_csv};
use fbplab::solver::run_to_steady;
use fbplab::stability::{rank_velocities, StabilityCategory, StabilityError};
use fbplab::tables::{run_tables, FULL_GRIDS, QUICK_GRIDS};

use crate::config::{Config, Fluxes, OutputSettings, SystemSource};
use crate::error::CliError;

/// Result of a command that completed without a usage or runtime error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    IllPosed,
    Degenerate,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::IllPosed => 2,
            Outcome::Degenerate => 3,
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(path, e))
}

/// Writes the enabled formats into the output directory, if one is set.
fn emit(
    output: &OutputSettings,
    text: &[(&str, &str)],
    csv: &[(&str, &str)],
) -> Result<(), CliError> {
    let Some(dir) = &output.directory else {
        return Ok(());
    };
    fs::create_dir_all(dir).map_err(|e| CliError::Io(dir.clone(), e))?;
    if output.text {
        for (name, contents) in text {
            write_file(dir, name, contents)?;
        }
    }
    if output.csv {
        for (name, contents) in csv {
            write_file(dir, name, contents)?;
        }
    }
    Ok(())
}

fn describe_source(config: &Config) -> String {
    match &config.source {
        SystemSource::Porous => format!(
            "builtin porous (K+ = {}, K- = {})",
            config.params.k_plus(),
            config.params.k_minus()
        ),
        SystemSource::MatrixFile(p) => format!("matrix file {}", p.display()),
    }
}

pub fn analyze(config: &Config) -> Result<Outcome, CliError> {
    let sys = &config.system;
    let mut out = String::new();
    let _ = writeln!(out, "system: {}", describe_source(config));
    let _ = write!(out, "{sys}");
    let class = sys.classify()?;
    let _ = writeln!(out, "{class}");
    let (normal, log) = sys.normal_form()?;
    let _ = writeln!(out, "normal form ({} operations):", log.len());
    let _ = write!(out, "{normal}");
    let basis = sys.nullspace()?;
    let _ = writeln!(
        out,
        "nullspace basis (rows, ordered {}):",
        VARIABLE_LABELS.join(" ")
    );
    let _ = write!(out, "{}", basis.transpose());

    let q = match &config.fluxes {
        Fluxes::Explicit(q) => q.clone(),
        Fluxes::FromData => match config.source {
            SystemSource::Porous => flat_base_state(&config.params)
                .map_err(|e| CliError::Unsupported(format!("no flat base state: {e}")))?
                .base
                .q
                .clone(),
            SystemSource::MatrixFile(_) => {
                return Err(CliError::Unsupported(
                    "q = \"from-data\" needs the builtin porous system; give q explicitly".into(),
                ))
            }
        },
    };
    let q_text: Vec<String> = q.iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "q = ({})", q_text.join(", "));
    let _ = writeln!(out, "mode: {}-D", config.mode.dimension());

    let report = match rank_velocities(sys, &q, &config.candidates, config.mode) {
        Ok(r) => r,
        Err(e @ (StabilityError::DegenerateGM | StabilityError::AllDegenerate)) => {
            let _ = writeln!(out, "DEGENERATE: {e}");
            print!("{out}");
            emit(&config.output, &[("analysis.txt", &out)], &[])?;
            return Ok(Outcome::Degenerate);
        }
        Err(e) => return Err(e.into()),
    };
    let _ = write!(out, "{report}");
    let best = report.best();
    let outcome = if report.ill_posed {
        let _ = writeln!(out, "verdict: ill-posed");
        Outcome::IllPosed
    } else if best.category == StabilityCategory::Unstable {
        let _ = writeln!(
            out,
            "verdict: well-posed, but no candidate velocity is stable"
        );
        Outcome::IllPosed
    } else {
        let _ = writeln!(
            out,
            "verdict: well-posed; best velocity {} ({}, lambda = {})",
            best.choice.label, best.category, best.profile
        );
        Outcome::Success
    };
    print!("{out}");
    emit(
        &config.output,
        &[("analysis.txt", &out)],
        &[("velocities.csv", &report.to_csv())],
    )?;
    Ok(outcome)
}

pub fn solve(config: &Config) -> Result<Outcome, CliError> {
    if !matches!(config.source, SystemSource::Porous) {
        return Err(CliError::Unsupported(
            "solve runs the builtin porous system only".into(),
        ));
    }
    let report = run_to_steady(&config.run)?;
    let c = &report.config;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "N = {}, dt = {}, velocity = {}, t_end = {}",
        c.n, c.dt, c.choice, c.t_end
    );
    let status = if report.diverged {
        "diverged"
    } else if report.converged {
        "converged"
    } else {
        "stopped at t_end"
    };
    let _ = writeln!(
        out,
        "{status} after {} steps, max|R| = {}, wall time {:.2} s",
        report.steps(),
        format_value(report.final_residual()),
        report.wall_time.as_secs_f64()
    );
    match report.errors {
        Some(e) => {
            let _ = writeln!(
                out,
                "errInf = {}  errT = {}  errS = {}",
                format_value(e.err_inf),
                format_value(e.err_t),
                format_value(e.err_s)
            );
        }
        None => {
            let _ = writeln!(out, "no exact solution for K+ != K-; errors not computed");
        }
    }
    let mut interface = String::from("x,h,h_exact\n");
    for (i, h) in report.curve.heights().iter().enumerate() {
        let x = report.curve.x(i);
        let exact = exact_interface(x, &c.params, 1e-15)
            .map(format_value)
            .unwrap_or_default();
        let _ = writeln!(
            interface,
            "{},{},{}",
            format_value(x),
            format_value(*h),
            exact
        );
    }
    print!("{out}");
    emit(
        &config.output,
        &[("report.txt", &out)],
        &[
            ("run.csv", &run_csv(&report)),
            ("trace.csv", &trace_csv(&report.trace)),
            ("interface.csv", &interface),
        ],
    )?;
    if report.diverged {
        return Err(CliError::Unsupported(format!(
            "run diverged: max|R| = {} exceeds the divergence threshold",
            format_value(report.final_residual())
        )));
    }
    Ok(Outcome::Success)
}

pub fn tables(config: &Config, quick: bool) -> Result<Outcome, CliError> {
    if !matches!(config.source, SystemSource::Porous) {
        return Err(CliError::Unsupported(
            "tables run the builtin porous system only".into(),
        ));
    }
    let grids: &[usize] = if quick { &QUICK_GRIDS } else { &FULL_GRIDS };
    let set = run_tables(&config.run, grids);
    let text = set.to_text();
    print!("{text}");
    emit(
        &config.output,
        &[("tables.txt", &text)],
        &[
            ("table1_neumann.csv", &set.neumann.to_csv()),
            ("table2_dirichlet.csv", &set.dirichlet.to_csv()),
            ("table3_stability.csv", &set.stability.to_csv()),
        ],
    )?;
    Ok(Outcome::Success)
}
