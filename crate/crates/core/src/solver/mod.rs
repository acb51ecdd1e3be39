//! Residual-velocity iteration for the porous-media free-boundary problem.
//!
//! Each step maps the two subdomains on either side of the current interface
//! `y = h(x)` onto rectangles, solves the four coupled Laplace problems with
//! four of the five interface conditions enforced, and moves the interface
//! vertically by the residual of the fifth.

mod assemble;
mod curve;
mod grid;
mod linear;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

pub use assemble::{
    assemble, enforced_interface_residuals, interface_residual, normal_derivative_terms,
    LinearSystem, RowKind,
};
pub use curve::{InterfaceCurve, MAP_EPS_FRACTION};
pub use grid::{
    build_mapped_operator, physical_y, unknown, Field, FieldState, MappedGrid, StencilCoefficients,
};
pub use linear::{backward_error, solve_fixed_boundary, FixedBoundarySolver};

use crate::interface::Domain;
use crate::porous::{f, flat_base_state, ExactSolution, PorousError, PorousParams};

/// A run is declared diverged once `max|R|` exceeds this.
pub const DIVERGENCE_THRESHOLD: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
    #[error("subdomain collapsed: h = {height} at interface node {index}")]
    MappingSingular { index: usize, height: f64 },
    #[error("linear solve failed (relative residual {residual:e}): {detail}")]
    SolveFailure { residual: f64, detail: String },
    #[error("interface residual is not finite")]
    NonFiniteResidual,
    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<SolverError>,
    },
    #[error(transparent)]
    Porous(#[from] PorousError),
}

impl SolverError {
    /// The underlying error with any step annotation removed.
    pub fn root(&self) -> &SolverError {
        match self {
            SolverError::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}

/// Which interface condition is left unenforced and used as the velocity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ResidualChoice {
    /// Mass conservation `Pₙ − T⁻ₙ − sₙ = 0` (the physical velocity).
    Neumann,
    /// Saturation `s = 0`.
    Dirichlet,
}

impl fmt::Display for ResidualChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResidualChoice::Neumann => "neumann",
            ResidualChoice::Dirichlet => "dirichlet",
        })
    }
}

impl FromStr for ResidualChoice {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, SolverError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "neumann" | "vn" => Ok(ResidualChoice::Neumann),
            "dirichlet" | "vd" => Ok(ResidualChoice::Dirichlet),
            other => Err(SolverError::InvalidConfig(format!(
                "unknown residual choice `{other}` (expected neumann or dirichlet)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub choice: ResidualChoice,
    pub stop_tolerance: f64,
    pub solver_tolerance: f64,
    pub params: PorousParams,
}

impl RunConfig {
    /// Reference data with `t_end = 24` and default tolerances.
    pub fn new(n: usize, dt: f64, choice: ResidualChoice) -> Self {
        RunConfig {
            n,
            dt,
            t_end: 24.0,
            choice,
            stop_tolerance: 1e-9,
            solver_tolerance: 1e-10,
            params: PorousParams::reference(),
        }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.n < 4 {
            return Err(SolverError::InvalidConfig(format!(
                "N must be at least 4, got {}",
                self.n
            )));
        }
        let positive = [
            ("dt", self.dt),
            ("t_end", self.t_end),
            ("stop tolerance", self.stop_tolerance),
            ("solver tolerance", self.solver_tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(SolverError::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Max-norm errors against the closed-form solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorMetrics {
    pub err_inf: f64,
    pub err_t: f64,
    pub err_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub t: f64,
    pub max_residual: f64,
    pub err_inf: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub config: RunConfig,
    pub trace: Vec<TraceEntry>,
    pub curve: InterfaceCurve,
    pub state: FieldState,
    /// `None` when `K⁺ ≠ K⁻` (no closed form to compare with).
    pub errors: Option<ErrorMetrics>,
    pub converged: bool,
    pub diverged: bool,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn final_residual(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |e| e.max_residual)
    }

    pub fn steps(&self) -> usize {
        self.trace.last().map_or(0, |e| e.step)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(
        0.0f64,
        |m, a| if a.is_nan() { f64::NAN } else { m.max(a.abs()) },
    )
}

/// Exact interface heights at the curve's nodes.
fn exact_heights(exact: &ExactSolution, n: usize) -> Result<Vec<f64>, PorousError> {
    (0..n)
        .map(|i| exact.interface(curve::node_x(n, i), 1e-15))
        .collect()
}

/// `errInf` over interface nodes, `errT` over the temperature nodes of both
/// domains mapped to physical coordinates, `errS` over the lower domain.
pub fn error_metrics(
    state: &FieldState,
    curve: &InterfaceCurve,
    params: &PorousParams,
) -> Result<ErrorMetrics, PorousError> {
    let exact = ExactSolution::new(params)?;
    let heights = exact_heights(&exact, curve.len())?;
    Ok(metrics_with(&exact, &heights, state, curve))
}

fn metrics_with(
    exact: &ExactSolution,
    heights: &[f64],
    state: &FieldState,
    curve: &InterfaceCurve,
) -> ErrorMetrics {
    let n = curve.len();
    let err_inf = curve
        .heights()
        .iter()
        .zip(heights)
        .fold(0.0f64, |m, (h, e)| m.max((h - e).abs()));
    // Nodes are compared at the same mapped coordinates: each node is
    // placed in the physical domain using the exact interface height.
    let exact_curve =
        InterfaceCurve::new(heights.to_vec(), curve.length()).expect("exact interface is interior");
    let (mut err_t, mut err_s) = (0.0f64, 0.0f64);
    for j in 0..n {
        for i in 0..n {
            let x = curve.x(i);
            let up = exact.fields(x, physical_y(&exact_curve, Domain::Upper, i, j));
            let low = exact.fields(x, physical_y(&exact_curve, Domain::Lower, i, j));
            err_t = err_t
                .max((state.get(Field::TPlus, i, j) - up.t_plus).abs())
                .max((state.get(Field::TMinus, i, j) - low.t_minus).abs());
            err_s = err_s.max((state.get(Field::Saturation, i, j) - low.s).abs());
        }
    }
    ErrorMetrics {
        err_inf,
        err_t,
        err_s,
    }
}

/// Runs the residual-velocity iteration from the flat interface at the
/// height implied by the mean heat flux.
///
/// Stops when `max|R| ≤ stop_tolerance`, when `t ≥ t_end`, or when
/// `max|R|` exceeds [`DIVERGENCE_THRESHOLD`] (reported as diverged).
pub fn run_to_steady(config: &RunConfig) -> Result<RunReport, SolverError> {
    config.validate()?;
    let started = Instant::now();
    let flat = flat_base_state(&config.params)?;
    let length = config.params.length_f64();
    let mut curve = InterfaceCurve::flat(config.n, f(&flat.y0), length)?;
    let exact = ExactSolution::new(&config.params).ok();
    let reference = exact
        .as_ref()
        .map(|e| exact_heights(e, config.n))
        .transpose()?;
    let mut solver = FixedBoundarySolver::new();
    let mut trace = Vec::new();
    let mut step = 0usize;
    let at = |step: usize| {
        move |e: SolverError| SolverError::AtStep {
            step,
            source: Box::new(e),
        }
    };
    loop {
        let t = step as f64 * config.dt;
        let system = assemble(&config.params, &curve, config.choice).map_err(at(step))?;
        let state = solver
            .solve(&system, config.solver_tolerance)
            .map_err(at(step))?;
        let residual = interface_residual(&state, &curve, config.choice);
        let max_residual = max_abs(&residual);
        let err_inf = reference.as_ref().map(|r| {
            curve
                .heights()
                .iter()
                .zip(r)
                .fold(0.0f64, |m, (h, e)| m.max((h - e).abs()))
        });
        trace.push(TraceEntry {
            step,
            t,
            max_residual,
            err_inf,
        });
        let diverged = max_residual.is_nan() || max_residual > DIVERGENCE_THRESHOLD;
        let converged = max_residual <= config.stop_tolerance;
        if diverged || converged || t >= config.t_end - 1e-9 * config.dt {
            let errors = match (&exact, &reference) {
                (Some(e), Some(r)) => Some(metrics_with(e, r, &state, &curve)),
                _ => None,
            };
            return Ok(RunReport {
                config: config.clone(),
                trace,
                curve,
                state,
                errors,
                converged: converged && !diverged,
                diverged,
                wall_time: started.elapsed(),
            });
        }
        curve = curve.evolve(&residual, config.dt).map_err(at(step))?;
        step += 1;
    }
}

/// Ratios `max|R|ₖ₊₁ / max|R|ₖ` of consecutive trace entries.
pub fn decay_factors(trace: &[TraceEntry]) -> Vec<f64> {
    trace
        .windows(2)
        .map(|w| w[1].max_residual / w[0].max_residual)
        .collect()
}
