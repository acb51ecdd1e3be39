//! Fixed-format number rendering shared by every text and CSV writer.

use std::fmt::Write as _;

use crate::solver::{RunReport, TraceEntry};

/// Six significant digits; scientific notation when `0 < |v| < 1e-3`.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if a < 1e-3 {
        return format!("{v:.5e}");
    }
    let magnitude = a.log10().floor() as i32;
    let decimals = (5 - magnitude).max(0) as usize;
    let text = format!("{v:.decimals$}");
    // Rounding can carry into a new leading digit (9.999995 → 10.00000).
    let digits = text
        .trim_start_matches('-')
        .replace('.', "")
        .trim_start_matches('0')
        .len();
    if digits > 6 && decimals > 0 {
        format!("{v:.prec$}", prec = decimals - 1)
    } else {
        text
    }
}

/// Error ratio `coarse / fine` rounded to three decimals.
pub fn format_ratio(coarse: f64, fine: f64) -> String {
    format!("{:.3}", coarse / fine)
}

/// Per-step residual history: `step,t,max_residual,err_inf`.
pub fn trace_csv(trace: &[TraceEntry]) -> String {
    let mut out = String::from("step,t,max_residual,err_inf\n");
    for e in trace {
        let err = e.err_inf.map(format_value).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            e.step,
            format_value(e.t),
            format_value(e.max_residual),
            err
        );
    }
    out
}

/// One-row summary of a run. Wall time is left out so reruns compare equal.
pub fn run_csv(report: &RunReport) -> String {
    let c = &report.config;
    let (ei, et, es) = report
        .errors
        .map_or((String::new(), String::new(), String::new()), |e| {
            (
                format_value(e.err_inf),
                format_value(e.err_t),
                format_value(e.err_s),
            )
        });
    format!(
        "n,dt,velocity,steps,final_residual,converged,diverged,err_inf,err_t,err_s\n{},{},{},{},{},{},{},{},{},{}\n",
        c.n,
        c.dt,
        c.choice,
        report.steps(),
        format_value(report.final_residual()),
        report.converged,
        report.diverged,
        ei,
        et,
        es
    )
}
