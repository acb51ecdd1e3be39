use crate::interface::Domain;
use crate::porous::PorousParams;

use super::curve::InterfaceCurve;
use super::grid::{interface_row, unknown, Field, FieldState, MappedGrid};
use super::{ResidualChoice, SolverError};

/// What each row of the assembled system enforces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowKind {
    Laplace,
    /// `K⁺·∂T⁺/∂y = f₁` at the top.
    TopHeatFlux,
    /// `∂P/∂y = 0` at the top.
    TopNoFlux,
    /// `T⁻ = T₀` or `s = 1` at the bottom.
    BottomValue,
    /// `T⁺ = T⁻` on the interface.
    TemperatureContinuity,
    /// `P = T⁻` on the interface.
    PressureMatch,
    /// `K⁺T⁺ₙ − K⁻T⁻ₙ + sₙ = 0` on the interface.
    HeatBalance,
    /// `s = 0` on the interface.
    SaturationZero,
    /// `Pₙ − T⁻ₙ − sₙ = 0` on the interface.
    MassConservation,
}

/// Square sparse system in triplet form; row `k` belongs to unknown `k`.
/// The triplet order and positions depend only on `N`, so the sparsity
/// pattern is identical from one interface update to the next.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSystem {
    pub n: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    pub kinds: Vec<RowKind>,
}

impl LinearSystem {
    pub fn size(&self) -> usize {
        self.rhs.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.size()];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// `b − A·x` row by row.
    pub fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .map(|(ax, b)| b - ax)
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut sums = vec![0.0; self.size()];
        for &(r, _, v) in &self.entries {
            sums[r] += v.abs();
        }
        sums.into_iter().fold(0.0, f64::max)
    }
}

fn wrap(i: usize, delta: isize, n: usize) -> usize {
    (i as isize + delta).rem_euclid(n as isize) as usize
}

/// Nine-point mapped Laplacian at an interior node.
fn laplace_terms(grid: &MappedGrid, field: Field, i: usize, j: usize) -> [(usize, f64); 9] {
    let n = grid.n();
    let c = grid.coefficients(field.domain(), i, j);
    let (dx, dy) = (grid.dx(), grid.dy());
    let at = |di: isize, dj: isize| unknown(n, field, wrap(i, di, n), (j as isize + dj) as usize);
    let xx = c.a_xx / (dx * dx);
    let yy = c.a_yy / (dy * dy);
    let xy = c.a_xy / (4.0 * dx * dy);
    let y = c.a_y / (2.0 * dy);
    [
        (at(0, 0), -2.0 * xx - 2.0 * yy),
        (at(-1, 0), xx),
        (at(1, 0), xx),
        (at(0, -1), yy - y),
        (at(0, 1), yy + y),
        (at(1, 1), xy),
        (at(-1, -1), xy),
        (at(1, -1), -xy),
        (at(-1, 1), -xy),
    ]
}

/// Upward normal derivative of `field` at interface node `i`: a three-point
/// one-sided difference across the mapped normal coordinate plus a central
/// tangential difference along the interface row.
pub fn normal_derivative_terms(
    curve: &InterfaceCurve,
    field: Field,
    i: usize,
) -> [(usize, f64); 5] {
    let n = curve.len();
    let dy = 1.0 / (n - 1) as f64;
    let dx = curve.dx();
    let (h, hp) = (curve.heights()[i], curve.slopes()[i]);
    let norm = (1.0 + hp * hp).sqrt();
    let domain = field.domain();
    let j0 = interface_row(domain, n);
    let (metric, rows, weights) = match domain {
        Domain::Upper => (curve.length() - h, [0, 1, 2], [-3.0, 4.0, -1.0]),
        Domain::Lower => (h, [n - 1, n - 2, n - 3], [3.0, -4.0, 1.0]),
    };
    let normal = (1.0 + hp * hp) / (metric * 2.0 * dy * norm);
    let tangential = -hp / (2.0 * dx * norm);
    [
        (unknown(n, field, i, rows[0]), normal * weights[0]),
        (unknown(n, field, i, rows[1]), normal * weights[1]),
        (unknown(n, field, i, rows[2]), normal * weights[2]),
        (unknown(n, field, wrap(i, 1, n), j0), tangential),
        (unknown(n, field, wrap(i, -1, n), j0), -tangential),
    ]
}

fn eval_terms(terms: &[(usize, f64)], x: &[f64]) -> f64 {
    terms.iter().map(|&(k, w)| w * x[k]).sum()
}

fn scaled(terms: [(usize, f64); 5], factor: f64) -> impl Iterator<Item = (usize, f64)> {
    terms.into_iter().map(move |(k, w)| (k, factor * w))
}

fn mass_conservation_terms(curve: &InterfaceCurve, i: usize) -> Vec<(usize, f64)> {
    scaled(normal_derivative_terms(curve, Field::Pressure, i), 1.0)
        .chain(scaled(
            normal_derivative_terms(curve, Field::TMinus, i),
            -1.0,
        ))
        .chain(scaled(
            normal_derivative_terms(curve, Field::Saturation, i),
            -1.0,
        ))
        .collect()
}

/// Builds the `4N²` system for a fixed interface. Four interface conditions
/// are enforced; the one named by `choice` is left out and becomes the
/// residual.
pub fn assemble(
    params: &PorousParams,
    curve: &InterfaceCurve,
    choice: ResidualChoice,
) -> Result<LinearSystem, SolverError> {
    if (curve.length() - params.length_f64()).abs() > 1e-12 {
        return Err(SolverError::InvalidConfig(
            "curve and parameters disagree on L".into(),
        ));
    }
    let n = curve.len();
    let grid = MappedGrid::new(curve);
    let size = 4 * n * n;
    let mut entries = Vec::with_capacity(size * 10);
    let mut rhs = vec![0.0; size];
    let mut kinds = vec![RowKind::Laplace; size];
    let (kp, km) = (params.k_plus_f64(), params.k_minus_f64());
    let dy = grid.dy();
    for field in Field::ALL {
        for j in 0..n {
            for i in 0..n {
                let row = unknown(n, field, i, j);
                let mut push = |c: usize, v: f64| entries.push((row, c, v));
                let top = field.domain() == Domain::Upper && j == n - 1;
                let bottom = field.domain() == Domain::Lower && j == 0;
                let on_interface = j == interface_row(field.domain(), n);
                if top {
                    // second-order backward difference in y₁
                    let scale = match field {
                        Field::TPlus => kp / (curve.length() - curve.heights()[i]),
                        _ => 1.0,
                    };
                    for (jj, w) in [(n - 1, 3.0), (n - 2, -4.0), (n - 3, 1.0)] {
                        push(unknown(n, field, i, jj), scale * w / (2.0 * dy));
                    }
                    if field == Field::TPlus {
                        kinds[row] = RowKind::TopHeatFlux;
                        rhs[row] = params.heat_flux(curve.x(i));
                    } else {
                        kinds[row] = RowKind::TopNoFlux;
                    }
                } else if bottom {
                    push(row, 1.0);
                    kinds[row] = RowKind::BottomValue;
                    rhs[row] = match field {
                        Field::TMinus => params.t0_f64(),
                        _ => 1.0,
                    };
                } else if on_interface {
                    let lower_t = unknown(n, Field::TMinus, i, n - 1);
                    match field {
                        Field::TPlus => {
                            push(row, 1.0);
                            push(lower_t, -1.0);
                            kinds[row] = RowKind::TemperatureContinuity;
                        }
                        Field::Pressure => {
                            push(row, 1.0);
                            push(lower_t, -1.0);
                            kinds[row] = RowKind::PressureMatch;
                        }
                        Field::TMinus => {
                            let terms = scaled(normal_derivative_terms(curve, Field::TPlus, i), kp)
                                .chain(scaled(
                                    normal_derivative_terms(curve, Field::TMinus, i),
                                    -km,
                                ))
                                .chain(scaled(
                                    normal_derivative_terms(curve, Field::Saturation, i),
                                    1.0,
                                ));
                            for (c, v) in terms {
                                push(c, v);
                            }
                            kinds[row] = RowKind::HeatBalance;
                        }
                        Field::Saturation => match choice {
                            ResidualChoice::Neumann => {
                                push(row, 1.0);
                                kinds[row] = RowKind::SaturationZero;
                            }
                            ResidualChoice::Dirichlet => {
                                for (c, v) in mass_conservation_terms(curve, i) {
                                    push(c, v);
                                }
                                kinds[row] = RowKind::MassConservation;
                            }
                        },
                    }
                } else {
                    for (c, v) in laplace_terms(&grid, field, i, j) {
                        push(c, v);
                    }
                }
            }
        }
    }
    Ok(LinearSystem {
        n,
        entries,
        rhs,
        kinds,
    })
}

/// Value of the unenforced interface condition at each interface node.
pub fn interface_residual(
    state: &FieldState,
    curve: &InterfaceCurve,
    choice: ResidualChoice,
) -> Vec<f64> {
    let n = curve.len();
    (0..n)
        .map(|i| match choice {
            ResidualChoice::Neumann => {
                eval_terms(&mass_conservation_terms(curve, i), state.values())
            }
            ResidualChoice::Dirichlet => state.get(Field::Saturation, i, n - 1),
        })
        .collect()
}

/// Residual of every enforced interface row, grouped by row kind, for a
/// given nodal state (used to check truncation error of the discretization).
pub fn enforced_interface_residuals(
    system: &LinearSystem,
    state: &FieldState,
) -> Vec<(RowKind, f64)> {
    let r = system.residual(state.values());
    system
        .kinds
        .iter()
        .zip(r)
        .filter(|(k, _)| {
            matches!(
                k,
                RowKind::TemperatureContinuity
                    | RowKind::PressureMatch
                    | RowKind::HeatBalance
                    | RowKind::SaturationZero
                    | RowKind::MassConservation
            )
        })
        .map(|(k, r)| (*k, r))
        .collect()
}
