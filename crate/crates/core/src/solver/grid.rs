use crate::interface::Domain;

use super::curve::InterfaceCurve;

/// Discrete unknowns, in storage order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    TPlus,
    Pressure,
    TMinus,
    Saturation,
}

impl Field {
    pub const ALL: [Field; 4] = [
        Field::TPlus,
        Field::Pressure,
        Field::TMinus,
        Field::Saturation,
    ];

    pub fn domain(self) -> Domain {
        match self {
            Field::TPlus | Field::Pressure => Domain::Upper,
            Field::TMinus | Field::Saturation => Domain::Lower,
        }
    }
}

/// Coefficients of the mapped Laplacian
/// `a_xx·u_xx + a_yy·u_yy + a_xy·u_xy + a_y·u_y` at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StencilCoefficients {
    pub a_xx: f64,
    pub a_yy: f64,
    pub a_xy: f64,
    pub a_y: f64,
}

/// Both subdomains mapped onto `N×N` node rectangles. In the upper domain
/// `y₁ = 1 + (y − h)/(L − h)` with row `j = 0` on the interface; in the lower
/// domain `y₂ = y/h` with row `j = N − 1` on the interface.
#[derive(Clone, Debug, PartialEq)]
pub struct MappedGrid {
    n: usize,
    dx: f64,
    dy: f64,
    upper: Vec<StencilCoefficients>,
    lower: Vec<StencilCoefficients>,
}

impl MappedGrid {
    pub fn new(curve: &InterfaceCurve) -> Self {
        let n = curve.len();
        MappedGrid {
            n,
            dx: curve.dx(),
            dy: 1.0 / (n - 1) as f64,
            upper: build_mapped_operator(curve, Domain::Upper),
            lower: build_mapped_operator(curve, Domain::Lower),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn coefficients(&self, domain: Domain, i: usize, j: usize) -> StencilCoefficients {
        let table = match domain {
            Domain::Upper => &self.upper,
            Domain::Lower => &self.lower,
        };
        table[j * self.n + i]
    }
}

/// Row index of the interface in each domain's node rectangle.
pub fn interface_row(domain: Domain, n: usize) -> usize {
    match domain {
        Domain::Upper => 0,
        Domain::Lower => n - 1,
    }
}

/// Physical height of node `(i, j)`.
pub fn physical_y(curve: &InterfaceCurve, domain: Domain, i: usize, j: usize) -> f64 {
    let t = j as f64 / (curve.len() - 1) as f64;
    let h = curve.heights()[i];
    match domain {
        Domain::Upper => h + t * (curve.length() - h),
        Domain::Lower => h * t,
    }
}

/// Mapped Laplacian coefficients at every node of one subdomain, stored
/// row-major (`j·N + i`).
pub fn build_mapped_operator(curve: &InterfaceCurve, domain: Domain) -> Vec<StencilCoefficients> {
    let n = curve.len();
    let dy = 1.0 / (n - 1) as f64;
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let h = curve.heights()[i];
            let hp = curve.slopes()[i];
            let hpp = curve.curvatures()[i];
            let c = match domain {
                Domain::Upper => {
                    // distance to the top in mapped units: 2 − y₁
                    let eta = 1.0 - j as f64 * dy;
                    let gap = curve.length() - h;
                    StencilCoefficients {
                        a_xx: 1.0,
                        a_yy: (1.0 + hp * hp * eta * eta) / (gap * gap),
                        a_xy: -2.0 * eta * hp / gap,
                        a_y: -(2.0 * hp * hp + hpp * gap) * eta / (gap * gap),
                    }
                }
                Domain::Lower => {
                    let y2 = j as f64 * dy;
                    StencilCoefficients {
                        a_xx: 1.0,
                        a_yy: (1.0 + hp * hp * y2 * y2) / (h * h),
                        a_xy: -2.0 * y2 * hp / h,
                        a_y: (2.0 * hp * hp - hpp * h) * y2 / (h * h),
                    }
                }
            };
            out.push(c);
        }
    }
    out
}

/// The four discrete fields, `N×N` nodes each.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    n: usize,
    values: Vec<f64>,
}

impl FieldState {
    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), 4 * n * n, "field state size");
        FieldState { n, values }
    }

    /// Fills every node from `f(field, i, j)`.
    pub fn from_fn(n: usize, f: impl Fn(Field, usize, usize) -> f64) -> Self {
        let mut values = vec![0.0; 4 * n * n];
        for field in Field::ALL {
            for j in 0..n {
                for i in 0..n {
                    values[unknown(n, field, i, j)] = f(field, i, j);
                }
            }
        }
        FieldState { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, field: Field, i: usize, j: usize) -> f64 {
        self.values[unknown(self.n, field, i, j)]
    }
}

/// Global index of node `(i, j)` of `field`.
pub fn unknown(n: usize, field: Field, i: usize, j: usize) -> usize {
    field as usize * n * n + j * n + i
}
