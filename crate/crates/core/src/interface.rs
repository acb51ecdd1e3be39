//! Interface-condition systems for "2+2" problems.
//!
//! Five mixed Dirichlet–Neumann conditions `G·Ũ = b` act on
//! `Ũ = (u⁺ₙ, u⁻ₙ, p⁺ₙ, p⁻ₙ, u⁺, u⁻, p⁺, p⁻)`. Columns 0–3 of `G` form the
//! Neumann block and columns 4–7 the Dirichlet block.

use std::fmt;

use num_traits::{One, Zero};

use crate::exact_linalg::{nullspace_basis, parse_rational, rank, rref, Matrix, Rational};

pub const CONDITIONS: usize = 5;
pub const UNKNOWNS: usize = 8;
/// Dimension of the kernel of a valid `G`, i.e. the number of global fluxes.
pub const FLUXES: usize = 3;

pub const VARIABLE_LABELS: [&str; UNKNOWNS] =
    ["u+_n", "u-_n", "p+_n", "p-_n", "u+", "u-", "p+", "p-"];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InterfaceError {
    #[error("interface conditions are dependent: rank(G) = {0}, expected 5")]
    RankDeficient(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceSystem {
    g: Matrix<Rational>,
    b: Vec<Rational>,
    flux_basis: Option<Matrix<Rational>>,
}

impl InterfaceSystem {
    /// Checks shapes only; call [`InterfaceSystem::validate`] for the rank.
    pub fn new(g: Matrix<Rational>, b: Vec<Rational>) -> Result<Self, InterfaceError> {
        if g.rows() != CONDITIONS || g.cols() != UNKNOWNS {
            return Err(InterfaceError::DimensionMismatch(format!(
                "G must be 5x8, got {}x{}",
                g.rows(),
                g.cols()
            )));
        }
        if b.len() != CONDITIONS {
            return Err(InterfaceError::DimensionMismatch(format!(
                "b must have 5 entries, got {}",
                b.len()
            )));
        }
        Ok(InterfaceSystem {
            g,
            b,
            flux_basis: None,
        })
    }

    /// Homogeneous system `G·Ũ = 0`.
    pub fn homogeneous(g: Matrix<Rational>) -> Result<Self, InterfaceError> {
        Self::new(g, vec![Rational::zero(); CONDITIONS])
    }

    /// Attaches a preferred kernel basis (columns) so that global fluxes `q`
    /// have a physical meaning. The basis must span the kernel of `G`.
    pub fn with_flux_basis(mut self, basis: Matrix<Rational>) -> Result<Self, InterfaceError> {
        if basis.rows() != UNKNOWNS || basis.cols() != FLUXES {
            return Err(InterfaceError::DimensionMismatch(format!(
                "flux basis must be 8x3, got {}x{}",
                basis.rows(),
                basis.cols()
            )));
        }
        if !(&self.g * &basis).is_zero() || rank(&basis) != FLUXES {
            return Err(InterfaceError::DimensionMismatch(
                "flux basis does not span the kernel of G".into(),
            ));
        }
        self.flux_basis = Some(basis);
        Ok(self)
    }

    pub fn g(&self) -> &Matrix<Rational> {
        &self.g
    }

    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    pub fn flux_basis(&self) -> Option<&Matrix<Rational>> {
        self.flux_basis.as_ref()
    }

    pub fn neumann_block(&self) -> Matrix<Rational> {
        self.g.column_block(0..4)
    }

    pub fn dirichlet_block(&self) -> Matrix<Rational> {
        self.g.column_block(4..8)
    }

    pub fn validate(&self) -> Result<(), InterfaceError> {
        match rank(&self.g) {
            CONDITIONS => Ok(()),
            r => Err(InterfaceError::RankDeficient(r)),
        }
    }

    pub fn classify(&self) -> Result<ClassReport, InterfaceError> {
        self.validate()?;
        let rank_gn = rank(&self.neumann_block());
        let rank_gd = rank(&self.dirichlet_block());
        let class = match rank_gn {
            4 => InterfaceClass::A,
            3 => InterfaceClass::B,
            2 => InterfaceClass::C,
            1 => InterfaceClass::D,
            r => unreachable!("rank(G) = 5 forces rank(G_N) >= 1, got {r}"),
        };
        let pure_dirichlet = CONDITIONS - rank_gn;
        let pure_neumann = CONDITIONS - rank_gd;
        let tilde = match class {
            InterfaceClass::A => pure_neumann == 4,
            InterfaceClass::B => pure_neumann == 3,
            InterfaceClass::C => pure_neumann == 2,
            InterfaceClass::D => false,
        };
        Ok(ClassReport {
            class,
            rank_gn,
            rank_gd,
            pure_dirichlet,
            pure_neumann,
            tilde,
        })
    }

    /// Kernel of `G` as an 8×3 matrix: the attached flux basis if present,
    /// otherwise the RREF free-variable basis.
    pub fn nullspace(&self) -> Result<Matrix<Rational>, InterfaceError> {
        if let Some(basis) = &self.flux_basis {
            return Ok(basis.clone());
        }
        let basis = nullspace_basis(&self.g);
        if basis.cols() != FLUXES {
            return Err(InterfaceError::DimensionMismatch(format!(
                "kernel of G has dimension {}, expected 3",
                basis.cols()
            )));
        }
        Ok(basis)
    }

    /// Particular solution of `G·r = b` with every free variable zero.
    pub fn particular_solution(&self) -> Result<Vec<Rational>, InterfaceError> {
        self.validate()?;
        let augmented = Matrix::from_fn(CONDITIONS, UNKNOWNS + 1, |i, j| {
            if j < UNKNOWNS {
                self.g[(i, j)].clone()
            } else {
                self.b[i].clone()
            }
        });
        let reduced = rref(&augmented);
        let mut r = vec![Rational::zero(); UNKNOWNS];
        for (row, &p) in reduced.pivots.iter().enumerate() {
            r[p] = reduced.reduced[(row, UNKNOWNS)].clone();
        }
        Ok(r)
    }

    /// Flat-interface base state `Ũ₀ = N(G)·q + r_P` and its shifted normal
    /// derivative vector `Ũ₀ₙ = S·Ũ₀`.
    pub fn base_solution(&self, q: &[Rational]) -> Result<BaseState, InterfaceError> {
        if q.len() != FLUXES {
            return Err(InterfaceError::DimensionMismatch(format!(
                "q must have 3 entries, got {}",
                q.len()
            )));
        }
        let particular = self.particular_solution()?;
        let homogeneous = self.nullspace()?.mul_vec(q);
        let u0: Vec<Rational> = homogeneous
            .into_iter()
            .zip(particular)
            .map(|(h, p)| h + p)
            .collect();
        let u0n = shift(&u0);
        Ok(BaseState {
            q: q.to_vec(),
            u0,
            u0n,
        })
    }

    /// Applies one allowed operation, returning the transformed system.
    /// Column operations change the meaning of the unknowns, so any attached
    /// flux basis is dropped.
    pub fn apply(&self, op: &AllowedOp) -> InterfaceSystem {
        let mut out = self.clone();
        match *op {
            AllowedOp::SwapRows(a, b) => {
                out.g.swap_rows(a, b);
                out.b.swap(a, b);
            }
            AllowedOp::ScaleRow { row, ref factor } => {
                for j in 0..UNKNOWNS {
                    out.g[(row, j)] = &out.g[(row, j)] * factor;
                }
                out.b[row] = &out.b[row] * factor;
            }
            AllowedOp::AddRow {
                target,
                source,
                ref factor,
            } => {
                for j in 0..UNKNOWNS {
                    let delta = factor * &out.g[(source, j)];
                    out.g[(target, j)] += delta;
                }
                let delta = factor * &out.b[source];
                out.b[target] += delta;
            }
            AllowedOp::RelabelDomains => {
                for (a, b) in [(0, 1), (2, 3), (4, 5), (6, 7)] {
                    out.g.swap_columns(a, b);
                }
                for i in 0..CONDITIONS {
                    for j in 0..4 {
                        out.g[(i, j)] = -out.g[(i, j)].clone();
                    }
                }
                out.flux_basis = None;
            }
            AllowedOp::Combine { domain, ref op } => {
                let (first, second) = domain.columns();
                // Identical operation on the Neumann pair and the Dirichlet pair.
                for (a, b) in [(first, second), (first + 4, second + 4)] {
                    apply_column_op(&mut out.g, a, b, op);
                }
                out.flux_basis = None;
            }
        }
        out
    }

    /// Replays a sequence of operations.
    pub fn apply_all<'a>(&self, ops: impl IntoIterator<Item = &'a AllowedOp>) -> InterfaceSystem {
        ops.into_iter().fold(self.clone(), |sys, op| sys.apply(op))
    }

    /// Canonical form reachable with the allowed operations, and the log of
    /// operations that produced it.
    ///
    /// Fixed pass order:
    /// 1. Gauss–Jordan on the Neumann block; pure Dirichlet rows sink to the
    ///    bottom.
    /// 2. Gauss–Jordan on the Dirichlet block of the pure Dirichlet rows.
    /// 3. In-domain variable swaps that move those Dirichlet pivots onto the
    ///    leading Dirichlet columns, followed by a repeat of passes 1 and 2.
    /// 4. Clear the Dirichlet pivot columns from the remaining rows.
    pub fn normal_form(&self) -> Result<(InterfaceSystem, Vec<AllowedOp>), InterfaceError> {
        self.validate()?;
        let mut reducer = Reducer {
            sys: self.clone(),
            log: Vec::new(),
        };
        let top = reducer.reduce_neumann_block();
        reducer.reduce_dirichlet_rows(top);
        reducer.align_dirichlet_pivots(top);
        reducer.clear_dirichlet_pivots(top);
        Ok((reducer.sys, reducer.log))
    }
}

impl fmt::Display for InterfaceSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# {}  | b", VARIABLE_LABELS.join(" "))?;
        for i in 0..CONDITIONS {
            let row: Vec<String> = self.g.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "{}  | {}", row.join(" "), self.b[i])?;
        }
        Ok(())
    }
}

impl std::str::FromStr for InterfaceSystem {
    type Err = InterfaceError;

    /// Five rows of eight rationals (`p/q` or integers) followed by one row
    /// of five rationals for `b`. `#` starts a comment; blank lines and
    /// commas are ignored.
    fn from_str(text: &str) -> Result<Self, InterfaceError> {
        let mut rows: Vec<(usize, Vec<Rational>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let values = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(parse_rational)
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| InterfaceError::Parse {
                    line: idx + 1,
                    message: e.to_string(),
                })?;
            rows.push((idx + 1, values));
        }
        if rows.len() != CONDITIONS + 1 {
            return Err(InterfaceError::Parse {
                line: rows.last().map_or(0, |r| r.0),
                message: format!(
                    "expected 6 data rows (5 for G, 1 for b), found {}",
                    rows.len()
                ),
            });
        }
        for (line, values) in &rows[..CONDITIONS] {
            if values.len() != UNKNOWNS {
                return Err(InterfaceError::Parse {
                    line: *line,
                    message: format!("G row needs 8 entries, found {}", values.len()),
                });
            }
        }
        let (b_line, b) = rows.pop().unwrap();
        if b.len() != CONDITIONS {
            return Err(InterfaceError::Parse {
                line: b_line,
                message: format!("b row needs 5 entries, found {}", b.len()),
            });
        }
        let g = Matrix::from_rows(rows.into_iter().map(|r| r.1).collect()).unwrap();
        InterfaceSystem::new(g, b)
    }
}

/// `S·Ũ`: rows 0–3 move to rows 4–7, the top half becomes zero.
pub fn shift(u: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); UNKNOWNS];
    out[4..].clone_from_slice(&u[..4]);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InterfaceClass {
    A,
    B,
    C,
    D,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassReport {
    pub class: InterfaceClass,
    pub rank_gn: usize,
    pub rank_gd: usize,
    pub pure_dirichlet: usize,
    pub pure_neumann: usize,
    pub tilde: bool,
}

impl ClassReport {
    /// `"C~"` style label.
    pub fn label(&self) -> String {
        format!("{:?}{}", self.class, if self.tilde { "~" } else { "" })
    }
}

impl fmt::Display for ClassReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "class {} (rank G_N = {}, rank G_D = {}, {} pure Dirichlet, {} pure Neumann)",
            self.label(),
            self.rank_gn,
            self.rank_gd,
            self.pure_dirichlet,
            self.pure_neumann
        )
    }
}

/// Flat-interface base solution `u₀ = y·r¹ + r⁰`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseState {
    pub q: Vec<Rational>,
    /// `(r¹, r⁰)` stacked.
    pub u0: Vec<Rational>,
    /// `(0, r¹)` stacked.
    pub u0n: Vec<Rational>,
}

impl BaseState {
    pub fn slopes(&self) -> &[Rational] {
        &self.u0[..4]
    }

    pub fn values(&self) -> &[Rational] {
        &self.u0[4..]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Domain {
    Upper,
    Lower,
}

impl Domain {
    /// Neumann-block columns of the `u` and `p` unknowns of this domain.
    fn columns(self) -> (usize, usize) {
        match self {
            Domain::Upper => (0, 2),
            Domain::Lower => (1, 3),
        }
    }
}

/// Column operation within one domain. `First` is the `u` variable and
/// `Second` the `p` variable of that domain.
#[derive(Clone, Debug, PartialEq)]
pub enum ColumnOp {
    Swap,
    ScaleFirst(Rational),
    ScaleSecond(Rational),
    /// first += factor · second
    AddSecondToFirst(Rational),
    /// second += factor · first
    AddFirstToSecond(Rational),
}

/// The four allowed operations: row operations, domain relabelling, and
/// in-domain column combinations applied identically to both blocks.
#[derive(Clone, Debug, PartialEq)]
pub enum AllowedOp {
    SwapRows(usize, usize),
    ScaleRow {
        row: usize,
        factor: Rational,
    },
    /// row `target` += factor · row `source`
    AddRow {
        target: usize,
        source: usize,
        factor: Rational,
    },
    /// Swap columns (0,1), (2,3), (4,5), (6,7) and negate columns 0–3.
    RelabelDomains,
    Combine {
        domain: Domain,
        op: ColumnOp,
    },
}

impl fmt::Display for AllowedOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AllowedOp::SwapRows(a, b) => write!(f, "swap rows {} and {}", a + 1, b + 1),
            AllowedOp::ScaleRow { row, factor } => write!(f, "scale row {} by {}", row + 1, factor),
            AllowedOp::AddRow {
                target,
                source,
                factor,
            } => write!(f, "row {} += ({}) * row {}", target + 1, factor, source + 1),
            AllowedOp::RelabelDomains => write!(f, "relabel domains"),
            AllowedOp::Combine { domain, op } => write!(f, "{domain:?} domain: {op:?}"),
        }
    }
}

fn apply_column_op(g: &mut Matrix<Rational>, a: usize, b: usize, op: &ColumnOp) {
    match op {
        ColumnOp::Swap => g.swap_columns(a, b),
        ColumnOp::ScaleFirst(f) => (0..g.rows()).for_each(|i| g[(i, a)] = &g[(i, a)] * f),
        ColumnOp::ScaleSecond(f) => (0..g.rows()).for_each(|i| g[(i, b)] = &g[(i, b)] * f),
        ColumnOp::AddSecondToFirst(f) => (0..g.rows()).for_each(|i| {
            let delta = f * &g[(i, b)];
            g[(i, a)] += delta;
        }),
        ColumnOp::AddFirstToSecond(f) => (0..g.rows()).for_each(|i| {
            let delta = f * &g[(i, a)];
            g[(i, b)] += delta;
        }),
    }
}

struct Reducer {
    sys: InterfaceSystem,
    log: Vec<AllowedOp>,
}

impl Reducer {
    fn apply(&mut self, op: AllowedOp) {
        let trivial = match &op {
            AllowedOp::SwapRows(a, b) => a == b,
            AllowedOp::ScaleRow { factor, .. } => factor.is_one(),
            AllowedOp::AddRow { factor, .. } => factor.is_zero(),
            _ => false,
        };
        if !trivial {
            self.sys = self.sys.apply(&op);
            self.log.push(op);
        }
    }

    fn entry(&self, i: usize, j: usize) -> &Rational {
        &self.sys.g[(i, j)]
    }

    /// Gauss–Jordan over `rows` restricted to `cols`; returns the pivot
    /// columns found.
    fn gauss_jordan(
        &mut self,
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
    ) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = rows.start;
        for c in cols {
            if r == rows.end {
                break;
            }
            let Some(p) = (r..rows.end).find(|&i| !self.entry(i, c).is_zero()) else {
                continue;
            };
            self.apply(AllowedOp::SwapRows(r, p));
            let factor = self.entry(r, c).recip();
            self.apply(AllowedOp::ScaleRow { row: r, factor });
            for i in rows.clone() {
                if i != r {
                    let factor = -self.entry(i, c).clone();
                    self.apply(AllowedOp::AddRow {
                        target: i,
                        source: r,
                        factor,
                    });
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Returns the number of rows with a nonzero Neumann block.
    fn reduce_neumann_block(&mut self) -> usize {
        self.gauss_jordan(0..CONDITIONS, 0..4).len()
    }

    fn reduce_dirichlet_rows(&mut self, top: usize) -> Vec<usize> {
        self.gauss_jordan(top..CONDITIONS, 4..UNKNOWNS)
    }

    fn align_dirichlet_pivots(&mut self, top: usize) {
        let target: Vec<usize> = (4..4 + CONDITIONS - top).collect();
        let bottom_pivots = |sys: &InterfaceSystem| {
            let block =
                Matrix::from_fn(CONDITIONS - top, 4, |i, j| sys.g[(top + i, 4 + j)].clone());
            rref(&block)
                .pivots
                .iter()
                .map(|p| p + 4)
                .collect::<Vec<_>>()
        };
        let candidates: [&[Domain]; 4] = [
            &[],
            &[Domain::Upper],
            &[Domain::Lower],
            &[Domain::Upper, Domain::Lower],
        ];
        let mut best: Option<(&[Domain], Vec<usize>)> = None;
        for swaps in candidates {
            let trial = swaps.iter().fold(self.sys.clone(), |s, &domain| {
                s.apply(&AllowedOp::Combine {
                    domain,
                    op: ColumnOp::Swap,
                })
            });
            let pivots = bottom_pivots(&trial);
            if pivots == target {
                best = Some((swaps, pivots));
                break;
            }
            if best.as_ref().is_none_or(|(_, p)| pivots < *p) {
                best = Some((swaps, pivots));
            }
        }
        let (swaps, _) = best.unwrap();
        if swaps.is_empty() {
            return;
        }
        for &domain in swaps {
            self.apply(AllowedOp::Combine {
                domain,
                op: ColumnOp::Swap,
            });
        }
        self.reduce_neumann_block();
        self.reduce_dirichlet_rows(top);
    }

    fn clear_dirichlet_pivots(&mut self, top: usize) {
        let pivots: Vec<(usize, usize)> = (top..CONDITIONS)
            .filter_map(|row| {
                (4..UNKNOWNS)
                    .find(|&c| !self.entry(row, c).is_zero())
                    .map(|c| (row, c))
            })
            .collect();
        for (source, c) in pivots {
            for target in 0..top {
                let factor = -self.entry(target, c) / self.entry(source, c);
                self.apply(AllowedOp::AddRow {
                    target,
                    source,
                    factor,
                });
            }
        }
    }
}
