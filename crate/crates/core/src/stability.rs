//! Linear well-posedness and residual-velocity stiffness.
//!
//! A sinusoidal perturbation of wavenumber `s` (`|α|` in 2-D, `√(α²+β²)` in
//! 3-D) decays away from the interface in both domains, which gives the 8×4
//! matrix `M`. The interface problem is well posed when
//! `wᵀ·G·Ũ₀ₙ ≠ 0` for `w` spanning the left kernel of `G·M`, and a residual
//! velocity `v` evolves each mode at rate `λ(s) = wᵀGŨ₀ₙ / wᵀv`.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{Signed, Zero};

use crate::exact_linalg::{poly_left_nullspace_basis, Matrix, Poly, Rational};
use crate::interface::{BaseState, InterfaceError, InterfaceSystem, CONDITIONS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StabilityError {
    #[error(transparent)]
    Interface(#[from] InterfaceError),
    #[error("G*M loses rank identically in s; no unique left null vector")]
    DegenerateGM,
    #[error("velocity {0} is orthogonal to w: it carries no interface motion")]
    InvalidVelocity(String),
    #[error("every velocity candidate is degenerate")]
    AllDegenerate,
    #[error("velocity vector must have 5 entries, not all zero")]
    BadVelocity,
    #[error("spectral dimension must be 2 or 3, got {0}")]
    BadDimension(u32),
}

/// Dimension of the perturbation ansatz. `M` has the same form in both;
/// only the meaning of `s` changes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum SpectralMode {
    #[default]
    TwoD,
    ThreeD,
}

impl SpectralMode {
    pub fn dimension(self) -> u32 {
        match self {
            SpectralMode::TwoD => 2,
            SpectralMode::ThreeD => 3,
        }
    }

    pub fn wavenumber(self, alpha: f64, beta: f64) -> f64 {
        match self {
            SpectralMode::TwoD => alpha.abs(),
            SpectralMode::ThreeD => alpha.hypot(beta),
        }
    }
}

impl TryFrom<u32> for SpectralMode {
    type Error = StabilityError;

    fn try_from(d: u32) -> Result<Self, StabilityError> {
        match d {
            2 => Ok(SpectralMode::TwoD),
            3 => Ok(SpectralMode::ThreeD),
            other => Err(StabilityError::BadDimension(other)),
        }
    }
}

/// `M = [diag(−s, s, −s, s); I₄]`.
pub fn build_m(_mode: SpectralMode) -> Matrix<Poly> {
    Matrix::from_fn(8, 4, |i, j| {
        if i < 4 && i == j {
            let sign = if j % 2 == 0 { -1 } else { 1 };
            Poly::monomial(Rational::from_integer(sign.into()), 1)
        } else if i >= 4 && i - 4 == j {
            Poly::s().derivative()
        } else {
            Poly::zero()
        }
    })
}

fn constant_matrix(g: &Matrix<Rational>) -> Matrix<Poly> {
    g.map(|v| Poly::constant(v.clone()))
}

/// The left null vector of `G·M`, normalized so its last nonzero entry is 1.
pub fn left_null_w(sys: &InterfaceSystem, mode: SpectralMode) -> Result<Vec<Poly>, StabilityError> {
    sys.validate()?;
    let gm = &constant_matrix(sys.g()) * &build_m(mode);
    let kernel = poly_left_nullspace_basis(&gm);
    if kernel.rows() != 1 {
        return Err(StabilityError::DegenerateGM);
    }
    Ok(kernel.row(0).to_vec())
}

fn dot(w: &[Poly], v: &[Poly]) -> Poly {
    w.iter()
        .zip(v)
        .fold(Poly::zero(), |acc, (a, b)| acc + a * b)
}

#[derive(Clone, Debug, PartialEq)]
pub struct WellPosednessForm {
    pub poly: Poly,
    pub w: Vec<Poly>,
    pub base: BaseState,
}

impl WellPosednessForm {
    /// `true` when the form vanishes identically or at some wavenumber
    /// `s > 0`.
    pub fn is_ill_posed(&self) -> bool {
        self.poly.is_zero() || self.poly.positive_root_count() > 0
    }
}

pub fn wellposedness_form(
    sys: &InterfaceSystem,
    q: &[Rational],
    mode: SpectralMode,
) -> Result<WellPosednessForm, StabilityError> {
    let w = left_null_w(sys, mode)?;
    let base = sys.base_solution(q)?;
    let g_u0n: Vec<Poly> = sys
        .g()
        .mul_vec(&base.u0n)
        .into_iter()
        .map(Poly::constant)
        .collect();
    Ok(WellPosednessForm {
        poly: dot(&w, &g_u0n),
        w,
        base,
    })
}

/// Linear combination of the five interface-condition residuals used as the
/// normal velocity of the interface.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityChoice {
    pub label: String,
    pub v: Vec<Rational>,
}

impl VelocityChoice {
    pub fn new(label: impl Into<String>, v: Vec<Rational>) -> Result<Self, StabilityError> {
        if v.len() != CONDITIONS || v.iter().all(Zero::is_zero) {
            return Err(StabilityError::BadVelocity);
        }
        Ok(VelocityChoice {
            label: label.into(),
            v,
        })
    }

    /// The residual of condition `k` alone, labelled `e{k+1}`.
    pub fn unit(k: usize) -> Self {
        let mut v = vec![Rational::zero(); CONDITIONS];
        v[k] = Rational::from_integer(1.into());
        VelocityChoice {
            label: format!("e{}", k + 1),
            v,
        }
    }

    pub fn units() -> Vec<Self> {
        (0..CONDITIONS).map(Self::unit).collect()
    }
}

/// Sign of `λ(s)` over `s > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SignClass {
    Negative,
    Positive,
    SignChanging,
    /// `λ ≡ 0`: the base state itself is ill posed.
    Zero,
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SignClass::Negative => "negative",
            SignClass::Positive => "positive",
            SignClass::SignChanging => "sign-changing",
            SignClass::Zero => "zero",
        })
    }
}

/// `λ(s) = numerator / denominator` in lowest terms, denominator monic.
#[derive(Clone, Debug, PartialEq)]
pub struct StiffnessProfile {
    pub numerator: Poly,
    pub denominator: Poly,
    pub growth_order: i64,
    pub sign: SignClass,
}

impl StiffnessProfile {
    fn from_ratio(numerator: Poly, denominator: Poly) -> Self {
        let (numerator, denominator) = if numerator.is_zero() {
            (Poly::zero(), Poly::s().derivative())
        } else {
            let g = Poly::gcd(&numerator, &denominator);
            let n = numerator.exact_div(&g).expect("gcd divides numerator");
            let d = denominator.exact_div(&g).expect("gcd divides denominator");
            let lead = d.leading().expect("nonzero denominator").recip();
            (n.scale(&lead), d.scale(&lead))
        };
        let growth_order = match numerator.degree() {
            Some(dn) => dn as i64 - denominator.degree().unwrap_or(0) as i64,
            None => 0,
        };
        let sign = if numerator.is_zero() {
            SignClass::Zero
        } else if numerator.positive_root_count() > 0 || denominator.positive_root_count() > 0 {
            SignClass::SignChanging
        } else {
            // No roots or poles on s > 0, so any sample decides the sign.
            let one = Rational::from_integer(1.into());
            let value = numerator.eval(&one) / denominator.eval(&one);
            if value.is_negative() {
                SignClass::Negative
            } else {
                SignClass::Positive
            }
        };
        StiffnessProfile {
            numerator,
            denominator,
            growth_order,
            sign,
        }
    }

    /// `λ(s)`, or `None` at a pole.
    pub fn eval(&self, s: &Rational) -> Option<Rational> {
        let d = self.denominator.eval(s);
        (!d.is_zero()).then(|| self.numerator.eval(s) / d)
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        self.numerator.eval_f64(s) / self.denominator.eval_f64(s)
    }

    pub fn at_one(&self) -> Option<Rational> {
        self.eval(&Rational::from_integer(1.into()))
    }

    pub fn category(&self) -> StabilityCategory {
        match self.sign {
            SignClass::Negative if self.growth_order <= 0 => StabilityCategory::StableBounded,
            SignClass::Negative => StabilityCategory::StableStiff,
            _ => StabilityCategory::Unstable,
        }
    }
}

impl fmt::Display for StiffnessProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator.is_constant() {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "({}) / ({})", self.numerator, self.denominator)
        }
    }
}

pub fn stiffness(
    sys: &InterfaceSystem,
    q: &[Rational],
    v: &VelocityChoice,
    mode: SpectralMode,
) -> Result<StiffnessProfile, StabilityError> {
    let form = wellposedness_form(sys, q, mode)?;
    stiffness_from_form(&form, v)
}

fn stiffness_from_form(
    form: &WellPosednessForm,
    v: &VelocityChoice,
) -> Result<StiffnessProfile, StabilityError> {
    let v_poly: Vec<Poly> = v.v.iter().cloned().map(Poly::constant).collect();
    let denominator = dot(&form.w, &v_poly);
    if denominator.is_zero() {
        return Err(StabilityError::InvalidVelocity(v.label.clone()));
    }
    Ok(StiffnessProfile::from_ratio(form.poly.clone(), denominator))
}

/// Ordered from best to worst.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StabilityCategory {
    /// `λ < 0` for all `s > 0` and bounded as `s → ∞`.
    StableBounded,
    /// `λ < 0` but growing with `s`: explicit steps must shrink with the grid.
    StableStiff,
    /// Positive, sign-changing or identically zero.
    Unstable,
}

impl fmt::Display for StabilityCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            StabilityCategory::StableBounded => "stable-bounded",
            StabilityCategory::StableStiff => "stable-stiff",
            StabilityCategory::Unstable => "unstable",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankedVelocity {
    pub choice: VelocityChoice,
    pub profile: StiffnessProfile,
    pub category: StabilityCategory,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VelocityReport {
    pub form: WellPosednessForm,
    /// Valid candidates, best first.
    pub ranked: Vec<RankedVelocity>,
    /// Candidates orthogonal to `w`.
    pub degenerate: Vec<VelocityChoice>,
    pub ill_posed: bool,
}

impl VelocityReport {
    pub fn best(&self) -> &RankedVelocity {
        &self.ranked[0]
    }

    /// One row per candidate: label, category, growth order, sign class,
    /// `λ(1)`, numerator and denominator coefficients (ascending powers,
    /// `;`-separated).
    pub fn to_csv(&self) -> String {
        let coeffs = |p: &Poly| {
            p.coeffs()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(";")
        };
        let mut out =
            String::from("label,category,growth_order,sign,lambda_at_1,numerator,denominator\n");
        for r in &self.ranked {
            let at_one = r
                .profile
                .at_one()
                .map_or_else(|| "pole".to_string(), |v| v.to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.choice.label,
                r.category,
                r.profile.growth_order,
                r.profile.sign,
                at_one,
                coeffs(&r.profile.numerator),
                coeffs(&r.profile.denominator),
            ));
        }
        for d in &self.degenerate {
            out.push_str(&format!("{},degenerate,,,,,\n", d.label));
        }
        out
    }
}

impl fmt::Display for VelocityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.form.w.iter().map(ToString::to_string).collect();
        writeln!(f, "w = ({})", w.join(", "))?;
        writeln!(f, "well-posedness form: {}", self.form.poly)?;
        if self.ill_posed {
            writeln!(f, "base state is ILL-POSED")?;
        }
        for r in &self.ranked {
            writeln!(
                f,
                "  {:<6} {:<15} growth {:>2}  lambda = {}",
                r.choice.label, r.category, r.profile.growth_order, r.profile
            )?;
        }
        for d in &self.degenerate {
            writeln!(f, "  {:<6} degenerate (w.v = 0)", d.label)?;
        }
        Ok(())
    }
}

fn abs_at_one(p: &StiffnessProfile) -> Option<Rational> {
    p.at_one().map(|v| v.abs())
}

/// Classifies and orders candidates: category, then growth order, then
/// `|λ(1)|` ascending. Candidates with `wᵀv ≡ 0` are reported separately.
pub fn rank_velocities(
    sys: &InterfaceSystem,
    q: &[Rational],
    candidates: &[VelocityChoice],
    mode: SpectralMode,
) -> Result<VelocityReport, StabilityError> {
    let form = wellposedness_form(sys, q, mode)?;
    let mut ranked = Vec::new();
    let mut degenerate = Vec::new();
    for choice in candidates {
        match stiffness_from_form(&form, choice) {
            Ok(profile) => ranked.push(RankedVelocity {
                category: profile.category(),
                choice: choice.clone(),
                profile,
            }),
            Err(StabilityError::InvalidVelocity(_)) => degenerate.push(choice.clone()),
            Err(e) => return Err(e),
        }
    }
    if ranked.is_empty() {
        return Err(StabilityError::AllDegenerate);
    }
    ranked.sort_by(|a, b| {
        a.category
            .cmp(&b.category)
            .then(a.profile.growth_order.cmp(&b.profile.growth_order))
            .then_with(|| match (abs_at_one(&a.profile), abs_at_one(&b.profile)) {
                (Some(x), Some(y)) => x.cmp(&y),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => Ordering::Equal,
            })
    });
    Ok(VelocityReport {
        ill_posed: form.is_ill_posed(),
        form,
        ranked,
        degenerate,
    })
}
