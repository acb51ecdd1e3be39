//! Simplified two-phase porous-media model.
//!
//! Upper domain: temperature `T⁺` and pressure `P`. Lower domain:
//! temperature `T⁻` and liquid saturation `s`. The interface conditions are
//! `s = 0`, `T⁺ = T⁻`, `T⁻ = P`, `K⁺T⁺ₙ − K⁻T⁻ₙ + sₙ = 0` and
//! `Pₙ − T⁻ₙ − sₙ = 0`. The top carries a heat flux `f₁(x) = F + A·sin x`
//! with `Pₙ = 0`; the bottom holds `s = 1`, `T⁻ = T₀`. Sides are periodic.

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact_linalg::{int, rat, rref, Matrix, Rational};
use crate::interface::{BaseState, InterfaceError, InterfaceSystem, FLUXES, UNKNOWNS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PorousError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("no flat steady interface inside the domain (flat height {0})")]
    NoFlatState(String),
    #[error("closed-form solution needs K+ = K-, got {k_plus} and {k_minus}")]
    ParamMismatch { k_plus: String, k_minus: String },
    #[error("interface relation has no sign change on the bracket at x = {0}")]
    BracketFailure(f64),
    #[error(transparent)]
    Interface(#[from] InterfaceError),
}

/// Physical parameters. Kept rational so the flat base state is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct PorousParams {
    k_plus: Rational,
    k_minus: Rational,
    length: Rational,
    t0: Rational,
    flux_mean: Rational,
    flux_amplitude: Rational,
}

impl PorousParams {
    pub fn new(
        k_plus: Rational,
        k_minus: Rational,
        length: Rational,
        t0: Rational,
        flux_mean: Rational,
        flux_amplitude: Rational,
    ) -> Result<Self, PorousError> {
        if !k_plus.is_positive() || !k_minus.is_positive() {
            return Err(PorousError::InvalidParams(format!(
                "conductivities must be positive, got K+ = {k_plus}, K- = {k_minus}"
            )));
        }
        if !length.is_positive() {
            return Err(PorousError::InvalidParams(format!(
                "L must be positive, got {length}"
            )));
        }
        Ok(PorousParams {
            k_plus,
            k_minus,
            length,
            t0,
            flux_mean,
            flux_amplitude,
        })
    }

    /// K = 1, L = 2, T₀ = 10, f₁ = 2 + sin(x)/2.
    pub fn reference() -> Self {
        PorousParams {
            k_plus: int(1),
            k_minus: int(1),
            length: int(2),
            t0: int(10),
            flux_mean: int(2),
            flux_amplitude: rat(1, 2),
        }
    }

    pub fn k_plus(&self) -> &Rational {
        &self.k_plus
    }

    pub fn k_minus(&self) -> &Rational {
        &self.k_minus
    }

    pub fn length(&self) -> &Rational {
        &self.length
    }

    pub fn t0(&self) -> &Rational {
        &self.t0
    }

    pub fn flux_mean(&self) -> &Rational {
        &self.flux_mean
    }

    pub fn flux_amplitude(&self) -> &Rational {
        &self.flux_amplitude
    }

    /// Same parameters with a different mean heat flux.
    pub fn with_flux_mean(mut self, mean: Rational) -> Self {
        self.flux_mean = mean;
        self
    }

    pub fn with_conductivities(
        self,
        k_plus: Rational,
        k_minus: Rational,
    ) -> Result<Self, PorousError> {
        PorousParams::new(
            k_plus,
            k_minus,
            self.length,
            self.t0,
            self.flux_mean,
            self.flux_amplitude,
        )
    }

    /// Top heat-flux datum `f₁(x)`.
    pub fn heat_flux(&self, x: f64) -> f64 {
        f(&self.flux_mean) + f(&self.flux_amplitude) * x.sin()
    }

    pub fn k_plus_f64(&self) -> f64 {
        f(&self.k_plus)
    }

    pub fn k_minus_f64(&self) -> f64 {
        f(&self.k_minus)
    }

    pub fn length_f64(&self) -> f64 {
        f(&self.length)
    }

    pub fn t0_f64(&self) -> f64 {
        f(&self.t0)
    }
}

impl Default for PorousParams {
    fn default() -> Self {
        PorousParams::reference()
    }
}

pub(crate) fn f(r: &Rational) -> f64 {
    r.to_f64().expect("rational fits in f64")
}

/// The interface system with `b = 0`. The physical flux basis
/// `(K⁻/K⁺,1,1,0 | 0)`, `(−1/K⁺,0,1,1 | 0)`, `(0,0,0,0 | 1,1,1,0)` is
/// attached so that `q` keeps its meaning in base-state computations.
pub fn build_porous_system(params: &PorousParams) -> InterfaceSystem {
    let (kp, km) = (params.k_plus.clone(), params.k_minus.clone());
    let z = Rational::zero;
    let o = Rational::one;
    let g = Matrix::from_rows(vec![
        vec![z(), z(), z(), z(), z(), z(), z(), o()],
        vec![z(), z(), z(), z(), o(), -o(), z(), z()],
        vec![z(), z(), z(), z(), z(), o(), -o(), z()],
        vec![kp.clone(), -km.clone(), z(), o(), z(), z(), z(), z()],
        vec![z(), -o(), o(), -o(), z(), z(), z(), z()],
    ])
    .unwrap();
    let basis = Matrix::from_rows(vec![
        vec![&km / &kp, o(), o(), z(), z(), z(), z(), z()],
        vec![-kp.recip(), z(), o(), o(), z(), z(), z(), z()],
        vec![z(), z(), z(), z(), o(), o(), o(), z()],
    ])
    .unwrap()
    .transpose();
    InterfaceSystem::homogeneous(g)
        .and_then(|sys| sys.with_flux_basis(basis))
        .expect("porous system is well formed")
}

/// Flat steady state driven by the mean heat flux `F`: interface height
/// `y0 = (1 + K⁻)/F`, with the matching base state and its fluxes `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatState {
    pub y0: Rational,
    pub base: BaseState,
}

pub fn flat_base_state(params: &PorousParams) -> Result<FlatState, PorousError> {
    if !params.flux_mean.is_positive() {
        return Err(PorousError::NoFlatState("unbounded".into()));
    }
    let y0 = (int(1) + &params.k_minus) / &params.flux_mean;
    if y0 >= params.length {
        return Err(PorousError::NoFlatState(y0.to_string()));
    }
    // 1-D profiles: T⁺ slope set by the top flux, s falls from 1 to 0 over
    // [0, y0], T⁻ + s is constant below so T⁻ rises to T₀ + 1.
    let slope = y0.recip();
    let interface_value = &params.t0 + int(1);
    let u0 = vec![
        &params.flux_mean / &params.k_plus,
        slope.clone(),
        int(0),
        -slope,
        interface_value.clone(),
        interface_value.clone(),
        interface_value,
        int(0),
    ];
    let sys = build_porous_system(params);
    let q = solve_fluxes(&sys, &u0)?;
    let base = sys.base_solution(&q)?;
    debug_assert_eq!(base.u0, u0);
    Ok(FlatState { y0, base })
}

/// Expresses `u0 − r_P` in the system's kernel basis.
fn solve_fluxes(sys: &InterfaceSystem, u0: &[Rational]) -> Result<Vec<Rational>, PorousError> {
    let basis = sys.nullspace()?;
    let particular = sys.particular_solution()?;
    let augmented = Matrix::from_fn(UNKNOWNS, FLUXES + 1, |i, j| {
        if j < FLUXES {
            basis[(i, j)].clone()
        } else {
            &u0[i] - &particular[i]
        }
    });
    let reduced = rref(&augmented);
    if reduced.pivots.contains(&FLUXES) {
        return Err(PorousError::InvalidParams(
            "flat profile violates the interface conditions".into(),
        ));
    }
    Ok((0..FLUXES)
        .map(|k| reduced.reduced[(k, FLUXES)].clone())
        .collect())
}

/// Values of the four fields at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fields {
    pub t_plus: f64,
    pub p: f64,
    pub t_minus: f64,
    pub s: f64,
}

/// `(∂x, ∂y)` of each field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gradients {
    pub t_plus: [f64; 2],
    pub p: [f64; 2],
    pub t_minus: [f64; 2],
    pub s: [f64; 2],
}

/// Closed-form steady solution for equal conductivities `K⁺ = K⁻ = K`.
///
/// With `Φ = F·y + A·sin x·sinh y / cosh L`:
/// `T⁺ = (K·T₀ − 1 + Φ)/K`, `P = T₀ + 1`, `s = (K + 1 − Φ)/(K + 1)`,
/// `T⁻ = T₀ + 1 − s`. The interface is the level set `Φ = K + 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactSolution {
    k: f64,
    t0: f64,
    flux_mean: f64,
    flux_amplitude: f64,
    length: f64,
}

impl ExactSolution {
    pub fn new(params: &PorousParams) -> Result<Self, PorousError> {
        if params.k_plus != params.k_minus {
            return Err(PorousError::ParamMismatch {
                k_plus: params.k_plus.to_string(),
                k_minus: params.k_minus.to_string(),
            });
        }
        Ok(ExactSolution {
            k: params.k_plus_f64(),
            t0: params.t0_f64(),
            flux_mean: f(&params.flux_mean),
            flux_amplitude: f(&params.flux_amplitude),
            length: params.length_f64(),
        })
    }

    fn phi(&self, x: f64, y: f64) -> f64 {
        self.flux_mean * y + self.flux_amplitude * x.sin() * y.sinh() / self.length.cosh()
    }

    fn phi_gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let c = self.flux_amplitude / self.length.cosh();
        [
            c * x.cos() * y.sinh(),
            self.flux_mean + c * x.sin() * y.cosh(),
        ]
    }

    pub fn fields(&self, x: f64, y: f64) -> Fields {
        let phi = self.phi(x, y);
        let s = (self.k + 1.0 - phi) / (self.k + 1.0);
        Fields {
            t_plus: (self.k * self.t0 - 1.0 + phi) / self.k,
            p: self.t0 + 1.0,
            t_minus: self.t0 + 1.0 - s,
            s,
        }
    }

    pub fn gradients(&self, x: f64, y: f64) -> Gradients {
        let [px, py] = self.phi_gradient(x, y);
        let ks = -1.0 / (self.k + 1.0);
        Gradients {
            t_plus: [px / self.k, py / self.k],
            p: [0.0, 0.0],
            t_minus: [-ks * px, -ks * py],
            s: [ks * px, ks * py],
        }
    }

    /// `(K + 1 − F·y)·cosh L − A·sin x·sinh y`; zero exactly on the interface.
    /// For the reference data this is half of `4(1 − y)cosh L − sin x·sinh y`.
    pub fn interface_relation(&self, x: f64, y: f64) -> f64 {
        (self.k + 1.0 - self.flux_mean * y) * self.length.cosh()
            - self.flux_amplitude * x.sin() * y.sinh()
    }

    /// Height of the flat interface, used to split the bisection bracket.
    pub fn flat_height(&self) -> f64 {
        (self.k + 1.0) / self.flux_mean
    }

    /// Interface height at `x` by bisection on `[0, y0]` or `[y0, L]`.
    pub fn interface(&self, x: f64, tol: f64) -> Result<f64, PorousError> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(PorousError::InvalidParams(format!(
                "tolerance must be positive, got {tol}"
            )));
        }
        let g = |y: f64| self.interface_relation(x, y);
        let y0 = self.flat_height();
        let g0 = g(y0);
        if g0.abs() <= tol {
            return Ok(y0);
        }
        let (mut lo, mut hi) = if g0 < 0.0 {
            (0.0, y0)
        } else {
            (y0, self.length)
        };
        let (mut g_lo, g_hi) = (g(lo), g(hi));
        if g_lo.signum() == g_hi.signum() {
            return Err(PorousError::BracketFailure(x));
        }
        loop {
            let mid = 0.5 * (lo + hi);
            let g_mid = g(mid);
            if g_mid.abs() <= tol || mid <= lo || mid >= hi {
                return Ok(mid);
            }
            if g_mid.signum() == g_lo.signum() {
                lo = mid;
                g_lo = g_mid;
            } else {
                hi = mid;
            }
        }
    }

    /// Slope `h'(x)` of the interface by implicit differentiation.
    pub fn interface_slope(&self, x: f64, y: f64) -> f64 {
        let [px, py] = self.phi_gradient(x, y);
        -px / py
    }
}

pub fn exact_fields(x: f64, y: f64, params: &PorousParams) -> Result<Fields, PorousError> {
    Ok(ExactSolution::new(params)?.fields(x, y))
}

pub fn exact_interface(x: f64, params: &PorousParams, tol: f64) -> Result<f64, PorousError> {
    ExactSolution::new(params)?.interface(x, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interface::InterfaceClass;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn unit_conductivity_rows() {
        let sys = build_porous_system(&PorousParams::reference());
        assert_eq!(sys.g().row(3), ints(&[1, -1, 0, 1, 0, 0, 0, 0]).as_slice());
        assert_eq!(sys.g().row(4), ints(&[0, -1, 1, -1, 0, 0, 0, 0]).as_slice());
        assert_eq!(sys.b(), ints(&[0, 0, 0, 0, 0]).as_slice());
    }

    #[test]
    fn porous_system_is_c_tilde_for_any_conductivities() {
        for (kp, km) in [(int(1), int(1)), (rat(3, 2), rat(1, 4)), (int(7), int(2))] {
            let params = PorousParams::reference().with_conductivities(kp, km).unwrap();
            let report = build_porous_system(&params).classify().unwrap();
            assert_eq!((report.class, report.tilde), (InterfaceClass::C, true));
        }
    }

    #[test]
    fn rejects_nonpositive_parameters() {
        assert!(PorousParams::reference()
            .with_conductivities(int(0), int(1))
            .is_err());
        let p = PorousParams::reference();
        assert!(PorousParams::new(int(1), int(1), int(-2), p.t0.clone(), int(2), int(0)).is_err());
    }

    #[test]
    fn flat_state_for_reference_data() {
        let flat = flat_base_state(&PorousParams::reference()).unwrap();
        assert_eq!(flat.y0, int(1));
        assert_eq!(flat.base.slopes(), ints(&[2, 1, 0, -1]).as_slice());
        assert_eq!(flat.base.values(), ints(&[11, 11, 11, 0]).as_slice());
        assert_eq!(flat.base.q, ints(&[1, -1, 11]));
    }

    #[test]
    fn doubled_flux_halves_flat_height() {
        let params = PorousParams::reference().with_flux_mean(int(4));
        assert_eq!(flat_base_state(&params).unwrap().y0, rat(1, 2));
    }

    #[test]
    fn no_flat_state_without_flux_or_room() {
        let zero = PorousParams::reference().with_flux_mean(int(0));
        assert!(matches!(
            flat_base_state(&zero),
            Err(PorousError::NoFlatState(_))
        ));
        let weak = PorousParams::reference().with_flux_mean(int(1));
        assert!(matches!(
            flat_base_state(&weak),
            Err(PorousError::NoFlatState(_))
        ));
    }

    #[test]
    fn flat_state_with_unequal_conductivities_satisfies_conditions() {
        let params = PorousParams::reference()
            .with_conductivities(rat(3, 2), rat(1, 2))
            .unwrap();
        let flat = flat_base_state(&params).unwrap();
        let sys = build_porous_system(&params);
        assert_eq!(sys.g().mul_vec(&flat.base.u0), ints(&[0, 0, 0, 0, 0]));
        assert_eq!(flat.y0, rat(3, 4));
    }

    #[test]
    fn reference_point_values() {
        let params = PorousParams::reference();
        let at_flat = exact_fields(0.0, 1.0, &params).unwrap();
        assert!((at_flat.t_minus - 11.0).abs() < 1e-14);
        assert!(at_flat.s.abs() < 1e-14);
        let top = exact_fields(PI / 2.0, 2.0, &params).unwrap();
        assert!((top.t_plus - (13.0 + 2f64.tanh() / 2.0)).abs() < 1e-12);
        assert!((top.t_plus - 13.48201).abs() < 1e-5);
        assert_eq!(exact_fields(1.3, 0.4, &params).unwrap().p, 11.0);
    }

    #[test]
    fn mismatched_conductivities_have_no_closed_form() {
        let params = PorousParams::reference()
            .with_conductivities(int(2), int(1))
            .unwrap();
        assert!(matches!(
            exact_fields(0.0, 1.0, &params),
            Err(PorousError::ParamMismatch { .. })
        ));
    }

    #[test]
    fn interface_heights() {
        let params = PorousParams::reference();
        assert_eq!(exact_interface(0.0, &params, 1e-12).unwrap(), 1.0);
        assert!((exact_interface(PI, &params, 1e-12).unwrap() - 1.0).abs() < 1e-12);
        let y = exact_interface(PI / 2.0, &params, 1e-12).unwrap();
        assert!((y - 0.929).abs() < 5e-4, "y = {y}");
        // Printed form of the relation.
        assert!((4.0 * (1.0 - y) * 2f64.cosh() - y.sinh()).abs() < 1e-11);
    }

    #[test]
    fn nonpositive_tolerance_is_rejected() {
        assert!(exact_interface(0.3, &PorousParams::reference(), 0.0).is_err());
    }

    #[test]
    fn fields_are_harmonic_under_refinement() {
        let exact = ExactSolution::new(&PorousParams::reference()).unwrap();
        let laplacian = |g: &dyn Fn(f64, f64) -> f64, h: f64| {
            let (x, y) = (0.7, 1.3);
            (g(x + h, y) + g(x - h, y) + g(x, y + h) + g(x, y - h) - 4.0 * g(x, y)) / (h * h)
        };
        let fields: [&dyn Fn(f64, f64) -> f64; 3] = [
            &|x, y| exact.fields(x, y).t_plus,
            &|x, y| exact.fields(x, y).t_minus,
            &|x, y| exact.fields(x, y).s,
        ];
        for g in fields {
            let coarse = laplacian(g, 0.1).abs();
            let fine = laplacian(g, 0.05).abs();
            assert!(fine < 1e-3 && fine < coarse, "{coarse} -> {fine}");
        }
    }

    /// `G·Ũ` on the curve with analytic normal derivatives.
    fn condition_residuals(exact: &ExactSolution, k: f64, x: f64) -> [f64; 5] {
        let y = exact.interface(x, 1e-14).unwrap();
        let slope = exact.interface_slope(x, y);
        let norm = (1.0 + slope * slope).sqrt();
        let dn = |g: [f64; 2]| (-slope * g[0] + g[1]) / norm;
        let v = exact.fields(x, y);
        let d = exact.gradients(x, y);
        [
            v.s,
            v.t_plus - v.t_minus,
            v.t_minus - v.p,
            k * dn(d.t_plus) - k * dn(d.t_minus) + dn(d.s),
            dn(d.p) - dn(d.t_minus) - dn(d.s),
        ]
    }

    #[test]
    fn closed_form_matches_top_flux_for_unit_conductivity() {
        let params = PorousParams::reference();
        let exact = ExactSolution::new(&params).unwrap();
        for x in [0.0, 0.5, 2.0, 4.0] {
            let d = exact.gradients(x, 2.0);
            assert!((d.t_plus[1] - params.heat_flux(x)).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn interface_conditions_hold_on_exact_curve(x in 0.0..2.0 * PI, k in prop_oneof![Just(1i64), Just(2), Just(3)]) {
            let params = PorousParams::reference().with_conductivities(int(k), int(k)).unwrap();
            let params = params.with_flux_mean(int(2 * (k + 1) - 2));
            let exact = ExactSolution::new(&params).unwrap();
            for r in condition_residuals(&exact, k as f64, x) {
                prop_assert!(r.abs() < 1e-11, "residual {r}");
            }
        }

        #[test]
        fn saturation_vanishes_on_interface(x in 0.0..2.0 * PI) {
            let params = PorousParams::reference();
            let y = exact_interface(x, &params, 1e-13).unwrap();
            prop_assert!(y > 0.0 && y < 2.0);
            prop_assert!(exact_fields(x, y, &params).unwrap().s.abs() < 1e-12);
        }
    }
}
