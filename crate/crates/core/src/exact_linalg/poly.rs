//! Univariate polynomials with exact rational coefficients.
//!
//! The indeterminate is the spectral magnitude `s` (|α| in two dimensions,
//! √(α²+β²) in three). Coefficients are stored in ascending powers with
//! trailing zeros trimmed, so the zero polynomial has no coefficients.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    coeffs: Vec<Rational>,
}

impl Poly {
    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c·s^k`
    pub fn monomial(c: Rational, k: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    /// The indeterminate `s` itself.
    pub fn s() -> Self {
        Self::monomial(Rational::one(), 1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `s^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&Rational> {
        self.coeffs.last()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(k.into()))
                .collect(),
        )
    }

    /// Scales so the leading coefficient is one. The zero polynomial is
    /// returned unchanged.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some(lead) => self.scale(&lead.recip()),
            None => self.clone(),
        }
    }

    /// Euclidean division. Panics if `divisor` is zero.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let d_deg = divisor.degree().expect("polynomial division by zero");
        let d_lead = divisor.leading().unwrap().clone();
        let mut rem = self.coeffs.clone();
        let Some(n_deg) = self.degree() else {
            return (Poly::zero(), Poly::zero());
        };
        if n_deg < d_deg {
            return (Poly::zero(), self.clone());
        }
        let mut quot = vec![Rational::zero(); n_deg - d_deg + 1];
        for k in (0..=n_deg - d_deg).rev() {
            let factor = &rem[k + d_deg] / &d_lead;
            if factor.is_zero() {
                continue;
            }
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= &factor * dc;
            }
            quot[k] = factor;
        }
        rem.truncate(d_deg);
        (Poly::from_coeffs(quot), Poly::from_coeffs(rem))
    }

    /// Quotient when `divisor` divides `self` exactly.
    pub fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        let (q, r) = self.div_rem(divisor);
        r.is_zero().then_some(q)
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Multiplicity of the root at `s = 0`.
    pub fn zero_root_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Divides out every factor of `s`.
    pub fn strip_zero_roots(&self) -> Poly {
        Poly::from_coeffs(self.coeffs[self.zero_root_multiplicity()..].to_vec())
    }

    /// Number of distinct real roots in the open half-line `s > 0`, counted
    /// exactly with a Sturm sequence. Panics on the zero polynomial.
    pub fn positive_root_count(&self) -> usize {
        assert!(!self.is_zero(), "root count of the zero polynomial");
        let p = self.strip_zero_roots();
        let square_free = p
            .exact_div(&Poly::gcd(&p, &p.derivative()))
            .expect("gcd divides its argument");
        if square_free.is_constant() {
            return 0;
        }
        let chain = sturm_chain(&square_free);
        let at_zero = sign_changes(chain.iter().map(|q| q.coeff(0)));
        let at_infinity = sign_changes(chain.iter().filter_map(|q| q.leading().cloned()));
        at_zero - at_infinity
    }
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), p.derivative()];
    loop {
        let n = chain.len();
        let (_, r) = chain[n - 2].div_rem(&chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(-r);
    }
    chain
}

fn sign_changes(values: impl Iterator<Item = Rational>) -> usize {
    let mut last = Ordering::Equal;
    let mut changes = 0;
    for v in values {
        let sign = v.cmp(&Rational::zero());
        if sign == Ordering::Equal {
            continue;
        }
        if last != Ordering::Equal && sign != last {
            changes += 1;
        }
        last = sign;
    }
    changes
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(Rational::one())
    }
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;

    fn add(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;

    fn sub(self, rhs: &Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Poly::from_coeffs((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::from_coeffs(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    /// Highest power first, e.g. `(3/2)s^2 - s + 4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = c.is_negative();
            let mag = c.abs();
            match (first, negative) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let unit = mag.is_one();
            if k == 0 || !unit {
                if mag.is_integer() {
                    write!(f, "{}", mag)?;
                } else {
                    write!(f, "({})", mag)?;
                }
            }
            match k {
                0 => {}
                1 => write!(f, "s")?,
                _ => write!(f, "s^{k}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_linalg::{int, rat};

    fn p(c: &[i64]) -> Poly {
        Poly::from_coeffs(c.iter().map(|&v| int(v)).collect())
    }

    #[test]
    fn trailing_zeros_trimmed() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert!(p(&[0, 0]).is_zero());
        assert_eq!(p(&[]).degree(), None);
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(&[-1, 0, 0, 2, 5]);
        let b = p(&[3, 1, 2]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(&(&q * &b) + &r, a);
        assert!(r.degree().unwrap_or(0) < 2);
    }

    #[test]
    fn gcd_is_monic_common_factor() {
        // (s - 1)(s + 2) and (s - 1)(2s + 3)
        let a = &p(&[-1, 1]) * &p(&[2, 1]);
        let b = &p(&[-1, 1]) * &p(&[3, 2]);
        assert_eq!(Poly::gcd(&a, &b), p(&[-1, 1]));
        assert!(Poly::gcd(&Poly::zero(), &Poly::zero()).is_zero());
    }

    #[test]
    fn sturm_counts_positive_roots() {
        // (s - 1)(s - 2)(s + 3)
        let q = &(&p(&[-1, 1]) * &p(&[-2, 1])) * &p(&[3, 1]);
        assert_eq!(q.positive_root_count(), 2);
        // s²(s - 1)² counts one distinct positive root, ignores s = 0
        let q = &(&p(&[0, 0, 1]) * &p(&[-1, 1])) * &p(&[-1, 1]);
        assert_eq!(q.positive_root_count(), 1);
        assert_eq!(p(&[1, 0, 1]).positive_root_count(), 0);
        assert_eq!(p(&[0, -4]).positive_root_count(), 0);
        // root at s = 1/3
        let q = Poly::from_coeffs(vec![rat(-1, 3), int(1)]);
        assert_eq!(q.positive_root_count(), 1);
    }

    #[test]
    fn display_reads_naturally() {
        assert_eq!(p(&[0, -4]).to_string(), "-4s");
        assert_eq!(p(&[4, -1, 0, 2]).to_string(), "2s^3 - s + 4");
        let q = Poly::from_coeffs(vec![rat(-1, 2), int(0), rat(3, 2)]);
        assert_eq!(q.to_string(), "(3/2)s^2 - (1/2)");
        assert_eq!(Poly::zero().to_string(), "0");
    }

    #[test]
    fn evaluation_matches_expansion() {
        let q = p(&[1, -3, 2]);
        assert_eq!(q.eval(&int(2)), int(3));
        assert!((q.eval_f64(0.5) - 0.0).abs() < 1e-15);
    }
}
