//! Exact rational and polynomial linear algebra.
//!
//! Ranks and kernels decide the interface classification, so they are
//! computed without any floating-point tolerance. Matrices are small (at
//! most 8 columns here) and dense.

mod matrix;
mod poly;

pub use matrix::{Matrix, Ring};
pub use poly::Poly;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Rational = BigRational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n/d` in lowest terms. Panics if `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}` (expected an integer or `p/q`)")]
pub struct ParseRationalError(pub String);

/// Parses `p/q` or a plain integer, with optional surrounding whitespace.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    text.trim()
        .parse::<Rational>()
        .map_err(|_| ParseRationalError(text.trim().to_string()))
}

/// Reduced row-echelon form together with its pivot structure.
#[derive(Clone, Debug, PartialEq)]
pub struct Rref {
    pub reduced: Matrix<Rational>,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

pub fn rref(m: &Matrix<Rational>) -> Rref {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..a.cols() {
        if r == a.rows() {
            break;
        }
        let Some(p) = (r..a.rows()).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        let inv = a[(r, c)].recip();
        for j in c..a.cols() {
            a[(r, j)] = &a[(r, j)] * &inv;
        }
        for i in 0..a.rows() {
            if i == r || a[(i, c)].is_zero() {
                continue;
            }
            let f = a[(i, c)].clone();
            for j in c..a.cols() {
                let delta = &f * &a[(r, j)];
                a[(i, j)] -= delta;
            }
        }
        pivots.push(c);
        r += 1;
    }
    Rref {
        reduced: a,
        rank: pivots.len(),
        pivots,
    }
}

pub fn rank(m: &Matrix<Rational>) -> usize {
    rref(m).rank
}

/// Kernel basis as columns. Each free column of the RREF contributes one
/// vector with that free variable set to one and the other free variables
/// zero, in column order.
pub fn nullspace_basis(m: &Matrix<Rational>) -> Matrix<Rational> {
    let Rref {
        reduced, pivots, ..
    } = rref(m);
    let free: Vec<usize> = (0..m.cols()).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Matrix::zeros(m.cols(), free.len());
    for (k, &f) in free.iter().enumerate() {
        basis[(f, k)] = Rational::one();
        for (row, &p) in pivots.iter().enumerate() {
            basis[(p, k)] = -reduced[(row, f)].clone();
        }
    }
    basis
}

/// Left-kernel basis as rows: every row `w` satisfies `w·m = 0`.
pub fn left_nullspace_basis(m: &Matrix<Rational>) -> Matrix<Rational> {
    nullspace_basis(&m.transpose()).transpose()
}

/// Fraction-free (Bareiss) row echelon form over the polynomial ring.
/// Entries stay polynomial: every division performed is exact.
fn bareiss_echelon(m: &Matrix<Poly>) -> (Matrix<Poly>, Vec<usize>) {
    let mut a = m.clone();
    let mut pivots = Vec::new();
    let mut prev = Poly::one();
    let mut r = 0;
    for c in 0..a.cols() {
        if r == a.rows() {
            break;
        }
        let Some(p) = (r..a.rows()).find(|&i| !a[(i, c)].is_zero()) else {
            continue;
        };
        a.swap_rows(r, p);
        for i in r + 1..a.rows() {
            for j in c + 1..a.cols() {
                let cross = &(&a[(r, c)] * &a[(i, j)]) - &(&a[(i, c)] * &a[(r, j)]);
                a[(i, j)] = cross
                    .exact_div(&prev)
                    .expect("Bareiss step divides exactly");
            }
            a[(i, c)] = Poly::zero();
        }
        prev = a[(r, c)].clone();
        pivots.push(c);
        r += 1;
    }
    (a, pivots)
}

/// Polynomial kernel basis of `m` (as columns), one vector per free column of
/// the fraction-free echelon form. Each vector is normalized with
/// [`normalize_poly_vector`].
pub fn poly_nullspace_basis(m: &Matrix<Poly>) -> Matrix<Poly> {
    let (echelon, pivots) = bareiss_echelon(m);
    let free: Vec<usize> = (0..m.cols()).filter(|c| !pivots.contains(c)).collect();
    let mut basis = Matrix::zeros(m.cols(), free.len());
    for (k, &f) in free.iter().enumerate() {
        let mut x = vec![Poly::zero(); m.cols()];
        x[f] = Poly::one();
        for (row, &p) in pivots.iter().enumerate().rev() {
            let sum = (p + 1..m.cols())
                .filter(|&j| !x[j].is_zero())
                .fold(Poly::zero(), |acc, j| acc + &echelon[(row, j)] * &x[j]);
            if sum.is_zero() {
                continue;
            }
            // Clear the pivot by rescaling the partial vector so the new
            // entry stays polynomial.
            let pivot = &echelon[(row, p)];
            let g = Poly::gcd(&sum, pivot);
            let lift = pivot.exact_div(&g).expect("gcd divides pivot");
            for v in x.iter_mut().filter(|v| !v.is_zero()) {
                *v = &*v * &lift;
            }
            x[p] = -sum.exact_div(&g).expect("gcd divides sum");
        }
        for (i, v) in normalize_poly_vector(x).into_iter().enumerate() {
            basis[(i, k)] = v;
        }
    }
    basis
}

/// Left-kernel basis as rows, `w·m ≡ 0` identically in `s`.
pub fn poly_left_nullspace_basis(m: &Matrix<Poly>) -> Matrix<Poly> {
    poly_nullspace_basis(&m.transpose()).transpose()
}

/// Divides out the common polynomial content, then scales so the last nonzero
/// entry is the constant one when it has degree zero (monic otherwise).
pub fn normalize_poly_vector(v: Vec<Poly>) -> Vec<Poly> {
    let content = v.iter().fold(Poly::zero(), |g, e| Poly::gcd(&g, e));
    if content.is_zero() {
        return v;
    }
    let v: Vec<Poly> = v
        .into_iter()
        .map(|e| e.exact_div(&content).expect("content divides every entry"))
        .collect();
    let last = v.iter().rev().find(|e| !e.is_zero()).unwrap();
    let scale = last.leading().unwrap().recip();
    v.iter().map(|e| e.scale(&scale)).collect()
}

#[cfg(test)]
mod tests;
