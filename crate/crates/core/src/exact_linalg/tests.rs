use super::*;
use proptest::prelude::*;

fn imat(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&v| int(v)).collect())
            .collect(),
    )
    .unwrap()
}

fn porous_unit_k() -> Matrix<Rational> {
    imat(&[
        &[0, 0, 0, 0, 0, 0, 0, 1],
        &[0, 0, 0, 0, 1, -1, 0, 0],
        &[0, 0, 0, 0, 0, 1, -1, 0],
        &[1, -1, 0, 1, 0, 0, 0, 0],
        &[0, -1, 1, -1, 0, 0, 0, 0],
    ])
}

fn spans_equal(a: &Matrix<Rational>, b: &Matrix<Rational>) -> bool {
    let mut joined = Matrix::zeros(a.rows(), a.cols() + b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            joined[(i, j)] = a[(i, j)].clone();
        }
        for j in 0..b.cols() {
            joined[(i, a.cols() + j)] = b[(i, j)].clone();
        }
    }
    rank(a) == rank(b) && rank(&joined) == rank(a)
}

#[test]
fn identity_has_full_rank() {
    let r = rref(&Matrix::<Rational>::identity(2));
    assert_eq!(r.rank, 2);
    assert_eq!(r.pivots, vec![0, 1]);
}

#[test]
fn dependent_rows_drop_rank() {
    assert_eq!(rank(&imat(&[&[1, 2], &[2, 4]])), 1);
}

#[test]
fn empty_matrix_has_rank_zero() {
    let m = Matrix::<Rational>::zeros(0, 0);
    assert_eq!(rank(&m), 0);
    assert_eq!(nullspace_basis(&Matrix::<Rational>::zeros(0, 3)).cols(), 3);
}

#[test]
fn porous_interface_matrix_has_rank_five() {
    assert_eq!(rank(&porous_unit_k()), 5);
}

#[test]
fn identity_kernel_is_empty() {
    assert_eq!(nullspace_basis(&Matrix::<Rational>::identity(3)).cols(), 0);
}

#[test]
fn single_row_kernel_follows_free_variable_convention() {
    let basis = nullspace_basis(&imat(&[&[1, 1]]));
    assert_eq!(basis, imat(&[&[-1], &[1]]));
}

#[test]
fn porous_kernel_spans_printed_basis() {
    let g = porous_unit_k();
    let basis = nullspace_basis(&g);
    assert_eq!(basis.cols(), 3);
    assert!((&g * &basis).is_zero());
    let printed = imat(&[
        &[1, 1, 1, 0, 0, 0, 0, 0],
        &[-1, 0, 1, 1, 0, 0, 0, 0],
        &[0, 0, 0, 0, 1, 1, 1, 0],
    ])
    .transpose();
    assert!(spans_equal(&basis, &printed));
}

#[test]
fn left_kernel_of_column_of_ones() {
    let w = left_nullspace_basis(&imat(&[&[1], &[1]]));
    assert_eq!(w.rows(), 1);
    // proportional to (1, -1)
    assert_eq!(&w[(0, 0)] + &w[(0, 1)], int(0));
    assert!(!w[(0, 0)].is_zero());
}

fn poly(c: &[i64]) -> Poly {
    Poly::from_coeffs(c.iter().map(|&v| int(v)).collect())
}

/// G·M for the porous system with K⁺ = K⁻ = 1, written out by hand.
fn porous_gm_unit_k() -> Matrix<Poly> {
    let z = || poly(&[]);
    let one = || poly(&[1]);
    let neg = || poly(&[-1]);
    let s = || poly(&[0, 1]);
    let ms = || poly(&[0, -1]);
    Matrix::from_rows(vec![
        vec![z(), z(), z(), one()],
        vec![one(), neg(), z(), z()],
        vec![z(), one(), neg(), z()],
        vec![ms(), ms(), z(), s()],
        vec![z(), ms(), ms(), ms()],
    ])
    .unwrap()
}

#[test]
fn polynomial_left_kernel_of_porous_gm() {
    let gm = porous_gm_unit_k();
    let w = poly_left_nullspace_basis(&gm);
    assert_eq!(w.rows(), 1);
    let expected = vec![
        poly(&[0, 2]),
        poly(&[0, -1]),
        poly(&[0, -1]),
        poly(&[-1]),
        poly(&[1]),
    ];
    assert_eq!(w.row(0), expected.as_slice());
    assert!(gm.vec_mul(w.row(0)).iter().all(Zero::is_zero));
}

#[test]
fn normalization_removes_polynomial_content() {
    let s_plus_1 = poly(&[1, 1]);
    let v = vec![&s_plus_1 * &poly(&[0, 3]), &s_plus_1 * &poly(&[2])];
    assert_eq!(
        normalize_poly_vector(v),
        vec![poly(&[0, 3, 0]).scale(&rat(1, 2)), poly(&[1])]
    );
}

#[test]
fn parse_rational_literals() {
    assert_eq!(parse_rational(" -3/6 ").unwrap(), rat(-1, 2));
    assert_eq!(parse_rational("7").unwrap(), int(7));
    assert!(parse_rational("1/0").is_err());
    assert!(parse_rational("0.5").is_err());
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

fn rational_matrix(max: usize) -> impl Strategy<Value = Matrix<Rational>> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        proptest::collection::vec(small_rational(), r * c).prop_map(move |data| {
            let mut it = data.into_iter();
            Matrix::from_fn(r, c, |_, _| it.next().unwrap())
        })
    })
}

fn poly_matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix<Poly>> {
    proptest::collection::vec(proptest::collection::vec(-2i64..=2, 0..3), rows * cols).prop_map(
        move |data| {
            let mut it = data.into_iter();
            Matrix::from_fn(rows, cols, |_, _| poly(&it.next().unwrap()))
        },
    )
}

proptest! {
    #[test]
    fn rank_nullity(m in rational_matrix(8)) {
        let basis = nullspace_basis(&m);
        prop_assert_eq!(rank(&m) + basis.cols(), m.cols());
        prop_assert!((&m * &basis).is_zero());
        prop_assert_eq!(rank(&basis), basis.cols());
    }

    #[test]
    fn rref_is_idempotent(m in rational_matrix(8)) {
        let once = rref(&m);
        let twice = rref(&once.reduced);
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn left_kernel_annihilates(m in rational_matrix(6)) {
        let w = left_nullspace_basis(&m);
        prop_assert_eq!(w.rows() + rank(&m), m.rows());
        for i in 0..w.rows() {
            prop_assert!(m.vec_mul(w.row(i)).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn polynomial_left_kernel_vanishes_identically(m in poly_matrix(5, 4)) {
        let w = poly_left_nullspace_basis(&m);
        prop_assert!(w.rows() >= 1);
        for i in 0..w.rows() {
            prop_assert!(m.vec_mul(w.row(i)).iter().all(Zero::is_zero));
            prop_assert!(w.row(i).iter().any(|e| !e.is_zero()));
        }
    }
}
