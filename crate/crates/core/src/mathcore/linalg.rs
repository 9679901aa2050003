use num_complex::Complex;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn frobenius_norm<T: Real>(m: &CMatrix<T>) -> T {
    m.frobenius_norm()
}

/// Right pseudo-inverse `Mᴴ (M Mᴴ)⁻¹` of a wide matrix (`rows <= cols`).
///
/// Solves the Hermitian system `(M Mᴴ) X = M` through a Cholesky factor and
/// returns `Xᴴ`. Fails with [`Error::RankDeficient`] when the Gram matrix is
/// not positive definite or its 1-norm condition number exceeds
/// [`Real::condition_limit`].
pub fn right_pseudo_inverse<T: Real>(m: &CMatrix<T>) -> Result<CMatrix<T>> {
    let (rows, cols) = m.shape();
    if rows > cols {
        return Err(Error::Dimension(format!(
            "right pseudo-inverse needs rows <= cols, got {rows}x{cols}"
        )));
    }
    if !m.is_finite() {
        return Err(Error::NonFinite("pseudo-inverse input"));
    }
    let gram = m.matmul(&m.conj_transpose())?;
    let chol = cholesky(&gram).ok_or(Error::RankDeficient { condition: f64::INFINITY })?;

    let gram_inv = cholesky_solve(&chol, &CMatrix::identity(rows));
    let condition = one_norm(&gram) * one_norm(&gram_inv);
    if !condition.is_finite() || condition > T::condition_limit() {
        return Err(Error::RankDeficient { condition: condition.to_f64_lossy() });
    }

    let x = cholesky_solve(&chol, m);
    Ok(x.conj_transpose())
}

/// Lower Cholesky factor of a Hermitian positive-definite matrix, or `None`
/// when a pivot is not strictly positive.
fn cholesky<T: Real>(a: &CMatrix<T>) -> Option<CMatrix<T>> {
    let n = a.rows();
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d = d - l[(j, k)].norm_sqr();
        }
        if !(d > T::zero()) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, T::zero());
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Some(l)
}

/// Solves `L Lᴴ X = B` column by column.
fn cholesky_solve<T: Real>(l: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    let n = l.rows();
    let mut x = b.clone();
    for c in 0..b.cols() {
        // forward: L y = b
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s = s - l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        // backward: Lᴴ x = y
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s = s - l[(k, i)].conj() * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    x
}

fn one_norm<T: Real>(a: &CMatrix<T>) -> T {
    (0..a.cols())
        .map(|c| (0..a.rows()).fold(T::zero(), |acc, r| acc + a[(r, c)].norm()))
        .fold(T::zero(), T::max)
}


#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type M = CMatrix<f64>;

    fn random(rows: usize, cols: usize, seed: u64) -> M {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        M::from_fn(rows, cols, |_, _| Complex::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    fn residual(m: &M, pinv: &M) -> f64 {
        m.matmul(pinv).unwrap().sub(&M::identity(m.rows())).unwrap().frobenius_norm()
    }

    #[test]
    fn identity_is_its_own_pseudo_inverse() {
        let p = right_pseudo_inverse(&M::identity(3)).unwrap();
        assert!(p.sub(&M::identity(3)).unwrap().frobenius_norm() < 1e-15);
    }

    #[test]
    fn random_wide_matrix_is_right_inverted() {
        let m = random(2, 3, 11);
        let p = right_pseudo_inverse(&m).unwrap();
        assert_eq!(p.shape(), (3, 2));
        assert!(residual(&m, &p) < 1e-10);
    }

    #[test]
    fn duplicated_rows_are_rank_deficient() {
        let base = random(1, 3, 5);
        let m = M::from_fn(2, 3, |_, c| base[(0, c)]);
        assert!(matches!(right_pseudo_inverse(&m), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn tall_matrix_rejected() {
        assert!(matches!(right_pseudo_inverse(&M::zeros(3, 2)), Err(Error::Dimension(_))));
    }

    #[test]
    fn single_precision_works() {
        let m: CMatrix<f32> = random(2, 4, 3).cast();
        let p = right_pseudo_inverse(&m).unwrap();
        let r = m.matmul(&p).unwrap().sub(&CMatrix::identity(2)).unwrap().frobenius_norm();
        assert!(r < 1e-4);
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(frobenius_norm(&M::zeros(3, 2)), 0.0);
        assert_eq!(frobenius_norm(&M::identity(4)), 2.0);
        let m = M::from_row_major(1, 2, vec![Complex::new(3., 0.), Complex::new(0., 4.)]).unwrap();
        assert_eq!(frobenius_norm(&m), 5.0);
    }

    proptest::proptest! {
        #[test]
        fn pseudo_inverse_residual_is_small(rows in 1usize..5, extra in 0usize..5, seed in 0u64..10_000) {
            let m = random(rows, rows + extra, seed);
            if let Ok(p) = right_pseudo_inverse(&m) {
                proptest::prop_assert!(residual(&m, &p) < 1e-8 * m.frobenius_norm());
            }
        }
    }
}
