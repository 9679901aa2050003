use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{norm_sqr, Real};

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from column-major entries (the `vec[W]` layout).
    pub fn from_column_major(rows: usize, cols: usize, data: &[Complex<T>]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self::from_fn(rows, cols, |r, c| data[c * rows + r]))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Row-major entries.
    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn set_column(&mut self, c: usize, values: &[Complex<T>]) {
        assert_eq!(values.len(), self.rows, "column length");
        for (r, v) in values.iter().enumerate() {
            self[(r, c)] = *v;
        }
    }

    /// Column-major copy of the entries.
    pub fn to_column_major(&self) -> Vec<Complex<T>> {
        let mut out = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.push(self[(r, c)]);
            }
        }
        out
    }

    pub fn conj_transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let lhs_row = self.row(r);
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for (k, a) in lhs_row.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o = *o + *a * *b;
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v * self` with `v` of length `rows`.
    pub fn left_mul_row(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!(
                "row vector of length {} against {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![Complex::zero(); self.cols];
        for (r, a) in v.iter().enumerate() {
            for (o, b) in out.iter_mut().zip(self.row(r)) {
                *o = *o + *a * *b;
            }
        }
        Ok(out)
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix against vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).fold(Complex::zero(), |acc, (a, b)| acc + *a * *b))
            .collect())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| *z * s).collect() }
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.shape() != rhs.shape() {
            return Err(Error::Dimension(format!("cannot subtract {:?} from {:?}", rhs.shape(), self.shape())));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        })
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| norm_sqr(*z)).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Casts every entry to another scalar type.
    pub fn cast<U: Real>(&self) -> CMatrix<U> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}
