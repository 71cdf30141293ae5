//! Row-major dense matrices and the fixed-order products used everywhere.
//!
//! Every accumulating product forms the full dot product first and then adds
//! it to the target entry. The distributed code paths rely on this to
//! reproduce sequential results exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::scalar::{Scalar, Times};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<E> {
    rows: usize,
    cols: usize,
    data: Vec<E>,
}

impl<E: Copy> Matrix<E> {
    pub fn filled(rows: usize, cols: usize, value: E) -> Self {
        Self {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<E>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
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
    pub fn get(&self, i: usize, j: usize) -> E {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: E) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[E] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[E] {
        &self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }
}

impl Matrix<f64> {
    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn matmul(&self, other: &Matrix<f64>) -> Matrix<f64> {
        assert_eq!(self.cols, other.rows);
        Matrix::from_fn(self.rows, other.cols, |i, j| {
            (0..self.cols)
                .map(|l| self.get(i, l) * other.get(l, j))
                .sum()
        })
    }

    pub fn frobenius(&self) -> f64 {
        crate::math::sqrt(self.data.iter().map(|v| v * v).sum())
    }
}

/// `y[i] += sum_j a[i][j] * x[j]`.
pub fn gemv_acc<E: Copy, T: Scalar + Times<E>>(a: &Matrix<E>, x: &[T], y: &mut [T]) {
    debug_assert_eq!(a.cols, x.len());
    debug_assert_eq!(a.rows, y.len());
    for (i, yi) in y.iter_mut().enumerate() {
        *yi += dot_row(a.row(i), x);
    }
}

/// Returns `a x` without touching any accumulator.
pub fn gemv<E: Copy, T: Scalar + Times<E>>(a: &Matrix<E>, x: &[T]) -> Vec<T> {
    debug_assert_eq!(a.cols, x.len());
    (0..a.rows).map(|i| dot_row(a.row(i), x)).collect()
}

/// `y[j] += sum_i a[i][j] * x[i]`.
pub fn gemv_t_acc<E: Copy, T: Scalar + Times<E>>(a: &Matrix<E>, x: &[T], y: &mut [T]) {
    debug_assert_eq!(a.rows, x.len());
    debug_assert_eq!(a.cols, y.len());
    for (j, yj) in y.iter_mut().enumerate() {
        let mut s = T::zero();
        for (i, xi) in x.iter().enumerate() {
            if i == 0 {
                s = xi.times(a.get(0, j));
            } else {
                s += xi.times(a.get(i, j));
            }
        }
        *yj += s;
    }
}

#[inline]
fn dot_row<E: Copy, T: Scalar + Times<E>>(row: &[E], x: &[T]) -> T {
    let mut it = row.iter().zip(x);
    let Some((a, b)) = it.next() else {
        return T::zero();
    };
    let mut s = b.times(*a);
    for (a, b) in it {
        s += b.times(*a);
    }
    s
}

/// Euclidean norm of a scalar vector.
pub fn norm2<T: Scalar>(x: &[T]) -> f64 {
    crate::math::sqrt(x.iter().map(|v| v.abs2()).sum())
}

/// `‖a - b‖ / ‖b‖`, or the absolute difference when `b` vanishes.
pub fn relative_error<T: Scalar>(a: &[T], b: &[T]) -> f64 {
    assert_eq!(a.len(), b.len());
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (*x - *y).abs2()).sum();
    let base: f64 = b.iter().map(|v| v.abs2()).sum();
    if base == 0.0 {
        crate::math::sqrt(diff)
    } else {
        crate::math::sqrt(diff / base)
    }
}
