//! Dense row-major matrices and the matmul kernel everything trains on.
//!
//! Parallelism is per output row: each row is produced by one worker with a
//! fixed inner summation order, so parallel and sequential builds agree
//! bit-for-bit.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::Float;

use crate::par;

/// Element type for all numeric kernels. f32 is the training precision;
/// f64 backs gradient verification.
pub trait Scalar: Float + Send + Sync + Sum + Debug + Display + 'static {
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }
    fn to_f64(self) -> f64 {
        self as f64
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
}

#[derive(Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "shape/data mismatch");
        Mat { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn transpose(&self) -> Mat<T> {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Cast elementwise between scalar types (f32 <-> f64).
    pub fn cast<U: Scalar>(&self) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| U::from_f64(Scalar::to_f64(x))).collect(),
        }
    }
}

impl<T: Scalar> Debug for Mat<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Mat[{}x{}]", self.rows, self.cols)
    }
}

fn matmul_row<T: Scalar>(a_row: &[T], b: &Mat<T>, out_row: &mut [T]) {
    out_row.fill(T::zero());
    for (k, &aik) in a_row.iter().enumerate() {
        let b_row = b.row(k);
        for (o, &bkj) in out_row.iter_mut().zip(b_row.iter()) {
            *o = *o + aik * bkj;
        }
    }
}

/// C = A * B, parallel over output rows when the `parallel` feature is on.
pub fn matmul<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    assert_eq!(a.cols, b.rows, "matmul shape mismatch");
    let mut out = Mat::zeros(a.rows, b.cols);
    let cols = out.cols.max(1);
    par::for_each_row(&mut out.data, cols, |i, out_row| {
        matmul_row(a.row(i), b, out_row);
    });
    out
}

/// Sequential matmul with the identical row kernel. Kept unconditionally so
/// benchmarks can compare against the parallel path in one build.
pub fn matmul_seq<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    assert_eq!(a.cols, b.rows, "matmul shape mismatch");
    let mut out = Mat::zeros(a.rows, b.cols);
    let cols = out.cols;
    for i in 0..a.rows {
        let row = &mut out.data[i * cols..(i + 1) * cols];
        matmul_row(a.row(i), b, row);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matmul_small_known() {
        let a = Mat::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let b = Mat::from_vec(3, 2, vec![7.0, 8.0, 9.0, 10.0, 11.0, 12.0]);
        let c = matmul(&a, &b);
        assert_eq!(c.data, vec![58.0, 64.0, 139.0, 154.0]);
    }

    #[test]
    fn parallel_and_sequential_agree_bitwise() {
        let mut rng = crate::rng::derive_rng(3, &[9]);
        use rand::Rng;
        let a = Mat::from_fn(17, 23, |_, _| rng.gen::<f32>() - 0.5);
        let b = Mat::from_fn(23, 11, |_, _| rng.gen::<f32>() - 0.5);
        let c1 = matmul(&a, &b);
        let c2 = matmul_seq(&a, &b);
        assert_eq!(c1.data, c2.data);
    }

    #[test]
    fn transpose_roundtrip() {
        let a = Mat::from_vec(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(a.transpose().transpose().data, a.data);
    }
}
