//! Small dense matrices and an LU factorization with partial pivoting.
//!
//! Class counts are at most a few hundred, so everything here is plain
//! row-major `Vec` storage with cubic factorization.

use std::ops::{Index, IndexMut};

use crate::scalar::{sum, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    /// `self * x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| sum(self.row(i).iter().zip(x).map(|(&a, &b)| a * b)))
            .collect()
    }

    /// `x * self` for a row vector `x`.
    pub fn vec_mul(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.rows);
        (0..self.cols)
            .map(|j| sum((0..self.rows).map(|i| x[i] * self[(i, j)])))
            .collect()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| sum((0..self.rows).map(|i| self[(i, j)].abs())))
            .fold(T::zero(), T::max)
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// `P A = L U` with unit lower-triangular `L`, both packed into one matrix.
#[derive(Debug, Clone)]
pub struct Lu<T> {
    packed: Matrix<T>,
    perm: Vec<usize>,
    norm_one: T,
}

/// Returned when a pivot is exactly zero or not finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular {
    pub column: usize,
}

impl<T: Scalar> Lu<T> {
    pub fn factor(a: &Matrix<T>) -> Result<Self, Singular> {
        assert_eq!(a.rows(), a.cols(), "LU needs a square matrix");
        let n = a.rows();
        let norm_one = a.norm_one();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot_abs) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].abs()))
                    .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs == T::zero() || !pivot_abs.is_finite() {
                return Err(Singular { column: k });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                if factor != T::zero() {
                    for j in (k + 1)..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] = lu[(i, j)] - factor * u;
                    }
                }
            }
        }

        Ok(Self {
            packed: lu,
            perm,
            norm_one,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] = x[i] - self.packed[(i, k)] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] = x[i] - self.packed[(i, k)] * x[k];
            }
            x[i] = x[i] / self.packed[(i, i)];
        }
        x
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        assert_eq!(b.len(), n);
        // U^T w = b, then L^T v = w, then x = P^T v.
        let mut w = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                w[i] = w[i] - self.packed[(k, i)] * w[k];
            }
            w[i] = w[i] / self.packed[(i, i)];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                w[i] = w[i] - self.packed[(k, i)] * w[k];
            }
        }
        let mut x = vec![T::zero(); n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }

    /// Estimate of the one-norm condition number `||A||_1 ||A^-1||_1`.
    ///
    /// Hager's iteration with Higham's alternating-sign safeguard vector;
    /// never overestimates `||A^-1||_1` and is usually exact for small `n`.
    pub fn condition_estimate(&self) -> T {
        let n = self.dim();
        if n == 0 {
            return T::zero();
        }
        let nf = T::of(n as f64);
        let norm1 = |v: &[T]| sum(v.iter().map(|x| x.abs()));

        let mut x = vec![T::one() / nf; n];
        let mut estimate = T::zero();
        let mut last_index = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            estimate = estimate.max(norm1(&y));
            let signs: Vec<T> = y
                .iter()
                .map(|v| if *v >= T::zero() { T::one() } else { -T::one() })
                .collect();
            let z = self.solve_transpose(&signs);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            let ztx = sum(z.iter().zip(&x).map(|(&a, &b)| a * b));
            if zmax <= ztx || j == last_index {
                break;
            }
            last_index = j;
            x = vec![T::zero(); n];
            x[j] = T::one();
        }

        let alt: Vec<T> = (0..n)
            .map(|i| {
                let mag = if n > 1 {
                    T::one() + T::of(i as f64) / T::of((n - 1) as f64)
                } else {
                    T::one()
                };
                if i % 2 == 0 {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let alt_est = T::of(2.0) * norm1(&self.solve(&alt)) / (T::of(3.0) * nf);
        self.norm_one * estimate.max(alt_est)
    }
}
