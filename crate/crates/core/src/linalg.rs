//! Dense complex matrices, LU factorisation with partial pivoting, and a
//! 1-norm condition estimate.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Largest condition estimate accepted by [`Lu::solve_checked`].
pub const MAX_CONDITION: f64 = 1e14;

/// Row-major square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![ZERO; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds the matrix row by row; `fill(i, row)` writes row `i`.
    pub fn from_rows<F>(n: usize, fill: F) -> Self
    where
        F: Fn(usize, &mut [Complex64]) + Sync + Send,
    {
        let mut m = Self::zeros(n);
        if n > 0 {
            par::for_each_chunk_mut(&mut m.data, n, fill);
        }
        m
    }

    /// Builds the matrix `rows` rows at a time; `fill(k, chunk)` writes rows
    /// `k * rows ..` as one contiguous slice.
    pub fn from_row_chunks<F>(n: usize, rows: usize, fill: F) -> Self
    where
        F: Fn(usize, &mut [Complex64]) + Sync + Send,
    {
        let mut m = Self::zeros(n);
        if n > 0 {
            par::for_each_chunk_mut(&mut m.data, rows * n, fill);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        par::map_range(self.n, |i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![0.0; self.n];
        for i in 0..self.n {
            for (c, v) in cols.iter_mut().zip(self.row(i)) {
                *c += v.norm();
            }
        }
        cols.into_iter().fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.n + j]
    }
}

/// `P A = L U` with unit lower `L`, both stored in place.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    norm1: f64,
}

impl Lu {
    /// Factorises `a`. Fails only on an exactly zero pivot.
    pub fn factor(mut a: Matrix) -> Result<Self> {
        let n = a.n;
        let norm1 = a.norm1();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularSystem { condition: f64::INFINITY });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let (head, tail) = a.data.split_at_mut((k + 1) * n);
            let pivot_row = &head[k * n..];
            let inv = 1.0 / pivot_row[k];
            par::for_each_chunk_mut(tail, n, |_, row| {
                let l = row[k] * inv;
                row[k] = l;
                if l != ZERO {
                    for j in k + 1..n {
                        row[j] -= l * pivot_row[j];
                    }
                }
            });
        }
        Ok(Self { lu: a, perm, norm1 })
    }

    pub fn dim(&self) -> usize {
        self.lu.n
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.n;
        assert_eq!(b.len(), n);
        // A = P^T L U, so A^H = U^H L^H P.
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s / self.lu[(i, i)].conj();
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)].conj() * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// Estimate of `||A||_1 ||A^-1||_1` (Hager's method with Higham's
    /// alternating-sign safeguard).
    pub fn condition_estimate(&self) -> f64 {
        let n = self.lu.n;
        if n == 0 {
            return 0.0;
        }
        let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0f64;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve(&x);
            let ny: f64 = y.iter().map(|v| v.norm()).sum();
            if ny <= est && last_j != usize::MAX {
                break;
            }
            est = est.max(ny);
            let xi: Vec<Complex64> = y.iter().map(|v| if v.norm() > 0.0 { v / v.norm() } else { Complex64::new(1.0, 0.0) }).collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z.iter().enumerate().map(|(i, v)| (i, v.norm())).fold((0, -1.0), |a, b| if b.1 > a.1 { b } else { a });
            let zx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= zx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![ZERO; n];
            x[j] = Complex64::new(1.0, 0.0);
        }
        let alt: Vec<Complex64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                Complex64::new(s * (1.0 + i as f64 / (n as f64 - 1.0).max(1.0)), 0.0)
            })
            .collect();
        let y = self.solve(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
        est.max(alt_est) * self.norm1
    }

    /// Solves after checking that the condition estimate is below
    /// [`MAX_CONDITION`]; returns the solution and the estimate.
    pub fn solve_checked(&self, b: &[Complex64]) -> Result<(Vec<Complex64>, f64)> {
        let cond = self.condition_estimate();
        if !(cond < MAX_CONDITION) {
            return Err(Error::SingularSystem { condition: cond });
        }
        Ok((self.solve(b), cond))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        m
    }

    fn inverse_norm1(a: &Matrix) -> f64 {
        let lu = Lu::factor(a.clone()).unwrap();
        let n = a.dim();
        (0..n)
            .map(|j| {
                let mut e = vec![ZERO; n];
                e[j] = Complex64::new(1.0, 0.0);
                lu.solve(&e).iter().map(|v| v.norm()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn solves_random_systems() {
        for (n, seed) in [(1, 1), (5, 2), (40, 3), (97, 4)] {
            let a = random_matrix(n, seed);
            let x: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
            let b = a.mul_vec(&x);
            let lu = Lu::factor(a.clone()).unwrap();
            let y = lu.solve(&b);
            let err = x.iter().zip(&y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10 * n as f64, "n={n}: {err}");
            let z = lu.solve_adjoint(&b);
            // Check A^H z = b.
            let mut r = 0.0f64;
            for i in 0..n {
                let s: Complex64 = (0..n).map(|k| a[(k, i)].conj() * z[k]).sum();
                r = r.max((s - b[i]).norm());
            }
            assert!(r < 1e-9 * (1.0 + b.iter().map(|v| v.norm()).fold(0.0, f64::max)));
        }
    }

    #[test]
    fn condition_estimate_is_close() {
        for seed in 0..5 {
            let a = random_matrix(30, seed);
            let exact = a.norm1() * inverse_norm1(&a);
            let est = Lu::factor(a).unwrap().condition_estimate();
            assert!(est <= exact * (1.0 + 1e-10) && est >= exact / 10.0, "{est} vs {exact}");
        }
        let id = Lu::factor(Matrix::identity(8)).unwrap();
        assert!((id.condition_estimate() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_systems_are_reported() {
        let z = Matrix::zeros(3);
        assert!(matches!(Lu::factor(z), Err(Error::SingularSystem { .. })));
        let mut a = random_matrix(6, 9);
        for j in 0..6 {
            a[(5, j)] = a[(0, j)] * 2.0 + a[(1, j)] * 1e-17;
        }
        match Lu::factor(a) {
            Err(Error::SingularSystem { .. }) => {}
            Ok(lu) => assert!(matches!(lu.solve_checked(&[ZERO; 6]), Err(Error::SingularSystem { .. }))),
            Err(e) => panic!("{e}"),
        }
    }
}
