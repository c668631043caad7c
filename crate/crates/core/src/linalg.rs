//! 2×2 complex matrices and a small dense solver.

use crate::{Complex64, C0, C1};
use serde::Serialize;
use std::ops::{Mul, Sub};

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[C1, C0], [C0, C1]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }
    pub fn scalar(s: Complex64) -> Self {
        Mat2([[s, C0], [C0, s]])
    }
    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }
    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
    pub fn transpose(&self) -> Self {
        Mat2([[self.0[0][0], self.0[1][0]], [self.0[0][1], self.0[1][1]]])
    }
    /// Inverse of a unimodular matrix, exact up to the factor `1/det`.
    pub fn inverse(&self) -> Self {
        let d = self.det();
        Mat2([[self.0[1][1] / d, -self.0[0][1] / d], [-self.0[1][0] / d, self.0[0][0] / d]])
    }
    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
    pub fn scale(&self, s: Complex64) -> Self {
        Mat2([[self.0[0][0] * s, self.0[0][1] * s], [self.0[1][0] * s, self.0[1][1] * s]])
    }
    pub fn apply(&self, v: [Complex64; 2]) -> [Complex64; 2] {
        [self.0[0][0] * v[0] + self.0[0][1] * v[1], self.0[1][0] * v[0] + self.0[1][1] * v[1]]
    }
    /// Frobenius inner product `Σ conj(a_ij) b_ij`.
    pub fn inner(&self, other: &Mat2) -> Complex64 {
        self.0.iter().flatten().zip(other.0.iter().flatten()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Eigenvalues `Δ ± sqrt(Δ² - det)` with `Δ = tr/2`.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let h = self.trace() / 2.0;
        let disc = (h * h - self.det()).sqrt();
        [h + disc, h - disc]
    }

    /// Unit eigenvector for eigenvalue `lambda`, taken from the better-conditioned row.
    pub fn eigenvector(&self, lambda: Complex64) -> [Complex64; 2] {
        let a = self.0[0][0] - lambda;
        let b = self.0[0][1];
        let c = self.0[1][0];
        let d = self.0[1][1] - lambda;
        let v = if a.norm() + b.norm() >= c.norm() + d.norm() { [b, -a] } else { [d, -c] };
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        if n == 0.0 {
            [C1, C0]
        } else {
            [v[0] / n, v[1] / n]
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2([
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] -= o.0[i][j];
            }
        }
        r
    }
}

/// Solves `A X = B` in place by Gaussian elimination with partial pivoting.
/// `a` is `n×n` row-major, `b` is `n×m` row-major and receives `X`.
/// Returns `false` on an exactly singular pivot.
pub fn solve_in_place(a: &mut [Complex64], b: &mut [Complex64], n: usize, m: usize) -> bool {
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].norm_sqr();
        for row in col + 1..n {
            let v = a[row * n + col].norm_sqr();
            if v > best {
                best = v;
                piv = row;
            }
        }
        if best == 0.0 {
            return false;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            for k in 0..m {
                b.swap(col * m + k, piv * m + k);
            }
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let f = a[row * n + col] * inv;
            if f == C0 {
                continue;
            }
            for k in col..n {
                let t = a[col * n + k];
                a[row * n + k] -= f * t;
            }
            for k in 0..m {
                let t = b[col * m + k];
                b[row * m + k] -= f * t;
            }
        }
    }
    for col in (0..n).rev() {
        let inv = 1.0 / a[col * n + col];
        for k in 0..m {
            let mut s = b[col * m + k];
            for j in col + 1..n {
                s -= a[col * n + j] * b[j * m + k];
            }
            b[col * m + k] = s * inv;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_small_system() {
        let c = |r: f64, i: f64| Complex64::new(r, i);
        let mut a =
            vec![c(2.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, -1.0), c(3.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 2.0), c(4.0, 0.0)];
        let a0 = a.clone();
        let x = [c(1.0, 0.0), c(-2.0, 1.0), c(0.5, 0.5)];
        let mut b: Vec<Complex64> = (0..3).map(|i| (0..3).map(|j| a0[i * 3 + j] * x[j]).sum()).collect();
        assert!(solve_in_place(&mut a, &mut b, 3, 1));
        for i in 0..3 {
            assert!((b[i] - x[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn eigenpairs() {
        let m = Mat2::new(Complex64::new(2.0, 0.0), C1, C0, Complex64::new(0.5, 0.0));
        for l in m.eigenvalues() {
            let v = m.eigenvector(l);
            let w = m.apply(v);
            assert!((w[0] - l * v[0]).norm() + (w[1] - l * v[1]).norm() < 1e-13);
        }
    }
}
