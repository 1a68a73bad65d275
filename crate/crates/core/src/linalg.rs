// SPDX-License-Identifier: Apache-2.0

//! Closed-form 2x2 linear algebra: eigenvalues, definiteness and the
//! continuous Lyapunov equation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn transpose(&self) -> Mat2 {
        let m = self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(out)
    }

    pub fn add(&self, rhs: &Mat2) -> Mat2 {
        let (a, b) = (self.0, rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let half_tr = 0.5 * self.trace();
        let disc = half_tr * half_tr - self.det();
        if disc >= 0.0 {
            let s = disc.sqrt();
            // Avoid cancellation in the smaller-magnitude root.
            let big = if half_tr >= 0.0 { half_tr + s } else { half_tr - s };
            let small = if big != 0.0 { self.det() / big } else { 0.0 };
            let (lo, hi) = if big < small { (big, small) } else { (small, big) };
            [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
        } else {
            let im = (-disc).sqrt();
            [Complex64::new(half_tr, -im), Complex64::new(half_tr, im)]
        }
    }

    /// Both eigenvalues strictly in the open left half-plane.
    pub fn is_hurwitz(&self) -> bool {
        self.trace() < 0.0 && self.det() > 0.0
    }
}

/// Symmetric 2x2 matrix `[[a, b], [b, c]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl SymMatrix2 {
    pub const IDENTITY: SymMatrix2 = SymMatrix2 { a: 1.0, b: 0.0, c: 1.0 };

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub fn scaled_identity(s: f64) -> Self {
        Self { a: s, b: 0.0, c: s }
    }

    pub fn to_mat(&self) -> Mat2 {
        Mat2([[self.a, self.b], [self.b, self.c]])
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.a + self.c);
        let radius = (0.5 * (self.a - self.c)).hypot(self.b);
        [mean - radius, mean + radius]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0.0 && self.a * self.c - self.b * self.b > 0.0
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.b * v[0] + self.c * v[1]]
    }
}

/// `A^T P + P A + Q`, for checking a Lyapunov solution.
pub fn lyapunov_residual(a: &Mat2, p: &SymMatrix2, q: &SymMatrix2) -> Mat2 {
    let pm = p.to_mat();
    a.transpose().mul(&pm).add(&pm.mul(a)).add(&q.to_mat())
}

/// Solve `A^T P + P A = -Q` for symmetric `P`.
///
/// With `P = [[p, s], [s, r]]` the matrix equation collapses to three scalar
/// equations:
///
/// ```text
/// 2 (a11 p + a21 s)              = -q11
/// a12 p + (a11 + a22) s + a21 r  = -q12
/// 2 (a12 s + a22 r)              = -q22
/// ```
///
/// which are solved by Cramer's rule.
pub fn solve_lyapunov(a: &Mat2, q: &SymMatrix2) -> Result<SymMatrix2> {
    if !a.is_hurwitz() {
        return Err(Error::NotHurwitz);
    }
    if !q.is_positive_definite() {
        return Err(Error::NotPositiveDefinite);
    }
    let [[a11, a12], [a21, a22]] = a.0;
    let m = [
        [2.0 * a11, 2.0 * a21, 0.0],
        [a12, a11 + a22, a21],
        [0.0, 2.0 * a12, 2.0 * a22],
    ];
    let rhs = [-q.a, -q.b, -q.c];
    let det = det3(&m);
    // det = 4 tr(A) det(A), non-zero for Hurwitz A.
    let solve_col = |col: usize| {
        let mut mc = m;
        for (row, r) in mc.iter_mut().zip(rhs) {
            row[col] = r;
        }
        det3(&mc) / det
    };
    let p = SymMatrix2::new(solve_col(0), solve_col(1), solve_col(2));
    if !p.is_positive_definite() {
        // Only reachable through round-off on nearly marginal A.
        return Err(Error::NotPositiveDefinite);
    }
    Ok(p)
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
