//! Small dense complex kernels used by the estimator and the equalizer design.
//!
//! Matrices are row-major `n x n` slices.

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `a^H b`.
#[inline]
pub fn dot_h(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    let mut re = 0.0;
    let mut im = 0.0;
    for (x, y) in a.iter().zip(b) {
        // conj(x) * y
        re += x.re * y.re + x.im * y.im;
        im += x.re * y.im - x.im * y.re;
    }
    Complex64::new(re, im)
}

/// Squared Euclidean norm.
#[inline]
pub fn norm_sqr(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// Squared Euclidean distance.
#[inline]
pub fn dist_sqr(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// `out = m * v` for a row-major `n x n` matrix.
pub fn matvec(m: &[Complex64], v: &[Complex64], out: &mut [Complex64]) {
    let n = v.len();
    debug_assert_eq!(m.len(), n * n);
    for (row, o) in m.chunks_exact(n).zip(out.iter_mut()) {
        let mut re = 0.0;
        let mut im = 0.0;
        for (a, b) in row.iter().zip(v) {
            re += a.re * b.re - a.im * b.im;
            im += a.re * b.im + a.im * b.re;
        }
        *o = Complex64::new(re, im);
    }
}

/// Solve `A x = b` for Hermitian positive definite `A` (only the lower
/// triangle is read). `a` is overwritten with its Cholesky factor and `b`
/// with the solution.
pub fn cholesky_solve_in_place(a: &mut [Complex64], b: &mut [Complex64]) -> Result<()> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    // A = L L^H, L stored in the lower triangle.
    for j in 0..n {
        let mut d = a[j * n + j].re;
        for k in 0..j {
            d -= a[j * n + k].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::Singular("cholesky"));
        }
        let ljj = num_traits::Float::sqrt(d);
        a[j * n + j] = Complex64::new(ljj, 0.0);
        let inv = 1.0 / ljj;
        let (upper, lower) = a.split_at_mut((j + 1) * n);
        let row_j = &upper[j * n..j * n + j];
        for row_i in lower.chunks_exact_mut(n) {
            // L[i][j] = (A[i][j] - sum_k L[i][k] conj(L[j][k])) / L[j][j]
            let mut re = row_i[j].re;
            let mut im = row_i[j].im;
            for (x, y) in row_i[..j].iter().zip(row_j) {
                re -= x.re * y.re + x.im * y.im;
                im -= x.im * y.re - x.re * y.im;
            }
            row_i[j] = Complex64::new(re * inv, im * inv);
        }
    }
    // forward: L z = b
    for i in 0..n {
        let row = &a[i * n..i * n + i];
        let mut s = b[i];
        for (l, z) in row.iter().zip(&b[..i]) {
            s -= l * z;
        }
        b[i] = s / a[i * n + i].re;
    }
    // backward: L^H x = z
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i].conj() * b[k];
        }
        b[i] = s / a[i * n + i].re;
    }
    Ok(())
}

/// Fixed-capacity history, newest first, readable as one contiguous slice.
#[derive(Debug, Clone)]
pub struct History {
    buf: Vec<Complex64>,
    cap: usize,
    pos: usize,
}

impl History {
    pub fn new(cap: usize) -> Self {
        History { buf: vec![Complex64::new(0.0, 0.0); 2 * cap.max(1)], cap: cap.max(1), pos: 0 }
    }

    #[inline]
    pub fn push(&mut self, x: Complex64) {
        self.pos = if self.pos == 0 { self.cap - 1 } else { self.pos - 1 };
        self.buf[self.pos] = x;
        self.buf[self.pos + self.cap] = x;
    }

    /// `[newest, ..., oldest]`.
    #[inline]
    pub fn window(&self) -> &[Complex64] {
        &self.buf[self.pos..self.pos + self.cap]
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }
}

/// Identity scaled by `s`.
pub fn scaled_identity(n: usize, s: f64) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = Complex64::new(s, 0.0);
    }
    m
}

/// Largest `|m[i][j] - conj(m[j][i])|`.
pub fn hermitian_defect(m: &[Complex64], n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            let d = (m[i * n + j] - m[j * n + i].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Full linear convolution `a * b`.
pub fn convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}
