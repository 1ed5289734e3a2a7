//! Exponentially weighted recursive least squares for `y = u^H v + noise`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{dot_h, scaled_identity};

/// Estimate vector, inverse correlation matrix and tuning of one RLS filter.
#[derive(Debug, Clone)]
pub struct RlsState {
    u: Vec<Complex64>,
    /// Row-major `dim x dim`, kept exactly Hermitian.
    p: Vec<Complex64>,
    lambda: f64,
    delta: f64,
    pv: Vec<Complex64>,
    resets: u32,
}

impl RlsState {
    /// `u = 0`, `P = I / delta`.
    pub fn new(dim: usize, lambda: f64, delta: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(invalid("lambda", "forgetting factor must lie in (0, 1]"));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid("delta", "must be positive"));
        }
        Ok(RlsState {
            u: vec![Complex64::new(0.0, 0.0); dim],
            p: scaled_identity(dim, 1.0 / delta),
            lambda,
            delta,
            pv: vec![Complex64::new(0.0, 0.0); dim],
            resets: 0,
        })
    }

    /// Joint estimator over `[h ; c]`, dimension `L + M`.
    pub fn joint(m: usize, l: usize, lambda: f64, delta: f64) -> Result<Self> {
        if m == 0 || l == 0 {
            return Err(invalid("M, L", "channel lengths must be at least 1"));
        }
        Self::new(m + l, lambda, delta)
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    pub fn estimate(&self) -> &[Complex64] {
        &self.u
    }

    pub fn inverse_correlation(&self) -> &[Complex64] {
        &self.p
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// How many times `P` was reinitialized after losing definiteness.
    pub fn resets(&self) -> u32 {
        self.resets
    }

    fn reset_p(&mut self) {
        self.p = scaled_identity(self.dim(), 1.0 / self.delta);
        self.resets += 1;
    }

    /// A priori prediction `u^H v`.
    pub fn predict(&self, v: &[Complex64]) -> Complex64 {
        dot_h(&self.u, v)
    }

    /// One update with regressor `v` and observation `y`; returns the a priori
    /// error `e = y - u^H v`.
    pub fn update(&mut self, v: &[Complex64], y: Complex64) -> Result<Complex64> {
        let n = self.dim();
        check_len("RLS regressor", n, v.len())?;
        if !y.re.is_finite() || !y.im.is_finite() || v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("RLS input"));
        }

        let e = y - dot_h(&self.u, v);
        crate::linalg::matvec(&self.p, v, &mut self.pv);
        let mut kappa = self.lambda + dot_h(v, &self.pv).re;
        if !(kappa > f64::MIN_POSITIVE) || !kappa.is_finite() {
            self.reset_p();
            crate::linalg::matvec(&self.p, v, &mut self.pv);
            kappa = self.lambda + dot_h(v, &self.pv).re;
        }
        let inv_kappa = 1.0 / kappa;
        let inv_lambda = 1.0 / self.lambda;

        // gamma = P v / kappa;  P <- (P - gamma (P v)^H) / lambda
        let pv = &self.pv;
        for i in 0..n {
            let gi = pv[i] * inv_kappa;
            let row = &mut self.p[i * n..(i + 1) * n];
            for j in i..n {
                let pj = pv[j];
                // gi * conj(pj)
                let re = gi.re * pj.re + gi.im * pj.im;
                let im = gi.im * pj.re - gi.re * pj.im;
                row[j] = Complex64::new((row[j].re - re) * inv_lambda, (row[j].im - im) * inv_lambda);
            }
            row[i].im = 0.0;
        }
        for i in 0..n {
            for j in 0..i {
                self.p[i * n + j] = self.p[j * n + i].conj();
            }
        }
        let ec = e.conj() * inv_kappa;
        for (u, g) in self.u.iter_mut().zip(pv) {
            *u += ec * g;
        }
        if (0..n).any(|i| !(self.p[i * n + i].re > 0.0)) {
            self.reset_p();
        }
        Ok(e)
    }
}
