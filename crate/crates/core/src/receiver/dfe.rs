//! MMSE decision-feedback equalizer design and the running equalizer.
//!
//! With taps in the Hermitian convention the cascade of the feedforward filter
//! `w` and the channel `h` is the plain convolution `b = w * h`. The decision
//! for symbol `n - D` (with `D = l_ff - 1`) is taken from
//! `w^H z[n] - f^H d[n]`, where `z[n]` is the newest-first feedforward window,
//! `d[n] = [x[n-D-1], .., x[n-D-l_fb]]` the past decisions and `f_j = b[D + j]`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::linalg::{cholesky_solve_in_place, dot_h, norm_sqr, History};
use crate::waveform::bpsk_slice;

/// Ridge added to the feedforward normal equations.
pub const DFE_RIDGE: f64 = 1e-9;

/// Feedforward and feedback weights with the decision delay.
#[derive(Debug, Clone, PartialEq)]
pub struct DfeDesign {
    pub fff: Vec<Complex64>,
    pub fbf: Vec<Complex64>,
    pub delay: usize,
}

impl DfeDesign {
    /// All-zero filters of the given lengths.
    pub fn zeros(l_ff: usize, l_fb: usize) -> Self {
        DfeDesign {
            fff: vec![Complex64::new(0.0, 0.0); l_ff],
            fbf: vec![Complex64::new(0.0, 0.0); l_fb],
            delay: l_ff.saturating_sub(1),
        }
    }
}

/// Reusable workspace for repeated designs of the same dimensions.
#[derive(Debug, Clone, Default)]
pub struct DfeDesigner {
    r: Vec<Complex64>,
    enter: Vec<usize>,
    leave: Vec<usize>,
}

impl DfeDesigner {
    pub fn new() -> Self {
        Self::default()
    }

    /// Design into `out`, reusing its allocations.
    pub fn design_into(
        &mut self,
        h: &[Complex64],
        noise_power: f64,
        l_ff: usize,
        l_fb: usize,
        out: &mut DfeDesign,
    ) -> Result<()> {
        if l_ff == 0 {
            return Err(invalid("l_ff", "feedforward filter needs at least one tap"));
        }
        if h.is_empty() || norm_sqr(h) == 0.0 {
            return Err(Error::Singular("DFE design with an all-zero channel"));
        }
        if !(noise_power >= 0.0) {
            return Err(invalid("noise_power", "must be nonnegative"));
        }
        let l = h.len();
        let f = l_ff;
        let delay = f - 1;
        // combined response indices 0..=last
        let last = f + l - 2;
        // decided (fed back) indices
        let fb_lo = delay + 1;
        let fb_hi = (delay + l_fb).min(last);
        let undecided = |k: usize| k <= delay || k > fb_hi;

        // Points where the undecided set U changes when shifted by one:
        // R[a+1][b+1] = R[a][b] + sum_{j in (U-1)\U} t(j) - sum_{j in U\(U-1)} t(j)
        // with t(j) = conj(h[j-a]) h[j-b].
        self.enter.clear();
        self.leave.clear();
        let has_fb = l_fb > 0 && fb_lo <= fb_hi;
        if has_fb {
            // U = [0, delay] u [fb_hi+1, last]
            self.leave.push(delay);
            if fb_hi < last {
                self.enter.push(fb_hi);
                self.leave.push(last);
            }
        } else {
            self.leave.push(last);
        }

        let term = |j: isize, a: usize, b: usize| -> Complex64 {
            let ia = j - a as isize;
            let ib = j - b as isize;
            if ia < 0 || ib < 0 || ia >= l as isize || ib >= l as isize {
                Complex64::new(0.0, 0.0)
            } else {
                h[ia as usize].conj() * h[ib as usize]
            }
        };

        self.r.clear();
        self.r.resize(f * f, Complex64::new(0.0, 0.0));
        let r = &mut self.r;
        // Seed each diagonal from row 0 (b >= a) directly, then walk it.
        for b0 in 0..f {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in b0..=(l - 1).min(last) {
                if undecided(k) {
                    acc += term(k as isize, 0, b0);
                }
            }
            r[b0] = acc;
            let (mut a, mut b) = (0usize, b0);
            while b + 1 < f {
                let mut next = acc;
                for &j in &self.enter {
                    next += term(j as isize, a, b);
                }
                for &j in &self.leave {
                    next -= term(j as isize, a, b);
                }
                a += 1;
                b += 1;
                acc = next;
                r[a * f + b] = acc;
            }
        }
        // Lower triangle by symmetry, loading on the diagonal.
        for a in 0..f {
            r[a * f + a] = Complex64::new(r[a * f + a].re + noise_power + DFE_RIDGE, 0.0);
            for b in 0..a {
                r[a * f + b] = r[b * f + a].conj();
            }
        }

        // right-hand side: column `delay` of the channel matrix, conj(h[delay - a])
        out.fff.clear();
        out.fff.extend((0..f).map(|a| {
            let idx = delay as isize - a as isize;
            if idx >= 0 && (idx as usize) < l {
                h[idx as usize].conj()
            } else {
                Complex64::new(0.0, 0.0)
            }
        }));
        cholesky_solve_in_place(r, &mut out.fff)?;
        out.delay = delay;

        out.fbf.clear();
        out.fbf.extend((1..=l_fb).map(|j| cascade_tap(&out.fff, h, delay + j)));
        Ok(())
    }
}

/// Tap `k` of the cascade `fff * h`.
#[inline]
pub fn cascade_tap(fff: &[Complex64], h: &[Complex64], k: usize) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let lo = k.saturating_sub(h.len() - 1);
    let hi = k.min(fff.len() - 1);
    if lo > hi {
        return acc;
    }
    for a in lo..=hi {
        acc += fff[a] * h[k - a];
    }
    acc
}

/// MMSE-DFE design for channel `h` (Hermitian taps) at decision delay `l_ff - 1`.
pub fn design_dfe(h: &[Complex64], noise_power: f64, l_ff: usize, l_fb: usize) -> Result<DfeDesign> {
    let mut out = DfeDesign::zeros(l_ff, l_fb);
    DfeDesigner::new().design_into(h, noise_power, l_ff, l_fb, &mut out)?;
    Ok(out)
}

/// Output of one equalizer step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DfeOutput {
    pub soft: Complex64,
    pub decision: Complex64,
}

/// Running DFE: feedforward window over `r^[n]` and the feedback decisions.
#[derive(Debug, Clone)]
pub struct Equalizer {
    pub design: DfeDesign,
    ff: History,
    fb: History,
}

impl Equalizer {
    pub fn new(design: DfeDesign) -> Self {
        let ff = History::new(design.fff.len());
        let fb = History::new(design.fbf.len());
        Equalizer { design, ff, fb }
    }

    /// Push `r_hat`, return the soft and hard estimate of the symbol `delay`
    /// steps back. The fed-back symbol is `feedback` when given (training),
    /// otherwise the hard decision.
    pub fn step(&mut self, r_hat: Complex64, feedback: Option<Complex64>) -> DfeOutput {
        self.ff.push(r_hat);
        let mut soft = dot_h(&self.design.fff, self.ff.window());
        if !self.design.fbf.is_empty() {
            soft -= dot_h(&self.design.fbf, self.fb.window());
        }
        let decision = bpsk_slice(soft);
        if !self.design.fbf.is_empty() {
            self.fb.push(feedback.unwrap_or(decision));
        }
        DfeOutput { soft, decision }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_tap_is_scalar_mmse() {
        let d = design_dfe(&[c(1.0, 0.0)], 0.25, 1, 0).unwrap();
        assert!((d.fff[0] - c(1.0 / (1.0 + 0.25 + DFE_RIDGE), 0.0)).norm() < 1e-15);
        assert_eq!(d.delay, 0);
        assert!(d.fbf.is_empty());
    }

    #[test]
    fn delay_follows_ff_length() {
        let h: Vec<Complex64> = (0..70).map(|k| c((-0.25 * k as f64).exp(), 0.1)).collect();
        let d = design_dfe(&h, 1e-3, 70, 50).unwrap();
        assert_eq!(d.delay, 69);
        assert_eq!(d.fff.len(), 70);
        assert_eq!(d.fbf.len(), 50);
    }

    #[test]
    fn zero_channel_rejected() {
        assert!(design_dfe(&[c(0.0, 0.0); 3], 0.1, 4, 2).is_err());
        assert!(design_dfe(&[c(1.0, 0.0)], 0.1, 0, 2).is_err());
    }

    #[test]
    fn identity_equalizer_slices() {
        let mut eq = Equalizer::new(DfeDesign { fff: vec![c(1.0, 0.0)], fbf: vec![], delay: 0 });
        for r in [c(0.3, 5.0), c(-0.1, -2.0), c(2.0, 0.0)] {
            let out = eq.step(r, None);
            assert_eq!(out.decision, c(if r.re >= 0.0 { 1.0 } else { -1.0 }, 0.0));
        }
    }
}
