//! Oracle and invariant checks runnable from the command line.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uwfd_core::channel::{apply_channel, gen_tap_trajectory, PdpSpec, TapTrajectory};
use uwfd_core::linalg::{hermitian_defect, History};
use uwfd_core::link::{run_link, ExperimentConfig, Scenario};
use uwfd_core::receiver::{cancel_si, cascade_tap, design_dfe, Equalizer, Mode, RlsState, DFE_RIDGE};
use uwfd_core::rng::complex_gauss;
use uwfd_core::waveform::{rrc_taps, ComplexSeq};

/// Outcome of one check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Check { name, passed, detail }
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gauss(r, 1.0)).collect()
}

/// RLS with `lambda = 1` against the regularized normal equations.
pub fn rls_batch_ls() -> Check {
    let mut worst = 0.0f64;
    for (trial, dim) in (6..=12).enumerate() {
        let mut r = ChaCha8Rng::seed_from_u64(100 + trial as u64);
        let delta = 1e-8;
        let u_true = random_vec(&mut r, dim);
        let mut rls = RlsState::new(dim, 1.0, delta).expect("valid");
        let mut a = DMatrix::<Complex64>::identity(dim, dim) * c(delta, 0.0);
        let mut b = DVector::<Complex64>::zeros(dim);
        for _ in 0..50 {
            let v = random_vec(&mut r, dim);
            let y = u_true.iter().zip(&v).map(|(p, q)| p.conj() * q).sum::<Complex64>() + complex_gauss(&mut r, 0.1);
            if rls.update(&v, y).is_err() {
                return Check::new("rls_batch_ls", false, "update failed".into());
            }
            let vv = DVector::from_column_slice(&v);
            a += &vv * vv.adjoint();
            b += &vv * y.conj();
        }
        let Some(u) = a.lu().solve(&b) else {
            return Check::new("rls_batch_ls", false, "oracle system singular".into());
        };
        let diff: f64 = rls.estimate().iter().zip(u.iter()).map(|(p, q)| (p - q).norm_sqr()).sum();
        worst = worst.max((diff / u.norm_squared()).sqrt());
    }
    Check::new("rls_batch_ls", worst < 1e-6, format!("max relative error {worst:.2e} (limit 1e-6)"))
}

/// Cancelling with the true SI channel leaves exactly `y - s`.
pub fn perfect_cancellation() -> Check {
    let cfg = ExperimentConfig { n_symbols: 2000, ..Default::default() };
    let sc = match Scenario::generate(&cfg, 11) {
        Ok(s) => s,
        Err(e) => return Check::new("perfect_cancellation", false, e.to_string()),
    };
    let mut window = History::new(sc.si.n_taps());
    let mut mismatches = 0;
    let mut worst = 0.0f64;
    for n in 0..sc.len() {
        window.push(sc.i.samples[n]);
        let y = sc.rx.y.samples[n];
        let r_hat = cancel_si(y, sc.si.at(n), window.window()).expect("lengths agree");
        if r_hat != y - sc.rx.s[n] {
            mismatches += 1;
        }
        let scale = sc.rx.s[n].norm() + sc.rx.r[n].norm() + sc.rx.w[n].norm();
        worst = worst.max((r_hat - sc.rx.r[n] - sc.rx.w[n]).norm() / (f64::EPSILON * scale));
    }
    Check::new(
        "perfect_cancellation",
        mismatches == 0 && worst <= 4.0,
        format!("{mismatches} samples differ from y - s; |r^ - (r + w)| <= {worst:.1} ulp of the inputs"),
    )
}

/// MMSE-DFE on the noiseless channel `[1, 0.5]` decides every symbol.
pub fn dfe_two_tap() -> Check {
    let h = [c(1.0, 0.0), c(0.5, 0.0)];
    let d = match design_dfe(&h, 0.0, 8, 4) {
        Ok(d) => d,
        Err(e) => return Check::new("dfe_two_tap", false, e.to_string()),
    };
    let delay = d.delay;
    let fb_ok = d.fbf.iter().enumerate().all(|(j, f)| *f == cascade_tap(&d.fff, &h, delay + 1 + j));
    let mut r = ChaCha8Rng::seed_from_u64(7);
    let n = 5000;
    let x: Vec<Complex64> = (0..n).map(|_| c(if r.random::<bool>() { 1.0 } else { -1.0 }, 0.0)).collect();
    let y = apply_channel(&ComplexSeq::symbol_rate(x.clone(), 5000.0), &TapTrajectory::constant(&h, n))
        .expect("lengths agree");
    let mut eq = Equalizer::new(d);
    let errors = y
        .samples
        .iter()
        .enumerate()
        .filter(|&(m, &ym)| {
            let out = eq.step(ym, None);
            m >= delay && out.decision != x[m - delay]
        })
        .count();
    Check::new("dfe_two_tap", errors == 0 && fb_ok, format!("{errors} errors after the first {delay} outputs"))
}

/// The DFE filters solve the dense MMSE system.
pub fn dfe_dense_solution() -> Check {
    let mut r = ChaCha8Rng::seed_from_u64(31);
    let (l, l_ff, l_fb, noise) = (5, 9, 4, 0.05);
    let h = random_vec(&mut r, l);
    let d = design_dfe(&h, noise, l_ff, l_fb).expect("valid design");
    let delay = l_ff - 1;
    let cols = l_ff + l - 1;
    let big_h = DMatrix::from_fn(l_ff, cols, |a, j| if j >= a && j - a < l { h[j - a].conj() } else { c(0.0, 0.0) });
    let mut a = DMatrix::<Complex64>::identity(l_ff, l_ff) * c(noise + DFE_RIDGE, 0.0);
    for j in (0..cols).filter(|&j| !(j > delay && j <= delay + l_fb)) {
        let col = big_h.column(j);
        a += col * col.adjoint();
    }
    let Some(w) = a.lu().solve(&big_h.column(delay).into_owned()) else {
        return Check::new("dfe_dense_solution", false, "oracle system singular".into());
    };
    let err = d.fff.iter().zip(w.iter()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max) / w.norm();
    Check::new("dfe_dense_solution", err < 1e-8, format!("max relative weight error {err:.2e}"))
}

/// Raised-cosine cascade of the RRC pair vanishes at nonzero symbol offsets.
pub fn rrc_nyquist() -> Check {
    let (sps, span) = (32, 12);
    let p = match rrc_taps(0.5, span, sps) {
        Ok(p) => p,
        Err(e) => return Check::new("rrc_nyquist", false, e.to_string()),
    };
    let peak = span * sps;
    let at = |k: usize| -> f64 { (0..p.len()).filter(|&a| k >= a && k - a < p.len()).map(|a| p[a] * p[k - a]).sum() };
    let main = at(peak);
    let worst = (1..=span)
        .flat_map(|j| [peak - j * sps, peak + j * sps])
        .map(|k| at(k).abs() / main)
        .fold(0.0, f64::max);
    Check::new("rrc_nyquist", worst < 1e-2, format!("worst off-peak sample {worst:.2e} of peak (limit 1e-2)"))
}

/// Taps decorrelate to `1/e` after `T_c B` symbols.
pub fn gauss_markov_lag() -> Check {
    let n = 1_000_000;
    let pdp = PdpSpec::new(vec![1.0], vec![false]).expect("valid");
    let traj = match gen_tap_trajectory(&pdp, 70.0, n, 5000.0, &mut ChaCha8Rng::seed_from_u64(3)) {
        Ok(t) => t,
        Err(e) => return Check::new("gauss_markov_lag", false, e.to_string()),
    };
    let s = traj.tap_series(0);
    let p0: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
    let corr = |lag: usize| -> f64 {
        let acc: Complex64 = s[lag..].iter().zip(&s).map(|(a, b)| a * b.conj()).sum();
        acc.re / (n - lag) as f64 / p0
    };
    let target = (-1.0f64).exp();
    let lag = (1..3000).find(|&l| corr(l) <= target);
    match lag {
        Some(l) => Check::new(
            "gauss_markov_lag",
            (l as f64 - 350.0).abs() <= 0.15 * 350.0,
            format!("1/e lag {l} symbols (350 +/- 15%)"),
        ),
        None => Check::new("gauss_markov_lag", false, "no decorrelation within 3000 symbols".into()),
    }
}

/// The RLS inverse correlation stays Hermitian over a long run.
pub fn rls_hermitian() -> Check {
    let dim = 8;
    let mut r = ChaCha8Rng::seed_from_u64(5);
    let u = random_vec(&mut r, dim);
    let mut rls = RlsState::new(dim, 0.98, 1e-4).expect("valid");
    for _ in 0..100_000 {
        let v = random_vec(&mut r, dim);
        let y = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex64>() + complex_gauss(&mut r, 1e-3);
        if rls.update(&v, y).is_err() {
            return Check::new("rls_hermitian", false, "update failed".into());
        }
    }
    let d = hermitian_defect(rls.inverse_correlation(), dim);
    Check::new("rls_hermitian", d <= 1e-10, format!("max |P - P^H| = {d:.1e}"))
}

/// Same seed, same result.
pub fn determinism() -> Check {
    let cfg = ExperimentConfig { n_symbols: 1200, ..Default::default() };
    let a = run_link(&cfg, Mode::Proposed, 9);
    let b = run_link(&cfg, Mode::Proposed, 9);
    let same = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    Check::new("determinism", same, if same { "identical".into() } else { "runs differ".into() })
}

/// The oracle equivalences: batch LS, perfect cancellation, DFE, RRC and
/// fading-process checks.
pub fn oracle_suite() -> Vec<Check> {
    vec![rls_batch_ls(), perfect_cancellation(), dfe_two_tap(), rrc_nyquist(), gauss_markov_lag()]
}

/// Everything `selftest` runs.
pub fn all() -> Vec<Check> {
    let mut v = oracle_suite();
    v.extend([dfe_dense_solution(), rls_hermitian(), determinism()]);
    v
}
