//! Library outputs checked against independent reference computations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uwfd_core::channel::{apply_channel, gauss_markov_rho, gen_tap_trajectory, PdpSpec, TapTrajectory};
use uwfd_core::linalg::History;
use uwfd_core::link::{ExperimentConfig, Scenario};
use uwfd_core::metrics::residual_mse;
use uwfd_core::receiver::{cancel_si, design_dfe, Equalizer, RlsState, DFE_RIDGE};
use uwfd_core::rng::complex_gauss;
use uwfd_core::waveform::{
    downconvert_matched_downsample, make_local_reference, modulate_bpsk, pa_apply, pulse_shape_upconvert,
    rrc_taps, ComplexSeq, FrontEndConfig, PaCoeffs, PassbandSeq, SampleSeq,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gauss(r, 1.0)).collect()
}

/// Regularized least squares: `(sum v v^H + delta I) u = sum v conj(y)`.
fn batch_ls(vs: &[Vec<Complex64>], ys: &[Complex64], delta: f64) -> DVector<Complex64> {
    let d = vs[0].len();
    let mut a = DMatrix::<Complex64>::identity(d, d) * c(delta, 0.0);
    let mut b = DVector::<Complex64>::zeros(d);
    for (v, y) in vs.iter().zip(ys) {
        let v = DVector::from_column_slice(v);
        a += &v * v.adjoint();
        b += &v * y.conj();
    }
    a.lu().solve(&b).expect("regular normal equations")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rls_without_forgetting_is_batch_least_squares(dim in 6usize..=12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let delta = 1e-8;
        let u_true = random_vec(&mut r, dim);
        let mut rls = RlsState::new(dim, 1.0, delta).unwrap();
        let mut vs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..50 {
            let v = random_vec(&mut r, dim);
            let y = u_true.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex64>() + complex_gauss(&mut r, 0.1);
            rls.update(&v, y).unwrap();
            vs.push(v);
            ys.push(y);
        }
        let oracle = batch_ls(&vs, &ys, delta);
        let diff: f64 = rls.estimate().iter().zip(oracle.iter()).map(|(a, b)| (a - b).norm_sqr()).sum();
        let rel = (diff / oracle.norm_squared()).sqrt();
        prop_assert!(rel < 1e-6, "relative error {rel:e}");
    }

    #[test]
    fn dfe_matches_dense_mmse_solution(
        l in 1usize..=6,
        l_ff in 2usize..=10,
        l_fb in 0usize..=5,
        noise in 1e-4f64..1.0,
        seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        let h = random_vec(&mut r, l);
        let d = design_dfe(&h, noise, l_ff, l_fb).unwrap();
        let delay = l_ff - 1;
        // r[n-a] = sum_j conj(h[j-a]) x[n-j]
        let cols = l_ff + l - 1;
        let big_h = DMatrix::from_fn(l_ff, cols, |a, j| if j >= a && j - a < l { h[j - a].conj() } else { c(0.0, 0.0) });
        let decided = |j: usize| j > delay && j <= delay + l_fb;
        let mut a = DMatrix::<Complex64>::identity(l_ff, l_ff) * c(noise + DFE_RIDGE, 0.0);
        for j in (0..cols).filter(|&j| !decided(j)) {
            let col = big_h.column(j);
            a += col * col.adjoint();
        }
        let w = a.lu().solve(&big_h.column(delay).into_owned()).unwrap();
        let wh = w.adjoint() * &big_h;
        let scale = w.norm();
        for (k, f) in d.fff.iter().enumerate() {
            prop_assert!((f - w[k]).norm() <= 1e-8 * scale, "fff[{k}]");
        }
        for (j, f) in d.fbf.iter().enumerate() {
            let want = if delay + 1 + j < cols { wh[delay + 1 + j].conj() } else { c(0.0, 0.0) };
            prop_assert!((f - want).norm() <= 1e-8 * scale, "fbf[{j}]");
        }
    }

    #[test]
    fn static_channel_equals_direct_convolution(taps in 1usize..=8, n in 1usize..200, seed in any::<u64>()) {
        let mut r = rng(seed);
        let h = random_vec(&mut r, taps);
        let x = ComplexSeq::symbol_rate(random_vec(&mut r, n), 5000.0);
        let out = apply_channel(&x, &TapTrajectory::constant(&h, n)).unwrap();
        for m in 0..n {
            let mut want = c(0.0, 0.0);
            for (k, hk) in h.iter().enumerate() {
                if m >= k {
                    want += hk.conj() * x.samples[m - k];
                }
            }
            prop_assert!((out.samples[m] - want).norm() <= 1e-12 * (1.0 + want.norm()));
        }
    }
}

#[test]
fn dfe_on_noiseless_two_tap_channel_makes_no_errors() {
    let h = [c(1.0, 0.0), c(0.5, 0.0)];
    let d = design_dfe(&h, 0.0, 8, 4).unwrap();
    let delay = d.delay;
    assert_eq!(delay, 7);

    // residual ISI after feedback, relative to the cursor
    let g: Vec<Complex64> = (0..8 + 2 - 1)
        .map(|k| (0..8).filter(|&a| k >= a && k - a < 2).map(|a| d.fff[a].conj() * h[k - a].conj()).sum())
        .collect();
    let cursor = g[delay].norm_sqr();
    let isi: f64 = g.iter().enumerate().filter(|&(k, _)| k != delay && !(k > delay && k <= delay + 4)).map(|(_, v)| v.norm_sqr()).sum();
    assert!(isi / cursor < 1e-6, "ISI {:e}", isi / cursor);

    let mut r = rng(7);
    let n = 5000;
    let x: Vec<Complex64> = (0..n).map(|_| c(if r.random::<bool>() { 1.0 } else { -1.0 }, 0.0)).collect();
    let y = apply_channel(&ComplexSeq::symbol_rate(x.clone(), 5000.0), &TapTrajectory::constant(&h, n)).unwrap();
    let mut eq = Equalizer::new(d);
    let mut errors = 0;
    for (m, &ym) in y.samples.iter().enumerate() {
        let out = eq.step(ym, None);
        if m >= delay && out.decision != x[m - delay] {
            errors += 1;
        }
    }
    assert_eq!(errors, 0);
}

#[test]
fn perfect_csi_cancellation_reproduces_the_injected_signal() {
    let cfg = ExperimentConfig { n_symbols: 3000, ..Default::default() };
    let sc = Scenario::generate(&cfg, 11).unwrap();
    let m = sc.si.n_taps();
    let mut window = History::new(m);
    for n in 0..sc.len() {
        window.push(sc.i.samples[n]);
        let y = sc.rx.y.samples[n];
        let r_hat = cancel_si(y, sc.si.at(n), window.window()).unwrap();
        assert_eq!(r_hat, y - sc.rx.s[n], "n = {n}");
        // one rounding of y away from r + w
        let scale = sc.rx.s[n].norm() + sc.rx.r[n].norm() + sc.rx.w[n].norm();
        assert!((r_hat - (sc.rx.r[n] + sc.rx.w[n])).norm() <= 4.0 * f64::EPSILON * scale);
    }
}

#[test]
fn rrc_cascade_is_nyquist() {
    let sps = 32;
    let span = 12;
    let p = rrc_taps(0.5, span, sps).unwrap();
    let rc: Vec<f64> = (0..2 * p.len() - 1)
        .map(|k| (0..p.len()).filter(|&a| k >= a && k - a < p.len()).map(|a| p[a] * p[k - a]).sum())
        .collect();
    let peak = span * sps;
    assert!((rc[peak] - 1.0).abs() < 1e-12);
    for j in 1..=span {
        for idx in [peak - j * sps, peak + j * sps] {
            assert!(rc[idx].abs() < 1e-2 * rc[peak], "offset {j}: {}", rc[idx]);
        }
    }
}

#[test]
fn gauss_markov_decorrelates_at_the_coherence_lag() {
    let pdp = PdpSpec::new(vec![1.0, 0.5, 0.25], vec![false; 3]).unwrap();
    let n = 1_000_000;
    let traj = gen_tap_trajectory(&pdp, 70.0, n, 5000.0, &mut rng(3)).unwrap();
    for k in 0..3 {
        let s = traj.tap_series(k);
        let p0: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        let corr = |lag: usize| {
            let acc: Complex64 = s[lag..].iter().zip(&s).map(|(a, b)| a * b.conj()).sum();
            acc.re / (n - lag) as f64 / p0
        };
        let target = (-1.0f64).exp();
        let lag = (1..2000).find(|&l| corr(l) <= target).expect("decorrelates");
        assert!((lag as f64 - 350.0).abs() <= 0.15 * 350.0, "tap {k}: lag {lag}");
    }
}

#[test]
fn k_lag_change_follows_the_ar1_law() {
    let pdp = PdpSpec::new(vec![1.0, 0.3], vec![false; 2]).unwrap();
    let n = 400_000;
    let traj = gen_tap_trajectory(&pdp, 70.0, n, 5000.0, &mut rng(5)).unwrap();
    let k = 70;
    let rho = gauss_markov_rho(350.0);
    let expected = 2.0 * (1.0 - rho.powi(k as i32));
    for tap in 0..2 {
        let s = traj.tap_series(tap);
        let p: f64 = s.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        let d: f64 = s[k..].iter().zip(&s).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / (n - k) as f64;
        let measured = d / p;
        assert!((measured / expected - 1.0).abs() < 0.15, "tap {tap}: {measured} vs {expected}");
    }
}

#[test]
fn residual_mse_recovers_injected_error() {
    let mut r = rng(9);
    let n = 200_000;
    let truth = random_vec(&mut r, n);
    let est: Vec<Complex64> = truth.iter().map(|&t| t + complex_gauss(&mut r, 0.1)).collect();
    let rho = residual_mse(&truth, &est).unwrap();
    assert!((rho - 0.1).abs() < 0.1 * 0.02, "{rho}");
}

#[test]
fn si_estimation_error_sets_residual_power() {
    let mut r = rng(13);
    let m = 30;
    let n = 100_000;
    let c_true = random_vec(&mut r, m);
    let mut err = random_vec(&mut r, m);
    let e2: f64 = err.iter().map(|z| z.norm_sqr()).sum();
    let g = (0.01 / e2).sqrt();
    err.iter_mut().for_each(|z| *z *= g);
    let c_hat: Vec<Complex64> = c_true.iter().zip(&err).map(|(a, b)| a + b).collect();

    let mut window = History::new(m);
    let mut resid = 0.0;
    for _ in 0..m {
        window.push(complex_gauss(&mut r, 1.0));
    }
    for _ in 0..n {
        window.push(complex_gauss(&mut r, 1.0));
        let s: Complex64 = c_true.iter().zip(window.window()).map(|(a, b)| a.conj() * b).sum();
        resid += cancel_si(s, &c_hat, window.window()).unwrap().norm_sqr();
    }
    let db = 10.0 * (resid / n as f64).log10();
    assert!((db + 20.0).abs() < 0.2, "{db} dB");
}

fn dft_bin(x: &[f64], bin: usize) -> Complex64 {
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(m, &v)| Complex64::from_polar(v, -2.0 * std::f64::consts::PI * bin as f64 * m as f64 / n))
        .sum::<Complex64>()
        * (2.0 / n)
}

#[test]
fn pa_produces_odd_harmonics_with_polynomial_amplitudes() {
    let cfg = FrontEndConfig { pa_noise_power_db: f64::NEG_INFINITY, ..Default::default() };
    let PaCoeffs { a1, a3, a5 } = cfg.pa;
    let n = 4096;
    let bin = 37;
    let amp = 0.2;
    let tone: Vec<f64> =
        (0..n).map(|m| amp * (2.0 * std::f64::consts::PI * bin as f64 * m as f64 / n as f64).cos()).collect();
    let p = PassbandSeq { samples: tone, rate_hz: cfg.sample_rate_hz(), domain: uwfd_core::waveform::Domain::PassbandReal };
    let q = pa_apply(&p, &cfg, &mut rng(1)).unwrap();
    // cos^3 = (3 cos + cos 3)/4, cos^5 = (10 cos + 5 cos 3 + cos 5)/16
    let a = amp;
    let want = [
        (bin, a1 * a + a3 * 0.75 * a.powi(3) + a5 * 0.625 * a.powi(5)),
        (3 * bin, a3 * 0.25 * a.powi(3) + a5 * 0.3125 * a.powi(5)),
        (5 * bin, a5 * 0.0625 * a.powi(5)),
    ];
    for (b, w) in want {
        let got = dft_bin(&q.samples, b);
        assert!((got.norm() - w).abs() < 1e-9 * a1, "bin {b}: {} vs {w}", got.norm());
    }
    for b in [2 * bin, 4 * bin, 7 * bin] {
        assert!(dft_bin(&q.samples, b).norm() < 1e-9);
    }
}

#[test]
fn local_reference_tracks_the_transmitted_symbols() {
    let cfg = FrontEndConfig::default();
    let mut r = rng(21);
    let bits: Vec<u8> = (0..20_000).map(|_| r.random_range(0..2)).collect();
    let i = make_local_reference(&bits, &cfg, &mut rng(22)).unwrap();
    let sym = modulate_bpsk(&bits, cfg.bandwidth_hz);
    assert_eq!(i.len(), sym.len());
    assert!((i.mean_power() - 1.0).abs() < 1e-12);
    let cross: Complex64 = i.samples.iter().zip(&sym.samples).map(|(a, b)| a * b.conj()).sum();
    let rho = cross.norm() / (i.mean_power() * sym.mean_power()).sqrt() / i.len() as f64;
    assert!((0.9..=1.0).contains(&rho), "correlation {rho}");
}

#[test]
fn loopback_returns_the_symbols() {
    let cfg = FrontEndConfig { pa: PaCoeffs::LINEAR, pa_noise_power_db: f64::NEG_INFINITY, ..Default::default() };
    let mut r = rng(4);
    let bits: Vec<u8> = (0..2000).map(|_| r.random_range(0..2)).collect();
    let sym = modulate_bpsk(&bits, cfg.bandwidth_hz);
    let back = downconvert_matched_downsample(&pulse_shape_upconvert(&sym, &cfg).unwrap(), &cfg).unwrap();
    assert_eq!(back.len(), sym.len());
    for (a, b) in back.samples.iter().zip(&sym.samples) {
        assert!((a - b).norm() < 1e-2, "{a} vs {b}");
    }
}

#[test]
fn chain_is_linear_without_the_pa() {
    let cfg = FrontEndConfig { pa: PaCoeffs::LINEAR, pa_noise_power_db: f64::NEG_INFINITY, ..Default::default() };
    let mut r = rng(6);
    let n = 500;
    let x = random_vec(&mut r, n);
    let z = random_vec(&mut r, n);
    let (a, b) = (0.7, -1.9);
    let chain = |s: Vec<Complex64>| {
        let seq: ComplexSeq = SampleSeq::symbol_rate(s, cfg.bandwidth_hz);
        downconvert_matched_downsample(&pulse_shape_upconvert(&seq, &cfg).unwrap(), &cfg).unwrap().samples
    };
    let mix: Vec<Complex64> = x.iter().zip(&z).map(|(p, q)| p * a + q * b).collect();
    let lhs = chain(mix);
    let fx = chain(x);
    let fz = chain(z);
    for k in 0..n {
        assert!((lhs[k] - (fx[k] * a + fz[k] * b)).norm() < 1e-10);
    }
}
