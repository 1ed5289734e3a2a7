//! Invariants that must hold for any input.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use uwfd_core::channel::{apply_channel, gen_tap_trajectory, remote_pdp, synthesize_received, NoiseSpec, TapTrajectory};
use uwfd_core::linalg::{hermitian_defect, History};
use uwfd_core::link::{run_link, ExperimentConfig, Scenario};
use uwfd_core::receiver::{cascade_tap, damp, design_dfe, DfeDesign, Equalizer, Mode, RlsState};
use uwfd_core::rng::{complex_gauss, derive_seed};
use uwfd_core::waveform::{bpsk_slice, ComplexSeq};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gauss(r, 1.0)).collect()
}

fn cvec(max_len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0).prop_map(|(a, b)| Complex64::new(a, b)), 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn damp_contracts_toward_the_input(pair in cvec(40).prop_flat_map(|a| {
        let n = a.len();
        (Just(a), prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0).prop_map(|(x, y)| Complex64::new(x, y)), n))
    }), mu in 0.0f64..=1.0) {
        let (a, h) = pair;
        let out = damp(&a, &h, mu).unwrap();
        let d_out: f64 = out.iter().zip(&h).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        let d_in: f64 = a.iter().zip(&h).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
        prop_assert!((d_out - (1.0 - mu) * d_in).abs() <= 1e-12 * (1.0 + d_in));
    }

    #[test]
    fn feedback_taps_are_the_post_cursor_cascade(
        h in cvec(8),
        l_ff in 1usize..=12,
        l_fb in 0usize..=8,
        noise in 0.0f64..1.0,
    ) {
        prop_assume!(h.iter().any(|z| z.norm() > 1e-3));
        let d = design_dfe(&h, noise, l_ff, l_fb).unwrap();
        prop_assert_eq!(d.delay, l_ff - 1);
        for (j, f) in d.fbf.iter().enumerate() {
            prop_assert_eq!(*f, cascade_tap(&d.fff, &h, d.delay + 1 + j));
        }
    }

    #[test]
    fn slicer_ignores_positive_scaling(re in -1e3f64..1e3, im in -1e3f64..1e3, g in 1e-6f64..1e6) {
        let z = Complex64::new(re, im);
        prop_assert_eq!(bpsk_slice(z), bpsk_slice(z * g));
    }

    #[test]
    fn feedforward_decisions_ignore_positive_scaling(seed in any::<u64>(), g in 1e-3f64..1e3) {
        let mut r = rng(seed);
        let fff = random_vec(&mut r, 6);
        let input = random_vec(&mut r, 200);
        let design = DfeDesign { fff, fbf: Vec::new(), delay: 5 };
        let mut a = Equalizer::new(design.clone());
        let mut b = Equalizer::new(design);
        for z in input {
            prop_assert_eq!(a.step(z, None).decision, b.step(z * g, None).decision);
        }
    }

    #[test]
    fn seeds_fan_out_without_collisions(parent in any::<u64>()) {
        let mut seen: Vec<u64> = (0..64).map(|i| derive_seed(parent, i)).collect();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), 64);
    }
}

#[test]
fn inverse_correlation_stays_hermitian() {
    let dim = 10;
    let mut r = rng(1);
    let u_true = random_vec(&mut r, dim);
    let mut rls = RlsState::new(dim, 0.98, 1e-4).unwrap();
    for _ in 0..100_000 {
        let v = random_vec(&mut r, dim);
        let y = u_true.iter().zip(&v).map(|(a, b)| a.conj() * b).sum::<Complex64>() + complex_gauss(&mut r, 1e-3);
        rls.update(&v, y).unwrap();
    }
    assert!(hermitian_defect(rls.inverse_correlation(), dim) <= 1e-10);
    let p = rls.inverse_correlation();
    assert!((0..dim).all(|k| p[k * dim + k].re > 0.0));
    assert_eq!(rls.resets(), 0);
}

#[test]
fn joint_rls_converges_with_true_feedback() {
    let (m, l) = (30, 70);
    let mut r = rng(2);
    let h = random_vec(&mut r, l);
    let c = random_vec(&mut r, m);
    let n = 5 * (m + l);
    let x: Vec<Complex64> = random_vec(&mut r, n);
    let i: Vec<Complex64> = random_vec(&mut r, n);
    let y_r = apply_channel(&ComplexSeq::symbol_rate(x.clone(), 5000.0), &TapTrajectory::constant(&h, n)).unwrap();
    let y_s = apply_channel(&ComplexSeq::symbol_rate(i.clone(), 5000.0), &TapTrajectory::constant(&c, n)).unwrap();

    let mut rls = RlsState::joint(m, l, 0.98, 1e-4).unwrap();
    let mut xw = History::new(l);
    let mut iw = History::new(m);
    let mut v = vec![Complex64::new(0.0, 0.0); m + l];
    for k in 0..n {
        xw.push(x[k]);
        iw.push(i[k]);
        v[..l].copy_from_slice(xw.window());
        v[l..].copy_from_slice(iw.window());
        rls.update(&v, y_r.samples[k] + y_s.samples[k]).unwrap();
    }
    let truth: Vec<Complex64> = h.iter().chain(&c).copied().collect();
    let err: f64 = rls.estimate().iter().zip(&truth).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn tap_power_is_stationary() {
    let pdp = remote_pdp(4, 0.25).unwrap();
    let trials = 4000;
    let n = 700;
    let mut first = [0.0; 4];
    let mut last = [0.0; 4];
    for t in 0..trials {
        let traj = gen_tap_trajectory(&pdp, 70.0, n, 5000.0, &mut rng(1000 + t)).unwrap();
        for k in 0..4 {
            first[k] += traj.at(0)[k].norm_sqr() / trials as f64;
            last[k] += traj.at(n - 1)[k].norm_sqr() / trials as f64;
        }
    }
    for k in 0..4 {
        let p = pdp.profile[k];
        assert!((first[k] / p - 1.0).abs() < 0.1, "start tap {k}");
        assert!((last[k] / p - 1.0).abs() < 0.1, "end tap {k}");
    }
}

#[test]
fn received_power_is_additive() {
    let cfg = ExperimentConfig { n_symbols: 100_000, ..Default::default() };
    let sc = Scenario::generate(&cfg, 17).unwrap();
    let p = |s: &[Complex64]| s.iter().map(|z| z.norm_sqr()).sum::<f64>() / s.len() as f64;
    let lhs = p(&sc.rx.y.samples);
    let rhs = p(&sc.rx.s) + p(&sc.rx.r) + sc.noise_power;
    assert!((lhs / rhs - 1.0).abs() < 0.05);
    let w = p(&sc.rx.w);
    assert!((w / 10f64.powf(-3.5) - 1.0).abs() < 0.02, "noise power {w}");
}

#[test]
fn zero_everything_gives_zero() {
    let n = 50;
    let zeros = ComplexSeq::symbol_rate(vec![Complex64::new(0.0, 0.0); n], 5000.0);
    let t = TapTrajectory::constant(&[Complex64::new(0.0, 0.0); 3], n);
    let rx = synthesize_received(
        &zeros,
        &zeros,
        &t,
        &t,
        &NoiseSpec { ambient_power_db: f64::NEG_INFINITY },
        &mut rng(0),
    )
    .unwrap();
    assert!(rx.y.samples.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
}

#[test]
fn runs_are_deterministic() {
    let cfg = ExperimentConfig { n_symbols: 1500, ..Default::default() };
    for mode in Mode::ALL {
        let a = run_link(&cfg, mode, 5).unwrap();
        let b = run_link(&cfg, mode, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
    assert_ne!(run_link(&cfg, Mode::Proposed, 5).unwrap(), run_link(&cfg, Mode::Proposed, 6).unwrap());
}
