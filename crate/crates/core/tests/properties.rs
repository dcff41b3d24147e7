use cpjoint::oracle::{naive_cov_stat, naive_mean_stat};
use cpjoint::simlab::{replicate, run_experiment, Design};
use cpjoint::{
    cov_stat_curve, detect, gram, localize, mean_coefficients, mean_stat_curve, trace_sigma2_hat, Analysis,
    CovScenario, Dataset, ErrorDist, Method, SimulationModel, SqrtMethod,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian(seed: u64, n: usize, p: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..n * p).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    Dataset::from_row_major(n, p, v).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fast_curves_match_oracles(seed in any::<u64>(), n in 8usize..=13, p in 1usize..=3) {
        let d = gaussian(seed, n, p);
        let m = mean_stat_curve(&d);
        let v = cov_stat_curve(&d, &gram(&d)).unwrap();
        for tau in 2..=n - 2 {
            let want = naive_mean_stat(&d, tau).unwrap();
            prop_assert!((m.per_tau.at(tau) - want).abs() <= 1e-9 * want.abs() + 1e-12);
        }
        for tau in 4..=n - 4 {
            let want = naive_cov_stat(&d, tau).unwrap();
            prop_assert!((v.per_tau.at(tau) - want).abs() <= 1e-9 * want.abs() + 1e-12);
        }
    }

    #[test]
    fn group_swap_symmetry(seed in any::<u64>(), n in 8usize..=40, p in 1usize..=6) {
        let d = gaussian(seed, n, p);
        let r = d.reversed();
        let (m, mr) = (mean_stat_curve(&d), mean_stat_curve(&r));
        let (v, vr) = (cov_stat_curve(&d, &gram(&d)).unwrap(), cov_stat_curve(&r, &gram(&r)).unwrap());
        for (t, x) in m.per_tau.iter() {
            prop_assert!(rel(mr.per_tau.at(n - t), x) <= 1e-10);
        }
        for (t, x) in v.per_tau.iter() {
            prop_assert!(rel(vr.per_tau.at(n - t), x) <= 1e-10);
        }
        let tr = trace_sigma2_hat(&d).unwrap();
        prop_assert!(rel(trace_sigma2_hat(&r).unwrap(), tr) <= 1e-10);
    }

    #[test]
    fn scale_equivariance(seed in any::<u64>(), n in 8usize..=30, p in 1usize..=5, c in 0.05f64..20.0) {
        let d = gaussian(seed, n, p);
        let s = d.map(|v| v * c).unwrap();
        let (m, ms) = (mean_stat_curve(&d), mean_stat_curve(&s));
        prop_assert!(rel(ms.aggregate, m.aggregate * c * c) <= 1e-10);
        let v = cov_stat_curve(&d, &gram(&d)).unwrap();
        let vs = cov_stat_curve(&s, &gram(&s)).unwrap();
        prop_assert!(rel(vs.aggregate, v.aggregate * c.powi(4)) <= 1e-10);
        prop_assert!(rel(trace_sigma2_hat(&s).unwrap(), trace_sigma2_hat(&d).unwrap() * c.powi(4)) <= 1e-10);
    }

    #[test]
    fn translation_invariance(seed in any::<u64>(), n in 8usize..=30, p in 1usize..=5, shift in -10.0f64..10.0) {
        let d = gaussian(seed, n, p);
        let moved = Dataset::from_row_major(
            n,
            p,
            d.values().iter().enumerate().map(|(k, v)| v + shift * (1.0 + (k % p) as f64)).collect(),
        )
        .unwrap();
        let (a, b) = (mean_stat_curve(&d), mean_stat_curve(&moved));
        for (x, y) in a.per_tau.values.iter().zip(&b.per_tau.values) {
            prop_assert!(rel(*y, *x) <= 1e-8);
        }
        let a = cov_stat_curve(&d, &gram(&d)).unwrap();
        let b = cov_stat_curve(&moved, &gram(&moved)).unwrap();
        for (x, y) in a.per_tau.values.iter().zip(&b.per_tau.values) {
            prop_assert!(rel(*y, *x) <= 1e-8);
        }
        prop_assert!(rel(trace_sigma2_hat(&moved).unwrap(), trace_sigma2_hat(&d).unwrap()) <= 1e-8);
    }

    #[test]
    fn aggregates_are_weighted_sums(seed in any::<u64>(), n in 8usize..=50, p in 1usize..=4) {
        let d = gaussian(seed, n, p);
        let nf = n as f64;
        let w = |t: usize| t as f64 * (nf - t as f64) / nf;
        let m = mean_stat_curve(&d);
        let want: f64 = m.per_tau.iter().map(|(t, v)| w(t) * v).sum();
        prop_assert!(rel(m.aggregate, want) <= 1e-10);
        let v = cov_stat_curve(&d, &gram(&d)).unwrap();
        let want: f64 = v.per_tau.iter().map(|(t, x)| w(t) * x).sum();
        prop_assert!(rel(v.aggregate, want) <= 1e-10);
    }

    #[test]
    fn coefficient_table_matches_aggregate(seed in any::<u64>(), n in 8usize..=25, p in 1usize..=4) {
        let d = gaussian(seed, n, p);
        let via = mean_coefficients(n).unwrap().apply(d.values(), p).unwrap();
        prop_assert!(rel(via, mean_stat_curve(&d).aggregate) <= 1e-9);
    }

    #[test]
    fn profile_nonnegative_and_argmax_scale_free(seed in any::<u64>(), n in 20usize..=60, p in 2usize..=8) {
        let d = gaussian(seed, n, p);
        let base = localize(&d, 0.2).unwrap();
        prop_assert!(base.profile.values.iter().all(|&v| v >= 0.0));
        prop_assert!(base.grid_lo <= base.tau_hat && base.tau_hat <= base.grid_hi);
        for c in [0.1, 1.0, 100.0] {
            prop_assert_eq!(localize(&d.map(|v| v * c).unwrap(), 0.2).unwrap().tau_hat, base.tau_hat);
        }
    }

    #[test]
    fn pipelines_are_deterministic(seed in any::<u64>()) {
        let d = gaussian(seed, 30, 5);
        prop_assert_eq!(detect(&d, 0.05).unwrap(), detect(&d, 0.05).unwrap());
        prop_assert_eq!(localize(&d, 0.2).unwrap(), localize(&d, 0.2).unwrap());
    }
}

#[test]
fn coefficient_rows_sum_to_zero() {
    for n in [4, 5, 10, 33] {
        let c = mean_coefficients(n).unwrap();
        for i in 1..=n {
            let s: f64 = (1..=n).filter(|&j| j != i).map(|j| c.symmetric(i, j)).sum();
            assert!(s.abs() <= 1e-9, "n {n} row {i}: {s}");
        }
    }
}

#[test]
fn rotation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..10 {
        let (n, p) = (rng.random_range(10..40), rng.random_range(2..9));
        let d = gaussian(rng.random(), n, p);
        let q = DMatrix::from_fn(p, p, |_, _| rng.sample::<f64, _>(StandardNormal)).qr().q();
        let rows: Vec<Vec<f64>> =
            d.rows().map(|r| (0..p).map(|a| (0..p).map(|b| q[(a, b)] * r[b]).sum()).collect()).collect();
        let r = Dataset::from_rows(&rows).unwrap();
        let (a, b) = (mean_stat_curve(&d), mean_stat_curve(&r));
        for (x, y) in a.per_tau.values.iter().zip(&b.per_tau.values) {
            assert!(rel(*y, *x) <= 1e-8);
        }
        let a = cov_stat_curve(&d, &gram(&d)).unwrap();
        let b = cov_stat_curve(&r, &gram(&r)).unwrap();
        for (x, y) in a.per_tau.values.iter().zip(&b.per_tau.values) {
            assert!(rel(*y, *x) <= 1e-8);
        }
    }
}

#[test]
fn null_aggregates_are_centered() {
    let eye = DMatrix::<f64>::identity(20, 20);
    let design =
        Design::new(50, None, vec![0.0; 20], &eye, vec![0.0; 20], &eye, ErrorDist::Normal, SqrtMethod::Spectral)
            .unwrap();
    let out: Vec<(f64, f64)> = replicate(123, 2000, 4, |_, s| {
        let a = Analysis::new(&design.sample(s)?)?;
        Ok((a.mean().aggregate, a.cov().aggregate))
    })
    .unwrap();
    let (m, mse) = mean_and_se(&out.iter().map(|x| x.0).collect::<Vec<_>>());
    let (v, vse) = mean_and_se(&out.iter().map(|x| x.1).collect::<Vec<_>>());
    assert!(m.abs() <= 4.0 * mse, "M_n mean {m} (SE {mse})");
    assert!(v.abs() <= 4.0 * vse, "V_n mean {v} (SE {vse})");
}

#[test]
fn trace_estimator_identity_covariance() {
    let p = 20;
    let eye = DMatrix::<f64>::identity(p, p);
    let design =
        Design::new(2000, None, vec![0.0; p], &eye, vec![0.0; p], &eye, ErrorDist::Normal, SqrtMethod::Spectral)
            .unwrap();
    let est = replicate(321, 200, 4, |_, s| trace_sigma2_hat(&design.sample(s)?)).unwrap();
    let (m, _) = mean_and_se(&est);
    assert!((m - 20.0).abs() <= 1.0, "mean trace {m}");
}

#[test]
fn size_with_identity_covariance() {
    let p = 100;
    let eye = DMatrix::<f64>::identity(p, p);
    let design =
        Design::new(200, None, vec![0.0; p], &eye, vec![0.0; p], &eye, ErrorDist::Normal, SqrtMethod::Spectral)
            .unwrap();
    let rejects = replicate(77, 1000, 4, |_, s| Ok(detect(&design.sample(s)?, 0.05)?.reject)).unwrap();
    let rate = rejects.iter().filter(|&&r| r).count() as f64 / 1000.0;
    assert!((0.042..=0.066).contains(&rate), "size {rate}");
}

#[test]
fn mean_only_beats_cov_only_on_pure_mean_shift() {
    let model = SimulationModel::null(200, 100, CovScenario::Block5, ErrorDist::Normal, 8).with_change(100, 2.0, 1.0);
    let r = run_experiment(&model, 100, 0.05, 0.2, 4).unwrap();
    assert!(r.method(Method::MeanOnly).rejection_rate >= r.method(Method::CovOnly).rejection_rate);
    assert!(r.method(Method::MeanOnly).rejection_rate >= 0.9);
}

#[test]
fn power_increases_with_mean_shift() {
    let reps = 200;
    let rates: Vec<(f64, f64)> = [0.0, 0.4, 0.8]
        .iter()
        .map(|&d1| {
            let model =
                SimulationModel::null(200, 100, CovScenario::Ar1, ErrorDist::Normal, 31).with_change(100, d1, 1.0);
            let r = run_experiment(&model, reps, 0.05, 0.2, 4).unwrap();
            (r.rejection_rate, r.mc_stderr)
        })
        .collect();
    for w in rates.windows(2) {
        assert!(w[1].0 >= w[0].0 - 2.0 * w[0].1.max(w[1].1), "{rates:?}");
    }
}

#[test]
fn cholesky_design_has_same_covariance() {
    // Both square roots give Sigma; the empirical covariances must agree
    // with the target to Monte Carlo accuracy.
    let model = SimulationModel {
        sqrt_method: SqrtMethod::Cholesky,
        ..SimulationModel::null(4000, 6, CovScenario::Ar1, ErrorDist::Normal, 5)
    };
    let d = cpjoint::gen_dataset(&model).unwrap();
    let n = d.n() as f64;
    for a in 0..6 {
        for b in 0..6 {
            let c: f64 = d.rows().map(|r| r[a] * r[b]).sum::<f64>() / n;
            let want = 0.3f64.powi((a as i32 - b as i32).abs());
            assert!((c - want).abs() < 0.07, "({a},{b}): {c} vs {want}");
        }
    }
}
