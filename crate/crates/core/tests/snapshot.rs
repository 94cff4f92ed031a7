mod common;

use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use ssc::app::{Model, PipelineConfig};
use ssc::snapshot::{
    cosine_lr, encode, mse_with_gradient, read_snapshot, train_snapshots, write_snapshot, Activation, AutoencoderSpec,
    Mlp, SnapshotSchedule, TrainOptions,
};
use ssc::tensor::{DataMatrix, SeededRng};

fn gaussian(n: usize, d: usize, seed: u64) -> DataMatrix {
    let mut g = SeededRng::new(seed).generator();
    DataMatrix::new(n, d, (0..n * d).map(|_| g.sample(StandardNormal)).collect()).unwrap()
}

/// Rank-2 data in 5 dimensions: rows are `a·u + b·v`.
fn plane(n: usize, seed: u64) -> DataMatrix {
    let mut g = SeededRng::new(seed).generator();
    let u = [0.5, -0.3, 0.2, 0.6, 0.1];
    let v = [-0.2, 0.4, 0.5, 0.0, -0.3];
    let mut values = Vec::with_capacity(n * 5);
    for _ in 0..n {
        let (a, b): (f64, f64) = (g.sample(StandardNormal), g.sample(StandardNormal));
        values.extend(u.iter().zip(&v).map(|(p, q)| a * p + b * q));
    }
    DataMatrix::new(n, 5, values).unwrap()
}

/// Mean squared residual of the least-squares fit of `x` from `code` plus an intercept.
fn least_squares_residual(code: &DataMatrix, x: &DataMatrix) -> f64 {
    let (n, e) = code.shape();
    let cols = e + 1;
    let design: Vec<f64> = code.iter_rows().flat_map(|r| std::iter::once(1.0).chain(r.iter().copied())).collect();
    let (_, basis) = common::jacobi_svd(&design, n, cols);
    let mut residual = 0.0;
    for j in 0..x.cols() {
        let y: Vec<f64> = (0..n).map(|i| x.get(i, j)).collect();
        let mut fit = vec![0.0; n];
        for u in basis.iter().filter(|u| u.iter().any(|v| *v != 0.0)) {
            let c: f64 = u.iter().zip(&y).map(|(a, b)| a * b).sum();
            fit.iter_mut().zip(u).for_each(|(f, ui)| *f += c * ui);
        }
        residual += y.iter().zip(&fit).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    residual / (n * x.cols()) as f64
}

#[test]
fn two_cycles_capture_two_distinct_encoders() {
    let x = gaussian(64, 6, 1);
    let spec = AutoencoderSpec::symmetric(6, &[8], 3).unwrap();
    let schedule = SnapshotSchedule::new(0.05, 40, 2).unwrap();
    assert_eq!(schedule.snapshot_steps(), vec![20, 40]);
    let (snaps, set) = train_snapshots(&x, &spec, &schedule, &TrainOptions::default(), SeededRng::new(3)).unwrap();
    assert_eq!(snaps.len(), 2);
    assert_eq!(set.len(), 2);
    assert_eq!((snaps[0].cycle_index, snaps[1].cycle_index), (1, 2));
    assert_ne!(snaps[0].layers, snaps[1].layers);
    assert_ne!(set.members()[0], set.members()[1]);
    assert_eq!(encode(&x, &snaps[1]).unwrap(), set.members()[1]);
}

#[test]
fn linear_autoencoder_recovers_the_principal_plane() {
    let x = plane(200, 4);
    let spec = AutoencoderSpec::symmetric(5, &[], 2)
        .unwrap()
        .with_activation(Activation::Identity)
        .with_noise(0.0);
    let schedule = SnapshotSchedule::new(0.05, 150, 1).unwrap();
    let options = TrainOptions { batch_size: 16, ..TrainOptions::default() };
    let (snaps, set) = train_snapshots(&x, &spec, &schedule, &options, SeededRng::new(5)).unwrap();
    assert!(snaps[0].train_loss < 1e-3, "train loss {}", snaps[0].train_loss);
    // the data lies in a plane, so the optimal rank-2 reconstruction error is zero
    let residual = least_squares_residual(&set.members()[0], &x);
    assert!(residual < 1e-3, "residual {residual}");
}

#[test]
fn runs_are_bit_identical_for_a_seed() {
    let x = gaussian(50, 4, 2);
    let options = TrainOptions { batch_size: 16, ..TrainOptions::default() };
    for noise in [0.0, 0.2] {
        let spec = AutoencoderSpec::symmetric(4, &[6], 2).unwrap().with_noise(noise);
        let schedule = SnapshotSchedule::new(0.02, 6, 3).unwrap();
        let run = || train_snapshots(&x, &spec, &schedule, &options, SeededRng::new(8)).unwrap();
        let (a, ea) = run();
        let (b, eb) = run();
        assert_eq!(a, b);
        assert_eq!(ea.members(), eb.members());
    }
}

#[test]
fn snapshot_file_roundtrip() {
    let x = gaussian(20, 4, 3);
    let spec = AutoencoderSpec::symmetric(4, &[5], 2).unwrap();
    let schedule = SnapshotSchedule::new(0.02, 4, 2).unwrap();
    let options = TrainOptions { batch_size: 8, ..TrainOptions::default() };
    let (snaps, set) = train_snapshots(&x, &spec, &schedule, &options, SeededRng::new(1)).unwrap();
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &snaps[1], set.provenance()).unwrap();
    let (back, provenance) = read_snapshot(&buf[..]).unwrap();
    assert_eq!(back, snaps[1]);
    let parse = |s: &str| serde_json::from_str::<serde_json::Value>(s).unwrap();
    assert_eq!(parse(&provenance), parse(set.provenance()));
}

#[test]
fn divergence_reports_epoch_and_rate() {
    let x = gaussian(40, 4, 6).scaled(1e3).unwrap();
    let spec = AutoencoderSpec::symmetric(4, &[6], 2).unwrap();
    let schedule = SnapshotSchedule::new(10.0, 10, 1).unwrap();
    let options = TrainOptions { batch_size: 8, ..TrainOptions::default() };
    match train_snapshots(&x, &spec, &schedule, &options, SeededRng::new(0)) {
        Err(ssc::SscError::Divergence { epoch, lr, .. }) => {
            assert!(epoch >= 1);
            assert!(lr > 0.0);
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn ensemble_and_baselines_share_the_epoch_budget() {
    for (m, l) in [(1, 20), (6, 20), (4, 15), (3, 60)] {
        let cfg = PipelineConfig { ensemble_size: m, cycle_length: l, ..PipelineConfig::default() };
        let ssc = Model::Ssc.trainer_epochs(&cfg);
        assert_eq!(ssc, l * m);
        for base in [Model::DaeKmeans, Model::DaeLsc] {
            assert_eq!(base.trainer_epochs(&cfg), ssc);
        }
        let multi = SnapshotSchedule::new(0.01, ssc, m).unwrap();
        let single = SnapshotSchedule::new(0.01, ssc, 1).unwrap();
        assert_eq!(multi.total_steps(), single.total_steps());
        assert_eq!(multi.cycle_length(), l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn schedule_stays_in_range_and_restarts(alpha0 in 1e-4f64..1.0, cycles in 1usize..6, extra in 0usize..60) {
        let total = cycles + extra;
        let s = SnapshotSchedule::new(alpha0, total, cycles).unwrap();
        let l = s.cycle_length();
        for t in 1..=total {
            let a = cosine_lr(t, &s).unwrap();
            prop_assert!(a > 0.0 && a <= alpha0);
            if (t - 1) % l == 0 {
                prop_assert_eq!(a, alpha0);
            }
        }
    }

    #[test]
    fn backprop_matches_finite_differences(seed in any::<u64>(), hidden in 1usize..12, inputs in 1usize..6) {
        let net = Mlp::init(&[inputs, hidden, 2], &[Activation::Relu, Activation::Identity], SeededRng::new(seed)).unwrap();
        let mut g = SeededRng::new(seed ^ 0x5eed).generator();
        let x: Vec<f64> = (0..inputs).map(|_| g.sample(StandardNormal)).collect();
        let y = [0.3, -0.4];
        // exclude draws near a ReLU kink
        let l0 = &net.layers[0];
        let near_kink = (0..hidden).any(|k| {
            let z: f64 = l0.biases[k] + (0..inputs).map(|j| l0.weights[k * inputs + j] * x[j]).sum::<f64>();
            z.abs() < 1e-3
        });
        prop_assume!(!near_kink);
        let trace = net.forward(&x, 1);
        let (_, dy) = mse_with_gradient(trace.output(), &y);
        let grads = net.backward(&trace, &dy);
        let h = 1e-6;
        for l in 0..2 {
            for p in 0..net.layers[l].weights.len() {
                let eval = |delta: f64| {
                    let mut m = net.clone();
                    m.layers[l].weights[p] += delta;
                    mse_with_gradient(&m.predict(&x, 1), &y).0
                };
                let fd = (eval(h) - eval(-h)) / (2.0 * h);
                let an = grads[l].weights[p];
                prop_assert!((fd - an).abs() <= 1e-6 + 1e-5 * an.abs(), "layer {} weight {}: {} vs {}", l, p, an, fd);
            }
        }
    }
}
