mod common;

use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use common::*;
use ssc::landmark::{AffinityParams, SparseAffinity};
use ssc::spectral::{fuse, kmeans, kmeans_pp_init, left_singular_vectors, lloyd, DEFAULT_RESTARTS};
use ssc::tensor::{DataMatrix, MetricKind, SeededRng, SparseRowMatrix};
use ssc::SscError;

fn member(matrix: SparseRowMatrix) -> SparseAffinity {
    SparseAffinity {
        matrix,
        params: AffinityParams::new(1, MetricKind::Euclidean),
        sigma: 1.0,
        landmark_ref: String::new(),
    }
}

/// `n x p` CSR with `r` distinct random columns per row, each row summing to one.
fn random_affinity(g: &mut impl Rng, n: usize, p: usize, r: usize) -> SparseRowMatrix {
    let mut offsets = vec![0];
    let mut cols = Vec::with_capacity(n * r);
    let mut vals = Vec::with_capacity(n * r);
    for _ in 0..n {
        let mut picked = rand::seq::index::sample(g, p, r).into_vec();
        picked.sort_unstable();
        cols.extend(picked.iter().map(|&c| c as u32));
        vals.extend(std::iter::repeat_n(1.0 / r as f64, r));
        offsets.push(cols.len());
    }
    SparseRowMatrix::from_parts(n, p, offsets, cols, vals).unwrap()
}

#[test]
fn fuse_concatenates_and_scales() {
    let a = SparseRowMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
    let b = SparseRowMatrix::from_triplets(2, 3, &[(0, 2, 0.5), (0, 0, 0.5), (1, 1, 1.0)]).unwrap();
    let f = fuse(&[member(a), member(b)]).unwrap();
    assert_eq!(f.m, 2);
    assert_eq!(f.member_boundaries, vec![0, 2, 5]);
    let s = 1.0 / 2f64.sqrt();
    assert_eq!(
        f.matrix.to_dense(),
        vec![s, 0.0, 0.5 * s, 0.0, 0.5 * s, 0.0, s, 0.0, s, 0.0]
    );
    let single = fuse(&[member(SparseRowMatrix::from_triplets(1, 2, &[(0, 1, 1.0)]).unwrap())]).unwrap();
    assert_eq!(single.matrix.to_dense(), vec![0.0, 1.0]);
}

#[test]
fn fuse_rejects_mismatched_rows_and_empty_input() {
    let a = SparseRowMatrix::from_triplets(2, 2, &[(0, 0, 1.0)]).unwrap();
    let b = SparseRowMatrix::from_triplets(3, 2, &[(0, 0, 1.0)]).unwrap();
    assert!(matches!(fuse(&[member(a), member(b)]), Err(SscError::DimensionMismatch(_))));
    assert!(fuse(&[]).is_err());
}

#[test]
fn full_scale_fused_nnz() {
    let mut g = SeededRng::new(1).generator();
    let members: Vec<_> = (0..6).map(|_| member(random_affinity(&mut g, 70_000, 350, 3))).collect();
    let f = fuse(&members).unwrap();
    assert_eq!(f.matrix.nnz(), 1_260_000);
    assert_eq!(f.matrix.cols(), 2100);
    for i in [0, 33_333, 69_999] {
        assert!((f.matrix.row_sum(i) - 6.0 / 6f64.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn singular_vectors_match_the_jacobi_oracle() {
    let mut g = SeededRng::new(11).generator();
    let mut checked = 0;
    while checked < 30 {
        let rows = g.random_range(3..80);
        let cols = g.random_range(2..25);
        let density = g.random_range(0.1..0.8);
        let z = random_sparse(&mut g, rows, cols, density);
        let (sv, u_ref) = jacobi_svd(&z.to_dense(), rows, cols);
        let k = g.random_range(1..=rows.min(cols).min(6));
        let next = sv.get(k).copied().unwrap_or(0.0);
        if sv[k - 1] <= 1e-2 * sv[0] || sv[k - 1] * sv[k - 1] - next * next <= 1e-3 * sv[0] * sv[0] {
            continue;
        }
        let emb = left_singular_vectors(&z, k).unwrap();
        let u: Vec<Vec<f64>> = (0..k).map(|c| (0..rows).map(|i| emb.u.get(i, c)).collect()).collect();
        assert!(projector_distance(&u, &u_ref[..k]) <= 1e-8);
        for c in 0..k {
            assert!((emb.singular_values[c] - sv[c]).abs() <= 1e-10 * sv[c]);
            // largest-magnitude entry of every column is positive
            let pivot = u[c].iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            assert!(pivot > 0.0);
            let norm: f64 = u[c].iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-10);
        }
        checked += 1;
    }
}

#[test]
fn rank_deficiency_is_reported() {
    // two identical columns: rank 1
    let z = SparseRowMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (0, 1, 1.0), (2, 0, 2.0), (2, 1, 2.0)]).unwrap();
    assert!(matches!(left_singular_vectors(&z, 2), Err(SscError::RankDeficient { found: 1, wanted: 2 })));
}

#[test]
fn kmeans_reaches_the_brute_force_optimum() {
    let mut g = SeededRng::new(12).generator();
    for inst in 0..100u64 {
        let d = g.random_range(1..=4);
        let pts: Vec<Vec<f64>> = (0..8).map(|_| (0..d).map(|_| g.sample(StandardNormal)).collect()).collect();
        let x = DataMatrix::from_rows(&pts).unwrap();
        let got = kmeans(&x, 3, DEFAULT_RESTARTS, SeededRng::new(inst)).unwrap();
        let best = brute_force_inertia(&pts, 3);
        assert!((got.inertia - best).abs() <= 1e-9 * best.max(1.0), "instance {inst}: {} vs {best}", got.inertia);
        assert_eq!(got.distinct_labels(), 3);
    }
}

#[test]
fn kmeans_pp_sequence_is_pinned() {
    let x = DataMatrix::new(12, 1, (0..12).map(|i| (i * i) as f64).collect()).unwrap();
    let picks = kmeans_pp_init(&x, 4, &mut SeededRng::new(2024).generator()).unwrap();
    // frozen output of the seeded stream; a change here means the seeding protocol moved
    assert_eq!(picks, vec![9, 11, 3, 6]);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn lloyd_inertia_never_increases(seed in any::<u64>(), n in 4usize..60, k in 1usize..5) {
        prop_assume!(k <= n);
        let mut g = SeededRng::new(seed).generator();
        let x = DataMatrix::new(n, 2, (0..2 * n).map(|_| g.sample(StandardNormal)).collect()).unwrap();
        let seeds = kmeans_pp_init(&x, k, &mut g);
        prop_assume!(seeds.is_ok());
        let centres: Vec<f64> = seeds.unwrap().iter().flat_map(|&i| x.row(i).to_vec()).collect();
        let out = lloyd(&x, &centres, k, 300);
        // the first entry scores the initial centres, later ones follow centre updates
        for w in out.history[1..].windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9 * w[0].abs().max(1.0));
        }
    }

    #[test]
    fn relabelling_and_sign_flips_keep_the_partition(seed in any::<u64>(), flip in 0usize..3) {
        let mut g = SeededRng::new(seed).generator();
        let n = 40;
        let x = DataMatrix::new(n, 3, (0..3 * n).map(|_| g.sample(StandardNormal)).collect()).unwrap();
        let base = kmeans(&x, 3, 4, SeededRng::new(seed)).unwrap();

        let mut flipped = x.as_slice().to_vec();
        flipped.iter_mut().skip(flip).step_by(3).for_each(|v| *v = -*v);
        let flipped = DataMatrix::new(n, 3, flipped).unwrap();
        let other = kmeans(&flipped, 3, 4, SeededRng::new(seed)).unwrap();
        prop_assert_eq!(base.inertia, other.inertia);
        prop_assert_eq!(&base.labels, &other.labels);

        // inertia depends on the grouping only, not on label names
        let rename = [2usize, 0, 1];
        let renamed: Vec<usize> = base.labels.iter().map(|&l| rename[l]).collect();
        prop_assert!((inertia_of(&x, &renamed, 3) - inertia_of(&x, &base.labels, 3)).abs() < 1e-12);
        prop_assert!((inertia_of(&x, &base.labels, 3) - base.inertia).abs() < 1e-9);
    }
}

fn inertia_of(x: &DataMatrix, labels: &[usize], k: usize) -> f64 {
    let d = x.cols();
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0.0; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1.0;
        for j in 0..d {
            sums[l * d + j] += x.get(i, j);
        }
    }
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| (0..d).map(|j| (x.get(i, j) - sums[l * d + j] / counts[l]).powi(2)).sum::<f64>())
        .sum()
}
