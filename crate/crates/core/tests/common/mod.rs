//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use ssc::tensor::SparseRowMatrix;

/// One-sided Jacobi SVD of a dense `rows x cols` row-major matrix.
/// Returns `(singular values descending, left vectors as rows x cols column-major)`.
pub fn jacobi_svd(a: &[f64], rows: usize, cols: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut c: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| a[i * cols + j]).collect()).collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = c[p].iter().map(|x| x * x).sum();
                let beta: f64 = c[q].iter().map(|x| x * x).sum();
                let gamma: f64 = c[p].iter().zip(&c[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let (x, y) = (c[p][i], c[q][i]);
                    c[p][i] = cs * x - sn * y;
                    c[q][i] = sn * x + cs * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut pairs: Vec<(f64, Vec<f64>)> = c
        .into_iter()
        .map(|col| {
            let s = col.iter().map(|x| x * x).sum::<f64>().sqrt();
            let u = if s > 0.0 { col.iter().map(|x| x / s).collect() } else { col };
            (s, u)
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    pairs.into_iter().unzip()
}

/// `‖P_a − P_b‖_F` for the projectors onto the spans of two orthonormal column sets.
pub fn projector_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let n = a[0].len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let pa: f64 = a.iter().map(|u| u[i] * u[j]).sum();
            let pb: f64 = b.iter().map(|u| u[i] * u[j]).sum();
            total += (pa - pb) * (pa - pb);
        }
    }
    total.sqrt()
}

/// Random sparse matrix with roughly `density` of its entries set.
pub fn random_sparse(rng: &mut impl Rng, rows: usize, cols: usize, density: f64) -> SparseRowMatrix {
    let mut triplets = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if rng.random::<f64>() < density {
                triplets.push((i, j, rng.random_range(-1.0..1.0)));
            }
        }
    }
    SparseRowMatrix::from_triplets(rows, cols, &triplets).unwrap()
}

/// Smallest within-cluster sum of squares over every assignment of `points`
/// into exactly `k` non-empty clusters.
pub fn brute_force_inertia(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let d = points[0].len();
    let mut best = f64::INFINITY;
    let mut labels = vec![0usize; n];
    let total = k.pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = c % k;
            c /= k;
        }
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        if counts.contains(&0) {
            continue;
        }
        let mut inertia = 0.0;
        for (p, &l) in points.iter().zip(&labels) {
            for (j, v) in p.iter().enumerate() {
                let m = sums[l][j] / counts[l] as f64;
                inertia += (v - m) * (v - m);
            }
        }
        best = best.min(inertia);
    }
    best
}

/// Every set partition of `n` items into at most `k` blocks, as restricted growth strings.
pub fn partitions(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn grow(prefix: &mut Vec<usize>, n: usize, k: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let next = prefix.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next.min(k - 1) {
            prefix.push(l);
            grow(prefix, n, k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    grow(&mut Vec::new(), n, k, &mut out);
    out
}

fn entropy_of(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let mut h = 0.0;
    for l in 0..=*labels.iter().max().unwrap() {
        let c = labels.iter().filter(|&&x| x == l).count() as f64;
        if c > 0.0 {
            h -= c / n * (c / n).ln();
        }
    }
    h
}

/// NMI straight from label vectors, `I / sqrt(H_a H_b)`, zero on a zero entropy.
pub fn nmi_oracle(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let (ha, hb) = (entropy_of(a), entropy_of(b));
    if ha <= 0.0 || hb <= 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for la in 0..=*a.iter().max().unwrap() {
        for lb in 0..=*b.iter().max().unwrap() {
            let joint = a.iter().zip(b).filter(|&(&x, &y)| x == la && y == lb).count() as f64;
            let pa = a.iter().filter(|&&x| x == la).count() as f64;
            let pb = b.iter().filter(|&&y| y == lb).count() as f64;
            if joint > 0.0 {
                mi += joint / n * (joint * n / (pa * pb)).ln();
            }
        }
    }
    mi / (ha * hb).sqrt()
}

/// Adjusted Rand index from explicit pair counts; 1 when the denominator vanishes.
pub fn ari_oracle(a: &[usize], b: &[usize]) -> f64 {
    let (mut both, mut only_a, mut only_b, mut neither) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let den = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (both * neither - only_a * only_b) / den
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Best one-to-one matching accuracy by enumerating every label permutation.
pub fn accuracy_oracle(counts: &[Vec<u64>]) -> f64 {
    let size = counts.len().max(counts[0].len());
    let at = |i: usize, j: usize| counts.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0);
    let n: u64 = counts.iter().flatten().sum();
    let best = permutations(size)
        .iter()
        .map(|perm| (0..size).map(|i| at(i, perm[i])).sum::<u64>())
        .max()
        .unwrap();
    best as f64 / n as f64
}
