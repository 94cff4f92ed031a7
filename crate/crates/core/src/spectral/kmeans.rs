//! k-means++ seeding and Lloyd iterations with seeded restarts.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Result, SscError};
use crate::tensor::{squared_euclidean, DataMatrix, SeededRng};

pub const DEFAULT_RESTARTS: usize = 10;
pub const MAX_LLOYD_ITERATIONS: usize = 300;

/// Hard assignment of `n` points to `k` clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub labels: Vec<usize>,
    pub k: usize,
    /// Sum of squared distances from each point to its cluster mean.
    pub inertia: f64,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn distinct_labels(&self) -> usize {
        let mut seen = vec![false; self.k];
        self.labels.iter().for_each(|&l| seen[l] = true);
        seen.into_iter().filter(|&s| s).count()
    }
}

/// Indices of `k` seed points chosen by D² sampling: the first uniformly, each
/// next one with probability proportional to its squared distance to the
/// nearest seed chosen so far.
pub fn kmeans_pp_init<R: Rng>(x: &DataMatrix, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let n = x.rows();
    if k == 0 || k > n {
        return Err(SscError::InvalidArgument(format!("k = {k} must be in 1..={n}")));
    }
    let mut chosen = Vec::with_capacity(k);
    chosen.push(rng.random_range(0..n));
    let mut nearest: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| squared_euclidean(x.row(i), x.row(chosen[0])))
        .collect();

    while chosen.len() < k {
        let total: f64 = nearest.iter().sum();
        if total <= 0.0 {
            return Err(SscError::InvalidArgument(format!(
                "data has {} distinct points, fewer than k = {k}",
                chosen.len()
            )));
        }
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut pick = None;
        for (i, &w) in nearest.iter().enumerate() {
            if w > 0.0 {
                acc += w;
                pick = Some(i);
                if acc > target {
                    break;
                }
            }
        }
        let next = pick.expect("positive total implies a positive weight");
        chosen.push(next);
        let c = x.row(next);
        nearest.par_iter_mut().enumerate().for_each(|(i, d)| {
            *d = d.min(squared_euclidean(x.row(i), c));
        });
    }
    Ok(chosen)
}

/// Result of one Lloyd run.
#[derive(Debug, Clone)]
pub struct LloydOutcome {
    pub labels: Vec<usize>,
    pub centers: Vec<f64>,
    pub inertia: f64,
    /// Inertia after every assignment step, in order.
    pub history: Vec<f64>,
}

fn assign(x: &DataMatrix, centers: &[f64], k: usize) -> Vec<(usize, f64)> {
    let d = x.cols();
    (0..x.rows())
        .into_par_iter()
        .map(|i| {
            let p = x.row(i);
            let mut best = (0, f64::INFINITY);
            for c in 0..k {
                let dist = squared_euclidean(p, &centers[c * d..(c + 1) * d]);
                if dist < best.1 {
                    best = (c, dist);
                }
            }
            best
        })
        .collect()
}

/// Lloyd iterations from the given `k x d` centers until the assignment stops
/// changing or `max_iters` assignment steps have run. Empty clusters are moved
/// to the point farthest from its current center.
pub fn lloyd(x: &DataMatrix, init_centers: &[f64], k: usize, max_iters: usize) -> LloydOutcome {
    let (n, d) = x.shape();
    let mut centers = init_centers.to_vec();
    let mut labels: Vec<usize> = Vec::new();
    let mut history = Vec::new();

    for _ in 0..max_iters.max(1) {
        let assigned = assign(x, &centers, k);
        let new_labels: Vec<usize> = assigned.iter().map(|a| a.0).collect();
        history.push(assigned.iter().map(|a| a.1).sum());
        let converged = new_labels == labels;
        labels = new_labels;
        if converged {
            break;
        }

        let mut sums = vec![0.0; k * d];
        let mut counts = vec![0usize; k];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            for (s, v) in sums[l * d..(l + 1) * d].iter_mut().zip(x.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                let inv = counts[c] as f64;
                for (dst, s) in centers[c * d..(c + 1) * d].iter_mut().zip(&sums[c * d..(c + 1) * d]) {
                    *dst = s / inv;
                }
            }
        }
        let empty: Vec<usize> = (0..k).filter(|&c| counts[c] == 0).collect();
        if !empty.is_empty() {
            let mut far: Vec<(usize, f64)> = (0..n)
                .map(|i| {
                    let l = labels[i];
                    (i, squared_euclidean(x.row(i), &centers[l * d..(l + 1) * d]))
                })
                .collect();
            far.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            for (&c, &(i, _)) in empty.iter().zip(&far) {
                centers[c * d..(c + 1) * d].copy_from_slice(x.row(i));
            }
            // Force another assignment pass after relocation.
            labels.clear();
        }
    }
    if labels.len() != n {
        let assigned = assign(x, &centers, k);
        labels = assigned.iter().map(|a| a.0).collect();
        history.push(assigned.iter().map(|a| a.1).sum());
    }
    let inertia = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| squared_euclidean(x.row(i), &centers[l * d..(l + 1) * d]))
        .sum();
    LloydOutcome { labels, centers, inertia, history }
}

/// Single-point moves after Lloyd: point `i` leaves its cluster `a` for `b`
/// when `n_b/(n_b+1)·‖x_i−c_b‖² < n_a/(n_a−1)·‖x_i−c_a‖²`, i.e. when the move
/// lowers the total inertia once both centroids are updated. Sweeps points in
/// index order until a full pass makes no move or `max_passes` is reached.
/// The result is also a Lloyd fixpoint; the final inertia is appended to the history.
pub fn refine_single_moves(x: &DataMatrix, outcome: LloydOutcome, k: usize, max_passes: usize) -> LloydOutcome {
    let (n, d) = x.shape();
    let LloydOutcome { mut labels, mut history, .. } = outcome;
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums[l * d..(l + 1) * d].iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    let dist_to = |sums: &[f64], counts: &[usize], c: usize, p: &[f64]| -> f64 {
        let inv = 1.0 / counts[c] as f64;
        p.iter().zip(&sums[c * d..(c + 1) * d]).map(|(v, s)| (v - s * inv) * (v - s * inv)).sum()
    };
    for _ in 0..max_passes {
        let mut moved = false;
        for i in 0..n {
            let a = labels[i];
            if counts[a] < 2 {
                continue;
            }
            let p = x.row(i);
            let na = counts[a] as f64;
            let removal = na / (na - 1.0) * dist_to(&sums, &counts, a, p);
            let mut best = (a, removal);
            for b in (0..k).filter(|&b| b != a && counts[b] > 0) {
                let nb = counts[b] as f64;
                let add = nb / (nb + 1.0) * dist_to(&sums, &counts, b, p);
                if add < best.1 {
                    best = (b, add);
                }
            }
            // demand a strict relative gain so rounding cannot cycle
            if best.0 != a && best.1 < removal * (1.0 - 1e-12) {
                let b = best.0;
                for j in 0..d {
                    sums[a * d + j] -= p[j];
                    sums[b * d + j] += p[j];
                }
                counts[a] -= 1;
                counts[b] += 1;
                labels[i] = b;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    // centroids and inertia from scratch so accumulated updates leave no trace
    let mut centers = vec![0.0; k * d];
    let mut fresh = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, v) in fresh[l * d..(l + 1) * d].iter_mut().zip(x.row(i)) {
            *s += v;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for j in 0..d {
                centers[c * d + j] = fresh[c * d + j] / counts[c] as f64;
            }
        }
    }
    let inertia: f64 = labels
        .iter()
        .enumerate()
        .map(|(i, &l)| squared_euclidean(x.row(i), &centers[l * d..(l + 1) * d]))
        .sum();
    history.push(inertia);
    LloydOutcome { labels, centers, inertia, history }
}

/// Best-of-`restarts` k-means: k-means++ seeding, Lloyd, then single-point
/// refinement. Restart `r` seeds from `rng.fork(r)`; the winner
/// is the lowest inertia, ties going to the lower restart index.
pub fn kmeans(x: &DataMatrix, k: usize, restarts: usize, rng: SeededRng) -> Result<Partition> {
    let n = x.rows();
    if k == 0 || k > n {
        return Err(SscError::InvalidArgument(format!("k = {k} must be in 1..={n}")));
    }
    let restarts = restarts.max(1);
    let runs: Vec<Result<LloydOutcome>> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut g = rng.fork(r as u64).generator();
            let seeds = kmeans_pp_init(x, k, &mut g)?;
            let centers: Vec<f64> = seeds.iter().flat_map(|&i| x.row(i).iter().copied()).collect();
            let run = lloyd(x, &centers, k, MAX_LLOYD_ITERATIONS);
            Ok(refine_single_moves(x, run, k, MAX_LLOYD_ITERATIONS))
        })
        .collect();
    let mut best: Option<LloydOutcome> = None;
    for run in runs {
        let run = run?;
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(Partition { labels: best.labels, k, inertia: best.inertia })
}
