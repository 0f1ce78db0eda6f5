//! Clustering and figure-level statistics over embeddings.

use ndarray::{Array2, ArrayView1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::DensityEstimate;
use crate::rng::Stream;

/// 1 where `psi > 0`, else 0 (exact zeros go to 0).
pub fn sign_cluster(psi: &[f64]) -> Vec<usize> {
    psi.iter().map(|&v| usize::from(v > 0.0)).collect()
}

pub const MAX_CONFUSION_LABELS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfusionReport {
    /// Mismatches after the best relabeling of `pred`.
    pub errors: usize,
    /// `(predicted label, truth label)` pairs of that relabeling.
    pub permutation: Vec<(usize, usize)>,
    /// `(truth label, count)`.
    pub per_class_counts: Vec<(usize, usize)>,
    /// Point ids still wrong after relabeling.
    pub misclassified: Vec<usize>,
}

pub fn confusion_report(pred: &[usize], truth: &[usize]) -> Result<ConfusionReport> {
    if pred.len() != truth.len() {
        return Err(Error::invalid(format!(
            "prediction has {} labels, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut values: Vec<usize> = pred.iter().chain(truth).copied().collect();
    values.sort_unstable();
    values.dedup();
    let l = values.len();
    if l > MAX_CONFUSION_LABELS {
        return Err(Error::invalid(format!(
            "{l} distinct labels; at most {MAX_CONFUSION_LABELS} supported"
        )));
    }
    let index = |v: usize| values.binary_search(&v).expect("label collected above");
    let mut table = vec![vec![0usize; l]; l];
    for (&p, &t) in pred.iter().zip(truth) {
        table[index(p)][index(t)] += 1;
    }

    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut perm: Vec<usize> = (0..l).collect();
    loop {
        let correct: usize = (0..l).map(|i| table[i][perm[i]]).sum();
        let errors = pred.len() - correct;
        if best.as_ref().is_none_or(|(e, _)| errors < *e) {
            best = Some((errors, perm.clone()));
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let (errors, perm) = best.unwrap_or((0, Vec::new()));
    let permutation: Vec<(usize, usize)> = (0..l).map(|i| (values[i], values[perm[i]])).collect();
    let per_class_counts = values
        .iter()
        .map(|&v| (v, truth.iter().filter(|&&t| t == v).count()))
        .filter(|(_, c)| *c > 0)
        .collect();
    let misclassified = pred
        .iter()
        .zip(truth)
        .enumerate()
        .filter(|(_, (&p, &t))| values[perm[index(p)]] != t)
        .map(|(i, _)| i)
        .collect();
    Ok(ConfusionReport {
        errors,
        permutation,
        per_class_counts,
        misclassified,
    })
}

/// Lexicographic successor; false once `p` is the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub r2: f64,
    pub n_used: usize,
}

pub const MIN_FIT_POINTS: usize = 10;

/// Least-squares `v ≈ a u² + b u + c` after dropping the `trim_q` fraction
/// of points with the lowest density.
pub fn quadratic_fit_r2(u: &[f64], v: &[f64], trim_q: f64, density: &DensityEstimate) -> Result<QuadraticFit> {
    let n = u.len();
    if v.len() != n || density.len() != n {
        return Err(Error::invalid(format!(
            "length mismatch: u={}, v={}, density={}",
            n,
            v.len(),
            density.len()
        )));
    }
    if !(0.0..0.5).contains(&trim_q) {
        return Err(Error::invalid(format!("trim fraction must be in [0, 0.5), got {trim_q}")));
    }
    let keep = density_keep(density, trim_q);
    if keep.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_FIT_POINTS,
            got: keep.len(),
        });
    }
    let us: Vec<f64> = keep.iter().map(|&i| u[i]).collect();
    let vs: Vec<f64> = keep.iter().map(|&i| v[i]).collect();
    let (mu, su) = mean_std(&us);
    if !(su > 0.0) {
        return Err(Error::DegenerateCloud("u is constant after trimming".into()));
    }
    // Fit on standardized z: well conditioned and exactly affine-invariant.
    let z: Vec<f64> = us.iter().map(|x| (x - mu) / su).collect();
    let cols = [
        vec![1.0; z.len()],
        z.clone(),
        z.iter().map(|x| x * x).collect::<Vec<_>>(),
    ];
    let (coef, resid) = least_squares_3(&cols, &vs);
    let (c0, c1, c2) = (coef[0], coef[1], coef[2]);
    let a = c2 / (su * su);
    let b = c1 / su - 2.0 * c2 * mu / (su * su);
    let c = c0 - c1 * mu / su + c2 * mu * mu / (su * su);

    let (vm, _) = mean_std(&vs);
    let sst: f64 = vs.iter().map(|x| (x - vm).powi(2)).sum();
    let ssr: f64 = resid.iter().map(|r| r * r).sum();
    let r2 = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };
    Ok(QuadraticFit {
        a,
        b,
        c,
        r2,
        n_used: keep.len(),
    })
}

/// Indices kept after dropping the `floor(trim_q · N)` lowest-density points
/// (ties by index), in ascending order.
pub fn density_keep(density: &DensityEstimate, trim_q: f64) -> Vec<usize> {
    let n = density.len();
    let drop = (trim_q * n as f64).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| density.q[i].total_cmp(&density.q[j]).then(i.cmp(&j)));
    let mut keep: Vec<usize> = order[drop.min(n)..].to_vec();
    keep.sort_unstable();
    keep
}

/// Modified Gram–Schmidt QR solve for three columns; returns coefficients
/// and residual vector.
fn least_squares_3(cols: &[Vec<f64>; 3], y: &[f64]) -> ([f64; 3], Vec<f64>) {
    let mut q: Vec<Vec<f64>> = cols.to_vec();
    let mut r = [[0.0f64; 3]; 3];
    for j in 0..3 {
        for i in 0..j {
            let d: f64 = q[i].iter().zip(&q[j]).map(|(a, b)| a * b).sum();
            r[i][j] = d;
            let qi = q[i].clone();
            for (x, e) in q[j].iter_mut().zip(&qi) {
                *x -= d * e;
            }
        }
        let nrm = q[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        r[j][j] = nrm;
        if nrm > 0.0 {
            q[j].iter_mut().for_each(|x| *x /= nrm);
        }
    }
    let mut resid = y.to_vec();
    let mut qty = [0.0f64; 3];
    for j in 0..3 {
        let d: f64 = q[j].iter().zip(&resid).map(|(a, b)| a * b).sum();
        qty[j] = d;
        for (x, e) in resid.iter_mut().zip(&q[j]) {
            *x -= d * e;
        }
    }
    let mut coef = [0.0f64; 3];
    for j in (0..3).rev() {
        let s: f64 = (j + 1..3).map(|k| r[j][k] * coef[k]).sum();
        coef[j] = if r[j][j] > 0.0 { (qty[j] - s) / r[j][j] } else { 0.0 };
    }
    (coef, resid)
}

/// Mean and population standard deviation.
pub fn mean_std(x: &[f64]) -> (f64, f64) {
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

pub fn coefficient_of_variation(x: &[f64]) -> f64 {
    let (m, s) = mean_std(x);
    s / m.abs()
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, sx) = mean_std(x);
    let (my, sy) = mean_std(y);
    let n = x.len() as f64;
    let cov = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / n;
    cov / (sx * sy)
}

pub const KMEANS_RESTARTS: usize = 50;
const KMEANS_MAX_ITER: usize = 300;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Every point identical; all labels set to 0.
    pub degenerate: bool,
}

/// Lloyd's algorithm with k-means++ seeding, best of 50 restarts.
///
/// Restart `r` draws from substream `r` of `seed`; the lowest inertia wins,
/// lowest restart on ties. Labels are renumbered by first appearance.
pub fn kmeans(coords: &Array2<f64>, k: usize, seed: u64) -> Result<KMeansResult> {
    let n = coords.nrows();
    if coords.ncols() == 0 {
        return Err(Error::invalid("k-means needs at least one coordinate"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must be in 1..={n}, got {k}")));
    }
    let first = coords.row(0);
    if coords.outer_iter().all(|r| r == first) {
        if k > 1 {
            log::warn!("k-means: all {n} points coincide; returning a single cluster");
        }
        return Ok(KMeansResult {
            labels: vec![0; n],
            inertia: 0.0,
            degenerate: true,
        });
    }
    let runs: Vec<(Vec<usize>, f64)> = (0..KMEANS_RESTARTS)
        .into_par_iter()
        .map(|r| lloyd(coords, k, &mut Stream::with_substream(seed, r as u64)))
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.1 < runs[best].1 {
            best = r;
        }
    }
    let (labels, inertia) = runs.into_iter().nth(best).expect("at least one restart");
    Ok(KMeansResult {
        labels: renumber(&labels),
        inertia,
        degenerate: false,
    })
}

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn lloyd(x: &Array2<f64>, k: usize, rng: &mut Stream) -> (Vec<usize>, f64) {
    let n = x.nrows();
    let mut centers = Array2::<f64>::zeros((k, x.ncols()));
    let c0 = rng.next_below(n as u64) as usize;
    centers.row_mut(0).assign(&x.row(c0));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), centers.row(0))).collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.next_f64() * total;
            let mut acc = 0.0;
            let mut idx = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && *d > 0.0 {
                    idx = i;
                    break;
                }
            }
            idx
        } else {
            rng.next_below(n as u64) as usize
        };
        centers.row_mut(c).assign(&x.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(x.row(i), centers.row(c)));
        }
    }

    let mut labels = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITER {
        let mut changed = false;
        for i in 0..n {
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for c in 0..k {
                let d = sq_dist(x.row(i), centers.row(c));
                if d < bd {
                    bd = d;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Array2::<f64>::zeros(centers.raw_dim());
        let mut counts = vec![0usize; k];
        for i in 0..n {
            let mut row = sums.row_mut(labels[i]);
            row += &x.row(i);
            counts[labels[i]] += 1;
        }
        for c in 0..k {
            if counts[c] > 0 {
                centers.row_mut(c).assign(&(&sums.row(c) / counts[c] as f64));
            }
        }
    }
    let inertia = (0..n).map(|i| sq_dist(x.row(i), centers.row(labels[i]))).sum();
    (labels, inertia)
}

fn renumber(labels: &[usize]) -> Vec<usize> {
    let mut map: Vec<(usize, usize)> = Vec::new();
    labels
        .iter()
        .map(|&l| match map.iter().find(|(from, _)| *from == l) {
            Some((_, to)) => *to,
            None => {
                let to = map.len();
                map.push((l, to));
                to
            }
        })
        .collect()
}
