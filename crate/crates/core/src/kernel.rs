//! Gaussian affinities `K_ij = exp(−‖x_i − x_j‖² / 2ε)` and the kernel
//! density sums `q_i = Σ_j K_ij`.
//!
//! The `1/(2πε)^{d/2}` prefactor is omitted; it cancels in every
//! normalization. Code comparing `q` against a continuum density must
//! reinsert it.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::dataset::PointCloud;
use crate::error::{Error, Result};
use crate::rng::Stream;

/// Default cap on one dense N×N matrix.
pub const DEFAULT_MEMORY_BUDGET: usize = 2 << 30;

#[derive(Clone, Debug, PartialEq)]
pub struct KernelParams {
    pub epsilon: f64,
    /// Squared radius beyond which entries are set to exactly zero.
    pub cutoff_r2: Option<f64>,
    /// Bytes allowed for the dense matrix.
    pub memory_budget: usize,
}

impl KernelParams {
    pub fn new(epsilon: f64) -> Self {
        KernelParams {
            epsilon,
            cutoff_r2: None,
            memory_budget: DEFAULT_MEMORY_BUDGET,
        }
    }

    /// Truncation only of entries below `e^{-9}`: requires `cutoff_r2 ≥ 18ε`.
    pub fn with_cutoff(mut self, cutoff_r2: f64) -> Self {
        self.cutoff_r2 = Some(cutoff_r2);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be positive and finite, got {}",
                self.epsilon
            )));
        }
        if let Some(r2) = self.cutoff_r2 {
            if !(r2 >= 18.0 * self.epsilon) {
                return Err(Error::invalid(format!(
                    "cutoff_r2 = {r2} truncates entries above e^-9; need >= {}",
                    18.0 * self.epsilon
                )));
            }
        }
        Ok(())
    }
}

/// Symmetric N×N affinity matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelMatrix {
    k: Array2<f64>,
    epsilon: f64,
}

impl KernelMatrix {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.k.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.k.nrows() == 0
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Wraps a caller-built affinity matrix; checks symmetry and range.
    pub fn from_matrix(k: Array2<f64>, epsilon: f64) -> Result<Self> {
        let n = k.nrows();
        if n == 0 || k.ncols() != n {
            return Err(Error::invalid("kernel matrix must be square and non-empty"));
        }
        for i in 0..n {
            for j in 0..n {
                let v = k[[i, j]];
                if !(0.0..=1.0).contains(&v) || v != k[[j, i]] {
                    return Err(Error::invalid(format!(
                        "entry ({i},{j}) = {v} breaks symmetry or [0,1] range"
                    )));
                }
            }
        }
        Ok(KernelMatrix { k, epsilon })
    }
}

/// Per-point kernel sums, a discrete unnormalized density estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate {
    pub q: Array1<f64>,
}

impl DensityEstimate {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }
}

pub fn gaussian_kernel_matrix(cloud: &PointCloud, params: &KernelParams) -> Result<KernelMatrix> {
    params.validate()?;
    let n = cloud.len();
    let needed = n
        .checked_mul(n)
        .and_then(|m| m.checked_mul(std::mem::size_of::<f64>()))
        .unwrap_or(usize::MAX);
    if needed > params.memory_budget {
        return Err(Error::Capacity {
            n,
            needed,
            budget: params.memory_budget,
        });
    }

    let pts = cloud.points();
    let inv = 1.0 / (2.0 * params.epsilon);
    let cutoff = params.cutoff_r2.unwrap_or(f64::INFINITY);
    let mut k = Array2::<f64>::zeros((n, n));

    // Upper triangle, one row per task; every entry written once.
    k.outer_iter_mut()
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let xi = pts.row(i);
            row[i] = 1.0;
            for j in i + 1..n {
                let r2: f64 = xi
                    .iter()
                    .zip(pts.row(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                row[j] = if r2 > cutoff { 0.0 } else { (-r2 * inv).exp() };
            }
        });
    for i in 0..n {
        for j in 0..i {
            k[[i, j]] = k[[j, i]];
        }
    }
    Ok(KernelMatrix {
        k,
        epsilon: params.epsilon,
    })
}

pub fn density_estimate(k: &KernelMatrix) -> DensityEstimate {
    let q = k
        .k
        .outer_iter()
        .map(|row| row.iter().fold(0.0, |acc, v| acc + v))
        .collect();
    DensityEstimate { q }
}

const HEURISTIC_PAIRS: usize = 10_000;
const HEURISTIC_SEED: u64 = 0x5eed_e951;

/// Median squared pairwise distance over (up to) 10⁴ pairs, divided by
/// `2 ln 10`. Uses every pair when there are at most 10⁴ of them.
pub fn epsilon_heuristic(cloud: &PointCloud) -> Result<f64> {
    let n = cloud.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let pts = cloud.points();
    let sq = |i: usize, j: usize| -> f64 {
        pts.row(i)
            .iter()
            .zip(pts.row(j).iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    };
    let total_pairs = n * (n - 1) / 2;
    let mut d2: Vec<f64> = if total_pairs <= HEURISTIC_PAIRS {
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| sq(i, j))
            .collect()
    } else {
        let mut rng = Stream::new(HEURISTIC_SEED);
        (0..HEURISTIC_PAIRS)
            .map(|_| {
                let i = rng.next_below(n as u64) as usize;
                let mut j = rng.next_below(n as u64 - 1) as usize;
                if j >= i {
                    j += 1;
                }
                sq(i, j)
            })
            .collect()
    };
    d2.sort_by(f64::total_cmp);
    let m = d2.len();
    let median = if m % 2 == 1 {
        d2[m / 2]
    } else {
        0.5 * (d2[m / 2 - 1] + d2[m / 2])
    };
    if median <= 0.0 {
        return Err(Error::DegenerateCloud(
            "median pairwise distance is zero (identical points)".into(),
        ));
    }
    Ok(median / (2.0 * std::f64::consts::LN_10))
}
