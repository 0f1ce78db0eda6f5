//! α-normalized Markov chains, their spectra, and diffusion-map embeddings.
//!
//! Given affinities `K` and density sums `q`:
//!
//! ```text
//! K^(α)_ij = K_ij / (q_i^α q_j^α)       d_i = Σ_j K^(α)_ij
//! M_b = D⁻¹ K^(α)   (row-stochastic, acts on functions)
//! M_s = D^{-1/2} K^(α) D^{-1/2}   (symmetric, same spectrum)
//! π_i = d_i / Σ d
//! ```
//!
//! `α = 0` is the classical normalized graph Laplacian, `α = ½` recovers the
//! backward Fokker–Planck generator of the sampled potential, and `α = 1`
//! removes the density entirely (Laplace–Beltrami).
//!
//! Eigenvectors `v` of `M_s` map to right eigenvectors `ψ = D^{-1/2} v` of
//! `M_b` (scaled so `Σ π ψ² = 1`, making `ψ_0 ≡ 1`) and to left eigenvectors
//! `φ = π ψ`.

use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, Axis};

use crate::dataset::{fmt_f64, write_atomic};
use crate::error::{Error, Result};
use crate::kernel::{DensityEstimate, KernelMatrix};
use crate::linalg::{matvec, symmetric_eigen, top_eigen};

/// Largest N for which the full dense eigendecomposition is used.
pub const FULL_EIGEN_MAX_N: usize = 2000;
pub const ITERATIVE_TOL: f64 = 1e-12;
pub const ITERATIVE_MAX_ITER: usize = 100_000;
/// Eigenvalues closer than this are treated as one invariant subspace.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiffusionParams {
    pub alpha: f64,
    /// Eigenpairs kept, including the trivial one.
    pub k: usize,
    /// Diffusion time.
    pub m: u32,
}

impl DiffusionParams {
    pub fn validate(&self, n: usize) -> Result<()> {
        validate_alpha(self.alpha)?;
        if self.k == 0 || self.k > n {
            return Err(Error::invalid(format!("k must be in 1..={n}, got {}", self.k)));
        }
        Ok(())
    }
}

fn validate_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")))
    }
}

#[derive(Clone, Debug)]
pub struct MarkovEnsemble {
    pub k_alpha: Array2<f64>,
    pub d: Array1<f64>,
    pub m_s: Array2<f64>,
    pub pi: Array1<f64>,
    pub alpha: f64,
    pub epsilon: f64,
}

impl MarkovEnsemble {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    /// Row-stochastic `M_b = D⁻¹ K^(α)`.
    pub fn backward_matrix(&self) -> Array2<f64> {
        let mut mb = self.k_alpha.clone();
        for (mut row, di) in mb.outer_iter_mut().zip(self.d.iter()) {
            row /= *di;
        }
        mb
    }

    /// Column-stochastic `M_f = M_bᵀ`, propagating densities.
    pub fn forward_matrix(&self) -> Array2<f64> {
        self.backward_matrix().reversed_axes()
    }

    /// `M_b f` without materializing `M_b`.
    pub fn apply_backward(&self, f: ArrayView1<'_, f64>) -> Result<Array1<f64>> {
        if f.len() != self.len() {
            return Err(Error::invalid(format!(
                "vector has length {}, chain has {} states",
                f.len(),
                self.len()
            )));
        }
        let kf = matvec(&self.k_alpha, &f.to_owned());
        Ok(kf / &self.d)
    }
}

pub fn anisotropic_normalize(k: &KernelMatrix, q: &DensityEstimate, alpha: f64) -> Result<MarkovEnsemble> {
    validate_alpha(alpha)?;
    let n = k.len();
    if q.len() != n {
        return Err(Error::invalid(format!(
            "density has {} entries, kernel has {n} rows",
            q.len()
        )));
    }
    if let Some(i) = q.q.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::invalid(format!("density estimate q[{i}] is not positive")));
    }

    let qa: Array1<f64> = q.q.mapv(|v| v.powf(alpha));
    let mut k_alpha = k.matrix().clone();
    for (i, mut row) in k_alpha.outer_iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v /= qa[i] * qa[j];
        }
    }
    let d: Array1<f64> = k_alpha
        .outer_iter()
        .map(|row| row.iter().fold(0.0, |acc, v| acc + v))
        .collect();
    if let Some((index, &degree)) = d.iter().enumerate().find(|(_, v)| **v < 1e-300) {
        return Err(Error::Disconnected { index, degree });
    }
    let inv_sqrt: Array1<f64> = d.mapv(|v| 1.0 / v.sqrt());
    let mut m_s = k_alpha.clone();
    for (i, mut row) in m_s.outer_iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= inv_sqrt[i] * inv_sqrt[j];
        }
    }
    let total = d.sum();
    let pi = &d / total;
    Ok(MarkovEnsemble {
        k_alpha,
        d,
        m_s,
        pi,
        alpha,
        epsilon: k.epsilon(),
    })
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    /// Descending.
    pub lambdas: Vec<f64>,
    /// Right eigenvectors of `M_b` as columns, π-orthonormal.
    pub psi: Array2<f64>,
    /// Left eigenvectors, `φ_a(i) = π_i ψ_a(i)`.
    pub phi: Array2<f64>,
    /// Orthonormal eigenvectors of `M_s`.
    pub v: Array2<f64>,
}

impl SpectralDecomposition {
    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    pub fn psi_col(&self, a: usize) -> ArrayView1<'_, f64> {
        self.psi.column(a)
    }
}

/// Top-`k` eigenpairs of the chain.
///
/// Output is deterministic: eigenvectors of (numerically) repeated
/// eigenvalues get a canonical basis, and every `ψ_a` has its
/// largest-magnitude entry positive (lowest index on ties).
pub fn spectral_decompose(ens: &MarkovEnsemble, k: usize) -> Result<SpectralDecomposition> {
    let n = ens.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k must be in 1..={n}, got {k}")));
    }
    let eig = if n <= FULL_EIGEN_MAX_N {
        let mut full = symmetric_eigen(&ens.m_s)?;
        full.values.truncate(k);
        full.vectors = full.vectors.slice(ndarray::s![.., ..k]).to_owned();
        full
    } else {
        top_eigen(&ens.m_s, k, ITERATIVE_TOL, ITERATIVE_MAX_ITER)?
    };
    let lambdas = eig.values;
    let mut v = eig.vectors;
    canonicalize_degenerate(&lambdas, &mut v);

    let scale = ens.d.sum().sqrt();
    let mut psi = v.clone();
    for (mut row, di) in psi.outer_iter_mut().zip(ens.d.iter()) {
        row *= scale / di.sqrt();
    }
    for a in 0..k {
        let col = psi.column(a);
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < 0.0 {
            psi.column_mut(a).mapv_inplace(|x| -x);
            v.column_mut(a).mapv_inplace(|x| -x);
        }
    }
    let mut phi = psi.clone();
    for (mut row, p) in phi.outer_iter_mut().zip(ens.pi.iter()) {
        row *= *p;
    }
    Ok(SpectralDecomposition { lambdas, psi, phi, v })
}

/// Replaces each block of columns whose eigenvalues agree within
/// [`DEGENERACY_TOL`] by a basis built from coordinate directions: project
/// `e_i` onto the block, Gram–Schmidt, always taking the coordinate with
/// the largest remaining projection (lowest index on ties).
fn canonicalize_degenerate(values: &[f64], v: &mut Array2<f64>) {
    let n = v.nrows();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end - 1] - values[end]).abs() < DEGENERACY_TOL {
            end += 1;
        }
        let m = end - start;
        if m > 1 {
            let block = v.slice(ndarray::s![.., start..end]).to_owned();
            let mut basis: Vec<Array1<f64>> = Vec::with_capacity(m);
            for _ in 0..m {
                let mut best: Option<(f64, Array1<f64>)> = None;
                for i in 0..n {
                    // P e_i = block · block[i, :]ᵀ
                    let mut w = block.dot(&block.row(i));
                    for b in &basis {
                        let c = b.dot(&w);
                        w.scaled_add(-c, b);
                    }
                    let nrm = w.dot(&w).sqrt();
                    if best.as_ref().is_none_or(|(bn, _)| nrm > *bn) {
                        best = Some((nrm, w));
                    }
                }
                let (nrm, w) = best.expect("n >= 1");
                basis.push(w / nrm);
            }
            for (c, b) in basis.into_iter().enumerate() {
                v.column_mut(start + c).assign(&b);
            }
        }
        start = end;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionEmbedding {
    /// Column `j − 1` is `λ_j^m ψ_j` for `j = 1..k`.
    pub coords: Array2<f64>,
    pub m: u32,
}

pub fn embed(dec: &SpectralDecomposition, m: u32) -> DiffusionEmbedding {
    let k = dec.k();
    let n = dec.psi.nrows();
    let mut coords = Array2::zeros((n, k.saturating_sub(1)));
    for j in 1..k {
        let scale = dec.lambdas[j].powi(m as i32);
        coords.column_mut(j - 1).assign(&(&dec.psi.column(j) * scale));
    }
    DiffusionEmbedding { coords, m }
}

/// `sqrt(Σ_{a≥1} λ_a^{2m} (ψ_a(i) − ψ_a(j))²)` over the pairs in `dec`.
/// Exact diffusion distance when `dec` holds the full spectrum.
pub fn diffusion_distance(
    ens: &MarkovEnsemble,
    dec: &SpectralDecomposition,
    i: usize,
    j: usize,
    m: u32,
) -> Result<f64> {
    let n = ens.len();
    if i >= n || j >= n {
        return Err(Error::invalid(format!("ids ({i}, {j}) out of range for {n} points")));
    }
    if m == 0 {
        return Err(Error::invalid("diffusion distance needs m >= 1"));
    }
    let s: f64 = (1..dec.k())
        .map(|a| {
            let diff = dec.psi[[i, a]] - dec.psi[[j, a]];
            dec.lambdas[a].powi(2 * m as i32) * diff * diff
        })
        .sum();
    Ok(s.sqrt())
}

/// Discrete backward generator `(M_b f − f) / (ε/2)`.
///
/// The kernel `exp(−r²/2ε)` has per-coordinate variance ε, so one chain
/// step advances a diffusion with generator `Δ` by time `ε/2`; with this
/// normalization the result converges to `Δf − 2(1−α)∇f·∇U` as ε → 0.
pub fn apply_discrete_generator(ens: &MarkovEnsemble, f: ArrayView1<'_, f64>, epsilon: f64) -> Result<Array1<f64>> {
    if !(epsilon > 0.0) || (epsilon - ens.epsilon).abs() > 1e-12 * ens.epsilon {
        return Err(Error::invalid(format!(
            "epsilon {epsilon} does not match the kernel bandwidth {}",
            ens.epsilon
        )));
    }
    let mf = ens.apply_backward(f)?;
    Ok((mf - f) * (2.0 / epsilon))
}

pub fn write_eigenvalues(path: &Path, lambdas: &[f64]) -> Result<()> {
    write_atomic(path, |w| {
        writeln!(w, "j,lambda")?;
        for (j, l) in lambdas.iter().enumerate() {
            writeln!(w, "{j},{}", fmt_f64(*l))?;
        }
        Ok(())
    })
}

pub fn write_embedding(path: &Path, emb: &DiffusionEmbedding) -> Result<()> {
    write_atomic(path, |w| {
        write!(w, "id")?;
        for j in 1..=emb.coords.ncols() {
            write!(w, ",psi{j}")?;
        }
        writeln!(w)?;
        for (i, row) in emb.coords.axis_iter(Axis(0)).enumerate() {
            write!(w, "{i}")?;
            for v in row {
                write!(w, ",{}", fmt_f64(*v))?;
            }
            writeln!(w)?;
        }
        Ok(())
    })
}
