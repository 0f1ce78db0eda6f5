//! Closed-form reference results used as ground truth.
//!
//! Everything here is independent of the discrete pipeline: OU spectra and
//! eigenfunctions, tensor-product spectra, the two-well reaction coordinate,
//! continuum generator formulas, and a tiny-matrix eigenvalue oracle.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OUParams {
    pub tau: f64,
    pub epsilon: f64,
}

impl OUParams {
    pub fn new(tau: f64, epsilon: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) || !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "OU parameters must be positive, got tau={tau}, epsilon={epsilon}"
            )));
        }
        Ok(OUParams { tau, epsilon })
    }

    /// `τ / (τ + ε)`
    pub fn mu(&self) -> f64 {
        self.tau / (self.tau + self.epsilon)
    }
}

/// `λ_k = (τ/(τ+ε))^k` for `k = 0..kmax`.
pub fn ou_spectrum(p: OUParams, kmax: usize) -> Vec<f64> {
    let mu = p.mu();
    (0..kmax).map(|k| mu.powi(k as i32)).collect()
}

/// Which operator's eigenfunction to evaluate. They differ by powers of
/// `√p_ε`, with `p_ε ∝ exp(−x²/2(τ+ε))` for Gaussian data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenKind {
    Symmetric,
    Forward,
    Backward,
}

/// Unnormalized OU eigenfunction, `k ∈ {0, 1}`.
///
/// Symmetric: `x^k exp(−x²/4(τ+ε))`; forward multiplies by `√p_ε`,
/// backward divides by it (which leaves the bare polynomial `x^k`).
pub fn ou_eigenfunction(p: OUParams, kind: EigenKind, k: usize, x: f64) -> Result<f64> {
    if k > 1 {
        return Err(Error::Unsupported(format!(
            "finite-epsilon OU eigenfunction of order {k}; only k = 0, 1 have closed forms"
        )));
    }
    let s = p.tau + p.epsilon;
    let exponent = match kind {
        EigenKind::Symmetric => -x * x / (4.0 * s),
        EigenKind::Forward => -x * x / (2.0 * s),
        EigenKind::Backward => 0.0,
    };
    Ok(x.powi(k as i32) * exponent.exp())
}

/// All products `Π μ_a^{i_a}`, `μ_a = τ_a/(τ_a+ε)`, largest first; ties are
/// ordered by multi-index. Returns the top `kmax`.
pub fn tensor_spectrum(taus: &[f64], epsilon: f64, kmax: usize) -> Result<Vec<(f64, Vec<usize>)>> {
    if taus.is_empty() {
        return Err(Error::invalid("tensor_spectrum needs at least one tau"));
    }
    let mus: Vec<f64> = taus
        .iter()
        .map(|&t| OUParams::new(t, epsilon).map(|p| p.mu()))
        .collect::<Result<_>>()?;
    if kmax == 0 {
        return Ok(Vec::new());
    }
    // A multi-index of total degree s is strictly dominated by at least s
    // others, so degree ≤ kmax − 1 covers the top kmax.
    let bound = kmax - 1;
    let mut out = Vec::new();
    let mut idx = vec![0usize; mus.len()];
    enumerate(&mus, bound, 0, &mut idx, &mut out);
    out.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
    out.truncate(kmax);
    Ok(out)
}

fn enumerate(mus: &[f64], left: usize, pos: usize, idx: &mut Vec<usize>, out: &mut Vec<(f64, Vec<usize>)>) {
    if pos == mus.len() {
        let v = idx.iter().zip(mus).map(|(&i, m)| m.powi(i as i32)).product();
        out.push((v, idx.clone()));
        return;
    }
    for i in 0..=left {
        idx[pos] = i;
        enumerate(mus, left - i, pos + 1, idx, out);
    }
    idx[pos] = 0;
}

/// `(φ_L − φ_R)/(φ_L + φ_R)` with single-well forms
/// `φ_c(x) = √(τ_c/(τ_c+ε)) exp(−(x−x_c)²/2(τ_c+ε))`.
///
/// Evaluated as `tanh((ln φ_L − ln φ_R)/2)`, which is the same quotient
/// but cannot underflow to 0/0 far from both wells.
pub fn doublewell_psi1(xl: f64, xr: f64, tau_l: f64, tau_r: f64, epsilon: f64, x: f64) -> Result<f64> {
    if !(xl < xr) {
        return Err(Error::invalid(format!("need xL < xR, got {xl} and {xr}")));
    }
    let log_phi = |xc: f64, tau: f64| -> Result<f64> {
        let p = OUParams::new(tau, epsilon)?;
        let s = p.tau + p.epsilon;
        Ok(0.5 * p.mu().ln() - (x - xc).powi(2) / (2.0 * s))
    };
    let l = log_phi(xl, tau_l)?;
    let r = log_phi(xr, tau_r)?;
    Ok(((l - r) / 2.0).tanh())
}

/// A function with analytic gradient and Laplacian.
pub trait SmoothFunction {
    fn value(&self, x: &[f64]) -> f64;
    fn grad(&self, x: &[f64]) -> Vec<f64>;
    fn laplacian(&self, x: &[f64]) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestFunction {
    /// `sin(x_0)`
    Sin,
    /// `x_0`
    Linear,
    /// `exp(−|x|²/2)`
    Gauss,
}

impl TestFunction {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "sin" => Ok(TestFunction::Sin),
            "linear" => Ok(TestFunction::Linear),
            "gauss" => Ok(TestFunction::Gauss),
            _ => Err(Error::invalid(format!("unknown test function '{s}' (sin|linear|gauss)"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TestFunction::Sin => "sin",
            TestFunction::Linear => "linear",
            TestFunction::Gauss => "gauss",
        }
    }
}

impl SmoothFunction for TestFunction {
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Sin => x[0].sin(),
            TestFunction::Linear => x[0],
            TestFunction::Gauss => (-0.5 * norm2(x)).exp(),
        }
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        match self {
            TestFunction::Sin => g[0] = x[0].cos(),
            TestFunction::Linear => g[0] = 1.0,
            TestFunction::Gauss => {
                let e = (-0.5 * norm2(x)).exp();
                for (gi, xi) in g.iter_mut().zip(x) {
                    *gi = -xi * e;
                }
            }
        }
        g
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Sin => -x[0].sin(),
            TestFunction::Linear => 0.0,
            TestFunction::Gauss => {
                let r2 = norm2(x);
                (r2 - x.len() as f64) * (-0.5 * r2).exp()
            }
        }
    }
}

/// The Boltzmann factor `e^{-U}` of a potential.
pub struct BoltzmannFactor<'a>(pub &'a PotentialSpec);

impl SmoothFunction for BoltzmannFactor<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        self.0.value(x).map(|u| (-u).exp()).unwrap_or(f64::NAN)
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        match self.0.evaluate(x) {
            Ok(e) => {
                let p = (-e.value).exp();
                e.grad.iter().map(|g| -g * p).collect()
            }
            Err(_) => vec![f64::NAN; x.len()],
        }
    }

    fn laplacian(&self, x: &[f64]) -> f64 {
        match self.0.evaluate(x) {
            Ok(e) => (norm2(&e.grad) - e.laplacian) * (-e.value).exp(),
            Err(_) => f64::NAN,
        }
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `Δf − 2(1−α)∇f·∇U`
pub fn backward_generator_reference(spec: &PotentialSpec, alpha: f64, f: &dyn SmoothFunction, x: &[f64]) -> Result<f64> {
    let e = spec.evaluate(x)?;
    Ok(f.laplacian(x) - 2.0 * (1.0 - alpha) * dot(&f.grad(x), &e.grad))
}

/// `Δf − 2α∇f·∇U + (2α−1) f (|∇U|² − ΔU)`
pub fn forward_generator_reference(spec: &PotentialSpec, alpha: f64, f: &dyn SmoothFunction, x: &[f64]) -> Result<f64> {
    let e = spec.evaluate(x)?;
    let v = norm2(&e.grad) - e.laplacian;
    Ok(f.laplacian(x) - 2.0 * alpha * dot(&f.grad(x), &e.grad) + (2.0 * alpha - 1.0) * f.value(x) * v)
}

/// Continuum (ε → 0) backward eigenfunctions of `f'' − 2(1−α) f' x/τ`:
/// `He_k(x √c)` with eigenvalue `−c k`, `c = 2(1−α)/τ`. `k ≤ 4`, `α < 1`.
pub fn continuum_ou_eigenfunction(tau: f64, alpha: f64, k: usize, x: f64) -> Result<f64> {
    let c = continuum_rate(tau, alpha)?;
    let y = x * c.sqrt();
    let y2 = y * y;
    match k {
        0 => Ok(1.0),
        1 => Ok(y),
        2 => Ok(y2 - 1.0),
        3 => Ok(y * (y2 - 3.0)),
        4 => Ok(y2 * y2 - 6.0 * y2 + 3.0),
        _ => Err(Error::Unsupported(format!("continuum eigenfunction of order {k}; k <= 4 only"))),
    }
}

pub fn continuum_ou_eigenvalue(tau: f64, alpha: f64, k: usize) -> Result<f64> {
    Ok(-continuum_rate(tau, alpha)? * k as f64)
}

fn continuum_rate(tau: f64, alpha: f64) -> Result<f64> {
    if !(tau > 0.0) || !(0.0..1.0).contains(&alpha) {
        return Err(Error::invalid(format!(
            "continuum OU eigenfunctions need tau > 0 and alpha in [0, 1), got tau={tau}, alpha={alpha}"
        )));
    }
    Ok(2.0 * (1.0 - alpha) / tau)
}

pub const BRUTE_FORCE_MAX_N: usize = 6;

/// Eigenvalues of a small matrix that is diagonally similar to a symmetric
/// one (e.g. a reversible Markov matrix), sorted descending.
///
/// Symmetrizes via `S_ij = sign(A_ij) √(A_ij A_ji)`, confirms the
/// similarity through `tr(Aᵖ) = tr(Sᵖ)`, then bisects each eigenvalue
/// using Sylvester inertia counts of `S − xI`. No iteration on vectors.
pub fn brute_force_spectrum(a: &Array2<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if n != a.ncols() || n == 0 || n > BRUTE_FORCE_MAX_N {
        return Err(Error::invalid(format!(
            "brute_force_spectrum needs a square matrix with 1..={BRUTE_FORCE_MAX_N} rows, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut s = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        s[[i, i]] = a[[i, i]];
        for j in 0..i {
            let (x, y) = (a[[i, j]], a[[j, i]]);
            let p = x * y;
            if p < 0.0 || ((x == 0.0) != (y == 0.0)) {
                return Err(Error::Unsupported(format!(
                    "entries ({i},{j}) and ({j},{i}) cannot be symmetrized; spectrum may be complex"
                )));
            }
            let v = x.signum() * p.sqrt();
            s[[i, j]] = v;
            s[[j, i]] = v;
        }
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let (mut pa, mut ps) = (a.clone(), s.clone());
    for p in 1..=n {
        let (ta, ts) = (pa.diag().sum(), ps.diag().sum());
        let tol = 1e-9 * (n as f64) * scale.powi(p as i32).max(1.0);
        if (ta - ts).abs() > tol {
            return Err(Error::Unsupported(format!(
                "trace of power {p} differs after symmetrization ({ta} vs {ts}); spectrum may be complex"
            )));
        }
        pa = pa.dot(a);
        ps = ps.dot(&s);
    }

    // Gershgorin bounds.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r: f64 = (0..n).filter(|&j| j != i).map(|j| s[[i, j]].abs()).sum();
        lo = lo.min(s[[i, i]] - r);
        hi = hi.max(s[[i, i]] + r);
    }
    let pad = 1e-12 * (hi - lo).abs().max(1.0);
    lo -= pad;
    hi += pad;

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // k-th smallest: smallest x with count_below(x) > k.
        let (mut a_lo, mut a_hi) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a_lo + a_hi);
            if mid <= a_lo || mid >= a_hi {
                break;
            }
            if count_below(&s, mid) > k {
                a_hi = mid;
            } else {
                a_lo = mid;
            }
        }
        out.push(0.5 * (a_lo + a_hi));
    }
    out.reverse();
    Ok(out)
}

/// Number of eigenvalues of symmetric `s` below `x`: negative inertia of
/// `s − xI` from a Bunch–Parlett LDLᵀ factorization (complete symmetric
/// pivoting with 1×1 and 2×2 blocks), by Sylvester's law of inertia.
fn count_below(s: &Array2<f64>, x: f64) -> usize {
    const GROWTH: f64 = 0.640_388_203_202_208; // (1 + √17) / 8
    let n = s.nrows();
    let mut m = s.clone();
    for i in 0..n {
        m[[i, i]] -= x;
    }
    let mut active: Vec<usize> = (0..n).collect();
    let mut neg = 0;
    while !active.is_empty() {
        let (mut r, mut diag_max) = (active[0], 0.0f64);
        for &i in &active {
            if m[[i, i]].abs() > diag_max {
                diag_max = m[[i, i]].abs();
                r = i;
            }
        }
        let (mut p, mut q, mut off_max) = (0, 0, 0.0f64);
        for (a, &i) in active.iter().enumerate() {
            for &j in &active[a + 1..] {
                if m[[i, j]].abs() > off_max {
                    off_max = m[[i, j]].abs();
                    (p, q) = (i, j);
                }
            }
        }
        if diag_max == 0.0 && off_max == 0.0 {
            break; // remaining block is zero: zero eigenvalues
        }
        if diag_max >= GROWTH * off_max {
            let d = m[[r, r]];
            if d < 0.0 {
                neg += 1;
            }
            active.retain(|&i| i != r);
            for &i in &active {
                for &j in &active {
                    m[[i, j]] -= m[[i, r]] * m[[r, j]] / d;
                }
            }
        } else {
            // |b| dominates a and c, so the block is indefinite: one negative eigenvalue.
            let (a, b, c) = (m[[p, p]], m[[p, q]], m[[q, q]]);
            let det = a * c - b * b;
            neg += 1;
            active.retain(|&i| i != p && i != q);
            for &i in &active {
                for &j in &active {
                    let (ip, iq) = (m[[i, p]], m[[i, q]]);
                    let (pj, qj) = (m[[p, j]], m[[q, j]]);
                    // [ip iq] E⁻¹ [pj qj]ᵀ with E⁻¹ = [[c, −b], [−b, a]] / det
                    m[[i, j]] -= (ip * (c * pj - b * qj) + iq * (a * qj - b * pj)) / det;
                }
            }
        }
    }
    neg
}
