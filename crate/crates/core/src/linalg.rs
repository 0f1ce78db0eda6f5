//! Dense symmetric eigensolvers.
//!
//! [`symmetric_eigen`] is Householder tridiagonalization followed by the
//! implicit QL method (the EISPACK `tred2`/`tql2` pair). [`top_eigen`]
//! finds the leading eigenpairs of a positive semidefinite matrix by block
//! subspace iteration with Rayleigh–Ritz projection.
//!
//! Eigenvectors are held as rows of a row-major matrix while working, so
//! every O(n³) loop walks memory contiguously.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Eigenvalues in descending order, eigenvectors as matching columns.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

const MAX_QL_SWEEPS: usize = 60;

/// Full eigendecomposition of a symmetric matrix. Only the upper triangle
/// is trusted to be consistent with the lower; asymmetry is not checked.
pub fn symmetric_eigen(a: &Array2<f64>) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::invalid("symmetric_eigen needs a non-empty square matrix"));
    }
    // w[c * n + r] is V[r][c]; V starts as A (which equals its transpose).
    let mut w: Vec<f64> = a.iter().copied().collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut w, &mut d, &mut e);
    tql2(n, &mut w, &mut d, &mut e)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        let row = &w[src * n..(src + 1) * n];
        for r in 0..n {
            vectors[[r, col]] = row[r];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

#[inline]
fn at(n: usize, r: usize, c: usize) -> usize {
    c * n + r
}

fn tred2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = w[at(n, n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[at(n, i - 1, j)];
                w[at(n, i, j)] = 0.0;
                w[at(n, j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                w[at(n, j, i)] = f;
                let col = &w[j * n..j * n + i];
                let mut g = e[j] + col[j] * f;
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = &mut w[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = col[i - 1];
                w[at(n, i, j)] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the transformations.
    for i in 0..n - 1 {
        w[at(n, n - 1, i)] = w[at(n, i, i)];
        w[at(n, i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = w[at(n, k, i + 1)] / h;
            }
            for j in 0..=i {
                let (lo, hi) = w.split_at_mut((i + 1) * n);
                let target = &hi[..i + 1];
                let col = &mut lo[j * n..j * n + i + 1];
                let g: f64 = target.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
                for k in 0..=i {
                    col[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            w[at(n, k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = w[at(n, n - 1, j)];
        w[at(n, n - 1, j)] = 0.0;
    }
    w[at(n, n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

fn tql2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m == n {
            m = n - 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_SWEEPS {
                    return Err(Error::EigenNoConvergence {
                        iterations: iter,
                        residual: e[l].abs(),
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    // Rotate eigenvector rows i and i+1.
                    let (lo, hi) = w.split_at_mut((i + 1) * n);
                    let vi = &mut lo[i * n..(i + 1) * n];
                    let vi1 = &mut hi[..n];
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let hb = *b;
                        *b = s * *a + c * hb;
                        *a = c * *a - s * hb;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

/// Leading `k` eigenpairs of a symmetric positive semidefinite matrix.
///
/// Subspace iteration on a block of `min(n, max(2k, k + 8))` vectors with a
/// Rayleigh–Ritz step each sweep; converged once every wanted Ritz pair has
/// residual `‖A u − θ u‖₂ ≤ tol`. Eigenvalues of larger magnitude below zero
/// would be found first, which cannot happen for PSD input.
pub fn top_eigen(a: &Array2<f64>, k: usize, tol: f64, max_iter: usize) -> Result<SymmetricEigen> {
    let n = a.nrows();
    if n == 0 || a.ncols() != n {
        return Err(Error::invalid("top_eigen needs a non-empty square matrix"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("need 1 <= k <= {n}, got {k}")));
    }
    let b = n.min((2 * k).max(k + 8));
    if b == n {
        let mut full = symmetric_eigen(a)?;
        full.values.truncate(k);
        full.vectors = full.vectors.slice(ndarray::s![.., ..k]).to_owned();
        return Ok(full);
    }

    let mut rng = Stream::new(0x70_9e16);
    let mut q = Array2::from_shape_fn((n, b), |_| rng.standard_normal());
    orthonormalize(&mut q);

    let mut worst = f64::INFINITY;
    for iter in 1..=max_iter {
        let y = a.dot(&q);
        let h = q.t().dot(&y);
        let h = (&h + &h.t()) * 0.5;
        let small = symmetric_eigen(&h)?;
        let u = q.dot(&small.vectors);
        let au = y.dot(&small.vectors);

        worst = 0.0;
        for j in 0..k {
            let theta = small.values[j];
            let r: f64 = au
                .column(j)
                .iter()
                .zip(u.column(j).iter())
                .map(|(x, v)| (x - theta * v).powi(2))
                .sum::<f64>()
                .sqrt();
            worst = worst.max(r);
        }
        if worst <= tol {
            let mut vectors = u.slice(ndarray::s![.., ..k]).to_owned();
            for mut col in vectors.axis_iter_mut(Axis(1)) {
                let nrm = col.dot(&col).sqrt();
                col /= nrm;
            }
            log::debug!("subspace iteration converged in {iter} sweeps (residual {worst:e})");
            return Ok(SymmetricEigen {
                values: small.values[..k].to_vec(),
                vectors,
            });
        }
        q = au;
        orthonormalize(&mut q);
    }
    Err(Error::EigenNoConvergence {
        iterations: max_iter,
        residual: worst,
    })
}

/// Modified Gram–Schmidt, applied twice, on the columns of `q`.
/// A column that collapses is replaced by a fresh coordinate direction.
pub(crate) fn orthonormalize(q: &mut Array2<f64>) {
    let (n, b) = q.dim();
    for _pass in 0..2 {
        for j in 0..b {
            for i in 0..j {
                let (left, mut right) = q.view_mut().split_at(Axis(1), j);
                let qi = left.column(i);
                let mut qj = right.column_mut(0);
                let proj = qi.dot(&qj);
                qj.scaled_add(-proj, &qi);
            }
            let mut col = q.column_mut(j);
            let nrm = col.dot(&col).sqrt();
            if nrm > 1e-300 {
                col /= nrm;
            } else {
                col.fill(0.0);
                col[j % n] = 1.0;
            }
        }
    }
}

/// `A x` for a dense matrix, summing each row in index order.
pub fn matvec(a: &Array2<f64>, x: &Array1<f64>) -> Array1<f64> {
    a.outer_iter()
        .map(|row| row.iter().zip(x.iter()).fold(0.0, |acc, (r, v)| acc + r * v))
        .collect()
}
