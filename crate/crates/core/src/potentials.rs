//! Analytic potentials `U(x)` with closed-form gradient and Laplacian.
//!
//! Equilibrium density is `p ∝ e^{-U}`. Each catalog entry has a reference
//! box used by property tests and samplers.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Flat,
    /// `Σ x_j² / (2 τ_j)`
    Parabolic { taus: Vec<f64> },
    /// `x⁴/4 − (25/12)x³ + (9/2)x² + 25y²/2`
    DoubleWell2d,
    /// Two Gaussian rows scaled by `β`; deep wells near `(±1, 0)`, shallow near `(0, 5/3)`.
    TripleWell2d { beta: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSpec {
    name: String,
    dim: usize,
    params: Vec<(String, f64)>,
    kind: Kind,
}

/// `U`, `∇U` and `ΔU` at one point.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub grad: Vec<f64>,
    pub laplacian: f64,
}

impl PotentialSpec {
    /// `U ≡ 0` in `dim` dimensions.
    pub fn flat(dim: usize) -> Self {
        PotentialSpec {
            name: "flat".into(),
            dim,
            params: vec![("dim".into(), dim as f64)],
            kind: Kind::Flat,
        }
    }

    pub fn parabolic1d(tau: f64) -> Result<Self> {
        check_positive("tau", tau)?;
        Ok(PotentialSpec {
            name: "parabolic1d".into(),
            dim: 1,
            params: vec![("tau".into(), tau)],
            kind: Kind::Parabolic { taus: vec![tau] },
        })
    }

    pub fn parabolic_nd(taus: &[f64]) -> Result<Self> {
        if taus.is_empty() {
            return Err(Error::invalid("parabolicNd needs at least one tau"));
        }
        for (j, &t) in taus.iter().enumerate() {
            check_positive(&format!("tau{}", j + 1), t)?;
        }
        Ok(PotentialSpec {
            name: "parabolicNd".into(),
            dim: taus.len(),
            params: taus
                .iter()
                .enumerate()
                .map(|(j, &t)| (format!("tau{}", j + 1), t))
                .collect(),
            kind: Kind::Parabolic {
                taus: taus.to_vec(),
            },
        })
    }

    pub fn doublewell2d() -> Self {
        PotentialSpec {
            name: "doublewell2d".into(),
            dim: 2,
            params: Vec::new(),
            kind: Kind::DoubleWell2d,
        }
    }

    pub fn triplewell2d(beta: f64) -> Result<Self> {
        check_positive("beta", beta)?;
        Ok(PotentialSpec {
            name: "triplewell2d".into(),
            dim: 2,
            params: vec![("beta".into(), beta)],
            kind: Kind::TripleWell2d { beta },
        })
    }

    /// Parses `name[:key=value,...]`, e.g. `parabolic1d:tau=1.0`,
    /// `parabolicNd:tau1=1,tau2=0.04`, `doublewell2d`, `triplewell2d:beta=2`.
    pub fn parse(text: &str) -> Result<Self> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut params = Vec::new();
        for item in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("potential parameter '{item}' is not key=value")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("potential parameter '{item}' is not numeric")))?;
            params.push((k.trim().to_string(), v));
        }
        let get = |key: &str, default: Option<f64>| -> Result<f64> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .or(default)
                .ok_or_else(|| Error::invalid(format!("potential '{name}' requires '{key}'")))
        };
        let known = |keys: &[&str]| -> Result<()> {
            match params.iter().find(|(k, _)| !keys.contains(&k.as_str())) {
                Some((k, _)) => Err(Error::invalid(format!("unknown parameter '{k}' for '{name}'"))),
                None => Ok(()),
            }
        };
        match name.trim() {
            "parabolic1d" => {
                known(&["tau"])?;
                Self::parabolic1d(get("tau", Some(1.0))?)
            }
            "parabolicNd" | "parabolicnd" => {
                let mut taus = Vec::new();
                for j in 1.. {
                    match params.iter().find(|(k, _)| *k == format!("tau{j}")) {
                        Some((_, v)) => taus.push(*v),
                        None => break,
                    }
                }
                if taus.len() != params.len() {
                    return Err(Error::invalid(
                        "parabolicNd takes tau1..taun with consecutive indices",
                    ));
                }
                Self::parabolic_nd(&taus)
            }
            "doublewell2d" => {
                known(&[])?;
                Ok(Self::doublewell2d())
            }
            "triplewell2d" => {
                known(&["beta"])?;
                Self::triplewell2d(get("beta", Some(2.0))?)
            }
            other => Err(Error::invalid(format!("unknown potential '{other}'"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    /// Per-axis `(lo, hi)` box where tests and samplers operate.
    pub fn reference_box(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            Kind::Flat => vec![(-1.0, 1.0); self.dim],
            Kind::Parabolic { taus } => taus
                .iter()
                .map(|t| (-4.0 * t.sqrt(), 4.0 * t.sqrt()))
                .collect(),
            Kind::DoubleWell2d => vec![(-2.0, 6.0), (-1.0, 1.0)],
            Kind::TripleWell2d { .. } => vec![(-2.5, 2.5), (-2.5, 2.5)],
        }
    }

    /// Variances when `e^{-U}` is Gaussian.
    pub fn gaussian_variances(&self) -> Option<&[f64]> {
        match &self.kind {
            Kind::Parabolic { taus } => Some(taus),
            _ => None,
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "potential '{}' is {}-dimensional, got a {}-vector",
                self.name,
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        self.check_dim(x)?;
        Ok(self.eval_unchecked(x))
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.evaluate(x).map(|e| e.value)
    }

    /// Gradient only; the sampler's inner loop.
    pub(crate) fn grad_into(&self, x: &[f64], g: &mut [f64]) {
        match &self.kind {
            Kind::Flat => g.fill(0.0),
            Kind::Parabolic { taus } => {
                for ((gj, xj), t) in g.iter_mut().zip(x).zip(taus) {
                    *gj = xj / t;
                }
            }
            _ => {
                let e = self.eval_unchecked(x);
                g.copy_from_slice(&e.grad);
            }
        }
    }

    fn eval_unchecked(&self, x: &[f64]) -> Evaluation {
        match &self.kind {
            Kind::Flat => Evaluation {
                value: 0.0,
                grad: vec![0.0; self.dim],
                laplacian: 0.0,
            },
            Kind::Parabolic { taus } => Evaluation {
                value: x.iter().zip(taus).map(|(v, t)| v * v / (2.0 * t)).sum(),
                grad: x.iter().zip(taus).map(|(v, t)| v / t).collect(),
                laplacian: taus.iter().map(|t| 1.0 / t).sum(),
            },
            Kind::DoubleWell2d => {
                let (px, py) = (x[0], x[1]);
                let value = px.powi(4) / 4.0 - 25.0 / 12.0 * px.powi(3)
                    + 4.5 * px * px
                    + 12.5 * py * py;
                let gx = px.powi(3) - 6.25 * px * px + 9.0 * px;
                let gy = 25.0 * py;
                let laplacian = 3.0 * px * px - 12.5 * px + 9.0 + 25.0;
                Evaluation {
                    value,
                    grad: vec![gx, gy],
                    laplacian,
                }
            }
            Kind::TripleWell2d { beta } => triple_well(*beta, x[0], x[1]),
        }
    }

    /// `|∇U|² − ΔU`, the potential of the equivalent Schrödinger operator.
    pub fn schrodinger_potential(&self, x: &[f64]) -> Result<f64> {
        let e = self.evaluate(x)?;
        Ok(e.grad.iter().map(|g| g * g).sum::<f64>() - e.laplacian)
    }

    /// Gradient descent from each start (backtracking step halving).
    /// Converged points closer than `10 * tol` are merged; starts that do
    /// not reach `|∇U| < tol` within 10⁵ steps are reported, not fatal.
    pub fn locate_minima(&self, starts: &[Vec<f64>], tol: f64) -> Result<MinimaSearch> {
        if !(tol > 0.0) {
            return Err(Error::invalid("tol must be positive"));
        }
        const MAX_STEPS: usize = 100_000;
        const STEP0: f64 = 0.1;
        let mut result = MinimaSearch::default();
        'starts: for (s, start) in starts.iter().enumerate() {
            self.check_dim(start)?;
            let mut x = start.clone();
            let mut cur = self.eval_unchecked(&x);
            for _ in 0..MAX_STEPS {
                let gnorm = norm(&cur.grad);
                if gnorm < tol {
                    if !result
                        .minima
                        .iter()
                        .any(|m| dist(m, &x) < 10.0 * tol)
                    {
                        result.minima.push(x);
                    }
                    continue 'starts;
                }
                let mut h = STEP0;
                loop {
                    let trial: Vec<f64> =
                        x.iter().zip(&cur.grad).map(|(xi, gi)| xi - h * gi).collect();
                    let next = self.eval_unchecked(&trial);
                    // Near a minimum the decrease drops below the rounding
                    // noise of U; a step within a few ulps that shrinks |∇U|
                    // still counts.
                    let slack = 8.0 * f64::EPSILON * cur.value.abs().max(1.0);
                    if next.value < cur.value
                        || (next.value <= cur.value + slack && norm(&next.grad) < gnorm)
                    {
                        x = trial;
                        cur = next;
                        break;
                    }
                    h *= 0.5;
                    if h < 1e-300 {
                        // No descent possible at this precision: accept if stationary enough.
                        break;
                    }
                }
                if h < 1e-300 {
                    break;
                }
            }
            result.failures.push(s);
        }
        Ok(result)
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ":" } else { "," })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MinimaSearch {
    pub minima: Vec<Vec<f64>>,
    /// Indices into `starts` that did not converge.
    pub failures: Vec<usize>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// `e^{-(s-c)²}` with first and second derivatives in `s`.
fn bump(s: f64, c: f64) -> (f64, f64, f64) {
    let u = s - c;
    let g = (-u * u).exp();
    (g, -2.0 * u * g, (4.0 * u * u - 2.0) * g)
}

fn triple_well(beta: f64, x: f64, y: f64) -> Evaluation {
    let (a, ax, axx) = bump(x, 0.0);
    let (b1, b1y, b1yy) = bump(y, 1.0 / 3.0);
    let (b2, b2y, b2yy) = bump(y, 5.0 / 3.0);
    let (c, cy, cyy) = bump(y, 0.0);
    let (d1, d1x, d1xx) = bump(x, 1.0);
    let (d2, d2x, d2xx) = bump(x, -1.0);

    let value = 3.0 * beta * a * (b1 - b2) - 5.0 * beta * c * (d1 + d2);
    let gx = 3.0 * beta * ax * (b1 - b2) - 5.0 * beta * c * (d1x + d2x);
    let gy = 3.0 * beta * a * (b1y - b2y) - 5.0 * beta * cy * (d1 + d2);
    let gxx = 3.0 * beta * axx * (b1 - b2) - 5.0 * beta * c * (d1xx + d2xx);
    let gyy = 3.0 * beta * a * (b1yy - b2yy) - 5.0 * beta * cyy * (d1 + d2);
    Evaluation {
        value,
        grad: vec![gx, gy],
        laplacian: gxx + gyy,
    }
}
