//! Equilibrium samples of `p ∝ e^{-U}`.
//!
//! [`langevin_sample`] integrates `dx = −∇U dt + √2 dW` with Euler–Maruyama;
//! [`gaussian_direct_sample`] draws parabolic-potential equilibria exactly.

use ndarray::Array2;
use rayon::prelude::*;

use crate::dataset::PointCloud;
use crate::error::{Error, Result};
use crate::potentials::PotentialSpec;
use crate::rng::Stream;

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    pub dt: f64,
    /// Steps discarded before the first kept sample.
    pub burn_in: usize,
    /// Keep every `thin`-th step after burn-in.
    pub thin: usize,
    pub n_keep: usize,
    pub seed: u64,
    pub x0: Vec<f64>,
    /// Axis-aligned `(lo, hi)` confinement; proposals leaving it are rejected.
    pub bounds: Option<Vec<(f64, f64)>>,
    noise_scale: f64,
}

impl SamplerConfig {
    /// Defaults: `dt = 0.01`, `thin = 10`, burn-in of `10⁴ · thin` steps.
    pub fn new(x0: Vec<f64>, n_keep: usize, seed: u64) -> Self {
        let thin = 10;
        SamplerConfig {
            dt: 0.01,
            burn_in: 10_000 * thin,
            thin,
            n_keep,
            seed,
            x0,
            bounds: None,
            noise_scale: 1.0,
        }
    }

    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    /// Multiplies the Brownian increment. Only useful for testing the drift
    /// in isolation (`0.0` gives gradient descent).
    pub fn with_noise_scale(mut self, scale: f64) -> Self {
        self.noise_scale = scale;
        self
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if self.thin == 0 {
            return Err(Error::invalid("thin must be >= 1"));
        }
        if self.n_keep == 0 {
            return Err(Error::invalid("n_keep must be >= 1"));
        }
        if self.x0.len() != dim {
            return Err(Error::invalid(format!(
                "x0 has length {}, potential is {dim}-dimensional",
                self.x0.len()
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("x0 must be finite"));
        }
        if let Some(b) = &self.bounds {
            if b.len() != dim {
                return Err(Error::invalid("bounds dimension does not match potential"));
            }
            if !inside(&self.x0, b) {
                return Err(Error::invalid("x0 lies outside the confinement box"));
            }
        }
        Ok(())
    }
}

fn inside(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.iter().zip(bounds).all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
}

pub fn langevin_sample(spec: &PotentialSpec, cfg: &SamplerConfig) -> Result<PointCloud> {
    cfg.validate(spec.dim())?;
    let d = spec.dim();
    let mut rng = Stream::new(cfg.seed);
    let sigma = (2.0 * cfg.dt).sqrt() * cfg.noise_scale;
    let mut x = cfg.x0.clone();
    let mut grad = vec![0.0; d];
    let mut proposal = vec![0.0; d];
    let mut out = Vec::with_capacity(cfg.n_keep * d);
    let total = cfg.burn_in + cfg.thin * cfg.n_keep;

    for step in 0..total {
        spec.grad_into(&x, &mut grad);
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let drift = gnorm * cfg.dt;
        if !(drift <= 10.0 * scale) {
            return Err(Error::StepSizeBlowup { step, drift });
        }
        for j in 0..d {
            proposal[j] = x[j] - grad[j] * cfg.dt + sigma * rng.standard_normal();
        }
        match &cfg.bounds {
            Some(b) if !inside(&proposal, b) => {}
            _ => x.copy_from_slice(&proposal),
        }
        if step >= cfg.burn_in && (step - cfg.burn_in + 1).is_multiple_of(cfg.thin) {
            out.extend_from_slice(&x);
        }
    }
    PointCloud::new(Array2::from_shape_vec((cfg.n_keep, d), out).expect("n_keep rows"))
}

/// Independent chains with streams `seed ^ chain`, concatenated in chain order.
pub fn langevin_sample_chains(
    spec: &PotentialSpec,
    cfg: &SamplerConfig,
    chains: usize,
) -> Result<PointCloud> {
    if chains == 0 {
        return Err(Error::invalid("need at least one chain"));
    }
    let clouds: Vec<PointCloud> = (0..chains)
        .into_par_iter()
        .map(|c| {
            let mut local = cfg.clone();
            local.seed = cfg.seed ^ c as u64;
            langevin_sample(spec, &local)
        })
        .collect::<Result<_>>()?;
    let views: Vec<_> = clouds.iter().map(|c| c.points().view()).collect();
    PointCloud::new(ndarray::concatenate(ndarray::Axis(0), &views).expect("equal widths"))
}

/// `n` i.i.d. points with independent coordinates `x_j ~ Normal(0, τ_j)`.
pub fn gaussian_direct_sample(taus: &[f64], n: usize, seed: u64) -> Result<PointCloud> {
    if taus.is_empty() || taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::invalid("all variances must be positive and finite"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    let sd: Vec<f64> = taus.iter().map(|t| t.sqrt()).collect();
    let mut rng = Stream::new(seed);
    let mut data = Vec::with_capacity(n * taus.len());
    for _ in 0..n {
        for s in &sd {
            data.push(s * rng.standard_normal());
        }
    }
    PointCloud::new(Array2::from_shape_vec((n, taus.len()), data).expect("n rows"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        (m, v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0))
    }

    #[test]
    fn noiseless_chain_stays_at_stationary_point() {
        let dw = PotentialSpec::doublewell2d();
        let cfg = SamplerConfig::new(vec![4.0, 0.0], 50, 1).with_noise_scale(0.0);
        let cloud = langevin_sample(&dw, &cfg).unwrap();
        assert!(cloud.points().iter().zip([4.0, 0.0].iter().cycle()).all(|(a, b)| a == b));
    }

    #[test]
    fn ou_equilibrium_moments() {
        let p = PotentialSpec::parabolic1d(1.0).unwrap();
        // Thin past the unit correlation time so samples are nearly independent.
        let mut cfg = SamplerConfig::new(vec![0.0], 10_000, 3);
        cfg.thin = 300;
        let cloud = langevin_sample(&p, &cfg).unwrap();
        let (m, v) = mean_var(&cloud.coordinate(0));
        assert!(m.abs() <= 0.05, "mean {m}");
        assert!((v - 1.0).abs() <= 0.05, "var {v}");
    }

    #[test]
    fn chi_square_against_gaussian_cdf() {
        // 20 equal-probability bins of N(0,1); edges are standard normal quantiles.
        const EDGES: [f64; 19] = [
            -1.6448536269514729, -1.2815515655446004, -1.0364333894937898,
            -0.8416212335729143, -0.6744897501960817, -0.5244005127080407,
            -0.38532046640756773, -0.2533471031357997, -0.12566134685507402, 0.0,
            0.12566134685507402, 0.2533471031357997, 0.38532046640756773,
            0.5244005127080407, 0.6744897501960817, 0.8416212335729143,
            1.0364333894937898, 1.2815515655446004, 1.6448536269514729,
        ];
        // 99.9% quantile of chi-square with 19 degrees of freedom.
        const CHI2_19_999: f64 = 43.82;
        let p = PotentialSpec::parabolic1d(1.0).unwrap();
        // e^{-5} lag correlation: independence holds to well under the test's resolution.
        let mut cfg = SamplerConfig::new(vec![0.0], 4_000, 17);
        cfg.thin = 500;
        let xs = langevin_sample(&p, &cfg).unwrap().coordinate(0);
        let mut counts = [0usize; 20];
        for x in &xs {
            counts[EDGES.partition_point(|e| e < x)] += 1;
        }
        let expected = xs.len() as f64 / 20.0;
        let chi2: f64 = counts
            .iter()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < CHI2_19_999, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn deterministic_output() {
        let dw = PotentialSpec::doublewell2d();
        let mut cfg = SamplerConfig::new(vec![0.0, 0.0], 500, 9);
        cfg.burn_in = 100;
        let a = langevin_sample(&dw, &cfg).unwrap();
        let b = langevin_sample(&dw, &cfg).unwrap();
        assert_eq!(a, b);
        let chained = langevin_sample_chains(&dw, &cfg, 3).unwrap();
        assert_eq!(chained.len(), 1500);
        assert_eq!(chained.select(&(0..500).collect::<Vec<_>>()), a);
    }

    #[test]
    fn double_well_visits_both_wells() {
        let dw = PotentialSpec::doublewell2d();
        let cfg = SamplerConfig::new(vec![0.0, 0.0], 40_000, 1);
        let xs = langevin_sample(&dw, &cfg).unwrap().coordinate(0);
        let right = xs.iter().filter(|&&x| x > 2.25).count();
        assert!(right > 0 && right < xs.len(), "right-well count {right}");
    }

    #[test]
    fn box_confinement_holds() {
        let tw = PotentialSpec::triplewell2d(2.0).unwrap();
        let bounds = vec![(-2.5, 2.5), (-2.5, 2.5)];
        let mut cfg = SamplerConfig::new(vec![-1.0, 0.0], 5_000, 4).with_bounds(bounds.clone());
        cfg.burn_in = 1000;
        let cloud = langevin_sample(&tw, &cfg).unwrap();
        for row in cloud.points().outer_iter() {
            assert!(inside(row.as_slice().unwrap(), &bounds));
        }
        // Tight box around x0 forces rejections; the chain must still stay inside.
        let tight = vec![(-1.05, -0.95), (-0.05, 0.05)];
        let mut cfg = SamplerConfig::new(vec![-1.0, 0.0], 200, 4).with_bounds(tight.clone());
        cfg.burn_in = 0;
        let cloud = langevin_sample(&tw, &cfg).unwrap();
        for row in cloud.points().outer_iter() {
            assert!(inside(row.as_slice().unwrap(), &tight));
        }
    }

    #[test]
    fn blowup_is_reported() {
        let dw = PotentialSpec::doublewell2d();
        let cfg = SamplerConfig::new(vec![50.0, 0.0], 10, 1);
        assert!(matches!(
            langevin_sample(&dw, &cfg),
            Err(Error::StepSizeBlowup { step: 0, .. })
        ));
    }

    #[test]
    fn config_validation() {
        let p = PotentialSpec::parabolic1d(1.0).unwrap();
        let mut cfg = SamplerConfig::new(vec![0.0], 10, 1);
        cfg.dt = 0.0;
        assert!(langevin_sample(&p, &cfg).is_err());
        let cfg = SamplerConfig::new(vec![0.0, 1.0], 10, 1);
        assert!(langevin_sample(&p, &cfg).is_err());
        let cfg = SamplerConfig::new(vec![3.0], 10, 1).with_bounds(vec![(-1.0, 1.0)]);
        assert!(langevin_sample(&p, &cfg).is_err());
    }

    #[test]
    fn direct_gaussian_variances() {
        let c = gaussian_direct_sample(&[1.0], 100_000, 1).unwrap();
        let (_, v) = mean_var(&c.coordinate(0));
        assert!((0.97..=1.03).contains(&v), "{v}");

        let c = gaussian_direct_sample(&[1.0, 0.04], 10_000, 2).unwrap();
        let (_, v0) = mean_var(&c.coordinate(0));
        let (_, v1) = mean_var(&c.coordinate(1));
        assert!((v0 - 1.0).abs() <= 0.05);
        assert!((v1 - 0.04).abs() <= 0.05 * 0.04);

        let one = gaussian_direct_sample(&[2.0, 3.0], 1, 3).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(gaussian_direct_sample(&[2.0], 10, 3).unwrap(), gaussian_direct_sample(&[2.0], 10, 3).unwrap());
        assert!(gaussian_direct_sample(&[0.0], 10, 3).is_err());
    }
}
