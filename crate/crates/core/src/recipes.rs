//! End-to-end pipelines shared by the CLI and the acceptance suite.
//!
//! Every recipe is a pure function of its config (seeds included), so
//! repeated runs produce identical reports and files.

use std::io::Write;
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use serde::Serialize;

use crate::analysis::{
    confusion_report, density_keep, kmeans, mean_std, pearson, quadratic_fit_r2, sign_cluster, ConfusionReport,
    QuadraticFit,
};
use crate::dataset::{subsample_indices, write_atomic, LabeledPointCloud, PointCloud};
use crate::diffusion::{
    anisotropic_normalize, apply_discrete_generator, embed, spectral_decompose, write_eigenvalues, write_embedding,
    MarkovEnsemble, SpectralDecomposition,
};
use crate::error::{Error, Result};
use crate::kernel::{density_estimate, gaussian_kernel_matrix, DensityEstimate, KernelParams};
use crate::oracles::{backward_generator_reference, ou_spectrum, tensor_spectrum, OUParams, TestFunction};
use crate::potentials::PotentialSpec;
use crate::sampler::{gaussian_direct_sample, langevin_sample, SamplerConfig};

/// Kernel, density, normalization and top-`k` decomposition in one go.
pub struct Pipeline {
    pub density: DensityEstimate,
    pub ensemble: MarkovEnsemble,
    pub decomposition: SpectralDecomposition,
}

pub fn run_pipeline(cloud: &PointCloud, epsilon: f64, alpha: f64, k: usize) -> Result<Pipeline> {
    let km = gaussian_kernel_matrix(cloud, &KernelParams::new(epsilon))?;
    let density = density_estimate(&km);
    let ensemble = anisotropic_normalize(&km, &density, alpha)?;
    drop(km);
    let decomposition = spectral_decompose(&ensemble, k)?;
    Ok(Pipeline {
        density,
        ensemble,
        decomposition,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)
    })
}

// ---------------------------------------------------------------- oracle-ou

#[derive(Clone, Debug)]
pub struct OracleOuConfig {
    pub n: usize,
    pub tau: f64,
    pub epsilon: f64,
    pub kmax: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleOuReport {
    pub n: usize,
    pub tau: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub seed: u64,
    /// Indexed from `λ_0`.
    pub computed: Vec<f64>,
    pub analytic: Vec<f64>,
    pub rel_errors: Vec<f64>,
}

/// Direct Gaussian samples of `N(0, τ)`, α = 0, compared with
/// `λ_k = (τ/(τ+ε))^k`.
pub fn oracle_ou(cfg: &OracleOuConfig) -> Result<OracleOuReport> {
    let p = OUParams::new(cfg.tau, cfg.epsilon)?;
    if cfg.kmax == 0 {
        return Err(Error::invalid("kmax must be >= 1"));
    }
    let cloud = gaussian_direct_sample(&[cfg.tau], cfg.n, cfg.seed)?;
    let pipe = run_pipeline(&cloud, cfg.epsilon, 0.0, cfg.kmax)?;
    let analytic = ou_spectrum(p, cfg.kmax);
    let computed = pipe.decomposition.lambdas.clone();
    let rel_errors = computed.iter().zip(&analytic).map(|(c, a)| (c - a).abs() / a.abs()).collect();
    Ok(OracleOuReport {
        n: cfg.n,
        tau: cfg.tau,
        epsilon: cfg.epsilon,
        alpha: 0.0,
        seed: cfg.seed,
        computed,
        analytic,
        rel_errors,
    })
}

// ---------------------------------------------------------- generator-check

#[derive(Clone, Debug)]
pub struct GeneratorCheckConfig {
    pub potential: PotentialSpec,
    pub alpha: f64,
    pub epsilon: f64,
    pub n: usize,
    pub testfn: TestFunction,
    pub seed: u64,
    /// Points with density below this quantile are excluded.
    pub density_quantile: f64,
}

impl GeneratorCheckConfig {
    pub fn new(potential: PotentialSpec, alpha: f64, epsilon: f64, n: usize, testfn: TestFunction, seed: u64) -> Self {
        GeneratorCheckConfig {
            potential,
            alpha,
            epsilon,
            n,
            testfn,
            seed,
            density_quantile: 0.2,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeneratorCheckReport {
    pub potential: String,
    pub alpha: f64,
    pub epsilon: f64,
    pub n: usize,
    pub testfn: String,
    pub seed: u64,
    pub density_quantile: f64,
    pub n_used: usize,
    /// Median |discrete − continuum| over the kept points.
    pub median_abs_dev: f64,
}

/// Equilibrium samples: exact for parabolic potentials, Langevin otherwise.
pub fn equilibrium_samples(spec: &PotentialSpec, n: usize, seed: u64) -> Result<PointCloud> {
    if let Some(taus) = spec.gaussian_variances() {
        return gaussian_direct_sample(taus, n, seed);
    }
    langevin_sample(spec, &default_sampler(spec, n, seed))
}

/// Langevin settings used by the recipes: `dt = 0.01`, `thin = 10`,
/// start in a deep well, triple well confined to its reference box.
pub fn default_sampler(spec: &PotentialSpec, n: usize, seed: u64) -> SamplerConfig {
    let mut x0 = vec![0.0; spec.dim()];
    if spec.name() == "triplewell2d" {
        x0[0] = -1.0;
    }
    let cfg = SamplerConfig::new(x0, n, seed);
    if spec.name() == "triplewell2d" {
        cfg.with_bounds(spec.reference_box())
    } else {
        cfg
    }
}

pub fn generator_check(cfg: &GeneratorCheckConfig) -> Result<GeneratorCheckReport> {
    if !(0.0..1.0).contains(&cfg.density_quantile) {
        return Err(Error::invalid("density quantile must be in [0, 1)"));
    }
    let cloud = equilibrium_samples(&cfg.potential, cfg.n, cfg.seed)?;
    let km = gaussian_kernel_matrix(&cloud, &KernelParams::new(cfg.epsilon))?;
    let density = density_estimate(&km);
    let ens = anisotropic_normalize(&km, &density, cfg.alpha)?;
    drop(km);
    let f: Array1<f64> = (0..cloud.len())
        .map(|i| crate::oracles::SmoothFunction::value(&cfg.testfn, cloud.point(i).as_slice().expect("row-major")))
        .collect();
    let g = apply_discrete_generator(&ens, f.view(), cfg.epsilon)?;
    drop(ens);
    let keep = density_keep(&density, cfg.density_quantile);
    let mut dev = Vec::with_capacity(keep.len());
    for &i in &keep {
        let x = cloud.point(i).to_vec();
        let target = backward_generator_reference(&cfg.potential, cfg.alpha, &cfg.testfn, &x)?;
        dev.push((g[i] - target).abs());
    }
    Ok(GeneratorCheckReport {
        potential: cfg.potential.to_string(),
        alpha: cfg.alpha,
        epsilon: cfg.epsilon,
        n: cfg.n,
        testfn: cfg.testfn.name().into(),
        seed: cfg.seed,
        density_quantile: cfg.density_quantile,
        n_used: keep.len(),
        median_abs_dev: median(&mut dev),
    })
}

pub fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

// -------------------------------------------------------------- reproduce

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recipe {
    FigHarmonic,
    FigDoublewell,
    FigTriplewell,
    Iris,
}

impl Recipe {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fig-harmonic" => Ok(Recipe::FigHarmonic),
            "fig-doublewell" => Ok(Recipe::FigDoublewell),
            "fig-triplewell" => Ok(Recipe::FigTriplewell),
            "iris" => Ok(Recipe::Iris),
            _ => Err(Error::invalid(format!(
                "unknown recipe '{s}' (fig-harmonic|fig-doublewell|fig-triplewell|iris)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Recipe::FigHarmonic => "fig-harmonic",
            Recipe::FigDoublewell => "fig-doublewell",
            Recipe::FigTriplewell => "fig-triplewell",
            Recipe::Iris => "iris",
        }
    }
}

/// Files written by a recipe, relative to its output directory.
#[derive(Clone, Debug, Serialize)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
}

fn save_pipeline(dir: &Path, cloud: &PointCloud, pipe: &Pipeline, files: &mut Vec<PathBuf>) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let pts = dir.join("points.csv");
    cloud.save(&pts, None)?;
    let eig = dir.join("eigenvalues.csv");
    write_eigenvalues(&eig, &pipe.decomposition.lambdas)?;
    let emb = dir.join("embedding.csv");
    write_embedding(&emb, &embed(&pipe.decomposition, 0))?;
    files.extend([pts, eig, emb]);
    Ok(())
}

pub const HARMONIC_TAUS: [f64; 2] = [1.0, 1.0 / 25.0];
pub const HARMONIC_N: usize = 3500;
pub const HARMONIC_EPSILON: f64 = 0.25;
pub const HARMONIC_SEED: u64 = 3;

#[derive(Clone, Debug, Serialize)]
pub struct HarmonicReport {
    pub n: usize,
    pub taus: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    pub lambdas: Vec<f64>,
    /// Tensor-product spectrum of the α = 0 chain, for reference.
    pub tensor_reference_alpha0: Vec<f64>,
    pub trim: f64,
    /// `|corr(ψ_1, x_1)|` over the trimmed points.
    pub abs_corr_psi1_x1: f64,
    pub parabola_fit: QuadraticFit,
}

/// Anisotropic Gaussian `τ = (1, 1/25)`: ψ_1 tracks the slow coordinate and
/// ψ_2 is a parabola in ψ_1.
pub fn fig_harmonic(out_dir: Option<&Path>) -> Result<(HarmonicReport, Outputs)> {
    let (alpha, trim) = (0.5, 0.05);
    let cloud = gaussian_direct_sample(&HARMONIC_TAUS, HARMONIC_N, HARMONIC_SEED)?;
    let pipe = run_pipeline(&cloud, HARMONIC_EPSILON, alpha, 4)?;
    let dec = &pipe.decomposition;
    let keep = density_keep(&pipe.density, trim);
    let psi1: Vec<f64> = dec.psi.column(1).to_vec();
    let psi2: Vec<f64> = dec.psi.column(2).to_vec();
    let x1 = cloud.coordinate(0);
    let a: Vec<f64> = keep.iter().map(|&i| psi1[i]).collect();
    let b: Vec<f64> = keep.iter().map(|&i| x1[i]).collect();
    let corr = pearson(&a, &b).abs();
    let fit = quadratic_fit_r2(&psi1, &psi2, trim, &pipe.density)?;
    let tensor = tensor_spectrum(&HARMONIC_TAUS, HARMONIC_EPSILON, 4)?
        .into_iter()
        .map(|(v, _)| v)
        .collect();
    let report = HarmonicReport {
        n: HARMONIC_N,
        taus: HARMONIC_TAUS.to_vec(),
        epsilon: HARMONIC_EPSILON,
        alpha,
        lambdas: dec.lambdas.clone(),
        tensor_reference_alpha0: tensor,
        trim,
        abs_corr_psi1_x1: corr,
        parabola_fit: fit,
    };
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        save_pipeline(dir, &cloud, &pipe, &mut files)?;
        let r = dir.join("report.json");
        write_json(&r, &report)?;
        files.push(r);
    }
    Ok((report, Outputs { files }))
}

pub const DOUBLEWELL_RUN: usize = 40_000;
pub const DOUBLEWELL_N: usize = 1200;
pub const DOUBLEWELL_EPSILON: f64 = 0.25;
pub const DOUBLEWELL_SEED: u64 = 1;
/// Saddle of the double well along `x`.
pub const DOUBLEWELL_BARRIER: f64 = 2.25;

#[derive(Clone, Debug, Serialize)]
pub struct DoublewellReport {
    pub run_length: usize,
    pub n: usize,
    pub epsilon: f64,
    pub alpha: f64,
    pub lambdas: Vec<f64>,
    pub n_left: usize,
    pub n_right: usize,
    /// Points with `|x − 2.25| > 0.5`.
    pub n_far: usize,
    /// Fraction of far points whose ψ_1 sign matches their side.
    pub sign_agreement: f64,
    pub psi1_left_mean: f64,
    pub psi1_right_mean: f64,
    /// Largest within-well ψ_1 standard deviation over the inter-well gap.
    pub spread_over_gap: f64,
}

pub fn fig_doublewell(out_dir: Option<&Path>) -> Result<(DoublewellReport, Outputs)> {
    let alpha = 0.5;
    let spec = PotentialSpec::doublewell2d();
    let run = langevin_sample(&spec, &default_sampler(&spec, DOUBLEWELL_RUN, DOUBLEWELL_SEED))?;
    let cloud = run.select(&subsample_indices(run.len(), DOUBLEWELL_N, DOUBLEWELL_SEED + 1));
    let pipe = run_pipeline(&cloud, DOUBLEWELL_EPSILON, alpha, 4)?;
    let dec = &pipe.decomposition;
    let psi1: Vec<f64> = dec.psi.column(1).to_vec();
    let x = cloud.coordinate(0);

    let far: Vec<usize> = (0..x.len()).filter(|&i| (x[i] - DOUBLEWELL_BARRIER).abs() > 0.5).collect();
    let side: Vec<usize> = far.iter().map(|&i| usize::from(x[i] < DOUBLEWELL_BARRIER)).collect();
    let signs: Vec<usize> = sign_cluster(&far.iter().map(|&i| psi1[i]).collect::<Vec<_>>());
    let cr = confusion_report(&signs, &side)?;
    let agreement = 1.0 - cr.errors as f64 / far.len().max(1) as f64;

    let left: Vec<f64> = far.iter().filter(|&&i| x[i] < DOUBLEWELL_BARRIER).map(|&i| psi1[i]).collect();
    let right: Vec<f64> = far.iter().filter(|&&i| x[i] >= DOUBLEWELL_BARRIER).map(|&i| psi1[i]).collect();
    let (ml, sl) = mean_std(&left);
    let (mr, sr) = mean_std(&right);
    let report = DoublewellReport {
        run_length: DOUBLEWELL_RUN,
        n: DOUBLEWELL_N,
        epsilon: DOUBLEWELL_EPSILON,
        alpha,
        lambdas: dec.lambdas.clone(),
        n_left: x.iter().filter(|v| **v < DOUBLEWELL_BARRIER).count(),
        n_right: x.iter().filter(|v| **v >= DOUBLEWELL_BARRIER).count(),
        n_far: far.len(),
        sign_agreement: agreement,
        psi1_left_mean: ml,
        psi1_right_mean: mr,
        spread_over_gap: sl.max(sr) / (ml - mr).abs(),
    };
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        save_pipeline(dir, &cloud, &pipe, &mut files)?;
        let r = dir.join("report.json");
        write_json(&r, &report)?;
        files.push(r);
    }
    Ok((report, Outputs { files }))
}

pub const TRIPLEWELL_RUN: usize = 80_000;
pub const TRIPLEWELL_N: usize = 1400;
pub const TRIPLEWELL_BETA: f64 = 2.0;
pub const TRIPLEWELL_EPSILON: f64 = 0.25;
pub const TRIPLEWELL_SEED: u64 = 2;

#[derive(Clone, Debug, Serialize)]
pub struct TriplewellReport {
    pub run_length: usize,
    pub n: usize,
    pub beta: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub lambdas: Vec<f64>,
    pub wells: Vec<Vec<f64>>,
    pub well_counts: Vec<usize>,
    pub kmeans_inertia: f64,
    /// Fraction of points whose k-means cluster matches their nearest well.
    pub purity: f64,
    pub confusion: ConfusionReport,
}

pub fn fig_triplewell(out_dir: Option<&Path>) -> Result<(TriplewellReport, Outputs)> {
    let alpha = 0.5;
    let spec = PotentialSpec::triplewell2d(TRIPLEWELL_BETA)?;
    let run = langevin_sample(&spec, &default_sampler(&spec, TRIPLEWELL_RUN, TRIPLEWELL_SEED))?;
    let cloud = run.select(&subsample_indices(run.len(), TRIPLEWELL_N, TRIPLEWELL_SEED + 1));
    let pipe = run_pipeline(&cloud, TRIPLEWELL_EPSILON, alpha, 3)?;
    let dec = &pipe.decomposition;

    let search = spec.locate_minima(&[vec![-1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.5]], 1e-8)?;
    if search.minima.len() != 3 {
        return Err(Error::DegenerateCloud(format!(
            "expected three wells, found {}",
            search.minima.len()
        )));
    }
    let wells = search.minima;
    let truth: Vec<usize> = (0..cloud.len())
        .map(|i| {
            let p = cloud.point(i);
            (0..3)
                .min_by(|&a, &b| {
                    let da: f64 = p.iter().zip(&wells[a]).map(|(x, w)| (x - w).powi(2)).sum();
                    let db: f64 = p.iter().zip(&wells[b]).map(|(x, w)| (x - w).powi(2)).sum();
                    da.total_cmp(&db)
                })
                .expect("three wells")
        })
        .collect();
    let coords: Array2<f64> = dec.psi.slice(ndarray::s![.., 1..3]).to_owned();
    let km = kmeans(&coords, 3, TRIPLEWELL_SEED)?;
    let cr = confusion_report(&km.labels, &truth)?;
    let mut well_counts = vec![0; 3];
    for &t in &truth {
        well_counts[t] += 1;
    }
    let report = TriplewellReport {
        run_length: TRIPLEWELL_RUN,
        n: TRIPLEWELL_N,
        beta: TRIPLEWELL_BETA,
        epsilon: TRIPLEWELL_EPSILON,
        alpha,
        lambdas: dec.lambdas.clone(),
        wells,
        well_counts,
        kmeans_inertia: km.inertia,
        purity: 1.0 - cr.errors as f64 / cloud.len() as f64,
        confusion: cr,
    };
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        save_pipeline(dir, &cloud, &pipe, &mut files)?;
        let r = dir.join("report.json");
        write_json(&r, &report)?;
        files.push(r);
    }
    Ok((report, Outputs { files }))
}

/// Kernel widths swept for iris, on min–max scaled features.
pub const IRIS_EPSILONS: [f64; 5] = [0.03, 0.05, 0.1, 0.2, 0.4];
pub const IRIS_ALPHA: f64 = 0.0;

#[derive(Clone, Debug, Serialize)]
pub struct IrisSweepEntry {
    pub epsilon: f64,
    /// First class alone in one ψ_1 sign cluster.
    pub class0_separated: bool,
    pub all_classes_lambdas: Vec<f64>,
    /// Second vs third class, rerun on those points only.
    pub pair_errors: usize,
    pub pair_lambdas: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IrisReport {
    pub n: usize,
    pub class_names: Vec<String>,
    pub alpha: f64,
    pub scaling: String,
    pub sweep: Vec<IrisSweepEntry>,
    pub min_pair_errors: usize,
    pub max_pair_errors: usize,
}

/// Scales each column to `[0, 1]`; constant columns become 0.
pub fn min_max_scale(cloud: &PointCloud) -> Result<PointCloud> {
    let mut p = cloud.points().clone();
    for mut col in p.columns_mut() {
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = hi - lo;
        col.mapv_inplace(|v| if span > 0.0 { (v - lo) / span } else { 0.0 });
    }
    PointCloud::new(p)
}

pub fn iris(data: &LabeledPointCloud, epsilons: &[f64], out_dir: Option<&Path>) -> Result<(IrisReport, Outputs)> {
    let labels = data
        .labels
        .as_ref()
        .ok_or_else(|| Error::invalid("iris recipe needs a labeled CSV"))?;
    if data.label_names.len() != 3 {
        return Err(Error::invalid(format!(
            "iris recipe needs exactly 3 classes, found {}",
            data.label_names.len()
        )));
    }
    let all = min_max_scale(&data.cloud)?;
    let pair_idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] != 0).collect();
    let pair = min_max_scale(&data.cloud.select(&pair_idx))?;
    let pair_truth: Vec<usize> = pair_idx.iter().map(|&i| labels[i]).collect();

    let mut sweep = Vec::new();
    for &eps in epsilons {
        let full = run_pipeline(&all, eps, IRIS_ALPHA, 2)?;
        let s = sign_cluster(&full.decomposition.psi.column(1).to_vec());
        let c0: Vec<usize> = (0..s.len()).filter(|&i| labels[i] == 0).map(|i| s[i]).collect();
        let separated = c0.iter().all(|&v| v == c0[0])
            && (0..s.len()).filter(|&i| labels[i] != 0).all(|i| s[i] != c0[0]);

        let sub = run_pipeline(&pair, eps, IRIS_ALPHA, 2)?;
        let ps = sign_cluster(&sub.decomposition.psi.column(1).to_vec());
        let cr = confusion_report(&ps, &pair_truth)?;
        sweep.push(IrisSweepEntry {
            epsilon: eps,
            class0_separated: separated,
            all_classes_lambdas: full.decomposition.lambdas.clone(),
            pair_errors: cr.errors,
            pair_lambdas: sub.decomposition.lambdas.clone(),
        });
    }
    let report = IrisReport {
        n: data.cloud.len(),
        class_names: data.label_names.clone(),
        alpha: IRIS_ALPHA,
        scaling: "min-max".into(),
        min_pair_errors: sweep.iter().map(|e| e.pair_errors).min().unwrap_or(0),
        max_pair_errors: sweep.iter().map(|e| e.pair_errors).max().unwrap_or(0),
        sweep,
    };
    let mut files = Vec::new();
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let r = dir.join("report.json");
        write_json(&r, &report)?;
        files.push(r);
    }
    Ok((report, Outputs { files }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn min_max_scaling() {
        let c = PointCloud::from_rows(&[vec![1.0, 5.0], vec![3.0, 5.0], vec![2.0, 5.0]]).unwrap();
        let s = min_max_scale(&c).unwrap();
        assert_eq!(s.coordinate(0), vec![0.0, 1.0, 0.5]);
        assert_eq!(s.coordinate(1), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn small_oracle_ou_run() {
        let r = oracle_ou(&OracleOuConfig {
            n: 4000,
            tau: 1.0,
            epsilon: 0.2,
            kmax: 3,
            seed: 1,
        })
        .unwrap();
        assert_eq!(r.computed.len(), 3);
        assert!((r.computed[0] - 1.0).abs() < 1e-10);
        assert!(r.rel_errors[1] < 0.1);
    }

    #[test]
    fn recipe_names_roundtrip() {
        for r in [Recipe::FigHarmonic, Recipe::FigDoublewell, Recipe::FigTriplewell, Recipe::Iris] {
            assert_eq!(Recipe::parse(r.name()).unwrap(), r);
        }
        assert!(Recipe::parse("fig-nothing").is_err());
    }
}
