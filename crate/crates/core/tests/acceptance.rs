//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.
//!
//! Criteria run sequentially inside a single test: several build dense
//! matrices of a few hundred MB each.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use ndarray::{Array1, Array2};

use dmapx::analysis::coefficient_of_variation;
use dmapx::dataset::{load_points, PointCloud};
use dmapx::diffusion::{anisotropic_normalize, diffusion_distance, embed, spectral_decompose};
use dmapx::kernel::{density_estimate, gaussian_kernel_matrix, KernelParams};
use dmapx::oracles::TestFunction;
use dmapx::recipes::{self, GeneratorCheckConfig, OracleOuConfig};
use dmapx::rng::Stream;
use dmapx::PotentialSpec;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_cloud(n: usize, d: usize, seed: u64) -> PointCloud {
    let mut rng = Stream::new(seed);
    let data: Vec<f64> = (0..n * d).map(|_| rng.standard_normal()).collect();
    PointCloud::new(Array2::from_shape_vec((n, d), data).unwrap()).unwrap()
}

fn c1_ou_spectrum() -> Outcome {
    let t = Instant::now();
    let r = recipes::oracle_ou(&OracleOuConfig {
        n: 4000,
        tau: 1.0,
        epsilon: 0.2,
        kmax: 4,
        seed: 1,
    })
    .unwrap();
    let secs = t.elapsed().as_secs_f64();
    let worst = r.rel_errors[1..4].iter().cloned().fold(0.0, f64::max);
    outcome(
        worst <= 0.10 && secs < 60.0,
        format!(
            "lambda1..3 = {:.4?} vs {:.4?}, max rel err {:.4}, {:.1}s",
            &r.computed[1..4],
            &r.analytic[1..4],
            worst,
            secs
        ),
    )
}

/// Eigenvalues from the symmetric conjugate against a general
/// (nonsymmetric) Schur solver applied to the row-stochastic matrix.
fn c2_conjugation() -> Outcome {
    let mut worst_lambda = 0.0f64;
    let mut worst_imag = 0.0f64;
    let mut worst_resid = 0.0f64;
    for c in 0..20u64 {
        let n = 20 + 9 * c as usize;
        let d = 1 + (c as usize % 3);
        let cloud = random_cloud(n, d, 500 + c);
        let eps = [0.1, 0.3, 0.7, 1.5][c as usize % 4];
        let alpha = [0.0, 0.5, 1.0, 0.25, 0.75][c as usize % 5];
        let k = gaussian_kernel_matrix(&cloud, &KernelParams::new(eps)).unwrap();
        let ens = anisotropic_normalize(&k, &density_estimate(&k), alpha).unwrap();
        let dec = spectral_decompose(&ens, n).unwrap();
        let mb = ens.backward_matrix();

        let general = nalgebra::DMatrix::from_fn(n, n, |i, j| mb[[i, j]]);
        let mut ref_eigs: Vec<(f64, f64)> = general
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect();
        ref_eigs.sort_by(|a, b| b.0.total_cmp(&a.0));
        for (a, (re, im)) in ref_eigs.iter().enumerate() {
            worst_lambda = worst_lambda.max((re - dec.lambdas[a]).abs());
            worst_imag = worst_imag.max(im.abs());
        }

        let mbt = mb.t();
        for a in 0..n {
            let lam = dec.lambdas[a];
            for (vec, mat) in [(dec.psi.column(a), mb.view()), (dec.phi.column(a), mbt)] {
                let scale = vec.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let resid = (&mat.dot(&vec) - &(&vec * lam))
                    .iter()
                    .fold(0.0f64, |m, x| m.max(x.abs()))
                    / scale;
                worst_resid = worst_resid.max(resid);
            }
        }
    }
    outcome(
        worst_lambda <= 1e-10 && worst_imag <= 1e-10 && worst_resid <= 1e-8,
        format!(
            "max |lambda(M_b) - lambda(M_s)| {worst_lambda:.2e} (max imag {worst_imag:.2e}), max psi/phi residual {worst_resid:.2e}"
        ),
    )
}

fn c3_harmonic() -> Outcome {
    let (r, _) = recipes::fig_harmonic(None).unwrap();
    outcome(
        r.abs_corr_psi1_x1 >= 0.97 && r.parabola_fit.r2 >= 0.9,
        format!(
            "|corr(psi1,x1)| {:.4}, parabola R^2 {:.4} (n_used {})",
            r.abs_corr_psi1_x1, r.parabola_fit.r2, r.parabola_fit.n_used
        ),
    )
}

fn c4_doublewell() -> Outcome {
    let (r, _) = recipes::fig_doublewell(None).unwrap();
    outcome(
        r.sign_agreement >= 0.95 && r.spread_over_gap <= 0.15,
        format!(
            "sign agreement {:.4} on {} far points, spread/gap {:.4} (left {}, right {})",
            r.sign_agreement, r.n_far, r.spread_over_gap, r.n_left, r.n_right
        ),
    )
}

fn c5_triplewell() -> Outcome {
    let (r, _) = recipes::fig_triplewell(None).unwrap();
    outcome(
        r.purity >= 0.90,
        format!("k-means purity {:.4}, well counts {:?}", r.purity, r.well_counts),
    )
}

fn iris_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/iris.csv")
}

fn c6_iris() -> Outcome {
    let data = load_points(&iris_path(), true).unwrap();
    let (r, _) = recipes::iris(&data, &recipes::IRIS_EPSILONS, None).unwrap();
    let separated = r.sweep.iter().any(|e| e.class0_separated);
    let in_band = r.sweep.iter().any(|e| (4..=12).contains(&e.pair_errors));
    let covers = r.min_pair_errors <= 6 && r.max_pair_errors >= 8;
    let table: Vec<String> = r
        .sweep
        .iter()
        .map(|e| format!("eps {}: sep={} err={}", e.epsilon, e.class0_separated, e.pair_errors))
        .collect();
    outcome(
        separated && in_band && covers,
        format!(
            "pair errors range [{}, {}]; {}",
            r.min_pair_errors,
            r.max_pair_errors,
            table.join("; ")
        ),
    )
}

/// 1000 angles with density ∝ 1 + 0.9 cos θ, by rejection.
fn circle_cloud(seed: u64) -> PointCloud {
    let mut rng = Stream::new(seed);
    let mut rows = Vec::with_capacity(1000);
    while rows.len() < 1000 {
        let t = 2.0 * std::f64::consts::PI * rng.next_f64();
        let u = 1.9 * rng.next_f64();
        if u < 1.0 + 0.9 * t.cos() {
            rows.push(vec![t.cos(), t.sin()]);
        }
    }
    PointCloud::from_rows(&rows).unwrap()
}

fn c7_laplace_beltrami() -> Outcome {
    let cloud = circle_cloud(7);
    let eps = 0.04;
    let mut stats = Vec::new();
    for alpha in [1.0, 0.0] {
        let pipe = recipes::run_pipeline(&cloud, eps, alpha, 3).unwrap();
        let dec = &pipe.decomposition;
        let gap = (dec.lambdas[1] - dec.lambdas[2]).abs() / dec.lambdas[1];
        let radius: Vec<f64> = (0..cloud.len())
            .map(|i| dec.psi[[i, 1]].hypot(dec.psi[[i, 2]]))
            .collect();
        stats.push((gap, coefficient_of_variation(&radius)));
    }
    let (gap1, cov1) = stats[0];
    let (_, cov0) = stats[1];
    outcome(
        gap1 <= 0.05 && cov1 <= 0.10 && cov0 > cov1,
        format!("alpha=1: pair gap {gap1:.4}, radius CoV {cov1:.4}; alpha=0: radius CoV {cov0:.4}"),
    )
}

fn generator_mad(tau: f64, alpha: f64, eps: f64) -> f64 {
    let cfg = GeneratorCheckConfig::new(
        PotentialSpec::parabolic1d(tau).unwrap(),
        alpha,
        eps,
        8000,
        TestFunction::Sin,
        1,
    );
    recipes::generator_check(&cfg).unwrap().median_abs_dev
}

fn c8_generator() -> (Outcome, f64) {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut alpha0_fine = f64::NAN;
    for alpha in [0.0, 0.5, 1.0] {
        let coarse = generator_mad(1.0, alpha, 0.2);
        let fine = generator_mad(1.0, alpha, 0.1);
        if alpha == 0.0 {
            alpha0_fine = fine;
        }
        pass &= fine < coarse;
        parts.push(format!("alpha={alpha}: {coarse:.4} -> {fine:.4}"));
    }
    (outcome(pass, format!("MAD eps 0.2 -> 0.1: {}", parts.join("; "))), alpha0_fine)
}

fn c9_two_u(alpha0_on_u: f64) -> Outcome {
    // e^{-2U} for U = x²/2 is the parabola with τ = 1/2; α = ½ there targets Δf − 2∇f·∇U.
    let half_on_2u = generator_mad(0.5, 0.5, 0.1);
    outcome(
        half_on_2u <= 2.0 * alpha0_on_u,
        format!("alpha=1/2 on e^-2U: {half_on_2u:.4}; alpha=0 on e^-U: {alpha0_on_u:.4} (eps 0.1)"),
    )
}

fn c10_diffusion_distance() -> Outcome {
    let cloud = random_cloud(50, 2, 77);
    let k = gaussian_kernel_matrix(&cloud, &KernelParams::new(0.5)).unwrap();
    let ens = anisotropic_normalize(&k, &density_estimate(&k), 0.5).unwrap();
    let dec = spectral_decompose(&ens, 50).unwrap();
    let mb = ens.backward_matrix();
    let mut worst = 0.0f64;
    let mut pm = Array2::<f64>::eye(50);
    for m in 1..=3u32 {
        pm = pm.dot(&mb);
        let emb = embed(&dec, m);
        for i in 0..50 {
            for j in i + 1..50 {
                let brute: f64 = (0..50)
                    .map(|c| (pm[[i, c]] - pm[[j, c]]).powi(2) / ens.pi[c])
                    .sum::<f64>()
                    .sqrt();
                let diff: Array1<f64> = &emb.coords.row(i) - &emb.coords.row(j);
                let e = diff.dot(&diff).sqrt();
                let dd = diffusion_distance(&ens, &dec, i, j, m).unwrap();
                worst = worst.max((e - brute).abs()).max((dd - brute).abs());
            }
        }
    }
    outcome(worst <= 1e-8, format!("max |embedding - brute force| {worst:.2e} over all pairs, m=1..3"))
}

fn run_cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dmapx"))
        .args(args)
        .output()
        .expect("spawn dmapx")
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn c11_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let iris = iris_path();
    let iris = iris.to_str().unwrap();
    let mut checked = 0;
    let mut bad = Vec::new();
    let jobs: Vec<(&str, Vec<&str>)> = vec![
        ("fig-harmonic", vec!["reproduce", "fig-harmonic"]),
        ("fig-doublewell", vec!["reproduce", "fig-doublewell"]),
        ("fig-triplewell", vec!["reproduce", "fig-triplewell"]),
        ("iris", vec!["reproduce", "iris", "--iris", iris]),
    ];
    for (name, args) in &jobs {
        let mut runs = Vec::new();
        for rep in 0..2 {
            let dir = tmp.path().join(format!("{name}-{rep}"));
            let mut a = args.clone();
            let d = dir.to_str().unwrap().to_string();
            a.extend(["--out-dir", &d]);
            let out = run_cli(&a);
            if !out.status.success() {
                bad.push(format!("{name} exited {:?}", out.status.code()));
            }
            // stdout echoes the output directory, so only the files are compared.
            runs.push(dir_bytes(&dir));
        }
        checked += runs[0].len();
        if runs[0] != runs[1] || runs[0].is_empty() {
            bad.push(format!("{name} differs"));
        }
    }
    // Seeded single-file commands.
    let mut sample_outputs = Vec::new();
    for rep in 0..2 {
        let p = tmp.path().join(format!("sample-{rep}.csv"));
        let ps = p.to_str().unwrap();
        let out = run_cli(&[
            "sample", "--potential", "doublewell2d", "--n", "500", "--seed", "5", "--burn-in", "1000", "--out", ps,
        ]);
        if !out.status.success() {
            bad.push("sample failed".into());
        }
        sample_outputs.push(std::fs::read(&p).unwrap_or_default());
    }
    checked += 1;
    if sample_outputs[0] != sample_outputs[1] || sample_outputs[0].is_empty() {
        bad.push("sample differs".into());
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            format!("{checked} output files bit-identical across repeated runs")
        } else {
            bad.join("; ")
        },
    )
}

#[test]
fn acceptance() {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |id: u32, name: &'static str, o: Outcome| {
        println!("criterion {id:>2} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };
    record(1, "OU spectrum", c1_ou_spectrum());
    record(2, "conjugation spectrum equality", c2_conjugation());
    record(3, "harmonic slow variable and parabola", c3_harmonic());
    record(4, "double well sign split", c4_doublewell());
    record(5, "triple well triangle", c5_triplewell());
    record(6, "iris", c6_iris());
    record(7, "Laplace-Beltrami density invariance", c7_laplace_beltrami());
    let (c8, alpha0_fine) = c8_generator();
    record(8, "generator consistency", c8);
    record(9, "2U correspondence", c9_two_u(alpha0_fine));
    record(10, "diffusion distance identity", c10_diffusion_distance());
    record(11, "determinism", c11_determinism());

    let failed: Vec<String> = results
        .iter()
        .filter(|(_, _, o)| !o.pass)
        .map(|(id, name, _)| format!("{id} ({name})"))
        .collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    assert!(failed.is_empty(), "failed criteria: {}", failed.join(", "));
}
