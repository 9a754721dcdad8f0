//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so every line reaches the
//! terminal. The process fails if any check fails, except checks marked
//! `tolerated`, which encode a target the mathematics cannot meet. Those
//! still print FAIL together with the value that does hold.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use momentflow::diagnostics::error_recursion;
use momentflow::moments::{self, ActivationKind, BiMoment, UniMoment};
use momentflow::oracle::{qmc_sample_network, wasserstein_1d};
use momentflow::propagation::{
    layer_moment_match, propagate_analytic, propagate_linear, propagate_mean_field, propagate_unscented,
    SigmaPointScheme,
};
use momentflow::special::{bvn_cdf, norm_cdf, owens_t};
use momentflow::{Gaussian, LayerParams, Network};
use momentflow_testkit as oracle;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use ActivationKind::*;

const PI: f64 = std::f64::consts::PI;

struct Check {
    ok: bool,
    tolerated: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Check {
    Check { ok, tolerated: false, detail: detail.into() }
}

fn tolerated(ok: bool, detail: impl Into<String>) -> Check {
    Check { ok, tolerated: true, detail: detail.into() }
}

fn runtime(elapsed: Duration, limit_secs: u64) -> Check {
    check(
        elapsed.as_secs_f64() < limit_secs as f64,
        format!("runtime {:.1}s (limit {limit_secs}s)", elapsed.as_secs_f64()),
    )
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn kinks(kind: ActivationKind) -> Vec<f64> {
    if kind.is_smooth() {
        vec![]
    } else {
        vec![0.0]
    }
}

fn single(a: f64, b: f64, c: f64, d: f64, kind: ActivationKind) -> LayerParams {
    let m = |v: f64| DMatrix::from_element(1, 1, v);
    LayerParams::new(m(a), DVector::from_element(1, b), m(c), DVector::from_element(1, d), kind).unwrap()
}

fn variance(g: &Gaussian) -> f64 {
    g.cov()[(0, 0)]
}

fn single_layer_exactness() -> Vec<Check> {
    let start = Instant::now();
    let (n, reps) = (1usize << 16, 20u64);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checks = Vec::new();
    for kind in ActivationKind::ALL {
        let mut worst: f64 = 0.0;
        let mut entries = 0;
        let mut misses = 0;
        for _ in 0..20 {
            let (din, dout) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
            let r = oracle::random_layer(&mut rng, din, dout);
            let layer = LayerParams::new(r.a, r.b, r.c, r.d, kind).unwrap();
            let input = Gaussian::new(r.mean, r.cov).unwrap();
            let analytic = layer_moment_match(&input, &layer).unwrap();
            let net = Network::new(vec![layer]).unwrap();
            let mut all = DMatrix::zeros(n * reps as usize, dout);
            for rep in 0..reps {
                let set = qmc_sample_network(&net, &input, n, 11, rep).unwrap();
                all.view_mut((rep as usize * n, 0), (n, dout)).copy_from(&set.samples);
            }
            let pm = oracle::pooled_moments(&all);
            let mut score = |got: f64, want: f64, se: f64| {
                entries += 1;
                let z = if se > 0.0 {
                    (got - want).abs() / se
                } else if (got - want).abs() <= 1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                };
                worst = worst.max(z);
                if z > 3.0 {
                    misses += 1;
                }
            };
            for i in 0..dout {
                score(analytic.mean()[i], pm.mean[i], pm.se_mean[i]);
                for j in 0..dout {
                    score(analytic.cov()[(i, j)], pm.cov[(i, j)], pm.se_cov[(i, j)]);
                }
            }
        }
        checks.push(check(
            misses == 0,
            format!("{kind}: {entries} entries, max |error|/SE = {worst:.2}, {misses} beyond 3"),
        ));
    }
    checks.push(runtime(start.elapsed(), 120));
    checks
}

fn moment_map_oracles() -> Vec<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checks = Vec::new();
    for kind in ActivationKind::ALL {
        let tol = if kind.is_smooth() { 1e-7 } else { 1e-5 };
        let ks = kinks(kind);
        let s = |x: f64| kind.eval(x);
        let mut worst: f64 = 0.0;
        for _ in 0..500 {
            let (nu11, nu22) = (rng.gen_range(1e-3..10.0), rng.gen_range(1e-3..10.0));
            let rho: f64 = rng.gen_range(-1.0..1.0);
            let b = BiMoment::new(
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                nu11,
                nu22,
                rho * (nu11 * nu22).sqrt(),
            );
            let em = oracle::expect1(s, b.mu1, b.nu11, &ks);
            let ek = oracle::covariance(s, s, b.mu1, b.mu2, b.nu11, b.nu22, b.nu12, &ks);
            let el = oracle::covariance(s, |x| x, b.mu1, b.mu2, b.nu11, b.nu22, b.nu12, &ks);
            worst = worst
                .max((moments::m(kind, UniMoment::new(b.mu1, b.nu11)) - em).abs())
                .max((moments::k(kind, b) - ek).abs())
                .max((moments::l(kind, b) - el).abs());
        }
        checks.push(check(worst <= tol, format!("{kind}: max error {worst:.1e} (tol {tol:.0e})")));
    }
    checks.push(runtime(start.elapsed(), 60));
    checks
}

fn sine_network() -> Network {
    Network::load(&fixtures().join("sine.json")).unwrap()
}

/// `Var sin(X)` for `X ~ N(0, σ²)` against the stated closed form.
fn sine_variance_checks(analytic: impl Fn(f64) -> f64) -> Vec<Check> {
    let mut checks = Vec::new();
    for s2 in [0.5, 1.0, 4.0] {
        let got = analytic(s2);
        let stated = (1.0 - (-s2).exp()) / 2.0;
        let quadrature = oracle::expect1(|x: f64| x.sin().powi(2), 0.0, s2, &[]);
        checks.push(tolerated(
            (got - stated).abs() <= 1e-12,
            format!(
                "Var sin X at σ²={s2}: analytic {got:.12}, (1−e^(−σ²))/2 = {stated:.12}; \
                 quadrature gives {quadrature:.12} = (1−e^(−2σ²))/2"
            ),
        ));
        checks.push(check(
            (got - quadrature).abs() <= 1e-12,
            format!("Var sin X at σ²={s2}: analytic matches quadrature to {:.1e}", (got - quadrature).abs()),
        ));
    }
    checks
}

fn closed_form_fixtures() -> Vec<Check> {
    let net = sine_network();
    let mut checks = sine_variance_checks(|s2| {
        variance(&propagate_analytic(&net, &Gaussian::univariate(0.0, s2)).unwrap()[0])
    });
    let mut worst: f64 = 0.0;
    for rho in [-0.9, -0.5, 0.0, 0.5, 0.9] {
        worst = worst.max((bvn_cdf(0.0, 0.0, rho) - (0.25 + rho.asin() / (2.0 * PI))).abs());
    }
    checks.push(check(worst <= 1e-10, format!("Φ₂(0,0;ρ) arcsine law: max error {worst:.1e}")));

    let mut worst: f64 = 0.0;
    for h in [0.0, 0.5, 1.0, 2.0, 3.0] {
        let p = norm_cdf(h);
        worst = worst.max(owens_t(h, 0.0).abs());
        worst = worst.max((owens_t(h, 1.0) - 0.5 * p * (1.0 - p)).abs());
        for a in [0.25, 0.5, 1.0, 2.0, 4.0] {
            let pa = norm_cdf(a * h);
            let pair = owens_t(h, a) + owens_t(a * h, 1.0 / a);
            worst = worst.max((pair - (0.5 * p + 0.5 * pa - p * pa)).abs());
            worst = worst.max((owens_t(-h, a) - owens_t(h, a)).abs());
            worst = worst.max((owens_t(h, -a) + owens_t(h, a)).abs());
            worst = worst.max((owens_t(0.0, a) - a.atan() / (2.0 * PI)).abs());
            worst = worst.max((owens_t(h, a) - oracle::owens_t(h, a)).abs());
        }
    }
    checks.push(check(worst <= 1e-9, format!("Owen's T identities: max error {worst:.1e}")));
    checks
}

fn limit_consistency() -> Vec<Check> {
    let mus = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let nus = [0.1, 0.5, 1.0, 2.0, 4.0];
    let (mut relu, mut step): (f64, f64) = (0.0, 0.0);
    for &mu in &mus {
        for &nu in &nus {
            let u = UniMoment::new(mu, nu);
            relu = relu.max((moments::relu_via_gelu_limit(u, 1e3) - moments::m(Relu, u)).abs());
            let lambda = 1e4;
            let scaled = UniMoment::new(lambda * mu, lambda * lambda * nu);
            // Φ = (1 + probit)/2 for the odd probit 2Φ − 1.
            let phi = 0.5 * (1.0 + moments::m(Probit, scaled));
            step = step.max((phi - moments::m(Heaviside, u)).abs());
        }
    }
    vec![
        check(relu <= 1e-3, format!("GeLU→ReLU at λ=1e3: max gap {relu:.1e}")),
        check(step <= 1e-6, format!("Φ→Heaviside at λ=1e4: max gap {step:.1e}")),
    ]
}

fn adversarial_fixtures() -> Vec<Check> {
    let net = sine_network();
    let mut checks = Vec::new();
    let mut previous = 0.0;
    for s2 in [0.5, 1.0, 4.0] {
        let lin = variance(&propagate_linear(&net, &Gaussian::univariate(0.0, s2)).unwrap());
        checks.push(check(
            (lin - s2).abs() <= 1e-12 && lin > previous,
            format!("linearised sin at σ²={s2}: variance {lin}"),
        ));
        previous = lin;
    }
    checks.extend(sine_variance_checks(|s2| {
        variance(&propagate_analytic(&net, &Gaussian::univariate(0.0, s2)).unwrap()[0])
    }));

    let m = 100;
    let averaging = Network::new(vec![
        LayerParams::affine(DMatrix::from_element(m, 1, 1.0), DVector::zeros(m), Relu).unwrap(),
        LayerParams::affine(DMatrix::from_element(1, m, 1.0 / m as f64), DVector::zeros(1), Relu).unwrap(),
    ])
    .unwrap();
    let input = Gaussian::standard(1);
    let mf = variance(&propagate_mean_field(&averaging, &input).unwrap());
    let ana = variance(propagate_analytic(&averaging, &input).unwrap().last().unwrap());
    checks.push(check(
        (mf - 1.0 / m as f64).abs() <= 1e-12 && (ana - 1.0).abs() <= 1e-12,
        format!("averaging network m={m}: mean-field {mf}, analytic {ana}"),
    ));

    for (name, scheme) in [("unscented95", SigmaPointScheme::u95()), ("unscented02", SigmaPointScheme::u02())] {
        let (spread, _, _) = scheme.weights(1);
        let aligned = Network::new(vec![single(PI / spread, 0.0, 0.0, 0.0, Sine)]).unwrap();
        let v = variance(&propagate_unscented(&aligned, &input, &scheme).unwrap());
        let truth = variance(&propagate_analytic(&aligned, &input).unwrap()[0]);
        checks.push(check(
            v.abs() <= 1e-20,
            format!("{name} on sin(πx/{spread:.3e}): variance {v:.1e} (exact {truth:.4})"),
        ));
    }

    let alpha = 10.0;
    let step = Network::new(vec![
        single(1.0, 0.0, 0.0, 0.0, Heaviside),
        single(2.0, -3.0, 0.0, 0.0, Heaviside),
        LayerParams::affine(DMatrix::from_element(1, 1, alpha), DVector::zeros(1), Heaviside).unwrap(),
    ])
    .unwrap();
    let samples = qmc_sample_network(&step, &input, 1 << 12, 3, 0).unwrap();
    let ana = variance(propagate_analytic(&step, &input).unwrap().last().unwrap());
    checks.push(check(
        samples.samples.iter().all(|&y| y == 0.0) && ana > 0.0,
        format!("step counterexample α={alpha}: samples identically 0, analytic variance {ana:.4}"),
    ));
    checks
}

struct EnsembleRun {
    dir: tempfile::TempDir,
    elapsed: Duration,
    failures: Vec<String>,
}

fn run_cli(args: &[&str], threads: Option<&str>) -> std::process::Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_momentflow"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("MOMENTFLOW_THREADS", t);
    }
    cmd.output().expect("run momentflow")
}

fn run_ensembles() -> EnsembleRun {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    for arch in ["wide", "deep"] {
        for act in ["probit", "gelu", "relu", "heaviside", "sine"] {
            for residual in [false, true] {
                let name = format!("{arch}-{act}{}.csv", if residual { "-residual" } else { "" });
                let out = dir.path().join(&name);
                let mut args = vec![
                    "--command", "benchmark", "--architecture", arch, "--activation", act,
                    "--variance", "large", "--samples", "16384", "--replicates", "5", "--seed", "7",
                    "--out", out.to_str().unwrap(),
                ];
                if residual {
                    args.push("--residual");
                }
                let o = run_cli(&args, None);
                if !o.status.success() {
                    failures.push(format!("{name}: {}", String::from_utf8_lossy(&o.stderr).trim()));
                }
            }
        }
    }
    EnsembleRun { dir, elapsed: start.elapsed(), failures }
}

fn read_table(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn benchmark_ordering(run: &EnsembleRun) -> Vec<Check> {
    let mut checks = vec![check(run.failures.is_empty(), format!("20 ensembles ran, {} failures {:?}", run.failures.len(), run.failures))];
    let summary = run.dir.path().join("summary.out");
    let o = run_cli(
        &["--command", "compare", "--reports", run.dir.path().to_str().unwrap(), "--out", summary.to_str().unwrap()],
        None,
    );
    if !o.status.success() {
        checks.push(check(false, format!("compare failed: {}", String::from_utf8_lossy(&o.stderr))));
        return checks;
    }
    let median = |method: &str| -> f64 {
        let rows = read_table(&summary);
        let row = rows.iter().find(|r| r[0] == method).expect("method present");
        row[4].parse().unwrap()
    };
    let ana = median("analytic");
    for other in ["mean-field", "unscented95", "linear", "unscented02"] {
        let v = median(other);
        checks.push(check(ana < v, format!("median KL(Y₁‖·): analytic {ana:.3e} < {other} {v:.3e}")));
    }
    let lin = median("linear") / ana;
    let u02 = median("unscented02") / ana;
    checks.push(check(lin >= 10.0, format!("linear/analytic = {lin:.0}")));
    checks.push(check(u02 >= 100.0, format!("unscented02/analytic = {u02:.0}")));
    checks.push(runtime(run.elapsed, 900));
    checks
}

fn heaviside_linear_row(run: &EnsembleRun) -> Vec<Check> {
    let mut checks = Vec::new();
    for arch in ["wide", "deep"] {
        for suffix in ["", "-residual"] {
            let name = format!("{arch}-heaviside{suffix}.csv");
            let rows = read_table(&run.dir.path().join(&name));
            let linear = rows.iter().find(|r| r[0] == "linear").map(|r| r[5].clone()).unwrap_or_default();
            checks.push(check(linear == "inf", format!("{name}: linear kl_y1_to_m = {linear}")));
        }
    }
    checks
}

fn stochastic_boost() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let draws = 1 << 20;
    let mut checks = Vec::new();
    for _ in 0..10 {
        let (mu, nu): (f64, f64) = (rng.gen_range(-3.0..3.0), rng.gen_range(0.01..5.0));
        let sd = nu.sqrt();
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let z: f64 = StandardNormal.sample(&mut rng);
            let p = oracle::normal_cdf(mu + sd * z);
            let f = p * (1.0 - p);
            s1 += f;
            s2 += f * f;
        }
        let n = draws as f64;
        let mean = s1 / n;
        let se = ((s2 / n - mean * mean) / n).sqrt();
        let got = moments::stochastic_variance_boost(UniMoment::new(mu, nu)) / 4.0;
        let z = (got - mean).abs() / se;
        checks.push(check(z <= 3.0, format!("µ={mu:.3}, ν={nu:.3}: {got:.6} vs MC {mean:.6} ({z:.2} SE)")));
    }
    checks
}

fn diagnostics_bound() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checks = Vec::new();
    for i in 0..10 {
        let kind = [Probit, Gelu, Sine][i % 3];
        let first = oracle::random_layer(&mut rng, 2, 4);
        let second = oracle::random_layer(&mut rng, 4, 4);
        let head = DMatrix::from_fn(1, 4, |_, _| rng.gen_range(-1.0..1.0));
        let input = Gaussian::new(first.mean.clone(), first.cov.clone()).unwrap();
        let net = Network::new(vec![
            LayerParams::new(first.a, first.b, first.c, first.d, kind).unwrap(),
            LayerParams::new(second.a, second.b, second.c, second.d, kind).unwrap(),
            LayerParams::affine(head, DVector::zeros(1), kind).unwrap(),
        ])
        .unwrap();
        let analytic = propagate_analytic(&net, &input).unwrap().pop().unwrap();
        let set = qmc_sample_network(&net, &input, 1 << 16, 12, 0).unwrap();
        let dw = wasserstein_1d(&analytic, &set.sorted_column(0)).unwrap();
        let bound = error_recursion(&net, &input).unwrap().last().unwrap().cumulative;
        checks.push(check(dw <= bound, format!("{kind} fixture {i}: d_W {dw:.3e} ≤ bound {bound:.3e}")));
    }
    checks
}

fn determinism() -> Vec<Check> {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name).to_str().unwrap().to_string();
    let net = fixtures().join("two_layer_gelu.json");
    let net = net.to_str().unwrap();
    let reports = dir.path().join("reports");
    std::fs::create_dir(&reports).unwrap();
    let rep = |name: &str| reports.join(name).to_str().unwrap().to_string();
    let mut checks = Vec::new();

    let runs: Vec<(&str, Vec<String>, Vec<String>)> = vec![
        (
            "propagate json",
            vec!["--command", "propagate", "--network", net, "--input-mean", "0.5,-1", "--input-cov", "1,0.2;0.2,0.5"]
                .into_iter().map(String::from).collect(),
            vec![p("prop.json")],
        ),
        (
            "propagate csv",
            vec!["--command", "propagate", "--network", net, "--format", "csv"].into_iter().map(String::from).collect(),
            vec![p("prop.csv")],
        ),
        (
            "benchmark csv + bounds + histogram",
            vec!["--command", "benchmark", "--architecture", "deep", "--activation", "sine", "--residual",
                 "--variance", "medium", "--samples", "4096", "--replicates", "3", "--seed", "5"]
                .into_iter().map(String::from)
                .chain(["--bounds".into(), p("bounds.csv"), "--histogram".into(), p("hist.csv")])
                .collect(),
            vec![rep("a.csv"), p("bounds.csv"), p("hist.csv")],
        ),
        (
            "benchmark json",
            vec!["--command", "benchmark", "--network", net, "--samples", "4096", "--replicates", "4", "--seed", "5",
                 "--format", "json"].into_iter().map(String::from).collect(),
            vec![p("bench.json")],
        ),
    ];
    for (label, args, outputs) in runs {
        let mut snapshots = Vec::new();
        for threads in ["1", "2"] {
            let mut full = args.clone();
            full.push("--out".into());
            full.push(outputs[0].clone());
            let refs: Vec<&str> = full.iter().map(String::as_str).collect();
            let o = run_cli(&refs, Some(threads));
            if !o.status.success() {
                snapshots.push(None);
                continue;
            }
            snapshots.push(Some(outputs.iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>()));
        }
        let same = snapshots[0].is_some() && snapshots[0] == snapshots[1];
        checks.push(check(same, format!("{label}: identical across reruns (1 and 2 threads)")));
    }

    let o = run_cli(
        &["--command", "benchmark", "--network", net, "--samples", "4096", "--replicates", "2", "--seed", "6",
          "--out", &rep("b.csv")],
        None,
    );
    assert!(o.status.success());
    let mut outputs = Vec::new();
    for _ in 0..2 {
        let o = run_cli(&["--command", "compare", "--reports", reports.to_str().unwrap(), "--out", &p("cmp.csv")], None);
        outputs.push(o.status.success().then(|| std::fs::read(p("cmp.csv")).unwrap()));
    }
    checks.push(check(outputs[0].is_some() && outputs[0] == outputs[1], "compare: identical across reruns"));
    checks
}

fn main() {
    let mut all_ok = true;
    let mut report = |id: usize, title: &str, f: &mut dyn FnMut() -> Vec<Check>| {
        let start = Instant::now();
        let checks = f();
        let passed = checks.iter().all(|c| c.ok);
        all_ok &= checks.iter().all(|c| c.ok || c.tolerated);
        println!(
            "{} [{id}] {title} ({:.1}s)",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for c in &checks {
            let mark = match (c.ok, c.tolerated) {
                (true, _) => "ok  ",
                (false, false) => "FAIL",
                (false, true) => "FAIL (unattainable)",
            };
            println!("    {mark} {}", c.detail);
        }
    };

    report(1, "single-layer exactness vs QMC, 5 activations × 20 layers, 2^16 × 20", &mut single_layer_exactness);
    report(2, "M/K/L against quadrature oracles, 500 draws per activation", &mut moment_map_oracles);
    report(3, "closed-form fixtures: sine variance, arcsine law, Owen's T", &mut closed_form_fixtures);
    report(4, "limit consistency GeLU→ReLU and probit→Heaviside", &mut limit_consistency);
    report(5, "adversarial fixtures", &mut adversarial_fixtures);
    let ensembles = run_ensembles();
    report(6, "benchmark ordering on 20 large-variance ensembles, 2^14 × 5", &mut || benchmark_ordering(&ensembles));
    report(7, "linear propagation on step ensembles gives infinite KL", &mut || heaviside_linear_row(&ensembles));
    report(8, "stochastic variance boost vs Monte Carlo", &mut stochastic_boost);
    report(9, "Wasserstein error within the layer recursion bound", &mut diagnostics_bound);
    report(10, "CLI determinism", &mut determinism);

    if !all_ok {
        std::process::exit(1);
    }
}
