//! Reference computations for the momentflow test suites.
//!
//! Nothing here calls into momentflow: quadrature rules are rebuilt from the
//! Legendre recurrence, normal expectations are brute-force integrals of the
//! activation itself, and Monte Carlo errors come from pooled raw samples.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal cdf.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Gauss–Legendre rule on [-1, 1] via Golub–Welsch.
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

pub fn gauss_legendre(n: usize) -> Rule {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule { nodes: pairs.iter().map(|p| p.0).collect(), weights: pairs.iter().map(|p| p.1).collect() }
}

fn rule20() -> &'static Rule {
    static RULE: std::sync::OnceLock<Rule> = std::sync::OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let r = rule20();
    let (half, mid) = (0.5 * (b - a), 0.5 * (a + b));
    half * r.nodes.iter().zip(&r.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = fixed(f, a, m);
    let right = fixed(f, m, b);
    let diff = (left + right - whole).abs();
    if depth == 0 || diff <= tol || diff <= 1e-14 * (left.abs() + right.abs()) {
        return left + right;
    }
    let tol = (0.5 * tol).max(1e-18);
    adapt(f, a, m, left, tol, depth - 1) + adapt(f, m, b, right, tol, depth - 1)
}

/// Adaptive bisection with a 20-node Gauss–Legendre rule, split at `breaks`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![a];
    edges.extend(cuts);
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    edges
        .windows(2)
        .map(|w| adapt(&f, w[0], w[1], fixed(&f, w[0], w[1]), tol / pieces, 30))
        .sum()
}

/// Standard scores beyond this carry negligible normal mass.
pub const Z_MAX: f64 = 12.0;

/// `E f(X)` for `X ~ N(mu, nu)`, with kinks of `f` at `kinks`.
pub fn expect1<F: Fn(f64) -> f64>(f: F, mu: f64, nu: f64, kinks: &[f64]) -> f64 {
    if nu == 0.0 {
        return f(mu);
    }
    let sd = nu.sqrt();
    let zk: Vec<f64> = kinks.iter().map(|k| (k - mu) / sd).collect();
    integrate(|z| normal_pdf(z) * f(mu + sd * z), -Z_MAX, Z_MAX, &zk, 1e-13)
}

/// `E f(X₁, X₂)` for a bivariate normal. `kinks1`/`kinks2` list locations
/// where `f` is non-smooth in `x₁`/`x₂`.
#[allow(clippy::too_many_arguments)]
pub fn expect2<F: Fn(f64, f64) -> f64>(
    f: F,
    mu1: f64,
    mu2: f64,
    nu11: f64,
    nu22: f64,
    nu12: f64,
    kinks1: &[f64],
    kinks2: &[f64],
) -> f64 {
    let (s1, s2) = (nu11.sqrt(), nu22.sqrt());
    let rho = if s1 == 0.0 || s2 == 0.0 { 0.0 } else { (nu12 / (s1 * s2)).clamp(-1.0, 1.0) };
    let c = (1.0 - rho * rho).max(0.0).sqrt();
    let zk1: Vec<f64> = if s1 > 0.0 { kinks1.iter().map(|k| (k - mu1) / s1).collect() } else { vec![] };
    let outer = |z1: f64| {
        let x1 = mu1 + s1 * z1;
        let base = mu2 + s2 * rho * z1;
        if s2 * c == 0.0 {
            return normal_pdf(z1) * f(x1, base);
        }
        let zk2: Vec<f64> = kinks2.iter().map(|k| (k - base) / (s2 * c)).collect();
        let inner = integrate(|z2| normal_pdf(z2) * f(x1, base + s2 * c * z2), -Z_MAX, Z_MAX, &zk2, 1e-13);
        normal_pdf(z1) * inner
    };
    // Near-perfect correlation puts a sharp ridge where x₂ crosses its kinks.
    let mut breaks = zk1;
    if rho != 0.0 && s2 > 0.0 {
        breaks.extend(kinks2.iter().map(|k| (k - mu2) / (s2 * rho)));
    }
    integrate(outer, -Z_MAX, Z_MAX, &breaks, 1e-12)
}

/// `Cov(f(X₁), g(X₂))` by brute-force integration.
#[allow(clippy::too_many_arguments)]
pub fn covariance<F: Fn(f64) -> f64, G: Fn(f64) -> f64>(
    f: F,
    g: G,
    mu1: f64,
    mu2: f64,
    nu11: f64,
    nu22: f64,
    nu12: f64,
    kinks: &[f64],
) -> f64 {
    let ef = expect1(&f, mu1, nu11, kinks);
    let eg = expect1(&g, mu2, nu22, kinks);
    expect2(|a, b| (f(a) - ef) * (g(b) - eg), mu1, mu2, nu11, nu22, nu12, kinks, kinks)
}

/// Owen's T by direct integration of its defining integral.
pub fn owens_t(h: f64, a: f64) -> f64 {
    integrate(
        |x| (-0.5 * h * h * (1.0 + x * x)).exp() / (2.0 * std::f64::consts::PI * (1.0 + x * x)),
        0.0,
        a,
        &[],
        1e-15,
    )
}

/// `P[Z₁ ≤ h, Z₂ ≤ k]` as `∫_{−∞}^{k} φ(y) Φ((h − ρy)/√(1 − ρ²)) dy`.
pub fn bvn_cdf(h: f64, k: f64, rho: f64) -> f64 {
    let c = (1.0 - rho * rho).sqrt();
    let lo = -Z_MAX.max(k.abs() + 1.0) - 1.0;
    let hi = k.min(Z_MAX);
    if hi <= lo {
        return 0.0;
    }
    let ridge = if rho != 0.0 { vec![h / rho] } else { vec![] };
    integrate(|y| normal_pdf(y) * normal_cdf((h - rho * y) / c), lo, hi, &ridge, 1e-15)
}

/// Mean, unbiased covariance and their Monte Carlo standard errors.
pub struct PooledMoments {
    pub count: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub se_mean: DVector<f64>,
    pub se_cov: DMatrix<f64>,
}

/// Moments of the rows of `samples`, with standard errors computed as if the
/// rows were independent draws.
pub fn pooled_moments(samples: &DMatrix<f64>) -> PooledMoments {
    let (n, d) = samples.shape();
    let nf = n as f64;
    let mean = DVector::from_fn(d, |j, _| samples.column(j).sum() / nf);
    let centered: Vec<Vec<f64>> = (0..d)
        .map(|j| samples.column(j).iter().map(|v| v - mean[j]).collect())
        .collect();
    let mut cov = DMatrix::zeros(d, d);
    let mut se_cov = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let (mut s1, mut s2) = (0.0, 0.0);
            for (a, b) in centered[i].iter().zip(&centered[j]) {
                let p = a * b;
                s1 += p;
                s2 += p * p;
            }
            let mp = s1 / nf;
            let var_p = (s2 / nf - mp * mp).max(0.0);
            cov[(i, j)] = s1 / (nf - 1.0);
            cov[(j, i)] = cov[(i, j)];
            se_cov[(i, j)] = (var_p / nf).sqrt();
            se_cov[(j, i)] = se_cov[(i, j)];
        }
    }
    let se_mean = DVector::from_fn(d, |j, _| (cov[(j, j)] / nf).sqrt());
    PooledMoments { count: n, mean, cov, se_mean, se_cov }
}

/// Raw ingredients of a random residual layer and its Gaussian input.
pub struct RandomLayer {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DMatrix<f64>,
    pub d: DVector<f64>,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

fn normal_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, scale: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        scale * z
    })
}

/// Layer `R^n → R^m` with `N(0, 1/n)` weights, a nonzero skip matrix and a
/// well-conditioned random input covariance.
pub fn random_layer<R: Rng>(rng: &mut R, n: usize, m: usize) -> RandomLayer {
    let w = 1.0 / (n as f64).sqrt();
    let root = normal_matrix(rng, n, n, w);
    let cov = &root * root.transpose() + DMatrix::identity(n, n) * 0.05;
    RandomLayer {
        a: normal_matrix(rng, m, n, w),
        b: normal_matrix(rng, m, 1, 1.0).column(0).into_owned(),
        c: normal_matrix(rng, m, n, w),
        d: normal_matrix(rng, m, 1, 0.5).column(0).into_owned(),
        mean: normal_matrix(rng, n, 1, 1.0).column(0).into_owned(),
        cov: (&cov + cov.transpose()) * 0.5,
    }
}
