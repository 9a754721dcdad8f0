//! Univariate and bivariate standard normal functions and Owen's T.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::quadrature::{GAUSS_LEGENDRE_10, GAUSS_LEGENDRE_31};

/// Largest correlation magnitude used wherever `√(1 − ρ²)` appears.
pub const RHO_LIMIT: f64 = 1.0 - 1e-12;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const TWO_PI: f64 = 2.0 * PI;

/// Correlation above which the bivariate cdf switches to the
/// high-correlation expansion.
const MODERATE_RHO: f64 = 0.6;
const HIGH_RHO: f64 = 0.925;

/// Arguments of a bivariate standard normal evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BivariateArgs {
    pub h: f64,
    pub k: f64,
    pub rho: f64,
}

impl BivariateArgs {
    /// Builds the argument triple with `rho` clamped to `±RHO_LIMIT`.
    pub fn new(h: f64, k: f64, rho: f64) -> Self {
        Self { h, k, rho: clamp_rho(rho) }
    }
}

pub fn clamp_rho(rho: f64) -> f64 {
    rho.clamp(-RHO_LIMIT, RHO_LIMIT)
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal cdf.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal quantile: Acklam's rational approximation followed by one
/// Newton step against [`norm_cdf`]. Returns `±∞` at 0 and 1 and NaN outside.
pub fn norm_quantile(p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    // Work in the lower tail so that the Newton residual keeps relative accuracy.
    let (q, sign) = if p > 0.5 { (1.0 - p, -1.0) } else { (p, 1.0) };
    let mut x = acklam(q);
    x -= (norm_cdf(x) - q) / norm_pdf(x);
    sign * x
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// `Φ₂(h, k; ρ) − Φ(h)Φ(k)`.
///
/// Integrates `∂Φ₂/∂ρ` after the substitution `ρ = sin θ` with 10 Gauss–Legendre
/// nodes for `|ρ| ≤ 0.6` and 31 up to `0.925`; beyond that, Genz's expansion
/// of the complementary integral.
pub fn bvn_cdf_delta(h: f64, k: f64, rho: f64) -> f64 {
    if rho == 0.0 || !h.is_finite() || !k.is_finite() {
        return 0.0;
    }
    let rho = rho.clamp(-1.0, 1.0);
    if rho.abs() <= HIGH_RHO {
        arcsine_quadrature(h, k, rho)
    } else {
        genz_high_rho(h, k, rho) - norm_cdf(h) * norm_cdf(k)
    }
}

/// Bivariate standard normal cdf `P[Z₁ ≤ h, Z₂ ≤ k]` with correlation `rho`.
pub fn bvn_cdf(h: f64, k: f64, rho: f64) -> f64 {
    if h == f64::NEG_INFINITY || k == f64::NEG_INFINITY {
        return 0.0;
    }
    if h == f64::INFINITY {
        return norm_cdf(k);
    }
    if k == f64::INFINITY {
        return norm_cdf(h);
    }
    let rho = rho.clamp(-1.0, 1.0);
    let (a, b) = (norm_cdf(h), norm_cdf(k));
    let p = if rho.abs() <= HIGH_RHO {
        a * b + arcsine_quadrature(h, k, rho)
    } else {
        genz_high_rho(h, k, rho)
    };
    // Fréchet bounds; the lower one can round above the upper when a or b ≈ 1.
    let upper = a.min(b);
    p.clamp((a + b - 1.0).clamp(0.0, upper), upper)
}

/// `∂Φ₂/∂h = φ(h) Φ((k − ρh)/√(1 − ρ²))`.
pub fn bvn_cdf_partial_h(h: f64, k: f64, rho: f64) -> f64 {
    let rho = clamp_rho(rho);
    norm_pdf(h) * norm_cdf((k - rho * h) / (1.0 - rho * rho).sqrt())
}

/// Bivariate standard normal density.
pub fn bvn_pdf(h: f64, k: f64, rho: f64) -> f64 {
    let rho = clamp_rho(rho);
    let s = 1.0 - rho * rho;
    (-(h * h + k * k - 2.0 * rho * h * k) / (2.0 * s)).exp() / (TWO_PI * s.sqrt())
}

fn arcsine_quadrature(h: f64, k: f64, rho: f64) -> f64 {
    let rule: &[(f64, f64)] = if rho.abs() <= MODERATE_RHO { &GAUSS_LEGENDRE_10 } else { &GAUSS_LEGENDRE_31 };
    let half = 0.5 * rho.asin();
    let hh = h * h + k * k;
    let hk = 2.0 * h * k;
    let mut sum = 0.0;
    for &(x, w) in rule {
        let theta = half * (x + 1.0);
        let (s, c) = theta.sin_cos();
        sum += w * (-(hh - hk * s) / (2.0 * c * c)).exp();
    }
    sum * half / TWO_PI
}

/// Genz's high-correlation branch of BVND, returning `P[Z₁ ≤ h, Z₂ ≤ k]`.
fn genz_high_rho(dh: f64, dk: f64, r: f64) -> f64 {
    let h = -dh;
    let mut k = -dk;
    if r < 0.0 {
        k = -k;
    }
    let hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a
                * asr.exp()
                * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * TWO_PI.sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        let half = 0.5 * a;
        for &(node, w) in GAUSS_LEGENDRE_31.iter() {
            let x = half * (node + 1.0);
            let xs = x * x;
            let rs = (1.0 - xs).sqrt();
            let asr = -0.5 * (b_s / xs + hk);
            if asr > -100.0 {
                bvn += half
                    * w
                    * asr.exp()
                    * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                        - (1.0 + c * xs * (1.0 + d * xs)));
            }
        }
        bvn = -bvn / TWO_PI;
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        -bvn + (norm_cdf(-h) - norm_cdf(-k)).max(0.0)
    }
}

/// Owen's T function `T(h, a) = ∫₀^a e^{−h²(1+x²)/2} / (2π(1+x²)) dx`.
///
/// Evaluated by 31-node Gauss–Legendre panels; `a > 1` is first reduced to
/// `1/a` through the standard reflection identity.
pub fn owens_t(h: f64, a: f64) -> f64 {
    if a == 0.0 || !h.is_finite() {
        return 0.0;
    }
    if a < 0.0 {
        return -owens_t(h, -a);
    }
    let h = h.abs();
    if a <= 1.0 {
        return owens_t_integral(h, a);
    }
    let ah = a * h;
    let (ph, pah) = (norm_cdf(h), norm_cdf(ah));
    0.5 * (ph * norm_cdf(-ah) + pah * norm_cdf(-h)) - owens_t_integral(ah, 1.0 / a)
}

fn owens_t_integral(h: f64, a: f64) -> f64 {
    let panels = 1 + (a * h).ceil() as usize;
    let width = a / panels as f64;
    let h2 = 0.5 * h * h;
    let mut sum = 0.0;
    for p in 0..panels {
        let lo = p as f64 * width;
        let mut panel = 0.0;
        for &(node, w) in GAUSS_LEGENDRE_31.iter() {
            let x = lo + 0.5 * width * (node + 1.0);
            let one_x2 = 1.0 + x * x;
            panel += w * (-h2 * one_x2).exp() / one_x2;
        }
        sum += 0.5 * width * panel;
    }
    sum / TWO_PI
}
