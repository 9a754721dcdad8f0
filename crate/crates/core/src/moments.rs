//! Closed-form Gaussian moments of scalar activations.
//!
//! For `X ~ N(µ, ν)` and a bivariate normal pair `(X₁, X₂)`:
//! * `m` is `E σ(X)`,
//! * `k` is `Cov(σ(X₁), σ(X₂))`,
//! * `l` is `Cov(σ(X₁), X₂) = ν₁₂ E σ′(X₁)` (Stein's lemma).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::special::{
    bvn_cdf, bvn_cdf_delta, bvn_cdf_partial_h, bvn_pdf, clamp_rho, norm_cdf, norm_pdf, owens_t,
};

/// Variances below this are treated as deterministic by the ReLU covariance.
const RELU_DEGENERATE: f64 = 1e-12;
/// Relative Cauchy–Schwarz margin applied to `ν₁₂`.
const CS_MARGIN: f64 = 1e-12;

/// Supported activation functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    /// `2Φ(x) − 1`
    Probit,
    /// `xΦ(x)`
    Gelu,
    /// `max(x, 0)`
    Relu,
    /// `1{x ≥ 0}`
    Heaviside,
    /// `sin x`
    Sine,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 5] = [
        ActivationKind::Probit,
        ActivationKind::Gelu,
        ActivationKind::Relu,
        ActivationKind::Heaviside,
        ActivationKind::Sine,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Probit => "probit",
            ActivationKind::Gelu => "gelu",
            ActivationKind::Relu => "relu",
            ActivationKind::Heaviside => "heaviside",
            ActivationKind::Sine => "sine",
        }
    }

    pub fn is_smooth(self) -> bool {
        matches!(self, ActivationKind::Probit | ActivationKind::Gelu | ActivationKind::Sine)
    }

    pub fn eval(self, x: f64) -> f64 {
        match self {
            ActivationKind::Probit => 2.0 * norm_cdf(x) - 1.0,
            ActivationKind::Gelu => x * norm_cdf(x),
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Heaviside => {
                if x >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Sine => x.sin(),
        }
    }

    /// Derivative used by linearisation; kinks take the value 0.
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            ActivationKind::Probit => 2.0 * norm_pdf(x),
            ActivationKind::Gelu => norm_cdf(x) + x * norm_pdf(x),
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Heaviside => 0.0,
            ActivationKind::Sine => x.cos(),
        }
    }

    /// `sup |σ′|`; infinite for the step function.
    ///
    /// Regenerate the GeLU constants with `scripts/gen_tables.py activation`.
    pub fn sup_derivative(self) -> f64 {
        match self {
            ActivationKind::Probit => 0.797_884_560_802_865_4,
            ActivationKind::Gelu => 1.128_904_145_185_154_8,
            ActivationKind::Relu => 1.0,
            ActivationKind::Heaviside => f64::INFINITY,
            ActivationKind::Sine => 1.0,
        }
    }

    /// `sup |σ″|`; infinite for activations with a kink or jump.
    pub fn sup_second_derivative(self) -> f64 {
        match self {
            ActivationKind::Probit => 0.483_941_449_038_286_7,
            ActivationKind::Gelu => 0.797_884_560_802_865_4,
            ActivationKind::Relu | ActivationKind::Heaviside => f64::INFINITY,
            ActivationKind::Sine => 1.0,
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ActivationKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown activation '{s}'"))
    }
}

/// Mean and variance of a univariate normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniMoment {
    pub mu: f64,
    pub nu: f64,
}

impl UniMoment {
    /// Negative variances (rounding noise) are clipped to zero.
    pub fn new(mu: f64, nu: f64) -> Self {
        Self { mu, nu: nu.max(0.0) }
    }
}

/// Means, variances and covariance of a bivariate normal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BiMoment {
    pub mu1: f64,
    pub mu2: f64,
    pub nu11: f64,
    pub nu22: f64,
    pub nu12: f64,
}

impl BiMoment {
    /// Clips variances at zero and projects `nu12` inside the Cauchy–Schwarz
    /// bound `|ν₁₂| ≤ (1 − 1e-12)√(ν₁₁ν₂₂)`.
    pub fn new(mu1: f64, mu2: f64, nu11: f64, nu22: f64, nu12: f64) -> Self {
        let nu11 = nu11.max(0.0);
        let nu22 = nu22.max(0.0);
        let bound = (nu11 * nu22).sqrt() * (1.0 - CS_MARGIN);
        Self { mu1, mu2, nu11, nu22, nu12: nu12.clamp(-bound, bound) }
    }

    pub fn swapped(self) -> Self {
        Self { mu1: self.mu2, mu2: self.mu1, nu11: self.nu22, nu22: self.nu11, nu12: self.nu12 }
    }
}

/// `E σ(X)` for `X ~ N(µ, ν)`.
pub fn m(kind: ActivationKind, u: UniMoment) -> f64 {
    let UniMoment { mu, nu } = u;
    match kind {
        ActivationKind::Probit => 2.0 * norm_cdf(mu / (1.0 + nu).sqrt()) - 1.0,
        ActivationKind::Gelu => {
            let s = (1.0 + nu).sqrt();
            nu / s * norm_pdf(mu / s) + mu * norm_cdf(mu / s)
        }
        ActivationKind::Relu => {
            if nu == 0.0 {
                return mu.max(0.0);
            }
            let sd = nu.sqrt();
            sd * norm_pdf(mu / sd) + mu * norm_cdf(mu / sd)
        }
        ActivationKind::Heaviside => {
            if nu == 0.0 {
                return ActivationKind::Heaviside.eval(mu);
            }
            norm_cdf(mu / nu.sqrt())
        }
        ActivationKind::Sine => (-0.5 * nu).exp() * mu.sin(),
    }
}

/// `Cov(σ(X₁), σ(X₂))`.
pub fn k(kind: ActivationKind, b: BiMoment) -> f64 {
    let BiMoment { mu1, mu2, nu11, nu22, nu12 } = b;
    if nu12 == 0.0 {
        return 0.0;
    }
    match kind {
        ActivationKind::Probit => 4.0 * phi_k(mu1, mu2, nu11, nu22, nu12),
        ActivationKind::Gelu => gelu_k(mu1, mu2, nu11, nu22, nu12),
        ActivationKind::Relu => relu_k(mu1, mu2, nu11, nu22, nu12),
        ActivationKind::Heaviside => {
            if nu11 == 0.0 || nu22 == 0.0 {
                return 0.0;
            }
            let (s1, s2) = (nu11.sqrt(), nu22.sqrt());
            bvn_cdf_delta(mu1 / s1, mu2 / s2, clamp_rho(nu12 / (s1 * s2)))
        }
        ActivationKind::Sine => sine_k(mu1, mu2, nu11, nu22, nu12),
    }
}

/// `Var σ(X)`, the diagonal of [`k`] at perfect correlation, evaluated
/// without the correlation clamp.
pub fn variance(kind: ActivationKind, u: UniMoment) -> f64 {
    let UniMoment { mu, nu } = u;
    if nu == 0.0 {
        return 0.0;
    }
    let v = match kind {
        ActivationKind::Probit => 4.0 * phi_k(mu, mu, nu, nu, nu),
        ActivationKind::Gelu => gelu_k(mu, mu, nu, nu, nu),
        ActivationKind::Relu => {
            if nu < RELU_DEGENERATE {
                return 0.0;
            }
            let sd = nu.sqrt();
            let h = mu / sd;
            let mean = m(kind, u);
            (mu * mu + nu) * norm_cdf(h) + mu * sd * norm_pdf(h) - mean * mean
        }
        ActivationKind::Heaviside => {
            let h = mu / nu.sqrt();
            norm_cdf(h) * norm_cdf(-h)
        }
        ActivationKind::Sine => sine_k(mu, mu, nu, nu, nu),
    };
    v.max(0.0)
}

/// `E σ′(X)`, so that `l(kind, b) = b.nu12 · l_factor(kind, (b.mu1, b.nu11))`.
pub fn l_factor(kind: ActivationKind, u: UniMoment) -> f64 {
    let UniMoment { mu, nu } = u;
    match kind {
        ActivationKind::Probit => {
            let s = (1.0 + nu).sqrt();
            2.0 * norm_pdf(mu / s) / s
        }
        ActivationKind::Gelu => {
            let s2 = 1.0 + nu;
            let s = s2.sqrt();
            mu / (s2 * s) * norm_pdf(mu / s) + norm_cdf(mu / s)
        }
        ActivationKind::Relu => {
            if nu == 0.0 {
                return ActivationKind::Relu.derivative(mu);
            }
            norm_cdf(mu / nu.sqrt())
        }
        ActivationKind::Heaviside => {
            if nu == 0.0 {
                return 0.0;
            }
            let sd = nu.sqrt();
            norm_pdf(mu / sd) / sd
        }
        ActivationKind::Sine => (-0.5 * nu).exp() * mu.cos(),
    }
}

/// `Cov(σ(X₁), X₂)`; exactly linear in `nu12`.
pub fn l(kind: ActivationKind, b: BiMoment) -> f64 {
    b.nu12 * l_factor(kind, UniMoment::new(b.mu1, b.nu11))
}

/// `λ⁻¹ m(GeLU, (λµ, λ²ν))`, which tends to the ReLU mean as `λ → ∞`.
pub fn relu_via_gelu_limit(u: UniMoment, lambda: f64) -> f64 {
    m(ActivationKind::Gelu, UniMoment::new(lambda * u.mu, lambda * lambda * u.nu)) / lambda
}

/// Extra variance `4 E Φ(ξ)(1 − Φ(ξ))`, `ξ ~ N(µ, ν)`, of a ±1 neuron that
/// fires with probability `Φ(ξ)`. Uses `E Φ(ξ)(1 − Φ(ξ)) = 2T(µ/√(1+ν), 1/√(1+2ν))`.
pub fn stochastic_variance_boost(u: UniMoment) -> f64 {
    let UniMoment { mu, nu } = u;
    if mu.is_infinite() {
        return 0.0;
    }
    8.0 * owens_t(mu / (1.0 + nu).sqrt(), 1.0 / (1.0 + 2.0 * nu).sqrt())
}

/// Covariance of `Φ(X₁)` and `Φ(X₂)`.
fn phi_k(mu1: f64, mu2: f64, nu11: f64, nu22: f64, nu12: f64) -> f64 {
    let (s1, s2) = ((1.0 + nu11).sqrt(), (1.0 + nu22).sqrt());
    bvn_cdf_delta(mu1 / s1, mu2 / s2, clamp_rho(nu12 / (s1 * s2)))
}

fn gelu_k(mu1: f64, mu2: f64, nu11: f64, nu22: f64, nu12: f64) -> f64 {
    let s1 = 1.0 + nu11;
    let s2 = 1.0 + nu22;
    let (r1, r2) = (s1.sqrt(), s2.sqrt());
    let h = mu1 / r1;
    let kk = mu2 / r2;
    let r = clamp_rho(nu12 / (r1 * r2));
    let t1 = (mu1 * nu12 + mu2 * nu11 - mu1 * nu12 * nu11 / s1) / r1 * bvn_cdf_partial_h(h, kk, r);
    let t2 = (mu2 * nu12 + mu1 * nu22 - mu2 * nu12 * nu22 / s2) / r2 * bvn_cdf_partial_h(kk, h, r);
    let t3 = (nu11 * nu22 + nu12 * nu12 * (1.0 - nu11 / s1 - nu22 / s2)) / (r1 * r2) * bvn_pdf(h, kk, r);
    let t4 = (mu1 * mu2 + nu12) * bvn_cdf(h, kk, r);
    let m1 = m(ActivationKind::Gelu, UniMoment::new(mu1, nu11));
    let m2 = m(ActivationKind::Gelu, UniMoment::new(mu2, nu22));
    t1 + t2 + t3 + t4 - m1 * m2
}

fn relu_k(mu1: f64, mu2: f64, nu11: f64, nu22: f64, nu12: f64) -> f64 {
    if nu11 < RELU_DEGENERATE || nu22 < RELU_DEGENERATE {
        return 0.0;
    }
    let (sd1, sd2) = (nu11.sqrt(), nu22.sqrt());
    let sd12 = sd1 * sd2;
    let h = mu1 / sd1;
    let kk = mu2 / sd2;
    let r = clamp_rho(nu12 / sd12);
    let m1 = m(ActivationKind::Relu, UniMoment::new(mu1, nu11));
    let m2 = m(ActivationKind::Relu, UniMoment::new(mu2, nu22));
    mu2 * sd1 * bvn_cdf_partial_h(h, kk, r)
        + mu1 * sd2 * bvn_cdf_partial_h(kk, h, r)
        + (sd12 - nu12 * nu12 / sd12) * bvn_pdf(h, kk, r)
        + (mu1 * mu2 + nu12) * bvn_cdf(h, kk, r)
        - m1 * m2
}

fn sine_k(mu1: f64, mu2: f64, nu11: f64, nu22: f64, nu12: f64) -> f64 {
    let e = (-0.5 * (nu11 + nu22)).exp();
    0.5 * e * (nu12.exp_m1() * (mu1 - mu2).cos() - (-nu12).exp_m1() * (mu1 + mu2).cos())
}
