//! Per-layer Lipschitz and non-normality bounds chained into a Wasserstein
//! error bound for analytic propagation.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::gaussian::{sandwich, symmetric_eigen, Gaussian};
use crate::network::{LayerParams, Network};
use crate::propagation::propagate_analytic;

const POWER_TOL: f64 = 1e-8;
const POWER_MAX_ITER: usize = 10_000;

/// Bounds attached to one layer.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerBound {
    pub lipschitz: f64,
    pub nonnormality: f64,
    pub cumulative: f64,
    /// Set when the outgoing covariance was singular.
    pub singular: bool,
}

/// Largest singular value by power iteration on `MᵀM`.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let gram = if m.nrows() < m.ncols() { m * m.transpose() } else { m.transpose() * m };
    let n = gram.nrows();
    // A deterministic start with components along every axis.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + (i as f64 * 0.618_033_988_749_895).fract());
    v.normalize_mut();
    let mut lambda = 0.0;
    for _ in 0..POWER_MAX_ITER {
        let w = &gram * &v;
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w / next;
        if (next - lambda).abs() <= POWER_TOL * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

fn mul_zero_safe(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

/// `‖σ′‖∞ ‖A‖ + ‖C‖`.
pub fn lipschitz_bound(layer: &LayerParams) -> f64 {
    let a = spectral_norm(&layer.a);
    mul_zero_safe(layer.kind.sup_derivative(), a) + spectral_norm(&layer.c)
}

/// `(3/√2) √d ‖σ″‖∞ ‖σ′‖∞ ‖Σ_out⁻¹‖ ‖Σ_out‖^{1/2} ‖A Σ_in Aᵀ‖^{3/2}`.
///
/// Returns `(bound, singular)`; a singular outgoing covariance gives `+∞`.
pub fn nonnormality_bound(layer: &LayerParams, incoming: &Gaussian, outgoing: &Gaussian) -> (f64, bool) {
    let pre = spectral_norm(&sandwich(&layer.a, incoming.cov()));
    if pre == 0.0 {
        return (0.0, false);
    }
    let (values, _) = symmetric_eigen(outgoing.cov());
    let lo = values.min();
    let hi = values.max();
    let d = layer.output_dim() as f64;
    let smooth = layer.kind.sup_second_derivative() * layer.kind.sup_derivative();
    let base = 3.0 / std::f64::consts::SQRT_2 * d.sqrt() * smooth * hi.max(0.0).sqrt() * pre.powf(1.5);
    if lo <= 0.0 {
        return (f64::INFINITY, true);
    }
    (base / lo, false)
}

/// Chains `cumulative_k = L_k · cumulative_{k−1} + N_k` from `cumulative_0 = 0`.
pub fn error_recursion(net: &Network, input: &Gaussian) -> Result<Vec<LayerBound>> {
    let outputs = propagate_analytic(net, input)?;
    let mut incoming = input;
    let mut cumulative = 0.0;
    let mut bounds = Vec::with_capacity(outputs.len());
    for (layer, out) in net.layers().iter().zip(&outputs) {
        let lipschitz = lipschitz_bound(layer);
        let (nonnormality, singular) = nonnormality_bound(layer, incoming, out);
        cumulative = mul_zero_safe(lipschitz, cumulative) + nonnormality;
        bounds.push(LayerBound { lipschitz, nonnormality, cumulative, singular });
        incoming = out;
    }
    Ok(bounds)
}
