//! Gaussian propagators: analytic moment matching and the mean-field,
//! linearised and unscented baselines.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{cholesky_with_jitter, psd_repair, sandwich, symmetrize, Gaussian};
use crate::moments::{self, BiMoment, UniMoment};
use crate::network::{LayerParams, Network};

/// Moment matches `g(X) = σ(AX + b) + CX + d` for `X ~ g`.
///
/// With `µ = Aµ_X + b`, `ν = AΣAᵀ`, `τ = CΣCᵀ` and `κ = AΣCᵀ`, the output has
/// mean `M(µᵢ; νᵢᵢ) + (Cµ_X)ᵢ + dᵢ` and covariance
/// `K(µᵢ, µⱼ; νᵢᵢ, νⱼⱼ, νᵢⱼ) + κᵢⱼ E σ′(Xᵢ) + κⱼᵢ E σ′(Xⱼ) + τᵢⱼ`.
pub fn layer_moment_match(g: &Gaussian, layer: &LayerParams) -> Result<Gaussian> {
    moment_match(g, layer, false)
}

fn moment_match(g: &Gaussian, layer: &LayerParams, diagonal_only: bool) -> Result<Gaussian> {
    if g.dim() != layer.input_dim() {
        return Err(Error::Dimension(format!(
            "expected input dim {}, found {}",
            layer.input_dim(),
            g.dim()
        )));
    }
    let kind = layer.kind;
    let sigma = g.cov();
    let mu = &layer.a * g.mean() + &layer.b;
    let nu = sandwich(&layer.a, sigma);
    let skip = layer.has_skip();
    let (tau, kappa) = if skip {
        (sandwich(&layer.c, sigma), &layer.a * sigma * layer.c.transpose())
    } else {
        (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
    };
    let m = mu.len();

    let uni: Vec<UniMoment> = (0..m).map(|i| UniMoment::new(mu[i], nu[(i, i)])).collect();
    let mut mean = DVector::from_iterator(m, uni.iter().map(|&u| moments::m(kind, u)));
    mean += &layer.c * g.mean() + &layer.d;
    let slope: Vec<f64> = uni.iter().map(|&u| moments::l_factor(kind, u)).collect();

    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let end = if diagonal_only { i + 1 } else { m };
            (i..end)
                .map(|j| {
                    let mut v = if i == j {
                        moments::variance(kind, uni[i])
                    } else {
                        moments::k(
                            kind,
                            BiMoment::new(mu[i], mu[j], nu[(i, i)], nu[(j, j)], nu[(i, j)]),
                        )
                    };
                    if skip {
                        v += slope[i] * kappa[(i, j)] + slope[j] * kappa[(j, i)] + tau[(i, j)];
                    }
                    v
                })
                .collect()
        })
        .collect();

    let mut cov = DMatrix::zeros(m, m);
    for (i, row) in rows.into_iter().enumerate() {
        for (offset, v) in row.into_iter().enumerate() {
            cov[(i, i + offset)] = v;
            cov[(i + offset, i)] = v;
        }
    }
    Gaussian::new(mean, repaired(cov))
}

/// Symmetrises and, unless the matrix already factorises, clips negative
/// eigenvalues.
fn repaired(cov: DMatrix<f64>) -> DMatrix<f64> {
    let cov = symmetrize(cov);
    if nalgebra::Cholesky::new(cov.clone()).is_some() {
        cov
    } else {
        psd_repair(&cov)
    }
}

/// Analytic moment matching, returning the Gaussian after every layer.
pub fn propagate_analytic(net: &Network, input: &Gaussian) -> Result<Vec<Gaussian>> {
    let mut out = Vec::with_capacity(net.layers().len());
    let mut g = input.clone();
    for (i, layer) in net.layers().iter().enumerate() {
        g = layer_moment_match(&g, layer).map_err(|e| at_layer(i, e))?;
        out.push(g.clone());
    }
    Ok(out)
}

/// Moment matching that discards cross-neuron covariance after every layer.
pub fn propagate_mean_field(net: &Network, input: &Gaussian) -> Result<Gaussian> {
    let mut g = input.clone();
    for (i, layer) in net.layers().iter().enumerate() {
        g = moment_match(&g, layer, true).map_err(|e| at_layer(i, e))?.diagonalized();
    }
    Ok(g)
}

/// First-order Taylor expansion of the whole network at the input mean.
pub fn propagate_linear(net: &Network, input: &Gaussian) -> Result<Gaussian> {
    if input.dim() != net.input_dim() {
        return Err(at_layer(
            0,
            Error::Dimension(format!("expected input dim {}, found {}", net.input_dim(), input.dim())),
        ));
    }
    let mut x = input.mean().clone();
    let mut jac = DMatrix::<f64>::identity(x.len(), x.len());
    for layer in net.layers() {
        let z = &layer.a * &x + &layer.b;
        let mut local = layer.a.clone();
        for (i, mut row) in local.row_iter_mut().enumerate() {
            row *= layer.kind.derivative(z[i]);
        }
        local += &layer.c;
        jac = local * jac;
        x = layer.eval(&x);
    }
    Gaussian::new(x, repaired(sandwich(&jac, input.cov())))
}

/// Which unscented construction to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaVariant {
    /// Symmetric `2n + 1` points with weight `κ/(n + κ)` at the mean.
    U95,
    /// Scaled points with separate mean and covariance weights at the centre.
    U02,
}

/// Sigma-point rule parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaPointScheme {
    pub variant: SigmaVariant,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SigmaPointScheme {
    pub fn u95() -> Self {
        Self { variant: SigmaVariant::U95, kappa: 2.0, alpha: 1.0, beta: 0.0 }
    }

    pub fn u02() -> Self {
        Self { variant: SigmaVariant::U02, kappa: 2.0, alpha: 1e-3, beta: 2.0 }
    }

    /// `(spread, mean weights, covariance weights)` for input dimension `n`;
    /// points are `µ` and `µ ± spread · Lᵢ` for the columns `Lᵢ` of `chol(Σ)`.
    pub fn weights(&self, n: usize) -> (f64, Vec<f64>, Vec<f64>) {
        let nf = n as f64;
        match self.variant {
            SigmaVariant::U95 => {
                let s = nf + self.kappa;
                let mut w = vec![1.0 / (2.0 * s); 2 * n + 1];
                w[0] = self.kappa / s;
                (s.sqrt(), w.clone(), w)
            }
            SigmaVariant::U02 => {
                let lambda = self.alpha * self.alpha * (nf + self.kappa) - nf;
                let s = nf + lambda;
                let mut wm = vec![1.0 / (2.0 * s); 2 * n + 1];
                let mut wc = wm.clone();
                wm[0] = lambda / s;
                wc[0] = wm[0] + 1.0 - self.alpha * self.alpha + self.beta;
                (s.sqrt(), wm, wc)
            }
        }
    }

    /// The `2n + 1` sigma points of `g`, one per column.
    pub fn points(&self, g: &Gaussian) -> Result<DMatrix<f64>> {
        let n = g.dim();
        let (spread, _, _) = self.weights(n);
        let l = cholesky_with_jitter(g.cov())?.l();
        let mut pts = DMatrix::zeros(n, 2 * n + 1);
        for j in 0..2 * n + 1 {
            pts.set_column(j, g.mean());
        }
        for i in 0..n {
            let step = l.column(i) * spread;
            let mut plus = pts.column_mut(1 + i);
            plus += &step;
            let mut minus = pts.column_mut(1 + n + i);
            minus -= &step;
        }
        Ok(pts)
    }
}

/// Weighted mean and covariance of the columns of `y`.
pub fn weighted_moments(y: &DMatrix<f64>, wm: &[f64], wc: &[f64]) -> Result<Gaussian> {
    // Offsets from the centre point keep the large scaled weights from
    // amplifying rounding in the outputs themselves.
    let centre = y.column(0).into_owned();
    let mut mean = centre.clone();
    for (j, col) in y.column_iter().enumerate().skip(1) {
        mean.axpy(wm[j], &(col - &centre), 1.0);
    }
    let mut cov = DMatrix::zeros(y.nrows(), y.nrows());
    for (j, col) in y.column_iter().enumerate() {
        let dev = col - &mean;
        cov.ger(wc[j], &dev, &dev, 1.0);
    }
    Gaussian::new(mean, repaired(cov))
}

/// Pushes the sigma points of `input` through the whole network.
pub fn propagate_unscented(
    net: &Network,
    input: &Gaussian,
    scheme: &SigmaPointScheme,
) -> Result<Gaussian> {
    let pts = scheme.points(input)?;
    let y = net.eval_batch(&pts)?;
    let (_, wm, wc) = scheme.weights(input.dim());
    weighted_moments(&y, &wm, &wc)
}

fn at_layer(layer: usize, e: Error) -> Error {
    match e {
        Error::Dimension(message) => Error::Layer { layer, message },
        other => other,
    }
}
