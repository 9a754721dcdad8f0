//! Quasi-Monte Carlo ground truth and the Wasserstein/KL scoring protocol.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{cholesky_with_jitter, kl_divergence, psd_repair, Gaussian};
use crate::network::Network;
use crate::qmc::scrambled_normals;
use crate::special::{norm_cdf, norm_quantile};

/// Samples evaluated per batched forward pass.
const CHUNK: usize = 4096;

/// Network outputs for one scrambled replicate: one row per sample.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub samples: DMatrix<f64>,
    pub replicate_id: u64,
    pub seed: u64,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.nrows() == 0
    }

    /// Output coordinate `j` of every sample, ascending.
    pub fn sorted_column(&self, j: usize) -> Vec<f64> {
        let mut v: Vec<f64> = self.samples.column(j).iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// Draws `n = 2^k` scrambled Sobol inputs from `input` and evaluates `net`.
pub fn qmc_sample_network(
    net: &Network,
    input: &Gaussian,
    n: usize,
    seed: u64,
    replicate: u64,
) -> Result<SampleSet> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("sample count {n} is not a power of two")));
    }
    if input.dim() != net.input_dim() {
        return Err(Error::Layer {
            layer: 0,
            message: format!("expected input dim {}, found {}", net.input_dim(), input.dim()),
        });
    }
    let dim = input.dim();
    let l = cholesky_with_jitter(input.cov())?.l();
    let normals = (0..dim)
        .map(|d| scrambled_normals(d, n, seed, replicate))
        .collect::<Result<Vec<_>>>()?;

    let chunks: Vec<DMatrix<f64>> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let len = CHUNK.min(n - start);
            let z = DMatrix::from_fn(dim, len, |d, j| normals[d][start + j]);
            let mut x = &l * z;
            for mut col in x.column_iter_mut() {
                col += input.mean();
            }
            net.eval_batch(&x)
        })
        .collect::<Result<_>>()?;

    let out_dim = net.output_dim();
    let mut samples = DMatrix::zeros(n, out_dim);
    for (c, y) in chunks.iter().enumerate() {
        samples
            .view_mut((c * CHUNK, 0), (y.ncols(), out_dim))
            .copy_from(&y.transpose());
    }
    Ok(SampleSet { samples, replicate_id: replicate, seed })
}

/// Empirical mean and unbiased covariance of the rows of `samples`.
pub fn empirical_moments(samples: &DMatrix<f64>) -> Result<Gaussian> {
    let n = samples.nrows();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let mean = DVector::from_iterator(
        samples.ncols(),
        samples.column_iter().map(|c| c.sum() / n as f64),
    );
    let mut centered = samples.clone();
    for (j, mut col) in centered.column_iter_mut().enumerate() {
        col.add_scalar_mut(-mean[j]);
    }
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    Gaussian::new(mean, psd_repair(&cov))
}

/// `N(E Y₀, Cov Y₀)` for one replicate.
pub fn pseudo_true(set: &SampleSet) -> Result<Gaussian> {
    empirical_moments(&set.samples)
}

/// Pseudo-true Gaussian of all replicates pooled together.
pub fn pooled_pseudo_true(sets: &[SampleSet]) -> Result<Gaussian> {
    let first = sets.first().ok_or_else(|| Error::InvalidArgument("no replicates".into()))?;
    let d = first.samples.ncols();
    let total: usize = sets.iter().map(SampleSet::len).sum();
    let mut all = DMatrix::zeros(total, d);
    let mut row = 0;
    for s in sets {
        all.view_mut((row, 0), (s.len(), d)).copy_from(&s.samples);
        row += s.len();
    }
    empirical_moments(&all)
}

/// `(1/N) Σ |y₍ᵢ₎ − Q((i − ½)/N)|` with `Q` the quantile function of `approx`.
/// A point mass uses the mean absolute deviation from its location.
pub fn wasserstein_1d(approx: &Gaussian, sorted: &[f64]) -> Result<f64> {
    if approx.dim() != 1 {
        return Err(Error::Dimension("Wasserstein distance needs a 1-D Gaussian".into()));
    }
    if sorted.is_empty() {
        return Err(Error::InvalidArgument("no samples".into()));
    }
    if sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Unsorted);
    }
    let mu = approx.mean()[0];
    let sd = approx.cov()[(0, 0)].max(0.0).sqrt();
    let n = sorted.len() as f64;
    let total: f64 = if sd == 0.0 {
        sorted.iter().map(|y| (y - mu).abs()).sum()
    } else {
        sorted
            .iter()
            .enumerate()
            .map(|(i, y)| (y - (mu + sd * norm_quantile((i as f64 + 0.5) / n))).abs())
            .sum()
    };
    Ok(total / n)
}

/// Mean and standard error over replicates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Sample mean and `sd/√R`; infinite if any value is infinite.
    pub fn from_values(values: &[f64]) -> Self {
        let r = values.len() as f64;
        if values.iter().any(|v| v.is_infinite()) {
            return Self { mean: f64::INFINITY, se: f64::INFINITY };
        }
        let mean = values.iter().sum::<f64>() / r;
        let se = if values.len() < 2 {
            0.0
        } else {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
            (var / r).sqrt()
        };
        Self { mean, se }
    }
}

/// Accuracy of one approximation against the QMC truth.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub moments: Gaussian,
    pub wasserstein: Estimate,
    /// `KL(Y₁ ‖ approx)`.
    pub kl_y1_to_m: Estimate,
    /// `KL(approx ‖ Y₁)`.
    pub kl_m_to_y1: Estimate,
}

/// Per-replicate sorted outputs and pseudo-true Gaussians, reused across methods.
pub struct Truth {
    sorted: Vec<Vec<f64>>,
    pseudo: Vec<Gaussian>,
}

impl Truth {
    pub fn new(replicates: &[SampleSet]) -> Result<Self> {
        if replicates.is_empty() {
            return Err(Error::InvalidArgument("no replicates".into()));
        }
        if replicates.iter().any(|s| s.samples.ncols() != 1) {
            return Err(Error::Dimension("scoring needs scalar network outputs".into()));
        }
        Ok(Self {
            sorted: replicates.iter().map(|s| s.sorted_column(0)).collect(),
            pseudo: replicates.iter().map(pseudo_true).collect::<Result<_>>()?,
        })
    }

    pub fn replicates(&self) -> usize {
        self.sorted.len()
    }

    pub fn evaluate(&self, approx: &Gaussian) -> Result<MetricReport> {
        if approx.dim() != 1 {
            return Err(Error::Dimension("scoring needs a 1-D approximation".into()));
        }
        let w: Vec<f64> = self
            .sorted
            .iter()
            .map(|s| wasserstein_1d(approx, s))
            .collect::<Result<_>>()?;
        let fwd: Vec<f64> = self.pseudo.iter().map(|y1| kl_or_inf(y1, approx)).collect::<Result<_>>()?;
        let rev: Vec<f64> = self.pseudo.iter().map(|y1| kl_or_inf(approx, y1)).collect::<Result<_>>()?;
        Ok(MetricReport {
            moments: approx.clone(),
            wasserstein: Estimate::from_values(&w),
            kl_y1_to_m: Estimate::from_values(&fwd),
            kl_m_to_y1: Estimate::from_values(&rev),
        })
    }
}

/// Scores `approx` against every replicate.
pub fn evaluate_method(approx: &Gaussian, truth_replicates: &[SampleSet]) -> Result<MetricReport> {
    Truth::new(truth_replicates)?.evaluate(approx)
}

/// KL divergence where a singular reference counts as infinitely far.
pub fn kl_or_inf(p: &Gaussian, q: &Gaussian) -> Result<f64> {
    match kl_divergence(p, q) {
        Err(Error::NotPositiveDefinite) => Ok(f64::INFINITY),
        other => other,
    }
}

/// Equal-width histogram of pooled samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(values: &[f64], bins: usize) -> Result<Self> {
        if values.is_empty() || bins == 0 {
            return Err(Error::InvalidArgument("histogram needs values and bins".into()));
        }
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            hi = lo + 1.0;
        }
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let b = (((v - lo) / width) as usize).min(bins - 1);
            counts[b] += 1;
        }
        Ok(Self { edges, counts })
    }

    /// Probability that a 1-D Gaussian assigns to each bin.
    pub fn gaussian_mass(&self, g: &Gaussian) -> Vec<f64> {
        let mu = g.mean()[0];
        let sd = g.cov()[(0, 0)].max(0.0).sqrt();
        let cdf = |x: f64| {
            if sd == 0.0 {
                if x >= mu {
                    1.0
                } else {
                    0.0
                }
            } else {
                norm_cdf((x - mu) / sd)
            }
        };
        self.edges.windows(2).map(|w| cdf(w[1]) - cdf(w[0])).collect()
    }
}
