//! Multivariate Gaussians, affine maps and Gaussian-to-Gaussian divergences.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::special::norm_quantile;

/// Relative jitter steps tried when a Cholesky factorisation fails.
const JITTER_LADDER: [f64; 7] = [0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8, 1e-7];
const JITTER_MAX: f64 = 1e-6;

/// A multivariate normal distribution `N(mean, cov)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    /// Builds a Gaussian, symmetrising `cov`. Fails when shapes disagree.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = mean.len();
        if cov.nrows() != n || cov.ncols() != n {
            return Err(Error::Dimension(format!(
                "mean has length {n} but covariance is {}x{}",
                cov.nrows(),
                cov.ncols()
            )));
        }
        Ok(Self { mean, cov: symmetrize(cov) })
    }

    /// Like [`Gaussian::new`] but also clips negative eigenvalues.
    pub fn new_repaired(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let g = Self::new(mean, cov)?;
        Ok(Self { cov: psd_repair(&g.cov), mean: g.mean })
    }

    pub fn univariate(mean: f64, variance: f64) -> Self {
        Self {
            mean: DVector::from_element(1, mean),
            cov: DMatrix::from_element(1, 1, variance),
        }
    }

    pub fn standard(n: usize) -> Self {
        Self { mean: DVector::zeros(n), cov: DMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Keeps only the diagonal of the covariance.
    pub fn diagonalized(&self) -> Self {
        Self {
            mean: self.mean.clone(),
            cov: DMatrix::from_diagonal(&self.cov.diagonal()),
        }
    }

    /// Lower Cholesky factor of the covariance, using the jitter ladder.
    pub fn cholesky_factor(&self) -> Result<DMatrix<f64>> {
        Ok(cholesky_with_jitter(&self.cov)?.l())
    }

    /// Maps a point of the open unit cube to `mean + L Φ⁻¹(u)`.
    pub fn sample(&self, u: &[f64]) -> Result<DVector<f64>> {
        if u.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "unit-cube point has length {} but Gaussian has dimension {}",
                u.len(),
                self.dim()
            )));
        }
        if u.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
            return Err(Error::InvalidArgument("unit-cube point must lie in (0, 1)".into()));
        }
        let l = self.cholesky_factor()?;
        let z = DVector::from_iterator(u.len(), u.iter().map(|&v| norm_quantile(v)));
        Ok(&self.mean + l * z)
    }
}

/// An affine map `x ↦ matrix·x + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    pub matrix: DMatrix<f64>,
    pub offset: DVector<f64>,
}

impl LinearMap {
    pub fn new(matrix: DMatrix<f64>, offset: DVector<f64>) -> Result<Self> {
        if matrix.nrows() != offset.len() {
            return Err(Error::Dimension(format!(
                "map has {} rows but offset has length {}",
                matrix.nrows(),
                offset.len()
            )));
        }
        Ok(Self { matrix, offset })
    }
}

/// Exact image of a Gaussian under an affine map.
pub fn affine_pushforward(g: &Gaussian, map: &LinearMap) -> Result<Gaussian> {
    if map.matrix.ncols() != g.dim() {
        return Err(Error::Dimension(format!(
            "map expects input dimension {} but Gaussian has dimension {}",
            map.matrix.ncols(),
            g.dim()
        )));
    }
    let mean = &map.matrix * &g.mean + &map.offset;
    let cov = sandwich(&map.matrix, &g.cov);
    Gaussian::new(mean, cov)
}

/// `M S Mᵀ`, symmetrised.
pub fn sandwich(m: &DMatrix<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
    symmetrize(m * s * m.transpose())
}

pub fn symmetrize(s: DMatrix<f64>) -> DMatrix<f64> {
    let t = s.transpose();
    (s + t) * 0.5
}

/// Eigenvalues and orthonormal eigenvectors (as columns) of a symmetric matrix,
/// by cyclic Jacobi rotations.
pub fn symmetric_eigen(s: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = s.nrows();
    let mut a = symmetrize(s.clone());
    let mut v = DMatrix::identity(n, n);
    for _ in 0..64 {
        let off: f64 = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        let diag: f64 = a.diagonal().iter().map(|d| d * d).sum();
        if off <= f64::EPSILON.powi(2) * 1e-4 * diag || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
    }
    (a.diagonal(), v)
}

/// Projects a symmetric matrix onto the PSD cone by clipping eigenvalues at 0.
pub fn psd_repair(cov: &DMatrix<f64>) -> DMatrix<f64> {
    let n = cov.nrows();
    if n == 0 {
        return cov.clone();
    }
    let (values, v) = symmetric_eigen(cov);
    if values.iter().all(|&l| l >= 0.0) {
        return symmetrize(cov.clone());
    }
    let clipped = values.map(|l| l.max(0.0));
    symmetrize(&v * DMatrix::from_diagonal(&clipped) * v.transpose())
}

/// Cholesky factorisation, retrying with `ε·tr(S)/n·I` for
/// `ε = 1e-12, 1e-11, …, 1e-6` before giving up.
pub fn cholesky_with_jitter(s: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>> {
    let n = s.nrows();
    if n == 0 {
        return Err(Error::Dimension("empty covariance".into()));
    }
    let scale = s.trace() / n as f64;
    if !scale.is_finite() {
        return Err(Error::NotPositiveDefinite);
    }
    for eps in JITTER_LADDER.iter().copied().chain(std::iter::once(JITTER_MAX)) {
        let mut m = s.clone();
        if eps > 0.0 {
            if scale <= 0.0 {
                break;
            }
            for i in 0..n {
                m[(i, i)] += eps * scale;
            }
        }
        if let Some(c) = Cholesky::new(m) {
            if c.l().diagonal().iter().all(|&d| d > 0.0 && d.is_finite()) {
                return Ok(c);
            }
        }
    }
    Err(Error::NotPositiveDefinite)
}

/// `KL(p ‖ q)`. Fails with [`Error::NotPositiveDefinite`] when `q`'s covariance
/// stays singular after jitter; returns `+∞` when only `p` is singular.
pub fn kl_divergence(p: &Gaussian, q: &Gaussian) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::Dimension(format!(
            "cannot compare dimensions {} and {}",
            p.dim(),
            q.dim()
        )));
    }
    let n = p.dim() as f64;
    let cq = cholesky_with_jitter(&q.cov)?;
    let logdet_q = 2.0 * cq.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    let logdet_p = match cholesky_with_jitter(&p.cov) {
        Ok(cp) => 2.0 * cp.l().diagonal().iter().map(|d| d.ln()).sum::<f64>(),
        Err(_) => return Ok(f64::INFINITY),
    };
    let trace = cq.solve(&p.cov).trace();
    let delta = &p.mean - &q.mean;
    let maha = delta.dot(&cq.solve(&delta));
    Ok((0.5 * (trace + maha - n + logdet_q - logdet_p)).max(0.0))
}
