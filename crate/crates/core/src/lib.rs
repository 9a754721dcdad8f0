//! Analytic Gaussian moment propagation through residual feedforward networks.
//!
//! A layer computes `σ(A x + b) + C x + d`. Given a Gaussian input, the
//! [`propagation`] module pushes mean and full covariance through each layer
//! using closed-form activation integrals from [`moments`], and compares the
//! result against mean-field, linearised and unscented baselines. The
//! [`oracle`] module supplies scrambled-Sobol ground truth and the
//! Wasserstein/KL scoring protocol.

pub mod diagnostics;
pub mod ensembles;
pub mod error;
pub mod gaussian;
pub mod moments;
pub mod network;
pub mod oracle;
pub mod propagation;
pub mod qmc;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
pub use gaussian::{Gaussian, LinearMap};
pub use moments::{ActivationKind, BiMoment, UniMoment};
pub use network::{LayerParams, Network};
