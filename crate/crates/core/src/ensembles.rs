//! Randomly initialised benchmark networks `R³ → R`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};

use crate::gaussian::Gaussian;
use crate::moments::ActivationKind;
use crate::network::{LayerParams, Network};

pub const INPUT_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Architecture {
    /// 5 hidden layers of width 400.
    Wide,
    /// 20 hidden layers of width 100.
    Deep,
}

impl Architecture {
    pub fn depth(self) -> usize {
        match self {
            Architecture::Wide => 5,
            Architecture::Deep => 20,
        }
    }

    pub fn width(self) -> usize {
        match self {
            Architecture::Wide => 400,
            Architecture::Deep => 100,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InputVariance {
    Small,
    Medium,
    Large,
}

impl InputVariance {
    pub fn scale(self) -> f64 {
        match self {
            InputVariance::Small => 1e-2,
            InputVariance::Medium => 1.0,
            InputVariance::Large => 1e2,
        }
    }
}

/// One benchmark configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EnsembleSpec {
    pub architecture: Architecture,
    pub activation: ActivationKind,
    pub residual: bool,
    pub variance: InputVariance,
    pub seed: u64,
}

/// Draws the weights of `spec`'s network.
///
/// `A` entries are `N(0, √2 / fan_in)` (variance), biases `N(0, 1)` except for
/// sine which uses `U(−π, π)`. Square hidden `C` matrices are the identity in
/// residual networks and zero otherwise. The output layer is affine, with its
/// `C` row drawn like an `A` matrix.
pub fn build_network(spec: &EnsembleSpec) -> Network {
    build_custom(spec.activation, spec.residual, spec.architecture.depth(), spec.architecture.width(), spec.seed)
}

/// [`build_network`] with arbitrary depth and width.
pub fn build_custom(
    kind: ActivationKind,
    residual: bool,
    depth: usize,
    width: usize,
    seed: u64,
) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut layers = Vec::with_capacity(depth + 1);
    let mut fan_in = INPUT_DIM;
    for _ in 0..depth {
        let a = weight_matrix(&mut rng, width, fan_in);
        let b = bias_vector(&mut rng, width, kind);
        let c = if residual && fan_in == width {
            DMatrix::identity(width, width)
        } else {
            DMatrix::zeros(width, fan_in)
        };
        layers.push(
            LayerParams::new(a, b, c, DVector::zeros(width), kind).expect("consistent shapes"),
        );
        fan_in = width;
    }
    let c = weight_matrix(&mut rng, 1, fan_in);
    layers.push(LayerParams::affine(c, DVector::zeros(1), kind).expect("consistent shapes"));
    Network::new(layers).expect("consistent network")
}

fn weight_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    let sd = (std::f64::consts::SQRT_2 / cols as f64).sqrt();
    let normal = Normal::new(0.0, sd).expect("positive scale");
    DMatrix::from_fn(rows, cols, |_, _| normal.sample(rng))
}

fn bias_vector<R: Rng>(rng: &mut R, n: usize, kind: ActivationKind) -> DVector<f64> {
    match kind {
        ActivationKind::Sine => {
            let u = Uniform::new_inclusive(-std::f64::consts::PI, std::f64::consts::PI);
            DVector::from_fn(n, |_, _| u.sample(rng))
        }
        _ => {
            let normal = Normal::new(0.0, 1.0).expect("unit scale");
            DVector::from_fn(n, |_, _| normal.sample(rng))
        }
    }
}

/// `N(0, s·I₃)` with `s` from `spec.variance`.
pub fn input_gaussian(spec: &EnsembleSpec) -> Gaussian {
    Gaussian::new(
        DVector::zeros(INPUT_DIM),
        DMatrix::identity(INPUT_DIM, INPUT_DIM) * spec.variance.scale(),
    )
    .expect("square covariance")
}

macro_rules! named_enum {
    ($ty:ty, $($variant:path => $name:literal),+) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.to_ascii_lowercase().as_str() {
                    $($name => Ok($variant),)+
                    _ => Err(format!("unknown value '{s}'")),
                }
            }
        }
    };
}

named_enum!(Architecture, Architecture::Wide => "wide", Architecture::Deep => "deep");
named_enum!(
    InputVariance,
    InputVariance::Small => "small",
    InputVariance::Medium => "medium",
    InputVariance::Large => "large"
);
