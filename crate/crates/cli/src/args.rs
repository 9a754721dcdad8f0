use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use momentflow::ensembles::{Architecture, EnsembleSpec, InputVariance};
use momentflow::qmc::derive_seed;
use momentflow::{ActivationKind, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Propagate,
    Benchmark,
    Compare,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ArchArg {
    Wide,
    Deep,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ActivationArg {
    Probit,
    Gelu,
    Relu,
    Heaviside,
    Sine,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VarianceArg {
    Small,
    Medium,
    Large,
}

/// Moment propagation through residual networks.
#[derive(Debug, Parser)]
#[command(name = "momentflow", version)]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Command,

    /// Network JSON file (propagate; optional for benchmark).
    #[arg(long)]
    pub network: Option<PathBuf>,

    #[arg(long, value_enum)]
    pub architecture: Option<ArchArg>,

    #[arg(long, value_enum)]
    pub activation: Option<ActivationArg>,

    /// Identity skip connections on square hidden layers.
    #[arg(long)]
    pub residual: bool,

    /// Isotropic input variance level.
    #[arg(long, value_enum)]
    pub variance: Option<VarianceArg>,

    /// QMC samples per replicate (power of two).
    #[arg(long, default_value_t = 1 << 16)]
    pub samples: usize,

    #[arg(long, default_value_t = 20)]
    pub replicates: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Input mean as comma-separated values.
    #[arg(long, allow_hyphen_values = true)]
    pub input_mean: Option<String>,

    /// Input covariance, rows separated by ';' and entries by ','.
    #[arg(long, allow_hyphen_values = true)]
    pub input_cov: Option<String>,

    /// Directory of benchmark CSV reports (compare).
    #[arg(long)]
    pub reports: Option<PathBuf>,

    /// Per-layer error bounds CSV (benchmark).
    #[arg(long)]
    pub bounds: Option<PathBuf>,

    /// 50-bin histogram of the pooled samples with each method's bin mass (benchmark).
    #[arg(long)]
    pub histogram: Option<PathBuf>,
}

impl Args {
    pub fn format(&self) -> Format {
        self.format.unwrap_or(match self.command {
            Command::Propagate => Format::Json,
            _ => Format::Csv,
        })
    }

    /// The ensemble named by the flags, with its network seed split off the root seed.
    pub fn ensemble(&self) -> Result<EnsembleSpec> {
        let missing = |flag: &str| Error::InvalidArgument(format!("benchmark needs --{flag} or --network"));
        let architecture = match self.architecture.ok_or_else(|| missing("architecture"))? {
            ArchArg::Wide => Architecture::Wide,
            ArchArg::Deep => Architecture::Deep,
        };
        let activation = self.activation_kind().ok_or_else(|| missing("activation"))?;
        let variance = self.variance_level().ok_or_else(|| missing("variance"))?;
        let labels = [
            architecture as u64,
            activation as u64,
            self.residual as u64,
            variance as u64,
        ];
        Ok(EnsembleSpec {
            architecture,
            activation,
            residual: self.residual,
            variance,
            seed: derive_seed(self.seed, &labels),
        })
    }

    pub fn activation_kind(&self) -> Option<ActivationKind> {
        self.activation.map(|a| match a {
            ActivationArg::Probit => ActivationKind::Probit,
            ActivationArg::Gelu => ActivationKind::Gelu,
            ActivationArg::Relu => ActivationKind::Relu,
            ActivationArg::Heaviside => ActivationKind::Heaviside,
            ActivationArg::Sine => ActivationKind::Sine,
        })
    }

    pub fn variance_level(&self) -> Option<InputVariance> {
        self.variance.map(|v| match v {
            VarianceArg::Small => InputVariance::Small,
            VarianceArg::Medium => InputVariance::Medium,
            VarianceArg::Large => InputVariance::Large,
        })
    }

    /// Root seed for the QMC replicates, independent of the network draw.
    pub fn sampling_seed(&self) -> u64 {
        derive_seed(self.seed, &[u64::MAX])
    }
}

pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("'{}' is not a number", s.trim())))
        })
        .collect()
}

/// Row-major entries and the row count.
pub fn parse_matrix(text: &str) -> Result<(usize, Vec<f64>)> {
    let rows: Vec<Vec<f64>> = text.split(';').map(parse_vector).collect::<Result<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidArgument("input covariance must be square".into()));
    }
    Ok((n, rows.concat()))
}
