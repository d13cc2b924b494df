use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

/// Runge–Kutta convolution quadrature experiments.
#[derive(Debug, Parser)]
#[command(name = "cqlab", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Convolution quadrature weight table of a transfer function.
    Weights(WeightsArgs),
    /// Smallest eigenvalue of the weighted Hermitian part of the symbol on a circle.
    CoercivityScan(ScanArgs),
    /// Discrete coercivity inequality on seeded random causal sequences.
    Herglotz(HerglotzArgs),
    /// Time-march the nonlinear boundary equation and dump (t, psi).
    March(MarchArgs),
    /// Convergence study on a step-size ladder against a fine reference.
    Converge(ConvergeArgs),
}

/// Contour options shared by every weight computation.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ContourArgs {
    /// Contour points per weight (N_q = oversampling * N).
    #[arg(long, default_value_t = 4)]
    pub oversampling: usize,
    /// Contour radius; default eps^(1/((oversampling+1) N)).
    #[arg(long)]
    pub radius: Option<f64>,
    /// Eigenvector condition number above which matrix functions use Schur-Parlett.
    #[arg(long, default_value_t = 1e6)]
    pub max_cond: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    /// CSV output path; the resolved config goes to <stem>.config.json beside it.
    /// Without it, CSV goes to stdout and the config to stderr.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WeightsArgs {
    /// exterior-sphere, interior-sphere, identity, s, 1/s or 1/s^2.
    #[arg(long, default_value = "interior-sphere")]
    pub transfer: String,
    #[arg(long, default_value = "radau2")]
    pub method: String,
    #[arg(long, default_value_t = 0.1)]
    pub tau: f64,
    /// Number of weights W_0 .. W_{N-1}.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Use L(s + sigma).
    #[arg(long)]
    pub shift: Option<f64>,
    #[command(flatten)]
    pub contour: ContourArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long, default_value = "radau2")]
    pub method: String,
    /// Circle radius e^(-delta), delta in (0, 1].
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 1024)]
    pub ntheta: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HerglotzArgs {
    /// exterior-sphere, interior-sphere or s.
    #[arg(long, default_value = "exterior-sphere")]
    pub transfer: String,
    #[arg(long, default_value = "radau2")]
    pub method: String,
    /// Abscissa of the certificate; sigma > 0 needs a method with a coercivity constant.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Sequence length.
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, default_value_t = 0.05)]
    pub tau: f64,
    /// Leading zero entries of every random sequence.
    #[arg(long, default_value_t = 2)]
    pub leading_zeros: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Relative tolerance: margin >= -tol * (|lhs| + |rhs|).
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub contour: ContourArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Problem and solver options shared by `march` and `converge`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ProblemArgs {
    /// interior-sphere or exterior-sphere.
    #[arg(long, default_value = "interior-sphere")]
    pub problem: String,
    /// Impedance: g1, g2 or linear:<kappa>.
    #[arg(long, default_value = "g2")]
    pub g: String,
    #[arg(long, default_value = "radau2")]
    pub method: String,
    /// plain, differentiated-1 or differentiated-2.
    #[arg(long, default_value = "plain")]
    pub variant: String,
    /// Solve the exponentially scaled equation with L(s + sigma) (plain variant).
    #[arg(long)]
    pub shift: Option<f64>,
    #[arg(long, default_value_t = 6.0)]
    pub final_time: f64,
    /// Multiply the incident wave by a smooth cutoff of this width at t = 0.
    #[arg(long)]
    pub causalize: Option<f64>,
    /// Differentiated variants: use discrete derivatives of the sampled data.
    #[arg(long)]
    pub discrete_derivatives: bool,
    #[arg(long, default_value_t = 1e-12)]
    pub newton_tol: f64,
    #[arg(long, default_value_t = 50)]
    pub newton_max_iter: usize,
    #[command(flatten)]
    pub contour: ContourArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MarchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Number of steps N; tau = T / N.
    #[arg(long, default_value_t = 512)]
    pub steps: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Ladder tau = T / 2^k for k = kmin..=kmax.
    #[arg(long, default_value_t = 4)]
    pub kmin: u32,
    #[arg(long, default_value_t = 9)]
    pub kmax: u32,
    /// Reference method (must have c_m = 1).
    #[arg(long, default_value = "radau3")]
    pub ref_method: String,
    /// Reference step T / 2^ref_k; at least kmax + 3.
    #[arg(long, default_value_t = 12)]
    pub ref_k: u32,
    /// Coarsest ladder points left out of the slope fit.
    #[arg(long, default_value_t = 0)]
    pub drop: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}
