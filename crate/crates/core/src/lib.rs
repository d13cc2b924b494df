//! Runge–Kutta convolution quadrature: tableaux, the differentiation symbol,
//! block weights, coercivity diagnostics and a time-marching solver for
//! nonlinear boundary problems driven by a scalar transfer operator.
#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod coercivity;
pub mod convolution;
pub mod error;
pub mod fft;
pub mod linalg;
mod par;
pub mod solver;
pub mod symbol;
pub mod tableau;
pub mod transfer;
pub mod weights;

pub use coercivity::{
    discrete_herglotz_test, matrix_function_inequality_check, order_barrier_probe, parseval_check,
    random_causal_sequence, scan_numerical_range, CoercivityScan, HerglotzReport,
};
pub use convolution::{block_convolve, compose_check, resolvent_stages, CompositionCheck, StageSequence};
pub use error::{DomainError, Error, LinalgError, Result};
pub use linalg::{CMatrix, C64};
pub use solver::{
    convergence_study, l2tau_error, march, march_differentiated, reference_solution, ErrorReport, ProblemSetup,
    Solution, SolverOptions, Variant,
};
pub use symbol::{delta, DifferentiationSymbol, SymbolPath};
pub use tableau::{make_tableau, weighted_dot, ButcherTableau, Method, WeightedInnerProduct};
pub use transfer::{Impedance, IncidentWave, Problem, TransferFunction};
pub use weights::{compute_weights, integrator_weights, WeightOptions, WeightTable};
