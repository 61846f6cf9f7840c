//! Double-smoothing solver for `inf_x { f(x) + g(Ax) }` with certified
//! primal recovery, plus the linear operators, primal baselines, and image
//! utilities used by the deblurring experiments.
//!
//! The method regularizes the Fenchel dual in up to two stages — a Moreau
//! smoothing of `f*(A*p)` and a proximal term `(κ/2)‖p‖²` — and minimizes the
//! resulting smooth strongly convex dual with a fast gradient method. Primal
//! iterates fall out of the argmin maps that back the dual gradient, and an
//! a posteriori certificate bounds the primal objective error in terms of the
//! dual gradient norm.

pub mod baselines;
pub mod error;
pub mod fgm;
pub mod imaging;
pub mod linops;
pub mod oracles;
pub mod smoothing;
pub mod solver;
pub mod vec_ops;

pub use baselines::{
    fista_run, ista_run, prox_step_l1, prox_step_l2l1, BaselineRun, CompositeProblem,
    RegularizerKind,
};
pub use error::{DsError, Result};
pub use fgm::{
    fgm_minimize, geometric_decay_check, momentum_coefficient, FgmConfig, FgmResult, FgmTrace,
    SmoothObjective, StopReason, TraceRecord,
};
pub use imaging::{add_gaussian_noise, isnr, load_pgm, save_pgm, GrayImage};
pub use linops::{
    gaussian_kernel, operator_norm_sq, operator_norm_sq_detailed, BlurOperator, DenseMatrix,
    Identity, Kernel, LinearMap, PowerIteration,
};
pub use oracles::{
    box_l1_regularized_argmin, box_l2l1_argmin, domain_radius, squared_distance_tilt_argmin,
    BoxL1, BoxL2L1, ExtReal, PrimalOracle, SquaredDistance, StrongOracle,
};
pub use smoothing::{select_regime, smoothed_sandwich_check, DualEval, Regime, SmoothedDual};
pub use solver::{
    choose_parameters, iteration_bound, primal_certificate, solve, solve_auto_r, Problem,
    SolveReport, SolverConfig,
};
