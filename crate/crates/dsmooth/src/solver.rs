//! The double-smoothing driver: ε-driven parameter selection per regime,
//! orchestration of smoothing + fast gradient method, primal recovery from
//! the final dual iterate, and the computable near-optimality certificate.

use crate::error::{DsError, Result};
use crate::fgm::{fgm_minimize, FgmConfig, FgmTrace, StopReason};
use crate::linops::LinearMap;
use crate::oracles::{ExtReal, PrimalOracle, StrongOracle};
use crate::smoothing::{select_regime, Regime, SmoothedDual};
use crate::vec_ops::norm;
use std::sync::Arc;

const DEFAULT_MAX_ITERS: usize = 50_000;

#[derive(Clone)]
pub struct Problem {
    pub a: Arc<dyn LinearMap>,
    pub f: Arc<dyn PrimalOracle>,
    pub g: Arc<dyn StrongOracle>,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Target accuracy ε (objective units).
    pub epsilon: f64,
    /// Known bound R with `‖p*‖ ≤ R` for a dual optimal solution.
    pub r_bound: f64,
    pub max_iters: Option<usize>,
    pub regime_override: Option<Regime>,
    /// Keep every dual iterate (needed for per-iteration primal metrics).
    pub record_iterates: bool,
}

impl SolverConfig {
    pub fn new(epsilon: f64, r_bound: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !(r_bound > 0.0) {
            return Err(DsError::InvalidConfiguration(format!(
                "solver needs epsilon > 0 and R > 0 (got {epsilon}, {r_bound})"
            )));
        }
        Ok(Self {
            epsilon,
            r_bound,
            max_iters: None,
            regime_override: None,
            record_iterates: false,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// `x_{f,p_K}` — the recovered primal solution.
    pub x_primal: Vec<f64>,
    /// `x_{g,p_K}`.
    pub y_primal: Vec<f64>,
    pub p_dual: Vec<f64>,
    /// θ_ρ(p_K): the dual value with the second-smoothing term stripped.
    pub dual_value: f64,
    /// `‖A·x_f − x_g‖`, the unregularized dual gradient norm.
    pub grad_norm: f64,
    pub f_value: ExtReal,
    pub g_value: f64,
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub regime: Regime,
    pub rho: f64,
    pub kappa: f64,
    pub lipschitz: f64,
    pub grad_norm_target: f64,
    pub r_used: f64,
    /// Set when R came from the restart heuristic rather than the caller.
    pub r_heuristic: bool,
    /// A-priori worst-case iteration count, reported for analysis only; the
    /// surrogate gap θ_ρ(0) − min-over-trace stands in for θ(0) − θ(p*).
    pub a_priori_iteration_bound: usize,
    pub trace: FgmTrace,
}

/// ε-driven smoothing parameters (ρ, κ) for the given regime.
pub fn choose_parameters(
    regime: Regime,
    epsilon: f64,
    r_bound: f64,
    d_f: f64,
    rho_f: f64,
    g_grad_lipschitz: Option<f64>,
) -> Result<(f64, f64)> {
    if !(epsilon > 0.0) || !(r_bound > 0.0) {
        return Err(DsError::InvalidConfiguration(format!(
            "choose_parameters needs epsilon > 0 and R > 0 (got {epsilon}, {r_bound})"
        )));
    }
    let need_finite_df = || -> Result<f64> {
        if d_f.is_finite() {
            Ok(d_f)
        } else {
            Err(DsError::Unsupported(
                "this regime requires a bounded dom f (finite D_f)".into(),
            ))
        }
    };
    let need_gl = || -> Result<f64> {
        g_grad_lipschitz.ok_or_else(|| {
            DsError::InvalidConfiguration("regime requires g with Lipschitz gradient".into())
        })
    };
    match regime {
        Regime::General => {
            let d_f = need_finite_df()?;
            Ok((epsilon / (3.0 * d_f), 2.0 * epsilon / (3.0 * r_bound * r_bound)))
        }
        Regime::FStrong => {
            if !(rho_f > 0.0) {
                return Err(DsError::InvalidConfiguration(
                    "F_STRONG requires a strongly convex f".into(),
                ));
            }
            Ok((rho_f, epsilon / (r_bound * r_bound)))
        }
        Regime::GSmooth => {
            let d_f = need_finite_df()?;
            Ok((epsilon / (2.0 * d_f), 1.0 / need_gl()?))
        }
        Regime::Both => {
            if !(rho_f > 0.0) {
                return Err(DsError::InvalidConfiguration(
                    "BOTH requires a strongly convex f".into(),
                ));
            }
            Ok((rho_f, 1.0 / need_gl()?))
        }
    }
}

/// A-priori iteration count guaranteeing ε-accuracy for the dual objective,
/// given an estimate of the initial gap θ(0) − θ(p*). Returns 0 when the
/// logarithm argument drops to 1 or below.
pub fn iteration_bound(
    regime: Regime,
    lipschitz: f64,
    kappa: f64,
    epsilon: f64,
    theta0_gap: f64,
) -> usize {
    let ratio = (lipschitz / kappa).sqrt();
    let (factor, log_arg) = match regime {
        Regime::General => (
            2.0 * ratio,
            75.0 * (theta0_gap + epsilon / 3.0) / (8.0 * epsilon),
        ),
        Regime::FStrong => (2.0 * ratio, 25.0 * theta0_gap / (4.0 * epsilon)),
        Regime::GSmooth => (ratio, 4.0 * (theta0_gap + epsilon / 2.0) / epsilon),
        Regime::Both => (ratio, 2.0 * theta0_gap / epsilon),
    };
    if log_arg <= 1.0 {
        return 0;
    }
    (factor * log_arg.ln()).ceil() as usize
}

fn stop_target(regime: Regime, epsilon: f64, r_bound: f64) -> f64 {
    match regime {
        Regime::General => 2.0 * epsilon / r_bound,
        _ => 3.0 * epsilon / r_bound,
    }
}

/// Run the double-smoothing method end to end: select the regime, pick
/// (ρ, κ), minimize the smoothed dual, and recover the primal pair from the
/// final iterate.
pub fn solve(problem: &Problem, cfg: &SolverConfig) -> Result<SolveReport> {
    if !(cfg.epsilon > 0.0) || !(cfg.r_bound > 0.0) {
        return Err(DsError::InvalidConfiguration(
            "solver needs epsilon > 0 and R > 0".into(),
        ));
    }
    let regime = cfg
        .regime_override
        .unwrap_or_else(|| select_regime(problem.f.as_ref(), problem.g.as_ref()));
    let d_f = problem.f.domain_radius_sq_half();
    let (rho, kappa) = choose_parameters(
        regime,
        cfg.epsilon,
        cfg.r_bound,
        d_f,
        problem.f.strong_convexity(),
        problem.g.grad_lipschitz(),
    )?;
    let sd = SmoothedDual::new(
        regime,
        problem.a.clone(),
        problem.f.clone(),
        problem.g.clone(),
        rho,
        kappa,
    )?;
    let target = stop_target(regime, cfg.epsilon, cfg.r_bound);
    let fgm_cfg = FgmConfig {
        max_iters: cfg.max_iters.unwrap_or(DEFAULT_MAX_ITERS),
        grad_norm_target: Some(target),
        record_trace: true,
        record_iterates: cfg.record_iterates,
    };
    let run = fgm_minimize(&sd, &fgm_cfg)?;

    let final_eval = sd.eval(&run.p)?;
    let unreg = sd.unregularized_grad(&final_eval.grad, &run.p);
    let dual_value = sd.value_without_regularizer(final_eval.value, &run.p);

    let theta0 = run.trace.records.first().map(|r| r.value).unwrap_or(0.0);
    let best = run
        .trace
        .records
        .iter()
        .map(|r| r.value)
        .fold(f64::INFINITY, f64::min);
    let surrogate_gap = (theta0 - best).max(0.0);
    let bound = iteration_bound(regime, sd.lipschitz(), sd.kappa(), cfg.epsilon, surrogate_gap);

    let f_value = problem.f.value(&final_eval.x_f);
    let g_value = problem
        .g
        .value(&final_eval.x_g)
        .finite()
        .ok_or_else(|| DsError::NumericalFailure("recovered x_g left dom g".into()))?;

    Ok(SolveReport {
        x_primal: final_eval.x_f,
        y_primal: final_eval.x_g,
        p_dual: run.p,
        dual_value,
        grad_norm: norm(&unreg),
        f_value,
        g_value,
        iterations: run.iterations,
        stop_reason: run.stop_reason,
        regime,
        rho: sd.rho(),
        kappa: sd.kappa(),
        lipschitz: sd.lipschitz(),
        grad_norm_target: target,
        r_used: cfg.r_bound,
        r_heuristic: false,
        a_priori_iteration_bound: bound,
        trace: run.trace,
    })
}

/// Solve with the documented R fallback: run once with the configured R₀,
/// and while `‖p_K‖ > R`, restart with `R = 2‖p_K‖`. Reports produced this
/// way carry the `r_heuristic` flag.
pub fn solve_auto_r(problem: &Problem, cfg: &SolverConfig) -> Result<SolveReport> {
    const MAX_RESTARTS: usize = 8;
    let mut cfg = cfg.clone();
    let mut restarted = false;
    for _ in 0..=MAX_RESTARTS {
        let mut report = solve(problem, &cfg)?;
        let p_norm = norm(&report.p_dual);
        if p_norm <= cfg.r_bound {
            report.r_heuristic = restarted;
            return Ok(report);
        }
        cfg.r_bound = 2.0 * p_norm;
        restarted = true;
    }
    Err(DsError::NumericalFailure(
        "auto-R restart heuristic did not stabilize".into(),
    ))
}

/// `|f(x_f) + g(x_g) − reference|` for an independently known optimal value
/// `v(P) = v(D)`.
pub fn primal_certificate(report: &SolveReport, reference_value: f64) -> Result<f64> {
    let f_val = report.f_value.finite().ok_or_else(|| {
        DsError::CertificateInvalid("x_f lies outside dom f (f value infinite)".into())
    })?;
    Ok((f_val + report.g_value - reference_value).abs())
}
