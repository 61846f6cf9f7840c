//! Fast gradient method for smooth strongly convex objectives.
//!
//! The scheme takes a gradient step from the extrapolated point `w_k` and
//! re-extrapolates with the fixed momentum coefficient
//! `(√L−√κ)/(√L+√κ)`, which yields the linear rate `e^{−k√(κ/L)}` on the
//! objective gap.

use crate::error::{DsError, Result};
use crate::vec_ops::{norm, norm_sq};

/// Minimal objective surface the engine needs: value+gradient, the constants
/// `(L, κ)`, and the weight of any quadratic regularizer folded into the
/// objective (used only to report the unregularized gradient norm).
pub trait SmoothObjective {
    fn dim(&self) -> usize;
    fn lipschitz(&self) -> f64;
    fn strong_convexity(&self) -> f64;
    /// Weight `κ` of a `(κ/2)‖p‖²` term included in `value_grad`, or 0.
    fn regularizer_weight(&self) -> f64 {
        0.0
    }
    fn value_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)>;
}

#[derive(Clone, Debug)]
pub struct FgmConfig {
    pub max_iters: usize,
    /// Stop once the unregularized gradient norm (`‖grad − κ·p‖` when a
    /// regularizer term is present, `‖grad‖` otherwise) drops to this value.
    pub grad_norm_target: Option<f64>,
    pub record_trace: bool,
    /// Additionally keep a clone of every iterate `p_k` (for per-iteration
    /// primal recovery; costs memory).
    pub record_iterates: bool,
}

impl Default for FgmConfig {
    fn default() -> Self {
        Self {
            max_iters: 1000,
            grad_norm_target: None,
            record_trace: true,
            record_iterates: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    TargetMet,
    MaxIters,
}

#[derive(Clone, Debug)]
pub struct TraceRecord {
    pub k: usize,
    pub value: f64,
    /// Norm of the gradient of the objective actually minimized.
    pub grad_norm: f64,
    /// Norm with any regularizer contribution stripped.
    pub grad_norm_unreg: f64,
    pub p_norm: f64,
}

#[derive(Clone, Debug, Default)]
pub struct FgmTrace {
    pub records: Vec<TraceRecord>,
    /// Present only when `record_iterates` was set; `iterates[k]` is `p_k`.
    pub iterates: Vec<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct FgmResult {
    pub p: Vec<f64>,
    pub trace: FgmTrace,
    pub iterations: usize,
    pub stop_reason: StopReason,
}

pub fn momentum_coefficient(lipschitz: f64, kappa: f64) -> f64 {
    (lipschitz.sqrt() - kappa.sqrt()) / (lipschitz.sqrt() + kappa.sqrt())
}

fn unreg_norm(grad: &[f64], p: &[f64], weight: f64) -> f64 {
    if weight == 0.0 {
        return norm(grad);
    }
    grad.iter()
        .zip(p)
        .map(|(g, pi)| {
            let v = g - weight * pi;
            v * v
        })
        .sum::<f64>()
        .sqrt()
}

/// Minimize `obj` starting from `w₀ = p₀ := 0`.
///
/// Stop checks are evaluated at `p_{k+1}` after each step; the returned trace
/// has one record per iterate including `k = 0`.
pub fn fgm_minimize(obj: &dyn SmoothObjective, cfg: &FgmConfig) -> Result<FgmResult> {
    let l = obj.lipschitz();
    let kappa = obj.strong_convexity();
    if !(l > 0.0) || !(kappa > 0.0) {
        return Err(DsError::InvalidConfiguration(format!(
            "fgm needs L > 0 and kappa > 0 (got {l}, {kappa})"
        )));
    }
    if kappa > l {
        return Err(DsError::InvalidConfiguration(format!(
            "fgm needs kappa <= L (got kappa {kappa}, L {l})"
        )));
    }
    if cfg.max_iters == 0 && cfg.grad_norm_target.is_none() {
        // max_iters 0 is allowed: report the start point only
    }
    let weight = obj.regularizer_weight();
    let step = 1.0 / l;
    let beta = momentum_coefficient(l, kappa);
    let n = obj.dim();

    let mut p = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut trace = FgmTrace::default();

    let record = |trace: &mut FgmTrace, k: usize, value: f64, grad: &[f64], p: &[f64]| {
        if cfg.record_trace {
            trace.records.push(TraceRecord {
                k,
                value,
                grad_norm: norm(grad),
                grad_norm_unreg: unreg_norm(grad, p, weight),
                p_norm: norm_sq(p).sqrt(),
            });
        }
        if cfg.record_iterates {
            trace.iterates.push(p.to_vec());
        }
    };

    let (v0, g0) = obj.value_grad(&p)?;
    record(&mut trace, 0, v0, &g0, &p);
    if let Some(target) = cfg.grad_norm_target {
        if unreg_norm(&g0, &p, weight) <= target {
            return Ok(FgmResult {
                p,
                trace,
                iterations: 0,
                stop_reason: StopReason::TargetMet,
            });
        }
    }

    let mut iterations = 0;
    let mut stop_reason = StopReason::MaxIters;
    for k in 0..cfg.max_iters {
        let (_, grad_w) = obj.value_grad(&w)?;
        if grad_w.iter().any(|v| !v.is_finite()) {
            return Err(DsError::NumericalFailure(format!(
                "non-finite gradient at iteration {k}"
            )));
        }
        let p_next: Vec<f64> = w.iter().zip(&grad_w).map(|(wi, gi)| wi - step * gi).collect();
        let w_next: Vec<f64> = p_next
            .iter()
            .zip(&p)
            .map(|(pn, po)| pn + beta * (pn - po))
            .collect();
        p = p_next;
        w = w_next;
        iterations = k + 1;

        let (v, grad_p) = obj.value_grad(&p)?;
        if grad_p.iter().any(|x| !x.is_finite()) {
            return Err(DsError::NumericalFailure(format!(
                "non-finite gradient at iterate {}",
                k + 1
            )));
        }
        record(&mut trace, k + 1, v, &grad_p, &p);
        if let Some(target) = cfg.grad_norm_target {
            if unreg_norm(&grad_p, &p, weight) <= target {
                stop_reason = StopReason::TargetMet;
                break;
            }
        }
    }
    Ok(FgmResult {
        p,
        trace,
        iterations,
        stop_reason,
    })
}

/// Check the geometric decay envelopes on a recorded trace: the objective gap
/// must stay below `2·gap₀·e^{−k√(κ/L)}` and the squared gradient norm below
/// `4L·gap₀·e^{−k√(κ/L)}`, with multiplicative slack 1.05.
pub fn geometric_decay_check(
    trace: &FgmTrace,
    lipschitz: f64,
    kappa: f64,
    theta_star: Option<f64>,
) -> bool {
    if trace.records.is_empty() {
        return false;
    }
    let star = theta_star.unwrap_or_else(|| {
        trace
            .records
            .iter()
            .map(|r| r.value)
            .fold(f64::INFINITY, f64::min)
    });
    let gap0 = (trace.records[0].value - star).max(0.0);
    let rate = (kappa / lipschitz).sqrt();
    const SLACK: f64 = 1.05;
    const ABS: f64 = 1e-12;
    for r in &trace.records {
        let envelope = (-(r.k as f64) * rate).exp();
        let gap = (r.value - star).max(0.0);
        if gap > SLACK * 2.0 * gap0 * envelope + ABS {
            return false;
        }
        if r.grad_norm * r.grad_norm > SLACK * 4.0 * lipschitz * gap0 * envelope + ABS {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vec_ops::dist;

    /// θ(p) = ½ pᵀ diag(d) p − cᵀ p, with declared constants (L, κ).
    struct Quadratic {
        diag: Vec<f64>,
        c: Vec<f64>,
        l: f64,
        kappa: f64,
    }

    impl Quadratic {
        fn new(diag: Vec<f64>, c: Vec<f64>) -> Self {
            let l = diag.iter().cloned().fold(0.0, f64::max);
            let kappa = diag.iter().cloned().fold(f64::INFINITY, f64::min);
            Self { diag, c, l, kappa }
        }

        fn minimizer(&self) -> Vec<f64> {
            self.c.iter().zip(&self.diag).map(|(c, d)| c / d).collect()
        }

        fn min_value(&self) -> f64 {
            let m = self.minimizer();
            self.value(&m)
        }

        fn value(&self, p: &[f64]) -> f64 {
            let mut v = 0.0;
            for i in 0..p.len() {
                v += 0.5 * self.diag[i] * p[i] * p[i] - self.c[i] * p[i];
            }
            v
        }
    }

    impl SmoothObjective for Quadratic {
        fn dim(&self) -> usize {
            self.diag.len()
        }
        fn lipschitz(&self) -> f64 {
            self.l
        }
        fn strong_convexity(&self) -> f64 {
            self.kappa
        }
        fn value_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
            let grad = p
                .iter()
                .zip(&self.diag)
                .zip(&self.c)
                .map(|((pi, d), c)| d * pi - c)
                .collect();
            Ok((self.value(p), grad))
        }
    }

    #[test]
    fn kappa_equals_l_is_one_step_exact_on_shifted_quadratic() {
        // θ(p) = ½(p−1)², L = κ = 1: momentum 0, p₁ = 0 − (0−1) = 1
        let q = Quadratic::new(vec![1.0], vec![1.0]);
        assert_eq!(momentum_coefficient(1.0, 1.0), 0.0);
        let cfg = FgmConfig {
            max_iters: 1,
            grad_norm_target: Some(1e-14),
            record_trace: true,
            record_iterates: false,
        };
        let res = fgm_minimize(&q, &cfg).unwrap();
        assert_eq!(res.p, vec![1.0]);
        assert_eq!(res.stop_reason, StopReason::TargetMet);
        assert_eq!(res.trace.records.len(), res.iterations + 1);
    }

    #[test]
    fn momentum_coefficient_value() {
        assert!((momentum_coefficient(4.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn two_dim_quadratic_converges_within_distance_envelope() {
        let q = Quadratic::new(vec![1.0, 4.0], vec![1.0, 1.0]);
        let p_star = q.minimizer();
        assert_eq!(p_star, vec![1.0, 0.25]);
        let cfg = FgmConfig {
            max_iters: 200,
            grad_norm_target: None,
            record_trace: true,
            record_iterates: true,
        };
        let res = fgm_minimize(&q, &cfg).unwrap();
        let d0 = dist(&vec![0.0; 2], &p_star);
        let rate = (q.kappa / q.l).sqrt();
        for (k, p_k) in res.trace.iterates.iter().enumerate() {
            let envelope = 2.0 * d0 * (-(k as f64) / 2.0 * rate).exp();
            assert!(
                dist(p_k, &p_star) <= envelope * 1.01 + 1e-12,
                "k={k}: {} > {envelope}",
                dist(p_k, &p_star)
            );
        }
        assert!(dist(&res.p, &p_star) < 1e-8);
    }

    #[test]
    fn decay_envelopes_hold_on_quadratics() {
        for (diag, c) in [
            (vec![1.0, 4.0], vec![1.0, 1.0]),
            (vec![0.5, 2.0, 8.0], vec![1.0, -2.0, 0.5]),
            (vec![3.0], vec![-1.0]),
        ] {
            let q = Quadratic::new(diag, c);
            let cfg = FgmConfig {
                max_iters: 300,
                grad_norm_target: None,
                record_trace: true,
                record_iterates: false,
            };
            let res = fgm_minimize(&q, &cfg).unwrap();
            assert!(geometric_decay_check(
                &res.trace,
                q.l,
                q.kappa,
                Some(q.min_value())
            ));
        }
    }

    #[test]
    fn decay_check_single_record_and_adversarial() {
        let single = FgmTrace {
            records: vec![TraceRecord {
                k: 0,
                value: 3.0,
                grad_norm: 0.0,
                grad_norm_unreg: 0.0,
                p_norm: 0.0,
            }],
            iterates: vec![],
        };
        assert!(geometric_decay_check(&single, 2.0, 1.0, Some(1.0)));

        // injected non-decaying gap
        let adversarial = FgmTrace {
            records: vec![
                TraceRecord {
                    k: 0,
                    value: 3.0,
                    grad_norm: 0.0,
                    grad_norm_unreg: 0.0,
                    p_norm: 0.0,
                },
                TraceRecord {
                    k: 10,
                    value: 3.0,
                    grad_norm: 0.0,
                    grad_norm_unreg: 0.0,
                    p_norm: 0.0,
                },
            ],
            iterates: vec![],
        };
        assert!(!geometric_decay_check(&adversarial, 2.0, 1.0, Some(1.0)));
    }

    #[test]
    fn deterministic_iterate_sequence() {
        let q = Quadratic::new(vec![1.0, 4.0], vec![1.0, 1.0]);
        let cfg = FgmConfig {
            max_iters: 50,
            grad_norm_target: None,
            record_trace: true,
            record_iterates: true,
        };
        let a = fgm_minimize(&q, &cfg).unwrap();
        let b = fgm_minimize(&q, &cfg).unwrap();
        assert_eq!(a.trace.iterates, b.trace.iterates);
        assert_eq!(a.p, b.p);
    }

    #[test]
    fn kappa_above_l_is_rejected() {
        struct Bad;
        impl SmoothObjective for Bad {
            fn dim(&self) -> usize {
                1
            }
            fn lipschitz(&self) -> f64 {
                1.0
            }
            fn strong_convexity(&self) -> f64 {
                2.0
            }
            fn value_grad(&self, _p: &[f64]) -> Result<(f64, Vec<f64>)> {
                Ok((0.0, vec![0.0]))
            }
        }
        assert!(matches!(
            fgm_minimize(&Bad, &FgmConfig::default()),
            Err(DsError::InvalidConfiguration(_))
        ));
    }

    #[test]
    fn max_iters_zero_reports_start_point() {
        let q = Quadratic::new(vec![2.0], vec![1.0]);
        let cfg = FgmConfig {
            max_iters: 0,
            grad_norm_target: None,
            record_trace: true,
            record_iterates: true,
        };
        let res = fgm_minimize(&q, &cfg).unwrap();
        assert_eq!(res.iterations, 0);
        assert_eq!(res.stop_reason, StopReason::MaxIters);
        assert_eq!(res.trace.records.len(), 1);
        assert_eq!(res.p, vec![0.0]);
    }
}
