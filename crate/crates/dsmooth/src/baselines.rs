//! ISTA and FISTA primal baselines for the deblurring comparisons.
//!
//! Both minimize the composite objective `‖Ax−b‖² + r(x)` with
//! `r(x) = λ‖x‖₁ + δ_{[0,u]^n}` (or its `λ(‖x‖²+‖x‖₁)` variant) using the
//! fixed step `1/(2‖A‖²)` and the closed-form prox of `r` restricted to the
//! nonnegative box.

use crate::error::{DsError, Result};
use crate::linops::LinearMap;
use crate::vec_ops::norm_sq;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegularizerKind {
    L1,
    L2L1,
}

/// Primal composite problem `h(x) + r(x)` with `h(x) = ‖Ax−b‖²`.
#[derive(Clone)]
pub struct CompositeProblem {
    pub a: Arc<dyn LinearMap>,
    pub b: Vec<f64>,
    pub lambda: f64,
    pub upper: f64,
    pub kind: RegularizerKind,
}

impl CompositeProblem {
    pub fn new(
        a: Arc<dyn LinearMap>,
        b: Vec<f64>,
        lambda: f64,
        upper: f64,
        kind: RegularizerKind,
    ) -> Result<Self> {
        if a.dim_out() != b.len() {
            return Err(DsError::DimensionMismatch {
                expected: a.dim_out(),
                got: b.len(),
            });
        }
        if lambda < 0.0 || !(upper > 0.0) {
            return Err(DsError::InvalidArgument(format!(
                "composite problem needs lambda >= 0 and upper > 0 (got {lambda}, {upper})"
            )));
        }
        Ok(Self {
            a,
            b,
            lambda,
            upper,
            kind,
        })
    }

    /// Fixed step 1/L_h with L_h = 2‖A‖².
    pub fn step(&self) -> f64 {
        1.0 / (2.0 * self.a.norm_sq_bound())
    }

    /// ∇h(x) = 2A*(Ax − b).
    pub fn smooth_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.a.apply(x)?;
        for (ri, bi) in r.iter_mut().zip(&self.b) {
            *ri -= bi;
        }
        let mut g = self.a.apply_adjoint(&r)?;
        for gi in &mut g {
            *gi *= 2.0;
        }
        Ok(g)
    }

    /// Full objective `‖Ax−b‖² + r(x)` for iterates inside the box.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let ax = self.a.apply(x)?;
        let h: f64 = ax.iter().zip(&self.b).map(|(a, b)| (a - b) * (a - b)).sum();
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        let r = match self.kind {
            RegularizerKind::L1 => self.lambda * l1,
            RegularizerKind::L2L1 => self.lambda * (norm_sq(x) + l1),
        };
        Ok(h + r)
    }

    fn prox(&self, v: &[f64], t: f64) -> Vec<f64> {
        match self.kind {
            RegularizerKind::L1 => prox_step_l1(v, t, self.lambda, self.upper),
            RegularizerKind::L2L1 => prox_step_l2l1(v, t, self.lambda, self.upper),
        }
    }
}

/// Prox of `tλ‖·‖₁ + δ_{[0,u]^n}`: since the domain is the nonnegative box,
/// this is `clamp(v_i − tλ, 0, u)` componentwise.
pub fn prox_step_l1(v: &[f64], t: f64, lambda: f64, upper: f64) -> Vec<f64> {
    v.iter()
        .map(|vi| (vi - t * lambda).clamp(0.0, upper))
        .collect()
}

/// Prox of `tλ(‖·‖² + ‖·‖₁) + δ_{[0,u]^n}`:
/// `clamp((v_i − tλ)/(1 + 2tλ), 0, u)` componentwise.
pub fn prox_step_l2l1(v: &[f64], t: f64, lambda: f64, upper: f64) -> Vec<f64> {
    let denom = 1.0 + 2.0 * t * lambda;
    v.iter()
        .map(|vi| ((vi - t * lambda) / denom).clamp(0.0, upper))
        .collect()
}

#[derive(Clone, Debug)]
pub struct BaselineRun {
    pub x_final: Vec<f64>,
    /// `objective[k]` = F(x_k), one record per iterate including k = 0.
    pub objective: Vec<f64>,
    /// Present only when requested; `iterates[k]` is x_k.
    pub iterates: Vec<Vec<f64>>,
}

fn check_start(problem: &CompositeProblem, x0: &[f64]) -> Result<()> {
    if x0.len() != problem.a.dim_in() {
        return Err(DsError::DimensionMismatch {
            expected: problem.a.dim_in(),
            got: x0.len(),
        });
    }
    if x0.iter().any(|v| *v < 0.0 || *v > problem.upper) {
        return Err(DsError::InvalidArgument(
            "baseline start point must lie in [0,u]^n".into(),
        ));
    }
    Ok(())
}

pub fn ista_run(
    problem: &CompositeProblem,
    x0: &[f64],
    iters: usize,
    record_iterates: bool,
) -> Result<BaselineRun> {
    check_start(problem, x0)?;
    let t = problem.step();
    let mut x = x0.to_vec();
    let mut objective = vec![problem.objective(&x)?];
    let mut iterates = if record_iterates { vec![x.clone()] } else { vec![] };
    for _ in 0..iters {
        let g = problem.smooth_grad(&x)?;
        let v: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
        x = problem.prox(&v, t);
        objective.push(problem.objective(&x)?);
        if record_iterates {
            iterates.push(x.clone());
        }
    }
    Ok(BaselineRun {
        x_final: x,
        objective,
        iterates,
    })
}

pub fn fista_run(
    problem: &CompositeProblem,
    x0: &[f64],
    iters: usize,
    record_iterates: bool,
) -> Result<BaselineRun> {
    check_start(problem, x0)?;
    let step = problem.step();
    let mut x = x0.to_vec();
    let mut y = x0.to_vec();
    let mut t = 1.0f64;
    let mut objective = vec![problem.objective(&x)?];
    let mut iterates = if record_iterates { vec![x.clone()] } else { vec![] };
    for _ in 0..iters {
        let g = problem.smooth_grad(&y)?;
        let v: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - step * gi).collect();
        let x_next = problem.prox(&v, step);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = x_next
            .iter()
            .zip(&x)
            .map(|(xn, xo)| xn + beta * (xn - xo))
            .collect();
        x = x_next;
        t = t_next;
        objective.push(problem.objective(&x)?);
        if record_iterates {
            iterates.push(x.clone());
        }
    }
    Ok(BaselineRun {
        x_final: x,
        objective,
        iterates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{DenseMatrix, Identity};

    fn grid_min_1d(obj: impl Fn(f64) -> f64, upper: f64, fine: f64) -> f64 {
        let coarse = (upper / 1000.0).max(fine);
        let mut best = 0.0;
        let mut best_v = obj(0.0);
        let mut x = 0.0;
        while x <= upper {
            let v = obj(x);
            if v < best_v {
                best_v = v;
                best = x;
            }
            x += coarse;
        }
        let lo = (best - 2.0 * coarse).max(0.0);
        let hi = (best + 2.0 * coarse).min(upper);
        let mut x = lo;
        while x <= hi {
            let v = obj(x);
            if v < best_v {
                best_v = v;
                best = x;
            }
            x += fine;
        }
        best
    }

    #[test]
    fn prox_l1_examples() {
        // grid-search oracle over tλ|x| + ½(x−v)²
        let got = prox_step_l1(&[0.05], 1.0, 0.02, 0.1)[0];
        assert!((got - 0.03).abs() < 1e-12);
        let oracle = grid_min_1d(|x| 0.02 * x + 0.5 * (x - 0.05) * (x - 0.05), 0.1, 1e-6);
        assert!((got - oracle).abs() < 2e-6);
        assert_eq!(prox_step_l1(&[-1.0], 1.0, 0.02, 0.1), vec![0.0]);
        assert_eq!(prox_step_l1(&[5.0], 1.0, 0.02, 0.1), vec![0.1]);
    }

    #[test]
    fn prox_l2l1_examples() {
        // λ → 0 limit is plain box projection
        assert_eq!(prox_step_l2l1(&[0.7, -0.2, 1.5], 0.5, 0.0, 1.0), vec![0.7, 0.0, 1.0]);
        let got = prox_step_l2l1(&[0.5], 0.25, 0.1, 1.0)[0];
        assert!((got - (0.5 - 0.025) / 1.05).abs() < 1e-15);
        let oracle = grid_min_1d(
            |x| 0.25 * 0.1 * (x * x + x) + 0.5 * (x - 0.5) * (x - 0.5),
            1.0,
            1e-7,
        );
        assert!((got - oracle).abs() < 2e-7);
        assert_eq!(prox_step_l2l1(&[0.0], 0.25, 0.1, 1.0), vec![0.0]);
    }

    #[test]
    fn ista_one_step_on_identity() {
        // A = id, b = 0, λ = 0, u = 1, x0 = 1: ∇h = 2x, t = 1/2, x₁ = 0
        let problem = CompositeProblem::new(
            Arc::new(Identity::new(1)),
            vec![0.0],
            0.0,
            1.0,
            RegularizerKind::L1,
        )
        .unwrap();
        let run = ista_run(&problem, &[1.0], 1, false).unwrap();
        assert_eq!(run.x_final, vec![0.0]);
    }

    #[test]
    fn minimizer_is_fixed_point() {
        let problem = CompositeProblem::new(
            Arc::new(Identity::new(2)),
            vec![0.4, 0.6],
            0.0,
            1.0,
            RegularizerKind::L1,
        )
        .unwrap();
        let x_star = vec![0.4, 0.6];
        let run = ista_run(&problem, &x_star, 5, false).unwrap();
        assert_eq!(run.x_final, x_star);
        for v in &run.objective {
            assert!(*v < 1e-30);
        }
    }

    #[test]
    fn fista_beats_ista_after_warmup() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 0.4, 0.4, 2.0]).unwrap();
        let problem = CompositeProblem::new(
            Arc::new(a),
            vec![0.8, -0.3],
            0.05,
            1.0,
            RegularizerKind::L1,
        )
        .unwrap();
        let x0 = vec![0.5, 0.5];
        let ista = ista_run(&problem, &x0, 40, false).unwrap();
        let fista = fista_run(&problem, &x0, 40, false).unwrap();
        // FISTA is not monotone, so compare best-so-far values; tiny slack
        // absorbs its ripple once both methods sit at the optimum
        let mut best_f = f64::INFINITY;
        let mut best_i = f64::INFINITY;
        for k in 0..=40 {
            best_f = best_f.min(fista.objective[k]);
            best_i = best_i.min(ista.objective[k]);
            if k >= 5 {
                assert!(best_f <= best_i + 1e-12, "k={k}: {best_f} > {best_i}");
            }
        }
    }

    #[test]
    fn ista_objective_monotone_and_iterates_in_box() {
        let a = DenseMatrix::new(3, 3, vec![0.9, 0.1, 0.0, 0.1, 0.8, 0.1, 0.0, 0.1, 0.7]).unwrap();
        let problem = CompositeProblem::new(
            Arc::new(a),
            vec![0.5, 0.2, 0.9],
            0.02,
            1.0,
            RegularizerKind::L2L1,
        )
        .unwrap();
        let run = ista_run(&problem, &[0.5; 3], 60, true).unwrap();
        for w in run.objective.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        for x in &run.iterates {
            assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn start_point_outside_box_is_rejected() {
        let problem = CompositeProblem::new(
            Arc::new(Identity::new(1)),
            vec![0.0],
            0.1,
            1.0,
            RegularizerKind::L1,
        )
        .unwrap();
        assert!(ista_run(&problem, &[1.5], 1, false).is_err());
        assert!(fista_run(&problem, &[-0.1], 1, false).is_err());
    }
}
