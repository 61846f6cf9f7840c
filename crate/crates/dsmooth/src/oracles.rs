//! Convex-function oracles for the two halves of the composite objective
//! `f(x) + g(Ax)`.
//!
//! Everything the smoothed dual needs from `f` and `g` reduces to two argmin
//! maps: the ρ-regularized map `x_{f,q,ρ}` minimizing
//! `f(x) − ⟨q,x⟩ + (ρ/2)‖x‖²`, and the linear-tilt map `x_{g,p}` minimizing
//! `⟨p,x⟩ + g(x)`. Conjugate values are reconstructed from these argmin
//! outputs rather than from separate formulas, so dual values and gradients
//! stay mutually consistent.

use crate::error::{DsError, Result};
use crate::vec_ops::norm_sq;
use std::ops::Add;

/// Extended real value: either finite or +∞ (indicator functions outside
/// their domain). Never a sentinel float inside arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(*v),
            ExtReal::PosInf => None,
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

/// Oracle for the (possibly nonsmooth, bounded-domain) function `f`.
pub trait PrimalOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> ExtReal;

    /// Unique minimizer of `f(x) − ⟨q,x⟩ + (ρ/2)‖x‖²`. Valid for `ρ > 0`, or
    /// for `ρ = 0` when the oracle is intrinsically strongly convex.
    fn regularized_argmin(&self, q: &[f64], rho: f64) -> Result<Vec<f64>>;

    /// `D_f = sup{‖x‖²/2 : x ∈ dom f}`; `f64::INFINITY` for unbounded domains.
    fn domain_radius_sq_half(&self) -> f64;

    /// Strong-convexity modulus `ρ_f` of `f` (0 when merely convex).
    fn strong_convexity(&self) -> f64 {
        0.0
    }
}

/// Oracle for the μ-strongly convex function `g`.
pub trait StrongOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, y: &[f64]) -> ExtReal;

    /// `x_{g,p} = ∇g*(−p)`, the unique minimizer of `⟨p,x⟩ + g(x)`.
    fn linear_tilt_argmin(&self, p: &[f64]) -> Result<Vec<f64>>;

    fn mu(&self) -> f64;

    /// Lipschitz constant of `∇g` when `g` is everywhere differentiable with
    /// Lipschitz gradient; `None` otherwise.
    fn grad_lipschitz(&self) -> Option<f64>;
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(DsError::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.max(lo).min(hi)
}

/// Componentwise ρ-regularized argmin for `f(x) = λ‖x‖₁ + δ_{[0,u]^n}(x)`:
/// `clamp((q_i − λ)/ρ, 0, u)`.
pub fn box_l1_regularized_argmin(q: &[f64], rho: f64, lambda: f64, upper: f64) -> Result<Vec<f64>> {
    if !(rho > 0.0) {
        return Err(DsError::InvalidArgument(format!(
            "box_l1_regularized_argmin needs rho > 0, got {rho}"
        )));
    }
    Ok(q.iter().map(|qi| clamp((qi - lambda) / rho, 0.0, upper)).collect())
}

/// Componentwise argmin for `f(x) = λ(‖x‖² + ‖x‖₁) + δ_{[0,u]^n}(x)` with an
/// optional extra ρ-regularization: `clamp((q_i − λ)/(2λ + ρ), 0, u)`.
pub fn box_l2l1_argmin(q: &[f64], rho: f64, lambda: f64, upper: f64) -> Result<Vec<f64>> {
    if !(lambda > 0.0) {
        return Err(DsError::InvalidArgument(format!(
            "box_l2l1_argmin needs lambda > 0, got {lambda}"
        )));
    }
    if rho < 0.0 {
        return Err(DsError::InvalidArgument(format!(
            "box_l2l1_argmin needs rho >= 0, got {rho}"
        )));
    }
    let denom = 2.0 * lambda + rho;
    Ok(q.iter().map(|qi| clamp((qi - lambda) / denom, 0.0, upper)).collect())
}

/// `x_{g,p} = b − p/2` for `g(y) = ‖y−b‖²`; satisfies `2(x−b) + p = 0`.
pub fn squared_distance_tilt_argmin(p: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    check_dim(b.len(), p.len())?;
    Ok(b.iter().zip(p).map(|(bi, pi)| bi - 0.5 * pi).collect())
}

/// `f(x) = λ‖x‖₁ + δ_{[0,u]^n}(x)`. Merely convex; the general dual pipeline
/// must regularize it with ρ > 0.
pub struct BoxL1 {
    lambda: f64,
    upper: f64,
    n: usize,
}

impl BoxL1 {
    pub fn new(lambda: f64, upper: f64, n: usize) -> Result<Self> {
        if lambda < 0.0 || !(upper > 0.0) || n == 0 {
            return Err(DsError::InvalidArgument(format!(
                "BoxL1 needs lambda >= 0, upper > 0, n > 0 (got {lambda}, {upper}, {n})"
            )));
        }
        Ok(Self { lambda, upper, n })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

impl PrimalOracle for BoxL1 {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> ExtReal {
        if x.len() != self.n || x.iter().any(|&v| v < 0.0 || v > self.upper) {
            return ExtReal::PosInf;
        }
        ExtReal::Finite(self.lambda * x.iter().map(|v| v.abs()).sum::<f64>())
    }

    fn regularized_argmin(&self, q: &[f64], rho: f64) -> Result<Vec<f64>> {
        check_dim(self.n, q.len())?;
        box_l1_regularized_argmin(q, rho, self.lambda, self.upper)
    }

    fn domain_radius_sq_half(&self) -> f64 {
        self.n as f64 * self.upper * self.upper / 2.0
    }
}

/// `f(x) = λ(‖x‖² + ‖x‖₁) + δ_{[0,u]^n}(x)`, 2λ-strongly convex.
pub struct BoxL2L1 {
    lambda: f64,
    upper: f64,
    n: usize,
}

impl BoxL2L1 {
    pub fn new(lambda: f64, upper: f64, n: usize) -> Result<Self> {
        if !(lambda > 0.0) || !(upper > 0.0) || n == 0 {
            return Err(DsError::InvalidArgument(format!(
                "BoxL2L1 needs lambda > 0, upper > 0, n > 0 (got {lambda}, {upper}, {n})"
            )));
        }
        Ok(Self { lambda, upper, n })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

impl PrimalOracle for BoxL2L1 {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> ExtReal {
        if x.len() != self.n || x.iter().any(|&v| v < 0.0 || v > self.upper) {
            return ExtReal::PosInf;
        }
        let l2 = norm_sq(x);
        let l1: f64 = x.iter().map(|v| v.abs()).sum();
        ExtReal::Finite(self.lambda * (l2 + l1))
    }

    fn regularized_argmin(&self, q: &[f64], rho: f64) -> Result<Vec<f64>> {
        check_dim(self.n, q.len())?;
        box_l2l1_argmin(q, rho, self.lambda, self.upper)
    }

    fn domain_radius_sq_half(&self) -> f64 {
        self.n as f64 * self.upper * self.upper / 2.0
    }

    fn strong_convexity(&self) -> f64 {
        2.0 * self.lambda
    }
}

/// `g(y) = ‖y−b‖²`: 2-strongly convex, gradient Lipschitz constant 2.
pub struct SquaredDistance {
    b: Vec<f64>,
}

impl SquaredDistance {
    pub fn new(b: Vec<f64>) -> Self {
        Self { b }
    }

    pub fn observed(&self) -> &[f64] {
        &self.b
    }
}

impl StrongOracle for SquaredDistance {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, y: &[f64]) -> ExtReal {
        if y.len() != self.b.len() {
            return ExtReal::PosInf;
        }
        ExtReal::Finite(y.iter().zip(&self.b).map(|(yi, bi)| (yi - bi) * (yi - bi)).sum())
    }

    fn linear_tilt_argmin(&self, p: &[f64]) -> Result<Vec<f64>> {
        squared_distance_tilt_argmin(p, &self.b)
    }

    fn mu(&self) -> f64 {
        2.0
    }

    fn grad_lipschitz(&self) -> Option<f64> {
        Some(2.0)
    }
}

/// Exact `D_f` of a box-domain oracle (`n·u²/2`), or `+∞` for unbounded
/// domains.
pub fn domain_radius(oracle: &dyn PrimalOracle) -> f64 {
    oracle.domain_radius_sq_half()
}
