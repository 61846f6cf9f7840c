//! Assembly of the regime-appropriate smoothed dual objective.
//!
//! The dual objective `θ(p) = f*(A*p) + g*(−p)` is regularized in up to two
//! stages: a quadratic term inside the conjugate of `f` (first smoothing,
//! parameter ρ) making the composition differentiable, and a `(κ/2)‖p‖²` term
//! (second smoothing) making it strongly convex. Either stage is skipped when
//! `f` is strongly convex (first) or `g` has a Lipschitz gradient (second).

use crate::error::{DsError, Result};
use crate::fgm::SmoothObjective;
use crate::linops::LinearMap;
use crate::oracles::{PrimalOracle, StrongOracle};
use crate::vec_ops::{dot, norm_sq};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// Smooth twice: ρ-regularize f*, add the κ-term.
    General,
    /// f strongly convex: skip the first smoothing.
    FStrong,
    /// g differentiable with Lipschitz gradient: skip the second smoothing.
    GSmooth,
    /// Skip both smoothings.
    Both,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::General => "GENERAL",
            Regime::FStrong => "F_STRONG",
            Regime::GSmooth => "G_SMOOTH",
            Regime::Both => "BOTH",
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = DsError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GENERAL" => Ok(Regime::General),
            "F_STRONG" => Ok(Regime::FStrong),
            "G_SMOOTH" => Ok(Regime::GSmooth),
            "BOTH" => Ok(Regime::Both),
            other => Err(DsError::InvalidArgument(format!("unknown regime {other}"))),
        }
    }
}

/// Pick the regime from the oracles' declared structure: skip the first
/// smoothing when `f` is strongly convex, the second when `∇g` is Lipschitz.
pub fn select_regime(f: &dyn PrimalOracle, g: &dyn StrongOracle) -> Regime {
    match (f.strong_convexity() > 0.0, g.grad_lipschitz().is_some()) {
        (true, true) => Regime::Both,
        (true, false) => Regime::FStrong,
        (false, true) => Regime::GSmooth,
        (false, false) => Regime::General,
    }
}

/// One evaluation of the smoothed dual: value, gradient, and the two primal
/// argmin points the gradient is built from (kept for primal recovery).
#[derive(Clone, Debug)]
pub struct DualEval {
    pub value: f64,
    pub grad: Vec<f64>,
    pub x_f: Vec<f64>,
    pub x_g: Vec<f64>,
}

/// Regime-tagged evaluable dual objective with its Lipschitz and
/// strong-convexity constants.
pub struct SmoothedDual {
    regime: Regime,
    rho: f64,
    kappa: f64,
    lipschitz: f64,
    a: Arc<dyn LinearMap>,
    f: Arc<dyn PrimalOracle>,
    g: Arc<dyn StrongOracle>,
}

impl SmoothedDual {
    /// `rho` is the first-smoothing parameter (ignored in F_STRONG/BOTH where
    /// the intrinsic ρ_f of `f` takes its place); `kappa` is the added
    /// strong-convexity modulus (ignored in G_SMOOTH/BOTH where κ is
    /// inherited from `∇g`'s Lipschitz constant).
    pub fn new(
        regime: Regime,
        a: Arc<dyn LinearMap>,
        f: Arc<dyn PrimalOracle>,
        g: Arc<dyn StrongOracle>,
        rho: f64,
        kappa: f64,
    ) -> Result<Self> {
        if a.dim_in() != f.dim() {
            return Err(DsError::DimensionMismatch {
                expected: a.dim_in(),
                got: f.dim(),
            });
        }
        if a.dim_out() != g.dim() {
            return Err(DsError::DimensionMismatch {
                expected: a.dim_out(),
                got: g.dim(),
            });
        }
        let norm_sq_a = a.norm_sq_bound();
        let inv_mu = 1.0 / g.mu();
        let (rho, kappa, lipschitz) = match regime {
            Regime::General => {
                if !(rho > 0.0) || !(kappa > 0.0) {
                    return Err(DsError::InvalidConfiguration(format!(
                        "GENERAL regime needs rho > 0 and kappa > 0 (got {rho}, {kappa})"
                    )));
                }
                (rho, kappa, norm_sq_a / rho + inv_mu + kappa)
            }
            Regime::FStrong => {
                let rho_f = f.strong_convexity();
                if !(rho_f > 0.0) {
                    return Err(DsError::InvalidConfiguration(
                        "F_STRONG regime needs a strongly convex f".into(),
                    ));
                }
                if !(kappa > 0.0) {
                    return Err(DsError::InvalidConfiguration(format!(
                        "F_STRONG regime needs kappa > 0, got {kappa}"
                    )));
                }
                (rho_f, kappa, norm_sq_a / rho_f + inv_mu + kappa)
            }
            Regime::GSmooth => {
                let gl = g.grad_lipschitz().ok_or_else(|| {
                    DsError::InvalidConfiguration(
                        "G_SMOOTH regime needs g with Lipschitz gradient".into(),
                    )
                })?;
                if !(rho > 0.0) {
                    return Err(DsError::InvalidConfiguration(format!(
                        "G_SMOOTH regime needs rho > 0, got {rho}"
                    )));
                }
                (rho, 1.0 / gl, norm_sq_a / rho + inv_mu)
            }
            Regime::Both => {
                let rho_f = f.strong_convexity();
                let gl = g.grad_lipschitz().ok_or_else(|| {
                    DsError::InvalidConfiguration(
                        "BOTH regime needs g with Lipschitz gradient".into(),
                    )
                })?;
                if !(rho_f > 0.0) {
                    return Err(DsError::InvalidConfiguration(
                        "BOTH regime needs a strongly convex f".into(),
                    ));
                }
                (rho_f, 1.0 / gl, norm_sq_a / rho_f + inv_mu)
            }
        };
        if kappa > lipschitz {
            return Err(DsError::InvalidConfiguration(format!(
                "kappa {kappa} exceeds Lipschitz constant {lipschitz}"
            )));
        }
        Ok(Self {
            regime,
            rho,
            kappa,
            lipschitz,
            a,
            f,
            g,
        })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn operator(&self) -> &Arc<dyn LinearMap> {
        &self.a
    }

    pub fn primal_oracle(&self) -> &Arc<dyn PrimalOracle> {
        &self.f
    }

    pub fn strong_oracle(&self) -> &Arc<dyn StrongOracle> {
        &self.g
    }

    /// Whether the `(κ/2)‖p‖²` term is part of value and gradient.
    pub fn has_regularizer_term(&self) -> bool {
        matches!(self.regime, Regime::General | Regime::FStrong)
    }

    fn rho_for_argmin(&self) -> f64 {
        // in F_STRONG/BOTH the oracle's intrinsic strong convexity carries
        // the argmin: no Moreau term is added and the stored rho (= ρ_f) is
        // only bookkeeping for L
        match self.regime {
            Regime::General | Regime::GSmooth => self.rho,
            Regime::FStrong | Regime::Both => 0.0,
        }
    }

    /// Value, gradient, and primal points of the smoothed dual at `p`.
    ///
    /// The value is reconstructed from the argmin outputs:
    /// `[⟨A*p,x_f⟩ − f(x_f) − (ρ/2)‖x_f‖²] + [−⟨p,x_g⟩ − g(x_g)]`, plus the
    /// κ-term when the second smoothing is active.
    pub fn eval(&self, p: &[f64]) -> Result<DualEval> {
        if p.len() != self.a.dim_out() {
            return Err(DsError::DimensionMismatch {
                expected: self.a.dim_out(),
                got: p.len(),
            });
        }
        let q = self.a.apply_adjoint(p)?;
        let x_f = self.f.regularized_argmin(&q, self.rho_for_argmin())?;
        let x_g = self.g.linear_tilt_argmin(p)?;
        let f_val = self.f.value(&x_f).finite().ok_or_else(|| {
            DsError::NumericalFailure("regularized argmin left dom f".into())
        })?;
        let g_val = self.g.value(&x_g).finite().ok_or_else(|| {
            DsError::NumericalFailure("linear-tilt argmin left dom g".into())
        })?;
        let mut value = dot(&q, &x_f) - f_val - 0.5 * self.rho_for_argmin() * norm_sq(&x_f)
            - dot(p, &x_g)
            - g_val;
        let ax_f = self.a.apply(&x_f)?;
        let mut grad: Vec<f64> = ax_f.iter().zip(&x_g).map(|(a, b)| a - b).collect();
        if self.has_regularizer_term() {
            value += 0.5 * self.kappa * norm_sq(p);
            for (gi, pi) in grad.iter_mut().zip(p) {
                *gi += self.kappa * pi;
            }
        }
        Ok(DualEval {
            value,
            grad,
            x_f,
            x_g,
        })
    }

    /// Strip the κ-term from a gradient of `eval`, yielding `∇θ_ρ(p)`
    /// (`= A·x_f − x_g` in every regime).
    pub fn unregularized_grad(&self, grad: &[f64], p: &[f64]) -> Vec<f64> {
        if self.has_regularizer_term() {
            grad.iter().zip(p).map(|(g, pi)| g - self.kappa * pi).collect()
        } else {
            grad.to_vec()
        }
    }

    /// θ_ρ(p): the dual value without the second-smoothing term.
    pub fn value_without_regularizer(&self, value: f64, p: &[f64]) -> f64 {
        if self.has_regularizer_term() {
            value - 0.5 * self.kappa * norm_sq(p)
        } else {
            value
        }
    }
}

impl SmoothObjective for SmoothedDual {
    fn dim(&self) -> usize {
        self.a.dim_out()
    }
    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
    fn strong_convexity(&self) -> f64 {
        self.kappa
    }
    fn regularizer_weight(&self) -> f64 {
        if self.has_regularizer_term() {
            self.kappa
        } else {
            0.0
        }
    }
    fn value_grad(&self, p: &[f64]) -> Result<(f64, Vec<f64>)> {
        let e = self.eval(p)?;
        Ok((e.value, e.grad))
    }
}

/// The sandwich interval `[θ_ρ(p), θ_ρ(p) + ρ·D_f]` that must contain the
/// unsmoothed dual value θ(p).
pub fn smoothed_sandwich_check(sd: &SmoothedDual, p: &[f64]) -> Result<(f64, f64)> {
    let d_f = sd.primal_oracle().domain_radius_sq_half();
    if !d_f.is_finite() {
        return Err(DsError::Unsupported(
            "sandwich interval needs a bounded dom f".into(),
        ));
    }
    let e = sd.eval(p)?;
    let lower = sd.value_without_regularizer(e.value, p);
    Ok((lower, lower + sd.rho_for_argmin() * d_f))
}
