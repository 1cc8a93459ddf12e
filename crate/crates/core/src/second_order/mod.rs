//! Second subderivatives of `G = delta_{U_ad} + mu j`, curvature difference
//! quotients, and recovery sequences.

mod ext_real;
mod forms;
mod recovery;

use serde::Serialize;

pub use ext_real::ExtReal;
pub use forms::{lower_taylor_residual_j2, psi_eval, qform_j3, theta_j2, PsiValues, TaylorGap};
pub use recovery::{check_recovery_properties, recovery_sequence, RecoveryCheck};

use crate::cones::{critical_contains, stationarity_violation};
use crate::control::ControlSpec;
use crate::error::{Error, Result};
use crate::fnspace::GridFunction;
use crate::sparsity::{j_increment, SignClassification, SparsityKind};

/// Integrand size beyond which a finite `j3` curvature value is flagged as
/// a grid image of a divergent integral.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// `[G(u + t v) - G(u) - t <w, v>] / (t^2 / 2)`; `+inf` if `u + t v` leaves `U_ad`.
///
/// The increment of `j` is evaluated in cancellation-free form, so the
/// quotient stays accurate for small `t`.
pub fn curvature_quotient(ctrl: &ControlSpec, u_bar: &GridFunction, w: &GridFunction, v: &GridFunction, t: f64) -> ExtReal {
    assert!(t > 0.0, "t must be positive");
    assert_eq!(u_bar.spec(), v.spec(), "grid functions live on different grids");
    let b = ctrl.bounds;
    let slack = 4.0 * f64::EPSILON * b.beta.max(-b.alpha);
    let h = v.scale(t);
    if u_bar.values().iter().zip(h.values()).any(|(&u, &d)| b.violation(u + d) > slack) {
        return ExtReal::PosInf;
    }
    let num = ctrl.mu * j_increment(ctrl.kind, u_bar, &h) - t * w.dot(v);
    ExtReal::from(2.0 * num / (t * t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondSubderivative {
    pub value: ExtReal,
    /// Set when the `j3` integrand exceeds [`DIVERGENCE_THRESHOLD`].
    pub divergent: bool,
}

/// `G''(u_bar, -F'(u_bar); v)` from the closed forms.
///
/// Returns `+inf` off the critical cone, `0` for `j1` on the cone,
/// `mu * Theta` for `j2` with `u_bar != 0` and the weighted `Omega_u`
/// integral for `j3`. For `j2` at `u_bar = 0` the value on the critical cone
/// is not known and [`Error::UnknownValue`] is returned.
pub fn second_subderivative(
    ctrl: &ControlSpec,
    u_bar: &GridFunction,
    grad: &GridFunction,
    lambda: &GridFunction,
    v: &GridFunction,
    tol: f64,
) -> Result<SecondSubderivative> {
    let residual = stationarity_violation(ctrl, u_bar, grad, lambda);
    if residual > tol {
        return Err(Error::NotStationary { residual });
    }
    let finite = |x: f64| SecondSubderivative { value: ExtReal::Finite(x), divergent: false };
    if !critical_contains(ctrl, u_bar, grad, lambda, v, tol)?.member {
        return Ok(SecondSubderivative { value: ExtReal::PosInf, divergent: false });
    }
    let cls = SignClassification::new(u_bar);
    match ctrl.kind {
        SparsityKind::J1 => Ok(finite(0.0)),
        SparsityKind::J2 if cls.is_zero() => Err(Error::UnknownValue),
        SparsityKind::J2 => Ok(finite(ctrl.mu * forms::theta_j2_with(u_bar, v, &cls)?)),
        SparsityKind::J3 => {
            let parts = forms::j3_integrand(u_bar, v, &cls);
            let divergent = parts.iter().any(|&(_, q)| q > DIVERGENCE_THRESHOLD);
            let sum = parts.iter().map(|&(_, q)| q).sum::<f64>() * v.spec().cell_measure_space();
            Ok(SecondSubderivative { value: ExtReal::Finite(ctrl.mu * sum), divergent })
        }
    }
}
