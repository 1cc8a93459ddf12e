use serde::Serialize;

use super::{curvature_quotient, ExtReal};
use crate::cones::critical_contains;
use crate::control::ControlSpec;
use crate::error::{Error, Result};
use crate::fnspace::{time_slice_l1, traj_dot, traj_norm, GridFunction};
use crate::sparsity::{j_dir_deriv, j_value, slice_l1_dir_derivs, Sign, SignClassification, SparsityKind};

/// Tolerance of the exact identities, relative to `max(1, |operands|)`.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Recovery direction `v_t` for a critical `v`.
///
/// On cells where `u_bar` lies within `sqrt(t)` of a bound or of zero
/// (without being there), `v_t = 0`; elsewhere `v_t` is `v` clipped to
/// `[-1/sqrt(t), 1/sqrt(t)]`. For `j3` spatial points with
/// `0 < ||u_bar(x)|| < sqrt(t)` are zeroed as well, and points off the
/// support of `u_bar` keep `v(x)` unless `||v(x)|| > 1/sqrt(t)`, in which
/// case they are zeroed.
pub fn recovery_sequence(
    ctrl: &ControlSpec,
    u_bar: &GridFunction,
    v: &GridFunction,
    t: f64,
    grad: &GridFunction,
    lambda: &GridFunction,
    tol: f64,
) -> Result<GridFunction> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("t must be positive, got {t}")));
    }
    if !critical_contains(ctrl, u_bar, grad, lambda, v, tol)?.member {
        return Err(Error::NotCritical);
    }
    let spec = *u_bar.spec();
    let nt = spec.n_time();
    let cls = SignClassification::new(u_bar);
    let b = ctrl.bounds;
    let r = t.sqrt();
    let in_band = |i: usize| {
        let u = u_bar.values()[i];
        if cls.cells[i] == Sign::Zero || b.at_lower(u) || b.at_upper(u) {
            return false;
        }
        u - b.alpha < r || b.beta - u < r || u.abs() < r
    };
    let mut out = Vec::with_capacity(spec.len());
    for s in 0..spec.n_space() {
        let vs = v.space_slice(s);
        if ctrl.kind == SparsityKind::J3 && !cls.space_nonzero[s] {
            let keep = traj_norm(vs, spec.cell_measure_time()) <= 1.0 / r;
            out.extend(vs.iter().map(|&x| if keep { x } else { 0.0 }));
            continue;
        }
        let small_slice = ctrl.kind == SparsityKind::J3 && cls.space_norms[s] < r;
        for (k, &x) in vs.iter().enumerate() {
            let i = s * nt + k;
            out.push(if small_slice || in_band(i) { 0.0 } else { x.clamp(-1.0 / r, 1.0 / r) });
        }
    }
    Ok(GridFunction::from_vec(spec, out))
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryCheck {
    pub t: f64,
    /// `|v_t| <= |v|` with matching signs, which yields `v_t -> v`.
    pub dominated: bool,
    /// `||v_t - v||_{L2}`
    pub distance: f64,
    pub critical: bool,
    /// `u_bar + t v_t` inside the bounds, no tolerance.
    pub feasible: bool,
    /// Exact increment identity of the functional (per time cell for `j2`,
    /// per spatial point for `j3`).
    pub identity: bool,
    pub identity_residual: f64,
    /// Curvature quotient at `w = -F'(u_bar)` along `v_t`.
    pub quotient: ExtReal,
}

impl RecoveryCheck {
    pub fn all_hold(&self) -> bool {
        self.dominated && self.critical && self.feasible && self.identity
    }
}

pub fn check_recovery_properties(
    ctrl: &ControlSpec,
    u_bar: &GridFunction,
    v: &GridFunction,
    t: f64,
    grad: &GridFunction,
    lambda: &GridFunction,
    tol: f64,
) -> Result<RecoveryCheck> {
    let vt = recovery_sequence(ctrl, u_bar, v, t, grad, lambda, tol)?;
    let spec = *u_bar.spec();
    let cls = SignClassification::new(u_bar);
    let dominated = vt.values().iter().zip(v.values()).all(|(&a, &b)| a == 0.0 || (a * b > 0.0 && a.abs() <= b.abs()));
    let moved = u_bar.axpy(t, &vt);
    let feasible = moved.values().iter().all(|&x| ctrl.bounds.alpha <= x && x <= ctrl.bounds.beta);
    let critical = critical_contains(ctrl, u_bar, grad, lambda, &vt, tol)?.member;

    let identity_residual = match ctrl.kind {
        SparsityKind::J1 => {
            let lhs = j_value(SparsityKind::J1, &moved) - j_value(SparsityKind::J1, u_bar);
            let rhs = t * j_dir_deriv(SparsityKind::J1, u_bar, &vt, &cls);
            (lhs - rhs).abs() / j_value(SparsityKind::J1, u_bar).max(1.0)
        }
        SparsityKind::J2 => {
            let before = time_slice_l1(u_bar);
            let after = time_slice_l1(&moved);
            let d = slice_l1_dir_derivs(&cls, &vt);
            before
                .iter()
                .zip(&after)
                .zip(&d)
                .map(|((b, a), d)| ((a - b) - t * d).abs() / b.max(1.0))
                .fold(0.0, f64::max)
        }
        SparsityKind::J3 => {
            let dt = spec.cell_measure_time();
            let mut worst: f64 = 0.0;
            for s in 0..spec.n_space() {
                let (us, ms, ws) = (u_bar.space_slice(s), moved.space_slice(s), vt.space_slice(s));
                let (nu, nm) = (traj_norm(us, dt), traj_norm(ms, dt));
                let lhs = nm - nu;
                let rhs = if cls.space_nonzero[s] {
                    let k = nm + nu;
                    t * (2.0 * traj_dot(us, ws, dt) + t * traj_dot(ws, ws, dt)) / k
                } else {
                    t * traj_norm(ws, dt)
                };
                worst = worst.max((lhs - rhs).abs() / nu.max(1.0));
            }
            worst
        }
    };
    let w = grad.scale(-1.0);
    Ok(RecoveryCheck {
        t,
        dominated,
        distance: vt.sub(v).norm_l2(),
        critical,
        feasible,
        identity: identity_residual <= IDENTITY_TOL,
        identity_residual,
        quotient: curvature_quotient(ctrl, u_bar, &w, &vt, t),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::Bounds;
    use crate::fnspace::GridSpec;

    fn setup(kind: SparsityKind) -> (ControlSpec, GridFunction, GridFunction, GridFunction, GridFunction) {
        let spec = GridSpec::unit(2, 3).unwrap();
        let ctrl = ControlSpec::new(kind, 1.0, Bounds::new(-1.0, 1.0).unwrap()).unwrap();
        let u = GridFunction::new(spec, vec![0.5, 0.01, 1.0, -0.3, -0.995, 0.7]).unwrap();
        let lam = crate::sparsity::canonical_subgradient(kind, &u, &GridFunction::zeros(spec), 1.0, ctrl.bounds).unwrap();
        let grad = lam.scale(-1.0);
        let v = GridFunction::new(spec, vec![1.0, 2.0, -1.0, 300.0, 0.5, -0.2]).unwrap();
        (ctrl, u, grad, lam, v)
    }

    #[test]
    fn zero_direction_gives_zero() {
        for kind in SparsityKind::ALL {
            let (ctrl, u, grad, lam, _) = setup(kind);
            let zero = GridFunction::zeros(*u.spec());
            let c = check_recovery_properties(&ctrl, &u, &zero, 1e-3, &grad, &lam, 1e-10).unwrap();
            assert!(c.all_hold());
            assert_eq!(c.quotient, ExtReal::ZERO);
        }
    }

    #[test]
    fn bands_and_clipping() {
        let (ctrl, u, grad, lam, v) = setup(SparsityKind::J1);
        let vt = recovery_sequence(&ctrl, &u, &v, 1e-2, &grad, &lam, 1e-10).unwrap();
        // |u| = 0.01 < 0.1 and 1 - 0.995 < 0.1 are zeroed; 300 is clipped to 10.
        assert_eq!(vt.values(), &[1.0, 0.0, -1.0, 10.0, 0.0, -0.2]);
        let big = recovery_sequence(&ctrl, &u, &v, 4.0, &grad, &lam, 1e-10).unwrap();
        // sqrt(t) = 2 covers every band; only the cell at the bound survives.
        assert_eq!(big.values(), &[0.0, 0.0, -0.5, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn properties_hold_along_schedule() {
        for kind in SparsityKind::ALL {
            let (ctrl, u, grad, lam, v) = setup(kind);
            for t in [1e-2, 1e-3, 1e-4] {
                let c = check_recovery_properties(&ctrl, &u, &v, t, &grad, &lam, 1e-10).unwrap();
                assert!(c.all_hold(), "{kind} t={t}: {c:?}");
            }
        }
    }

    #[test]
    fn non_critical_direction_is_rejected() {
        let (ctrl, u, grad, lam, _) = setup(SparsityKind::J1);
        let v = GridFunction::constant(*u.spec(), 1.0);
        assert!(matches!(recovery_sequence(&ctrl, &u, &v, 1e-3, &grad, &lam, 1e-10), Err(Error::NotCritical)));
    }
}
