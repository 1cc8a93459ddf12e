//! Closed-form curvature terms of `j2` and `j3`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fnspace::{traj_dot, traj_norm, GridFunction};
use crate::sparsity::{j_dir_deriv, j_increment, slice_l1_dir_derivs, Sign, SignClassification, SparsityKind};

/// `Theta(u, v) = (int_0^T j_Omega'(u(t); v(t))^2 dt - j2'(u; v)^2) / j2(u)`.
pub fn theta_j2(u_bar: &GridFunction, v: &GridFunction) -> Result<f64> {
    let cls = SignClassification::new(u_bar);
    theta_j2_with(u_bar, v, &cls)
}

pub(crate) fn theta_j2_with(u_bar: &GridFunction, v: &GridFunction, cls: &SignClassification) -> Result<f64> {
    u_bar.spec().check_same(v.spec())?;
    if cls.j2 <= cls.tol {
        return Err(Error::ZeroBase);
    }
    let dt = v.spec().cell_measure_time();
    let d = slice_l1_dir_derivs(cls, v);
    let jd = j_dir_deriv(SparsityKind::J2, u_bar, v, cls);
    Ok((traj_dot(&d, &d, dt) - jd * jd) / cls.j2)
}

/// `q(v) = int_{Omega_sigma} (||v(x)||^2 - (u(x), v(x))^2 / ||u(x)||^2) / ||u(x)|| dx`
/// over `Omega_sigma = {x : ||u(x)||_{L2(0,T)} >= sigma}`.
pub fn qform_j3(u_bar: &GridFunction, v: &GridFunction, sigma: f64) -> Result<f64> {
    u_bar.spec().check_same(v.spec())?;
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let cls = SignClassification::new(u_bar);
    Ok(j3_integrand(u_bar, v, &cls).into_iter().filter(|&(n, _)| n >= sigma).map(|(_, q)| q).sum::<f64>()
        * v.spec().cell_measure_space())
}

/// `(||u(x)||, integrand)` for every `x in Omega_u`.
pub(crate) fn j3_integrand(u_bar: &GridFunction, v: &GridFunction, cls: &SignClassification) -> Vec<(f64, f64)> {
    let spec = v.spec();
    let (nt, dt) = (spec.n_time(), spec.cell_measure_time());
    let mut out = Vec::new();
    for s in 0..spec.n_space() {
        if !cls.space_nonzero[s] {
            continue;
        }
        let n = cls.space_norms[s];
        let us: Vec<f64> = u_bar
            .space_slice(s)
            .iter()
            .enumerate()
            .map(|(k, &x)| if cls.cells[s * nt + k] == Sign::Zero { 0.0 } else { x })
            .collect();
        let vs = v.space_slice(s);
        let p = traj_dot(&us, vs, dt) / n;
        // ||v||^2 - p^2 >= 0 by Cauchy-Schwarz; clip rounding.
        out.push((n, (traj_dot(vs, vs, dt) - p * p).max(0.0) / n));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiValues {
    /// `Psi(f) = ||f||_{L2(0,T)}`
    pub value: f64,
    /// `Psi'(f) g`
    pub d1: f64,
    /// `Psi''(f) g^2`
    pub d2: f64,
    /// `Psi'''(f) g^3`
    pub d3: f64,
}

const PSI_ZERO_TOL: f64 = 1e-12;

/// Derivatives of `Psi(f) = ||f||_{L2(0,T)}` for trajectories sampled on time cells of width `dt`.
pub fn psi_eval(f: &[f64], g: &[f64], dt: f64) -> Result<PsiValues> {
    if f.len() != g.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {} time cells", f.len(), g.len())));
    }
    let nf = traj_norm(f, dt);
    if nf <= PSI_ZERO_TOL {
        return Err(Error::ZeroBase);
    }
    let fg = traj_dot(f, g, dt);
    let gg = traj_dot(g, g, dt);
    Ok(PsiValues {
        value: nf,
        d1: fg / nf,
        d2: ((gg - fg * fg / (nf * nf)) / nf).max(0.0),
        d3: 3.0 / nf.powi(3) * (fg.powi(3) / (nf * nf) - gg * fg),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TaylorGap {
    /// `j2(u+v) - [j2(u) + j2'(u;v) + Theta(u,v)/2]`
    pub gap: f64,
    /// `gap * j2(u)^2 / ||v||^3`
    pub cubic_ratio: f64,
    /// Smallest `C` for which the lower expansion holds at this `v`.
    pub fitted_c: f64,
}

/// Remainder of the second-order lower expansion of `j2` at `u_bar != 0`.
pub fn lower_taylor_residual_j2(u_bar: &GridFunction, v: &GridFunction) -> Result<TaylorGap> {
    let cls = SignClassification::new(u_bar);
    let theta = theta_j2_with(u_bar, v, &cls)?;
    let d = j_dir_deriv(SparsityKind::J2, u_bar, v, &cls);
    let gap = j_increment(SparsityKind::J2, u_bar, v) - d - 0.5 * theta;
    let nv = v.norm_l2();
    let cubic_ratio = if nv > 0.0 { gap * cls.j2 * cls.j2 / nv.powi(3) } else { 0.0 };
    Ok(TaylorGap { gap, cubic_ratio, fitted_c: (-cubic_ratio).max(0.0) })
}
