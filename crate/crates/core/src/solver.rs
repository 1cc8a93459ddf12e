//! Proximal gradient for `min F(u) + mu j(u)` over the box, with a
//! certified first-order residual.

use serde::Serialize;

use crate::cones::project_box;
use crate::control::ControlSpec;
use crate::error::{Error, Result};
use crate::fnspace::GridFunction;
use crate::pde::{self, PdeConfig, StateTriple};
use crate::sparsity::{canonical_subgradient, j_value, prox, subdiff_contains};

/// Control-side data plus the state equation and tracking functional.
#[derive(Debug, Clone)]
pub struct ProblemConfig {
    pub control: ControlSpec,
    pub pde: PdeConfig,
}

impl ProblemConfig {
    pub fn new(control: ControlSpec, pde: PdeConfig) -> Result<Self> {
        pde.validate()?;
        Ok(ProblemConfig { control, pde })
    }

    /// `J(u) = F(u) + mu j(u)`
    pub fn objective(&self, u: &GridFunction) -> Result<f64> {
        Ok(pde::objective_smooth(&self.pde, u)? + self.control.mu * j_value(self.control.kind, u))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StepPolicy {
    /// Start every line search from this step.
    Fixed(f64),
    /// Barzilai-Borwein step, seeded with `1 / L` from a Hessian power iteration at `u0`.
    BarzilaiBorwein,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    pub step: StepPolicy,
    /// Stop once `||u+ - u|| / s <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { step: StepPolicy::BarzilaiBorwein, tol: 1e-10, max_iter: 5000, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub u: GridFunction,
    /// Subgradient of `j` at `u` certifying the first-order condition.
    pub lambda: GridFunction,
    pub iterations: usize,
    pub kkt_residual: f64,
    /// `J` at every accepted iterate, starting with `u0`.
    pub history: Vec<f64>,
}

const MAX_BACKTRACK: usize = 60;

pub fn solve_ocp(cfg: &ProblemConfig, u0: &GridFunction, opts: SolveOptions) -> Result<SolveResult> {
    let ctrl = &cfg.control;
    cfg.pde.spec.check_same(u0.spec())?;
    let violation = u0.values().iter().map(|&x| ctrl.bounds.violation(x)).fold(0.0, f64::max);
    if violation > 0.0 {
        return Err(Error::InfeasibleBase { violation });
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let (s_min, s_max, mut s) = match opts.step {
        StepPolicy::Fixed(s) if s > 0.0 && s.is_finite() => (s * 1e-18, s, s),
        StepPolicy::Fixed(s) => return Err(Error::InvalidArgument(format!("step must be positive, got {s}"))),
        StepPolicy::BarzilaiBorwein => {
            let l = pde::lipschitz_estimate(&cfg.pde, u0, opts.seed)?.max(cfg.pde.nu).max(1e-12);
            (1e-12 / l, 1e6 / l, 1.0 / l)
        }
    };

    let mut u = u0.clone();
    let mut state = StateTriple::new(&cfg.pde, &u)?;
    let mut grad = state.gradient(&cfg.pde, &u);
    let mut j_cur = state.objective + ctrl.mu * j_value(ctrl.kind, &u);
    let mut history = vec![j_cur];

    for it in 1..=opts.max_iter {
        let (u_new, state_new, step) = backtrack(cfg, &u, &grad, state.objective, s, s_min)?;
        let d = u_new.sub(&u);
        let dn = d.norm_l2();
        let grad_new = state_new.gradient(&cfg.pde, &u_new);
        let j_new = state_new.objective + ctrl.mu * j_value(ctrl.kind, &u_new);
        history.push(j_new);

        if let StepPolicy::BarzilaiBorwein = opts.step {
            let dg = grad_new.sub(&grad);
            let curv = d.dot(&dg);
            s = if curv > 0.0 { (dn * dn / curv).clamp(s_min, s_max) } else { (2.0 * step).min(s_max) };
        }
        u = u_new;
        state = state_new;
        grad = grad_new;
        j_cur = j_new;
        if dn / step <= opts.tol {
            return finish(cfg, u, &grad, it, history);
        }
    }
    let _ = j_cur;
    let best = finish(cfg, u, &grad, opts.max_iter, history)?;
    Err(Error::MaxIterReached(Box::new(best)))
}

/// Sufficient decrease against `F` only:
/// `F(u+) <= F(u) + <F'(u), u+ - u> + ||u+ - u||^2 / (2s)`.
fn backtrack(
    cfg: &ProblemConfig,
    u: &GridFunction,
    grad: &GridFunction,
    f_u: f64,
    mut s: f64,
    s_min: f64,
) -> Result<(GridFunction, StateTriple, f64)> {
    let ctrl = &cfg.control;
    for _ in 0..MAX_BACKTRACK {
        let cand = prox(ctrl.kind, ctrl.mu, s, &u.axpy(-s, grad), ctrl.bounds)?;
        let d = cand.sub(u);
        // a diverging Newton solve at a long trial step just means the step is too long
        if let Ok(st) = StateTriple::new(&cfg.pde, &cand) {
            let model = f_u + grad.dot(&d) + d.dot(&d) / (2.0 * s);
            if st.objective <= model + 1e-14 * f_u.abs().max(1.0) {
                return Ok((cand, st, s));
            }
        }
        if s <= s_min {
            break;
        }
        s = (0.5 * s).max(s_min);
    }
    let cand = prox(ctrl.kind, ctrl.mu, s, &u.axpy(-s, grad), ctrl.bounds)?;
    let st = StateTriple::new(&cfg.pde, &cand)?;
    Ok((cand, st, s))
}

fn finish(
    cfg: &ProblemConfig,
    u: GridFunction,
    grad: &GridFunction,
    iterations: usize,
    history: Vec<f64>,
) -> Result<SolveResult> {
    let ctrl = &cfg.control;
    let lambda = canonical_subgradient(ctrl.kind, &u, grad, ctrl.mu, ctrl.bounds)
        .or_else(|e| match e {
            Error::DegenerateCase { lambda, .. } => Ok(*lambda),
            e => Err(e),
        })?;
    let kkt_residual = kkt_residual_with_grad(ctrl, &u, grad, &lambda);
    Ok(SolveResult { u, lambda, iterations, kkt_residual, history })
}

/// First-order residual of `(u, lambda)`; evaluates `F'(u)` by a state and adjoint solve.
pub fn kkt_residual(cfg: &ProblemConfig, u: &GridFunction, lambda: &GridFunction) -> Result<f64> {
    let grad = pde::grad_smooth(&cfg.pde, u)?;
    cfg.pde.spec.check_same(lambda.spec())?;
    Ok(kkt_residual_with_grad(&cfg.control, u, &grad, lambda))
}

/// `||u - P(u - (grad + mu lambda))||_{L2}` plus the largest violation of
/// `lambda in d j(u)`. Zero iff the first-order conditions hold on the grid.
pub fn kkt_residual_with_grad(ctrl: &ControlSpec, u: &GridFunction, grad: &GridFunction, lambda: &GridFunction) -> f64 {
    let g = grad.axpy(ctrl.mu, lambda);
    let proj = project_box(&u.sub(&g), ctrl.bounds);
    u.sub(&proj).norm_l2() + subdiff_contains(ctrl.kind, u, lambda, 0.0).max_violation
}

/// Largest eigenvalue magnitude of `F''(u)`.
pub fn lipschitz_estimate(cfg: &ProblemConfig, u: &GridFunction, seed: u64) -> Result<f64> {
    pde::lipschitz_estimate(&cfg.pde, u, seed)
}
