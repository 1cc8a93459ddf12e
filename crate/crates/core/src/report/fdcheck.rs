//! Consistency checks of every derivative and closed form against
//! finite differences or brute force, as one pass/fail table.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Config;
use crate::cones::sample_critical;
use crate::control::{Bounds, ControlSpec};
use crate::error::Result;
use crate::fnspace::{GridFunction, GridSpec};
use crate::oracle::{brute_force_prox, synthetic_stationary, OrderCheck};
use crate::pde::{self, PdeConfig, StateTriple};
use crate::second_order::{check_recovery_properties, psi_eval};
use crate::sparsity::{self, j_value, prox, SignClassification, SparsityKind};
use crate::DirDerivFn;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdRow {
    pub name: String,
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: Option<f64>,
    pub pass: bool,
}

impl FdRow {
    fn from_order(name: impl Into<String>, c: OrderCheck) -> Self {
        FdRow { name: name.into(), steps: c.steps, errors: c.errors, order: c.order, pass: c.pass }
    }
}

/// Replaceable pieces, so that a deliberately broken implementation can be run through the suite.
#[derive(Clone, Copy)]
pub struct FdHooks {
    pub dir_deriv: DirDerivFn,
}

impl Default for FdHooks {
    fn default() -> Self {
        FdHooks { dir_deriv: sparsity::j_dir_deriv }
    }
}

pub const DIR_DERIV_STEPS: [f64; 3] = [1e-3, 1e-4, 1e-5];
/// Central differences are run on halving steps large enough that the
/// `O(h^2)` term dominates rounding for every nonlinearity.
pub const CENTRAL_STEPS: [f64; 4] = [0.125, 0.0625, 0.03125, 0.015625];

/// Forward quotients `(j(u + t v) - j(u)) / t` against `j'(u; v)`.
pub fn dir_deriv_check(kind: SparsityKind, u: &GridFunction, v: &GridFunction, steps: &[f64], dir_deriv: DirDerivFn) -> OrderCheck {
    let cls = SignClassification::new(u);
    let d = dir_deriv(kind, u, v, &cls);
    let ju = j_value(kind, u);
    let errors = steps.iter().map(|&t| ((j_value(kind, &u.axpy(t, v)) - ju) / t - d).abs()).collect();
    OrderCheck::new(steps.to_vec(), errors, 0.9, 1e-9 * (1.0 + d.abs() + ju.abs()))
}

/// `(F(u + h v) - F(u - h v)) / (2h)` against `<F'(u), v>`.
pub fn gradient_check(cfg: &PdeConfig, u: &GridFunction, v: &GridFunction, steps: &[f64]) -> Result<OrderCheck> {
    let st = StateTriple::new(cfg, u)?;
    let d = st.gradient(cfg, u).dot(v);
    let mut errors = Vec::with_capacity(steps.len());
    for &h in steps {
        let fp = pde::objective_smooth(cfg, &u.axpy(h, v))?;
        let fm = pde::objective_smooth(cfg, &u.axpy(-h, v))?;
        errors.push(((fp - fm) / (2.0 * h) - d).abs());
    }
    let floor = 4.0 * f64::EPSILON * (1.0 + st.objective.abs() + d.abs()) / steps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(OrderCheck::new(steps.to_vec(), errors, 1.9, floor))
}

/// `(<F'(u + h v1), v2> - <F'(u - h v1), v2>) / (2h)` against `F''(u)(v1, v2)`.
pub fn hessian_check(cfg: &PdeConfig, u: &GridFunction, v1: &GridFunction, v2: &GridFunction, steps: &[f64]) -> Result<OrderCheck> {
    let d = pde::hess_apply(cfg, u, v1, v2)?;
    let mut errors = Vec::with_capacity(steps.len());
    let mut scale: f64 = d.abs();
    for &h in steps {
        let gp = pde::grad_smooth(cfg, &u.axpy(h, v1))?.dot(v2);
        let gm = pde::grad_smooth(cfg, &u.axpy(-h, v1))?.dot(v2);
        scale = scale.max(gp.abs());
        errors.push(((gp - gm) / (2.0 * h) - d).abs());
    }
    let floor = 4.0 * f64::EPSILON * (1.0 + scale) / steps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(OrderCheck::new(steps.to_vec(), errors, 1.9, floor))
}

/// Central stencils for the first three derivatives of `Psi = ||.||_{L2(0,T)}`.
pub fn psi_checks(f: &[f64], g: &[f64], dt: f64, steps: &[f64]) -> Result<[OrderCheck; 3]> {
    let p = psi_eval(f, g, dt)?;
    let at = |h: f64| -> f64 {
        let x: Vec<f64> = f.iter().zip(g).map(|(a, b)| a + h * b).collect();
        crate::fnspace::traj_norm(&x, dt)
    };
    let mut e = [Vec::new(), Vec::new(), Vec::new()];
    for &h in steps {
        e[0].push(((at(h) - at(-h)) / (2.0 * h) - p.d1).abs());
        e[1].push(((at(h) - 2.0 * p.value + at(-h)) / (h * h) - p.d2).abs());
        e[2].push(((at(2.0 * h) - 2.0 * at(h) + 2.0 * at(-h) - at(-2.0 * h)) / (2.0 * h * h * h) - p.d3).abs());
    }
    let hmin = steps.iter().cloned().fold(f64::INFINITY, f64::min);
    let floor = |k: i32| 1e-13 * (1.0 + p.value) / hmin.powi(k);
    let [e0, e1, e2] = e;
    Ok([
        OrderCheck::new(steps.to_vec(), e0, 1.9, floor(1)),
        OrderCheck::new(steps.to_vec(), e1, 1.9, floor(2)),
        OrderCheck::new(steps.to_vec(), e2, 1.9, floor(3)),
    ])
}

/// Largest L2 distance between [`prox`] and the brute-force oracle over
/// `trials` random `(u, mu, step)` on a grid with at most 12 cells.
pub fn prox_oracle_gap(kind: SparsityKind, spec: GridSpec, bounds: Bounds, trials: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = GridFunction::from_cells(spec, |_, _| rng.random_range(-3.0..3.0))?;
        let mu = rng.random_range(0.01..2.0);
        let step = rng.random_range(0.05..2.0);
        let p = prox(kind, mu, step, &u, bounds)?;
        let o = brute_force_prox(kind, mu * step, &u, bounds)?;
        worst = worst.max(p.sub(&o).norm_l2());
    }
    Ok(worst)
}

/// A random feasible control with a share of zero cells (and zero groups).
pub fn random_base(kind: SparsityKind, spec: GridSpec, bounds: Bounds, rng: &mut impl Rng) -> Result<GridFunction> {
    let nt = spec.n_time();
    let dead_slice: Vec<bool> = (0..spec.n_space()).map(|_| rng.random::<f64>() < 0.2).collect();
    GridFunction::from_cells(spec, |s, k| {
        if kind == SparsityKind::J3 && dead_slice[s] {
            return 0.0;
        }
        let _ = k < nt;
        match rng.random_range(0..10) {
            0 | 1 => 0.0,
            2 => bounds.alpha,
            3 => bounds.beta,
            _ => rng.random_range(bounds.alpha..bounds.beta),
        }
    })
}

pub fn fd_check_suite(cfg: &Config) -> Result<Vec<FdRow>> {
    fd_check_suite_with(cfg, FdHooks::default())
}

pub fn fd_check_suite_with(cfg: &Config, hooks: FdHooks) -> Result<Vec<FdRow>> {
    let spec = cfg.grid_spec()?;
    let ctrl = cfg.control_spec()?;
    let pde_cfg = cfg.pde_config()?;
    let b = ctrl.bounds;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.analysis.seed);
    let mut rows = Vec::new();

    for kind in SparsityKind::ALL {
        let u = random_base(kind, spec, b, &mut rng)?;
        let v = GridFunction::from_cells(spec, |_, _| rng.random_range(-1.0..1.0))?;
        rows.push(FdRow::from_order(format!("dir_deriv_{kind}"), dir_deriv_check(kind, &u, &v, &DIR_DERIV_STEPS, hooks.dir_deriv)));
    }

    let u = GridFunction::from_cells(spec, |_, _| 0.5 * rng.random_range(b.alpha..b.beta))?;
    let v1 = GridFunction::from_cells(spec, |_, _| rng.random_range(-1.0..1.0))?;
    let v2 = GridFunction::from_cells(spec, |_, _| rng.random_range(-1.0..1.0))?;
    rows.push(FdRow::from_order("gradient", gradient_check(&pde_cfg, &u, &v1, &CENTRAL_STEPS)?));
    rows.push(FdRow::from_order("hessian", hessian_check(&pde_cfg, &u, &v1, &v2, &CENTRAL_STEPS)?));

    let nt = spec.n_time();
    let f: Vec<f64> = (0..nt).map(|_| rng.random_range(-1.0..1.0)).collect();
    let g: Vec<f64> = (0..nt).map(|_| rng.random_range(-1.0..1.0)).collect();
    let [p1, p2, p3] = psi_checks(&f, &g, spec.cell_measure_time(), &CENTRAL_STEPS)?;
    rows.push(FdRow::from_order("psi_d1", p1));
    rows.push(FdRow::from_order("psi_d2", p2));
    rows.push(FdRow::from_order("psi_d3", p3));

    let small = GridSpec::new(&[3], &[spec.spatial_extent()[0]], 4, spec.horizon())?;
    for kind in SparsityKind::ALL {
        let gap = prox_oracle_gap(kind, small, b, 20, rng.random())?;
        rows.push(FdRow { name: format!("prox_{kind}"), steps: vec![], errors: vec![gap], order: None, pass: gap <= 1e-6 });
    }

    let schedule: Vec<f64> = (1..=6).map(|k| 0.25f64.powi(k)).collect();
    for kind in SparsityKind::ALL {
        let c = ControlSpec { kind, ..ctrl };
        let mut u = random_base(kind, spec, b, &mut rng)?;
        if kind == SparsityKind::J2 && u.is_zero() {
            u = GridFunction::constant(spec, 0.5 * b.beta);
        }
        let (grad, lambda) = synthetic_stationary(&c, &u, 0.5, rng.random())?;
        let dirs = sample_critical(&c, &u, &grad, &lambda, 3, rng.random(), 1e-9)?;
        let mut pass = true;
        let mut errors = Vec::new();
        for v in &dirs {
            for &t in &schedule {
                let r = check_recovery_properties(&c, &u, v, t, &grad, &lambda, 1e-9)?;
                pass &= r.all_hold();
                errors.push(r.identity_residual);
            }
        }
        rows.push(FdRow { name: format!("recovery_{kind}"), steps: schedule.clone(), errors, order: None, pass });
    }
    Ok(rows)
}
