//! Configured analyses and their machine-readable reports.

pub mod config;
pub mod counterexample;
pub mod fdcheck;
mod output;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;
use serde::Serialize;

use crate::cones::{cone_is_grid_dependent, project_box, sample_critical};
use crate::error::{Error, Result};
use crate::fnspace::GridFunction;
use crate::pde::{Nonlinearity, StateTriple};
use crate::second_order::{curvature_quotient, recovery_sequence, second_subderivative, ExtReal};
use crate::solver::{solve_ocp, ProblemConfig, SolveResult};
use crate::sparsity::{SignClassification, SparsityKind};

pub use config::Config;
pub use counterexample::{reproduce_j2_counterexample, CounterexampleReport};
pub use output::{write_report, write_solution};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    SolverFailed,
    FirstOrderFailed,
    /// A sampled critical direction has a negative second-order sum.
    NecessaryConditionViolation,
    /// Sampled growth falls below the required quadratic rate.
    GrowthNotVerified,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSummary {
    pub kind: SparsityKind,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub nu: f64,
    pub kappa: f64,
    pub nonlinearity: Nonlinearity,
    pub spatial_cells: Vec<usize>,
    pub time_cells: usize,
    pub horizon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSummary {
    pub iterations: usize,
    pub objective: f64,
    pub kkt_residual: f64,
    /// Fraction of cells where the control vanishes.
    pub zero_fraction: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstOrder {
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalSample {
    pub id: usize,
    /// `F''(u) v^2`
    pub hessian: f64,
    /// `G''(u, -F'(u); v)`; absent where its value is not known.
    pub second_subderivative: Option<ExtReal>,
    pub divergent: bool,
    /// `F''(u) v^2 + G''`, or the lower bound `F''(u) v^2` when `G''` is unknown
    /// (it is nonnegative at a subgradient).
    pub sum: ExtReal,
    pub sum_is_lower_bound: bool,
    /// `sum > 0`
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    pub samples: usize,
    pub directed_samples: usize,
    pub radius: f64,
    /// `min (J(u) - J(u_bar)) / ||u - u_bar||^2`
    pub min_ratio: f64,
    /// `c` with `J(u) >= J(u_bar) + c/2 ||u - u_bar||^2` on all samples.
    pub fitted_c: f64,
    /// Required ratio: `nu / 4`, or `0` without Tikhonov term.
    pub threshold: f64,
    pub min_margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSample {
    pub id: usize,
    pub directed: bool,
    pub distance: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuotientPoint {
    pub sample: usize,
    pub t: f64,
    pub quotient: ExtReal,
    pub second_subderivative: Option<ExtReal>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SocReport {
    pub schema_version: u32,
    pub timestamp: String,
    pub status: Status,
    pub error: Option<String>,
    pub problem: ProblemSummary,
    pub solver: Option<SolverSummary>,
    pub first_order: Option<FirstOrder>,
    /// Critical directions on the grid depend on the grid (`j2` at zero).
    pub cone_grid_dependent: bool,
    pub critical_samples: Vec<CriticalSample>,
    pub growth: Option<GrowthReport>,
    pub growth_samples: Vec<GrowthSample>,
    pub quotient_curves: Vec<QuotientPoint>,
    pub counterexample: Option<CounterexampleReport>,
}

impl SocReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn summary(cfg: &Config) -> ProblemSummary {
    ProblemSummary {
        kind: cfg.control.kind,
        mu: cfg.control.mu,
        alpha: cfg.control.alpha,
        beta: cfg.control.beta,
        nu: cfg.pde.nu,
        kappa: cfg.pde.kappa,
        nonlinearity: cfg.pde.nonlinearity,
        spatial_cells: cfg.grid.spatial_cells.clone(),
        time_cells: cfg.grid.time_cells,
        horizon: cfg.grid.horizon,
        seed: cfg.analysis.seed,
    }
}

fn solver_summary(r: &SolveResult, objective: f64, converged: bool) -> SolverSummary {
    let zeros = r.u.values().iter().filter(|&&x| x == 0.0).count();
    SolverSummary {
        iterations: r.iterations,
        objective,
        kkt_residual: r.kkt_residual,
        zero_fraction: zeros as f64 / r.u.values().len() as f64,
        converged,
    }
}

/// Solve, certify first order, sample the critical cone, evaluate second-order
/// sums and probe quadratic growth.
///
/// Configuration problems are errors; solver failures yield a report with
/// [`Status::SolverFailed`].
pub fn analyze(cfg: &Config) -> Result<SocReport> {
    let problem = cfg.problem()?;
    Ok(analyze_problem(cfg, &problem).1)
}

/// [`analyze`] on an already assembled problem; also returns the solver output.
pub fn analyze_problem(cfg: &Config, problem: &ProblemConfig) -> (Option<SolveResult>, SocReport) {
    let mut report = SocReport {
        schema_version: SCHEMA_VERSION,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        status: Status::Ok,
        error: None,
        problem: summary(cfg),
        solver: None,
        first_order: None,
        cone_grid_dependent: false,
        critical_samples: Vec::new(),
        growth: None,
        growth_samples: Vec::new(),
        quotient_curves: Vec::new(),
        counterexample: None,
    };
    let u0 = GridFunction::zeros(problem.pde.spec);
    let sol = match solve_ocp(problem, &u0, cfg.solve_options()) {
        Ok(r) => r,
        Err(Error::MaxIterReached(best)) => {
            report.status = Status::SolverFailed;
            report.error = Some(format!("iteration cap reached, KKT residual {:e}", best.kkt_residual));
            let obj = problem.objective(&best.u).unwrap_or(f64::NAN);
            report.solver = Some(solver_summary(&best, obj, false));
            return (Some(*best), report);
        }
        Err(e) => {
            report.status = Status::SolverFailed;
            report.error = Some(e.to_string());
            return (None, report);
        }
    };
    if let Err(e) = second_order_checks(cfg, problem, &sol, &mut report) {
        report.status = Status::SolverFailed;
        report.error = Some(e.to_string());
    }
    (Some(sol), report)
}

fn second_order_checks(cfg: &Config, problem: &ProblemConfig, sol: &SolveResult, report: &mut SocReport) -> Result<()> {
    let a = &cfg.analysis;
    let ctrl = &problem.control;
    let state = StateTriple::new(&problem.pde, &sol.u)?;
    let grad = state.gradient(&problem.pde, &sol.u);
    let j_bar = problem.objective(&sol.u)?;
    report.solver = Some(solver_summary(sol, j_bar, true));
    let fo = FirstOrder { residual: sol.kkt_residual, tol: a.kkt_tol, pass: sol.kkt_residual <= a.kkt_tol };
    let first_order_pass = fo.pass;
    report.first_order = Some(fo);
    if !first_order_pass {
        report.status = Status::FirstOrderFailed;
    }
    report.cone_grid_dependent = cone_is_grid_dependent(ctrl.kind, &sol.u);

    let dirs = sample_critical(ctrl, &sol.u, &grad, &sol.lambda, a.samples, a.seed, a.tol)?;
    let zero_unknown = ctrl.kind == SparsityKind::J2 && SignClassification::new(&sol.u).is_zero();
    let w = grad.scale(-1.0);
    let evaluated: Vec<(CriticalSample, Vec<QuotientPoint>)> = dirs
        .par_iter()
        .enumerate()
        .map(|(id, v)| -> Result<_> {
            let hessian = state.hess(&problem.pde, v, v);
            let (g2, divergent) = match second_subderivative(ctrl, &sol.u, &grad, &sol.lambda, v, a.tol) {
                Ok(s) => (Some(s.value), s.divergent),
                Err(Error::UnknownValue) => (None, false),
                Err(e) => return Err(e),
            };
            let sum = match g2 {
                Some(g) => ExtReal::Finite(hessian).add_upper(g),
                None => ExtReal::Finite(hessian),
            };
            let sample = CriticalSample {
                id,
                hessian,
                second_subderivative: g2,
                divergent,
                sum,
                sum_is_lower_bound: g2.is_none(),
                pass: sum > ExtReal::ZERO,
            };
            let mut curve = Vec::new();
            if !zero_unknown {
                for &t in &a.t_schedule {
                    let vt = recovery_sequence(ctrl, &sol.u, v, t, &grad, &sol.lambda, a.tol)?;
                    curve.push(QuotientPoint {
                        sample: id,
                        t,
                        quotient: curvature_quotient(ctrl, &sol.u, &w, &vt, t),
                        second_subderivative: g2,
                    });
                }
            }
            Ok((sample, curve))
        })
        .collect::<Result<_>>()?;
    for (s, c) in evaluated {
        report.critical_samples.push(s);
        report.quotient_curves.extend(c);
    }
    // a negative lower bound says nothing about the sign of the sum
    if first_order_pass && report.critical_samples.iter().any(|s| !s.sum_is_lower_bound && s.sum < ExtReal::Finite(-a.tol)) {
        report.status = Status::NecessaryConditionViolation;
    }

    let (growth, samples) = growth_probe(problem, &sol.u, j_bar, &dirs, a.growth_samples, a.growth_radius, a.seed)?;
    if !growth.pass && report.status == Status::Ok {
        report.status = Status::GrowthNotVerified;
    }
    report.growth = Some(growth);
    report.growth_samples = samples;
    Ok(())
}

/// Samples `J(u) - J(u_bar)` over feasible `u` in the `radius`-ball around
/// `u_bar`: `count` uniform points and three radii along each of `directions`.
pub fn growth_probe(
    problem: &ProblemConfig,
    u_bar: &GridFunction,
    j_bar: f64,
    directions: &[GridFunction],
    count: usize,
    radius: f64,
    seed: u64,
) -> Result<(GrowthReport, Vec<GrowthSample>)> {
    let spec = *u_bar.spec();
    let n = spec.len() as f64;
    let bounds = problem.control.bounds;
    let ratio = |u: GridFunction| -> Result<(f64, f64)> {
        let d = u.sub(u_bar).norm_l2();
        if d == 0.0 {
            return Ok((0.0, f64::INFINITY));
        }
        Ok((d, (problem.objective(&u)? - j_bar) / (d * d)))
    };
    let uniform: Vec<GrowthSample> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64 + 1);
            let dir = GridFunction::from_vec(spec, (0..spec.len()).map(|_| StandardNormal.sample(&mut rng)).collect());
            // uniform in the ball: radius ~ U^(1/n), kept away from 0 for conditioning
            let r: f64 = Uniform::new(0.0f64, 1.0).unwrap().sample(&mut rng).powf(1.0 / n).max(0.1);
            let u = project_box(&u_bar.axpy(radius * r / dir.norm_l2(), &dir), bounds);
            let (distance, ratio) = ratio(u)?;
            Ok(GrowthSample { id: i, directed: false, distance, ratio })
        })
        .collect::<Result<_>>()?;
    let directed: Vec<GrowthSample> = directions
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, v)| [1.0, 0.5, 0.25].into_iter().enumerate().map(move |(j, f)| (3 * k + j, v, f)))
        .map(|(id, v, f)| {
            let u = project_box(&u_bar.axpy(radius * f / v.norm_l2(), v), bounds);
            let (distance, ratio) = ratio(u)?;
            Ok(GrowthSample { id, directed: true, distance, ratio })
        })
        .collect::<Result<_>>()?;
    let all: Vec<GrowthSample> = uniform.into_iter().chain(directed).collect();
    let min_ratio = all.iter().map(|s| s.ratio).fold(f64::INFINITY, f64::min);
    let threshold = problem.pde.nu / 4.0;
    let min_margin = min_ratio - threshold;
    let pass = if threshold > 0.0 { min_margin >= 0.0 } else { min_ratio > 0.0 };
    let report = GrowthReport {
        samples: count,
        directed_samples: 3 * directions.len(),
        radius,
        min_ratio,
        fitted_c: 2.0 * min_ratio,
        threshold,
        min_margin,
        pass,
    };
    Ok((report, all))
}
