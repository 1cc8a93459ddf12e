//! Geometry of the admissible set: projection, tangent and normal cones, and
//! the critical cone of the composite problem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::control::{Bounds, ControlSpec};
use crate::error::{Error, Result};
use crate::fnspace::{self, traj_norm, GridFunction};
use crate::sparsity::{self, pairing_defects, subdiff_contains, Sign, SignClassification, SparsityKind};
use crate::DirDerivFn;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorstCell {
    pub space: usize,
    pub time: usize,
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    /// No cell violates the membership conditions by more than the tolerance.
    pub member: bool,
    /// Space-time measure of the violating cells.
    pub violation_measure: f64,
    pub max_violation: f64,
    pub worst_cell: Option<WorstCell>,
}

struct ReportBuilder {
    tol: f64,
    nt: usize,
    measure: f64,
    count: usize,
    worst: Option<WorstCell>,
}

impl ReportBuilder {
    fn new(u: &GridFunction, tol: f64) -> Self {
        ReportBuilder { tol, nt: u.spec().n_time(), measure: u.spec().cell_measure(), count: 0, worst: None }
    }

    fn cell(&mut self, idx: usize, violation: f64) {
        if violation > self.tol {
            self.count += 1;
        }
        if violation > self.worst.map_or(0.0, |w| w.violation) {
            self.worst = Some(WorstCell { space: idx / self.nt, time: idx % self.nt, violation });
        }
    }

    fn finish(self) -> ConeReport {
        ConeReport {
            member: self.count == 0,
            violation_measure: self.count as f64 * self.measure,
            max_violation: self.worst.map_or(0.0, |w| w.violation),
            worst_cell: self.worst,
        }
    }
}

pub fn project_box(u: &GridFunction, bounds: Bounds) -> GridFunction {
    u.map(|x| bounds.clamp(x))
}

fn check_feasible(u_bar: &GridFunction, bounds: Bounds, tol: f64) -> Result<()> {
    let violation = u_bar.values().iter().map(|&x| bounds.violation(x)).fold(0.0, f64::max);
    if violation > tol {
        return Err(Error::InfeasibleBase { violation });
    }
    Ok(())
}

#[inline]
fn tangent_violation(bounds: Bounds, u: f64, v: f64) -> f64 {
    let mut viol: f64 = 0.0;
    if bounds.at_lower(u) {
        viol = viol.max(-v);
    }
    if bounds.at_upper(u) {
        viol = viol.max(v);
    }
    viol
}

#[inline]
fn normal_violation(bounds: Bounds, u: f64, w: f64) -> f64 {
    match (bounds.at_lower(u), bounds.at_upper(u)) {
        (true, false) => w.max(0.0),
        (false, true) => (-w).max(0.0),
        (true, true) => 0.0,
        (false, false) => w.abs(),
    }
}

/// `v >= 0` where `u_bar = alpha`, `v <= 0` where `u_bar = beta`.
pub fn tangent_contains(u_bar: &GridFunction, v: &GridFunction, bounds: Bounds, tol: f64) -> Result<ConeReport> {
    u_bar.spec().check_same(v.spec())?;
    check_feasible(u_bar, bounds, tol)?;
    let mut r = ReportBuilder::new(u_bar, tol);
    for (i, (&u, &x)) in u_bar.values().iter().zip(v.values()).enumerate() {
        r.cell(i, tangent_violation(bounds, u, x));
    }
    Ok(r.finish())
}

/// `w <= 0` where `u_bar = alpha`, `w >= 0` where `u_bar = beta`, `w = 0` in between.
pub fn normal_contains(u_bar: &GridFunction, w: &GridFunction, bounds: Bounds, tol: f64) -> Result<ConeReport> {
    u_bar.spec().check_same(w.spec())?;
    check_feasible(u_bar, bounds, tol)?;
    let mut r = ReportBuilder::new(u_bar, tol);
    for (i, (&u, &x)) in u_bar.values().iter().zip(w.values()).enumerate() {
        r.cell(i, normal_violation(bounds, u, x));
    }
    Ok(r.finish())
}

/// Largest violation of `-(gradF + mu lambda) in N(u_bar)` and `lambda in d j(u_bar)`.
pub fn stationarity_violation(ctrl: &ControlSpec, u_bar: &GridFunction, grad: &GridFunction, lambda: &GridFunction) -> f64 {
    let normal = u_bar
        .values()
        .iter()
        .zip(grad.values().iter().zip(lambda.values()))
        .map(|(&u, (&g, &l))| normal_violation(ctrl.bounds, u, -(g + ctrl.mu * l)))
        .fold(0.0, f64::max);
    normal.max(subdiff_contains(ctrl.kind, u_bar, lambda, 0.0).max_violation)
}

/// Critical cone membership through its pointwise characterization:
/// `v` tangent, `(F'(u_bar) + mu lambda) v = 0` a.e. and `j'(u_bar; v) = <lambda, v>`.
///
/// `v` is scaled to unit sup norm first, so the verdict is invariant under
/// positive scaling. The identity `F'(u_bar) v + mu j'(u_bar; v) = 0` is
/// cross-checked for members.
pub fn critical_contains(
    ctrl: &ControlSpec,
    u_bar: &GridFunction,
    grad: &GridFunction,
    lambda: &GridFunction,
    v: &GridFunction,
    tol: f64,
) -> Result<ConeReport> {
    critical_contains_with(ctrl, u_bar, grad, lambda, v, tol, sparsity::j_dir_deriv)
}

pub fn critical_contains_with(
    ctrl: &ControlSpec,
    u_bar: &GridFunction,
    grad: &GridFunction,
    lambda: &GridFunction,
    v: &GridFunction,
    tol: f64,
    dir_deriv: DirDerivFn,
) -> Result<ConeReport> {
    let spec = u_bar.spec();
    for f in [grad, lambda, v] {
        spec.check_same(f.spec())?;
    }
    check_feasible(u_bar, ctrl.bounds, tol)?;
    let residual = stationarity_violation(ctrl, u_bar, grad, lambda);
    if residual > tol {
        return Err(Error::NotStationary { residual });
    }
    let vmax = v.norm_inf();
    let mut r = ReportBuilder::new(u_bar, tol);
    if vmax == 0.0 {
        return Ok(r.finish());
    }
    let vh = v.scale(1.0 / vmax);
    let cls = SignClassification::new(u_bar);
    let defects = pairing_defects(ctrl.kind, u_bar, &cls, lambda, &vh);
    for i in 0..spec.len() {
        let (u, x) = (u_bar.values()[i], vh.values()[i]);
        let g = grad.values()[i] + ctrl.mu * lambda.values()[i];
        let viol = tangent_violation(ctrl.bounds, u, x).max((g * x).abs()).max(defects[i].abs());
        r.cell(i, viol);
    }
    let report = r.finish();
    if report.member {
        let identity = grad.dot(&vh) + ctrl.mu * dir_deriv(ctrl.kind, u_bar, &vh, &cls);
        let allowed = 2.0 * (1.0 + ctrl.mu) * spec.total_measure() * tol + 1e-12;
        if identity.abs() > allowed {
            return Err(Error::InconsistentCharacterization(format!(
                "pointwise critical, but F'(u)v + mu j'(u;v) = {identity:e}"
            )));
        }
    }
    Ok(report)
}

/// For `j2` at `u_bar = 0` every critical direction is tied to the argmax
/// structure of `lambda` on the grid, so sampled cones depend on the grid.
pub fn cone_is_grid_dependent(kind: SparsityKind, u_bar: &GridFunction) -> bool {
    kind == SparsityKind::J2 && SignClassification::new(u_bar).is_zero()
}

/// Allowed sign of `v` on a cell: `None` means `v` must vanish.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot {
    Free,
    Pos,
    Neg,
    Off,
}

impl Slot {
    fn restrict(self, sign: f64) -> Slot {
        match (self, sign > 0.0) {
            (Slot::Off, _) => Slot::Off,
            (Slot::Free, true) | (Slot::Pos, true) => Slot::Pos,
            (Slot::Free, false) | (Slot::Neg, false) => Slot::Neg,
            _ => Slot::Off,
        }
    }
}

/// Random unit-norm directions of the critical cone.
///
/// Cells where `F'(u_bar) + mu lambda` does not vanish are zeroed, tangent
/// signs are respected, and on the zero set of `u_bar` the direction is
/// aligned with `lambda` wherever the pairing condition requires it. Returns
/// an empty list if the cone is `{0}` on the grid.
pub fn sample_critical(
    ctrl: &ControlSpec,
    u_bar: &GridFunction,
    grad: &GridFunction,
    lambda: &GridFunction,
    count: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<GridFunction>> {
    let spec = *u_bar.spec();
    for f in [grad, lambda] {
        spec.check_same(f.spec())?;
    }
    let residual = stationarity_violation(ctrl, u_bar, grad, lambda);
    if residual > tol {
        return Err(Error::NotStationary { residual });
    }
    let (ns, nt) = (spec.n_space(), spec.n_time());
    let cls = SignClassification::new(u_bar);
    let lam = lambda.values();
    let b = ctrl.bounds;

    let mut slots: Vec<Slot> = (0..spec.len())
        .map(|i| {
            let g = grad.values()[i] + ctrl.mu * lam[i];
            if g.abs() > tol {
                return Slot::Off;
            }
            let u = u_bar.values()[i];
            let mut s = Slot::Free;
            if b.at_lower(u) {
                s = s.restrict(1.0);
            }
            if b.at_upper(u) {
                s = s.restrict(-1.0);
            }
            s
        })
        .collect();

    // Slices (in time for j2 at 0, in space for j3 off its support) that
    // must be filled as a whole along lambda.
    let mut j2_zero_weights: Option<Vec<f64>> = None;
    let mut j3_slices = vec![false; ns];
    match ctrl.kind {
        SparsityKind::J1 => {
            for i in 0..spec.len() {
                if cls.cells[i] == Sign::Zero {
                    slots[i] = if lam[i].abs() >= 1.0 - tol { slots[i].restrict(lam[i]) } else { Slot::Off };
                }
            }
        }
        SparsityKind::J2 if cls.is_zero() => {
            let m = fnspace::time_slice_linf(lambda);
            let norm = traj_norm(&m, spec.cell_measure_time());
            if norm < 1.0 - tol {
                return Ok(Vec::new());
            }
            for i in 0..spec.len() {
                let mt = m[i % nt];
                slots[i] = if mt > tol && lam[i].abs() >= mt - tol { slots[i].restrict(lam[i]) } else { Slot::Off };
            }
            for (k, &mt) in m.iter().enumerate() {
                if mt > tol && (0..ns).all(|s| slots[spec.index(s, k)] == Slot::Off) {
                    return Ok(Vec::new());
                }
            }
            j2_zero_weights = Some(m);
        }
        SparsityKind::J2 => {
            for i in 0..spec.len() {
                let scale = cls.time_l1[i % nt] / cls.j2;
                if cls.cells[i] == Sign::Zero && scale > 0.0 {
                    slots[i] = if lam[i].abs() >= scale - tol { slots[i].restrict(lam[i]) } else { Slot::Off };
                }
            }
        }
        SparsityKind::J3 => {
            let dt = spec.cell_measure_time();
            for s in 0..ns {
                if cls.space_nonzero[s] {
                    continue;
                }
                let ls = lambda.space_slice(s);
                let usable = traj_norm(ls, dt) >= 1.0 - tol
                    && (0..nt).all(|k| ls[k] == 0.0 || slots[spec.index(s, k)] != Slot::Off);
                j3_slices[s] = usable;
                for k in 0..nt {
                    slots[spec.index(s, k)] = Slot::Off;
                }
            }
        }
    }

    let any_cell = slots.iter().any(|&s| s != Slot::Off);
    if !any_cell && !j3_slices.iter().any(|&x| x) && j2_zero_weights.is_none() {
        return Ok(Vec::new());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count {
        attempts += 1;
        if attempts > 50 * count.max(1) {
            break;
        }
        let mut vals = vec![0.0; spec.len()];
        if let Some(m) = &j2_zero_weights {
            // ||v(t)||_{L1} proportional to max |lambda(t)|, mass on argmax cells.
            for k in 0..nt {
                if m[k] <= tol {
                    continue;
                }
                let cells: Vec<usize> =
                    (0..ns).map(|s| spec.index(s, k)).filter(|&i| slots[i] != Slot::Off).collect();
                let w: Vec<f64> = cells.iter().map(|_| rng.random_range(0.1..1.0)).collect();
                let total: f64 = w.iter().sum::<f64>() * spec.cell_measure_space();
                for (&i, &wi) in cells.iter().zip(&w) {
                    vals[i] = lam[i].signum() * m[k] * wi / total;
                }
            }
        } else {
            for (i, slot) in slots.iter().enumerate() {
                if *slot == Slot::Off || rng.random::<f64>() < 0.3 {
                    continue;
                }
                let z: f64 = rng.sample(StandardNormal);
                vals[i] = match slot {
                    Slot::Free => z,
                    Slot::Pos => z.abs() + 0.1,
                    Slot::Neg => -z.abs() - 0.1,
                    Slot::Off => 0.0,
                };
            }
            for s in (0..ns).filter(|&s| j3_slices[s]) {
                if rng.random::<f64>() < 0.3 {
                    continue;
                }
                let c = rng.random_range(0.2..2.0);
                for k in 0..nt {
                    let i = spec.index(s, k);
                    vals[i] = c * lam[i];
                }
            }
        }
        let v = GridFunction::new(spec, vals)?;
        let n = v.norm_l2();
        if n == 0.0 {
            continue;
        }
        let v = v.scale(1.0 / n);
        let report = critical_contains(ctrl, u_bar, grad, lambda, &v, tol)?;
        if !report.member {
            return Err(Error::InconsistentCharacterization(format!(
                "constructed direction is not critical (max violation {:e})",
                report.max_violation
            )));
        }
        out.push(v);
    }
    Ok(out)
}
