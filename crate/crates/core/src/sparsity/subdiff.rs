use serde::Serialize;

use super::{j_dir_deriv, j_value, Sign, SignClassification, SparsityKind};
use crate::control::Bounds;
use crate::error::{Error, Result};
use crate::fnspace::{self, traj_norm, GridFunction};

#[derive(Debug, Clone, Serialize)]
pub struct RegionViolation {
    pub region: &'static str,
    pub max_violation: f64,
    pub cells: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubdiffReport {
    pub member: bool,
    pub max_violation: f64,
    /// Flat indices of cells whose violation exceeds the tolerance.
    pub violating_cells: Vec<usize>,
    pub regions: Vec<RegionViolation>,
}

struct Collector {
    tol: f64,
    max: f64,
    cells: Vec<usize>,
    regions: Vec<RegionViolation>,
}

impl Collector {
    fn new(tol: f64) -> Self {
        Collector { tol, max: 0.0, cells: Vec::new(), regions: Vec::new() }
    }

    fn record(&mut self, region: &'static str, idx: Option<usize>, viol: f64) {
        let r = match self.regions.iter_mut().find(|r| r.region == region) {
            Some(r) => r,
            None => {
                self.regions.push(RegionViolation { region, max_violation: 0.0, cells: 0 });
                self.regions.last_mut().unwrap()
            }
        };
        r.max_violation = r.max_violation.max(viol);
        self.max = self.max.max(viol);
        if viol > self.tol {
            r.cells += 1;
            if let Some(i) = idx {
                self.cells.push(i);
            }
        }
    }

    fn finish(self) -> SubdiffReport {
        SubdiffReport {
            member: self.max <= self.tol,
            max_violation: self.max,
            violating_cells: self.cells,
            regions: self.regions,
        }
    }
}

/// Checks `lambda in d j(u_bar)` through the pointwise / normwise characterizations.
pub fn subdiff_contains(kind: SparsityKind, u_bar: &GridFunction, lambda: &GridFunction, tol: f64) -> SubdiffReport {
    assert_eq!(u_bar.spec(), lambda.spec(), "grid functions live on different grids");
    let cls = SignClassification::new(u_bar);
    let spec = u_bar.spec();
    let nt = spec.n_time();
    let lam = lambda.values();
    let mut c = Collector::new(tol);
    match kind {
        SparsityKind::J1 => {
            for (i, (&l, &s)) in lam.iter().zip(&cls.cells).enumerate() {
                match s {
                    Sign::Zero => c.record("u=0", Some(i), (l.abs() - 1.0).max(0.0)),
                    _ => c.record("u!=0", Some(i), (l - s.value()).abs()),
                }
            }
        }
        SparsityKind::J2 if cls.is_zero() => {
            let norm = fnspace::l2_linf(lambda);
            c.record("dual ball", None, (norm - 1.0).max(0.0));
        }
        SparsityKind::J2 => {
            for (i, (&l, &s)) in lam.iter().zip(&cls.cells).enumerate() {
                let scale = cls.time_l1[i % nt] / cls.j2;
                match s {
                    Sign::Zero => c.record("u=0", Some(i), (l.abs() - scale).max(0.0)),
                    _ => c.record("u!=0", Some(i), (l - s.value() * scale).abs()),
                }
            }
        }
        SparsityKind::J3 => {
            let dt = spec.cell_measure_time();
            for s in 0..spec.n_space() {
                let ls = lambda.space_slice(s);
                if cls.space_nonzero[s] {
                    let n = cls.space_norms[s];
                    for (k, (&l, &u)) in ls.iter().zip(u_bar.space_slice(s)).enumerate() {
                        let i = s * nt + k;
                        let u = if cls.cells[i] == Sign::Zero { 0.0 } else { u };
                        c.record("x in support", Some(i), (l - u / n).abs());
                    }
                } else {
                    let viol = (traj_norm(ls, dt) - 1.0).max(0.0);
                    for k in 0..nt {
                        c.record("x outside support", Some(s * nt + k), viol);
                    }
                }
            }
        }
    }
    c.finish()
}

/// A subgradient `lambda` of `j` at `u_bar` aligned with `-residual / mu`.
///
/// Where the subdifferential is a singleton the determined value is used;
/// elsewhere `-residual / mu` is projected onto the admissible set.
pub fn canonical_subgradient(
    kind: SparsityKind,
    u_bar: &GridFunction,
    residual: &GridFunction,
    mu: f64,
    bounds: Bounds,
) -> Result<GridFunction> {
    u_bar.spec().check_same(residual.spec())?;
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
    }
    let violation = u_bar.values().iter().map(|&x| bounds.violation(x)).fold(0.0, f64::max);
    if violation > bounds.active_tol() {
        return Err(Error::InfeasibleBase { violation });
    }
    let cls = SignClassification::new(u_bar);
    let spec = *u_bar.spec();
    let nt = spec.n_time();
    let r = residual.map(|x| -x / mu);
    let out = match kind {
        SparsityKind::J1 => (0..spec.len())
            .map(|i| match cls.cells[i] {
                Sign::Zero => r.values()[i].clamp(-1.0, 1.0),
                s => s.value(),
            })
            .collect(),
        SparsityKind::J2 if cls.is_zero() => {
            let norm = fnspace::l2_linf(&r);
            // Rounding slack so that exactly-unit residuals are accepted.
            if norm > 1.0 + 1e-12 {
                return Err(Error::DegenerateCase { norm, lambda: Box::new(r.scale(1.0 / norm)) });
            }
            if norm > 1.0 {
                return Ok(r.scale(1.0 / norm));
            }
            return Ok(r);
        }
        SparsityKind::J2 => (0..spec.len())
            .map(|i| {
                let scale = cls.time_l1[i % nt] / cls.j2;
                match cls.cells[i] {
                    Sign::Zero => r.values()[i].clamp(-scale, scale),
                    s => s.value() * scale,
                }
            })
            .collect(),
        SparsityKind::J3 => {
            let dt = spec.cell_measure_time();
            let mut out = Vec::with_capacity(spec.len());
            for s in 0..spec.n_space() {
                if cls.space_nonzero[s] {
                    let n = cls.space_norms[s];
                    for (k, &u) in u_bar.space_slice(s).iter().enumerate() {
                        out.push(if cls.cells[s * nt + k] == Sign::Zero { 0.0 } else { u / n });
                    }
                } else {
                    let rs = r.space_slice(s);
                    let n = traj_norm(rs, dt);
                    let f = if n > 1.0 { 1.0 / n } else { 1.0 };
                    out.extend(rs.iter().map(|x| x * f));
                }
            }
            out
        }
    };
    Ok(GridFunction::from_vec(spec, out))
}

/// Per-cell integrands of `j'(u_bar; v) - <lambda, v>`.
///
/// For `lambda in d j(u_bar)` every entry is nonnegative and they vanish
/// exactly where the pointwise characterization of
/// `<lambda, v> = j'(u_bar; v)` holds. The sum times the cell measure is the
/// scalar gap.
pub fn pairing_defects(
    kind: SparsityKind,
    u_bar: &GridFunction,
    cls: &SignClassification,
    lambda: &GridFunction,
    v: &GridFunction,
) -> Vec<f64> {
    let spec = v.spec();
    let nt = spec.n_time();
    let (lam, vv) = (lambda.values(), v.values());
    match kind {
        SparsityKind::J1 => (0..spec.len())
            .map(|i| {
                let target = match cls.cells[i] {
                    Sign::Zero => sgn(vv[i]),
                    s => s.value(),
                };
                (target - lam[i]) * vv[i]
            })
            .collect(),
        SparsityKind::J2 if cls.is_zero() => {
            let jv = fnspace::l2_l1(v);
            if jv == 0.0 {
                return vec![0.0; spec.len()];
            }
            let sv = fnspace::time_slice_l1(v);
            (0..spec.len()).map(|i| (sgn(vv[i]) * sv[i % nt] / jv - lam[i]) * vv[i]).collect()
        }
        SparsityKind::J2 => (0..spec.len())
            .map(|i| {
                let scale = cls.time_l1[i % nt] / cls.j2;
                let target = match cls.cells[i] {
                    Sign::Zero => sgn(vv[i]),
                    s => s.value(),
                };
                (target * scale - lam[i]) * vv[i]
            })
            .collect(),
        SparsityKind::J3 => {
            let dt = spec.cell_measure_time();
            let mut out = Vec::with_capacity(spec.len());
            for s in 0..spec.n_space() {
                let vs = v.space_slice(s);
                let ls = lambda.space_slice(s);
                if cls.space_nonzero[s] {
                    let n = cls.space_norms[s];
                    for (k, (&u, (&x, &l))) in u_bar.space_slice(s).iter().zip(vs.iter().zip(ls)).enumerate() {
                        let u = if cls.cells[s * nt + k] == Sign::Zero { 0.0 } else { u };
                        out.push((u / n - l) * x);
                    }
                } else {
                    let n = traj_norm(vs, dt);
                    for (&x, &l) in vs.iter().zip(ls) {
                        let target = if n > 0.0 { x / n } else { 0.0 };
                        out.push((target - l) * x);
                    }
                }
            }
            out
        }
    }
}

fn sgn(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Tests `<lambda, v> = j'(u_bar; v)` both as a scalar identity and through
/// the pointwise characterization; the two routes must agree.
pub fn pairing_equals_dirderiv(
    kind: SparsityKind,
    u_bar: &GridFunction,
    lambda: &GridFunction,
    v: &GridFunction,
    tol: f64,
) -> Result<bool> {
    pairing_equals_dirderiv_with(kind, u_bar, lambda, v, tol, j_dir_deriv)
}

pub(crate) fn pairing_equals_dirderiv_with(
    kind: SparsityKind,
    u_bar: &GridFunction,
    lambda: &GridFunction,
    v: &GridFunction,
    tol: f64,
    dir_deriv: crate::DirDerivFn,
) -> Result<bool> {
    u_bar.spec().check_same(lambda.spec())?;
    u_bar.spec().check_same(v.spec())?;
    let scale = v.norm_l1().max(j_value(kind, v));
    if scale == 0.0 {
        return Ok(true);
    }
    let cls = SignClassification::new(u_bar);
    let scalar = (dir_deriv(kind, u_bar, v, &cls) - lambda.dot(v)) / scale;
    let pointwise = pairing_defects(kind, u_bar, &cls, lambda, v).iter().sum::<f64>() * v.spec().cell_measure() / scale;
    if (scalar - pointwise).abs() > tol {
        return Err(Error::InconsistentCharacterization(format!(
            "scalar gap {scalar:e}, pointwise gap {pointwise:e} (relative to {scale:e})"
        )));
    }
    Ok(scalar.abs() <= tol)
}
