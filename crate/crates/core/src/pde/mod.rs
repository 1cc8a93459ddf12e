//! Semilinear parabolic state equation
//!
//! ```text
//! y_t - kappa Laplace(y) + a(y) = u   in Omega x (0,T),
//! y = 0 on the boundary,  y(0) = y0,
//! ```
//!
//! discretized by cell-centered finite differences (Dirichlet data through
//! ghost cells) and implicit Euler. The control on time cell `k` drives the
//! step to `t_{k+1}`, and the state stored on time cell `k` is `y(t_{k+1})`.
//! The adjoint is the exact transpose of the discrete linearized scheme, so
//! gradients are exact up to linear-solve rounding.

mod linalg;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub use linalg::{BandedCholesky, BandedSym};

use crate::error::{Error, Result};
use crate::fnspace::{GridFunction, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nonlinearity {
    /// `a(y) = 0`
    Zero,
    /// `a(y) = y^3`
    Cubic,
    /// `a(y) = y + y^3`
    LinearCubic,
}

impl Nonlinearity {
    #[inline]
    pub fn eval(self, y: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Cubic => y * y * y,
            Nonlinearity::LinearCubic => y + y * y * y,
        }
    }

    #[inline]
    pub fn d1(self, y: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Cubic => 3.0 * y * y,
            Nonlinearity::LinearCubic => 1.0 + 3.0 * y * y,
        }
    }

    #[inline]
    pub fn d2(self, y: f64) -> f64 {
        match self {
            Nonlinearity::Zero => 0.0,
            Nonlinearity::Cubic | Nonlinearity::LinearCubic => 6.0 * y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    #[default]
    ImplicitEuler,
}

#[derive(Debug, Clone)]
pub struct PdeConfig {
    pub spec: GridSpec,
    pub kappa: f64,
    pub nonlinearity: Nonlinearity,
    /// Tikhonov weight `nu >= 0`.
    pub nu: f64,
    /// Tracking target `y_d`.
    pub target: GridFunction,
    /// `y0`, one value per spatial cell.
    pub initial: Vec<f64>,
    /// Newton stops once the step residual (sup norm) is below
    /// `newton_tol * max(1, |right-hand side|)`.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub scheme: TimeScheme,
}

impl PdeConfig {
    /// `a = 0`, `y_d = 0`, `y0 = 0`.
    pub fn new(spec: GridSpec, kappa: f64, nonlinearity: Nonlinearity, nu: f64) -> Result<Self> {
        let cfg = PdeConfig {
            spec,
            kappa,
            nonlinearity,
            nu,
            target: GridFunction::zeros(spec),
            initial: vec![0.0; spec.n_space()],
            newton_tol: 1e-13,
            newton_max_iter: 50,
            scheme: TimeScheme::ImplicitEuler,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_target(mut self, target: GridFunction) -> Result<Self> {
        self.spec.check_same(target.spec())?;
        self.target = target;
        Ok(self)
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Result<Self> {
        self.initial = initial;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::Config(format!("nu must be nonnegative, got {}", self.nu)));
        }
        if self.initial.len() != self.spec.n_space() {
            return Err(Error::Config(format!(
                "initial state has {} values for {} spatial cells",
                self.initial.len(),
                self.spec.n_space()
            )));
        }
        if self.initial.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("initial state is not finite".into()));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(Error::Config("Newton tolerance and iteration cap must be positive".into()));
        }
        self.spec.check_same(self.target.spec())
    }

    fn bandwidth(&self) -> usize {
        if self.spec.spatial_dim() == 1 {
            1
        } else {
            self.spec.spatial_cells()[1]
        }
    }

    /// Adds `-kappa * Laplace_h` to `m`.
    fn add_stiffness(&self, m: &mut BandedSym) {
        let spec = &self.spec;
        for s in 0..spec.n_space() {
            let mi = spec.space_multi_index(s);
            for d in 0..spec.spatial_dim() {
                let h = spec.cell_width(d);
                let c = self.kappa / (h * h);
                let n = spec.spatial_cells()[d];
                let stride = if d == 0 && spec.spatial_dim() == 2 { spec.spatial_cells()[1] } else { 1 };
                // interior faces couple neighbours; boundary faces see the
                // ghost value -y, i.e. an extra 2c on the diagonal
                for (has_nb, nb) in [(mi[d] > 0, s.wrapping_sub(stride)), (mi[d] + 1 < n, s + stride)] {
                    if has_nb {
                        m.add(s, s, c);
                        if nb < s {
                            m.add(s, nb, -c);
                        }
                    } else {
                        m.add(s, s, 2.0 * c);
                    }
                }
            }
        }
    }

    /// `-kappa * Laplace_h y`
    fn apply_stiffness(&self, y: &[f64]) -> Vec<f64> {
        let mut m = BandedSym::zeros(self.spec.n_space(), self.bandwidth());
        self.add_stiffness(&mut m);
        m.matvec(y)
    }

    /// `I/dt + A + diag(a'(y))`
    fn step_matrix(&self, y: &[f64]) -> BandedSym {
        let n = self.spec.n_space();
        let mut m = BandedSym::zeros(n, self.bandwidth());
        self.add_stiffness(&mut m);
        let inv_dt = 1.0 / self.spec.cell_measure_time();
        for (i, &yi) in y.iter().enumerate() {
            m.add(i, i, inv_dt + self.nonlinearity.d1(yi));
        }
        m
    }
}

fn check_control(cfg: &PdeConfig, u: &GridFunction) -> Result<()> {
    cfg.spec.check_same(u.spec())
}

/// Column-major copy: `out[k][s] = f(s, k)`.
fn by_time(f: &GridFunction) -> Vec<Vec<f64>> {
    (0..f.spec().n_time()).map(|k| f.time_slice(k)).collect()
}

fn from_time_slices(spec: GridSpec, cols: &[Vec<f64>]) -> GridFunction {
    let nt = spec.n_time();
    let mut values = vec![0.0; spec.len()];
    for (k, col) in cols.iter().enumerate() {
        for (s, &x) in col.iter().enumerate() {
            values[s * nt + k] = x;
        }
    }
    GridFunction::from_vec(spec, values)
}

/// Discrete state `y_u`.
pub fn solve_state(cfg: &PdeConfig, u: &GridFunction) -> Result<GridFunction> {
    check_control(cfg, u)?;
    let spec = cfg.spec;
    let inv_dt = 1.0 / spec.cell_measure_time();
    let a = cfg.nonlinearity;
    let uc = by_time(u);
    let mut prev = cfg.initial.clone();
    let mut cols = Vec::with_capacity(spec.n_time());
    for (k, uk) in uc.iter().enumerate() {
        let rhs: Vec<f64> = prev.iter().zip(uk).map(|(p, u)| p * inv_dt + u).collect();
        let scale = rhs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let residual = |y: &[f64]| -> Vec<f64> {
            let ay = cfg.apply_stiffness(y);
            (0..y.len()).map(|i| y[i] * inv_dt + ay[i] + a.eval(y[i]) - rhs[i]).collect()
        };
        let sup = |r: &[f64]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut y = prev.clone();
        let mut r = residual(&y);
        let mut rn = sup(&r);
        let mut it = 0;
        while rn > cfg.newton_tol * scale {
            it += 1;
            if it > cfg.newton_max_iter || !rn.is_finite() {
                return Err(Error::NewtonDiverged { step: k, residual: rn });
            }
            let chol = cfg.step_matrix(&y).cholesky()?;
            let mut d = r.clone();
            chol.solve_in_place(&mut d);
            // damped step: halve until the residual decreases
            let mut theta = 1.0;
            loop {
                let trial: Vec<f64> = y.iter().zip(&d).map(|(a, b)| a - theta * b).collect();
                let tr = residual(&trial);
                let tn = sup(&tr);
                if tn < rn || theta < 1e-4 || (a == Nonlinearity::Zero) {
                    y = trial;
                    r = tr;
                    rn = tn;
                    break;
                }
                theta *= 0.5;
            }
        }
        cols.push(y.clone());
        prev = y;
    }
    let y = from_time_slices(spec, &cols);
    if y.values().iter().any(|x| !x.is_finite()) {
        return Err(Error::NewtonDiverged { step: spec.n_time(), residual: f64::INFINITY });
    }
    Ok(y)
}

/// Factorized step matrices `M_k = I/dt + A + diag(a'(y_k))` along a state.
#[derive(Debug, Clone)]
pub struct Linearization {
    spec: GridSpec,
    steps: Vec<BandedCholesky>,
}

impl Linearization {
    pub fn new(cfg: &PdeConfig, y: &GridFunction) -> Result<Self> {
        cfg.spec.check_same(y.spec())?;
        let steps = (0..cfg.spec.n_time())
            .map(|k| cfg.step_matrix(&y.time_slice(k)).cholesky())
            .collect::<Result<Vec<_>>>()?;
        Ok(Linearization { spec: cfg.spec, steps })
    }

    /// `z_v`: `M_k z_k = z_{k-1}/dt + v_k`, `z_{-1} = 0`.
    pub fn forward(&self, v: &GridFunction) -> GridFunction {
        assert_eq!(&self.spec, v.spec(), "grid functions live on different grids");
        let inv_dt = 1.0 / self.spec.cell_measure_time();
        let mut prev = vec![0.0; self.spec.n_space()];
        let mut cols = Vec::with_capacity(self.steps.len());
        for (k, chol) in self.steps.iter().enumerate() {
            let mut rhs: Vec<f64> = v.time_slice(k).iter().zip(&prev).map(|(v, p)| v + p * inv_dt).collect();
            chol.solve_in_place(&mut rhs);
            prev = rhs.clone();
            cols.push(rhs);
        }
        from_time_slices(self.spec, &cols)
    }

    /// Transpose of [`Linearization::forward`]: `M_k p_k = r_k + p_{k+1}/dt`, `p_N = 0`.
    pub fn backward(&self, r: &GridFunction) -> GridFunction {
        assert_eq!(&self.spec, r.spec(), "grid functions live on different grids");
        let inv_dt = 1.0 / self.spec.cell_measure_time();
        let nt = self.steps.len();
        let mut next = vec![0.0; self.spec.n_space()];
        let mut cols = vec![Vec::new(); nt];
        for k in (0..nt).rev() {
            let mut rhs: Vec<f64> = r.time_slice(k).iter().zip(&next).map(|(r, p)| r + p * inv_dt).collect();
            self.steps[k].solve_in_place(&mut rhs);
            next = rhs.clone();
            cols[k] = rhs;
        }
        from_time_slices(self.spec, &cols)
    }
}

/// `z_v` for the linearization at the state `y`.
pub fn solve_linearized(cfg: &PdeConfig, y: &GridFunction, v: &GridFunction) -> Result<GridFunction> {
    check_control(cfg, v)?;
    Ok(Linearization::new(cfg, y)?.forward(v))
}

/// Adjoint state `phi` for the tracking functional at the state `y`.
pub fn solve_adjoint(cfg: &PdeConfig, y: &GridFunction) -> Result<GridFunction> {
    Ok(Linearization::new(cfg, y)?.backward(&y.sub(&cfg.target)))
}

fn tracking(cfg: &PdeConfig, y: &GridFunction, u: &GridFunction) -> f64 {
    0.5 * y.sub(&cfg.target).norm_l2().powi(2) + 0.5 * cfg.nu * u.norm_l2().powi(2)
}

/// `F(u) = 1/2 ||y_u - y_d||^2 + nu/2 ||u||^2`
pub fn objective_smooth(cfg: &PdeConfig, u: &GridFunction) -> Result<f64> {
    let y = solve_state(cfg, u)?;
    Ok(tracking(cfg, &y, u))
}

/// `F'(u) = phi_u + nu u`
pub fn grad_smooth(cfg: &PdeConfig, u: &GridFunction) -> Result<GridFunction> {
    Ok(StateTriple::new(cfg, u)?.gradient(cfg, u))
}

/// `F''(u)(v1, v2)`
pub fn hess_apply(cfg: &PdeConfig, u: &GridFunction, v1: &GridFunction, v2: &GridFunction) -> Result<f64> {
    check_control(cfg, v1)?;
    check_control(cfg, v2)?;
    Ok(StateTriple::new(cfg, u)?.hess(cfg, v1, v2))
}

/// State, adjoint and the factorized linearization at one control.
#[derive(Debug, Clone)]
pub struct StateTriple {
    pub y: GridFunction,
    pub phi: GridFunction,
    pub objective: f64,
    lin: Linearization,
}

impl StateTriple {
    pub fn new(cfg: &PdeConfig, u: &GridFunction) -> Result<Self> {
        let y = solve_state(cfg, u)?;
        let lin = Linearization::new(cfg, &y)?;
        let phi = lin.backward(&y.sub(&cfg.target));
        let objective = tracking(cfg, &y, u);
        Ok(StateTriple { y, phi, objective, lin })
    }

    pub fn linearization(&self) -> &Linearization {
        &self.lin
    }

    pub fn gradient(&self, cfg: &PdeConfig, u: &GridFunction) -> GridFunction {
        self.phi.axpy(cfg.nu, u)
    }

    /// Pointwise weight `1 - phi a''(y)` of the state part of `F''`.
    pub fn curvature_weight(&self, cfg: &PdeConfig) -> GridFunction {
        self.phi.zip_map(&self.y, |p, y| 1.0 - p * cfg.nonlinearity.d2(y))
    }

    pub fn hess(&self, cfg: &PdeConfig, v1: &GridFunction, v2: &GridFunction) -> f64 {
        let z1 = self.lin.forward(v1);
        let z2 = self.lin.forward(v2);
        self.curvature_weight(cfg).zip_map(&z1, |w, z| w * z).dot(&z2) + cfg.nu * v1.dot(v2)
    }

    /// `F''(u) v` as a grid function (the Riesz representative).
    pub fn hess_vec(&self, cfg: &PdeConfig, v: &GridFunction) -> GridFunction {
        let z = self.lin.forward(v);
        let wz = self.curvature_weight(cfg).zip_map(&z, |w, z| w * z);
        self.lin.backward(&wz).axpy(cfg.nu, v)
    }
}

fn random_unit(spec: GridSpec, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = GridFunction::from_vec(spec, (0..spec.len()).map(|_| StandardNormal.sample(&mut rng)).collect());
    let n = v.norm_l2();
    v.scale(1.0 / n)
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by power iteration.
fn power_iteration(spec: GridSpec, seed: u64, iters: usize, op: impl Fn(&GridFunction) -> GridFunction) -> f64 {
    let mut v = random_unit(spec, seed);
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = op(&v);
        let n = w.norm_l2();
        if n == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w.scale(1.0 / n);
        if (next - lambda).abs() <= 1e-10 * next.abs() {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda
}

/// `C_Z = ||v -> z_v||` at the control `u`, by power iteration on `L^T L`.
pub fn measure_cz(cfg: &PdeConfig, u: &GridFunction, seed: u64) -> Result<f64> {
    let t = StateTriple::new(cfg, u)?;
    let lin = t.linearization();
    Ok(power_iteration(cfg.spec, seed, 200, |v| lin.backward(&lin.forward(v))).max(0.0).sqrt())
}

/// Spectral bound of `F''(u)` (largest eigenvalue in magnitude of the
/// positive part), used as a Lipschitz estimate for `F'`.
pub fn lipschitz_estimate(cfg: &PdeConfig, u: &GridFunction, seed: u64) -> Result<f64> {
    let t = StateTriple::new(cfg, u)?;
    Ok(power_iteration(cfg.spec, seed, 100, |v| t.hess_vec(cfg, v)).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn cfg1(n: usize, nt: usize, a: Nonlinearity, nu: f64) -> PdeConfig {
        PdeConfig::new(GridSpec::unit(n, nt).unwrap(), 0.1, a, nu).unwrap()
    }

    fn rand_fn(spec: GridSpec, seed: u64, amp: f64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridFunction::from_cells(spec, |_, _| rng.random_range(-amp..amp)).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_state() {
        let cfg = cfg1(8, 5, Nonlinearity::Zero, 0.0);
        assert!(solve_state(&cfg, &GridFunction::zeros(cfg.spec)).unwrap().is_zero());
        assert_eq!(objective_smooth(&cfg, &GridFunction::zeros(cfg.spec)).unwrap(), 0.0);
    }

    #[test]
    fn stiffness_is_symmetric_with_dirichlet_ghosts() {
        let spec = GridSpec::new(&[3, 4], &[1.0, 2.0], 2, 1.0).unwrap();
        let cfg = PdeConfig::new(spec, 1.0, Nonlinearity::Zero, 0.0).unwrap();
        let ones = vec![1.0; 12];
        let a1 = cfg.apply_stiffness(&ones);
        // corner cell (0,0): ghost faces on both axes contribute 2/h^2 each
        let (hx, hy) = (1.0 / 3.0, 0.5);
        assert!((a1[0] - (2.0 / (hx * hx) + 2.0 / (hy * hy))).abs() < 1e-12);
        // interior in axis 1, boundary in axis 0: only the axis-0 ghost term remains
        assert!((a1[1] - 2.0 / (hx * hx)).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
        let y: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
        let ax = cfg.apply_stiffness(&x);
        let ay = cfg.apply_stiffness(&y);
        let d1: f64 = ax.iter().zip(&y).map(|(a, b)| a * b).sum();
        let d2: f64 = ay.iter().zip(&x).map(|(a, b)| a * b).sum();
        assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn manufactured_solution_converges() {
        let kappa = 0.1;
        let pi2 = std::f64::consts::PI.powi(2);
        let mut errs = Vec::new();
        for n in [8usize, 16, 32, 64] {
            let spec = GridSpec::unit(n, n * n / 8).unwrap();
            let x: Vec<f64> = (0..n).map(|s| spec.space_center(s)[0]).collect();
            let y0: Vec<f64> = x.iter().map(|x| (std::f64::consts::PI * x).sin()).collect();
            let cfg = PdeConfig::new(spec, kappa, Nonlinearity::Zero, 0.0).unwrap().with_initial(y0).unwrap();
            let dt = spec.cell_measure_time();
            // source evaluated at the end of each step (implicit Euler)
            let u = GridFunction::from_cells(spec, |s, k| {
                let t = (k + 1) as f64 * dt;
                (kappa * pi2 - 1.0) * (std::f64::consts::PI * x[s]).sin() * (-t).exp()
            })
            .unwrap();
            let y = solve_state(&cfg, &u).unwrap();
            let exact = GridFunction::from_cells(spec, |s, k| {
                (std::f64::consts::PI * x[s]).sin() * (-((k + 1) as f64 * dt)).exp()
            })
            .unwrap();
            errs.push(y.sub(&exact).norm_inf());
        }
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!(rate > 1.7, "{errs:?}");
        }
    }

    #[test]
    fn cubic_state_obeys_maximum_principle() {
        let spec = GridSpec::unit(12, 10).unwrap();
        let y0: Vec<f64> = (0..12).map(|s| 2.0 * (s as f64 / 11.0) * (1.0 - s as f64 / 11.0) + 0.3).collect();
        let max0 = y0.iter().cloned().fold(0.0, f64::max);
        let cfg = PdeConfig::new(spec, 0.5, Nonlinearity::Cubic, 0.0).unwrap().with_initial(y0).unwrap();
        let y = solve_state(&cfg, &GridFunction::zeros(spec)).unwrap();
        assert!(y.values().iter().all(|&v| (0.0..=max0).contains(&v)));
    }

    #[test]
    fn linearized_is_linear_and_matches_differences() {
        let cfg = cfg1(10, 8, Nonlinearity::Zero, 0.0);
        let spec = cfg.spec;
        let u = rand_fn(spec, 1, 1.0);
        let y = solve_state(&cfg, &u).unwrap();
        let (v1, v2) = (rand_fn(spec, 2, 1.0), rand_fn(spec, 3, 1.0));
        let lin = Linearization::new(&cfg, &y).unwrap();
        assert!(lin.forward(&GridFunction::zeros(spec)).is_zero());
        let lhs = lin.forward(&v1.add(&v2));
        let rhs = lin.forward(&v1).add(&lin.forward(&v2));
        assert!(lhs.sub(&rhs).norm_l2() <= 1e-12 * rhs.norm_l2());
        // a = 0: the state map is affine, so the difference quotient is exact
        let h = 1e-3;
        let fd = solve_state(&cfg, &u.axpy(h, &v1)).unwrap().sub(&y).scale(1.0 / h);
        assert!(fd.sub(&lin.forward(&v1)).norm_l2() < 1e-8);
    }

    #[test]
    fn adjoint_is_the_discrete_transpose() {
        for a in [Nonlinearity::Zero, Nonlinearity::Cubic, Nonlinearity::LinearCubic] {
            let spec = GridSpec::new(&[4, 5], &[1.0, 1.5], 6, 0.7).unwrap();
            let cfg = PdeConfig::new(spec, 0.3, a, 0.1).unwrap().with_target(rand_fn(spec, 4, 0.5)).unwrap();
            let u = rand_fn(spec, 5, 2.0);
            let y = solve_state(&cfg, &u).unwrap();
            let phi = solve_adjoint(&cfg, &y).unwrap();
            for seed in 0..3 {
                let v = rand_fn(spec, 10 + seed, 1.0);
                let z = solve_linearized(&cfg, &y, &v).unwrap();
                let lhs = y.sub(&cfg.target).dot(&z);
                let rhs = phi.dot(&v);
                assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()), "{a:?}: {lhs} vs {rhs}");
            }
        }
        let cfg = cfg1(6, 4, Nonlinearity::Cubic, 0.0);
        let u = rand_fn(cfg.spec, 6, 1.0);
        let y = solve_state(&cfg, &u).unwrap();
        let cfg = cfg.with_target(y.clone()).unwrap();
        assert!(solve_adjoint(&cfg, &y).unwrap().is_zero());
    }

    #[test]
    fn objective_examples() {
        let cfg = cfg1(6, 5, Nonlinearity::LinearCubic, 0.3);
        let u = rand_fn(cfg.spec, 7, 1.0);
        let y = solve_state(&cfg, &u).unwrap();
        let matched = cfg.clone().with_target(y).unwrap();
        let f = objective_smooth(&matched, &u).unwrap();
        assert!((f - 0.15 * u.norm_l2().powi(2)).abs() < 1e-15);
        assert!(objective_smooth(&cfg, &u).unwrap() >= 0.15 * u.norm_l2().powi(2));

        let stationary = cfg1(6, 5, Nonlinearity::Zero, 1.0);
        let y0 = solve_state(&stationary, &GridFunction::zeros(stationary.spec)).unwrap();
        let stationary = stationary.with_target(y0).unwrap();
        assert!(grad_smooth(&stationary, &GridFunction::zeros(stationary.spec)).unwrap().is_zero());

        let mut doubled = cfg.clone();
        doubled.nu *= 2.0;
        let g1 = grad_smooth(&cfg, &u).unwrap();
        let g2 = grad_smooth(&doubled, &u).unwrap();
        assert!(g2.sub(&g1).sub(&u.scale(cfg.nu)).norm_inf() < 1e-14);
    }

    #[test]
    fn hessian_symmetry_and_convex_case() {
        let cfg = cfg1(7, 6, Nonlinearity::Cubic, 0.2).with_target(rand_fn(GridSpec::unit(7, 6).unwrap(), 8, 1.0)).unwrap();
        let u = rand_fn(cfg.spec, 9, 1.5);
        let (v1, v2) = (rand_fn(cfg.spec, 10, 1.0), rand_fn(cfg.spec, 11, 1.0));
        let t = StateTriple::new(&cfg, &u).unwrap();
        let (h12, h21) = (t.hess(&cfg, &v1, &v2), t.hess(&cfg, &v2, &v1));
        assert!((h12 - h21).abs() <= 1e-12 * h12.abs());
        assert_eq!(t.hess(&cfg, &v1, &GridFunction::zeros(cfg.spec)), 0.0);
        assert!((t.hess_vec(&cfg, &v1).dot(&v2) - h12).abs() <= 1e-11 * h12.abs().max(1.0));

        let lin = cfg1(7, 6, Nonlinearity::Zero, 0.5);
        let t = StateTriple::new(&lin, &u).unwrap();
        let z = t.linearization().forward(&v1);
        let expected = z.norm_l2().powi(2) + 0.5 * v1.norm_l2().powi(2);
        assert!((t.hess(&lin, &v1, &v1) - expected).abs() < 1e-13);
    }

    #[test]
    fn cz_bounds_linearized_map() {
        let cfg = cfg1(8, 8, Nonlinearity::LinearCubic, 0.0);
        let u = rand_fn(cfg.spec, 12, 1.0);
        let cz = measure_cz(&cfg, &u, 1).unwrap();
        assert!(cz > 0.0);
        let y = solve_state(&cfg, &u).unwrap();
        for seed in 0..5 {
            let v = rand_fn(cfg.spec, 20 + seed, 1.0);
            let z = solve_linearized(&cfg, &y, &v).unwrap();
            assert!(z.norm_l2() <= cz * v.norm_l2() * (1.0 + 1e-6));
        }
    }
}
