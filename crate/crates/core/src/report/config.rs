//! Sectioned `key = value` configuration files (TOML).
//!
//! ```toml
//! [grid]
//! spatial_cells = [32]
//! spatial_extent = [1.0]
//! time_cells = 32
//! horizon = 1.0
//!
//! [control]
//! kind = "j1"
//! mu = 0.01
//! alpha = -1.0
//! beta = 1.0
//!
//! [pde]
//! kappa = 0.1
//! nonlinearity = "zero"
//! nu = 1.0
//! target = { profile = "sine_bump", amplitude = 2.0 }
//!
//! [solver]
//! tol = 1e-10
//!
//! [analysis]
//! samples = 20
//! seed = 7
//! ```
//!
//! Every section and key is optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{Bounds, ControlSpec};
use crate::error::{Error, Result};
use crate::fnspace::{self, GridFunction, GridSpec};
use crate::pde::{Nonlinearity, PdeConfig, TimeScheme};
use crate::solver::{ProblemConfig, SolveOptions, StepPolicy};
use crate::sparsity::SparsityKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub spatial_cells: Vec<usize>,
    pub spatial_extent: Vec<f64>,
    pub time_cells: usize,
    pub horizon: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { spatial_cells: vec![16], spatial_extent: vec![1.0], time_cells: 16, horizon: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControlSection {
    pub kind: SparsityKind,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ControlSection {
    fn default() -> Self {
        ControlSection { kind: SparsityKind::J1, mu: 0.01, alpha: -1.0, beta: 1.0 }
    }
}

/// Space-time data: `y_d` and `y0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    Constant { value: f64 },
    /// `amplitude * prod_i sin(pi x_i / L_i)`, times `t / T` for space-time data.
    SineBump { amplitude: f64 },
    /// CSV file (rows = spatial cells, columns = time cells; one column for `y0`).
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSection {
    pub kappa: f64,
    pub nonlinearity: Nonlinearity,
    pub nu: f64,
    pub target: Profile,
    pub initial: Profile,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub scheme: TimeScheme,
}

impl Default for PdeSection {
    fn default() -> Self {
        PdeSection {
            kappa: 0.1,
            nonlinearity: Nonlinearity::Zero,
            nu: 1.0,
            target: Profile::SineBump { amplitude: 2.0 },
            initial: Profile::Zero,
            newton_tol: 1e-13,
            newton_max_iter: 50,
            scheme: TimeScheme::ImplicitEuler,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepSetting {
    Bb,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub step: StepSetting,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { tol: 1e-10, max_iter: 5000, step: StepSetting::Bb }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Sampled critical directions.
    pub samples: usize,
    pub seed: u64,
    /// Tolerance for stationarity and cone membership.
    pub tol: f64,
    /// Required first-order residual.
    pub kkt_tol: f64,
    pub growth_samples: usize,
    pub growth_radius: f64,
    /// `t` values of the quotient-along-recovery curves.
    pub t_schedule: Vec<f64>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            samples: 20,
            seed: 0,
            tol: 1e-6,
            kkt_tol: 1e-8,
            growth_samples: 500,
            growth_radius: 1e-2,
            t_schedule: (1..=8).map(|k| 0.25f64.powi(k)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    pub control: ControlSection,
    pub pde: PdeSection,
    pub solver: SolverSection,
    pub analysis: AnalysisSection,
    /// Directory that relative `file` profiles are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks everything that does not need external files.
    pub fn validate(&self) -> Result<()> {
        let c = &self.control;
        if !(c.alpha < 0.0 && 0.0 < c.beta) || !c.alpha.is_finite() || !c.beta.is_finite() {
            return Err(Error::Config(format!(
                "control bounds violate α < 0 < β (alpha = {}, beta = {})",
                c.alpha, c.beta
            )));
        }
        if !(c.mu > 0.0 && c.mu.is_finite()) {
            return Err(Error::Config(format!("mu must be positive, got {}", c.mu)));
        }
        let a = &self.analysis;
        if !(a.tol > 0.0 && a.kkt_tol > 0.0 && a.growth_radius > 0.0) {
            return Err(Error::Config("analysis tolerances and growth radius must be positive".into()));
        }
        if a.t_schedule.iter().any(|&t| !(t > 0.0)) {
            return Err(Error::Config("t_schedule entries must be positive".into()));
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return Err(Error::Config("solver tolerance and iteration cap must be positive".into()));
        }
        if let StepSetting::Fixed(s) = self.solver.step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("fixed step must be positive, got {s}")));
            }
        }
        self.grid_spec().map(|_| ())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        let g = &self.grid;
        GridSpec::new(&g.spatial_cells, &g.spatial_extent, g.time_cells, g.horizon).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn control_spec(&self) -> Result<ControlSpec> {
        let c = &self.control;
        let bounds = Bounds::new(c.alpha, c.beta).map_err(|e| Error::Config(e.to_string()))?;
        ControlSpec::new(c.kind, c.mu, bounds).map_err(|e| Error::Config(e.to_string()))
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        match &self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }

    fn space_time_profile(&self, spec: GridSpec, p: &Profile) -> Result<GridFunction> {
        match p {
            Profile::Zero => Ok(GridFunction::zeros(spec)),
            Profile::Constant { value } => GridFunction::new(spec, vec![*value; spec.len()]),
            Profile::SineBump { amplitude } => {
                let bump = sine_bump(spec);
                GridFunction::from_cells(spec, |s, k| amplitude * bump[s] * spec.time_center(k) / spec.horizon())
            }
            Profile::File { path } => fnspace::read_csv(spec, &self.resolve(path)),
        }
    }

    fn space_profile(&self, spec: GridSpec, p: &Profile) -> Result<Vec<f64>> {
        let n = spec.n_space();
        let v = match p {
            Profile::Zero => vec![0.0; n],
            Profile::Constant { value } => vec![*value; n],
            Profile::SineBump { amplitude } => sine_bump(spec).into_iter().map(|b| amplitude * b).collect(),
            Profile::File { path } => {
                let single = GridSpec::new(spec.spatial_cells(), spec.spatial_extent(), 1, 1.0)?;
                fnspace::read_csv(single, &self.resolve(path))?.into_values()
            }
        };
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("initial state is not finite".into()));
        }
        Ok(v)
    }

    pub fn pde_config(&self) -> Result<PdeConfig> {
        let spec = self.grid_spec()?;
        let p = &self.pde;
        let mut cfg = PdeConfig::new(spec, p.kappa, p.nonlinearity, p.nu)?;
        cfg.newton_tol = p.newton_tol;
        cfg.newton_max_iter = p.newton_max_iter;
        cfg.scheme = p.scheme;
        let cfg = cfg.with_target(self.space_time_profile(spec, &p.target)?)?.with_initial(self.space_profile(spec, &p.initial)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn problem(&self) -> Result<ProblemConfig> {
        ProblemConfig::new(self.control_spec()?, self.pde_config()?)
    }

    pub fn solve_options(&self) -> SolveOptions {
        let s = &self.solver;
        SolveOptions {
            step: match s.step {
                StepSetting::Bb => StepPolicy::BarzilaiBorwein,
                StepSetting::Fixed(x) => StepPolicy::Fixed(x),
            },
            tol: s.tol,
            max_iter: s.max_iter,
            seed: self.analysis.seed,
        }
    }
}

fn sine_bump(spec: GridSpec) -> Vec<f64> {
    (0..spec.n_space())
        .map(|s| {
            let c = spec.space_center(s);
            (0..spec.spatial_dim()).map(|d| (std::f64::consts::PI * c[d] / spec.spatial_extent()[d]).sin()).product()
        })
        .collect()
}
