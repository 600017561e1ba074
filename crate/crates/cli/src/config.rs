//! TOML experiment configuration.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use monopole_core::{DomainWindow, Model, ModelParams, PhasePoint, RationalM};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_params")]
    pub params: ModelParams,
    #[serde(default)]
    pub window: DomainWindow,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub closure: ClosureConfig,
    #[serde(default)]
    pub parity: ParityConfig,
    #[serde(default)]
    pub map: MapConfig,
    #[serde(default)]
    pub reduce2d: Reduce2dConfig,
    /// Directory of the config file; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Generic parameters at `m = 2/3` with every constant switched on.
pub fn default_params() -> ModelParams {
    ModelParams {
        m: RationalM::new(2, 3).unwrap(),
        delta: 1,
        nu: 1.0,
        alpha1: 1.0,
        beta1: 1.0,
        alpha2: 0.2,
        beta2: -2.0,
        k: 0.8,
        ell: 0.0,
        a: 0.1,
        b: 0.05,
        c: 0.03,
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            params: default_params(),
            window: DomainWindow::default(),
            verify: VerifyConfig::default(),
            simulate: SimulateConfig::default(),
            closure: ClosureConfig::default(),
            parity: ParityConfig::default(),
            map: MapConfig::default(),
            reduce2d: Reduce2dConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    pub r: f64,
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub p_r: f64,
    #[serde(default)]
    pub p_theta: f64,
    #[serde(default)]
    pub p_phi: f64,
}

impl PointSpec {
    pub fn to_array(self) -> [f64; 6] {
        [self.r, self.theta, self.phi, self.p_r, self.p_theta, self.p_phi]
    }

    pub fn phase_point(self) -> Result<PhasePoint, CliError> {
        PhasePoint::new(self.r, self.theta, self.phi, self.p_r, self.p_theta, self.p_phi)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub n_points: u64,
    /// Values of `m` to verify; empty means `params.m` only.
    pub m_list: Vec<RationalM>,
    pub tolerance: f64,
    /// Redraws per point when `S <= 0`; 1 skips such points.
    pub max_tries: usize,
    pub min_rank4_fraction: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            n_points: 1000,
            m_list: Vec::new(),
            tolerance: monopole_core::verify::BRACKET_TOL,
            max_tries: 200,
            min_rank4_fraction: 0.95,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    Midpoint,
    Rk45,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub dt: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub sample_every: usize,
    pub method: MethodName,
    pub rk_tol: f64,
    /// Exit with a failure when any tracked drift exceeds this.
    pub max_drift: Option<f64>,
    pub initial: Vec<PointSpec>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 100.0,
            newton_tol: 1e-14,
            sample_every: 10,
            method: MethodName::Midpoint,
            rk_tol: 1e-10,
            max_drift: None,
            initial: vec![PointSpec {
                r: 1.5,
                theta: 1.3,
                phi: 0.0,
                p_r: 0.1,
                p_theta: 0.1,
                p_phi: 0.5,
            }],
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosureCase {
    pub label: String,
    pub initial: PointSpec,
    /// Replace `r` by the radial equilibrium at the given `(θ, p_θ, p_φ)`.
    #[serde(default)]
    pub circular: bool,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    /// Expected verdict; a mismatch fails the command.
    pub expect_closes: Option<bool>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClosureConfig {
    pub t_end: f64,
    pub dt: f64,
    pub eps_close: f64,
    pub t_guard: Option<f64>,
    pub cases: Vec<ClosureCase>,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        Self {
            t_end: 200.0,
            dt: 1e-3,
            eps_close: 1e-3,
            t_guard: None,
            cases: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParityConfig {
    pub max_m1m2: u64,
    /// Random points per pair for the symbolic-vs-numeric check; 0 disables it.
    pub consistency_points: u64,
}

impl Default for ParityConfig {
    fn default() -> Self {
        Self {
            max_m1m2: 9,
            consistency_points: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    ToTaubnut,
    FromTaubnut,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    pub direction: Direction,
    /// JSON file holding an array of points.
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub points: Vec<PointSpec>,
}

impl Default for MapConfig {
    fn default() -> Self {
        Self {
            direction: Direction::ToTaubnut,
            input: None,
            points: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Reduce2dConfig {
    pub p0: Vec<f64>,
}

impl Default for Reduce2dConfig {
    fn default() -> Self {
        Self { p0: vec![0.0] }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(bad(format!("{name} must be positive and finite, got {x}")))
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: Self = toml::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn model(&self) -> Result<Model, CliError> {
        Model::new(self.params.clone(), self.window).map_err(|e| bad(e.to_string()))
    }

    pub fn model_with_m(&self, m: RationalM) -> Result<Model, CliError> {
        let mut p = self.params.clone();
        p.m = m;
        Model::new(p, self.window).map_err(|e| bad(e.to_string()))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Checks the parameters and every command block.
    pub fn validate(&self) -> Result<(), CliError> {
        self.model()?;
        for &m in &self.verify.m_list {
            self.model_with_m(m)?;
        }

        let v = &self.verify;
        if v.n_points == 0 {
            return Err(bad("verify.n_points must be at least 1"));
        }
        positive("verify.tolerance", v.tolerance)?;
        if v.max_tries == 0 {
            return Err(bad("verify.max_tries must be at least 1"));
        }
        if !(0.0..=1.0).contains(&v.min_rank4_fraction) {
            return Err(bad("verify.min_rank4_fraction must lie in [0, 1]"));
        }

        let s = &self.simulate;
        positive("simulate.dt", s.dt)?;
        positive("simulate.t_end", s.t_end)?;
        positive("simulate.newton_tol", s.newton_tol)?;
        positive("simulate.rk_tol", s.rk_tol)?;
        if s.sample_every == 0 {
            return Err(bad("simulate.sample_every must be at least 1"));
        }
        if let Some(d) = s.max_drift {
            positive("simulate.max_drift", d)?;
        }
        for p in &s.initial {
            self.model()?
                .check_point(&p.phase_point()?)
                .map_err(|e| bad(format!("simulate.initial: {e}")))?;
        }

        let c = &self.closure;
        positive("closure.t_end", c.t_end)?;
        positive("closure.dt", c.dt)?;
        positive("closure.eps_close", c.eps_close)?;
        if let Some(g) = c.t_guard {
            if !(g >= 0.0 && g < c.t_end) {
                return Err(bad("closure.t_guard must lie in [0, t_end)"));
            }
        }
        for case in &c.cases {
            let md = self.closure_model(case)?;
            md.check_point(&case.initial.phase_point()?)
                .map_err(|e| bad(format!("closure case {:?}: {e}", case.label)))?;
        }

        if !(1..=20).contains(&self.parity.max_m1m2) {
            return Err(bad("parity.max_m1m2 must lie in 1..=20"));
        }

        if self.map.input.is_some() && !self.map.points.is_empty() {
            return Err(bad("map: give either input or points, not both"));
        }

        if self.reduce2d.p0.iter().any(|p| !p.is_finite()) {
            return Err(bad("reduce2d.p0 entries must be finite"));
        }
        Ok(())
    }

    pub fn closure_model(&self, case: &ClosureCase) -> Result<Model, CliError> {
        let mut p = self.params.clone();
        p.a = case.a.unwrap_or(p.a);
        p.b = case.b.unwrap_or(p.b);
        p.c = case.c.unwrap_or(p.c);
        Model::new(p, self.window).map_err(|e| bad(format!("closure case {:?}: {e}", case.label)))
    }

    /// Points for the `map` command, read from `input` or `points`.
    pub fn map_points(&self) -> Result<Vec<PointSpec>, CliError> {
        let pts = match &self.map.input {
            Some(path) => {
                let path = self.resolve(path);
                let text =
                    std::fs::read_to_string(&path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?
            }
            None => self.map.points.clone(),
        };
        if pts.is_empty() {
            return Err(bad("map: no input points"));
        }
        for p in &pts {
            if !(p.r > 0.0 && p.theta > 0.0 && p.theta < PI) {
                return Err(bad(format!("map: point {p:?} outside r > 0, 0 < theta < pi")));
            }
        }
        Ok(pts)
    }
}
