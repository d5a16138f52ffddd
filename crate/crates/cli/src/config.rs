//! TOML experiment configuration. Sections are parsed leniently and then
//! validated per subcommand into plain library types.

use std::path::PathBuf;

use partomo::calculus::Moment;
use partomo::dynamics::{Route, DEFAULT_DT_FD};
use partomo::evolve::HamiltonianSpec;
use partomo::joint::{GaussianParamDist, MIN_WIDTHS};
use partomo::state::Preset;
use partomo::tomography::{Kind, ReconstructionOptions};
use partomo::GridSpec;
use serde::Deserialize;

use crate::Failure;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub state: Option<Preset>,
    #[serde(default)]
    pub grids: GridsSection,
    pub representation: Option<RepresentationSection>,
    pub distribution: Option<DistributionSection>,
    pub hamiltonian: Option<HamiltonianSection>,
    #[serde(default)]
    pub dynamics: DynamicsSection,
    #[serde(default)]
    pub moments: MomentsSection,
    #[serde(default)]
    pub reconstruct: ReconstructSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridsSection {
    pub state: Option<GridConfig>,
    pub x: Option<GridConfig>,
    pub param: Option<GridConfig>,
    pub q: Option<GridConfig>,
    pub p: Option<GridConfig>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationSection {
    pub kind: Kind,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSection {
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    /// `c_0, c_1, ...` of `V(q) = Σ c_k q^k`.
    pub potential: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsMode {
    Evolution,
    Stationary,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteChoice {
    Generic,
    Expanded,
    #[default]
    Both,
}

impl RouteChoice {
    pub fn routes(self) -> Vec<Route> {
        match self {
            RouteChoice::Generic => vec![Route::Generic],
            RouteChoice::Expanded => vec![Route::Expanded],
            RouteChoice::Both => vec![Route::Generic, Route::Expanded],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationaryCase {
    pub state: Preset,
    pub energy: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsSection {
    #[serde(default)]
    pub mode: DynamicsMode,
    #[serde(default = "default_times")]
    pub times: Vec<f64>,
    #[serde(default = "default_dt")]
    pub dt_fd: f64,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    #[serde(default = "default_tol")]
    pub stationary_tolerance: f64,
    #[serde(default)]
    pub route: RouteChoice,
    /// Energy of the `[state]` eigenstate when no explicit cases are given.
    pub energy: Option<f64>,
    #[serde(default)]
    pub stationary: Vec<StationaryCase>,
}

impl Default for DynamicsSection {
    fn default() -> Self {
        DynamicsSection {
            mode: DynamicsMode::default(),
            times: default_times(),
            dt_fd: default_dt(),
            tolerance: default_tol(),
            stationary_tolerance: default_tol(),
            route: RouteChoice::default(),
            energy: None,
            stationary: Vec::new(),
        }
    }
}

fn default_times() -> Vec<f64> {
    vec![0.0, 0.5, 1.0]
}

fn default_dt() -> f64 {
    DEFAULT_DT_FD
}

fn default_tol() -> f64 {
    1e-3
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentsSection {
    pub names: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructSection {
    /// Tomogram file (`.csv` or `.json`); the `[state]` is used when absent.
    pub input: Option<PathBuf>,
    pub min_coverage: Option<f64>,
    pub gap_nodes: Option<usize>,
    pub gap_points: Option<usize>,
    pub norm_tol: Option<f64>,
    pub bound_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        matches!(self, Format::Csv | Format::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, Format::Json | Format::Both)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn parse(text: &str) -> Result<RawConfig, Failure> {
    toml::from_str(text).map_err(|e| Failure::Config(format!("config: {e}")))
}

fn config_err(field: &str, e: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("{field}: {e}"))
}

pub fn grid(field: &str, g: Option<GridConfig>, fallback: GridSpec) -> Result<GridSpec, Failure> {
    match g {
        Some(g) => GridSpec::new(g.min, g.max, g.points).map_err(|e| config_err(field, e)),
        None => Ok(fallback),
    }
}

pub fn default_state_grid() -> GridSpec {
    GridSpec::new(-10.0, 10.0, 256).expect("static grid")
}

pub fn symmetric(half: f64, step: f64) -> GridSpec {
    GridSpec::symmetric(half, step).expect("static grid")
}

impl RawConfig {
    pub fn state(&self) -> Result<&Preset, Failure> {
        self.state.as_ref().ok_or_else(|| Failure::Config("[state]: section is required".into()))
    }

    pub fn state_grid(&self) -> Result<GridSpec, Failure> {
        grid("grids.state", self.grids.state, default_state_grid())
    }

    pub fn kind(&self) -> Result<Kind, Failure> {
        self.representation
            .as_ref()
            .map(|r| r.kind)
            .ok_or_else(|| Failure::Config("[representation]: section with `kind` is required".into()))
    }

    pub fn distribution(&self, kind: Kind) -> Result<Option<GaussianParamDist>, Failure> {
        self.distribution
            .map(|d| GaussianParamDist::new(kind, d.center, d.width).map_err(|e| config_err("distribution", e)))
            .transpose()
    }

    pub fn hamiltonian(&self) -> Result<HamiltonianSpec, Failure> {
        let h = self.hamiltonian.as_ref().ok_or_else(|| Failure::Config("[hamiltonian]: section is required".into()))?;
        HamiltonianSpec::new(h.potential.clone()).map_err(|e| config_err("hamiltonian.potential", e))
    }

    /// Parameter grid reaching past the distribution when one is given.
    pub fn param_grid(&self, fallback: GridSpec, dist: Option<&GaussianParamDist>, step: f64) -> Result<GridSpec, Failure> {
        let fallback = match dist {
            Some(d) => {
                let half = ((d.center.abs() + (MIN_WIDTHS + 0.5) * d.width) / step).ceil() * step;
                symmetric(half.max(fallback.abs_max()), step)
            }
            None => fallback,
        };
        grid("grids.param", self.grids.param, fallback)
    }

    pub fn moment_names(&self) -> Result<Vec<Moment>, Failure> {
        match &self.moments.names {
            None => Ok(Moment::ALL.to_vec()),
            Some(names) => names
                .iter()
                .map(|n| {
                    Moment::ALL
                        .into_iter()
                        .find(|m| m.label() == n || (n == "qp" && *m == Moment::Qp))
                        .ok_or_else(|| config_err("moments.names", format!("unknown moment `{n}` (expected q, p, q2, p2, qp)")))
                })
                .collect(),
        }
    }

    pub fn reconstruction_options(&self) -> Result<ReconstructionOptions, Failure> {
        let q = grid("grids.q", self.grids.q, self.state_grid()?)?;
        let p = grid("grids.p", self.grids.p, q)?;
        let r = &self.reconstruct;
        let d = ReconstructionOptions::default();
        let opts = ReconstructionOptions {
            q_grid: q,
            p_grid: p,
            min_coverage: r.min_coverage.unwrap_or(d.min_coverage),
            gap_nodes: r.gap_nodes.unwrap_or(d.gap_nodes),
            gap_points: r.gap_points.unwrap_or(d.gap_points),
            norm_tol: r.norm_tol.unwrap_or(d.norm_tol),
            bound_tol: r.bound_tol.unwrap_or(d.bound_tol),
        };
        for (field, v) in [("reconstruct.min_coverage", opts.min_coverage), ("reconstruct.norm_tol", opts.norm_tol), ("reconstruct.bound_tol", opts.bound_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(field, format!("{v} must be positive")));
            }
        }
        if opts.gap_nodes == 0 || opts.gap_points < 2 {
            return Err(config_err("reconstruct.gap_nodes", "need at least one node and two gap points"));
        }
        Ok(opts)
    }

    pub fn check_dynamics(&self) -> Result<(), Failure> {
        let d = &self.dynamics;
        if d.times.is_empty() || d.times.iter().any(|t| !t.is_finite()) {
            return Err(config_err("dynamics.times", "need at least one finite time"));
        }
        for (field, v) in [("dynamics.dt_fd", d.dt_fd), ("dynamics.tolerance", d.tolerance), ("dynamics.stationary_tolerance", d.stationary_tolerance)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(field, format!("{v} must be positive")));
            }
        }
        Ok(())
    }
}
