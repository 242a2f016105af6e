//! Flat `section.key = value` run configuration.

use std::collections::HashSet;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::evolution::{
    init_state, Advection, InitRecipe, Manufactured, RunOptions, Scheme, StepConfig,
};
use crate::fields::{BoundaryMode, FluidParams, GridSpec, State};

/// Initial data: a catalog recipe, or the manufactured solution at `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Recipe(InitRecipe),
    Manufactured,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchauderConfig {
    /// Mollifier width; `None` means two grid spacings.
    pub epsilon: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceConfig {
    pub grids: Vec<usize>,
    pub dts: Vec<f64>,
    /// Step of the spatial ladder.
    pub spatial_dt: f64,
    /// Grid of the temporal ladder.
    pub temporal_n: usize,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub samples: usize,
    pub grids: Vec<usize>,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub mode: BoundaryMode,
    pub params: FluidParams,
    pub dt: f64,
    pub t_end: f64,
    pub init: InitSpec,
    pub seed: u64,
    pub scheme: Scheme,
    pub advection: Advection,
    pub cfl_limit: f64,
    pub forcing: Option<Manufactured>,
    pub stride: usize,
    pub lq_exponent: f64,
    pub schauder: SchauderConfig,
    pub delta: f64,
    pub convergence: ConvergenceConfig,
    pub probe: ProbeConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 32,
            mode: BoundaryMode::DirichletSquare,
            params: FluidParams {
                mu: 0.05,
                chi: 0.1,
                nu: 0.05,
            },
            dt: 1e-3,
            t_end: 0.1,
            init: InitSpec::Recipe(InitRecipe::Smooth),
            seed: 0,
            scheme: Scheme::ImexEuler,
            advection: Advection::Upwind2,
            cfl_limit: 0.5,
            forcing: None,
            stride: 10,
            lq_exponent: 4.0,
            schauder: SchauderConfig {
                epsilon: None,
                tol: 1e-8,
                max_iter: 50,
                max_halvings: 4,
            },
            delta: 1e-6,
            convergence: ConvergenceConfig {
                grids: vec![16, 32, 64],
                dts: vec![0.002, 0.001, 0.0005, 0.00025],
                spatial_dt: 5e-4,
                temporal_n: 64,
                t_end: 0.1,
            },
            probe: ProbeConfig {
                samples: 50,
                grids: vec![16, 32, 64],
                q: 2.0,
            },
        }
    }
}

const KEYS: [&str; 28] = [
    "grid.n",
    "grid.mode",
    "params.mu",
    "params.chi",
    "params.nu",
    "time.dt",
    "time.t_end",
    "init.recipe",
    "init.seed",
    "scheme.time",
    "scheme.advection",
    "scheme.cfl_limit",
    "scheme.forcing",
    "output.stride",
    "output.lq_exponent",
    "schauder.epsilon",
    "schauder.tol",
    "schauder.max_iter",
    "schauder.max_halvings",
    "uniqueness.delta",
    "convergence.grids",
    "convergence.dts",
    "convergence.spatial_dt",
    "convergence.temporal_n",
    "convergence.t_end",
    "probe.samples",
    "probe.grids",
    "probe.q",
];

fn num<T: FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config {
        line,
        msg: format!("`{key}`: cannot parse `{v}`"),
    })
}

fn list<T: FromStr>(line: usize, key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|s| num(line, key, s.trim())).collect()
}

fn bad(line: usize, msg: impl Into<String>) -> Error {
    Error::Config {
        line,
        msg: msg.into(),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = HashSet::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| {
                bad(
                    line,
                    format!("expected `section.key = value`, got `{body}`"),
                )
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(bad(line, format!("unknown key `{key}`")));
            }
            if !seen.insert(key.to_string()) {
                return Err(bad(line, format!("duplicate key `{key}`")));
            }
            cfg.set(line, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn set(&mut self, line: usize, key: &str, v: &str) -> Result<()> {
        match key {
            "grid.n" => self.n = num(line, key, v)?,
            "grid.mode" => {
                self.mode = BoundaryMode::parse(v)
                    .ok_or_else(|| bad(line, format!("unknown grid mode `{v}`")))?
            }
            "params.mu" => self.params.mu = num(line, key, v)?,
            "params.chi" => self.params.chi = num(line, key, v)?,
            "params.nu" => self.params.nu = num(line, key, v)?,
            "time.dt" => self.dt = num(line, key, v)?,
            "time.t_end" => self.t_end = num(line, key, v)?,
            "init.recipe" => {
                self.init = if v == "manufactured" {
                    InitSpec::Manufactured
                } else {
                    InitSpec::Recipe(
                        InitRecipe::parse(v)
                            .map_err(|_| bad(line, format!("unknown init recipe `{v}`")))?,
                    )
                }
            }
            "init.seed" => self.seed = num(line, key, v)?,
            "scheme.time" => {
                self.scheme = Scheme::parse(v)
                    .ok_or_else(|| bad(line, format!("unknown time scheme `{v}`")))?
            }
            "scheme.advection" => {
                self.advection = Advection::parse(v)
                    .ok_or_else(|| bad(line, format!("unknown advection `{v}`")))?
            }
            "scheme.cfl_limit" => self.cfl_limit = num(line, key, v)?,
            "scheme.forcing" => {
                self.forcing = match v {
                    "none" => None,
                    _ => Some(
                        Manufactured::parse(v)
                            .map_err(|_| bad(line, format!("unknown forcing `{v}`")))?,
                    ),
                }
            }
            "output.stride" => self.stride = num(line, key, v)?,
            "output.lq_exponent" => self.lq_exponent = num(line, key, v)?,
            "schauder.epsilon" => self.schauder.epsilon = Some(num(line, key, v)?),
            "schauder.tol" => self.schauder.tol = num(line, key, v)?,
            "schauder.max_iter" => self.schauder.max_iter = num(line, key, v)?,
            "schauder.max_halvings" => self.schauder.max_halvings = num(line, key, v)?,
            "uniqueness.delta" => self.delta = num(line, key, v)?,
            "convergence.grids" => self.convergence.grids = list(line, key, v)?,
            "convergence.dts" => self.convergence.dts = list(line, key, v)?,
            "convergence.spatial_dt" => self.convergence.spatial_dt = num(line, key, v)?,
            "convergence.temporal_n" => self.convergence.temporal_n = num(line, key, v)?,
            "convergence.t_end" => self.convergence.t_end = num(line, key, v)?,
            "probe.samples" => self.probe.samples = num(line, key, v)?,
            "probe.grids" => self.probe.grids = list(line, key, v)?,
            "probe.q" => self.probe.q = num(line, key, v)?,
            _ => return Err(bad(line, format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Every range check, so a bad file fails before any compute.
    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::Config { line: 0, msg });
        GridSpec::new(self.n, self.mode)?;
        self.params.validate()?;
        self.step_config().validate()?;
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return err(format!("time.t_end must be >= 0, got {}", self.t_end));
        }
        if self.stride == 0 {
            return err("output.stride must be >= 1".into());
        }
        if !(self.lq_exponent >= 2.0 && self.lq_exponent.is_finite()) {
            return err(format!(
                "L^q exponent must lie in [2, inf), got {}",
                self.lq_exponent
            ));
        }
        if let Some(e) = self.schauder.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return err(format!("schauder.epsilon must be > 0, got {e}"));
            }
        }
        if !(self.schauder.tol > 0.0) || self.schauder.max_iter == 0 {
            return err("schauder.tol must be > 0 and schauder.max_iter >= 1".into());
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return err(format!("uniqueness.delta must be >= 0, got {}", self.delta));
        }
        let c = &self.convergence;
        if c.grids.len() < 3 {
            return err("convergence.grids needs at least 3 levels".into());
        }
        if c.dts.len() < 3 {
            return err("convergence.dts needs at least 3 levels".into());
        }
        for &n in c
            .grids
            .iter()
            .chain(&self.probe.grids)
            .chain([&c.temporal_n])
        {
            GridSpec::new(n, BoundaryMode::DirichletSquare)?;
        }
        if c.dts
            .iter()
            .chain([&c.spatial_dt, &c.t_end])
            .any(|&d| !(d > 0.0 && d.is_finite()))
        {
            return err("convergence steps and horizon must be > 0".into());
        }
        if self.probe.samples == 0 || self.probe.grids.is_empty() || !(self.probe.q > 1.0) {
            return err("probe needs samples >= 1, at least one grid and q > 1".into());
        }
        match (self.init, self.mode) {
            (InitSpec::Recipe(InitRecipe::TaylorGreen), BoundaryMode::DirichletSquare) => {
                err("init.recipe taylor-green needs grid.mode = periodic".into())
            }
            (InitSpec::Recipe(InitRecipe::RandomH1), BoundaryMode::Periodic) => {
                err("init.recipe random-h1 needs grid.mode = dirichlet".into())
            }
            (InitSpec::Manufactured, _) if self.forcing.is_none() => {
                err("init.recipe manufactured needs scheme.forcing".into())
            }
            _ => Ok(()),
        }
    }

    /// Serialize every key; `parse(to_text())` reproduces the config.
    pub fn to_text(&self) -> String {
        let join = |v: &[usize]| {
            v.iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let c = &self.convergence;
        let mut lines = vec![
            format!("grid.n = {}", self.n),
            format!("grid.mode = {}", self.mode.as_str()),
            format!("params.mu = {:?}", self.params.mu),
            format!("params.chi = {:?}", self.params.chi),
            format!("params.nu = {:?}", self.params.nu),
            format!("time.dt = {:?}", self.dt),
            format!("time.t_end = {:?}", self.t_end),
            format!(
                "init.recipe = {}",
                match self.init {
                    InitSpec::Recipe(r) => r.as_str(),
                    InitSpec::Manufactured => "manufactured",
                }
            ),
            format!("init.seed = {}", self.seed),
            format!("scheme.time = {}", self.scheme.as_str()),
            format!("scheme.advection = {}", self.advection.as_str()),
            format!("scheme.cfl_limit = {:?}", self.cfl_limit),
            format!(
                "scheme.forcing = {}",
                self.forcing.map_or("none", |m| m.as_str())
            ),
            format!("output.stride = {}", self.stride),
            format!("output.lq_exponent = {:?}", self.lq_exponent),
            format!("schauder.tol = {:?}", self.schauder.tol),
            format!("schauder.max_iter = {}", self.schauder.max_iter),
            format!("schauder.max_halvings = {}", self.schauder.max_halvings),
            format!("uniqueness.delta = {:?}", self.delta),
            format!("convergence.grids = {}", join(&c.grids)),
            format!(
                "convergence.dts = {}",
                c.dts
                    .iter()
                    .map(|d| format!("{d:?}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
            format!("convergence.spatial_dt = {:?}", c.spatial_dt),
            format!("convergence.temporal_n = {}", c.temporal_n),
            format!("convergence.t_end = {:?}", c.t_end),
            format!("probe.samples = {}", self.probe.samples),
            format!("probe.grids = {}", join(&self.probe.grids)),
            format!("probe.q = {:?}", self.probe.q),
        ];
        if let Some(e) = self.schauder.epsilon {
            lines.push(format!("schauder.epsilon = {e:?}"));
        }
        lines.join("\n") + "\n"
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.n, self.mode).expect("validated grid")
    }

    /// Initial state of the configured recipe.
    pub fn initial_state(&self) -> Result<State> {
        match self.init {
            InitSpec::Recipe(r) => init_state(r, self.grid(), self.seed),
            InitSpec::Manufactured => self
                .forcing
                .ok_or_else(|| bad(0, "init.recipe manufactured needs scheme.forcing"))?
                .exact_state(0.0, self.grid()),
        }
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig {
            dt: self.dt,
            scheme: self.scheme,
            advection: self.advection,
            cfl_limit: self.cfl_limit,
            forcing: self.forcing,
        }
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions {
            stride: self.stride,
            lq_exponent: self.lq_exponent,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keys_and_comments() {
        let text = "# run\ngrid.n = 16\ngrid.mode = periodic  # torus\nparams.chi = 0.3\ninit.recipe = taylor-green\n\nconvergence.grids = 8, 16,32\nscheme.forcing = none\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.n, 16);
        assert_eq!(c.mode, BoundaryMode::Periodic);
        assert_eq!(c.params.chi, 0.3);
        assert_eq!(c.convergence.grids, vec![8, 16, 32]);
        assert_eq!(c.init, InitSpec::Recipe(InitRecipe::TaylorGreen));
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        match RunConfig::parse("grid.n = 8\ngrid.size = 3\n") {
            Err(Error::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(RunConfig::parse("grid.n = 8\ngrid.n = 9\n").is_err());
        assert!(RunConfig::parse("grid.n 8\n").is_err());
    }

    #[test]
    fn rejects_out_of_range_values() {
        for bad in [
            "params.mu = 0",
            "params.chi = -1",
            "time.dt = 0",
            "scheme.cfl_limit = 2",
            "output.stride = 0",
            "grid.n = 1",
            "init.recipe = taylor-green",
            "init.recipe = manufactured",
            "output.lq_exponent = 1.5",
            "grid.n = x",
            "scheme.time = rk4",
        ] {
            assert!(RunConfig::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn text_round_trips() {
        let mut c = RunConfig::default();
        c.params.chi = 0.123456789;
        c.schauder.epsilon = Some(0.07);
        c.forcing = Some(Manufactured::Trig1 { amplitude: 1.0 });
        c.init = InitSpec::Manufactured;
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        let d = RunConfig::default();
        assert_eq!(RunConfig::parse(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }
}
