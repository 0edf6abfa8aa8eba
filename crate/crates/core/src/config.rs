//! Run configuration: presets, JSON file, command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::foa::DynamicsParams;
use crate::grid::Grid;
use crate::mass::MassParams;
use crate::metrics::MetricConfig;
use crate::pde::{PdeParams, Scheme};
use crate::simulate::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    H,
    DW,
    #[serde(rename = "custom")]
    Custom,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "H" | "h" => Ok(Preset::H),
            "DW" | "dw" => Ok(Preset::DW),
            "custom" => Ok(Preset::Custom),
            other => Err(Error::Config(format!(
                "unknown model `{other}` (expected H, DW or custom)"
            ))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::H => "H",
            Preset::DW => "DW",
            Preset::Custom => "custom",
        })
    }
}

/// Contents of a config file: flat keys, all optional, unknown keys rejected.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub model: Option<Preset>,
    pub m: Option<f64>,
    pub d: Option<f64>,
    pub c: Option<f64>,
    pub tau: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub k: Option<f64>,
    pub beta: Option<f64>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub v_fix: Option<f64>,
    pub t_fix: Option<f64>,
    pub jitter: Option<f64>,
    pub duration: Option<f64>,
    pub n_scanpaths: Option<usize>,
    pub seed: Option<u64>,
    pub scheme: Option<Scheme>,
    pub out: Option<PathBuf>,
    pub snapshots: Option<usize>,
    pub threads: Option<usize>,
    pub sed_rows: Option<usize>,
    pub sed_cols: Option<usize>,
    pub stde_k: Option<usize>,
    pub stde_symmetric: Option<bool>,
    pub sigma_map: Option<f64>,
}

impl ConfigFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

/// Command-line flags that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub model: Option<Preset>,
    pub seed: Option<u64>,
    pub duration: Option<f64>,
    pub n_scanpaths: Option<usize>,
    pub scheme: Option<Scheme>,
    pub out: Option<PathBuf>,
    pub snapshots: Option<usize>,
    pub threads: Option<usize>,
}

/// Fully resolved configuration. `sigma` and `jitter` scale with the
/// stimulus and stay `None` until [`RunConfig::for_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Preset,
    pub m: f64,
    pub d: f64,
    pub c: f64,
    pub tau: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub k: f64,
    pub beta: f64,
    pub sigma: Option<f64>,
    pub gamma: f64,
    pub lambda: f64,
    pub v_fix: f64,
    pub t_fix: f64,
    pub jitter: Option<f64>,
    pub duration: f64,
    pub n_scanpaths: usize,
    pub seed: u64,
    pub scheme: Scheme,
    pub out: PathBuf,
    pub snapshots: Option<usize>,
    pub threads: Option<usize>,
    pub sed_rows: usize,
    pub sed_cols: usize,
    pub stde_k: usize,
    pub stde_symmetric: bool,
    /// Saliency-map blur for evaluation; `None` scales with the grid.
    pub sigma_map: Option<f64>,
}

/// One frame period at 25 fps.
pub const DEFAULT_TAU: f64 = 0.04;

impl RunConfig {
    pub fn preset(model: Preset) -> Self {
        let pde = match model {
            Preset::H => PdeParams::heat(DEFAULT_TAU),
            _ => PdeParams::damped_wave(DEFAULT_TAU),
        };
        // grid-independent fields only; the grid is irrelevant here
        let mass = MassParams::for_grid(Grid::new(3, 3).expect("3x3 is valid"));
        let dyn_ = DynamicsParams::for_grid(Grid::new(3, 3).expect("3x3 is valid"));
        RunConfig {
            model,
            m: pde.m,
            d: pde.d,
            c: pde.c,
            tau: pde.tau,
            alpha1: mass.alpha1,
            alpha2: mass.alpha2,
            k: mass.k,
            beta: mass.beta,
            sigma: None,
            gamma: mass.gamma,
            lambda: dyn_.lambda,
            v_fix: dyn_.v_fix,
            t_fix: dyn_.t_fix,
            jitter: None,
            duration: 5.0,
            n_scanpaths: 5,
            seed: 0,
            scheme: Scheme::Implicit,
            out: PathBuf::from("out"),
            snapshots: None,
            threads: None,
            sed_rows: 5,
            sed_cols: 5,
            stde_k: 2,
            stde_symmetric: true,
            sigma_map: None,
        }
    }

    /// Preset defaults, then the file, then the flags.
    pub fn resolve(file: &ConfigFile, flags: &Overrides) -> Result<Self> {
        let model = flags.model.or(file.model).unwrap_or(Preset::DW);
        let mut cfg = RunConfig::preset(model);
        match model {
            Preset::Custom => {
                if file.m.is_none() || file.d.is_none() {
                    return Err(Error::Config(
                        "model `custom` needs both `m` and `d`".into(),
                    ));
                }
            }
            preset if file.m.is_some() || file.d.is_some() => {
                return Err(Error::Config(format!(
                    "`m`/`d` are fixed by preset {preset}; use model `custom` to set them"
                )));
            }
            _ => {}
        }
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = file.$f { cfg.$f = v; } )* };
        }
        take!(
            m,
            d,
            c,
            tau,
            alpha1,
            alpha2,
            k,
            beta,
            gamma,
            lambda,
            v_fix,
            t_fix,
            duration,
            n_scanpaths,
            seed,
            scheme,
            sed_rows,
            sed_cols,
            stde_k,
            stde_symmetric
        );
        cfg.sigma_map = file.sigma_map;
        cfg.sigma = file.sigma;
        cfg.jitter = file.jitter;
        cfg.snapshots = file.snapshots;
        cfg.threads = file.threads;
        if let Some(out) = &file.out {
            cfg.out = out.clone();
        }

        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        if let Some(v) = flags.duration {
            cfg.duration = v;
        }
        if let Some(v) = flags.n_scanpaths {
            cfg.n_scanpaths = v;
        }
        if let Some(v) = flags.scheme {
            cfg.scheme = v;
        }
        if let Some(v) = &flags.out {
            cfg.out = v.clone();
        }
        if flags.snapshots.is_some() {
            cfg.snapshots = flags.snapshots;
        }
        if flags.threads.is_some() {
            cfg.threads = flags.threads;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.duration > 0.0) {
            return Err(Error::Config(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if self.n_scanpaths == 0 {
            return Err(Error::Config("n_scanpaths must be at least 1".into()));
        }
        if self.snapshots == Some(0) || self.threads == Some(0) {
            return Err(Error::Config(
                "snapshots and threads must be at least 1".into(),
            ));
        }
        if self.sed_rows == 0 || self.sed_cols == 0 || self.stde_k == 0 {
            return Err(Error::Config(
                "sed_rows, sed_cols and stde_k must be at least 1".into(),
            ));
        }
        if let Some(s) = self.sigma_map {
            if !(s > 0.0) {
                return Err(Error::Config(format!(
                    "sigma_map must be positive, got {s}"
                )));
            }
        }
        self.pde().validate()
    }

    pub fn pde(&self) -> PdeParams {
        PdeParams {
            m: self.m,
            d: self.d,
            c: self.c,
            tau: self.tau,
        }
    }

    /// Copy with the grid-dependent defaults filled in.
    pub fn for_grid(&self, grid: Grid) -> RunConfig {
        let mass = MassParams::for_grid(grid);
        let dyn_ = DynamicsParams::for_grid(grid);
        RunConfig {
            sigma: Some(self.sigma.unwrap_or(mass.sigma)),
            jitter: Some(self.jitter.unwrap_or(dyn_.jitter)),
            sigma_map: Some(self.metric_config(grid).sigma_map),
            ..self.clone()
        }
    }

    /// Model constants for one observer on `grid`.
    pub fn model_params(&self, grid: Grid, seed: u64) -> Result<ModelParams> {
        let full = self.for_grid(grid);
        let params = ModelParams {
            pde: self.pde(),
            mass: MassParams {
                alpha1: self.alpha1,
                alpha2: self.alpha2,
                k: self.k,
                beta: self.beta,
                sigma: full.sigma.unwrap_or_default(),
                gamma: self.gamma,
            },
            dynamics: DynamicsParams {
                lambda: self.lambda,
                v_fix: self.v_fix,
                t_fix: self.t_fix,
                jitter: full.jitter.unwrap_or_default(),
                seed,
            },
            scheme: self.scheme,
        };
        params.validate()?;
        Ok(params)
    }

    /// Evaluation settings on `grid`.
    pub fn metric_config(&self, grid: Grid) -> MetricConfig {
        MetricConfig {
            regions: (self.sed_rows, self.sed_cols),
            stde_k: self.stde_k,
            stde_symmetric: self.stde_symmetric,
            sigma_map: self
                .sigma_map
                .unwrap_or(MetricConfig::for_grid(grid).sigma_map),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
