//! Flat `key = value` run configuration with hard validation.
//!
//! Unknown keys are an error; every constraint of the owning module is
//! re-checked at parse time so a bad run never starts.

use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use nlslab::diagnostics::EtaConstants;
use nlslab::{GridSpec, ModelParams};

/// Recipe for the initial field.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `amplitude · exp(-r² / (2 width²))`
    Gaussian { amplitude: f64, width: f64 },
    /// a single basis mode (1-based index) at the given amplitude
    Mode { index: usize, amplitude: f64 },
    /// resume from a checkpoint file
    Checkpoint { path: String },
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid_points: usize,
    pub r_max: f64,
    pub t_final: f64,
    pub dt: f64,
    pub sample_every: usize,
    pub coupling: f64,
    pub stability_cap: bool,
    pub init: InitialData,
    pub seed: u64,
    // diagnostics configuration
    pub a_n: f64,
    pub bn_epsilon: f64,
    pub eta_constants: EtaConstants,
    pub boundlong_c1: f64,
    pub boundlong_c2: f64,
    pub morawetz_scale: f64,
    pub morawetz_bound: f64,
    pub mass_radius: f64,
    pub mass_bound: f64,
    pub lo_cells: usize,
}

pub const CONFIG_KEYS_HELP: &str = "\
Run configuration file: one `key = value` per line, `#` starts a comment.

  n             spatial dimension, 3 or 4                      (required)
  c             loglog exponent, 0 < c < c_n                   (required)
  k             Sobolev index, k > n/2             (default 2 / 2.5 by n)
  grid_points   radial nodes N                            (default 1024)
  r_max         domain radius                               (default 30)
  t_final       time horizon                                 (default 1)
  dt            time step                                 (default 1e-3)
  sample_every  store every k-th step                       (default 10)
  coupling      nonlinearity scale (0 = free flow)           (default 1)
  stability_cap spectral split-step guard, true/false     (default true)
  init          gaussian | mode | checkpoint          (default gaussian)
  amplitude     initial amplitude                          (default 0.1)
  width         gaussian width                               (default 1)
  mode_index    basis mode for init = mode                   (default 1)
  checkpoint_path  file for init = checkpoint
  seed          reproducibility seed                         (default 0)
  a_n           exponent a_n of the long-interval bound      (default 1)
  bn_epsilon    the + in b_n+                             (default 1e-3)
  c1, c2, cc    free constants of eta_1, eta_2, eta          (default 1)
  eta3          pigeonhole parameter, << 1                (default 1e-2)
  boundlong_c1, boundlong_c2  outer constants C1, C2         (default 1)
  morawetz_scale   weight scale A > 1                        (default 2)
  morawetz_bound   pass threshold for the Morawetz ratio   (default 100)
  mass_radius   ball radius for the mass checks              (default 1)
  mass_bound    pass threshold for the mass ratios          (default 10)
  lo_cells      axis cells excluded from the momentum check  (default 5)
";

fn parse_map(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {}: expected `key = value`, got `{raw}`", lineno + 1))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if map.insert(key.clone(), value).is_some() {
            bail!("line {}: duplicate key `{key}`", lineno + 1);
        }
    }
    Ok(map)
}

struct Taker {
    map: BTreeMap<String, String>,
}

impl Taker {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<T>()
                .map_err(|e| anyhow!("key `{key}`: cannot parse `{v}`: {e}")),
        }
    }

    fn finish(self) -> Result<()> {
        if let Some(key) = self.map.keys().next() {
            bail!("unknown key `{key}` (run `nlslab simulate --help` for the key table)");
        }
        Ok(())
    }
}

/// Parses and validates a configuration file.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut t = Taker {
        map: parse_map(text)?,
    };

    let n: u32 = t
        .take("n")
        .ok_or_else(|| anyhow!("missing required key `n`"))?
        .parse()
        .context("key `n`")?;
    let c: f64 = t
        .take("c")
        .ok_or_else(|| anyhow!("missing required key `c`"))?
        .parse()
        .context("key `c`")?;
    let default_k = match n {
        4 => 2.5,
        _ => 2.0,
    };
    let k: f64 = t.parse("k", default_k)?;
    // model invariants: n in {3,4}, 0 < c < c_n (strict), k > n/2
    let params = ModelParams::new(n, c, k)
        .map_err(|e| anyhow!("model parameters rejected: {e}"))?;

    let grid_points: usize = t.parse("grid_points", 1024)?;
    let r_max: f64 = t.parse("r_max", 30.0)?;
    // grid invariants re-checked by constructing a grid up front
    GridSpec::new(n, grid_points, r_max)
        .map_err(|e| anyhow!("grid parameters rejected: {e}"))?;

    let t_final: f64 = t.parse("t_final", 1.0)?;
    let dt: f64 = t.parse("dt", 1e-3)?;
    if !(t_final > 0.0 && dt > 0.0 && dt <= t_final) {
        bail!("evolution parameters rejected: need 0 < dt <= t_final, got dt = {dt}, t_final = {t_final}");
    }
    let sample_every: usize = t.parse("sample_every", 10)?;
    if sample_every == 0 {
        bail!("sample_every must be positive");
    }
    let coupling: f64 = t.parse("coupling", 1.0)?;
    let stability_cap: bool = t.parse("stability_cap", true)?;

    let init_kind = t.take("init").unwrap_or_else(|| "gaussian".into());
    let amplitude: f64 = t.parse("amplitude", 0.1)?;
    let width: f64 = t.parse("width", 1.0)?;
    let mode_index: usize = t.parse("mode_index", 1)?;
    let checkpoint_path = t.take("checkpoint_path");
    let init = match init_kind.as_str() {
        "gaussian" => {
            if !(width > 0.0) {
                bail!("gaussian width must be positive, got {width}");
            }
            InitialData::Gaussian { amplitude, width }
        }
        "mode" => {
            if mode_index == 0 || mode_index > grid_points {
                bail!("mode_index must lie in 1..={grid_points}, got {mode_index}");
            }
            InitialData::Mode {
                index: mode_index,
                amplitude,
            }
        }
        "checkpoint" => InitialData::Checkpoint {
            path: checkpoint_path
                .ok_or_else(|| anyhow!("init = checkpoint requires checkpoint_path"))?,
        },
        other => bail!("unknown init recipe `{other}` (gaussian | mode | checkpoint)"),
    };

    let seed: u64 = t.parse("seed", 0)?;
    let a_n: f64 = t.parse("a_n", 1.0)?;
    if !(a_n > 0.0) {
        bail!("a_n must be positive, got {a_n}");
    }
    let bn_epsilon: f64 = t.parse("bn_epsilon", 1e-3)?;
    let eta_constants = EtaConstants {
        c1: t.parse("c1", 1.0)?,
        c2: t.parse("c2", 1.0)?,
        cc: t.parse("cc", 1.0)?,
        eta3: t.parse("eta3", 1e-2)?,
    };
    let boundlong_c1: f64 = t.parse("boundlong_c1", 1.0)?;
    let boundlong_c2: f64 = t.parse("boundlong_c2", 1.0)?;
    let morawetz_scale: f64 = t.parse("morawetz_scale", 2.0)?;
    if !(morawetz_scale > 1.0) {
        bail!("morawetz_scale must exceed 1, got {morawetz_scale}");
    }
    let morawetz_bound: f64 = t.parse("morawetz_bound", 100.0)?;
    let mass_radius: f64 = t.parse("mass_radius", 1.0)?;
    if !(mass_radius > 0.0 && mass_radius <= r_max) {
        bail!("mass_radius must lie in (0, r_max], got {mass_radius}");
    }
    let mass_bound: f64 = t.parse("mass_bound", 10.0)?;
    let lo_cells: usize = t.parse("lo_cells", 5)?;
    t.finish()?;

    Ok(RunConfig {
        params,
        grid_points,
        r_max,
        t_final,
        dt,
        sample_every,
        coupling,
        stability_cap,
        init,
        seed,
        a_n,
        bn_epsilon,
        eta_constants,
        boundlong_c1,
        boundlong_c2,
        morawetz_scale,
        morawetz_bound,
        mass_radius,
        mass_bound,
        lo_cells,
    })
}

impl RunConfig {
    /// Normalized dump, parseable by [`parse_config`].
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("n = {}\n", self.params.n()));
        s.push_str(&format!("c = {:.17e}\n", self.params.c()));
        s.push_str(&format!("k = {:.17e}\n", self.params.k()));
        s.push_str(&format!("grid_points = {}\n", self.grid_points));
        s.push_str(&format!("r_max = {:.17e}\n", self.r_max));
        s.push_str(&format!("t_final = {:.17e}\n", self.t_final));
        s.push_str(&format!("dt = {:.17e}\n", self.dt));
        s.push_str(&format!("sample_every = {}\n", self.sample_every));
        s.push_str(&format!("coupling = {:.17e}\n", self.coupling));
        s.push_str(&format!("stability_cap = {}\n", self.stability_cap));
        match &self.init {
            InitialData::Gaussian { amplitude, width } => {
                s.push_str("init = gaussian\n");
                s.push_str(&format!("amplitude = {amplitude:.17e}\n"));
                s.push_str(&format!("width = {width:.17e}\n"));
            }
            InitialData::Mode { index, amplitude } => {
                s.push_str("init = mode\n");
                s.push_str(&format!("mode_index = {index}\n"));
                s.push_str(&format!("amplitude = {amplitude:.17e}\n"));
            }
            InitialData::Checkpoint { path } => {
                s.push_str("init = checkpoint\n");
                s.push_str(&format!("checkpoint_path = {path}\n"));
            }
        }
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str(&format!("a_n = {:.17e}\n", self.a_n));
        s.push_str(&format!("bn_epsilon = {:.17e}\n", self.bn_epsilon));
        s.push_str(&format!("c1 = {:.17e}\n", self.eta_constants.c1));
        s.push_str(&format!("c2 = {:.17e}\n", self.eta_constants.c2));
        s.push_str(&format!("cc = {:.17e}\n", self.eta_constants.cc));
        s.push_str(&format!("eta3 = {:.17e}\n", self.eta_constants.eta3));
        s.push_str(&format!("boundlong_c1 = {:.17e}\n", self.boundlong_c1));
        s.push_str(&format!("boundlong_c2 = {:.17e}\n", self.boundlong_c2));
        s.push_str(&format!("morawetz_scale = {:.17e}\n", self.morawetz_scale));
        s.push_str(&format!("morawetz_bound = {:.17e}\n", self.morawetz_bound));
        s.push_str(&format!("mass_radius = {:.17e}\n", self.mass_radius));
        s.push_str(&format!("mass_bound = {:.17e}\n", self.mass_bound));
        s.push_str(&format!("lo_cells = {}\n", self.lo_cells));
        s
    }

    pub fn grid(&self) -> Result<Arc<GridSpec>> {
        GridSpec::new(self.params.n(), self.grid_points, self.r_max)
            .map_err(|e| anyhow!("grid construction failed: {e}"))
    }
}

/// Configuration of the `leibniz` survey subcommand.
#[derive(Debug, Clone)]
pub struct LeibnizConfig {
    pub grid_points: usize,
    pub period: f64,
    pub samples: usize,
    pub seed: u64,
}

pub const LEIBNIZ_KEYS_HELP: &str = "\
Survey configuration file: one `key = value` per line, `#` comments.

  grid_points   periodic grid size, power of two >= 64   (default 256)
  period        domain period                            (default 2 pi)
  samples       random fields per case                    (default 100)
  seed          master seed                                 (default 0)
";

pub fn parse_leibniz_config(text: &str) -> Result<LeibnizConfig> {
    let mut t = Taker {
        map: parse_map(text)?,
    };
    let grid_points: usize = t.parse("grid_points", 256)?;
    let period: f64 = t.parse("period", 2.0 * std::f64::consts::PI)?;
    let samples: usize = t.parse("samples", 100)?;
    let seed: u64 = t.parse("seed", 0)?;
    t.finish()?;
    if grid_points < 64 || !grid_points.is_power_of_two() {
        bail!("grid_points must be a power of two >= 64, got {grid_points}");
    }
    if !(period > 0.0) {
        bail!("period must be positive");
    }
    Ok(LeibnizConfig {
        grid_points,
        period,
        samples,
        seed,
    })
}
