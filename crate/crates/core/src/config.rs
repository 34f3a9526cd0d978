//! TOML run configuration and the bundled figure presets.
//!
//! ```toml
//! [medium]
//! kind = "lambda"
//! q_ratio = 1.0
//!
//! [pulses]
//! a = 10.0
//! T = 1.0
//! t_d = 2.5
//!
//! [grid]
//! z = [0.0, 1.0, 2.0, 3.0]
//! ```
//!
//! `pulses.sampled = "file.csv"` replaces the sech pair with a sampled one
//! (columns `tau, omega_p, omega_s`, relative paths resolve against the
//! config file). Every `grid` key is optional.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticsSettings;
use crate::error::{Error, Result};
use crate::model::{
    make_sech_pulses, normalize, EntrancePulses, Grid, MediumParams, Problem, SampledPulses,
};
use crate::oracle::OracleConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub a: Option<f64>,
    #[serde(rename = "T", default = "unit")]
    pub width: f64,
    pub t_d: Option<f64>,
    pub sampled: Option<PathBuf>,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub n_tau: Option<usize>,
    pub z: Option<Vec<f64>>,
}

/// Overrides for [`OracleConfig::for_problem`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOverrides {
    pub dz: Option<f64>,
    pub dt: Option<f64>,
    pub tail_start: Option<f64>,
    pub record_every: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSettings {
    /// Largest relative L2 envelope error accepted by the verdict.
    pub tolerance_l2: f64,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings { tolerance_l2: 0.05 }
    }
}

/// Parameter grid for `sweep`. A missing axis keeps the base value; an
/// explicitly empty axis makes the sweep empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub q: Option<Vec<f64>>,
    pub t_d: Option<Vec<f64>>,
    pub a: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub medium: MediumParams,
    pub pulses: PulseConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsSettings,
    #[serde(default)]
    pub oracle: OracleOverrides,
    #[serde(default)]
    pub compare: CompareSettings,
    #[serde(default)]
    pub sweep: SweepSpec,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.toml")),
    ("fig3", include_str!("../presets/fig3.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
];

impl RunConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<RunConfig> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        // an unreadable config is a bad invocation, not an output failure
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn preset(name: &str) -> Result<RunConfig> {
        let (_, text) = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Config(format!("unknown preset `{name}` (fig2..fig6)")))?;
        Self::from_toml(text, ".")
    }

    pub fn pulses(&self) -> Result<EntrancePulses> {
        let p = &self.pulses;
        match (&p.sampled, p.a, p.t_d) {
            (Some(path), None, None) => read_sampled(&self.base_dir.join(path)),
            (None, Some(a), Some(t_d)) => make_sech_pulses(a, p.width, t_d),
            (Some(_), _, _) => Err(Error::Config(
                "pulses: `sampled` excludes `a` and `t_d`".into(),
            )),
            _ => Err(Error::Config(
                "pulses: need `a` and `t_d`, or `sampled`".into(),
            )),
        }
    }

    pub fn problem(&self) -> Result<Problem> {
        let problem = normalize(self.medium, self.pulses()?)?;
        let d = Grid::default_for(&problem.pulses);
        let g = &self.grid;
        let grid = Grid {
            tau_min: g.tau_min.unwrap_or(d.tau_min),
            tau_max: g.tau_max.unwrap_or(d.tau_max),
            n_tau: g.n_tau.unwrap_or(d.n_tau),
            z_values: g.z.clone().unwrap_or(d.z_values),
        };
        problem.with_grid(grid)
    }

    pub fn oracle_config(&self, problem: &Problem) -> Result<OracleConfig> {
        let mut cfg = OracleConfig::for_problem(problem);
        let o = &self.oracle;
        if let Some(v) = o.dz {
            cfg.dz = v;
        }
        if let Some(v) = o.dt {
            cfg.dt = v;
        }
        if let Some(v) = o.tail_start {
            cfg.tail_start = v;
        }
        if let Some(v) = o.record_every {
            cfg.record_every = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// `(q, t_d, a)` cells in row-major order.
    pub fn sweep_cells(&self) -> Result<Vec<(f64, f64, f64)>> {
        let axis = |v: &Option<Vec<f64>>, base: Option<f64>, name: &str| -> Result<Vec<f64>> {
            match (v, base) {
                (Some(v), _) => Ok(v.clone()),
                (None, Some(b)) => Ok(vec![b]),
                (None, None) => Err(Error::Config(format!(
                    "sweep over `{name}` needs a base value"
                ))),
            }
        };
        let qs = axis(&self.sweep.q, Some(self.medium.q_ratio), "q")?;
        let tds = axis(&self.sweep.t_d, self.pulses.t_d, "t_d")?;
        let amps = axis(&self.sweep.a, self.pulses.a, "a")?;
        let n = qs.len() * tds.len() * amps.len();
        if n > MAX_SWEEP_CELLS {
            return Err(Error::Config(format!(
                "sweep has {n} cells, limit is {MAX_SWEEP_CELLS}"
            )));
        }
        let mut cells = Vec::with_capacity(n);
        for &q in &qs {
            for &t_d in &tds {
                for &a in &amps {
                    cells.push((q, t_d, a));
                }
            }
        }
        Ok(cells)
    }

    /// Copy of this config with one sweep cell substituted.
    pub fn with_cell(&self, (q, t_d, a): (f64, f64, f64)) -> RunConfig {
        let mut cfg = self.clone();
        cfg.medium.q_ratio = q;
        cfg.pulses.t_d = Some(t_d);
        cfg.pulses.a = Some(a);
        cfg.pulses.sampled = None;
        cfg.grid.tau_min = None;
        cfg.grid.tau_max = None;
        cfg
    }
}

pub const MAX_SWEEP_CELLS: usize = 10_000;

#[derive(Debug, Deserialize)]
struct SampleRow {
    tau: f64,
    omega_p: f64,
    omega_s: f64,
}

fn read_sampled(path: &Path) -> Result<EntrancePulses> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::Config(format!("{}: {other:?}", path.display())),
        })?;
    let (mut t, mut p, mut s) = (Vec::new(), Vec::new(), Vec::new());
    for row in reader.deserialize() {
        let row: SampleRow = row.map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        t.push(row.tau);
        p.push(row.omega_p);
        s.push(row.omega_s);
    }
    Ok(EntrancePulses::sampled(SampledPulses::new(t, p, s)?))
}
