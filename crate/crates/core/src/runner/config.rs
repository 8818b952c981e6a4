use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{default_extent, derive, DerivedParams, Grid1D, PhysParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Trace,
    Modes,
    Asymptotic,
    Sweep,
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Q,
    V0,
    MassRatio,
}

macro_rules! keyword_enum {
    ($ty:ident { $($name:literal => $variant:ident),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($name => Ok($ty::$variant),)+
                    other => Err(Error::Config(format!(
                        concat!("unknown ", stringify!($ty), " `{}` (expected one of: ", $($name, " ",)+ ")"),
                        other
                    ))),
                }
            }
        }

        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $name,)+
                }
            }
        }
    };
}

keyword_enum!(Format { "csv" => Csv, "json" => Json });
keyword_enum!(Experiment {
    "trace" => Trace,
    "modes" => Modes,
    "asymptotic" => Asymptotic,
    "sweep" => Sweep,
    "validate" => Validate,
});
keyword_enum!(SweepAxis { "q" => Q, "v0" => V0, "mass_ratio" => MassRatio });

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRange {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.steps)
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: PhysParams,
    pub grid_n: usize,
    /// Half-width of the particle grids; `None` selects the model's extent rule.
    pub grid_l: Option<f64>,
    pub t_max_over_tc: f64,
    pub t_steps: usize,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    pub experiment: Experiment,
    pub sweep_axis: SweepAxis,
    pub sweep_range: SweepRange,
    pub mode_time_over_tc: f64,
    /// Add numerically computed plateau entropies to a sweep.
    pub with_numeric: bool,
    /// Multiplier on the quadrature step in the relative evolution.
    pub step_scale: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PhysParams::default(),
            grid_n: 512,
            grid_l: None,
            t_max_over_tc: 3.0,
            t_steps: 60,
            output_path: None,
            format: Format::Csv,
            experiment: Experiment::Trace,
            sweep_axis: SweepAxis::Q,
            sweep_range: SweepRange { lo: 0.5, hi: 10.0, steps: 20 },
            mode_time_over_tc: 2.0,
            with_numeric: false,
            step_scale: 1.0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| Error::Config(e.to_string()))?;
        let fail = |msg: String| Err(Error::Config(msg));
        if self.grid_n < 2 {
            return fail(format!("grid_n must be at least 2, got {}", self.grid_n));
        }
        if self.t_steps < 2 {
            return fail(format!("t_steps must be at least 2, got {}", self.t_steps));
        }
        if !(self.t_max_over_tc > 0.0) || !self.t_max_over_tc.is_finite() {
            return fail(format!("t_max_over_tc must be positive, got {}", self.t_max_over_tc));
        }
        if let Some(l) = self.grid_l {
            if !(l > 0.0) || !l.is_finite() {
                return fail(format!("grid_l must be positive, got {l}"));
            }
        }
        let r = self.sweep_range;
        if !(r.lo < r.hi) || r.steps < 2 {
            return fail(format!(
                "sweep range needs lo < hi and at least 2 steps, got {} {} {}",
                r.lo, r.hi, r.steps
            ));
        }
        if !(self.mode_time_over_tc > 0.0) {
            return fail(format!("mode_time_over_tc must be positive, got {}", self.mode_time_over_tc));
        }
        if !(self.step_scale > 0.0) || !self.step_scale.is_finite() {
            return fail(format!("step_scale must be positive, got {}", self.step_scale));
        }
        Ok(())
    }

    pub fn derived(&self) -> Result<DerivedParams> {
        derive(&self.params).map_err(|e| Error::Config(e.to_string()))
    }

    /// Particle grid for a run reaching `t_max`.
    pub fn grid(&self, d: &DerivedParams, t_max: f64) -> Result<Grid1D> {
        let l = self
            .grid_l
            .unwrap_or_else(|| default_extent(&self.params, d, t_max));
        Grid1D::symmetric(l, self.grid_n)
    }

    /// Sets one `key = value` entry.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Config(format!("cannot parse value `{value}` for `{key}`")))
        }
        let p = &mut self.params;
        match key {
            "m1" => p.m1 = num(key, value)?,
            "m2" => p.m2 = num(key, value)?,
            "v0" => p.v0 = num(key, value)?,
            "a" => p.a = num(key, value)?,
            "q" => p.q = num(key, value)?,
            "sigma" => p.sigma = num(key, value)?,
            "hbar" => p.hbar = num(key, value)?,
            "grid_n" => self.grid_n = num(key, value)?,
            "grid_l" => self.grid_l = Some(num(key, value)?),
            "t_max_over_tc" => self.t_max_over_tc = num(key, value)?,
            "t_steps" => self.t_steps = num(key, value)?,
            "format" => self.format = value.parse()?,
            "sweep_axis" => self.sweep_axis = value.parse()?,
            "sweep_lo" => self.sweep_range.lo = num(key, value)?,
            "sweep_hi" => self.sweep_range.hi = num(key, value)?,
            "sweep_steps" => self.sweep_range.steps = num(key, value)?,
            "mode_time_over_tc" => self.mode_time_over_tc = num(key, value)?,
            "step_scale" => self.step_scale = num(key, value)?,
            other => return Err(Error::Config(format!("unknown configuration key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. Blank lines and `#` comments are
    /// ignored; unknown keys are errors.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(&e))))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &std::path::Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_str(&text)
    }

    /// The configuration as `key = value` lines, readable by [`apply_str`](Self::apply_str).
    pub fn echo(&self) -> Vec<String> {
        let p = &self.params;
        let mut out = vec![
            format!("m1 = {}", p.m1),
            format!("m2 = {}", p.m2),
            format!("v0 = {}", p.v0),
            format!("a = {}", p.a),
            format!("q = {}", p.q),
            format!("sigma = {}", p.sigma),
            format!("hbar = {}", p.hbar),
            format!("grid_n = {}", self.grid_n),
        ];
        if let Some(l) = self.grid_l {
            out.push(format!("grid_l = {l}"));
        }
        out.extend([
            format!("t_max_over_tc = {}", self.t_max_over_tc),
            format!("t_steps = {}", self.t_steps),
            format!("format = {}", self.format.as_str()),
            format!("sweep_axis = {}", self.sweep_axis.as_str()),
            format!("sweep_lo = {}", self.sweep_range.lo),
            format!("sweep_hi = {}", self.sweep_range.hi),
            format!("sweep_steps = {}", self.sweep_range.steps),
            format!("mode_time_over_tc = {}", self.mode_time_over_tc),
            format!("step_scale = {}", self.step_scale),
        ]);
        out
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(msg) => msg.clone(),
        other => other.to_string(),
    }
}
