//! Experiment orchestration and serialization.
//!
//! Each experiment turns a [`RunConfig`] into a [`Table`] and a
//! [`ResultManifest`]. Configuration problems are returned as
//! [`Error::Config`]; numerical problems never abort a run but are recorded
//! in the manifest, whose [`RunStatus`] decides the exit code.

mod config;
mod table;
mod validate;

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{Experiment, Format, RunConfig, SweepAxis, SweepRange};
pub use table::{format_float, Cell, Table};
pub use validate::{run_checks, CheckOutcome};

use crate::asymptotics::{asymptotic_entropy, asymptotic_schmidt_modes};
use crate::entanglement::{entropy_trace, schmidt, EntropyTrace};
use crate::error::{Error, Result};
use crate::evolution::{two_particle_wavefunction, QuadratureSpec};
use crate::model::{derive, DerivedParams, Grid1D, PhysParams};
use crate::propagators::{amplitudes, plane_wave_coefficients};
use config::linspace;

/// First trace sample, in units of `t_c`.
pub const TRACE_START: f64 = 0.1;

/// Times (in units of `t_c`) averaged for a plateau entropy.
pub const PLATEAU_TIMES: [f64; 3] = [2.5, 2.75, 3.0];

/// Largest tolerated deviation of the relative norm from 1 before a warning.
pub const RELATIVE_NORM_WARN: f64 = 1e-3;

/// Largest tolerated deviation of the two-particle norm from 1 before a warning.
pub const NORM2D_WARN: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Partial,
    Failed,
}

impl RunStatus {
    /// 0 for complete or partial runs, 2 for numerical failure.
    pub fn exit_code(self) -> u8 {
        match self {
            RunStatus::Ok | RunStatus::Partial => 0,
            RunStatus::Failed => 2,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormDiagnostics {
    pub max_relative_norm_deviation: Option<f64>,
    pub max_norm2d_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultManifest {
    pub experiment: Experiment,
    pub status: RunStatus,
    pub config: RunConfig,
    pub derived: DerivedParams,
    pub grid: Option<Grid1D>,
    /// Where the table was written, if not to standard output.
    pub payload: Option<String>,
    pub wall_time_s: f64,
    pub norms: NormDiagnostics,
    pub scalars: BTreeMap<String, f64>,
    pub checks: Vec<CheckOutcome>,
    pub warnings: Vec<String>,
    pub errors: Vec<String>,
}

impl ResultManifest {
    fn new(cfg: &RunConfig, d: DerivedParams) -> Self {
        Self {
            experiment: cfg.experiment,
            status: RunStatus::Ok,
            config: cfg.clone(),
            derived: d,
            grid: None,
            payload: cfg.output_path.as_ref().map(|p| p.display().to_string()),
            wall_time_s: 0.0,
            norms: NormDiagnostics::default(),
            scalars: BTreeMap::new(),
            checks: Vec::new(),
            warnings: cfg.params.warnings(),
            errors: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes") + "\n"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub manifest: ResultManifest,
}

/// Caps the global worker pool at `n` threads. Must be called before any
/// parallel work starts.
pub fn configure_thread_pool(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::Config(format!("cannot configure thread pool: {e}")))
}

/// Runs the experiment selected in `cfg`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let d = cfg.derived()?;
    let spec = QuadratureSpec::for_params(&cfg.params, &d).with_step_scale(cfg.step_scale);
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    let start = Instant::now();
    let mut m = ResultManifest::new(cfg, d);
    let mut table = match cfg.experiment {
        Experiment::Trace => run_trace(cfg, &d, &spec, &mut m)?,
        Experiment::Modes => run_modes(cfg, &d, &spec, &mut m)?,
        Experiment::Asymptotic => run_asymptotic(cfg, &d, &mut m)?,
        Experiment::Sweep => run_sweep(cfg, &spec, &mut m)?,
        Experiment::Validate => run_validate(cfg, &d, &spec, &mut m)?,
    };
    let mut header = vec![format!("experiment = {}", cfg.experiment.as_str())];
    header.extend(cfg.echo());
    header.append(&mut table.header);
    table.header = header;
    m.wall_time_s = start.elapsed().as_secs_f64();
    Ok(RunOutput { table, manifest: m })
}

fn common_scalars(m: &mut ResultManifest, d: &DerivedParams) {
    m.scalars.insert("t_c".into(), d.t_c);
    m.scalars.insert("t_c_total_mass".into(), d.t_c_total_mass());
    m.scalars.insert("g".into(), d.g);
    m.scalars.insert("asymptotic_entropy".into(), asymptotic_entropy(d.q, d.g));
}

fn record_grid(m: &mut ResultManifest, table: &mut Table, grid: Grid1D) {
    m.grid = Some(grid);
    table.header.push(format!(
        "grid: [{}, {}], n = {}, dx = {}",
        grid.x_min, grid.x_max, grid.n, grid.dx
    ));
}

fn trace_times(cfg: &RunConfig, d: &DerivedParams) -> Vec<f64> {
    linspace(TRACE_START, cfg.t_max_over_tc, cfg.t_steps)
        .into_iter()
        .map(|tau| tau * d.t_c)
        .collect()
}

fn max_deviation(values: &[f64]) -> Option<f64> {
    values.iter().map(|n| (n - 1.0).abs()).reduce(f64::max)
}

fn absorb_trace(m: &mut ResultManifest, trace: &EntropyTrace, requested: usize) {
    m.norms.max_relative_norm_deviation = max_deviation(&trace.relative_norms);
    m.norms.max_norm2d_deviation = max_deviation(&trace.norms);
    if let Some(dev) = m.norms.max_relative_norm_deviation {
        if dev > RELATIVE_NORM_WARN {
            m.warnings.push(format!("relative norm deviates from 1 by {dev:e}"));
        }
    }
    if let Some(dev) = m.norms.max_norm2d_deviation {
        if dev > NORM2D_WARN {
            m.warnings.push(format!("two-particle norm deviates from 1 by {dev:e}"));
        }
    }
    for (t, e) in &trace.failures {
        m.errors.push(format!("t = {t}: {e}"));
    }
    m.status = if trace.failures.is_empty() {
        RunStatus::Ok
    } else if trace.failures.len() < requested {
        m.warnings.push(format!(
            "partial trace: {} of {requested} samples failed",
            trace.failures.len()
        ));
        RunStatus::Partial
    } else {
        RunStatus::Failed
    };
}

fn plateau(trace: &EntropyTrace, t_c: f64) -> Option<f64> {
    let lo = PLATEAU_TIMES[0] - 1e-9;
    let vals: Vec<f64> = trace
        .times
        .iter()
        .zip(&trace.entropy)
        .filter(|(t, _)| *t / t_c >= lo)
        .map(|(_, s)| *s)
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

fn run_trace(
    cfg: &RunConfig,
    d: &DerivedParams,
    spec: &QuadratureSpec,
    m: &mut ResultManifest,
) -> Result<Table> {
    if cfg.t_max_over_tc <= TRACE_START {
        return Err(Error::Config(format!(
            "t_max_over_tc must exceed the first sample at {TRACE_START}"
        )));
    }
    let mut table = Table::new(&["t", "t_over_tc", "entropy", "norm2d", "p1", "p2", "p3", "p4"]);
    let grid = cfg.grid(d, cfg.t_max_over_tc * d.t_c)?;
    record_grid(m, &mut table, grid);
    let times = trace_times(cfg, d);
    let trace = entropy_trace(&times, &cfg.params, d, &grid, spec)?;
    absorb_trace(m, &trace, times.len());
    for (k, &t) in trace.times.iter().enumerate() {
        let mut row: Vec<Cell> = vec![t.into(), (t / d.t_c).into(), trace.entropy[k].into(), trace.norms[k].into()];
        row.extend((0..4).map(|i| Cell::from(trace.spectra[k].get(i).copied())));
        table.push(row);
    }
    common_scalars(m, d);
    if let Some(s) = plateau(&trace, d.t_c) {
        m.scalars.insert("plateau_entropy".into(), s);
    }
    if let Some(s) = trace.entropy.iter().copied().reduce(f64::max) {
        m.scalars.insert("max_entropy".into(), s);
    }
    table.footer.push(format!(
        "asymptotic_entropy = {}",
        format_float(asymptotic_entropy(d.q, d.g))
    ));
    Ok(table)
}

fn run_modes(
    cfg: &RunConfig,
    d: &DerivedParams,
    spec: &QuadratureSpec,
    m: &mut ResultManifest,
) -> Result<Table> {
    let mut table = Table::new(&["x1", "abs_mode1_num", "abs_mode2_num", "abs_Phi1_plus", "abs_Phi1_minus"]);
    let t = cfg.mode_time_over_tc * d.t_c;
    let grid = cfg.grid(d, t)?;
    record_grid(m, &mut table, grid);
    common_scalars(m, d);
    m.scalars.insert("t".into(), t);
    if cfg.mode_time_over_tc < crate::asymptotics::VALIDITY_ONSET {
        m.warnings.push(format!(
            "mode time {} t_c is before the asymptotic regime",
            cfg.mode_time_over_tc
        ));
    }

    let (phi_plus, phi_minus, (wt, wr)) = asymptotic_schmidt_modes(t, d, &cfg.params, &grid);
    m.scalars.insert("weight_transmitted".into(), wt);
    m.scalars.insert("weight_reflected".into(), wr);

    let numeric = two_particle_wavefunction(&grid, t, &cfg.params, d, spec).and_then(|psi| {
        m.norms.max_norm2d_deviation = Some((psi.norm() - 1.0).abs());
        schmidt(&psi)
    });
    let s = match numeric {
        Ok(s) => s,
        Err(e) => {
            m.errors.push(e.to_string());
            m.status = RunStatus::Failed;
            for i in 0..grid.n {
                table.push(vec![
                    grid.x(i).into(),
                    Cell::Empty,
                    Cell::Empty,
                    phi_plus.values[i].norm().into(),
                    phi_minus.values[i].norm().into(),
                ]);
            }
            return Ok(table);
        }
    };

    for (k, p) in s.p.iter().take(4).enumerate() {
        m.scalars.insert(format!("p{}", k + 1), *p);
    }
    m.scalars.insert("entropy".into(), s.entropy());
    let overlap = |k: usize, f: &crate::model::ComplexField1D| -> Option<f64> {
        s.modes1.get(k).map(|mode| mode.inner(f).map(|z| z.norm()).unwrap_or(f64::NAN))
    };
    let named = [
        ("overlap_mode1_Phi1_plus", overlap(0, &phi_plus)),
        ("overlap_mode2_Phi1_minus", overlap(1, &phi_minus)),
        ("overlap_mode1_Phi1_minus", overlap(0, &phi_minus)),
        ("overlap_mode2_Phi1_plus", overlap(1, &phi_plus)),
    ];
    for (name, v) in named {
        if let Some(v) = v {
            m.scalars.insert(name.into(), v);
        }
    }
    if let (Some(a), Some(b)) = (s.modes1.first(), s.modes1.get(1)) {
        m.scalars.insert("mode_orthogonality".into(), a.inner(b)?.norm());
    }
    if wr > wt {
        m.warnings.push(
            "reflection dominates: mode 1 pairs with Phi1_minus and mode 2 with Phi1_plus".into(),
        );
    }

    for i in 0..grid.n {
        table.push(vec![
            grid.x(i).into(),
            s.modes1.first().map(|f| f.values[i].norm()).into(),
            s.modes1.get(1).map(|f| f.values[i].norm()).into(),
            phi_plus.values[i].norm().into(),
            phi_minus.values[i].norm().into(),
        ]);
    }
    Ok(table)
}

fn run_asymptotic(cfg: &RunConfig, d: &DerivedParams, m: &mut ResultManifest) -> Result<Table> {
    let mut table = Table::new(&[
        "t",
        "t_over_tc",
        "re_c_plus",
        "im_c_plus",
        "re_c_minus",
        "im_c_minus",
        "abs_c_minus_minus_R",
    ]);
    let (tr, re) = plane_wave_coefficients(d.q, d.g);
    for t in trace_times(cfg, d) {
        let amp = amplitudes(t, d)?;
        table.push_values(&[
            t,
            t / d.t_c,
            amp.c_plus.re,
            amp.c_plus.im,
            amp.c_minus.re,
            amp.c_minus.im,
            (amp.c_minus - re).norm(),
        ]);
    }
    common_scalars(m, d);
    let s = asymptotic_entropy(d.q, d.g);
    for (name, v) in [
        ("re_T", tr.re),
        ("im_T", tr.im),
        ("re_R", re.re),
        ("im_R", re.im),
        ("abs_T_sq", tr.norm_sqr()),
        ("abs_R_sq", re.norm_sqr()),
    ] {
        m.scalars.insert(name.into(), v);
        table.footer.push(format!("{name} = {}", format_float(v)));
    }
    table.footer.push(format!("asymptotic_entropy = {}", format_float(s)));
    Ok(table)
}

fn sweep_params(base: &PhysParams, axis: SweepAxis, value: f64) -> PhysParams {
    match axis {
        SweepAxis::Q => PhysParams { q: value, ..*base },
        SweepAxis::V0 => PhysParams { v0: value, ..*base },
        SweepAxis::MassRatio => PhysParams { m2: value * base.m1, ..*base },
    }
}

/// Mean entropy over [`PLATEAU_TIMES`] on the configured grid.
pub fn numeric_plateau(cfg: &RunConfig, p: &PhysParams) -> Result<f64> {
    let d = derive(p)?;
    let spec = QuadratureSpec::for_params(p, &d).with_step_scale(cfg.step_scale);
    let t_last = PLATEAU_TIMES[PLATEAU_TIMES.len() - 1] * d.t_c;
    let grid = RunConfig { params: *p, ..cfg.clone() }.grid(&d, t_last)?;
    let times: Vec<f64> = PLATEAU_TIMES.iter().map(|tau| tau * d.t_c).collect();
    let trace = entropy_trace(&times, p, &d, &grid, &spec)?;
    if let Some((t, e)) = trace.failures.first() {
        return Err(Error::Input(format!("plateau sample at t = {t} failed: {e}")));
    }
    Ok(trace.entropy.iter().sum::<f64>() / trace.entropy.len() as f64)
}

fn run_sweep(cfg: &RunConfig, _spec: &QuadratureSpec, m: &mut ResultManifest) -> Result<Table> {
    let mut columns = vec!["axis_value", "asymptotic_entropy"];
    if cfg.with_numeric {
        columns.push("numeric_plateau_entropy");
    }
    let mut table = Table::new(&columns);
    table.header.push(format!("axis = {}", cfg.sweep_axis.as_str()));
    let values = cfg.sweep_range.values();
    let mut failed = 0;
    let mut best: Option<(f64, f64)> = None;
    for &value in &values {
        let p = sweep_params(&cfg.params, cfg.sweep_axis, value);
        let d = match derive(&p) {
            Ok(d) => d,
            Err(e) => {
                failed += 1;
                m.errors.push(format!("{} = {value}: {e}", cfg.sweep_axis.as_str()));
                let mut row = vec![value.into(), Cell::Empty];
                if cfg.with_numeric {
                    row.push(Cell::Empty);
                }
                table.push(row);
                continue;
            }
        };
        let s = asymptotic_entropy(d.q, d.g);
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((value, s));
        }
        let mut row = vec![value.into(), s.into()];
        if cfg.with_numeric {
            match numeric_plateau(cfg, &p) {
                Ok(v) => row.push(v.into()),
                Err(e) => {
                    m.errors.push(format!("{} = {value}: {e}", cfg.sweep_axis.as_str()));
                    row.push(Cell::Empty);
                }
            }
        }
        table.push(row);
    }
    if let Some((v, s)) = best {
        m.scalars.insert("argmax_axis_value".into(), v);
        m.scalars.insert("max_asymptotic_entropy".into(), s);
    }
    m.status = if failed == values.len() {
        RunStatus::Failed
    } else if !m.errors.is_empty() {
        RunStatus::Partial
    } else {
        RunStatus::Ok
    };
    Ok(table)
}

fn run_validate(
    cfg: &RunConfig,
    d: &DerivedParams,
    spec: &QuadratureSpec,
    m: &mut ResultManifest,
) -> Result<Table> {
    let mut table = Table::new(&["check", "residual", "tolerance", "passed"]);
    let grid = cfg.grid(d, cfg.t_max_over_tc * d.t_c)?;
    record_grid(m, &mut table, grid);
    let checks = run_checks(&cfg.params, d, &grid, spec);
    for c in &checks {
        table.push(vec![
            c.name.as_str().into(),
            c.residual.into(),
            c.tolerance.into(),
            if c.passed { "pass" } else { "fail" }.into(),
        ]);
    }
    let failed: Vec<&CheckOutcome> = checks.iter().filter(|c| !c.passed).collect();
    for c in &failed {
        m.errors.push(format!("check `{}` failed: {}", c.name, c.detail));
    }
    m.status = if failed.is_empty() { RunStatus::Ok } else { RunStatus::Failed };
    table.footer.push(format!("{} of {} checks passed", checks.len() - failed.len(), checks.len()));
    m.checks = checks;
    common_scalars(m, d);
    Ok(table)
}
