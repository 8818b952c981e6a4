use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use entangle_core::runner::{run, RunOutput};
use entangle_core::{Error, Experiment, Format, RunConfig, SweepAxis};

const CONFIG_ERROR: u8 = 1;
const NUMERICAL_FAILURE: u8 = 2;

/// Entanglement of two Gaussian packets colliding through a contact interaction.
#[derive(Debug, Parser)]
#[command(name = "entangle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy versus time.
    Trace(#[command(flatten)] Common),
    /// Leading numerical Schmidt modes next to the analytic long-time factors.
    Modes {
        #[command(flatten)]
        common: Common,
        /// Sampling time in units of t_c.
        #[arg(long)]
        mode_time: Option<f64>,
    },
    /// Scattering amplitudes over time and the asymptotic entropy.
    Asymptotic(#[command(flatten)] Common),
    /// Asymptotic (and optionally numerical) entropy along one parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// q, v0 or mass_ratio.
        #[arg(long)]
        axis: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        /// Also compute the numerical plateau entropy at each point.
        #[arg(long)]
        with_numeric: bool,
    },
    /// Run the invariant suite; exits nonzero if any check fails.
    Validate(#[command(flatten)] Common),
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    m1: Option<f64>,
    #[arg(long)]
    m2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    v0: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    grid_l: Option<f64>,
    /// Final time in units of t_c.
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    t_steps: Option<usize>,
    /// Multiplier on the quadrature step of the relative evolution.
    #[arg(long)]
    dy_scale: Option<f64>,
    /// Table destination; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Manifest destination; defaults to the table path with a
    /// `.manifest.json` extension, or standard error.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), Error> {
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let p = &mut cfg.params;
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut p.m1, self.m1);
        set(&mut p.m2, self.m2);
        set(&mut p.v0, self.v0);
        set(&mut p.a, self.a);
        set(&mut p.q, self.q);
        set(&mut p.sigma, self.sigma);
        set(&mut cfg.t_max_over_tc, self.t_max);
        set(&mut cfg.step_scale, self.dy_scale);
        if let Some(n) = self.grid_n {
            cfg.grid_n = n;
        }
        if let Some(l) = self.grid_l {
            cfg.grid_l = Some(l);
        }
        if let Some(n) = self.t_steps {
            cfg.t_steps = n;
        }
        if let Some(f) = &self.format {
            cfg.format = f.parse::<Format>()?;
        }
        cfg.output_path = self.out.clone();
        Ok(())
    }
}

fn build_config(command: &Command) -> Result<(RunConfig, Option<PathBuf>), Error> {
    let mut cfg = RunConfig::default();
    let common = match command {
        Command::Trace(c) => {
            cfg.experiment = Experiment::Trace;
            c
        }
        Command::Modes { common, .. } => {
            cfg.experiment = Experiment::Modes;
            common
        }
        Command::Asymptotic(c) => {
            cfg.experiment = Experiment::Asymptotic;
            c
        }
        Command::Sweep { common, .. } => {
            cfg.experiment = Experiment::Sweep;
            common
        }
        Command::Validate(c) => {
            cfg.experiment = Experiment::Validate;
            c
        }
    };
    common.apply(&mut cfg)?;
    match command {
        Command::Modes { mode_time: Some(t), .. } => cfg.mode_time_over_tc = *t,
        Command::Sweep { axis, lo, hi, steps, with_numeric, .. } => {
            if let Some(axis) = axis {
                cfg.sweep_axis = axis.parse::<SweepAxis>()?;
            }
            if let Some(lo) = lo {
                cfg.sweep_range.lo = *lo;
            }
            if let Some(hi) = hi {
                cfg.sweep_range.hi = *hi;
            }
            if let Some(steps) = steps {
                cfg.sweep_range.steps = *steps;
            }
            cfg.with_numeric = *with_numeric;
        }
        _ => {}
    }
    let manifest = common
        .manifest
        .clone()
        .or_else(|| common.out.as_ref().map(|p| p.with_extension("manifest.json")));
    Ok((cfg, manifest))
}

fn configure_threads() -> Result<(), Error> {
    let Ok(value) = std::env::var("ENTANGLE_THREADS") else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("ENTANGLE_THREADS must be a positive integer, got `{value}`")))?;
    entangle_core::runner::configure_thread_pool(n)
}

fn write_or_print(path: Option<&Path>, text: &str, to_stderr: bool) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None if to_stderr => {
            eprint!("{text}");
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit(out: &RunOutput, cfg: &RunConfig, manifest: Option<&Path>) -> std::io::Result<()> {
    write_or_print(cfg.output_path.as_deref(), &out.table.render(cfg.format), false)?;
    write_or_print(manifest, &out.manifest.to_json(), true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { CONFIG_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (cfg, manifest) = match configure_threads().and_then(|_| build_config(&cli.command)) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let out = match run(&cfg) {
        Ok(out) => out,
        Err(e @ Error::Config(_)) | Err(e @ Error::Parameter { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(NUMERICAL_FAILURE);
        }
    };
    for w in &out.manifest.warnings {
        eprintln!("warning: {w}");
    }
    for e in &out.manifest.errors {
        eprintln!("error: {e}");
    }
    if let Err(e) = emit(&out, &cfg, manifest.as_deref()) {
        eprintln!("error: cannot write output: {e}");
        return ExitCode::from(NUMERICAL_FAILURE);
    }
    ExitCode::from(out.manifest.status.exit_code())
}
