use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eeafs::scenario::preset::{self, Preset};
use eeafs::scenario::report::{emit_report, emit_surface, render_summary, run_sweep};
use eeafs::scenario::trace::emit_trace;
use eeafs::scenario::{run_scenario, ScenarioConfig, Scheme, Sweep};
use eeafs::{Beta, Error, Result};

#[derive(Parser)]
#[command(
    name = "eeafs",
    version,
    about = "Energy-aware feedback scheduling co-simulator",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario (a preset name or a TOML config path) and write
    /// trace.csv and summary.txt.
    Run {
        target: String,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Run a comparison preset and write summary.txt.
    Sweep {
        preset: String,
        #[command(flatten)]
        opts: Overrides,
    },
    /// Write the two-task energy surface to surface.csv.
    Surface {
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    scheme: Option<Scheme>,
    /// Positive number or `inf`.
    #[arg(long)]
    beta: Option<Beta>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "t-fs")]
    t_fs: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long = "trace-stride")]
    trace_stride: Option<f64>,
    #[arg(long = "plant-substep")]
    plant_substep: Option<f64>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ScenarioConfig, scheme: bool) {
        if let (true, Some(s)) = (scheme, self.scheme) {
            *cfg = cfg.clone().with_scheme(s);
        }
        if let Some(b) = self.beta {
            cfg.fs.beta = b;
        }
        if let Some(d) = self.delta {
            cfg.fs.delta = d;
        }
        if let Some(t) = self.t_fs {
            cfg.fs.t_fs = t;
        }
        if let Some(d) = self.duration {
            cfg.duration = d;
        }
        if let Some(s) = self.trace_stride {
            cfg.trace_stride = s;
        }
        if let Some(s) = self.plant_substep {
            cfg.plant_substep = s;
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn load_target(target: &str) -> Result<ScenarioConfig> {
    let path = Path::new(target);
    if path.extension().is_some_and(|e| e == "toml") || path.is_file() {
        return ScenarioConfig::load(path);
    }
    match preset::preset(target)? {
        Preset::Scenario(cfg) => Ok(cfg),
        Preset::Sweep(s) => Ok(s.points[0].candidate.clone()),
        Preset::Surface(_) => Err(Error::InvalidArgument(format!(
            "`{target}` is not a simulation; use the `surface` subcommand"
        ))),
    }
}

fn run(target: &str, opts: &Overrides) -> Result<()> {
    let mut cfg = load_target(target)?;
    opts.apply(&mut cfg, true);
    let out = run_scenario(&cfg)?;
    create_dir(&opts.out)?;
    emit_trace(&opts.out.join("trace.csv"), &out.trace)?;
    let text = render_summary(&out.summary);
    emit_report(&opts.out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn sweep(name: &str, opts: &Overrides) -> Result<()> {
    let mut sweep: Sweep = preset::sweep(name)?;
    for p in &mut sweep.points {
        opts.apply(&mut p.baseline, false);
        opts.apply(&mut p.candidate, true);
    }
    let report = run_sweep(&sweep)?;
    create_dir(&opts.out)?;
    let text = report.render();
    emit_report(&opts.out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn surface(out: &Path) -> Result<()> {
    let points = preset::two_task_surface().evaluate()?;
    create_dir(out)?;
    emit_surface(&out.join("surface.csv"), &points)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Run { target, opts } => run(target, opts),
        Command::Sweep { preset, opts } => sweep(preset, opts),
        Command::Surface { out } => surface(out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
