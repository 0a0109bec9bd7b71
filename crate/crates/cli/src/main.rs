//! `sagin`: train the two-level slicing scheme, its baselines and ablations,
//! merge Pareto fronts, and export plots.

mod plot;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sagin_core::analysis::{boundary_surface, nondominated_indices};
use sagin_core::orchestrator::{run_ablations, run_maddpg_baseline, run_scalar_utility_baseline, run_training, MetricRow, TrainingArtifacts};
use sagin_core::report::{self, ParetoRow, RunManifest, MANIFEST_FILE, METRICS_FILE, PARETO_FILE};
use sagin_core::ScenarioConfig;

/// Environment variable consulted for the output directory when `--out` is absent.
const OUT_DIR_ENV: &str = "SAGIN_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "sagin-out";
const SURFACE_FILE: &str = "surface.csv";

#[derive(Parser)]
#[command(name = "sagin", version, about = "Multi-objective RAN slicing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the central and per-class agents.
    Train(RunArgs),
    /// Train a benchmark scheme.
    Baseline {
        kind: BaselineKind,
        /// Utility weights for throughput, delay and SINR, e.g. 1:1:4.
        #[arg(long)]
        weights: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train the single-allocation and fixed-vUAV ablations.
    Ablate(RunArgs),
    /// Merge the Pareto candidates of several runs and interpolate a boundary surface.
    Pareto {
        /// Run directories holding pareto.csv.
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Grid nodes per axis of the boundary surface.
        #[arg(long, default_value_t = 25)]
        resolution: usize,
    },
    /// Render SVG plots from a run directory's CSV files.
    Export {
        run: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    Maddpg,
    Utility,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (`key = value` lines) or a previous run's manifest.json.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    timesteps: Option<usize>,
}

impl RunArgs {
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut config = match &self.config {
            None => ScenarioConfig::default(),
            Some(path) if path.file_name().is_some_and(|n| n == MANIFEST_FILE) => {
                let dir = path.parent().unwrap_or(Path::new("."));
                RunManifest::read(dir).with_context(|| format!("reading manifest {}", path.display()))?.scenario()?
            }
            Some(path) => ScenarioConfig::load(path).with_context(|| format!("loading config {}", path.display()))?,
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(e) = self.episodes {
            config.episodes = e;
        }
        if let Some(t) = self.timesteps {
            config.timesteps = t;
        }
        config.validate()?;
        Ok(config)
    }
}

fn out_dir(flag: &Option<PathBuf>) -> PathBuf {
    flag.clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn parse_weights(text: &str) -> Result<[f64; 3]> {
    let parts: Vec<&str> = text.split(':').collect();
    ensure!(parts.len() == 3, "weights must look like a:b:c, got `{text}`");
    let mut w = [0.0; 3];
    for (slot, part) in w.iter_mut().zip(&parts) {
        let v: f64 = part.trim().parse().with_context(|| format!("bad weight `{part}`"))?;
        ensure!(v.is_finite() && v >= 0.0, "weights must be finite and non-negative, got `{part}`");
        *slot = v;
    }
    ensure!(w.iter().sum::<f64>() > 0.0, "at least one weight must be positive");
    Ok(w)
}

/// Write one or more runs under `dir` (each in its own subdirectory when
/// there are several) plus a manifest listing every file.
fn write_runs(dir: &Path, subcommand: &str, arguments: Vec<String>, config: &ScenarioConfig, runs: &[(&str, TrainingArtifacts)]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut manifest = RunManifest::new(subcommand, config, arguments, dir);
    for (sub, artifacts) in runs {
        let target = if runs.len() == 1 { dir.to_path_buf() } else { dir.join(sub) };
        let files = report::write_run(&target, artifacts, config)?;
        manifest.schemes.push(artifacts.scheme.name().to_string());
        manifest
            .files
            .extend(files.into_iter().map(|f| if runs.len() == 1 { f } else { format!("{sub}/{f}") }));
    }
    manifest.write(dir)?;
    Ok(())
}

fn cmd_train(args: &RunArgs) -> Result<()> {
    let config = args.scenario()?;
    let artifacts = run_training(&config)?;
    let dir = out_dir(&args.out);
    write_runs(&dir, "train", Vec::new(), &config, &[("train", artifacts)])?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_baseline(kind: BaselineKind, weights: Option<&str>, args: &RunArgs) -> Result<()> {
    let config = args.scenario()?;
    let (artifacts, arguments) = match (kind, weights) {
        (BaselineKind::Maddpg, None) => (run_maddpg_baseline(&config)?, vec!["maddpg".to_string()]),
        (BaselineKind::Maddpg, Some(_)) => bail!("--weights applies only to the utility baseline"),
        (BaselineKind::Utility, None) => bail!("the utility baseline requires --weights a:b:c"),
        (BaselineKind::Utility, Some(text)) => {
            let w = parse_weights(text)?;
            (run_scalar_utility_baseline(&config, w)?, vec!["utility".to_string(), text.to_string()])
        }
    };
    let dir = out_dir(&args.out);
    write_runs(&dir, "baseline", arguments, &config, &[("baseline", artifacts)])?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_ablate(args: &RunArgs) -> Result<()> {
    let config = args.scenario()?;
    let [single, fixed] = run_ablations(&config)?;
    let dir = out_dir(&args.out);
    write_runs(&dir, "ablate", Vec::new(), &config, &[("single", single), ("fixed", fixed)])?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_pareto(runs: &[PathBuf], out: &Option<PathBuf>, resolution: usize) -> Result<()> {
    let mut rows: Vec<ParetoRow> = Vec::new();
    for run in runs {
        let path = run.join(PARETO_FILE);
        let source = run.display().to_string();
        for mut row in report::read_pareto(&path).with_context(|| format!("reading {}", path.display()))? {
            if row.source.is_empty() {
                row.source = source.clone();
            }
            if !rows.iter().any(|r| r.source == row.source && r.seq == row.seq) {
                rows.push(row);
            }
        }
    }
    ensure!(!rows.is_empty(), "no Pareto candidates in {} run(s)", runs.len());
    let objectives: Vec<[f64; 3]> = rows.iter().map(ParetoRow::objective).collect();
    let front: Vec<ParetoRow> = nondominated_indices(&objectives).into_iter().map(|i| rows[i].clone()).collect();
    let dir = out_dir(out);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    report::write_pareto(&dir.join(PARETO_FILE), &front)?;
    let points: Vec<[f64; 3]> = front.iter().map(ParetoRow::objective).collect();
    match boundary_surface(&points, resolution) {
        Ok(surface) => report::write_surface(&dir.join(SURFACE_FILE), &surface)?,
        Err(e) => eprintln!("surface skipped: {e}"),
    }
    println!("{} front points from {} candidates -> {}", front.len(), rows.len(), dir.display());
    Ok(())
}

fn cmd_export(run: &Path, out: &Option<PathBuf>) -> Result<()> {
    let metrics_path = run.join(METRICS_FILE);
    let metrics = report::read_metrics(&metrics_path).with_context(|| format!("reading {}", metrics_path.display()))?;
    ensure!(!metrics.is_empty(), "{} has no rows", metrics_path.display());
    let dir = out.clone().unwrap_or_else(|| run.to_path_buf());
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let slot = |i: usize| i as f64;
    let series = |f: &dyn Fn(&MetricRow) -> f64| -> Vec<(f64, f64)> { metrics.iter().enumerate().map(|(i, r)| (slot(i), f(r))).collect() };
    let mut written = Vec::new();
    let mut save = |name: &str, svg: String| -> Result<()> {
        std::fs::write(dir.join(name), svg).with_context(|| format!("writing {name}"))?;
        written.push(name.to_string());
        Ok(())
    };
    save(
        "rewards.svg",
        plot::line_chart(
            "Normalized rewards",
            "time slot",
            "reward",
            &[
                ("throughput", series(&|r| r.reward1)),
                ("delay", series(&|r| r.reward2)),
                ("SINR", series(&|r| r.reward3)),
            ],
        ),
    )?;
    save("throughput.svg", plot::line_chart("Class-1 throughput", "time slot", "bps", &[("R1", series(&|r| r.r1sum_bps))]))?;
    save("delay.svg", plot::line_chart("Class-2 mean delay", "time slot", "s", &[("D2", series(&|r| r.d2ave_s))]))?;
    save("sinr.svg", plot::line_chart("Class-3 mean SINR", "time slot", "linear", &[("SINR3", series(&|r| r.sinr3ave_linear))]))?;
    let pareto_path = run.join(PARETO_FILE);
    if pareto_path.exists() {
        let front = report::read_pareto(&pareto_path).with_context(|| format!("reading {}", pareto_path.display()))?;
        let pts: Vec<(f64, f64)> = front.iter().map(|p| (p.throughput_bps, p.delay_margin_s)).collect();
        save("pareto.svg", plot::scatter("Pareto candidates", "throughput (bps)", "delay margin (s)", &pts))?;
    }
    println!("wrote {} to {}", written.join(", "), dir.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Baseline { kind, weights, run } => cmd_baseline(*kind, weights.as_deref(), run),
        Command::Ablate(args) => cmd_ablate(args),
        Command::Pareto { runs, out, resolution } => cmd_pareto(runs, out, *resolution),
        Command::Export { run, out } => cmd_export(run, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
