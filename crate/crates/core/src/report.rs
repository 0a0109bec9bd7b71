//! Run artifacts on disk: per-slot metrics, Pareto candidates, applied
//! inter-slice decisions, checkpoints and a manifest that pins the inputs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::surface::Surface;
use crate::error::{Result, SimError};
use crate::orchestrator::training::{DecisionRow, MetricRow, TrainingArtifacts};
use crate::topology::ScenarioConfig;

/// Bumped on any change to a CSV column layout.
pub const SCHEMA_VERSION: u32 = 1;

pub const METRICS_FILE: &str = "metrics.csv";
pub const PARETO_FILE: &str = "pareto.csv";
pub const DECISIONS_FILE: &str = "decisions.csv";
pub const CHECKPOINT_DIR: &str = "checkpoints";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const METRICS_HEADER: [&str; 10] = [
    "episode",
    "t",
    "r1sum_bps",
    "d2ave_s",
    "sinr3ave_linear",
    "reward1",
    "reward2",
    "reward3",
    "central_reward",
    "repairs",
];

pub const PARETO_HEADER: [&str; 10] = [
    "seq",
    "episode",
    "t",
    "throughput_bps",
    "delay_margin_s",
    "sinr_linear",
    "reward1",
    "reward2",
    "reward3",
    "source",
];

/// One objective point in `pareto.csv`. Delay is stored as the margin
/// `beta - delay` so every column is maximized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoRow {
    pub seq: u64,
    pub episode: usize,
    pub t: usize,
    pub throughput_bps: f64,
    pub delay_margin_s: f64,
    pub sinr_linear: f64,
    pub reward1: f64,
    pub reward2: f64,
    pub reward3: f64,
    /// Run the point came from; empty for a single run.
    pub source: String,
}

impl ParetoRow {
    pub fn objective(&self) -> [f64; 3] {
        [self.throughput_bps, self.delay_margin_s, self.sinr_linear]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub subcommand: String,
    /// Scheme label of each run written under this manifest.
    pub schemes: Vec<String>,
    /// Rendered `key = value` configuration.
    pub config: String,
    pub seeds: Vec<u64>,
    /// Extra arguments that affect the result, e.g. utility weights.
    pub arguments: Vec<String>,
    /// SHA-256 over subcommand, arguments, seeds and rendered config.
    pub input_hash: String,
    pub out_dir: String,
    /// Paths relative to `out_dir`.
    pub files: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: &ScenarioConfig, arguments: Vec<String>, out_dir: &Path) -> Self {
        let rendered = config.render();
        let seeds = vec![config.seed];
        Self {
            schema_version: SCHEMA_VERSION,
            subcommand: subcommand.to_string(),
            schemes: Vec::new(),
            input_hash: input_hash(subcommand, &arguments, &seeds, &rendered),
            config: rendered,
            seeds,
            arguments,
            out_dir: out_dir.display().to_string(),
            files: Vec::new(),
        }
    }

    /// Configuration the manifest was written for.
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        ScenarioConfig::parse(&self.config)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_vec_pretty(self)?)?;
        Ok(path)
    }

    pub fn read(dir: &Path) -> Result<Self> {
        let bytes = fs::read(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_slice(&bytes)?)
    }
}

/// Hex SHA-256 over the inputs that determine a run.
pub fn input_hash(subcommand: &str, arguments: &[String], seeds: &[u64], rendered_config: &str) -> String {
    let mut h = Sha256::new();
    h.update(subcommand.as_bytes());
    h.update([0]);
    for a in arguments {
        h.update(a.as_bytes());
        h.update([0]);
    }
    for s in seeds {
        h.update(s.to_le_bytes());
    }
    h.update(rendered_config.as_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new().has_headers(false).from_path(path)?)
}

fn check_header(reader: &mut csv::Reader<fs::File>, expected: &[&str], path: &Path) -> Result<()> {
    let header = reader.headers()?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(SimError::Parse {
            line: 1,
            reason: format!("{}: unexpected header {:?}", path.display(), header.iter().collect::<Vec<_>>()),
        });
    }
    Ok(())
}

pub fn write_metrics(path: &Path, rows: &[MetricRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(METRICS_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_metrics(path: &Path) -> Result<Vec<MetricRow>> {
    let mut r = csv::Reader::from_path(path)?;
    check_header(&mut r, &METRICS_HEADER, path)?;
    r.deserialize().map(|row| row.map_err(SimError::from)).collect()
}

pub fn write_pareto(path: &Path, rows: &[ParetoRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(PARETO_HEADER)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pareto(path: &Path) -> Result<Vec<ParetoRow>> {
    let mut r = csv::Reader::from_path(path)?;
    check_header(&mut r, &PARETO_HEADER, path)?;
    r.deserialize().map(|row| row.map_err(SimError::from)).collect()
}

/// Pareto rows of a finished run.
pub fn pareto_rows(artifacts: &TrainingArtifacts) -> Vec<ParetoRow> {
    artifacts
        .pareto
        .iter()
        .map(|c| ParetoRow {
            seq: c.seq,
            episode: c.episode,
            t: c.t,
            throughput_bps: c.objective[0],
            delay_margin_s: c.objective[1],
            sinr_linear: c.objective[2],
            reward1: c.rewards[0],
            reward2: c.rewards[1],
            reward3: c.rewards[2],
            source: String::new(),
        })
        .collect()
}

/// `episode,t` then the 3x3 eta and rho matrices (class-major, layer-minor)
/// and every vUAV's coordinates.
pub fn decisions_header(uavs: usize) -> Vec<String> {
    let mut h = vec!["episode".to_string(), "t".to_string()];
    for name in ["eta", "rho"] {
        for s in 1..=3 {
            for layer in ["vbs", "uav", "leo"] {
                h.push(format!("{name}{s}_{layer}"));
            }
        }
    }
    for v in 1..=uavs {
        h.push(format!("uav{v}_x_m"));
        h.push(format!("uav{v}_y_m"));
    }
    h
}

pub fn write_decisions(path: &Path, rows: &[DecisionRow], uavs: usize) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(decisions_header(uavs))?;
    for r in rows {
        let mut rec = vec![r.episode.to_string(), r.t.to_string()];
        rec.extend(r.eta.iter().flatten().chain(r.rho.iter().flatten()).map(f64::to_string));
        rec.extend(r.uav_xy.iter().flatten().map(f64::to_string));
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_decisions(path: &Path) -> Result<Vec<DecisionRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let width = r.headers()?.len();
    if width < 20 || (width - 20) % 2 != 0 {
        return Err(SimError::Parse { line: 1, reason: format!("{}: {width} columns", path.display()) });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |reason: String| SimError::Parse { line: i + 2, reason };
        let int = |j: usize| rec[j].parse::<usize>().map_err(|e| bad(e.to_string()));
        let num = |j: usize| rec[j].parse::<f64>().map_err(|e| bad(e.to_string()));
        let mut eta = [[0.0; 3]; 3];
        let mut rho = [[0.0; 3]; 3];
        for s in 0..3 {
            for l in 0..3 {
                eta[s][l] = num(2 + 3 * s + l)?;
                rho[s][l] = num(11 + 3 * s + l)?;
            }
        }
        let uav_xy = (20..width).step_by(2).map(|j| Ok([num(j)?, num(j + 1)?])).collect::<Result<_>>()?;
        out.push(DecisionRow { episode: int(0)?, t: int(1)?, eta, rho, uav_xy });
    }
    Ok(out)
}

/// Grid rows `throughput_bps,delay_margin_s,sinr_linear`, one per node inside
/// the hull of the front.
pub fn write_surface(path: &Path, surface: &Surface) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["throughput_bps", "delay_margin_s", "sinr_linear"])?;
    for (iy, y) in surface.ys.iter().enumerate() {
        for (ix, x) in surface.xs.iter().enumerate() {
            if let Some(z) = surface.at(ix, iy) {
                w.write_record([x.to_string(), y.to_string(), z.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Write every artifact of one run into `dir` and return the relative paths
/// written, in a fixed order.
pub fn write_run(dir: &Path, artifacts: &TrainingArtifacts, config: &ScenarioConfig) -> Result<Vec<String>> {
    fs::create_dir_all(dir.join(CHECKPOINT_DIR))?;
    write_metrics(&dir.join(METRICS_FILE), &artifacts.metrics)?;
    write_pareto(&dir.join(PARETO_FILE), &pareto_rows(artifacts))?;
    write_decisions(&dir.join(DECISIONS_FILE), &artifacts.decisions, config.num_uavs)?;
    let mut files = vec![METRICS_FILE.to_string(), PARETO_FILE.to_string(), DECISIONS_FILE.to_string()];
    for (name, bytes) in &artifacts.checkpoints {
        fs::write(dir.join(CHECKPOINT_DIR).join(name), bytes)?;
        files.push(format!("{CHECKPOINT_DIR}/{name}"));
    }
    Ok(files)
}
