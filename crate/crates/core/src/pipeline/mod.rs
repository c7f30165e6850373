//! End-to-end runs: sources -> windows -> diagrams -> features -> tags.
//!
//! [`run_pipeline`] writes every intermediate artifact to the output
//! directory and returns a [`RunManifest`] describing them. Per-window work
//! runs on a worker pool; results are gathered in window order, so outputs
//! do not depend on the number of workers.

mod config;
mod plot;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{
    ClusteringConfig, PersistenceConfig, PipelineConfig, PlotConfig, SourceConfig, WindowingConfig, DEFAULT_SEED,
};
pub use plot::{scatter_svg, Panel};
pub use report::{tag_report, LabelRun, TagReport, Transition, MIN_RUN};

use crate::cluster::{kmeans_fit_with, tag_windows, KMeansModel, TaggedWindow};
use crate::embed::{default_mode, sliding_windows, TimeSeries, Window};
use crate::error::{Error, Result};
use crate::features::{featurize_windows, FeatureVector};
use crate::io;
use crate::ph::{compute_persistence_with, rips_filtration, PersistenceDiagram};
use crate::sim::{euler_maruyama, rk4_integrate, HopfField, LorenzField, SdeSpec, Trajectory};

pub const SERIES_PREFIX: &str = "series_";
pub const WINDOWS_FILE: &str = "windows.csv";
pub const WINDOW_INDEX_FILE: &str = "windows_index.csv";
pub const DIAGRAMS_FILE: &str = "diagrams.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const MODEL_FILE: &str = "model.json";
pub const TAGGED_FILE: &str = "tagged.csv";
pub const REPORT_FILE: &str = "report.json";
pub const PLOT_FILE: &str = "scatter.svg";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub seconds: f64,
    pub outputs: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSummary {
    pub name: String,
    pub kind: String,
    pub samples: usize,
    /// Global index of the source's first window.
    pub first_window: usize,
    pub windows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub config: PipelineConfig,
    /// SHA-256 of the run's inputs: the configuration (minus output
    /// directory and worker count) and the bytes of every CSV source.
    pub input_checksum: String,
    pub sources: Vec<SourceSummary>,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn output(&self, stage: &str) -> Option<&[PathBuf]> {
        self.stages.iter().find(|s| s.stage == stage).map(|s| s.outputs.as_slice())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceReport {
    pub name: String,
    pub report: TagReport,
}

/// Simulates or loads one source.
pub fn build_source(source: &SourceConfig, default_seed: u64) -> Result<TimeSeries> {
    match source {
        SourceConfig::Lorenz { rho, sigma, beta, x0, dt, t_end, transient, sample_every, .. } => {
            let field = LorenzField::new(*sigma, *rho, *beta);
            let traj = rk4_integrate(&field, x0, 0.0, *t_end, *dt)?;
            trim(traj, *transient, *sample_every)
        }
        SourceConfig::Hopf { lambda0, epsilon, noise, x0, dt, t_end, transient, sample_every, seed, .. } => {
            let spec = SdeSpec::new(HopfField::new(*lambda0, *epsilon), noise.clone())?;
            let traj = euler_maruyama(&spec, x0, 0.0, *t_end, *dt, seed.unwrap_or(default_seed))?;
            trim(traj, *transient, *sample_every)
        }
        SourceConfig::Csv { path, time_column, value_columns, interpolate, .. } => {
            io::ingest_csv(path, time_column, value_columns, *interpolate)
        }
    }
}

fn trim(traj: Trajectory, transient: f64, every: usize) -> Result<TimeSeries> {
    let traj = if transient > 0.0 { traj.discard_before(transient)? } else { traj };
    TimeSeries::try_from(&traj.subsample(every)?)
}

pub fn window_source(series: &TimeSeries, windowing: &WindowingConfig) -> Result<Vec<Window>> {
    let mode = windowing.mode.unwrap_or_else(|| default_mode(series, windowing.window_len));
    sliding_windows(series, windowing.window_len, windowing.stride(), mode)
}

/// Diagrams of all windows, in window order, on the current worker pool.
pub fn persist_windows(windows: &[Window], persistence: &PersistenceConfig) -> Result<Vec<PersistenceDiagram>> {
    windows
        .par_iter()
        .map(|w| {
            let eps = persistence.t_max.resolve(&w.cloud);
            let f = rips_filtration(&w.cloud, eps, persistence.max_dim)?;
            compute_persistence_with(&f, persistence.r, persistence.reduction)
        })
        .collect()
}

pub fn worker_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Runs every stage and writes the artifacts into `config.out_dir`. On
/// failure the files written so far are removed and the error names the
/// stage.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunManifest> {
    config.validate()?;
    let out = &config.out_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let pool = worker_pool(config.workers)?;
    let mut run = Run { written: Vec::new(), stages: Vec::new() };
    match pool.install(|| run.execute(config)) {
        Ok(manifest) => Ok(manifest),
        Err(e) => {
            for path in &run.written {
                let _ = std::fs::remove_file(path);
            }
            Err(e)
        }
    }
}

struct Run {
    written: Vec<PathBuf>,
    stages: Vec<StageRecord>,
}

impl Run {
    fn stage<T>(&mut self, name: &'static str, body: impl FnOnce(&mut Vec<PathBuf>) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let mut outputs = Vec::new();
        let result = body(&mut outputs);
        // register before checking, so partial files are cleaned up too
        self.written.extend(outputs.iter().cloned());
        let value = result.map_err(|e| e.in_stage(name))?;
        let seconds = start.elapsed().as_secs_f64();
        log::info!("stage {name}: {seconds:.3} s");
        self.stages.push(StageRecord { stage: name.into(), seconds, outputs });
        Ok(value)
    }

    fn execute(&mut self, config: &PipelineConfig) -> Result<RunManifest> {
        let out = config.out_dir.as_path();
        let names = config.source_names();
        let checksum = input_checksum(config)?;

        let series: Vec<TimeSeries> = self.stage("source", |outputs| {
            let mut all = Vec::with_capacity(config.sources.len());
            for (source, name) in config.sources.iter().zip(&names) {
                let s = build_source(source, config.seed)?;
                let path = out.join(format!("{SERIES_PREFIX}{name}.csv"));
                outputs.push(path.clone());
                io::write_series(&path, &s)?;
                all.push(s);
            }
            Ok(all)
        })?;

        let (windows, summaries) = self.stage("embed", |outputs| {
            let mut windows = Vec::new();
            let mut summaries = Vec::new();
            for ((s, name), source) in series.iter().zip(&names).zip(&config.sources) {
                let w = window_source(s, &config.windowing)?;
                summaries.push(SourceSummary {
                    name: name.clone(),
                    kind: source.kind().into(),
                    samples: s.len(),
                    first_window: windows.len(),
                    windows: w.len(),
                });
                windows.extend(w);
            }
            if let Some(first) = windows.first() {
                if let Some(w) = windows.iter().find(|w| w.cloud.dim() != first.cloud.dim()) {
                    return Err(Error::DimensionMismatch { expected: first.cloud.dim(), actual: w.cloud.dim() });
                }
            }
            let (wp, ip) = (out.join(WINDOWS_FILE), out.join(WINDOW_INDEX_FILE));
            outputs.extend([wp.clone(), ip.clone()]);
            io::write_windows(&wp, &ip, &windows)?;
            Ok((windows, summaries))
        })?;

        let diagrams = self.stage("persist", |outputs| {
            let d = persist_windows(&windows, &config.persistence)?;
            let path = out.join(DIAGRAMS_FILE);
            outputs.push(path.clone());
            io::write_diagrams(&path, &d)?;
            Ok(d)
        })?;

        let features: Vec<FeatureVector> = self.stage("featurize", |outputs| {
            let starts: Vec<f64> = windows.iter().map(|w| w.start_time).collect();
            let f = featurize_windows(&diagrams, &starts, &config.features)?;
            let path = out.join(FEATURES_FILE);
            outputs.push(path.clone());
            io::write_features(&path, &f)?;
            Ok(f)
        })?;

        let (model, tagged): (KMeansModel, Vec<TaggedWindow>) = self.stage("tag", |outputs| {
            let data: Vec<Vec<f64>> = features.iter().map(|f| f.lengths.clone()).collect();
            let model = kmeans_fit_with(&data, &config.clustering.kmeans(config.seed))?;
            let tagged = tag_windows(&model, &features)?;
            let (mp, tp) = (out.join(MODEL_FILE), out.join(TAGGED_FILE));
            outputs.extend([mp.clone(), tp.clone()]);
            io::write_model(&mp, &model)?;
            io::write_tagged(&tp, &tagged)?;
            Ok((model, tagged))
        })?;

        self.stage("report", |outputs| {
            let reports = summaries
                .iter()
                .map(|s| {
                    Ok(SourceReport {
                        name: s.name.clone(),
                        report: tag_report(&tagged[s.first_window..s.first_window + s.windows])?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let rp = out.join(REPORT_FILE);
            outputs.push(rp.clone());
            io::write_json(&rp, &reports)?;

            let channel = config.plot.channel;
            let mut panels = Vec::with_capacity(series.len());
            for (s, summary) in series.iter().zip(&summaries) {
                let values = s.channel(channel)?;
                let range = summary.first_window..summary.first_window + summary.windows;
                let points = windows[range.clone()]
                    .iter()
                    .zip(&tagged[range])
                    .map(|(w, t)| (w.start_time, values[w.start_index], t.label))
                    .collect();
                panels.push(Panel { title: &summary.name, points });
            }
            let svg = scatter_svg(&panels, &series[0].channel_names()[channel], model.k);
            let pp = out.join(PLOT_FILE);
            outputs.push(pp.clone());
            io::write_text(&pp, &svg)
        })?;

        let manifest = RunManifest {
            version: crate::VERSION.into(),
            config: config.clone(),
            input_checksum: checksum,
            sources: summaries,
            stages: std::mem::take(&mut self.stages),
        };
        let mp = out.join(MANIFEST_FILE);
        self.written.push(mp.clone());
        io::write_json(&mp, &manifest)?;
        Ok(manifest)
    }
}

fn input_checksum(config: &PipelineConfig) -> Result<String> {
    let mut hasher = Sha256::new();
    let mut canonical = config.clone();
    canonical.out_dir = PathBuf::new();
    canonical.workers = None;
    hasher.update(serde_json::to_vec(&canonical)?);
    for source in &config.sources {
        if let SourceConfig::Csv { path, .. } = source {
            let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
            hasher.update(&bytes);
        }
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Reads a manifest written by [`run_pipeline`].
pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    io::read_json(path)
}
