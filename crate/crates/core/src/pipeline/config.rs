use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cluster::{KMeansConfig, DEFAULT_MAX_ITER, DEFAULT_RESTARTS, DEFAULT_TOL};
use crate::embed::WindowMode;
use crate::error::{Error, Result};
use crate::features::FeatureSpec;
use crate::ph::{Reduction, TMax, DEFAULT_CAP_OFFSET};
use crate::sim::{LORENZ_BETA, LORENZ_SIGMA};

pub const DEFAULT_SEED: u64 = 42;

/// Everything a run needs. Unknown keys are rejected at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub sources: Vec<SourceConfig>,
    #[serde(default)]
    pub windowing: WindowingConfig,
    #[serde(default)]
    pub persistence: PersistenceConfig,
    #[serde(default)]
    pub features: FeatureSpec,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(default)]
    pub plot: PlotConfig,
    /// Seeds stochastic sources without their own seed, and k-means.
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads for the per-window stages; absent means all cores.
    #[serde(default)]
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceConfig {
    Lorenz {
        #[serde(default)]
        name: Option<String>,
        rho: f64,
        #[serde(default = "lorenz_sigma")]
        sigma: f64,
        #[serde(default = "lorenz_beta")]
        beta: f64,
        #[serde(default = "lorenz_x0")]
        x0: Vec<f64>,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "lorenz_t_end")]
        t_end: f64,
        /// Samples with `t < transient` are dropped.
        #[serde(default = "lorenz_transient")]
        transient: f64,
        #[serde(default = "one")]
        sample_every: usize,
    },
    Hopf {
        #[serde(default)]
        name: Option<String>,
        #[serde(default = "hopf_lambda0")]
        lambda0: f64,
        #[serde(default = "hopf_epsilon")]
        epsilon: f64,
        #[serde(default = "hopf_noise")]
        noise: Vec<f64>,
        #[serde(default = "hopf_x0")]
        x0: Vec<f64>,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default = "hopf_t_end")]
        t_end: f64,
        #[serde(default)]
        transient: f64,
        /// Keep every n-th integration step.
        #[serde(default = "hopf_sample_every")]
        sample_every: usize,
        #[serde(default)]
        seed: Option<u64>,
    },
    Csv {
        #[serde(default)]
        name: Option<String>,
        path: PathBuf,
        time_column: String,
        value_columns: Vec<String>,
        #[serde(default)]
        interpolate: bool,
    },
}

fn lorenz_sigma() -> f64 {
    LORENZ_SIGMA
}
fn lorenz_beta() -> f64 {
    LORENZ_BETA
}
fn lorenz_x0() -> Vec<f64> {
    vec![1.0, 1.0, 1.0]
}
fn default_dt() -> f64 {
    0.01
}
fn lorenz_t_end() -> f64 {
    100.0
}
fn lorenz_transient() -> f64 {
    20.0
}
fn one() -> usize {
    1
}
fn hopf_lambda0() -> f64 {
    -1.0
}
fn hopf_epsilon() -> f64 {
    1e-3
}
fn hopf_noise() -> Vec<f64> {
    vec![0.05, 0.05]
}
fn hopf_x0() -> Vec<f64> {
    vec![0.1, 0.1]
}
fn hopf_t_end() -> f64 {
    2000.0
}
fn hopf_sample_every() -> usize {
    10
}

impl SourceConfig {
    /// The Lorenz system at `rho` with all other settings at their defaults.
    pub fn lorenz(rho: f64) -> Self {
        SourceConfig::Lorenz {
            name: None,
            rho,
            sigma: LORENZ_SIGMA,
            beta: LORENZ_BETA,
            x0: lorenz_x0(),
            dt: default_dt(),
            t_end: lorenz_t_end(),
            transient: lorenz_transient(),
            sample_every: 1,
        }
    }

    /// The default noisy Hopf sweep.
    pub fn hopf() -> Self {
        SourceConfig::Hopf {
            name: None,
            lambda0: hopf_lambda0(),
            epsilon: hopf_epsilon(),
            noise: hopf_noise(),
            x0: hopf_x0(),
            dt: default_dt(),
            t_end: hopf_t_end(),
            transient: 0.0,
            sample_every: hopf_sample_every(),
            seed: None,
        }
    }

    pub fn csv(path: impl Into<PathBuf>, time_column: &str, value_columns: &[&str]) -> Self {
        SourceConfig::Csv {
            name: None,
            path: path.into(),
            time_column: time_column.into(),
            value_columns: value_columns.iter().map(|s| s.to_string()).collect(),
            interpolate: false,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SourceConfig::Lorenz { .. } => "lorenz",
            SourceConfig::Hopf { .. } => "hopf",
            SourceConfig::Csv { .. } => "csv",
        }
    }

    pub fn explicit_name(&self) -> Option<&str> {
        match self {
            SourceConfig::Lorenz { name, .. } | SourceConfig::Hopf { name, .. } | SourceConfig::Csv { name, .. } => name.as_deref(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowingConfig {
    #[serde(default = "window_len")]
    pub window_len: usize,
    /// Absent means half the window length.
    #[serde(default)]
    pub stride: Option<usize>,
    /// Absent means raw samples for multichannel sources, a 2-D delay
    /// embedding for scalar ones.
    #[serde(default)]
    pub mode: Option<WindowMode>,
}

fn window_len() -> usize {
    100
}

impl Default for WindowingConfig {
    fn default() -> Self {
        Self { window_len: window_len(), stride: None, mode: None }
    }
}

impl WindowingConfig {
    pub fn stride(&self) -> usize {
        self.stride.unwrap_or((self.window_len / 2).max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistenceConfig {
    #[serde(default = "one")]
    pub max_dim: usize,
    #[serde(default = "t_max")]
    pub t_max: TMax,
    #[serde(default = "cap_offset")]
    pub r: f64,
    #[serde(default)]
    pub reduction: Reduction,
}

fn t_max() -> TMax {
    TMax::Diameter
}
fn cap_offset() -> f64 {
    DEFAULT_CAP_OFFSET
}

impl Default for PersistenceConfig {
    fn default() -> Self {
        Self { max_dim: 1, t_max: TMax::Diameter, r: DEFAULT_CAP_OFFSET, reduction: Reduction::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusteringConfig {
    #[serde(default = "two")]
    pub k: usize,
    #[serde(default = "restarts")]
    pub restarts: usize,
    #[serde(default = "max_iter")]
    pub max_iter: usize,
    #[serde(default = "tol")]
    pub tol: f64,
}

fn two() -> usize {
    2
}
fn restarts() -> usize {
    DEFAULT_RESTARTS
}
fn max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn tol() -> f64 {
    DEFAULT_TOL
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        Self { k: 2, restarts: DEFAULT_RESTARTS, max_iter: DEFAULT_MAX_ITER, tol: DEFAULT_TOL }
    }
}

impl ClusteringConfig {
    pub fn kmeans(&self, seed: u64) -> KMeansConfig {
        KMeansConfig { k: self.k, seed, restarts: self.restarts, max_iter: self.max_iter, tol: self.tol }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotConfig {
    /// Channel plotted against window start time.
    #[serde(default)]
    pub channel: usize,
}

impl PipelineConfig {
    pub fn new(sources: Vec<SourceConfig>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            sources,
            windowing: WindowingConfig::default(),
            persistence: PersistenceConfig::default(),
            features: FeatureSpec::default(),
            clustering: ClusteringConfig::default(),
            plot: PlotConfig::default(),
            seed: DEFAULT_SEED,
            workers: None,
            out_dir: out_dir.into(),
        }
    }

    /// Parses JSON; relative CSV paths are taken relative to `base`.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(base) = base {
            for s in &mut config.sources {
                if let SourceConfig::Csv { path, .. } = s {
                    if path.is_relative() {
                        *path = base.join(&*path);
                    }
                }
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path.parent())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Display names of the sources, unique within the run.
    pub fn source_names(&self) -> Vec<String> {
        self.sources
            .iter()
            .enumerate()
            .map(|(i, s)| s.explicit_name().map_or_else(|| format!("{}{i}", s.kind()), String::from))
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.sources.is_empty() {
            return bad("at least one source is required".into());
        }
        let names = self.source_names();
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return bad(format!("source name `{n}` must be non-empty ASCII letters, digits, `_` or `-`"));
            }
            if names[..i].contains(n) {
                return bad(format!("duplicate source name `{n}`"));
            }
        }
        for s in &self.sources {
            match s {
                SourceConfig::Lorenz { x0, dt, t_end, transient, sample_every, sigma, rho, beta, .. } => {
                    if x0.len() != 3 {
                        return bad(format!("lorenz x0 needs 3 values, got {}", x0.len()));
                    }
                    check_grid(*dt, *t_end, *transient, *sample_every)?;
                    if ![*sigma, *rho, *beta].iter().all(|v| v.is_finite()) {
                        return bad("lorenz parameters must be finite".into());
                    }
                }
                SourceConfig::Hopf { x0, noise, dt, t_end, transient, sample_every, lambda0, epsilon, .. } => {
                    if x0.len() != 2 || noise.len() != 2 {
                        return bad("hopf x0 and noise need 2 values each".into());
                    }
                    if noise.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
                        return bad("hopf noise intensities must be finite and non-negative".into());
                    }
                    check_grid(*dt, *t_end, *transient, *sample_every)?;
                    if !(lambda0.is_finite() && epsilon.is_finite()) {
                        return bad("hopf parameters must be finite".into());
                    }
                }
                SourceConfig::Csv { value_columns, .. } => {
                    if value_columns.is_empty() {
                        return bad("csv source needs at least one value column".into());
                    }
                }
            }
        }
        let w = &self.windowing;
        if w.window_len < 2 {
            return bad(format!("window_len must be at least 2, got {}", w.window_len));
        }
        if w.stride == Some(0) {
            return bad("stride must be at least 1".into());
        }
        if let Some(crate::embed::WindowMode::Delay { d, tau, .. }) = w.mode {
            if d == 0 || tau == 0 {
                return bad("delay d and tau must be at least 1".into());
            }
        }
        let p = &self.persistence;
        if p.max_dim > 2 {
            return bad(format!("max_dim must be 0, 1 or 2, got {}", p.max_dim));
        }
        if !(p.r > 0.0 && p.r.is_finite()) {
            return bad(format!("r must be positive, got {}", p.r));
        }
        if let TMax::Fixed(t) = p.t_max {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("fixed t_max must be positive, got {t}"));
            }
        }
        if self.features.k_lengths == 0 {
            return bad("features.k_lengths must be at least 1".into());
        }
        if self.features.dim > p.max_dim {
            return bad(format!("features.dim {} exceeds persistence.max_dim {}", self.features.dim, p.max_dim));
        }
        self.clustering.kmeans(self.seed).validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.workers == Some(0) {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }
}

fn check_grid(dt: f64, t_end: f64, transient: f64, sample_every: usize) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite() && t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Config(format!("need dt > 0 and t_end > 0, got dt = {dt}, t_end = {t_end}")));
    }
    if !(transient >= 0.0 && transient < t_end) {
        return Err(Error::Config(format!("transient {transient} must lie in [0, t_end)")));
    }
    if sample_every == 0 {
        return Err(Error::Config("sample_every must be at least 1".into()));
    }
    Ok(())
}
