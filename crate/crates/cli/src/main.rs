use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regime_tagger::cluster::{kmeans_fit_with, tag_windows, KMeansConfig, DEFAULT_MAX_ITER, DEFAULT_RESTARTS, DEFAULT_TOL};
use regime_tagger::embed::WindowMode;
use regime_tagger::features::{featurize_windows, FeatureSpec};
use regime_tagger::io;
use regime_tagger::ph::{Reduction, TMax, DEFAULT_CAP_OFFSET};
use regime_tagger::pipeline::{
    build_source, persist_windows, run_pipeline, tag_report, window_source, worker_pool, PersistenceConfig, PipelineConfig,
    SourceConfig, WindowingConfig, DEFAULT_SEED, DIAGRAMS_FILE, FEATURES_FILE, MODEL_FILE, TAGGED_FILE, WINDOWS_FILE,
    WINDOW_INDEX_FILE,
};
use regime_tagger::{Error, Result};

#[derive(Parser)]
#[command(name = "regime-tagger", version, about = "Tag dynamical regimes of time series by persistent homology")]
struct Cli {
    /// Seed for stochastic simulation and k-means
    #[arg(long, global = true, env = "REGIME_TAGGER_SEED")]
    seed: Option<u64>,

    /// Worker threads for per-window stages (default: all cores)
    #[arg(long, global = true, env = "REGIME_TAGGER_WORKERS")]
    workers: Option<usize>,

    /// Directory for outputs whose path is not given explicitly
    #[arg(long, global = true, env = "REGIME_TAGGER_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// More log output (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a built-in system and write its trajectory
    Simulate(SimulateArgs),
    /// Cut a series into windows of points
    Embed(EmbedArgs),
    /// Persistence diagrams of every window
    Persist(PersistArgs),
    /// Top persistence lengths of every diagram
    Featurize(FeaturizeArgs),
    /// Cluster feature vectors and label every window
    Tag(TagArgs),
    /// Run all stages from a JSON config
    Pipeline(PipelineArgs),
    /// Summarize a tagged CSV: counts, runs, transitions
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum System {
    Lorenz,
    Hopf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(value_enum)]
    system: System,
    /// Lorenz rho
    #[arg(long, default_value_t = 28.0)]
    rho: f64,
    /// Hopf starting lambda
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    lambda0: f64,
    /// Hopf drift rate of lambda
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    epsilon: f64,
    /// Hopf noise intensity (both coordinates)
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    /// Initial state, comma separated
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x0: Option<Vec<f64>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Drop samples before this time
    #[arg(long)]
    transient: Option<f64>,
    /// Keep every n-th step
    #[arg(long)]
    sample_every: Option<usize>,
    /// Output CSV (default: <out-dir>/series_<system>.csv)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesInput {
    /// Series CSV with a header row
    #[arg(long)]
    input: PathBuf,
    /// Time column (default: the first column)
    #[arg(long)]
    time_column: Option<String>,
    /// Value columns, comma separated (default: all but the time column)
    #[arg(long, value_delimiter = ',')]
    columns: Option<Vec<String>>,
    /// Fill missing values by linear interpolation
    #[arg(long)]
    interpolate: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    Delay,
}

#[derive(Args)]
struct EmbedArgs {
    #[command(flatten)]
    series: SeriesInput,
    #[arg(long, default_value_t = 100)]
    window_len: usize,
    /// Default: half the window length
    #[arg(long)]
    stride: Option<usize>,
    /// Default: raw for multichannel input, delay for scalar input
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Delay lag in samples (default: first zero of the autocorrelation)
    #[arg(long)]
    tau: Option<usize>,
    /// Channel used by delay mode
    #[arg(long, default_value_t = 0)]
    channel: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Window start index/time sidecar
    #[arg(long)]
    index: Option<PathBuf>,
}

#[derive(Args)]
struct PersistArgs {
    #[arg(long)]
    windows: Option<PathBuf>,
    #[arg(long)]
    index: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    /// `diameter` or a positive number
    #[arg(long, default_value = "diameter", value_parser = parse_t_max)]
    t_max: TMax,
    /// Offset added to t_max for bars that never die
    #[arg(long, default_value_t = DEFAULT_CAP_OFFSET)]
    r: f64,
    #[arg(long, value_enum, default_value_t = ReductionArg::Coboundary)]
    reduction: ReductionArg,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionArg {
    Boundary,
    Coboundary,
}

#[derive(Args)]
struct FeaturizeArgs {
    #[arg(long)]
    diagrams: Option<PathBuf>,
    /// Window index sidecar, for start times
    #[arg(long)]
    index: Option<PathBuf>,
    /// Number of longest bars kept
    #[arg(long, default_value_t = 2)]
    k_lengths: usize,
    /// Homology degree of the bars
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Append this many degree-0 lengths
    #[arg(long, default_value_t = 0)]
    h0_lengths: usize,
    #[arg(long)]
    standardize: bool,
    /// Degree cutoff the diagrams were computed with
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    #[arg(long, default_value_t = DEFAULT_CAP_OFFSET)]
    r: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TagArgs {
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Label with an existing model instead of fitting one
    #[arg(long)]
    model: Option<PathBuf>,
    /// Where to write the fitted model
    #[arg(long)]
    model_out: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    window_len: Option<usize>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    k_lengths: Option<usize>,
    #[arg(long, value_parser = parse_t_max)]
    t_max: Option<TMax>,
    #[arg(long)]
    r: Option<f64>,
    /// Override any config field, e.g. `sources.0.rho=24.5` (repeatable; value parsed as JSON, else taken as a string)
    #[arg(long = "set", value_name = "PATH=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    tagged: Option<PathBuf>,
    /// Also write the JSON here
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn parse_t_max(s: &str) -> std::result::Result<TMax, String> {
    if s == "diameter" {
        return Ok(TMax::Diameter);
    }
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(TMax::Fixed(t)),
        _ => Err(format!("`{s}` is neither `diameter` nor a positive number")),
    }
}

struct Globals {
    seed: Option<u64>,
    workers: Option<usize>,
    out_dir: Option<PathBuf>,
}

impl Globals {
    fn dir(&self) -> &Path {
        self.out_dir.as_deref().unwrap_or(Path::new("."))
    }

    /// `explicit`, or `name` inside the output directory.
    fn path(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.dir().join(name))
    }

    fn output(&self, explicit: &Option<PathBuf>, name: &str) -> Result<PathBuf> {
        let path = self.path(explicit, name);
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| Error::Io { path: parent.to_path_buf(), source: e })?;
        }
        Ok(path)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let globals = Globals { seed: cli.seed, workers: cli.workers, out_dir: cli.out_dir };
    match run(cli.command, &globals) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.kind().exit_code() as u8)
        }
    }
}

fn run(command: Command, g: &Globals) -> Result<()> {
    match command {
        Command::Simulate(a) => simulate(a, g),
        Command::Embed(a) => embed(a, g),
        Command::Persist(a) => persist(a, g),
        Command::Featurize(a) => featurize(a, g),
        Command::Tag(a) => tag(a, g),
        Command::Pipeline(a) => pipeline(a, g),
        Command::Report(a) => report(a, g),
    }
}

fn simulate(a: SimulateArgs, g: &Globals) -> Result<()> {
    let mut source = match a.system {
        System::Lorenz => SourceConfig::lorenz(a.rho),
        System::Hopf => SourceConfig::hopf(),
    };
    match &mut source {
        SourceConfig::Lorenz { x0, dt, t_end, transient, sample_every, .. } => {
            override_grid(&a, x0, dt, t_end, transient, sample_every);
        }
        SourceConfig::Hopf { lambda0, epsilon, noise, x0, dt, t_end, transient, sample_every, .. } => {
            *lambda0 = a.lambda0;
            *epsilon = a.epsilon;
            *noise = vec![a.noise; 2];
            override_grid(&a, x0, dt, t_end, transient, sample_every);
        }
        SourceConfig::Csv { .. } => unreachable!(),
    }
    let mut config = PipelineConfig::new(vec![source], g.dir());
    config.seed = g.seed.unwrap_or(DEFAULT_SEED);
    config.validate()?;
    let series = build_source(&config.sources[0], config.seed)?;
    let name = match a.system {
        System::Lorenz => "series_lorenz.csv",
        System::Hopf => "series_hopf.csv",
    };
    let out = g.output(&a.output, name)?;
    io::write_series(&out, &series)?;
    log::info!("wrote {} samples to {}", series.len(), out.display());
    Ok(())
}

fn override_grid(a: &SimulateArgs, x0: &mut Vec<f64>, dt: &mut f64, t_end: &mut f64, transient: &mut f64, every: &mut usize) {
    if let Some(v) = &a.x0 {
        *x0 = v.clone();
    }
    if let Some(v) = a.dt {
        *dt = v;
    }
    if let Some(v) = a.t_end {
        *t_end = v;
    }
    if let Some(v) = a.transient {
        *transient = v;
    }
    if let Some(v) = a.sample_every {
        *every = v;
    }
}

fn load_series(s: &SeriesInput) -> Result<regime_tagger::embed::TimeSeries> {
    let header = io::csv_header(&s.input)?;
    let time = s.time_column.clone().unwrap_or_else(|| header[0].clone());
    let values = s.columns.clone().unwrap_or_else(|| header.iter().filter(|c| **c != time).cloned().collect());
    io::ingest_csv(&s.input, &time, &values, s.interpolate)
}

fn embed(a: EmbedArgs, g: &Globals) -> Result<()> {
    let series = load_series(&a.series)?;
    let mode = match a.mode {
        None if a.tau.is_none() => None,
        Some(ModeArg::Raw) => Some(WindowMode::Raw),
        _ => {
            let tau = match a.tau {
                Some(t) => t,
                None => match regime_tagger::embed::default_mode(&series, a.window_len) {
                    WindowMode::Delay { tau, .. } => tau,
                    WindowMode::Raw => 1,
                },
            };
            Some(WindowMode::Delay { d: a.d, tau, channel: a.channel })
        }
    };
    let windowing = WindowingConfig { window_len: a.window_len, stride: a.stride, mode };
    if windowing.stride() == 0 || windowing.window_len < 2 {
        return Err(Error::InvalidParameter("window_len must be >= 2 and stride >= 1".into()));
    }
    let windows = window_source(&series, &windowing)?;
    let out = g.output(&a.output, WINDOWS_FILE)?;
    let index = g.output(&a.index, WINDOW_INDEX_FILE)?;
    io::write_windows(&out, &index, &windows)?;
    log::info!("wrote {} windows to {}", windows.len(), out.display());
    Ok(())
}

fn persist(a: PersistArgs, g: &Globals) -> Result<()> {
    let windows = io::read_windows(&g.path(&a.windows, WINDOWS_FILE), &g.path(&a.index, WINDOW_INDEX_FILE))?;
    let reduction = match a.reduction {
        ReductionArg::Boundary => Reduction::Boundary,
        ReductionArg::Coboundary => Reduction::Coboundary,
    };
    if !(a.r > 0.0 && a.r.is_finite()) {
        return Err(Error::InvalidParameter(format!("r must be positive, got {}", a.r)));
    }
    let config = PersistenceConfig { max_dim: a.max_dim, t_max: a.t_max, r: a.r, reduction };
    let diagrams = worker_pool(g.workers)?.install(|| persist_windows(&windows, &config))?;
    let out = g.output(&a.output, DIAGRAMS_FILE)?;
    io::write_diagrams(&out, &diagrams)?;
    log::info!("wrote {} diagrams to {}", diagrams.len(), out.display());
    Ok(())
}

fn featurize(a: FeaturizeArgs, g: &Globals) -> Result<()> {
    let diagrams = io::read_diagrams(&g.path(&a.diagrams, DIAGRAMS_FILE), a.max_dim, a.r)?;
    let index_path = g.path(&a.index, WINDOW_INDEX_FILE);
    let starts = read_start_times(&index_path)?;
    let spec = FeatureSpec { k_lengths: a.k_lengths, dim: a.dim, h0_lengths: a.h0_lengths, standardize: a.standardize };
    let features = featurize_windows(&diagrams, &starts, &spec)?;
    let out = g.output(&a.output, FEATURES_FILE)?;
    io::write_features(&out, &features)?;
    Ok(())
}

fn read_start_times(index: &Path) -> Result<Vec<f64>> {
    let series = io::ingest_csv(index, "window_index", &["start_time".to_string()], false)?;
    series.channel(0)
}

fn tag(a: TagArgs, g: &Globals) -> Result<()> {
    let features = io::read_features(&g.path(&a.features, FEATURES_FILE))?;
    let model = match &a.model {
        Some(path) => io::read_model(path)?,
        None => {
            let data: Vec<Vec<f64>> = features.iter().map(|f| f.lengths.clone()).collect();
            let config = KMeansConfig {
                k: a.k,
                seed: g.seed.unwrap_or(DEFAULT_SEED),
                restarts: a.restarts,
                max_iter: a.max_iter,
                tol: a.tol,
            };
            let model = kmeans_fit_with(&data, &config)?;
            io::write_model(&g.output(&a.model_out, MODEL_FILE)?, &model)?;
            model
        }
    };
    let tagged = tag_windows(&model, &features)?;
    io::write_tagged(&g.output(&a.output, TAGGED_FILE)?, &tagged)?;
    Ok(())
}

fn pipeline(a: PipelineArgs, g: &Globals) -> Result<()> {
    let mut config = PipelineConfig::load(&a.config)?;
    if !a.set.is_empty() {
        let mut value = serde_json::to_value(&config)?;
        for item in &a.set {
            set_field(&mut value, item)?;
        }
        config = PipelineConfig::from_json(&value.to_string(), None)?;
    }
    if let Some(seed) = g.seed {
        config.seed = seed;
    }
    if g.workers.is_some() {
        config.workers = g.workers;
    }
    if let Some(dir) = &g.out_dir {
        config.out_dir = dir.clone();
    }
    if let Some(k) = a.k {
        config.clustering.k = k;
    }
    if let Some(w) = a.window_len {
        config.windowing.window_len = w;
    }
    if a.stride.is_some() {
        config.windowing.stride = a.stride;
    }
    if let Some(k) = a.k_lengths {
        config.features.k_lengths = k;
    }
    if let Some(t) = a.t_max {
        config.persistence.t_max = t;
    }
    if let Some(r) = a.r {
        config.persistence.r = r;
    }
    let manifest = run_pipeline(&config)?;
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(())
}

fn set_field(root: &mut serde_json::Value, item: &str) -> Result<()> {
    let bad = |msg: &str| Error::Config(format!("--set {item}: {msg}"));
    let (path, raw) = item.split_once('=').ok_or_else(|| bad("expected PATH=VALUE"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut node = root;
    let mut keys = path.split('.').peekable();
    while let Some(key) = keys.next() {
        let last = keys.peek().is_none();
        node = match node {
            serde_json::Value::Object(map) if last => {
                map.insert(key.to_string(), value);
                return Ok(());
            }
            serde_json::Value::Object(map) => map.entry(key).or_insert_with(|| serde_json::json!({})),
            serde_json::Value::Array(items) => {
                let i: usize = key.parse().map_err(|_| bad("array index expected"))?;
                let slot = items.get_mut(i).ok_or_else(|| bad("index out of range"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(bad("path goes through a scalar")),
        };
    }
    Err(bad("empty path"))
}

fn report(a: ReportArgs, g: &Globals) -> Result<()> {
    let tagged = io::read_tagged(&g.path(&a.tagged, TAGGED_FILE))?;
    let summary = tag_report(&tagged)?;
    let text = serde_json::to_string_pretty(&summary)?;
    if let Some(path) = &a.output {
        io::write_text(path, &format!("{text}\n"))?;
    }
    println!("{text}");
    Ok(())
}
