//! `mixfbm` command line. Results go to stdout or `--out`, diagnostics to
//! stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use mixfbm_core::effects::{confidence_intervals, continuous_mu_tilde, estimate_effects};
use mixfbm_core::harness::{CellSummary, ExperimentConfig, Histogram};
use mixfbm_core::hurst::estimate_h;
use mixfbm_core::panel::simulate_panel_with;
use mixfbm_core::{
    CirculantSampler, EffectsLaw, ExactSampler, GramMatrix, Hurst, PathSampler, RngStream, SamplerKind,
    SamplingGrid, VariationFilter,
};
use serde::Serialize;

use crate::config::{parse_config, parse_filter, parse_sampler, sampler_name};
use crate::panel_file::{read_panel, write_panel, PanelFileError};
use crate::svg::histogram_svg;
use crate::{json, parallel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;
pub const EXIT_ESTIMATION: i32 = 4;
pub const EXIT_OUTPUT: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "mixfbm", version, about = "Linear fBm diffusions with Gaussian random effects")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a panel on the uniform grid t_j = j T / n and write it as CSV.
    Simulate(SimulateArgs),
    /// Estimate the Hurst index from one subject of a panel.
    Hurst(HurstArgs),
    /// Estimate mu and sigma2 for a known Hurst index.
    Effects(EffectsArgs),
    /// Run a Monte Carlo experiment described by a config file.
    Experiment(ExperimentArgs),
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[arg(long, value_parser = hurst_value)]
    pub hurst: Hurst,
    #[arg(long, value_parser = positive_count)]
    pub subjects: usize,
    #[arg(long, value_parser = positive_count)]
    pub n_obs: usize,
    #[arg(long, default_value_t = 1.0, value_parser = positive_real)]
    pub horizon: f64,
    #[arg(long, allow_hyphen_values = true, value_parser = finite_real)]
    pub mu: f64,
    #[arg(long, value_parser = non_negative_real)]
    pub sigma2: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// exact or circulant
    #[arg(long, default_value = "exact", value_parser = parse_sampler)]
    pub sampler: SamplerKind,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct HurstArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// 1-based subject index.
    #[arg(long, default_value_t = 1, value_parser = positive_count)]
    pub subject: usize,
    #[arg(long, default_value_t = 2.0, value_parser = positive_real)]
    pub k: f64,
    /// diff2, diff3 or comma-separated coefficients.
    #[arg(long, default_value = "diff2", allow_hyphen_values = true, value_parser = parse_filter)]
    pub filter: VariationFilter,
}

#[derive(Debug, clap::Args)]
pub struct EffectsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_parser = hurst_value)]
    pub hurst: Hurst,
    #[arg(long, default_value_t = 0.95, value_parser = level_value)]
    pub level: f64,
}

#[derive(Debug, clap::Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Run replications on one thread.
    #[arg(long)]
    pub serial: bool,
}

fn finite_real(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| format!("`{s}` is not a finite number"))
}

fn positive_real(s: &str) -> Result<f64, String> {
    finite_real(s).and_then(|v| if v > 0.0 { Ok(v) } else { Err("must be positive".into()) })
}

fn non_negative_real(s: &str) -> Result<f64, String> {
    finite_real(s).and_then(|v| if v >= 0.0 { Ok(v) } else { Err("must be non-negative".into()) })
}

fn positive_count(s: &str) -> Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

fn hurst_value(s: &str) -> Result<Hurst, String> {
    Hurst::new(finite_real(s)?).map_err(|e| e.to_string())
}

fn level_value(s: &str) -> Result<f64, String> {
    finite_real(s).and_then(|v| {
        if v > 0.0 && v < 1.0 {
            Ok(v)
        } else {
            Err("must lie strictly between 0 and 1".into())
        }
    })
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::new(EXIT_OUTPUT, format!("cannot write {}: {e}", path.display()))
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Hurst(a) => hurst(a),
        Command::Effects(a) => effects(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn write_stdout(text: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|()| out.flush())
        .map_err(|e| CliError::new(EXIT_OUTPUT, format!("cannot write to stdout: {e}")))
}

fn load_panel(path: &Path) -> Result<mixfbm_core::Panel, CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::new(EXIT_ESTIMATION, format!("cannot read {}: {e}", path.display())))?;
    read_panel(io::BufReader::new(file)).map_err(|e| {
        let what = match e {
            PanelFileError::Grid(_) => "inconsistent panel",
            _ => "malformed panel",
        };
        CliError::new(EXIT_ESTIMATION, format!("{what} in {}: {e}", path.display()))
    })
}

fn simulate(a: SimulateArgs) -> Result<(), CliError> {
    let sim_err = |e: mixfbm_core::Error| CliError::new(EXIT_SIMULATION, format!("simulation failed: {e}"));
    let grid = SamplingGrid::uniform(a.n_obs, a.horizon).map_err(sim_err)?;
    let law = EffectsLaw::new(a.mu, a.sigma2).map_err(|e| CliError::new(EXIT_USAGE, e.to_string()))?;
    eprintln!(
        "seed {} | H = {} | N = {} | grid t_j = j * {} / {} for j = 1..{} | sampler {}",
        a.seed,
        a.hurst.value(),
        a.subjects,
        a.horizon,
        a.n_obs,
        a.n_obs,
        sampler_name(a.sampler)
    );
    let mut rng = RngStream::new(a.seed, 0);
    let panel = match a.sampler {
        SamplerKind::Exact => {
            let gram = GramMatrix::new(grid, a.hurst).map_err(sim_err)?;
            simulate_panel_with(&ExactSampler::new(&gram), a.subjects, law, &mut rng)
        }
        SamplerKind::Circulant => {
            let s = CirculantSampler::new(a.n_obs, a.horizon, a.hurst).map_err(sim_err)?;
            simulate_panel_with(&s as &dyn PathSampler, a.subjects, law, &mut rng)
        }
    }
    .map_err(sim_err)?;

    let mut buf = Vec::new();
    write_panel(&mut buf, &panel).map_err(|e| CliError::new(EXIT_OUTPUT, e.to_string()))?;
    match a.out {
        Some(path) => fs::write(&path, &buf).map_err(|e| output_error(&path, e)),
        None => write_stdout(std::str::from_utf8(&buf).expect("csv is UTF-8")),
    }
}

#[derive(Serialize)]
struct HurstDoc {
    subject: usize,
    n_obs: usize,
    horizon: f64,
    k: f64,
    filter: Vec<f64>,
    filter_order: usize,
    statistic: f64,
    h_hat: f64,
    asym_std: f64,
}

fn hurst(a: HurstArgs) -> Result<(), CliError> {
    let panel = load_panel(&a.input)?;
    if a.subject > panel.n_subjects() {
        return Err(CliError::new(
            EXIT_USAGE,
            format!("--subject {} is out of range (panel has {} subjects)", a.subject, panel.n_subjects()),
        ));
    }
    let grid = panel.grid();
    if !grid.is_uniform(1e-9) {
        return Err(CliError::new(
            EXIT_ESTIMATION,
            "Hurst estimation needs the uniform grid t_j = j T / n",
        ));
    }
    let est = estimate_h(panel.row(a.subject - 1), grid.horizon(), a.k, &a.filter)
        .map_err(|e| CliError::new(EXIT_ESTIMATION, format!("estimation failed: {e}")))?;
    let doc = HurstDoc {
        subject: a.subject,
        n_obs: est.n,
        horizon: grid.horizon(),
        k: est.k,
        filter: est.filter.coeffs().to_vec(),
        filter_order: est.filter.order(),
        statistic: est.statistic,
        h_hat: est.h_hat,
        asym_std: est.asym_std,
    };
    write_stdout(&json::to_string(&doc).expect("serializable"))
}

#[derive(Serialize)]
struct IntervalDoc {
    lo: f64,
    hi: f64,
}

#[derive(Serialize)]
struct EffectsDoc {
    hurst: f64,
    n_subjects: usize,
    n_obs: usize,
    q: f64,
    mu_hat: f64,
    sigma2_hat: f64,
    sigma2_hat_clamped: f64,
    beta_hat: f64,
    mu_tilde_endpoint: f64,
    exact_std_mu: f64,
    exact_std_sigma2: f64,
    exact_std_basis: &'static str,
    level: f64,
    ci_mu: IntervalDoc,
    ci_sigma2: IntervalDoc,
}

fn effects(a: EffectsArgs) -> Result<(), CliError> {
    let panel = load_panel(&a.input)?;
    let est_err = |e: mixfbm_core::Error| CliError::new(EXIT_ESTIMATION, format!("estimation failed: {e}"));
    let gram = GramMatrix::new(panel.grid().clone(), a.hurst).map_err(est_err)?;
    let est = estimate_effects(&panel, &gram).map_err(est_err)?;
    let (ci_mu, ci_sigma2) = confidence_intervals(&est, a.level).map_err(est_err)?;
    let doc = EffectsDoc {
        hurst: a.hurst.value(),
        n_subjects: est.n_subjects,
        n_obs: panel.n_obs(),
        q: est.q,
        mu_hat: est.mu_hat,
        sigma2_hat: est.sigma2_hat,
        sigma2_hat_clamped: est.sigma2_clamped(),
        beta_hat: est.beta_hat,
        mu_tilde_endpoint: continuous_mu_tilde(&panel),
        exact_std_mu: est.exact_std_mu,
        exact_std_sigma2: est.exact_std_sigma2,
        exact_std_basis: "plug-in",
        level: a.level,
        ci_mu: IntervalDoc {
            lo: ci_mu.lo,
            hi: ci_mu.hi,
        },
        ci_sigma2: IntervalDoc {
            lo: ci_sigma2.lo,
            hi: ci_sigma2.hi,
        },
    };
    write_stdout(&json::to_string(&doc).expect("serializable"))
}

#[derive(Serialize)]
struct ConfigDoc {
    h_list: Vec<f64>,
    n_subjects_list: Vec<usize>,
    n_obs_list: Vec<usize>,
    horizon: f64,
    mu0: f64,
    sigma20: f64,
    replications: usize,
    k: f64,
    filter: Vec<f64>,
    base_seed: u64,
    estimate_hurst: bool,
    sampler: &'static str,
}

impl From<&ExperimentConfig> for ConfigDoc {
    fn from(c: &ExperimentConfig) -> Self {
        Self {
            h_list: c.h_list.iter().map(|h| h.value()).collect(),
            n_subjects_list: c.n_subjects_list.clone(),
            n_obs_list: c.n_obs_list.clone(),
            horizon: c.horizon,
            mu0: c.mu0,
            sigma20: c.sigma20,
            replications: c.replications,
            k: c.k,
            filter: c.filter.coeffs().to_vec(),
            base_seed: c.base_seed,
            estimate_hurst: c.estimate_hurst,
            sampler: sampler_name(c.sampler),
        }
    }
}

#[derive(Serialize)]
struct HistogramDoc {
    edges: Vec<f64>,
    counts: Vec<usize>,
}

impl From<&Histogram> for HistogramDoc {
    fn from(h: &Histogram) -> Self {
        Self {
            edges: h.edges.clone(),
            counts: h.counts.clone(),
        }
    }
}

#[derive(Serialize)]
struct HurstStatsDoc {
    mean: f64,
    emp_std: f64,
    successes: usize,
    failures: usize,
    histogram: HistogramDoc,
}

#[derive(Serialize)]
struct CellDoc {
    h: f64,
    n_subjects: usize,
    n_obs: usize,
    replications: usize,
    q: f64,
    mean_mu_hat: f64,
    exact_std_mu: f64,
    emp_std_mu: f64,
    mean_sigma2_hat: f64,
    exact_mean_sigma2: f64,
    exact_std_sigma2: f64,
    emp_std_sigma2: f64,
    hist_mu: HistogramDoc,
    hist_sigma2: Option<HistogramDoc>,
    hurst: Option<HurstStatsDoc>,
}

impl From<&CellSummary> for CellDoc {
    fn from(c: &CellSummary) -> Self {
        Self {
            h: c.h,
            n_subjects: c.n_subjects,
            n_obs: c.n_obs,
            replications: c.replications,
            q: c.q,
            mean_mu_hat: c.mean_mu_hat,
            exact_std_mu: c.exact_std_mu,
            emp_std_mu: c.emp_std_mu,
            mean_sigma2_hat: c.mean_sigma2_hat,
            exact_mean_sigma2: c.exact_mean_sigma2,
            exact_std_sigma2: c.exact_std_sigma2,
            emp_std_sigma2: c.emp_std_sigma2,
            hist_mu: (&c.hist_mu).into(),
            hist_sigma2: c.hist_sigma2.as_ref().map(Into::into),
            hurst: c.hurst.as_ref().map(|s| HurstStatsDoc {
                mean: s.mean,
                emp_std: s.emp_std,
                successes: s.successes,
                failures: s.failures,
                histogram: (&s.histogram).into(),
            }),
        }
    }
}

#[derive(Serialize)]
struct Manifest {
    version: &'static str,
    config: ConfigDoc,
    cells: usize,
    files: Vec<String>,
}

pub const TABLE_HEADER: &str = "H,N,mean_mu,exact_std_mu,emp_std_mu,mean_sigma2,exact_std_sigma2,emp_std_sigma2";

/// Rows for one `n`, in `H` then `N` order.
pub fn table_csv(cells: &[CellSummary], n_obs: usize) -> String {
    let mut s = String::from(TABLE_HEADER);
    s.push('\n');
    for c in cells.iter().filter(|c| c.n_obs == n_obs) {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            c.h,
            c.n_subjects,
            c.mean_mu_hat,
            c.exact_std_mu,
            c.emp_std_mu,
            c.mean_sigma2_hat,
            c.exact_std_sigma2,
            c.emp_std_sigma2
        ));
    }
    s
}

pub fn histogram_file_name(c: &CellSummary, param: &str) -> String {
    format!("hist_{}_{}_{}_{param}.svg", c.h, c.n_subjects, c.n_obs)
}

fn experiment(a: ExperimentArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.config)
        .map_err(|e| CliError::new(EXIT_USAGE, format!("cannot read config {}: {e}", a.config.display())))?;
    let cfg = parse_config(&text).map_err(|e| CliError::new(EXIT_USAGE, format!("{}: {e}", a.config.display())))?;
    fs::create_dir_all(&a.out).map_err(|e| output_error(&a.out, e))?;

    let total = cfg.cells().len();
    eprintln!(
        "{total} cells x {} replications, base seed {}, sampler {}",
        cfg.replications,
        cfg.base_seed,
        sampler_name(cfg.sampler)
    );
    let mut done = 0;
    let progress = |c: &CellSummary| {
        done += 1;
        eprintln!("[{done}/{total}] H = {} N = {} n = {}", c.h, c.n_subjects, c.n_obs);
    };
    let cells = if a.serial {
        let mut progress = progress;
        mixfbm_core::harness::run_experiment(&cfg).inspect(|cells| cells.iter().for_each(&mut progress))
    } else {
        parallel::run_experiment(&cfg, progress)
    }
    .map_err(|e| CliError::new(EXIT_SIMULATION, format!("experiment failed: {e}")))?;

    let mut files = Vec::new();
    let mut put = |name: String, contents: &str| -> Result<(), CliError> {
        let path = a.out.join(&name);
        fs::write(&path, contents).map_err(|e| output_error(&path, e))?;
        files.push(name);
        Ok(())
    };
    for &n in &cfg.n_obs_list {
        put(format!("table_n{n}.csv"), &table_csv(&cells, n))?;
    }
    for c in &cells {
        let label = format!("H = {}, N = {}, n = {}", c.h, c.n_subjects, c.n_obs);
        put(
            histogram_file_name(c, "mu"),
            &histogram_svg(&c.hist_mu, &format!("mu estimates ({label})"), "mu estimate"),
        )?;
        if let Some(h) = &c.hist_sigma2 {
            put(
                histogram_file_name(c, "sigma2"),
                &histogram_svg(h, &format!("sigma2 estimates ({label})"), "sigma2 estimate"),
            )?;
        }
        if let Some(s) = &c.hurst {
            put(
                histogram_file_name(c, "hurst"),
                &histogram_svg(&s.histogram, &format!("Hurst estimates ({label})"), "H estimate"),
            )?;
        }
    }
    let docs: Vec<CellDoc> = cells.iter().map(Into::into).collect();
    put("summary.json".into(), &json::to_string(&docs).expect("serializable"))?;
    files.push("manifest.json".into());
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        config: (&cfg).into(),
        cells: cells.len(),
        files,
    };
    let path = a.out.join("manifest.json");
    fs::write(&path, json::to_string(&manifest).expect("serializable")).map_err(|e| output_error(&path, e))?;
    eprintln!("wrote {} files to {}", manifest.files.len(), a.out.display());
    Ok(())
}
