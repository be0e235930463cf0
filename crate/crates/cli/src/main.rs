//! Command-line front end: config ingestion, subcommand dispatch,
//! deterministic seeding, and report/CSV emission.
//!
//! Exit codes: 0 success, 1 config error, 2 runtime error, 3 check failure
//! (with `--check`).

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use stabnet_core::branching::{
    branching_sizes, compare_domination, h_d_norm, h_d_norm_mc, BranchingConfig, IntensityKind,
    OffspringLaw,
};
use stabnet_core::formation::simulate;
use stabnet_core::inference::{im_t_test, mc_clt, poisson_variance_decomp, randomization_test, Tail};
use stabnet_core::moments::{aggregate, node_stats, StatKind};
use stabnet_core::stabilization::{degree_trend, sparsity_check, stab_report, tail_fit};
use stabnet_core::{CoreError, ModelSpec, SparsityScale};

// ==== Configuration ============================================================

/// Mirror of the core intensity kinds with a serde surface.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum BranchKindCfg {
    DProcess,
    MProcess { depth: usize },
    Hybrid { k: usize },
}

impl BranchKindCfg {
    fn to_core(self) -> IntensityKind {
        match self {
            BranchKindCfg::DProcess => IntensityKind::DProcess,
            BranchKindCfg::MProcess { depth } => IntensityKind::MProcess { depth },
            BranchKindCfg::Hybrid { k } => IntensityKind::Hybrid { k },
        }
    }
}

fn default_cap() -> usize {
    1_000_000
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchingParams {
    kind: BranchKindCfg,
    /// Constant offspring mean (single-type calibration mode); model-driven
    /// kernels when absent.
    #[serde(default)]
    mu: Option<f64>,
    #[serde(default = "default_cap")]
    population_cap: usize,
    /// Networks to simulate for the domination comparison (skipped if absent).
    #[serde(default)]
    domination_net_reps: Option<usize>,
}

/// One text config shared by all subcommands; each command validates the
/// keys it needs.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    model: ModelSpec,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    reps: Option<usize>,
    #[serde(default)]
    k: Option<usize>,
    #[serde(default)]
    stat_kind: Option<StatKind>,
    #[serde(default)]
    n_grid: Option<Vec<usize>>,
    #[serde(default)]
    draws: Option<usize>,
    #[serde(default)]
    groups: Option<usize>,
    #[serde(default)]
    mu0: Option<Vec<f64>>,
    #[serde(default)]
    tail: Option<Tail>,
    #[serde(default)]
    poissonized: Option<bool>,
    #[serde(default)]
    branching: Option<BranchingParams>,
    /// KS threshold for `clt --check`.
    #[serde(default)]
    max_ks: Option<f64>,
    /// Relative tolerance against the analytic limit for `sparsity --check`.
    #[serde(default)]
    sparsity_tol: Option<f64>,
}

// ==== CLI surface ==============================================================

#[derive(Parser, Debug)]
#[command(name = "stabnet", version, about = "Sparse strategic network-formation toolkit")]
struct Cli {
    /// Path to the JSON run config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Thread-pool size (determinism holds at any value).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Number of nodes override.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Replication-count override.
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Locality K override.
    #[arg(long = "K", global = true)]
    k: Option<usize>,
    /// Fail (exit 3) when the subcommand's acceptance check does not hold.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Simulate one network panel and write its edge list.
    Simulate,
    /// Simulate and write per-node statistics plus their aggregate.
    Moments,
    /// Stabilization sets J_i, radii, and exact-regrowth verification.
    Stabilize,
    /// Dominating branching processes: sizes, tails, norm, domination.
    Branching,
    /// Monte Carlo check of the normal limit of the aggregated statistic.
    Clt,
    /// Per-network means, randomization test, robust t-test, variance
    /// decomposition.
    Infer,
    /// Mean-degree boundedness across a grid of network sizes.
    Sparsity,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Moments => "moments",
            Command::Stabilize => "stabilize",
            Command::Branching => "branching",
            Command::Clt => "clt",
            Command::Infer => "infer",
            Command::Sparsity => "sparsity",
        }
    }
}

// ==== Error / exit-code plumbing ===============================================

enum AppError {
    Config(String),
    Runtime(String),
    Check(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Config(_) => 1,
            AppError::Runtime(_) => 2,
            AppError::Check(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Config(m) | AppError::Runtime(m) | AppError::Check(m) => m,
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        AppError::Runtime(e.to_string())
    }
}

fn require<T: Copy>(field: Option<T>, key: &str, cmd: &str) -> Result<T, AppError> {
    field.ok_or_else(|| AppError::Config(format!("missing required key \"{key}\" for subcommand {cmd}")))
}

fn require_ref<'a, T>(field: &'a Option<T>, key: &str, cmd: &str) -> Result<&'a T, AppError> {
    field
        .as_ref()
        .ok_or_else(|| AppError::Config(format!("missing required key \"{key}\" for subcommand {cmd}")))
}

// ==== Artifact helpers =========================================================

/// FNV-1a 64-bit over the canonical (re-serialized) config text.
fn config_hash(canonical: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in canonical.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<String>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self, AppError> {
        std::fs::create_dir_all(dir)
            .map_err(|e| AppError::Config(format!("output directory {}: {e}", dir.display())))?;
        Ok(Artifacts { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), AppError> {
        std::fs::write(self.dir.join(name), contents)
            .map_err(|e| AppError::Runtime(format!("writing {name}: {e}")))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn manifest(
        &mut self,
        cmd: &str,
        hash: u64,
        seed: u64,
        threads: usize,
    ) -> Result<(), AppError> {
        let mut m = String::new();
        let _ = writeln!(m, "command={cmd}");
        let _ = writeln!(m, "config_hash={hash:016x}");
        let _ = writeln!(m, "seed={seed}");
        let _ = writeln!(m, "threads={threads}");
        let _ = writeln!(m, "stabnet_version={}", env!("CARGO_PKG_VERSION"));
        for name in &self.written {
            let _ = writeln!(m, "artifact={name}");
        }
        self.write("manifest.txt", &m)
    }
}

fn csv_rows<I, F>(header: &str, rows: I, fmt: F) -> String
where
    I: IntoIterator,
    F: Fn(I::Item) -> String,
{
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&fmt(row));
        out.push('\n');
    }
    out
}

// ==== Subcommand implementations ===============================================

fn stat_kind_or_default(cfg: &RunConfig) -> StatKind {
    cfg.stat_kind
        .clone()
        .unwrap_or(StatKind::Count(stabnet_core::moments::CountKind::Degree { t: 0 }))
}

fn cmd_simulate(cfg: &RunConfig, seed: u64, art: &mut Artifacts) -> Result<(), AppError> {
    let n = require(cfg.n, "n", "simulate")?;
    let poissonized = cfg.poissonized.unwrap_or(false);
    let (prims, series, scale) = simulate(&cfg.model, n, n, poissonized, seed)?;
    art.write("edges.csv", &series.to_csv(prims.ids()))?;
    let mut rep = String::new();
    let _ = writeln!(rep, "nodes={}", prims.n());
    let _ = writeln!(rep, "periods={}", series.t_max() + 1);
    let _ = writeln!(rep, "r={}", scale.r);
    for t in 0..=series.t_max() {
        let _ = writeln!(rep, "mean_degree_{t}={}", 2.0 * series.at(t).edge_count() as f64 / prims.n() as f64);
    }
    art.write("report.txt", &rep)
}

fn cmd_moments(cfg: &RunConfig, seed: u64, art: &mut Artifacts) -> Result<(), AppError> {
    let n = require(cfg.n, "n", "moments")?;
    let kind = require_ref(&cfg.stat_kind, "stat_kind", "moments")?;
    let (prims, series, _) = simulate(&cfg.model, n, n, cfg.poissonized.unwrap_or(false), seed)?;
    let stats = node_stats(&cfg.model, &prims, &series, kind)?;
    let dim = kind.dim();
    let header: String = std::iter::once("node_id".to_string())
        .chain((0..dim).map(|k| format!("c{k}")))
        .collect::<Vec<_>>()
        .join(",");
    let body = csv_rows(&header, prims.ids().iter().zip(&stats), |(id, row)| {
        std::iter::once(id.to_string())
            .chain(row.iter().map(|v| v.to_string()))
            .collect::<Vec<_>>()
            .join(",")
    });
    art.write("stats.csv", &body)?;
    let agg = aggregate(&stats);
    let mut rep = String::new();
    for (k, v) in agg.iter().enumerate() {
        let _ = writeln!(rep, "aggregate_c{k}={v}");
    }
    art.write("report.txt", &rep)
}

fn cmd_stabilize(cfg: &RunConfig, seed: u64, check: bool, art: &mut Artifacts) -> Result<(), AppError> {
    let n = require(cfg.n, "n", "stabilize")?;
    let kind = stat_kind_or_default(cfg);
    let k = cfg.k.unwrap_or_else(|| kind.locality());
    let (prims, _, scale) = simulate(&cfg.model, n, n, false, seed)?;
    let records = stab_report(&cfg.model, &prims, scale, k, &kind)?;
    let body = csv_rows("node,j_size,radius,verified", records.iter(), |r| {
        format!("{},{},{},{}", r.node, r.j_size, r.radius, r.verified)
    });
    art.write("stab.csv", &body)?;
    let verified = records.iter().filter(|r| r.verified).count();
    let sizes: Vec<f64> = records.iter().map(|r| r.j_size as f64).collect();
    let mut rep = String::new();
    let _ = writeln!(rep, "nodes={}", records.len());
    let _ = writeln!(rep, "verified={verified}");
    let _ = writeln!(rep, "mean_j_size={}", stabnet_core::numeric::mean(&sizes));
    art.write("report.txt", &rep)?;
    if check && verified != records.len() {
        return Err(AppError::Check(format!(
            "stabilization verification failed for {} of {} nodes",
            records.len() - verified,
            records.len()
        )));
    }
    Ok(())
}

fn cmd_branching(cfg: &RunConfig, seed: u64, check: bool, art: &mut Artifacts) -> Result<(), AppError> {
    let reps = require(cfg.reps, "reps", "branching")?;
    let params = require_ref(&cfg.branching, "branching", "branching")?;
    let offspring = match params.mu {
        Some(mu) => OffspringLaw::ConstantMean { mu },
        None => OffspringLaw::Model,
    };
    // (1 + r) slack from the configured network size when given, else none.
    let slack = match cfg.n {
        Some(n) => SparsityScale::new(&cfg.model, n)?.r,
        None => 0.0,
    };
    let bcfg = BranchingConfig {
        spec: &cfg.model,
        kind: params.kind.to_core(),
        offspring,
        slack,
        population_cap: params.population_cap,
        seed,
    };
    let samples = branching_sizes(&bcfg, reps)?;
    let body = csv_rows("rep,total_size,truncated,generations", samples.iter().enumerate(), |(r, s)| {
        format!("{r},{},{},{}", s.total_size, s.truncated, s.generations)
    });
    art.write("sizes.csv", &body)?;

    let sizes: Vec<f64> = samples.iter().map(|s| s.total_size as f64).collect();
    let mut rep = String::new();
    let _ = writeln!(rep, "mean_size={}", stabnet_core::numeric::mean(&sizes));
    let fit = tail_fit(&sizes).ok();
    if let Some(fit) = &fit {
        let _ = writeln!(rep, "tail_slope={}", fit.slope);
        let _ = writeln!(rep, "tail_slope_ci={},{}", fit.slope_ci.0, fit.slope_ci.1);
        let _ = writeln!(rep, "exponential_tail_consistent={}", fit.exponential_tail_consistent());
        let body = csv_rows(
            "threshold,log_survival",
            fit.thresholds.iter().zip(&fit.log_survival),
            |(w, ls)| format!("{w},{ls}"),
        );
        art.write("tail.csv", &body)?;
    }
    if matches!(offspring, OffspringLaw::Model) {
        let _ = writeln!(rep, "h_d_norm={}", h_d_norm(&cfg.model)?);
        if cfg.model.d_z == 0 {
            let (mc, se) = h_d_norm_mc(&cfg.model, 200_000, seed ^ 0x42)?;
            let _ = writeln!(rep, "h_d_norm_mc={mc}");
            let _ = writeln!(rep, "h_d_norm_mc_se={se}");
        }
    }
    if let (Some(net_reps), Some(n)) = (params.domination_net_reps, cfg.n) {
        let k = cfg.k.unwrap_or(1);
        let dom = compare_domination(&cfg.model, n, net_reps, reps, k, seed)?;
        let body = csv_rows(
            "threshold,component,d_process,kneigh,m_process",
            (0..dom.thresholds.len()).collect::<Vec<_>>(),
            |i| {
                format!(
                    "{},{},{},{},{}",
                    dom.thresholds[i],
                    dom.net_component_survival[i],
                    dom.branching_d_survival[i],
                    dom.net_kneigh_survival[i],
                    dom.branching_m_survival[i]
                )
            },
        );
        art.write("domination.csv", &body)?;
        let _ = writeln!(rep, "d_violations={}", dom.d_violations);
        let _ = writeln!(rep, "m_violations={}", dom.m_violations);
    }
    art.write("report.txt", &rep)?;
    if check {
        match &fit {
            Some(fit) if fit.exponential_tail_consistent() => {}
            _ => {
                return Err(AppError::Check(
                    "branching size tail is not consistent with an exponential decay".into(),
                ))
            }
        }
    }
    Ok(())
}

fn cmd_clt(cfg: &RunConfig, seed: u64, check: bool, art: &mut Artifacts) -> Result<(), AppError> {
    let n = require(cfg.n, "n", "clt")?;
    let reps = require(cfg.reps, "reps", "clt")?;
    let kind = require_ref(&cfg.stat_kind, "stat_kind", "clt")?;
    let report = mc_clt(&cfg.model, n, reps, kind, seed)?;
    let dim = kind.dim();
    let header: String = std::iter::once("rep".to_string())
        .chain((0..dim).map(|k| format!("c{k}")))
        .collect::<Vec<_>>()
        .join(",");
    let body = csv_rows(&header, report.moment_draws.iter().enumerate(), |(r, row)| {
        std::iter::once(r.to_string())
            .chain(row.iter().map(|v| v.to_string()))
            .collect::<Vec<_>>()
            .join(",")
    });
    art.write("draws.csv", &body)?;
    let mut qq = String::from("component,theoretical,empirical\n");
    for k in 0..dim {
        if !report.degenerate[k] {
            for (t, e) in report.qq_pairs(k) {
                let _ = writeln!(qq, "{k},{t},{e}");
            }
        }
    }
    art.write("qq.csv", &qq)?;
    let mut rep = String::new();
    for k in 0..dim {
        let _ = writeln!(rep, "degenerate_c{k}={}", report.degenerate[k]);
        let _ = writeln!(rep, "ks_c{k}={}", report.ks_stat[k]);
        let _ = writeln!(rep, "ks_pvalue_c{k}={}", report.ks_pvalue[k]);
        let _ = writeln!(rep, "variance_c{k}={}", report.variance_estimate[k][k]);
    }
    art.write("report.txt", &rep)?;
    if check {
        let max_ks = cfg.max_ks.unwrap_or(0.04);
        for k in 0..dim {
            if !report.degenerate[k] && report.ks_stat[k] >= max_ks {
                return Err(AppError::Check(format!(
                    "KS distance {} for component {k} exceeds {max_ks}",
                    report.ks_stat[k]
                )));
            }
        }
    }
    Ok(())
}

fn cmd_infer(cfg: &RunConfig, seed: u64, check: bool, art: &mut Artifacts) -> Result<(), AppError> {
    let n = require(cfg.n, "n", "infer")?;
    let groups = require(cfg.groups, "groups", "infer")?;
    let kind = require_ref(&cfg.stat_kind, "stat_kind", "infer")?;
    let mu0 = require_ref(&cfg.mu0, "mu0", "infer")?;
    let dim = kind.dim();
    if mu0.len() != dim {
        return Err(AppError::Config(format!(
            "key \"mu0\" must have {dim} components to match stat_kind, got {}",
            mu0.len()
        )));
    }
    if groups < 2 {
        return Err(AppError::Config("key \"groups\" must be at least 2".into()));
    }
    // Per-network means of the node statistic across `groups` independent
    // networks.
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(groups);
    for g in 0..groups as u64 {
        let (prims, series, _) =
            simulate(&cfg.model, n, n, false, seed ^ (g.wrapping_mul(0x517C) + 1))?;
        let stats = node_stats(&cfg.model, &prims, &series, kind)?;
        let agg = aggregate(&stats);
        means.push(agg.iter().map(|v| v / prims.n() as f64).collect());
    }
    let body = csv_rows(
        &std::iter::once("group".to_string())
            .chain((0..dim).map(|k| format!("c{k}")))
            .collect::<Vec<_>>()
            .join(","),
        means.iter().enumerate(),
        |(g, row)| {
            std::iter::once(g.to_string())
                .chain(row.iter().map(|v| v.to_string()))
                .collect::<Vec<_>>()
                .join(",")
        },
    );
    art.write("group_means.csv", &body)?;

    let tail = cfg.tail.unwrap_or(Tail::TwoSided);
    let draws = cfg.draws.unwrap_or(10_000);
    let p_rand = randomization_test(&means, mu0, draws, tail, seed ^ 0xF11F)?;
    let mut rep = String::new();
    let _ = writeln!(rep, "randomization_p={p_rand}");
    if dim == 1 {
        let scalars: Vec<f64> = means.iter().map(|row| row[0]).collect();
        let _ = writeln!(rep, "im_t_p={}", im_t_test(&scalars, mu0[0])?);
    }
    if let Some(reps) = cfg.reps {
        let decomp = poisson_variance_decomp(&cfg.model, n, reps, kind, seed ^ 0xDEC)?;
        for k in 0..dim {
            let _ = writeln!(rep, "sigma2_binomial_c{k}={}", decomp.sigma2_binomial[k]);
            let _ = writeln!(rep, "sigma2_poisson_c{k}={}", decomp.sigma2_poisson[k]);
            let _ = writeln!(rep, "alpha_c{k}={}", decomp.alpha[k]);
            let _ = writeln!(rep, "corrected_c{k}={}", decomp.corrected[k]);
            let _ = writeln!(rep, "rel_gap_c{k}={}", decomp.rel_gap[k]);
        }
    }
    art.write("report.txt", &rep)?;
    if check && p_rand <= 0.05 {
        return Err(AppError::Check(format!(
            "randomization test rejects the configured mu0 (p = {p_rand})"
        )));
    }
    Ok(())
}

fn cmd_sparsity(cfg: &RunConfig, seed: u64, check: bool, art: &mut Artifacts) -> Result<(), AppError> {
    let reps = require(cfg.reps, "reps", "sparsity")?;
    let n_grid = require_ref(&cfg.n_grid, "n_grid", "sparsity")?;
    let report = sparsity_check(&cfg.model, n_grid, reps, seed)?;
    let mut body = String::from("n,period,mean_degree\n");
    for (n, degs) in &report.per_n {
        for (t, d) in degs.iter().enumerate() {
            let _ = writeln!(body, "{n},{t},{d}");
        }
    }
    art.write("sparsity.csv", &body)?;
    let mut rep = String::new();
    let _ = writeln!(rep, "trend_slope={}", degree_trend(&report));
    if let Some(limit) = report.analytic_limit {
        let _ = writeln!(rep, "analytic_limit={limit}");
    }
    art.write("report.txt", &rep)?;
    if check {
        if let Some(limit) = report.analytic_limit {
            let tol = cfg.sparsity_tol.unwrap_or(0.10);
            for (n, degs) in &report.per_n {
                if (degs[0] - limit).abs() > tol * limit {
                    return Err(AppError::Check(format!(
                        "mean degree {} at n = {n} deviates from the limit {limit} by more than {tol}",
                        degs[0]
                    )));
                }
            }
        }
    }
    Ok(())
}

// ==== Entry point ==============================================================

fn run(cli: &Cli) -> Result<(), AppError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| AppError::Config("missing required key \"config\" (--config <file>)".into()))?;
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| AppError::Config(format!("reading {}: {e}", config_path.display())))?;
    let mut cfg: RunConfig =
        serde_json::from_str(&text).map_err(|e| AppError::Config(format!("parsing config: {e}")))?;
    cfg.model.validate().map_err(|e| AppError::Config(e.to_string()))?;
    if let Some(n) = cli.n {
        cfg.n = Some(n);
    }
    if let Some(reps) = cli.reps {
        cfg.reps = Some(reps);
    }
    if let Some(k) = cli.k {
        cfg.k = Some(k);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    let seed = cfg.seed.unwrap_or(0);

    let threads = cli.threads.unwrap_or(0); // 0 = rayon default
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| AppError::Config(format!("thread pool: {e}")))?;
    }

    // Hash the canonical re-serialized config (post-override) so the
    // manifest pins exactly what ran.
    let canonical = serde_json::to_string(&cfg)
        .map_err(|e| AppError::Runtime(format!("serializing config: {e}")))?;
    let hash = config_hash(&canonical);

    let mut art = Artifacts::new(&cli.out)?;
    let result = match cli.command {
        Command::Simulate => cmd_simulate(&cfg, seed, &mut art),
        Command::Moments => cmd_moments(&cfg, seed, &mut art),
        Command::Stabilize => cmd_stabilize(&cfg, seed, cli.check, &mut art),
        Command::Branching => cmd_branching(&cfg, seed, cli.check, &mut art),
        Command::Clt => cmd_clt(&cfg, seed, cli.check, &mut art),
        Command::Infer => cmd_infer(&cfg, seed, cli.check, &mut art),
        Command::Sparsity => cmd_sparsity(&cfg, seed, cli.check, &mut art),
    };
    // Emit the manifest even for check failures so the run stays traceable.
    match result {
        Ok(()) => art.manifest(cli.command.name(), hash, seed, rayon::current_num_threads().max(threads)),
        Err(e @ AppError::Check(_)) => {
            art.manifest(cli.command.name(), hash, seed, rayon::current_num_threads().max(threads))?;
            Err(e)
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}
