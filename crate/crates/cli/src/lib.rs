//! Configuration-driven experiments: parse a config, run one pipeline, write CSVs and a
//! JSON manifest.

pub mod config;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{parse_config, parse_config_str, ConfigError, ExperimentConfig, Issue, Kind};
pub use output::{CheckResult, RunManifest, Status};

pub const DEFAULT_OUT_DIR: &str = "conslaw-out";

/// Command-line settings; flags override the `[run]` section of the config.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub kind: Kind,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// Runs one experiment and writes its manifest, also when a stage fails. Returns the
/// manifest and the directory it was written to.
pub fn execute(inv: &Invocation) -> (RunManifest, PathBuf) {
    let start = Instant::now();
    let text = std::fs::read_to_string(&inv.config);
    let parsed = match &text {
        Ok(t) => parse_config_str(t, Some(inv.kind)),
        Err(_) => parse_config(&inv.config, Some(inv.kind)),
    };
    let source = text.unwrap_or_default();
    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        kind: inv.kind.name().to_string(),
        config_path: inv.config.display().to_string(),
        config_sha256: config::config_hash(&source),
        config: source,
        seed: inv.seed.unwrap_or(config::DEFAULT_SEED),
        threads: inv.threads,
        estimated_cost: None,
        cost_ceiling: None,
        wall_time_s: 0.0,
        status: Status::Error,
        failed_stage: None,
        errors: Vec::new(),
        checks: Vec::new(),
        outputs: Vec::new(),
    };
    let cfg = match parsed {
        Ok(c) => c,
        Err(e) => {
            manifest.failed_stage = Some("parse_config".into());
            manifest.errors = e.issues.iter().map(|i| i.to_string()).collect();
            let dir = inv.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
            manifest.wall_time_s = start.elapsed().as_secs_f64();
            return (manifest, dir);
        }
    };
    let dir = inv.out.clone().or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    manifest.seed = inv.seed.or(cfg.seed).unwrap_or(config::DEFAULT_SEED);
    manifest.threads = inv.threads.or(cfg.threads);
    manifest.estimated_cost = Some(cfg.estimated_cost);
    manifest.cost_ceiling = Some(cfg.cost_ceiling);

    let outcome = run_in_pool(&cfg, manifest.seed, manifest.threads, &dir, &mut manifest.checks);
    match outcome {
        Ok(outputs) => {
            manifest.outputs = outputs;
            manifest.status =
                if manifest.checks.iter().all(|c| c.pass) { Status::Passed } else { Status::ChecksFailed };
        }
        Err((stage, message, outputs)) => {
            manifest.outputs = outputs;
            manifest.failed_stage = Some(stage.into());
            manifest.errors.push(message);
        }
    }
    manifest.wall_time_s = start.elapsed().as_secs_f64();
    (manifest, dir)
}

type StageError = (&'static str, String, Vec<String>);

fn run_in_pool(
    cfg: &ExperimentConfig,
    seed: u64,
    threads: Option<usize>,
    dir: &Path,
    checks: &mut Vec<CheckResult>,
) -> Result<Vec<String>, StageError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| ("setup", e.to_string(), Vec::new()))?;
    let mut sink =
        output::CsvSink::new(dir, cfg.kind.name(), &cfg.hash).map_err(|e| ("write", e.to_string(), Vec::new()))?;
    let result = pool.install(|| experiments::run(cfg, seed, &mut sink, checks));
    let outputs = sink.written().to_vec();
    match result {
        Ok(()) => Ok(outputs),
        Err(f) => Err((f.stage(), f.message().to_string(), outputs)),
    }
}
