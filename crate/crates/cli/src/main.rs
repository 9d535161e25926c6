//! `burgers-lab`: run configured experiments and list what they test.

mod catalog;
mod config;
mod experiments;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::{Map, Value};

use crate::config::{ConfigError, Prepared, SCHEMA_VERSION};
use crate::output::{Artifacts, Failure};

/// Environment variable consulted when neither `--out` nor the config names an output directory.
const OUT_ENV: &str = "BURGERS_LAB_OUT";

#[derive(Parser)]
#[command(name = "burgers-lab", version, about = "Numerical experiments for the viscous Burgers equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML or JSON config.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and $BURGERS_LAB_OUT).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Comma-separated seeds, replacing the config's seed list.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        /// Worker threads for seed- and case-parallel work.
        #[arg(long)]
        threads: Option<usize>,
        /// Embed a generation timestamp in the SVG plots.
        #[arg(long)]
        stamp: bool,
    },
    /// Print the experiment catalog.
    List,
}

fn resolve_out(flag: Option<PathBuf>, prepared: &Prepared) -> PathBuf {
    flag.or_else(|| prepared.config.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn ensure_writable(dir: &Path) -> Result<(), ConfigError> {
    std::fs::create_dir_all(dir).map_err(|e| ConfigError(format!("cannot create output directory {}: {e}", dir.display())))?;
    let probe = dir.join(".burgers-lab-write-test");
    std::fs::write(&probe, b"").map_err(|e| ConfigError(format!("output directory {} is not writable: {e}", dir.display())))?;
    let _ = std::fs::remove_file(probe);
    Ok(())
}

fn header(prepared: &Prepared) -> Map<String, Value> {
    let mut config = prepared.config.clone();
    config.seeds = prepared.seeds.clone();
    let mut m = Map::new();
    m.insert("schema_version".into(), SCHEMA_VERSION.into());
    m.insert("experiment".into(), prepared.config.experiment.name().into());
    m.insert("config".into(), serde_json::to_value(&config).expect("config serializes"));
    m
}

fn run(config: &Path, out: Option<PathBuf>, seeds: Option<Vec<u64>>, threads: Option<usize>, stamp: bool) -> ExitCode {
    if let Some(n) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("config error: cannot start {n} worker threads: {e}");
            return ExitCode::from(2);
        }
    }
    let prepared = match config::load(config).and_then(|c| config::prepare(c, seeds)) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = resolve_out(out, &prepared);
    if let Err(e) = ensure_writable(&dir) {
        eprintln!("config error: {e}");
        return ExitCode::from(2);
    }
    let stamp = stamp.then(|| {
        let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        format!("at unix time {secs}")
    });

    let kind = prepared.config.experiment;
    let art = match experiments::run(&prepared) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("{kind}: run aborted: {e}");
            let mut art = Artifacts::default();
            art.failures.push(Failure {
                check: "run".into(),
                case: kind.name().into(),
                value: None,
                limit: None,
                message: e.to_string(),
            });
            art
        }
    };
    if let Err(e) = output::write_all(&dir, header(&prepared), &art, stamp.as_deref()) {
        eprintln!("cannot write results: {e}");
        return ExitCode::from(1);
    }
    for line in &art.summary {
        println!("{line}");
    }
    for f in &art.failures {
        println!("FAIL {} [{}]: {}", f.check, f.case, f.message);
    }
    println!(
        "{kind}: {} ({} failed check(s)); results in {}",
        if art.passed() { "passed" } else { "FAILED" },
        art.failures.len(),
        dir.display()
    );
    if art.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", catalog::render());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            out,
            seeds,
            threads,
            stamp,
        } => run(&config, out, seeds, threads, stamp),
    }
}
