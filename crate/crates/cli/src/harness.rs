use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use biblio_gateway::{AppState, GatewayConfig};
use biblio_harness::{gen_corpus, gen_walk, run_report, CorpusProfile, Floor, ReportConfig, WalkProfile};
use clap::Subcommand;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic catalog, circulation history, shelf map, beacons
    /// and gateway config into a directory.
    Gen {
        #[arg(long, default_value_t = 2016)]
        seed: u64,
        #[arg(long, default_value_t = CorpusProfile::default().records)]
        records: usize,
        /// Zipf exponent of circulation.
        #[arg(long, default_value_t = CorpusProfile::default().alpha)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Script a patron walk over a generated world. Requests split 2:1
    /// between recommendations and wayfinding.
    Walk {
        #[arg(long, default_value_t = 2017)]
        seed: u64,
        #[arg(long, default_value_t = 600)]
        requests: usize,
        /// Directory written by `harness gen`.
        #[arg(long, default_value = ".")]
        world: PathBuf,
        /// Walk JSON; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate, serve, replay and analyse end to end. Exits nonzero when
    /// any check fails.
    Report {
        /// TOML report config; defaults throughout when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config's output directory.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        parallel: Option<usize>,
    },
}

pub fn run(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Gen {
            seed,
            records,
            alpha,
            out,
        } => {
            let profile = CorpusProfile {
                records,
                alpha,
                ..CorpusProfile::default()
            };
            let files = gen_corpus(seed, &profile, &out)?;
            println!("{}", files.config.display());
        }
        Command::Walk {
            seed,
            requests,
            world,
            out,
        } => {
            let config = world.join("config.toml");
            let cfg = GatewayConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
            let (state, _) = AppState::load(&cfg)?;
            let recommend = (requests * 2).div_ceil(3);
            let profile = WalkProfile {
                recommend,
                wayfind: requests - recommend,
                ..WalkProfile::default()
            };
            let walk = gen_walk(seed, &state.map, &state.corpus, &Floor::desk(), &profile)?;
            let json = serde_json::to_string_pretty(&walk)?;
            match out {
                Some(path) => fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
                None => println!("{json}"),
            }
        }
        Command::Report { config, out, parallel } => {
            let mut cfg = match config {
                Some(path) => ReportConfig::load(path)?,
                None => ReportConfig::default(),
            };
            if let Some(out) = out {
                cfg.out = out;
            }
            if let Some(n) = parallel {
                cfg.parallel = n.max(1);
            }
            let report = run_report(&cfg)?;
            for c in &report.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("report written to {}", cfg.out.join("report.json").display());
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
