mod harness;
mod sources;
mod telemetry;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use biblio_gateway::{AppState, Gateway, GatewayConfig, LogSink};
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "biblio", version, about = "Library wayfinding gateway and log analytics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the wayfinder and recommendation gateway.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Transaction log (JSON Lines). Without it nothing is logged.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Analyse transaction logs.
    #[command(subcommand)]
    Telemetry(telemetry::Command),
    /// Generate synthetic worlds and walks, or run the end-to-end report.
    #[command(subcommand)]
    Harness(harness::Command),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve { config, port, host, log } => serve(config, &host, port, log).map(|()| ExitCode::SUCCESS),
        Command::Telemetry(cmd) => telemetry::run(cmd).map(|()| ExitCode::SUCCESS),
        Command::Harness(cmd) => harness::run(cmd),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn serve(config: PathBuf, host: &str, port: u16, log: Option<PathBuf>) -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();

    let cfg = GatewayConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    let (state, diagnostics) = AppState::load(&cfg)?;
    for d in &diagnostics {
        tracing::warn!("{d}");
    }
    let sink = match &log {
        Some(path) => LogSink::open(path).with_context(|| format!("opening log {}", path.display()))?,
        None => LogSink::disabled(),
    };
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .with_context(|| format!("invalid address {host}:{port}"))?;
    let gateway = Arc::new(Gateway { state, sink });

    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    runtime.block_on(biblio_gateway::serve_until(gateway, addr, async {
        let _ = tokio::signal::ctrl_c().await;
    }))?;
    Ok(())
}
