use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fracp::run::{run, Command, Payload};
use fracp::{Error, RunConfig};
use log::{error, info};

/// Fractional p-Laplacian runs driven by a TOML config.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    /// operator, energy, solve, pohozaev, ibp-check, limit-study or selftest
    command: String,
    /// Run configuration; every block falls back to its defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for report.json, record.json and profiles.
    #[arg(long, default_value = "fracp-out")]
    out: PathBuf,
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let command: Command = cli.command.parse()?;
    let cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Ok(n) = std::env::var("FRACP_THREADS") {
        let threads: usize = n
            .parse()
            .map_err(|_| Error::Config { path: "FRACP_THREADS".into(), message: format!("`{n}` is not a thread count") })?;
        // a pool already exists only if this is called twice
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    info!("running {command} into {}", cli.out.display());
    let record = run(command, &cfg, &cli.out)?;
    let ok = match &record.payload {
        Payload::Selftest(st) => {
            for c in &st.checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            st.passed
        }
        _ => true,
    };
    println!("{}", serde_json::to_string_pretty(&record.payload).expect("payload serializes"));
    Ok(ok)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
