use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ctf_service::config::Config;

#[derive(Debug, Parser)]
#[command(name = "ctf-server", version, about = "Serve challenge packs over HTTP")]
struct Args {
    /// Path to the TOML config file.
    #[arg(long, short)]
    config: PathBuf,
    /// Override the configured port.
    #[arg(long)]
    port: Option<u16>,
}

#[tokio::main]
async fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match Config::from_file(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("ERROR {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Some(port) = args.port {
        config.port = port;
    }
    match ctf_service::serve(config).await {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ERROR {e}");
            ExitCode::FAILURE
        }
    }
}
