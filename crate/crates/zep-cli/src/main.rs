//! `zep` command-line interface.
//!
//! Subcommands cover the full pipeline: `synth` renders fixture corpora,
//! `train` fits the frontal/lateral discriminators, `localize` finds eye
//! centers for annotated images, `eval` scores them, `encode` / `project`
//! expose the feature extraction stages and `bench` measures stage
//! timings against the naive baselines.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/pipeline error, 3 at
//! least one face produced no eye candidates.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use zep::Config;

#[derive(Parser, Debug)]
#[command(name = "zep", version, about = "Eye-center localization from encoded image projections")]
struct Cli {
    /// Configuration file (key=value lines); defaults to $ZEP_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override single configuration keys, e.g. --set patch_size=36.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Worker threads for per-face parallel stages (1 = sequential).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,

    #[command(subcommand)]
    command: Option<commands::Command>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Version/help requests are successes, everything else is a
            // usage error.
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let config = match load_config(&cli) {
        Ok(config) => config,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(1);
        }
    };

    if cli.print_config {
        print!("{}", config.dump());
        return ExitCode::SUCCESS;
    }

    let Some(command) = cli.command else {
        eprintln!("error: a subcommand is required (see --help)");
        return ExitCode::from(1);
    };

    if let Some(threads) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads.max(1))
            .build_global()
        {
            eprintln!("error: {err}");
            return ExitCode::from(1);
        }
    }

    match commands::run(command, &config) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let no_candidates = err
                .chain()
                .any(|cause| matches!(cause.downcast_ref(), Some(zep::Error::NoCandidates(_))));
            ExitCode::from(if no_candidates { 3 } else { 2 })
        }
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<Config> {
    let path = cli
        .config
        .clone()
        .or_else(|| std::env::var_os("ZEP_CONFIG").map(PathBuf::from));
    let mut config = match path {
        Some(path) => Config::load(&path)
            .map_err(|e| anyhow::anyhow!("config file {}: {e}", path.display()))?,
        None => Config::default(),
    };
    for entry in &cli.overrides {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| anyhow::anyhow!("--set expects KEY=VALUE, got {entry:?}"))?;
        config.set(key.trim(), value.trim())?;
    }
    Ok(config)
}
