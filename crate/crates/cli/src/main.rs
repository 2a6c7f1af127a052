use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use numeraire_cli::{load_config, run, CliError, Command, OUT_DIR_ENV};

/// Open numeraire market simulator.
///
/// Config keys may be given in a flat key=value file (--config) and
/// overridden per run with --key=value flags, e.g. `--N=55 --n=50`.
#[derive(Parser, Debug)]
#[command(name = "numeraire", version)]
struct Args {
    /// simulate | verify | report | chart
    command: Command,

    /// key=value config file
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Config overrides, `--key=value`
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY=VALUE")]
    overrides: Vec<String>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let cfg = load_config(
        args.config.as_deref(),
        std::env::var(OUT_DIR_ENV).ok(),
        &args.overrides,
    )?;
    let outcome = run(args.command, &cfg)?;
    print!("{}", outcome.text);
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let CliError::Verify { report, .. } = &e {
                print!("{report}");
            }
            eprintln!("{}", e.machine_line());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
