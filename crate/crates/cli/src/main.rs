mod args;
mod commands;
mod failure;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use failure::{usage, Classify, CliResult, EXIT_USAGE};

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .usage_err("configuring worker pool")?;
    }
    match &cli.command {
        Command::Gen(a) => commands::cmd_gen(a),
        Command::Decode(a) => commands::cmd_decode(a),
        Command::Eval(a) => commands::cmd_eval(a),
        Command::Bench(a) => commands::cmd_bench(a),
        Command::Glyphs(a) => commands::cmd_glyphs(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            log::error!("{f}");
            ExitCode::from(f.code)
        }
    }
}
