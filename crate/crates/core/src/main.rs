use std::process::ExitCode;

use clap::Parser;
use hardy_bounds::cli::{render, run, Cli, RunConfig};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = RunConfig::from_cli(&cli).and_then(|cfg| run(&cfg).map(|r| (cfg, r)));
    let (cfg, report) = match outcome {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    for w in &report.warnings {
        eprintln!("{w}");
    }
    let text = render(&report, cfg.output_format);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if report.summary.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
