//! `darboux` command-line front end.
//!
//! Exit status: 0 when every checked quantity is within tolerance, 1 when a
//! tolerance is exceeded, 2 on usage or configuration errors (nothing is
//! written), 3 when a solver fails (a diagnostic report is written).

mod config;
mod report;
mod run;

use std::process::ExitCode;

use clap::Parser;

use config::Cli;
use report::Artifacts;

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("DARBOUX_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("DARBOUX_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("DARBOUX_THREADS must be a positive integer".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let opts = match cli.opts.resolve() {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let dir = opts.out.clone().unwrap_or_else(|| ".".into());
    let prefix = opts.prefix.clone().unwrap_or_else(|| cli.command.name().to_string());
    let outcome = match run::run(cli.command, opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {}", e.0);
            return ExitCode::from(2);
        }
    };
    match outcome {
        Ok(o) => {
            print!("{}", o.report.render());
            if let Err(e) = o.artifacts.write() {
                eprintln!("error: writing artifacts: {e}");
                return ExitCode::from(3);
            }
            ExitCode::from(if o.pass { 0 } else { 1 })
        }
        Err(r) => {
            let text = r.render();
            eprint!("{text}");
            let mut a = Artifacts::default();
            a.add(&dir, format!("{prefix}_report.txt"), text);
            if let Err(e) = a.write() {
                eprintln!("error: writing report: {e}");
            }
            ExitCode::from(3)
        }
    }
}
