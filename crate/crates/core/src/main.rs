use std::path::PathBuf;
use std::process::ExitCode;

use scurve_core::scenario::{self, RunOptions};

const USAGE: &str = "\
scurve: sigmoid growth curves, prefix fitting, and forecast diagnostics

USAGE:
  scurve run <scenario-file-or-bundled-name> [--out DIR] [--seed U64] [--quiet]
  scurve list
  scurve --help

COMMANDS:
  run    Execute a scenario file (TOML-style key/value or JSON) and write
         its CSV/JSON artifacts. The argument may also name a bundled
         scenario (see `scurve list`).
  list   Print the bundled scenario catalog.

FLAGS:
  --out DIR    Write artifacts under DIR (overrides the scenario file).
  --seed U64   Override the scenario's master seed.
  --quiet      Suppress per-artifact output lines.

Scenario files name one operation (curve-eval, ode-integrate, contagion,
fit, error-surface, bayes, replicate-known-k, rolling-forecast, sensitivity,
remedies) and its parameter block; see README.md for the format.
";

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match run(args) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(args: Vec<String>) -> Result<ExitCode, String> {
    let mut it = args.into_iter();
    let Some(command) = it.next() else {
        eprintln!("{USAGE}");
        return Ok(ExitCode::from(2));
    };
    match command.as_str() {
        "--help" | "-h" | "help" => {
            println!("{USAGE}");
            Ok(ExitCode::SUCCESS)
        }
        "list" => {
            print!("{}", scenario::list_scenarios());
            Ok(ExitCode::SUCCESS)
        }
        "run" => {
            let mut target: Option<String> = None;
            let mut opts = RunOptions::default();
            while let Some(arg) = it.next() {
                match arg.as_str() {
                    "--out" => {
                        let dir = it.next().ok_or("missing value for --out")?;
                        opts.out_dir = Some(PathBuf::from(dir));
                    }
                    "--seed" => {
                        let seed = it.next().ok_or("missing value for --seed")?;
                        opts.seed =
                            Some(seed.parse::<u64>().map_err(|e| format!("bad --seed: {e}"))?);
                    }
                    "--quiet" => opts.quiet = true,
                    other if target.is_none() && !other.starts_with('-') => {
                        target = Some(other.to_string());
                    }
                    other => return Err(format!("unexpected argument `{other}`")),
                }
            }
            let target = target.ok_or("run needs a scenario file or bundled name")?;
            let written = scenario::run(&target, &opts).map_err(|e| e.to_string())?;
            if !opts.quiet {
                println!("{} artifact(s) written", written.len());
            }
            Ok(ExitCode::SUCCESS)
        }
        other => {
            eprintln!("unknown command `{other}`\n\n{USAGE}");
            Ok(ExitCode::from(2))
        }
    }
}
