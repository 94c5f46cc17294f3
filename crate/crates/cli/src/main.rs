//! `sumprod`: instance generators and verification suites.
//!
//! Exit codes: 0 all assertions hold, 2 an assertion failed, 3 a budget was
//! exceeded, 4 usage error.

mod args;
mod suites;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use sumprod::generate::{ggp, parse_range, primes_set, random_subset};
use sumprod::Budget;

use args::{Cli, Command, Format, GenArgs, GenKind, RunArgs};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Budget(String),
    Internal(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Internal(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Usage(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Budget(m) | CliError::Internal(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(4),
            };
        }
    };
    let result = match &cli.command {
        Command::Gen(g) => gen(g).map(|()| true),
        Command::Run(r) => run(r),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("sumprod: {}", e.message());
            if matches!(e, CliError::Budget(_)) {
                eprintln!("hint: raise --max-tuples / --max-samples or shrink the instance");
            }
            ExitCode::from(e.code())
        }
    }
}

fn gen(args: &GenArgs) -> Result<(), CliError> {
    let set = match &args.kind {
        GenKind::Ggp { primes, boxes } => {
            let boxes = boxes.iter().map(|b| parse_range(b)).collect::<Result<Vec<_>, _>>()?;
            ggp(primes, &boxes)?
        }
        GenKind::Primes { count } => primes_set(*count),
        GenKind::RandomSubset { from, size, seed } => random_subset(&suites::load_set(from)?, *size, *seed)?,
    };
    let text = set.to_set_file();
    match &args.output {
        Some(path) => write_file(path, &text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Usage(format!("stdout: {e}"))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

fn run(args: &RunArgs) -> Result<bool, CliError> {
    let c = &args.common;
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // already initialised only when embedded; the first setting wins
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    if c.max_tuples == 0 || c.max_samples == 0 {
        return Err(CliError::Usage("budget caps must be positive".into()));
    }
    let budget = Budget {
        max_tuples: c.max_tuples,
        max_samples: c.max_samples,
    };
    let out = suites::run(&args.suite, &budget, c.seed)?;

    fs::create_dir_all(&c.out_dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", c.out_dir.display())))?;
    let (file, body) = match c.format {
        Format::Json => (format!("{}.json", out.name), pretty(&out.json)),
        Format::Csv => (format!("{}.csv", out.name), out.csv.clone()),
    };
    write_file(&c.out_dir.join(&file), &body)?;
    for (name, body) in &out.extra_files {
        write_file(&c.out_dir.join(name), body)?;
    }
    if let Some(ce) = &out.counterexample {
        write_file(&c.out_dir.join(format!("{}-counterexample.json", out.name)), &pretty(ce))?;
    }
    print!("{}", out.summary);
    println!("{}: {} (report {})", out.name, if out.pass { "pass" } else { "FAIL" }, c.out_dir.join(file).display());
    Ok(out.pass)
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}
