mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::Cli;

/// Failure with the exit status it maps to.
pub struct Failure {
    pub code: u8,
    pub kind: String,
    pub message: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Self { code: 2, kind: "usage".into(), message: msg.into() }
    }

    pub fn numerical(kind: &str, msg: impl Into<String>) -> Self {
        Self { code: 1, kind: kind.into(), message: msg.into() }
    }
}

impl From<tempoly::Error> for Failure {
    fn from(e: tempoly::Error) -> Self {
        let code = match e {
            tempoly::Error::Invalid(_)
            | tempoly::Error::Parse { .. }
            | tempoly::Error::Io(_)
            | tempoly::Error::Json(_)
            | tempoly::Error::InvalidPermutation(_) => 2,
            _ => 1,
        };
        Self { code, kind: e.kind().into(), message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: 2, kind: "io".into(), message: e.to_string() }
    }
}

fn report_failure(f: &Failure, argv: &[String]) -> ExitCode {
    let doc = json!({
        "error": { "kind": f.kind, "message": f.message },
        "exit_code": f.code,
        "version": tempoly::VERSION,
        "command": argv.get(1..).unwrap_or_default(),
    });
    eprintln!("{}", serde_json::to_string_pretty(&doc).expect("error JSON"));
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let expanded = match config::expand_config(&argv) {
        Ok(a) => a,
        Err(f) => return report_failure(&f, &argv),
    };
    let cli = match Cli::try_parse_from(&expanded) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return report_failure(&Failure::usage(e.to_string().trim().to_string()), &argv);
        }
    };
    if let Some(j) = cli.global.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global() {
            return report_failure(&Failure::usage(e.to_string()), &argv);
        }
    }
    match commands::dispatch(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => report_failure(&f, &argv),
    }
}
