mod args;
mod error;
mod settings;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qka_core::analysis::{efficiency, run_experiment, write_csv, Convention, EfficiencyReport};
use qka_core::protocol::{run_protocol, ProtocolParams};

use crate::args::{Cli, Command};
use crate::error::CliError;
use crate::settings::{Format, Settings, SEED_ENV};

fn settings(cli: &Cli) -> Result<Settings, CliError> {
    let mut s = match &cli.config {
        Some(path) => Settings::from_file(path)?,
        None => Settings::default(),
    };
    for (key, value) in cli.overrides() {
        s.set(key, value).map_err(|message| CliError::Flag { flag: key.replace('_', "-"), message })?;
    }
    s.seed_from_env(std::env::var(SEED_ENV).ok())?;
    Ok(s)
}

fn json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value)
        .map_err(|e| CliError::Simulation(qka_core::QkaError::Internal(e.to_string())))?;
    out.push(b'\n');
    Ok(out)
}

#[derive(serde::Serialize)]
struct EfficiencyOutput {
    params: ProtocolParams,
    paper: EfficiencyReport,
    exact: EfficiencyReport,
}

fn unsupported(command: &str, format: Format) -> CliError {
    CliError::Flag {
        flag: "format".into(),
        message: format!("{command} does not support {format} output"),
    }
}

fn execute(cli: &Cli, s: &Settings) -> Result<Vec<u8>, CliError> {
    match cli.command {
        Command::Run => {
            let format = s.format.unwrap_or(Format::Json);
            if format != Format::Json {
                return Err(unsupported("run", format));
            }
            let params = s.params()?;
            let attack = s.attack()?;
            let record = run_protocol(&params, attack.as_ref()).map_err(CliError::Simulation)?;
            json(&record)
        }
        Command::Sweep => {
            let plan = s.plan()?;
            let result = run_experiment(&plan, s.workers.unwrap_or(0)).map_err(CliError::Simulation)?;
            match s.format.unwrap_or(Format::Csv) {
                Format::Json => json(&result),
                Format::Csv => {
                    let mut out = Vec::new();
                    write_csv(&result, &mut out).map_err(CliError::Simulation)?;
                    Ok(out)
                }
            }
        }
        Command::Efficiency => {
            let params = s.params()?;
            let paper = efficiency(&params, Convention::Paper);
            let exact = efficiency(&params, Convention::Exact);
            match s.format.unwrap_or(Format::Json) {
                Format::Json => json(&EfficiencyOutput { params, paper, exact }),
                Format::Csv => {
                    let mut out = String::from("convention,c,q,b,eta\n");
                    for (name, r) in [("paper", &paper), ("exact", &exact)] {
                        let c = *r.c.numer() as f64 / *r.c.denom() as f64;
                        out += &format!("{name},{c},{},{},{}\n", r.q, r.b, r.eta_f64());
                    }
                    Ok(out.into_bytes())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = settings(&cli).and_then(|s| {
        let bytes = execute(&cli, &s)?;
        match s.out {
            Some(path) => std::fs::write(&path, bytes).map_err(|e| CliError::Io {
                path: path.display().to_string(),
                source: e,
            }),
            None => std::io::stdout().write_all(&bytes).map_err(|e| CliError::Io {
                path: "<stdout>".into(),
                source: e,
            }),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qka: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
