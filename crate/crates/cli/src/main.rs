//! `schelling`: generate, validate and solve Schelling game instances.

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use schelling_cli::{commands, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    // a closed pipe downstream is not our failure
    let mut stdout = std::io::stdout().lock();
    match commands::run(&cli) {
        Ok(report) => {
            if cli.json {
                let mut json = report.json;
                json["exit"] = serde_json::json!(report.code);
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&json).expect("reports serialize"));
            } else {
                for line in &report.lines {
                    if writeln!(stdout, "{line}").is_err() {
                        break;
                    }
                }
            }
            ExitCode::from(report.code)
        }
        Err(err) => {
            if cli.json {
                let error = serde_json::json!({ "error": format!("{err:#}"), "exit": commands::INVALID });
                let _ = writeln!(stdout, "{error}");
            }
            eprintln!("error: {err:#}");
            ExitCode::from(commands::INVALID)
        }
    }
}
