use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use cfdim_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{}", out.text);
            if let Some(path) = &cli.report_json {
                let body = serde_json::to_string_pretty(&out.json).expect("report serializes");
                let res = if path.as_os_str() == "-" {
                    writeln!(std::io::stdout(), "{body}")
                } else {
                    std::fs::write(path, body + "\n")
                };
                if let Err(e) = res {
                    eprintln!("error: writing report: {e}");
                    return ExitCode::from(1);
                }
            }
            ExitCode::from(out.status.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
