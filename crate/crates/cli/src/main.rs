mod args;
mod commands;
mod config;
mod io;

use args::{Cli, Command};
use clap::error::ErrorKind;
use clap::Parser;
use commands::Run;
use io::{CliError, Outputs};
use std::ffi::OsString;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;

fn parse_cli() -> Result<(Cli, Option<String>), CliError> {
    let mut argv: Vec<OsString> = std::env::args_os().collect();
    let path = config::take_config_path(&mut argv).map_err(CliError::Config)?;
    if let Some(p) = &path {
        let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        let pairs = config::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        config::splice(&mut argv, &pairs).map_err(CliError::Config)?;
    }
    match Cli::try_parse_from(&argv) {
        Ok(cli) => Ok((cli, path.map(|p| p.display().to_string()))),
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            std::process::exit(0);
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            let _ = e.print();
            std::process::exit(2);
        }
        Err(e) => Err(CliError::Config(e.to_string().trim_end().to_string())),
    }
}

fn config_echo(cmd: &Command) -> serde_json::Value {
    use serde_json::to_value;
    let v = match cmd {
        Command::Simulate(a) => to_value(a),
        Command::Ingest(a) => to_value(a),
        Command::Posts(a) | Command::Pairs(a) => to_value(a),
        Command::Novelty(a) => to_value(a),
        Command::Birthmatrix(a) => to_value(a),
        Command::JsdMatrix(a) | Command::JsdConsec(a) => to_value(a),
        Command::Drift(a) => to_value(a),
        Command::Usernet(a) => to_value(a),
        Command::Communities(a) => to_value(a),
        Command::NoveltyUsers(a) => to_value(a),
    };
    v.unwrap_or(serde_json::Value::Null)
}

fn out_dir(cmd: &Command) -> Option<&std::path::Path> {
    let o = match cmd {
        Command::Simulate(_) | Command::Ingest(_) => return None,
        Command::Posts(a) | Command::Pairs(a) => &a.output,
        Command::Novelty(a) => &a.common.output,
        Command::Birthmatrix(a) => &a.common.output,
        Command::JsdMatrix(a) | Command::JsdConsec(a) => &a.common.output,
        Command::Drift(a) => &a.common.output,
        Command::Usernet(a) => &a.common.output,
        Command::Communities(a) => &a.net.common.output,
        Command::NoveltyUsers(a) => &a.common.output,
    };
    Some(&o.out_dir)
}

fn dispatch(cmd: &Command, run: &Run, out: &mut Option<Outputs>) -> Result<(), CliError> {
    if let Some(dir) = out_dir(cmd) {
        *out = Some(Outputs::new(dir)?);
    }
    match cmd {
        Command::Simulate(a) => commands::simulate(run, a, out),
        Command::Ingest(a) => commands::ingest(run, a, out),
        other => {
            let o = out.as_mut().expect("analysis commands have an output directory");
            match other {
                Command::Posts(a) => commands::posts(run, a, o),
                Command::Novelty(a) => commands::novelty(run, a, o),
                Command::Pairs(a) => commands::pairs(run, a, o),
                Command::Birthmatrix(a) => commands::birthmatrix(run, a, o),
                Command::JsdMatrix(a) => commands::jsd_matrix_cmd(run, a, o),
                Command::JsdConsec(a) => commands::jsd_consec(run, a, o),
                Command::Drift(a) => commands::drift(run, a, o),
                Command::Usernet(a) => commands::usernet(run, a, o),
                Command::Communities(a) => commands::communities(run, a, o),
                Command::NoveltyUsers(a) => commands::novelty_users(run, a, o),
                Command::Simulate(_) | Command::Ingest(_) => unreachable!(),
            }
        }
    }
}

fn fail(e: &CliError) -> ExitCode {
    let record = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{record}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let (cli, config_file) = match parse_cli() {
        Ok(v) => v,
        Err(e) => return fail(&e),
    };
    let run = Run { subcommand: cli.command.name(), config_file, config: config_echo(&cli.command) };
    let mut out: Option<Outputs> = None;
    panic::set_hook(Box::new(|_| {}));
    let result = panic::catch_unwind(AssertUnwindSafe(|| dispatch(&cli.command, &run, &mut out)))
        .unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            Err(CliError::Internal(msg))
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(o) = out.as_mut() {
                o.rollback();
            }
            fail(&e)
        }
    }
}
