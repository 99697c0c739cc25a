//! The `cfskew` command line, exposed as a library so it can be driven
//! in-process by tests.

mod args;
mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{CommandFactory, FromArgMatches};
use thiserror::Error;

pub use args::{Cli, Command, Format, Formula, Target};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(#[from] clap::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Config { path: PathBuf, message: String },
    #[error("{0}")]
    Compute(#[from] cfskew_core::Error),
    #[error("{0}")]
    Precondition(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => e.exit_code(),
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

fn command() -> clap::Command {
    Cli::command().mut_subcommands(|s| s.args_override_self(true))
}

/// Splices the keys of a `--config` file in right after the subcommand, so
/// anything given on the command line (parsed later) overrides them.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let mut path = None;
    for (k, a) in args.iter().enumerate().skip(2) {
        let Some(a) = a.to_str() else { continue };
        if a == "--config" {
            path = args.get(k + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else { return Ok(args) };

    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let bad = |message: String| CliError::Config {
        path: path.clone(),
        message,
    };
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let object = value
        .as_object()
        .ok_or_else(|| bad("expected a JSON object of flag names".into()))?;

    let mut injected = Vec::new();
    for (key, v) in object {
        if key == "config" {
            continue;
        }
        let flag = format!("--{key}");
        match v {
            serde_json::Value::Null | serde_json::Value::Bool(false) => {}
            serde_json::Value::Bool(true) => injected.push(flag),
            serde_json::Value::String(s) => injected.extend([flag, s.clone()]),
            serde_json::Value::Number(n) => injected.extend([flag, n.to_string()]),
            serde_json::Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|x| match x {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                injected.extend([flag, parts.join(",")]);
            }
            serde_json::Value::Object(_) => {
                return Err(bad(format!("key '{key}' must not be an object")))
            }
        }
    }
    let mut out = args;
    let at = out.len().min(2);
    out.splice(at..at, injected.into_iter().map(OsString::from));
    Ok(out)
}

/// Parses `args` (program name first) and runs one subcommand, writing
/// summaries to `stdout`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = expand_config(args)?;
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{}", e.render());
                return Ok(());
            }
            return Err(e.into());
        }
    };
    let cli = Cli::from_arg_matches(&matches)?;

    match cli.command.common().threads {
        Some(0) => Err(CliError::Precondition("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Precondition(format!("thread pool: {e}")))?;
            // Summaries are buffered because the caller's stream need not be `Send`.
            let mut buf = Vec::new();
            let result = pool.install(|| commands::dispatch(&cli.command, &mut buf));
            stdout
                .write_all(&buf)
                .map_err(|e| CliError::io("<stdout>", e))?;
            result
        }
        None => commands::dispatch(&cli.command, stdout),
    }
}

/// Runs with the process arguments and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut stdout = std::io::stdout().lock();
    match run(args, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Usage(u) => eprint!("{}", u.render()),
                other => eprintln!("cfskew: error: {other}"),
            }
            e.exit_code()
        }
    }
}
