use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Command, FromArgMatches};
use geoecon_cli::commands::{execute, find, CommandSpec, COMMANDS};
use geoecon_cli::config::parse_config;
use geoecon_cli::CliError;

/// Flags shared by every subcommand. Each maps onto a config key and
/// overrides the config file.
#[derive(Args, Debug)]
struct Common {
    /// Config file of `key = value` lines
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (key `out`)
    #[arg(long, value_name = "DIR")]
    out: Option<String>,
    /// Half range Δ of the wealth spectrum (key `delta`)
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<String>,
    /// Comma-separated evaluation times in periods π/Δ (key `times`)
    #[arg(long, allow_hyphen_values = true)]
    time: Option<String>,
    /// Grid spacing (key `grid_step`)
    #[arg(long = "grid-step", allow_hyphen_values = true)]
    grid_step: Option<String>,
    /// Shading threshold on A (key `threshold`)
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<String>,
    /// Trajectory source: paper or exact (key `source`)
    #[arg(long)]
    source: Option<String>,
    /// Penalty factor q (key `penalty`)
    #[arg(long, allow_hyphen_values = true)]
    penalty: Option<String>,
    /// Worker threads for grid evaluation (key `workers`)
    #[arg(long)]
    workers: Option<String>,
    /// Random seed (key `seed`)
    #[arg(long)]
    seed: Option<String>,
    /// Set any config key, e.g. `--set metric.kind=rate`; repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn overrides(&self) -> Result<Vec<(String, String)>, CliError> {
        let mut out = Vec::new();
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
            out.push((k.trim().to_string(), v.trim().to_string()));
        }
        let flags = [
            ("out", &self.out),
            ("delta", &self.delta),
            ("times", &self.time),
            ("grid_step", &self.grid_step),
            ("threshold", &self.threshold),
            ("source", &self.source),
            ("penalty", &self.penalty),
            ("workers", &self.workers),
            ("seed", &self.seed),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                out.push((k.to_string(), v.clone()));
            }
        }
        Ok(out)
    }
}

fn keys_help(spec: &CommandSpec) -> String {
    let mut s = String::from("Config keys:\n");
    for k in spec.schema {
        let default = match k.default {
            Some("") => "(empty)".to_string(),
            Some(d) => d.to_string(),
            None => "(required)".to_string(),
        };
        let _ = writeln!(s, "  {:<18} {:<24} {}", k.name, default, k.help);
    }
    s.push_str("\nExit codes: 0 success, 2 config error, 3 numeric-domain error, 4 I/O error.");
    s
}

fn cli() -> Command {
    let mut cmd = Command::new("geoecon")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Information geometry of a two-level economy as a quantum circuit")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for spec in COMMANDS {
        let sub = Common::augment_args(Command::new(spec.name).about(spec.about)).after_help(keys_help(spec));
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn run() -> Result<String, CliError> {
    let matches = cli().get_matches();
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let spec = find(name).expect("registered subcommand");
    let common = Common::from_arg_matches(sub).map_err(|e| CliError::Config(e.to_string()))?;
    let text = match &common.config {
        Some(p) => fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        })?,
        None => String::new(),
    };
    let cfg = parse_config(spec.name, spec.schema, &text, &common.overrides()?)?;
    execute(spec, &cfg)
}

fn main() -> ExitCode {
    match run() {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
