use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use starcomp::cli::{self, parse_config_with_preset, OutputFormat, Preset, RunConfig};
use starcomp::Error;

/// Monte-Carlo rates of a STAR-RIS assisted two-cell NOMA downlink.
#[derive(Debug, Parser)]
#[command(name = "starcomp", version)]
struct Args {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// table2, fig2, fig3 or fig4.
    #[arg(long)]
    preset: Option<Preset>,
    /// Comma-separated list of ssecb, seb-ccu, seb-ceu, scb, none.
    #[arg(long)]
    design: Option<String>,
    /// Element counts, `27,54` or `start:stop:step`.
    #[arg(long)]
    elements: Option<String>,
    /// Transmit powers in dBm, `start:stop:step` or a list.
    #[arg(long = "power-dbm", allow_hyphen_values = true)]
    power_dbm: Option<String>,
    #[arg(long)]
    drops: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
}

fn flag_error(key: &str, message: String) -> Error {
    Error::Config {
        line: 0,
        key: format!("--{key}"),
        message,
    }
}

fn resolve(args: Args) -> Result<RunConfig, Error> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| flag_error("config", format!("{}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut cfg = parse_config_with_preset(&text, args.preset)?;
    if let Some(d) = args.design {
        cfg.designs = cli::parse_design_list(&d).map_err(|e| flag_error("design", e))?;
    }
    if let Some(l) = args.elements {
        cfg.elements = cli::parse_usize_list(&l).map_err(|e| flag_error("elements", e))?;
    }
    if let Some(p) = args.power_dbm {
        cfg.power_dbm = cli::parse_f64_list(&p).map_err(|e| flag_error("power-dbm", e))?;
    }
    if let Some(n) = args.drops {
        cfg.drops = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if args.out.is_some() {
        cfg.out = args.out;
    }
    if let Some(f) = args.format {
        cfg.format = f;
    }
    // flags bypass the text parser, so re-run its checks on the merged config
    parse_config_with_preset(&cfg.to_config_text(), None)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let code = match resolve(args) {
        Ok(cfg) => cli::run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
