mod commands;
mod manifest;
mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use geostep_core::config::PricingConfig;
use geostep_core::gs::DEFAULT_ORDER;
use geostep_core::greeks::DEFAULT_BUMP;
use geostep_core::mc::PathConfig;
use geostep_core::Error;

use manifest::{Command, Format, RunManifest};
use report::Report;

/// Geometric step option pricing under hyper-exponential jump-diffusion.
#[derive(Debug, Parser)]
#[command(name = "geostep", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Write output here instead of stdout; the run manifest goes next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Write the run manifest to this path.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// Gaver-Stehfest order (1..=10).
    #[arg(long, global = true, default_value_t = DEFAULT_ORDER)]
    gs_order: usize,
}

#[derive(Debug, Args)]
struct Market {
    /// TOML market and contract file.
    #[arg(long)]
    config: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Price one quantity, or `all` of euro, amer, eep, eep_diffusion, eep_jump.
    #[command(allow_negative_numbers = true)]
    Price {
        #[command(flatten)]
        market: Market,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value = "euro")]
        quantity: String,
    },
    /// Reproduce a reference table (1..=5).
    Table {
        id: u8,
    },
    /// Value, delta and gamma on a spot grid.
    #[command(allow_negative_numbers = true)]
    Greeks {
        #[command(flatten)]
        market: Market,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x_lo: f64,
        #[arg(long)]
        x_hi: f64,
        #[arg(long, default_value_t = 31)]
        n: usize,
        #[arg(long, default_value = "euro")]
        quantity: String,
        /// Relative spot bump.
        #[arg(long, default_value_t = DEFAULT_BUMP)]
        bump: f64,
        /// Subtract the surface of this second config.
        #[arg(long)]
        diff_against: Option<PathBuf>,
    },
    /// Roots of `Phi(theta) = alpha` with their brackets.
    #[command(allow_negative_numbers = true)]
    Roots {
        #[command(flatten)]
        market: Market,
        #[arg(long)]
        alpha: f64,
    },
    /// Monte Carlo cross-check of the European price and of call-put duality.
    #[command(allow_negative_numbers = true)]
    Verify {
        #[command(flatten)]
        market: Market,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = PathConfig::default().n_paths)]
        paths: usize,
        #[arg(long, default_value_t = PathConfig::default().dt)]
        dt: f64,
        #[arg(long, default_value_t = PathConfig::default().seed)]
        seed: u64,
        /// Disable antithetic variates.
        #[arg(long)]
        no_antithetic: bool,
    },
    /// Re-run a saved manifest.
    Replay {
        manifest_path: PathBuf,
    },
}

fn load(path: &Path) -> Result<PricingConfig, Error> {
    PricingConfig::load(path)
}

/// Resolves config paths into a self-contained command.
fn resolve(cmd: &Cmd) -> Result<Command, Error> {
    Ok(match cmd {
        Cmd::Price { market, t, x, quantity } => Command::Price {
            config: load(&market.config)?,
            t: *t,
            x: *x,
            quantity: quantity.clone(),
        },
        Cmd::Table { id } => Command::Table { id: *id },
        Cmd::Greeks { market, t, x_lo, x_hi, n, quantity, bump, diff_against } => Command::Greeks {
            config: load(&market.config)?,
            diff_against: diff_against.as_deref().map(load).transpose()?,
            t: *t,
            x_lo: *x_lo,
            x_hi: *x_hi,
            n: *n,
            quantity: quantity.clone(),
            bump: *bump,
        },
        Cmd::Roots { market, alpha } => Command::Roots { config: load(&market.config)?, alpha: *alpha },
        Cmd::Verify { market, t, x, paths, dt, seed, no_antithetic } => Command::Verify {
            config: load(&market.config)?,
            t: *t,
            x: *x,
            paths: *paths,
            dt: *dt,
            seed: *seed,
            antithetic: !no_antithetic,
        },
        Cmd::Replay { .. } => unreachable!("replay is resolved from its manifest"),
    })
}

fn render(report: &Report, manifest: &RunManifest) -> String {
    match manifest.format {
        Format::Text => report.text(),
        Format::Json => {
            let doc = serde_json::json!({ "manifest": manifest, "result": report });
            serde_json::to_string_pretty(&doc).expect("report is serializable") + "\n"
        }
        Format::Csv => {
            let (head, rows) = report.csv();
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&head).expect("in-memory write");
            for row in rows {
                w.write_record(&row).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Config(format!("{}: {e}", path.display()))
}

fn run(cli: &Cli) -> Result<(), Error> {
    let mut manifest = match &cli.command {
        Cmd::Replay { manifest_path } => {
            let mut m = RunManifest::load(manifest_path)?;
            m.started_at = manifest::now();
            m.finished_at = None;
            m
        }
        other => RunManifest::new(resolve(other)?, cli.gs_order, cli.format),
    };
    let report = commands::execute(&manifest.command, manifest.gs_order)?;
    manifest.finished_at = Some(manifest::now());
    let text = render(&report, &manifest);
    match &cli.out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| io_error(path, e))?;
            let side = cli.manifest.clone().unwrap_or_else(|| {
                let mut p = path.clone().into_os_string();
                p.push(".manifest.json");
                PathBuf::from(p)
            });
            manifest.save(&side)?;
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| Error::Config(format!("stdout: {e}")))?;
            if let Some(path) = &cli.manifest {
                manifest.save(path)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code: u8 = if e.is_input_error() { 2 } else { 3 };
            if cli.format == Format::Json {
                let doc = serde_json::json!({
                    "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": code }
                });
                println!("{}", serde_json::to_string_pretty(&doc).expect("error is serializable"));
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(code)
        }
    }
}
