mod commands;
mod config;
mod error;
mod svg;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::{Outcome, TIE_BREAK};
use config::{ExperimentConfig, Overrides, SCHEMA_VERSION};
use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "shyp", version, about = "Expansion data, codes and conjugacies for group actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment config; defaults apply to every missing field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for the report, tables and plots.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Overrides the net seed and the jitter seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Code depth.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Cap on enumerated codes per point.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Stopping diameter for the conjugacy.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// List the zoo systems and perturbation families.
    ZooList,
    VerifyExpansion,
    Codes,
    CertifyShyp,
    CodingMap,
    Stability,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::ZooList => "zoo-list",
            Command::VerifyExpansion => "verify-expansion",
            Command::Codes => "codes",
            Command::CertifyShyp => "certify-shyp",
            Command::CodingMap => "coding-map",
            Command::Stability => "stability",
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let cfg = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Io { path: p.display().to_string(), source: e })?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    cfg.resolve(&Overrides { out: cli.out.clone(), seed: cli.seed, depth: cli.depth, cap: cli.cap, tol: cli.tol })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}

fn emit(cmd: Command, cfg: &ExperimentConfig, o: &Outcome) -> Result<bool, CliError> {
    let dir = Path::new(&cfg.out);
    fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), source: e })?;
    let passed = o.checks.iter().all(|c| c.passed);
    let report = json!({
        "schema_version": SCHEMA_VERSION,
        "command": cmd.name(),
        "passed": passed,
        "tie_break": TIE_BREAK,
        "config": cfg,
        "checks": o.checks,
        "results": o.results,
    });
    let stem = cmd.name().replace('-', "_");
    write(&dir.join(format!("{stem}.json")), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    for t in &o.tables {
        let path = dir.join(format!("{stem}_{}.csv", t.name));
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(&t.header)?;
        for r in &t.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
    }
    if let Some(svg) = &o.svg {
        write(&dir.join(format!("{stem}.svg")), svg)?;
    }
    for c in &o.checks {
        let mark = if c.passed { "ok  " } else { "FAIL" };
        println!("{mark} {:<28} slack {:>12.4e}  samples {}", c.name, c.slack, c.samples);
        if let (false, Some(w)) = (c.passed, &c.witness) {
            println!("     witness: {w}");
        }
    }
    println!("report: {}", dir.join(format!("{stem}.json")).display());
    Ok(passed)
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let cfg = load(cli)?;
    let outcome = match cli.command {
        Command::ZooList => {
            let o = commands::zoo_list();
            println!("{}", serde_json::to_string_pretty(&o.results)?);
            o
        }
        Command::VerifyExpansion => commands::verify(&cfg)?,
        Command::Codes => commands::codes(&cfg)?,
        Command::CertifyShyp => commands::certify(&cfg)?,
        Command::CodingMap => commands::coding(&cfg)?,
        Command::Stability => commands::stability(&cfg)?,
    };
    emit(cli.command, &cfg, &outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
