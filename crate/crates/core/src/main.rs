use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use doublecoset::harness::report::csv_writer;
use doublecoset::harness::{list_catalog, run_scenario, ship_suite, Report, RunOptions, ScenarioConfig};
use doublecoset::Error;

#[derive(Parser)]
#[command(name = "doublecoset", about = "Verify rho-functions and quasi-invariant measures on double coset spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of one scenario file, or of the shipped suite with --all.
    Verify {
        /// Scenario configuration file.
        #[arg(required_unless_present = "all", conflicts_with = "all")]
        config: Option<PathBuf>,
        #[arg(long)]
        all: bool,
        /// Override the seed of every scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the quadrature resolution of charted scenarios.
        #[arg(long)]
        resolution: Option<usize>,
        /// Write a JSON report (an array of scenario reports).
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write per-check CSV rows.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Run the checks of each scenario concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// List groups, subgroups and scenarios.
    Catalog,
}

fn io(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

fn verify(
    config: Option<PathBuf>,
    seed: Option<u64>,
    resolution: Option<usize>,
    report: Option<PathBuf>,
    csv: Option<PathBuf>,
    parallel: bool,
) -> Result<bool, Error> {
    let mut cfgs = match config {
        Some(p) => {
            let text = std::fs::read_to_string(&p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
            vec![ScenarioConfig::parse(&text)?]
        }
        None => ship_suite()?,
    };
    for c in cfgs.iter_mut() {
        if let Some(s) = seed {
            *c = c.clone().with_seed(s);
        }
        if let Some(r) = resolution {
            *c = c.clone().with_resolution(r)?;
        }
    }
    let opts = RunOptions { parallel };
    let mut reports: Vec<Report> = Vec::new();
    for c in &cfgs {
        let r = run_scenario(c, &opts)?;
        print!("{}", r.render());
        println!();
        reports.push(r);
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.scenario.as_str()).collect();
    println!(
        "overall {} scenarios, {} failed{}",
        reports.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(": {}", failed.join(", ")) }
    );
    if let Some(p) = report {
        let parts: Vec<String> = reports.iter().map(|r| r.to_json()).collect::<Result<_, _>>()?;
        std::fs::write(&p, format!("[\n{}\n]\n", parts.join(",\n"))).map_err(io)?;
    }
    if let Some(p) = csv {
        let mut w = csv_writer(File::create(&p).map_err(io)?)?;
        for r in &reports {
            r.write_csv(&mut w)?;
        }
        w.flush().map_err(io)?;
    }
    Ok(failed.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify { config, all: _, seed, resolution, report, csv, parallel } => {
            verify(config, seed, resolution, report, csv, parallel)
        }
        Command::Catalog => list_catalog().map(|text| {
            print!("{text}");
            true
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ Error::Config(_)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
