//! `rachsim` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rachsim::engine::{populate, run_with, RunOptions};
use rachsim::io::{cdf_csv, kpi_csv_header, kpi_csv_row, kpi_table, layout_csv, trace_csv, CDF_HEADER};
use rachsim::kpi::{delay_cdf, KpiSummary};
use rachsim::replicate::summarize_seeds;
use rachsim::scenario::{apply_overrides, Scenario};
use rachsim::validation;

mod sweep;

use sweep::SweepPlan;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("cannot read scenario file `{path}`: {source}")]
    ReadScenario { path: PathBuf, source: std::io::Error },
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("scenario error: {0}")]
    Scenario(#[from] rachsim::Error),
    #[error("invalid sweep grammar: {0}")]
    Sweep(String),
    #[error("invalid --set `{0}`: expected key=value")]
    Override(String),
    #[error("no output directory: pass --out or set RACHSIM_OUT_DIR")]
    NoOutDir,
}

#[derive(Parser)]
#[command(name = "rachsim", version, about = "Seedable simulator of the cellular random-access procedure")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (`key = value` lines); defaults apply when omitted.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Extra `key=value` assignment applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct OutArgs {
    /// Output directory, created if missing.
    #[arg(long, env = "RACHSIM_OUT_DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one seed and write kpi.csv, cdf.csv and optionally trace.csv.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
        /// Also write the per-event trace.
        #[arg(long)]
        trace: bool,
    },
    /// Sweep parameters over seeds: `rachsim sweep n_femto=0,10 seeds=1..20`.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        out: OutArgs,
        /// `key=v1,v2,...` lists and an optional inclusive `seeds=a..b`.
        #[arg(required = true)]
        spec: Vec<String>,
    },
    /// Run the reference scenarios and check them against the published tables.
    Validate {
        /// Restrict to one table or figure, e.g. `II` or `fig7`.
        #[arg(long)]
        table: Option<String>,
    },
    /// Write device positions and serving cells to layout.csv.
    DumpLayout {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn load_scenario(args: &ScenarioArgs, seed: Option<u64>) -> Result<Scenario, CliError> {
    let mut s = Scenario::default();
    if let Some(path) = &args.scenario {
        let text = fs::read_to_string(path).map_err(|source| CliError::ReadScenario { path: path.clone(), source })?;
        apply_overrides(&mut s, &text)?;
    }
    for o in &args.overrides {
        if !o.contains('=') {
            return Err(CliError::Override(o.clone()));
        }
        apply_overrides(&mut s, o)?;
    }
    if let Some(seed) = seed {
        s.seed = seed;
    }
    Ok(s)
}

fn out_dir(args: &OutArgs) -> Result<PathBuf, CliError> {
    let dir = args.out.clone().ok_or(CliError::NoOutDir)?;
    fs::create_dir_all(&dir).map_err(|source| CliError::Write { path: dir.clone(), source })?;
    Ok(dir)
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

fn cmd_run(scenario: &ScenarioArgs, seed: Option<u64>, out: &OutArgs, trace: bool) -> Result<(), CliError> {
    let s = load_scenario(scenario, seed)?;
    let dir = out_dir(out)?;
    let output = run_with(&s, RunOptions { trace, ..Default::default() })?;
    let report = KpiSummary::from_run(s.fingerprint(), s.seed, &output).report();
    let kpi = format!("{}\n{}\n", kpi_csv_header(&[]), kpi_csv_row(&[], &s.seed.to_string(), &report));
    write(&dir, "kpi.csv", &kpi)?;
    let cdf = delay_cdf(&output.records).map(|c| cdf_csv(&c)).unwrap_or_else(|_| format!("{CDF_HEADER}\n"));
    write(&dir, "cdf.csv", &cdf)?;
    if trace {
        write(&dir, "trace.csv", &trace_csv(&output.trace))?;
    }
    print!("{}", kpi_table(&report));
    Ok(())
}

fn cmd_sweep(scenario: &ScenarioArgs, out: &OutArgs, spec: &[String]) -> Result<(), CliError> {
    let base = load_scenario(scenario, None)?;
    let plan = SweepPlan::parse(spec).map_err(CliError::Sweep)?;
    let seeds = plan.seeds.clone().unwrap_or_else(|| vec![base.seed]);
    let dir = out_dir(out)?;
    let names: Vec<&str> = plan.params.iter().map(|(k, _)| k.as_str()).collect();
    let mut csv = format!("{}\n", kpi_csv_header(&names));
    for cell in plan.cells() {
        let mut s = base.clone();
        let doc: String = names.iter().zip(&cell).map(|(k, v)| format!("{k} = {}\n", v.replace('+', ","))).collect();
        apply_overrides(&mut s, &doc)?;
        let parts = summarize_seeds(&s, &seeds)?;
        for p in &parts {
            csv.push_str(&kpi_csv_row(&cell, &p.seeds[0].to_string(), &p.report()));
            csv.push('\n');
        }
        let pooled = KpiSummary::merge_all(&parts)?;
        csv.push_str(&kpi_csv_row(&cell, "pooled", &pooled.report()));
        csv.push('\n');
    }
    let path = write(&dir, "sweep.csv", &csv)?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_validate(table: Option<&str>) -> Result<bool, CliError> {
    let verdicts = validation::validate(table)?;
    for v in &verdicts {
        println!("{v}");
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!("{} of {} reference values within tolerance", verdicts.len() - failed, verdicts.len());
    Ok(failed == 0)
}

fn cmd_dump_layout(scenario: &ScenarioArgs, seed: Option<u64>, out: &OutArgs) -> Result<(), CliError> {
    let s = load_scenario(scenario, seed)?;
    let dir = out_dir(out)?;
    let (layout, devices) = populate(&s)?;
    let path = write(&dir, "layout.csv", &layout_csv(&devices, &layout, &s)?)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { scenario, seed, out, trace } => cmd_run(scenario, *seed, out, *trace).map(|_| true),
        Command::Sweep { scenario, out, spec } => cmd_sweep(scenario, out, spec).map(|_| true),
        Command::Validate { table } => cmd_validate(table.as_deref()),
        Command::DumpLayout { scenario, seed, out } => cmd_dump_layout(scenario, *seed, out).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
