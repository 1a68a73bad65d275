// SPDX-License-Identifier: Apache-2.0

//! `pmalab`: run scenarios, experiment families, gain tuning and the
//! stability gate from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pmalab_core::harness::output::{self, format_summary, summary_rows, SummaryRow};
use pmalab_core::harness::tune::{best_gains_toml, tune};
use pmalab_core::harness::{run_family, run_scenario, Family, GainsFile, RunError, Scenario, TuneConfig};
use pmalab_core::stability::StabilityReport;
use pmalab_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_DIVERGED: u8 = 4;

#[derive(Parser)]
#[command(name = "pmalab", version, about = "Pneumatic muscle tracking-control simulations")]
struct Cli {
    /// Run even when the gains fail the stability gate.
    #[arg(long, global = true)]
    force: bool,
    /// Output directory; overrides the configuration and PMALAB_OUTPUT_DIR.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario file.
    Simulate { scenario: PathBuf },
    /// Run an experiment family (mp-sweep, fixed-freq-compare, chirp-compare,
    /// load-sweep) on a base scenario.
    Family { name: String, base: PathBuf },
    /// Tune the gains with the constrained firefly search.
    Tune { config: PathBuf },
    /// Check a gains file against the stability gate.
    CheckGains { gains: PathBuf },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: e.to_string(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } => EXIT_CONFIG,
        Error::InfeasibleGains(_) | Error::ExhaustedBudget { .. } => EXIT_INFEASIBLE,
        e if e.is_divergence() => EXIT_DIVERGED,
        Error::SingularGain { .. } | Error::PressureOutOfRange { .. } => EXIT_DIVERGED,
        _ => EXIT_FAILURE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate { scenario } => simulate(&cli, scenario),
        Command::Family { name, base } => family(&cli, name, base),
        Command::Tune { config } => tune_gains(&cli, config),
        Command::CheckGains { gains } => check_gains(&cli, gains),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("pmalab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn output_dir(cli: &Cli, scenario: &Scenario) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| scenario.output.resolved_dir())
}

fn load_scenario(cli: &Cli, path: &Path) -> Result<Scenario, Failure> {
    let mut s = Scenario::load(path)?;
    s.force |= cli.force;
    Ok(s)
}

fn print_written(paths: &[PathBuf]) {
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
}

fn print_report(r: &StabilityReport) {
    println!("feasible        {}", r.feasible);
    println!("varpi           {:.2}", r.varpi);
    println!("K_c eigenvalues {:.6e} {:.6e}", r.kc_eigs[0], r.kc_eigs[1]);
    println!("lambda_min(K_m) {:.6e}", r.km_min);
    println!("eps             {:.6e}", r.eps);
    println!("lambda1         {:.6e}", r.lambda1);
    match (r.lambda2, r.gamma_required) {
        (Some(l2), Some(g)) => {
            println!("lambda2         {l2:.6e}");
            println!("gamma required  {g:.6e}");
        }
        _ => println!("lambda2         undefined"),
    }
    for v in &r.violations {
        println!("violation       {v}");
    }
}

fn run_failure(e: &RunError) -> Failure {
    if let (Error::InfeasibleGains(_), Some(report)) = (&e.error, &e.stability) {
        print_report(report);
    }
    Failure {
        code: exit_code(&e.error),
        message: e.to_string(),
    }
}

fn simulate(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let s = load_scenario(cli, path)?;
    let outcome = run_scenario(&s);
    let dir = output_dir(cli, &s);
    if !matches!(&outcome, Err(e) if matches!(e.error, Error::InfeasibleGains(_))) {
        let written = output::write_run(&dir, &s.output.name, s.controller.label(), &outcome)?;
        print_written(&written);
    }
    match &outcome {
        Ok(_) => {
            print!(
                "{}",
                format_summary(&[SummaryRow::new(&s.output.name, s.controller.label(), &outcome)])
            );
            Ok(())
        }
        Err(e) => Err(run_failure(e)),
    }
}

fn family(cli: &Cli, name: &str, base: &Path) -> Result<(), Failure> {
    let family: Family = name.parse()?;
    let s = load_scenario(cli, base)?;
    let report = run_family(family, &s)?;
    let written = output::write_family(&output_dir(cli, &s), &report)?;
    print_written(&written);
    print!("{}", format_summary(&summary_rows(&report)));
    // Diverged members outrank infeasible ones.
    let worst = report
        .rows
        .iter()
        .filter_map(|r| r.outcome.as_ref().err())
        .map(|e| exit_code(&e.error))
        .max_by_key(|&c| match c {
            EXIT_DIVERGED => 3,
            EXIT_INFEASIBLE => 2,
            _ => 1,
        });
    match worst {
        None => Ok(()),
        Some(code) => Err(Failure {
            code,
            message: format!(
                "{} member(s) of {family} failed",
                report.rows.iter().filter(|r| r.outcome.is_err()).count()
            ),
        }),
    }
}

fn tune_gains(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let config = TuneConfig::load(path)?;
    let (outcome, gains) = tune(&config)?;
    let dir = output_dir(cli, &config.scenario);
    let name = &config.scenario.output.name;
    let history = dir.join(format!("{name}_history.csv"));
    output::write_history_file(&history, &outcome.history)?;
    let best = dir.join(format!("{name}_best_gains.toml"));
    output::write_text_file(&best, &best_gains_toml(&config, &gains, outcome.best.objective))?;
    print_written(&[history, best]);
    println!("best h          {:.6e}", outcome.best.objective);
    println!("evaluations     {}", outcome.evaluations);
    for (name, v) in pmalab_core::PsmcGains::NAMES.iter().zip(gains.to_vector()) {
        println!("{name:<15} {v:.6}");
    }
    Ok(())
}

fn check_gains(cli: &Cli, path: &Path) -> Result<(), Failure> {
    let file = GainsFile::load(path)?;
    let report = file.assess();
    print_report(&report);
    if report.feasible || cli.force {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_INFEASIBLE,
            message: format!("infeasible gains: {}", report.violation_names().join(", ")),
        })
    }
}
