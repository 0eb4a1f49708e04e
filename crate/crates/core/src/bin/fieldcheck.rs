use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fieldcheck::runner::{
    exit_code, run_charge, run_convergence, run_flux, run_sample, run_verify, Format, Report, EXIT_PASS,
};
use fieldcheck::scenario::Scenario;
use fieldcheck::Error;

/// Retarded and advanced field solutions, checked against their boundary
/// conditions at infinity.
#[derive(Parser)]
#[command(name = "fieldcheck", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the falloff conditions along every configured ray.
    Verify(Common),
    /// Write potential, gradient, field, stress or amplitude samples as CSV.
    Sample(Common),
    /// Energy-momentum flux through the configured spheres.
    Flux(Common),
    /// Gauss-law charge at the configured radii.
    Charge(Common),
    /// Repeat a run at refined quadrature orders and compare.
    Convergence(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Output file; defaults to the scenario's output path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads; falls back to FIELDCHECK_THREADS.
    #[arg(long, env = "FIELDCHECK_THREADS")]
    threads: Option<usize>,
    /// Reserved. Every computation is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (Command::Verify(c) | Command::Sample(c) | Command::Flux(c) | Command::Charge(c) | Command::Convergence(c)) =
        &cli.command;
    let code = match setup(c).and_then(|scenario| {
        run(&cli.command, c, &scenario).map_err(|e| {
            eprintln!("fieldcheck: scenario {}: {e}", scenario.name);
            e
        })
    }) {
        Ok(code) => code,
        Err(e) => {
            if matches!(e, Error::Config { .. }) {
                eprintln!("fieldcheck: {e}");
            }
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}

fn setup(c: &Common) -> Result<Scenario, Error> {
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::config("threads", e.to_string()))?;
    }
    let scenario = Scenario::from_path(&c.scenario)?;
    if scenario.omega_a_warning() {
        eprintln!(
            "fieldcheck: warning: omega*a = {} in scenario {}; the source is not small against its wavelength",
            scenario.omega_a().unwrap_or_default(),
            scenario.name
        );
    }
    Ok(scenario)
}

fn run(cmd: &Command, c: &Common, scenario: &Scenario) -> Result<i32, Error> {
    let format = c.format.unwrap_or(Format::Json);
    let (text, code) = match cmd {
        Command::Verify(_) => emit(&run_verify(scenario)?, format),
        Command::Flux(_) => emit(&run_flux(scenario)?, format),
        Command::Charge(_) => emit(&run_charge(scenario)?, format),
        Command::Convergence(_) => emit(&run_convergence(scenario)?, format),
        Command::Sample(_) => {
            if c.format.is_some_and(|f| f != Format::Csv) {
                return Err(Error::config("format", "sample output is always csv"));
            }
            let out = c.out.clone().or_else(|| scenario.output.samples.clone());
            write_out(out.as_deref(), &run_sample(scenario)?.csv())?;
            return Ok(EXIT_PASS);
        }
    };
    let out = c.out.clone().or_else(|| scenario.output.report.clone());
    write_out(out.as_deref(), &text)?;
    Ok(code)
}

fn emit<R: Report>(report: &R, format: Format) -> (String, i32) {
    (report.render(format), report.verdict().exit_code())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::config("out", format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
