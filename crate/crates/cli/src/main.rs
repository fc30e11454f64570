//! Command line front end: loads a scenario file, runs one analysis and
//! writes CSV or a JSON report.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use optomech::dynamics::DiffusionModel;
use optomech::effective::JFormula;
use optomech::pipeline::{
    run_effective, run_evolve, run_steady, run_sweep, RunOptions, SeriesRow, System,
};
use optomech::scenario::{MeanFieldMode, OutputFormat, Scenario};
use optomech::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "optomech",
    version,
    about = "Entanglement of two trapped dielectrics in a shared cavity"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// CW steady state: stability, covariance, entanglement and occupations.
    Steady(Common),
    /// Covariance evolution from the CW steady state under the scenario drive.
    Evolve(Common),
    /// Grid sweep over the axes in the scenario's `[sweep]` section.
    Sweep(Common),
    /// Effective mechanical coupling, its drive harmonics and RWA processes.
    Effective(Common),
    /// Parse and check a scenario without running it.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory; stdout when absent and the scenario names none.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for sweeps.
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    diffusion: Option<Diffusion>,
    #[arg(long, value_enum)]
    jformula: Option<Formula>,
    #[arg(long, value_enum)]
    meanfield: Option<MeanField>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum Diffusion {
    Exact,
    HighT,
}

#[derive(Clone, Copy, ValueEnum)]
enum Formula {
    Printed,
    SinglePower,
}

#[derive(Clone, Copy, ValueEnum)]
enum MeanField {
    Ode,
    Quasistatic,
}

const EXIT_OTHER: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_UNSTABLE: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidConfig(_) | Error::Parse(_) => EXIT_CONFIG,
        Error::Unstable { .. } | Error::BlowUp { .. } => EXIT_UNSTABLE,
        Error::NotConverged { .. } => EXIT_NOT_CONVERGED,
        _ => EXIT_OTHER,
    }
}

enum Failure {
    Model(Error),
    Io(String),
    /// Output was written but the run did not reach a quasi-steady orbit.
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

struct Run {
    scenario: Scenario,
    format: OutputFormat,
    out: Option<PathBuf>,
    options: RunOptions,
}

impl Run {
    fn new(args: &Common) -> Result<Self, Failure> {
        let mut scenario = Scenario::load(&args.scenario)?;
        let n = &mut scenario.numerics;
        if let Some(d) = args.diffusion {
            n.diffusion = match d {
                Diffusion::Exact => DiffusionModel::Exact,
                Diffusion::HighT => DiffusionModel::HighTemperature,
            };
        }
        if let Some(f) = args.jformula {
            n.jformula = match f {
                Formula::Printed => JFormula::Printed,
                Formula::SinglePower => JFormula::SinglePower,
            };
        }
        if let Some(m) = args.meanfield {
            n.meanfield = match m {
                MeanField::Ode => MeanFieldMode::Ode,
                MeanField::Quasistatic => MeanFieldMode::Quasistatic,
            };
        }
        let format = match args.format {
            Some(Format::Csv) => OutputFormat::Csv,
            Some(Format::Report) => OutputFormat::Report,
            None => scenario.output.format,
        };
        let out = args
            .out
            .clone()
            .or_else(|| scenario.output.directory.as_ref().map(PathBuf::from));
        if let Some(t) = args.threads {
            if t == 0 {
                return Err(Error::InvalidConfig("--threads must be positive".into()).into());
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| Failure::Io(e.to_string()))?;
        }
        let options = RunOptions::from(&scenario.numerics);
        Ok(Run {
            scenario,
            format,
            out,
            options,
        })
    }

    fn stem(&self) -> String {
        self.scenario
            .name
            .clone()
            .unwrap_or_else(|| "scenario".into())
    }

    /// Writes `bytes` to `<out>/<stem>.<verb>.<ext>` or stdout.
    fn emit(&self, verb: &str, bytes: &[u8]) -> Result<(), Failure> {
        let ext = match self.format {
            OutputFormat::Csv => "csv",
            OutputFormat::Report => "json",
        };
        match &self.out {
            Some(dir) => {
                fs::create_dir_all(dir)?;
                let path = dir.join(format!("{}.{verb}.{ext}", self.stem()));
                fs::write(&path, bytes)?;
                eprintln!("wrote {}", path.display());
            }
            None => io::stdout().write_all(bytes)?,
        }
        Ok(())
    }

    fn report<T: Serialize>(&self, verb: &str, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_vec_pretty(value)?;
        text.push(b'\n');
        self.emit(verb, &text)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    scenario: Option<&'a str>,
    options: &'a RunOptions,
    result: &'a T,
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

fn write_output<T: Serialize>(
    run: &Run,
    verb: &str,
    value: &T,
    rows: impl FnOnce() -> Result<Vec<u8>, Failure>,
) -> Result<(), Failure> {
    match run.format {
        OutputFormat::Report => {
            let env = Envelope {
                scenario: run.scenario.name.as_deref(),
                options: &run.options,
                result: value,
            };
            run.report(verb, &env)
        }
        OutputFormat::Csv => run.emit(verb, &rows()?),
    }
}

fn steady(args: &Common) -> Result<(), Failure> {
    let run = Run::new(args)?;
    let sys = System::new(&run.scenario.system())?;
    let r = run_steady(&sys, &run.options, run.scenario.probe.as_ref())?;
    write_output(&run, "steady", &r, || {
        let row = SeriesRow {
            t_over_tau: f64::INFINITY,
            eta_min: r.eta_min,
            log_negativity: r.log_negativity,
            nbar1: r.nbar[0],
            nbar2: r.nbar[1],
        };
        csv_bytes(&[row])
    })
}

fn evolve(args: &Common) -> Result<(), Failure> {
    let run = Run::new(args)?;
    let sys = System::new(&run.scenario.system())?;
    let r = run_evolve(
        &sys,
        &run.scenario.numerics,
        run.scenario.output.sample_every_tau,
        &run.options,
        run.scenario.probe.as_ref(),
    )?;
    write_output(&run, "evolve", &r, || csv_bytes(&r.series))?;
    if r.modulated && !r.orbit.converged {
        eprintln!(
            "orbit not quasi-steady: period-to-period change {:.3e}",
            r.orbit.change
        );
        return Err(Failure::NotConverged);
    }
    Ok(())
}

fn sweep(args: &Common) -> Result<(), Failure> {
    let run = Run::new(args)?;
    let axes = run
        .scenario
        .sweep
        .clone()
        .ok_or_else(|| Error::InvalidConfig("scenario has no [sweep] section".into()))?;
    let rows = run_sweep(
        &run.scenario.system(),
        &axes,
        &run.scenario.numerics,
        &run.options,
    );
    write_output(&run, "sweep", &rows, || csv_bytes(&rows))
}

#[derive(Serialize)]
struct PairRow {
    j: usize,
    l: usize,
    j0: f64,
    j1: f64,
    j2: f64,
    residual: f64,
}

fn effective(args: &Common) -> Result<(), Failure> {
    let run = Run::new(args)?;
    let sys = System::new(&run.scenario.system())?;
    let r = run_effective(&sys, &run.scenario.numerics, &run.options)?;
    write_output(&run, "effective", &r, || {
        let rows: Vec<PairRow> = r
            .pairs
            .iter()
            .map(|p| PairRow {
                j: p.j,
                l: p.l,
                j0: p.j0,
                j1: p.j1,
                j2: p.j2,
                residual: p.residual,
            })
            .collect();
        csv_bytes(&rows)
    })
}

fn validate(args: &Common) -> Result<(), Failure> {
    let scenario = Scenario::load(&args.scenario)?;
    let derived = scenario.validate()?;
    for w in &derived.warnings {
        eprintln!("warning: {w}");
    }
    println!("{}: ok", display_name(&scenario, &args.scenario));
    Ok(())
}

fn display_name(s: &Scenario, path: &Path) -> String {
    s.name.clone().unwrap_or_else(|| path.display().to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Steady(a) => steady(a),
        Command::Evolve(a) => evolve(a),
        Command::Sweep(a) => sweep(a),
        Command::Effective(a) => effective(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Model(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_OTHER)
        }
        Err(Failure::NotConverged) => ExitCode::from(EXIT_NOT_CONVERGED),
    }
}
