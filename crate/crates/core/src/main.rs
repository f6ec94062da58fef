use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use heatft::cli::{
    apply_tolerance, cmd_example, cmd_heat, cmd_validate, cmd_verify, parse_sweep, random_spec,
    CliError, ExperimentConfig, Report, EXIT_INPUT_ERROR,
};
use heatft::qubit_example::QubitExampleParams;

#[derive(Parser)]
#[command(name = "heatft", version, about = "Heat-exchange fluctuation theorems for correlated quantum systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration.
    Validate(Common),
    /// Run the fluctuation-theorem suite.
    Verify(Common),
    /// Heat distributions and the Ψ factor over a time sweep.
    Heat(Common),
    /// Two-qubit example against its closed forms.
    Example(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    time: Option<f64>,
    /// START:STOP:STEPS
    #[arg(long)]
    sweep: Option<String>,
    /// Generate a random spec instead of reading a config.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, action = clap::ArgAction::Set, default_value_t = true)]
    correlated: bool,
    /// NAME=VALUE, repeatable.
    #[arg(long = "tol")]
    tol: Vec<String>,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match (&self.config, self.seed) {
            (Some(path), None) => ExperimentConfig::load(path)?,
            (None, Some(seed)) => {
                let da = 2 + (seed % 2) as usize;
                let db = 2 + ((seed / 2) % 2) as usize;
                ExperimentConfig::from_spec(&random_spec(seed, da, db), None)
            }
            _ => return Err(CliError::Config("give exactly one of --config and --seed".into())),
        };
        for t in &self.tol {
            apply_tolerance(&mut cfg.tolerances, t)?;
        }
        Ok(cfg)
    }

    fn times(&self, cfg: Option<&ExperimentConfig>, default: Vec<f64>) -> Result<Vec<f64>, CliError> {
        match (&self.sweep, self.time) {
            (Some(_), Some(_)) => Err(CliError::Config("give at most one of --time and --sweep".into())),
            (Some(s), None) => parse_sweep(s),
            (None, Some(t)) => Ok(vec![t]),
            (None, None) => Ok(cfg.and_then(|c| c.times.clone()).unwrap_or(default)),
        }
    }

    fn out_paths(&self, cfg: Option<&ExperimentConfig>) -> (Option<PathBuf>, Option<PathBuf>) {
        if let Some(out) = &self.out {
            let mut report = out.clone().into_os_string();
            report.push(".report.json");
            return (Some(out.clone()), Some(report.into()));
        }
        let output = cfg.and_then(|c| c.output.clone()).unwrap_or_default();
        (output.csv.map(PathBuf::from), output.report.map(PathBuf::from))
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(report: &Report, csv: Option<&str>, paths: (Option<PathBuf>, Option<PathBuf>)) -> Result<(), CliError> {
    let (csv_path, report_path) = paths;
    match (csv, csv_path) {
        (Some(c), Some(p)) => write(&p, c)?,
        (Some(c), None) => print!("{c}"),
        _ => {}
    }
    match (report_path, csv.is_some()) {
        (Some(p), _) => write(&p, &report.to_json())?,
        (None, false) => println!("{}", report.to_json()),
        (None, true) => eprintln!("{}", report.to_json()),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Validate(args) => {
            let cfg = args.config()?;
            let report = cmd_validate(&cfg)?;
            let (_, report_path) = args.out_paths(Some(&cfg));
            emit(&report, None, (None, report_path.or(args.out.clone())))?;
            if let Some(note) = report.notes.first() {
                eprintln!("{note}");
            }
            Ok(report.exit_code())
        }
        Command::Verify(args) => {
            let cfg = args.config()?;
            let times = args.times(Some(&cfg), vec![1.0])?;
            let report = cmd_verify(&cfg, &times)?;
            emit(&report, None, (None, args.out.clone()))?;
            Ok(report.exit_code())
        }
        Command::Heat(args) => {
            let cfg = args.config()?;
            let times = args.times(Some(&cfg), vec![1.0])?;
            let (csv, report) = cmd_heat(&cfg, &times)?;
            emit(&report, Some(&csv), args.out_paths(Some(&cfg)))?;
            Ok(report.exit_code())
        }
        Command::Example(args) => {
            let params = QubitExampleParams::from_occupations(0.2, 0.3, 1.0, args.correlated);
            let times = args.times(None, parse_sweep("0:2:101")?)?;
            let (csv, report) = cmd_example(&params, &times)?;
            emit(&report, Some(&csv), args.out_paths(None))?;
            Ok(report.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code.clamp(0, EXIT_INPUT_ERROR) as u8)
}
