use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use mixphase::sweep::{
    default_config, load_config, run, ExperimentKind, OutputFormat, ResultTable, SweepConfig,
    SweepError,
};

const SCHEMA_HELP: &str = "\
Output schemas (header rows are fixed per experiment type):

  figure/crossval/continuum CSV:
    grid_var,grid_value,theta_closed,theta_numeric,abs_error,branch
  witness CSV:
    kind,trial,dim,anticomm_norm,max_abs_re_eig,trace_drift

JSON output is an array of row objects with the same keys. Floats print as
shortest round-trip decimals; reruns of a config byte-reproduce the file.

Experiments:
  fig1_kitaev, fig1_ssh           phase vs temperature at fixed duration
  fig2_kitaev, fig2_ssh           phase vs duration at fixed temperature
  fig3_oscillator_T               oscillator phase vs temperature
  fig3_oscillator_tau             oscillator phase vs duration
  continuum                       dense-spectrum limit vs tau/(beta*hbar)
  crossval                        closed form vs quadrature (model.kind)
  witness                         anti-commutator incompatibility trials

Exit codes: 0 success, 2 invalid config, 3 numeric failure, 4 io error.";

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

/// Reproduce mixed-state dynamic-phase sweeps from a config file.
#[derive(Parser, Debug)]
#[command(name = "mixphase", version, after_help = SCHEMA_HELP)]
struct Cli {
    /// Config file (TOML-syntax sections; see the bundled configs/ directory)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Experiment to run with its default config, or to override the
    /// config file's kind
    #[arg(long, value_name = "NAME")]
    experiment: Option<String>,

    /// Where to write the output file (overrides the config)
    #[arg(long, value_name = "PATH")]
    out: Option<String>,

    /// Output format (overrides the config)
    #[arg(long, value_enum)]
    format: Option<FormatArg>,

    /// Quadrature segments for numeric cross-checks (overrides the config)
    #[arg(long, value_name = "N")]
    n_samples: Option<usize>,

    /// Skip numeric cross-checks; emit closed forms only
    #[arg(long)]
    no_numeric: bool,

    /// Seed for the witness trial stream (overrides the config)
    #[arg(long, value_name = "S")]
    seed: Option<u64>,

    /// Worker threads for grid evaluation (default: available parallelism)
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

fn build_config(cli: &Cli) -> Result<SweepConfig, SweepError> {
    let mut config = match (&cli.config, &cli.experiment) {
        (Some(path), _) => load_config(path)?,
        (None, Some(name)) => default_config(name.parse::<ExperimentKind>()?),
        (None, None) => {
            return Err(SweepError::Config(
                "pass --config PATH or --experiment NAME (see --help)".to_string(),
            ))
        }
    };
    if cli.config.is_some() {
        if let Some(name) = &cli.experiment {
            config.experiment.kind = name.parse::<ExperimentKind>()?;
        }
    }
    if let Some(out) = &cli.out {
        config.output.path = out.clone();
    }
    if let Some(format) = cli.format {
        config.output.format = match format {
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Json => OutputFormat::Json,
        };
    }
    if let Some(n) = cli.n_samples {
        config.numeric.n_samples = n;
    }
    if cli.no_numeric {
        config.numeric.enable = false;
    }
    if let Some(seed) = cli.seed {
        config.witness.seed = seed;
    }
    Ok(config)
}

fn execute(cli: &Cli) -> Result<(), SweepError> {
    let config = build_config(cli)?;
    let table = match cli.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SweepError::Config(format!("thread pool: {e}")))?;
            pool.install(|| run(&config))?
        }
        None => run(&config)?,
    };
    match &table {
        ResultTable::Figure(rows) => {
            println!("wrote {} rows to {}", rows.len(), config.output.path);
        }
        ResultTable::Witness { rows, summary } => {
            println!("wrote {} rows to {}", rows.len(), config.output.path);
            println!(
                "witness: {} trials, min anti-commutator norm {:e}, nonzero fraction {}",
                summary.trials, summary.min_anticommutator_norm, summary.nonzero_fraction
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mixphase: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
