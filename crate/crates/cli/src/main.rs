use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use convexcyclic::dto::{load_json, Cplx, SpecDto};
use convexcyclic::{
    emit_report, run_experiment, CliError, Command, ExperimentConfig, Format, Parameters,
};

/// Convex-cyclicity experiments on finite-dimensional operators.
#[derive(Parser)]
#[command(name = "convexcyclic", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Necessary-condition gates, m-isometry gate and spectral classifier.
    Classify(Flags),
    /// Trace Re⟨T^n x, f⟩ and classify its growth.
    Probe(Flags),
    /// Distance from target(s) to the convex hull of the orbit segment.
    Approx(Flags),
    /// Greedy support-N average within δ of a target.
    Epsilon(Flags),
    /// (m, p)-isometry defect and seminorm estimate.
    Defect(Flags),
    /// Print the orbit x, Tx, …, T^N x.
    Orbit(Flags),
    /// Describe a preset, or list all presets.
    Preset(Flags),
    /// Run an experiment described by a JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct Output {
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct Flags {
    /// Operator spec: inline JSON or a path to a JSON file.
    #[arg(long)]
    spec: Option<String>,
    /// Named operator such as `diag-2i-minus-2i` or `dirichlet-shift:64`.
    #[arg(long)]
    preset: Option<String>,
    /// Seed vector x as JSON, e.g. `[[1,0],[1,0]]` or `[1,1]`.
    #[arg(long)]
    seed_vector: Option<String>,
    /// Orbit horizon.
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// Searched: `cesaro`, `pkc:<c>`, `monomial-average:<terms>`.
    /// Fixed: `cesaro:<n>`, `pkc:<k>:<c>`, `[a0, a1, ...]`.
    #[arg(long)]
    family: Option<String>,
    /// Single target vector as JSON.
    #[arg(long)]
    target: Option<String>,
    /// List of target vectors: inline JSON or a JSON file.
    #[arg(long)]
    targets: Option<String>,
    /// Probe functional representative as JSON.
    #[arg(long)]
    functional: Option<String>,
    #[arg(long)]
    rng_seed: Option<u64>,
    /// Exponent range searched by the ε-greedy orbit oracle.
    #[arg(long)]
    horizon: Option<usize>,
    /// Use the seeded mock oracle in `epsilon`.
    #[arg(long)]
    mock: bool,
    #[arg(long)]
    max_k: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Random unit vectors for the m-isometry test.
    #[arg(long)]
    samples: Option<usize>,
    /// Sample truncated shifts on all coordinates.
    #[arg(long)]
    no_edge_guard: bool,
    #[command(flatten)]
    output: Output,
}

impl Flags {
    fn into_config(self, command: Command) -> Result<(ExperimentConfig, Output), CliError> {
        let vector = |arg: &Option<String>, field| -> Result<Option<Vec<Cplx>>, CliError> {
            arg.as_deref().map(|a| load_json(a, field)).transpose()
        };
        let config = ExperimentConfig {
            command,
            operator: self
                .spec
                .as_deref()
                .map(|s| load_json::<SpecDto>(s, "spec"))
                .transpose()?,
            preset: self.preset,
            seed_vector: vector(&self.seed_vector, "seed_vector")?,
            parameters: Parameters {
                n: self.n,
                tol: self.tol,
                eps: self.eps,
                delta: self.delta,
                m: self.m,
                p: self.p,
                family: self.family,
                target: vector(&self.target, "target")?,
                targets: self
                    .targets
                    .as_deref()
                    .map(|a| load_json(a, "targets"))
                    .transpose()?,
                functional: vector(&self.functional, "functional")?,
                rng_seed: self.rng_seed,
                horizon: self.horizon,
                mock: self.mock.then_some(true),
                max_k: self.max_k,
                max_iter: self.max_iter,
                samples: self.samples,
                edge_guard: self.no_edge_guard.then_some(false),
            },
        };
        Ok((config, self.output))
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (config, output) = match cli.command {
        Sub::Run { config, output } => {
            let path = config.to_string_lossy().into_owned();
            (load_json::<ExperimentConfig>(&path, "config")?, output)
        }
        Sub::Classify(f) => f.into_config(Command::Classify)?,
        Sub::Probe(f) => f.into_config(Command::Probe)?,
        Sub::Approx(f) => f.into_config(Command::Approx)?,
        Sub::Epsilon(f) => f.into_config(Command::Epsilon)?,
        Sub::Defect(f) => f.into_config(Command::Defect)?,
        Sub::Orbit(f) => f.into_config(Command::Orbit)?,
        Sub::Preset(f) => f.into_config(Command::Preset)?,
    };
    let report = run_experiment(&config)?;
    emit_report(&report, output.format, output.out.as_deref())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
