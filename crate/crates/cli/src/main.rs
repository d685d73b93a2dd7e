mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, Layers, RunConfig, SEED_ENV};

/// Pilot-wave EPR simulator: outcome maps, transition sets, degrees of
/// nonlocality, bounds and the acceptance suite.
///
/// Settings come from built-in defaults, then SUBQUANTUM_SEED, then
/// `--config`, then `--set` and the named flags. Angles are in degrees unless
/// `--units rad`.
#[derive(Parser, Debug)]
#[command(name = "subquantum", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `section.key = value` file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Override any key; repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long, global = true, value_name = "deg|rad")]
    units: Option<String>,
    #[arg(long = "thetaA", global = true, allow_hyphen_values = true)]
    theta_a: Option<String>,
    #[arg(long = "thetaB", global = true, allow_hyphen_values = true)]
    theta_b: Option<String>,
    #[arg(long = "thetaA-prime", global = true, allow_hyphen_values = true)]
    theta_a_prime: Option<String>,
    #[arg(long = "thetaB-prime", global = true, allow_hyphen_values = true)]
    theta_b_prime: Option<String>,
    #[arg(long = "aA", global = true)]
    a_a: Option<String>,
    #[arg(long = "aB", global = true)]
    a_b: Option<String>,
    /// Packet width.
    #[arg(long, global = true, allow_hyphen_values = true)]
    width: Option<String>,
    /// Singlet perturbation.
    #[arg(long, global = true, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long, global = true, value_name = "von-neumann|stern-gerlach")]
    mode: Option<String>,
    #[arg(long, global = true, value_name = "KIND")]
    ensemble: Option<String>,
    #[arg(long, global = true, value_name = "mc|grid")]
    method: Option<String>,
    /// Monte Carlo samples.
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Grid cells per axis.
    #[arg(long, global = true)]
    m: Option<String>,
    #[arg(long, global = true, value_name = "csv|json")]
    format: Option<String>,
    #[arg(long, short, global = true, value_name = "PATH")]
    output: Option<String>,
}

impl Common {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        [
            ("settings.units", &self.units),
            ("settings.theta_a", &self.theta_a),
            ("settings.theta_b", &self.theta_b),
            ("settings.theta_a_prime", &self.theta_a_prime),
            ("settings.theta_b_prime", &self.theta_b_prime),
            ("coupling.a_a", &self.a_a),
            ("coupling.a_b", &self.a_b),
            ("packet.width", &self.width),
            ("state.epsilon", &self.epsilon),
            ("experiment.mode", &self.mode),
            ("ensemble.kind", &self.ensemble),
            ("method.kind", &self.method),
            ("method.n", &self.n),
            ("method.seed", &self.seed),
            ("method.m", &self.m),
            ("output.format", &self.format),
            ("output.path", &self.output),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
        .collect()
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Piecewise-linear trajectory of one hidden variable.
    Trajectory {
        #[arg(long = "rA", allow_hyphen_values = true)]
        r_a: Option<String>,
        #[arg(long = "rB", allow_hyphen_values = true)]
        r_b: Option<String>,
        /// Fixed-step integration instead of the exact event engine.
        #[arg(long)]
        dt: Option<String>,
    },
    /// Outcome pair on a grid of initial configurations.
    Outcomes {
        #[arg(long)]
        resolution: Option<String>,
    },
    /// Marginals and correlation under the configured ensemble.
    Correlation,
    /// Degrees of nonlocality at both wings for the configured shift.
    Nonlocality,
    /// Change of one wing's outcome distribution under the configured shift.
    Signal {
        #[arg(long, value_name = "a|b")]
        observed: Option<String>,
    },
    /// Degrees of nonlocality over a grid of setting differences.
    Sweep {
        #[arg(
            long = "delta-grid",
            value_name = "START:STOP:STEP",
            allow_hyphen_values = true
        )]
        delta_grid: Option<String>,
        #[arg(long = "check-bound", value_name = "ID")]
        check_bound: Option<String>,
    },
    /// Degree of nonlocality for perturbed singlets.
    Entanglement {
        #[arg(long, value_name = "LIST")]
        epsilons: Option<String>,
        #[arg(long, value_name = "LIST", allow_hyphen_values = true)]
        deltas: Option<String>,
    },
    /// Rotating-diameter toy model on the unit disc.
    Circle {
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        #[arg(long, value_name = "uniform|upper-half|tilt")]
        disc: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        slope: Option<String>,
    },
    /// Average nonlocal information over a range of setting differences.
    Bits {
        #[arg(long, allow_hyphen_values = true)]
        lo: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        hi: Option<String>,
    },
    /// Search for nonequilibrium ensembles with balanced transition sets.
    SearchBalanced {
        #[arg(long, value_name = "grid-weights|linear-tilt")]
        family: Option<String>,
        #[arg(long)]
        cells: Option<String>,
        #[arg(long)]
        candidates: Option<String>,
        #[arg(long)]
        budget: Option<String>,
        /// Random setting triples added to the configured shift.
        #[arg(long)]
        random: Option<String>,
    },
    /// Run the acceptance suite; exit 2 if any check fails.
    Verify {
        #[arg(long, value_name = "LIST")]
        ids: Option<String>,
    },
    /// List configuration keys with defaults.
    Keys,
}

impl Command {
    fn overrides(&self) -> Vec<(&'static str, &String)> {
        let pairs: Vec<(&'static str, &Option<String>)> = match self {
            Command::Trajectory { r_a, r_b, dt } => {
                vec![
                    ("trajectory.r_a", r_a),
                    ("trajectory.r_b", r_b),
                    ("trajectory.dt", dt),
                ]
            }
            Command::Outcomes { resolution } => vec![("outcomes.resolution", resolution)],
            Command::Signal { observed } => vec![("signal.observed", observed)],
            Command::Sweep {
                delta_grid,
                check_bound,
            } => {
                vec![
                    ("sweep.delta_grid", delta_grid),
                    ("sweep.check_bound", check_bound),
                ]
            }
            Command::Entanglement { epsilons, deltas } => {
                vec![
                    ("entanglement.epsilons", epsilons),
                    ("entanglement.deltas", deltas),
                ]
            }
            Command::Circle { gamma, disc, slope } => vec![
                ("circle.gamma", gamma),
                ("circle.distribution", disc),
                ("circle.slope", slope),
            ],
            Command::Bits { lo, hi } => vec![("bits.lo", lo), ("bits.hi", hi)],
            Command::SearchBalanced {
                family,
                cells,
                candidates,
                budget,
                random,
            } => vec![
                ("search.family", family),
                ("search.cells", cells),
                ("search.candidates", candidates),
                ("search.budget", budget),
                ("search.random", random),
            ],
            Command::Verify { ids } => vec![("verify.ids", ids)],
            Command::Correlation | Command::Nonlocality | Command::Keys => Vec::new(),
        };
        pairs
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k, v)))
            .collect()
    }
}

/// Failure classes mapped onto exit codes.
pub enum Failure {
    Validation(String),
    Acceptance,
    Internal(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.to_string())
    }
}

impl From<subquantum::Error> for Failure {
    fn from(e: subquantum::Error) -> Self {
        match e {
            subquantum::Error::InvalidParameter { .. } | subquantum::Error::Parse { .. } => {
                Failure::Validation(e.to_string())
            }
            _ => Failure::Internal(e.to_string()),
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut layers = Layers::with_defaults();
    if let Ok(seed) = std::env::var(SEED_ENV) {
        layers
            .set("method.seed", &seed)
            .map_err(|_| Failure::Validation(format!("{SEED_ENV}: unusable seed `{seed}`")))?;
    }
    if let Some(path) = &cli.common.config {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Failure::Validation(format!("cannot read config {}: {e}", path.display()))
        })?;
        for (k, v) in config::parse_file(&text)? {
            layers.set(&k, &v)?;
        }
    }
    for raw in &cli.common.set {
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| ConfigError::new(raw.as_str(), "--set expects KEY=VALUE"))?;
        layers.set(k.trim(), v.trim())?;
    }
    for (k, v) in cli
        .common
        .overrides()
        .into_iter()
        .chain(cli.command.overrides())
    {
        layers.set(k, v)?;
    }
    Ok(RunConfig::resolve(&layers)?)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Command::Keys = cli.command {
        for (key, default, doc) in config::KEYS {
            println!(
                "{key:<24} {:<26} {doc}",
                if default.is_empty() {
                    "(unset)"
                } else {
                    default
                }
            );
        }
        return Ok(());
    }
    let cfg = load(&cli)?;
    let name = commands::name(&cli.command);
    commands::dispatch(&cli.command, name, &cfg)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Acceptance) => ExitCode::from(2),
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
