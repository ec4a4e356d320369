use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use isomono::{LatticePoint, Variant};
use isomono_cli::check::{self, Suite};
use isomono_cli::limit::{self, ContinuousConfig};
use isomono_cli::output::{emit, Format};
use isomono_cli::run::{self, Mode, RunArgs};
use isomono_cli::transform;
use isomono_cli::{CliError, CliResult, System, SystemConfig};

/// Isomonodromy transformations of linear difference systems.
///
/// Exit status: 0 success, 1 invariant violated, 2 validation failure,
/// 3 genericity abort, 4 tolerance not reached.
#[derive(Parser)]
#[command(name = "isomono", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flow a system to a lattice point and write the trajectory.
    Run {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum, default_value = "divisor")]
        mode: Mode,
        /// Lattice point k1,…,kn.
        #[arg(long, allow_hyphen_values = true)]
        target: LatticePoint,
        /// Bound on the per-step equation residuals.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the invariant suites and report pass/fail per check.
    Check {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        /// Replaces the bound of every tunable check.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate the lattice flow against the Schlesinger equations over ε-halvings.
    Limit {
        /// Continuous system JSON (residues `b`, poles `x`, optional `b_inf` and anchors `y`).
        #[arg(long)]
        system: Option<PathBuf>,
        /// Draw a random 2×2 continuous system with two poles instead.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 3)]
        halvings: u32,
        /// Pole displacement x1,…,xn; the lattice target is ⌊x/ε⌋.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        target: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Apply the lattice action shifting roots by κ and exponents by δ.
    Transform {
        #[command(flatten)]
        system: SystemArgs,
        /// One shift per root of det A(z), roots sorted by real then imaginary part.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        kappa: Vec<i64>,
        /// One shift per formal exponent.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        delta: Vec<i64>,
        /// Replaces the certificate bounds.
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args)]
struct SystemArgs {
    /// System configuration JSON.
    #[arg(long)]
    system: Option<PathBuf>,
    /// Seed of a random generic system (2×2, two factors, unless the configuration says otherwise).
    #[arg(long)]
    seed: Option<u64>,
    /// difference, q=VALUE or autonomous; overrides the configuration.
    #[arg(long, value_parser = parse_variant)]
    variant: Option<Variant>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to csv for a .csv output file, json otherwise.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl OutputArgs {
    fn format(&self) -> Format {
        Format::pick(self.format, self.out.as_deref())
    }
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse()
}

fn load_system(args: &SystemArgs) -> CliResult<System> {
    let cfg = match (&args.system, args.seed) {
        (Some(path), seed) => {
            let mut cfg = SystemConfig::load(path)?;
            if let Some(seed) = seed {
                if cfg.coefficients.is_some() || cfg.divisors.is_some() || cfg.factors.is_some() {
                    return Err(CliError::Validation("--seed applies only to seeded configurations".into()));
                }
                cfg.seed = Some(seed);
            }
            cfg
        }
        (None, Some(seed)) => SystemConfig::random(2, 2, seed),
        (None, None) => return Err(CliError::Validation("give --system or --seed".into())),
    };
    cfg.resolve(args.variant)
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { system, mode, target, tol, output } => {
            let sys = load_system(&system)?;
            let args = RunArgs { mode, target, tol, format: output.format(), out: output.out };
            run::execute(&sys, &args)
        }
        Command::Check { system, suite, tol, output } => {
            let sys = load_system(&system)?;
            let report = check::check(&sys, suite, tol);
            emit(output.out.as_ref(), &check::render(&report, output.format()))?;
            check::verdict(&report)
        }
        Command::Limit { system, seed, epsilon, halvings, target, output } => {
            let tol = isomono::Tolerances::default();
            let cfg = match (system, seed) {
                (Some(path), None) => ContinuousConfig::load(&path, &tol)?,
                (None, Some(seed)) => ContinuousConfig::random(seed),
                (Some(_), Some(_)) => return Err(CliError::Validation("give --system or --seed, not both".into())),
                (None, None) => return Err(CliError::Validation("give --system or --seed".into())),
            };
            let report = limit::limit(&cfg, epsilon, halvings, &target, &tol)?;
            emit(output.out.as_ref(), &limit::render(&report, output.format()))?;
            limit::verdict(&report)
        }
        Command::Transform { system, kappa, delta, tol, output } => {
            let sys = load_system(&system)?;
            let report = transform::transform(&sys, &kappa, &delta)?;
            emit(output.out.as_ref(), &transform::render(&report, output.format()))?;
            let c = &report.certificate;
            eprintln!(
                "certificate: root shift {:.3e}, exponent shift {:.3e}, A0 change {:.3e}",
                c.root_shift_error, c.exponent_shift_error, c.leading_change
            );
            transform::verdict(&report, tol)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
