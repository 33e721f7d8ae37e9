//! Command-line driver: validate tower specs, compute break numbers,
//! emit the scaffold, verify every claim against the norm oracle, and
//! generate spec files for the known families. Fixed (spec, seed,
//! precision) inputs produce byte-identical output.

mod report;
mod specfile;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use report::{Emitter, Format};
use scaffold_core::base_field::{LaurentSeries, SeriesCtx};
use scaffold_core::error::{Error, Result};
use scaffold_core::examples::{
    biquadratic_reduce, cyclic_spec, unit_root_extension, weakly_ramified_spec,
};
use scaffold_core::ramification::{breaks_from_spec, check_error_bound};
use scaffold_core::scaffold::{full_verification, Scaffold, VerificationOptions};
use scaffold_core::tower::{build_tower, TowerSpec};

#[derive(Parser)]
#[command(
    name = "gscaffold",
    version,
    about = "Exact arithmetic for elementary abelian towers over F_q((t)): \
             construction, scaffolding, and oracle-checked valuations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Table,
    Records,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Format {
        match f {
            FormatArg::Table => Format::Table,
            FormatArg::Records => Format::Records,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// Tower spec file
    #[arg(long)]
    spec: PathBuf,
    /// Override the spec file's working precision
    #[arg(long)]
    precision: Option<i64>,
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
}

#[derive(Subcommand)]
enum Command {
    /// Check every spec invariant and the error term bound
    Validate(CommonArgs),
    /// Break numbers three ways: closed formulas, first principles via
    /// the norm oracle, and the piecewise-linear conversion
    Breaks {
        #[command(flatten)]
        common: CommonArgs,
        /// Measure every nonidentity group element, not just one
        /// representative per layer
        #[arg(long)]
        exhaustive: bool,
    },
    /// Emit the scaffold: both matrices, the normalizers, and the
    /// group-algebra basis coefficients
    Scaffold(CommonArgs),
    /// Verify all scaffold claims against the norm oracle on random
    /// elements
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random elements to test (the canonical element is
        /// always included)
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long)]
        exhaustive: bool,
    },
    /// Emit a spec file for one of the known families
    Example {
        #[command(subcommand)]
        kind: ExampleKind,
    },
}

#[derive(Args)]
struct ExampleCommon {
    #[arg(long, default_value_t = specfile::DEFAULT_PRECISION)]
    precision: i64,
    /// Write the spec here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ExampleKind {
    /// Degree-p cyclic tower with x^p - x = t^-b
    Cyclic {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        f: usize,
        #[arg(long)]
        b: i64,
        #[command(flatten)]
        common: ExampleCommon,
    },
    /// Reduce biquadratic data (beta, beta1) to a near one-dimensional
    /// spec (p = 2; series literals use the spec file grammar)
    Biquadratic {
        #[arg(long)]
        beta: String,
        #[arg(long)]
        beta1: String,
        #[arg(long, default_value_t = 1)]
        f: usize,
        #[command(flatten)]
        common: ExampleCommon,
    },
    /// K(y) with y^q - y = t^-b for q = p^fsub, rewritten on standard
    /// generators
    Unitroot {
        #[arg(long)]
        p: u64,
        /// Residue field degree (fsub must divide f)
        #[arg(long)]
        f: usize,
        #[arg(long)]
        fsub: usize,
        #[arg(long)]
        b: i64,
        #[command(flatten)]
        common: ExampleCommon,
    },
    /// Fully and weakly ramified tower (b = 1, unit omegas)
    Weak {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        n: usize,
        /// Residue field degree; defaults to n + 1
        #[arg(long)]
        f: Option<usize>,
        /// Error terms for layers 1..=n (series literals; default zero)
        #[arg(long = "eps")]
        eps: Vec<String>,
        #[command(flatten)]
        common: ExampleCommon,
    },
}

fn module_of(e: &Error) -> &'static str {
    match e {
        Error::NonzeroUndetectable { .. } | Error::DivisionByZero | Error::NoSolution => {
            "base_field"
        }
        Error::InvalidSpec(_) | Error::PrecisionLoss(_) => "tower",
        Error::InvalidInput(_) => "cli",
        Error::LemmaViolation { .. }
        | Error::AssumptionFailed { .. }
        | Error::Mismatch { .. }
        | Error::NotOneUnit
        | Error::IdentityFailed(_) => "scaffold",
    }
}

fn load_spec(common: &CommonArgs) -> Result<TowerSpec> {
    let text = std::fs::read_to_string(&common.spec)
        .map_err(|e| Error::InvalidInput(format!("cannot read {:?}: {e}", common.spec)))?;
    specfile::parse_spec(&text, common.precision)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Validate(common) => {
            let spec = load_spec(&common)?;
            let mut em = Emitter::new(common.format.into());
            em.meta("validate", &spec, &[]);
            spec.validate()?;
            let breaks = breaks_from_spec(&spec)?;
            let bound = check_error_bound(&spec, &breaks)?;
            em.bound_reports(&bound);
            em.summary(true);
            print!("{}", em.out);
            Ok(true)
        }
        Command::Breaks { common, exhaustive } => {
            let spec = load_spec(&common)?;
            let mut em = Emitter::new(common.format.into());
            em.meta("breaks", &spec, &[]);
            let tower = build_tower(spec)?;
            let sc = Scaffold::build(&tower)?;
            em.break_rows(&sc.breaks);
            let coverage = if exhaustive {
                scaffold_core::ramification::BreakCoverage::Exhaustive
            } else {
                scaffold_core::ramification::BreakCoverage::Generators
            };
            let direct = scaffold_core::ramification::breaks_direct(&tower, &sc.pi, coverage)?;
            let formula: Vec<i64> = sc
                .breaks
                .distinct_lower_with_orders()
                .iter()
                .map(|&(v, _)| v)
                .collect();
            let direct_vals: Vec<i64> = direct.iter().map(|&(v, _)| v).collect();
            let matches = formula == direct_vals;
            em.direct_breaks(&direct, matches);
            let knots = sc.breaks.distinct_lower_with_orders();
            let upper = scaffold_core::ramification::herbrand_lower_to_upper(&knots)?;
            let upper_knots: Vec<(i64, u64)> = upper
                .iter()
                .zip(knots.iter())
                .map(|(&u, &(_, o))| (u, o))
                .collect();
            let round_trip = scaffold_core::ramification::herbrand_upper_to_lower(&upper_knots)?
                == knots.iter().map(|&(b, _)| b).collect::<Vec<_>>();
            let herbrand_ok = upper == sc.breaks.distinct_upper();
            em.herbrand(&upper, herbrand_ok, round_trip);
            let pass = matches && herbrand_ok && round_trip;
            em.summary(pass);
            print!("{}", em.out);
            Ok(pass)
        }
        Command::Scaffold(common) => {
            let spec = load_spec(&common)?;
            let mut em = Emitter::new(common.format.into());
            em.meta("scaffold", &spec, &[]);
            let tower = build_tower(spec)?;
            let sc = Scaffold::build(&tower)?;
            em.scaffold(&tower, &sc);
            em.summary(true);
            print!("{}", em.out);
            Ok(true)
        }
        Command::Verify {
            common,
            seed,
            trials,
            exhaustive,
        } => {
            let spec = load_spec(&common)?;
            let mut em = Emitter::new(common.format.into());
            em.meta(
                "verify",
                &spec,
                &[("seed", seed.to_string()), ("trials", trials.to_string())],
            );
            let tower = build_tower(spec)?;
            let opts = VerificationOptions {
                trials,
                exhaustive_breaks: exhaustive,
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let report = full_verification(&tower, &opts, &mut rng)?;
            em.verification(&tower, &report);
            em.summary(report.all_pass);
            print!("{}", em.out);
            Ok(report.all_pass)
        }
        Command::Example { kind } => {
            let (spec, common) = match kind {
                ExampleKind::Cyclic { p, f, b, common } => {
                    let ctx = SeriesCtx::new(p, f, common.precision)?;
                    let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -b);
                    let spec = cyclic_spec(&ctx, beta, common.precision);
                    spec.validate()?;
                    (spec, common)
                }
                ExampleKind::Biquadratic {
                    beta,
                    beta1,
                    f,
                    common,
                } => {
                    let ctx = SeriesCtx::new(2, f, common.precision)?;
                    let beta = specfile::parse_series(&ctx, &beta)?;
                    let beta1 = specfile::parse_series(&ctx, &beta1)?;
                    let (spec, _trace) = biquadratic_reduce(&beta, &beta1)?;
                    (spec, common)
                }
                ExampleKind::Unitroot {
                    p,
                    f,
                    fsub,
                    b,
                    common,
                } => {
                    let ctx = SeriesCtx::new(p, f, common.precision)?;
                    let beta = LaurentSeries::monomial(&ctx, ctx.fq.one(), -b);
                    let spec = unit_root_extension(&ctx, fsub, beta)?;
                    (spec, common)
                }
                ExampleKind::Weak {
                    p,
                    n,
                    f,
                    eps,
                    common,
                } => {
                    let f = f.unwrap_or(n + 1);
                    let ctx = SeriesCtx::new(p, f, common.precision)?;
                    let epsilons = if eps.is_empty() {
                        None
                    } else {
                        if eps.len() != n {
                            return Err(Error::InvalidInput(format!(
                                "need {n} --eps literals (layers 1..={n}), got {}",
                                eps.len()
                            )));
                        }
                        let mut list = vec![LaurentSeries::zero(&ctx)];
                        for e in &eps {
                            list.push(specfile::parse_series(&ctx, e)?);
                        }
                        Some(list)
                    };
                    let spec = weakly_ramified_spec(&ctx, n, None, epsilons)?;
                    (spec, common)
                }
            };
            let text = specfile::write_spec(&spec);
            match &common.out {
                Some(path) => std::fs::write(path, &text)
                    .map_err(|e| Error::InvalidInput(format!("cannot write {path:?}: {e}")))?,
                None => print!("{text}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            println!(
                "error|code={}|module={}|detail={}",
                e.code(),
                module_of(&e),
                e.to_string().replace('\n', " ")
            );
            ExitCode::FAILURE
        }
    }
}
