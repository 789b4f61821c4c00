use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anisolattice::asymptotics::{LeadingOptions, SweepOptions};
use anisolattice::counting::{CountOptions, DEFAULT_BUDGET};
use anisolattice::scalar::parse_rational;
use anisolattice_cli::input::{parse_dyadic, parse_rational_list, read_json, DomainInput, ProblemSpec, SubspaceInput};
use anisolattice_cli::report::{read_csv, write_csv, RunResult, SweepRow};
use anisolattice_cli::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Integer points in anisotropically expanded domains, their asymptotics, and
/// the equivalent magnetic Laplacian eigenvalue count on the torus.
#[derive(Parser)]
#[command(name = "anisolattice", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "ANISOLATTICE_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Γ, Γ*, Γ⊥, |Q|² and the projection onto span(Γ).
    Lattice(SubspaceArg),
    /// Exact integer-point count at one ε, split by fiber.
    Count(CountArgs),
    /// Leading term of the count at one ε.
    Leading(LeadingArgs),
    /// Count, leading term and remainder over an ε grid, as CSV.
    Sweep(SweepArgs),
    /// Log-log fit of |remainder| against 1/ε from a sweep CSV.
    Fit(FitArgs),
    /// Eigenvalue count of the magnetic Laplacian and its lattice equivalent.
    Spectral(SpectralArgs),
    /// Exact identity checks for a subspace.
    Verify(VerifyArgs),
    /// Execute a JSON problem file.
    Run(RunArgs),
}

#[derive(Args)]
struct SubspaceArg {
    /// JSON file: {"n": 2, "d": 2, "basis": [["1", "sqrt(2)"]]}.
    #[arg(long)]
    subspace: PathBuf,
}

#[derive(Args)]
struct DomainArg {
    /// JSON domain file; the unit ball when omitted.
    #[arg(long)]
    domain: Option<PathBuf>,
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    subspace: SubspaceArg,
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long)]
    eps: String,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Args)]
struct McArgs {
    /// Monte Carlo samples per fiber for non-ellipsoidal domains.
    #[arg(long, default_value_t = anisolattice::asymptotics::DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct LeadingArgs {
    #[command(flatten)]
    subspace: SubspaceArg,
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long)]
    eps: String,
    #[command(flatten)]
    mc: McArgs,
}

#[derive(Args)]
struct GridArgs {
    /// Comma-separated ε values, strictly decreasing.
    #[arg(long, conflicts_with = "dyadic")]
    eps_grid: Option<String>,
    /// Dyadic grid `a:b` meaning 2^-a, ..., 2^-b.
    #[arg(long)]
    dyadic: Option<String>,
}

impl GridArgs {
    fn values(&self) -> Result<Vec<anisolattice::Rational>, CliError> {
        match (&self.eps_grid, &self.dyadic) {
            (Some(g), None) => parse_rational_list(g),
            (None, Some(d)) => parse_dyadic(d),
            _ => Err(CliError::Input("give exactly one of --eps-grid and --dyadic".into())),
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    subspace: SubspaceArg,
    #[command(flatten)]
    domain: DomainArg,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    #[command(flatten)]
    mc: McArgs,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Sweep CSV to fit.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Args)]
struct SpectralArgs {
    #[command(flatten)]
    subspace: SubspaceArg,
    /// Magnetic potential, comma separated; zero when omitted.
    #[arg(long = "A", value_name = "A")]
    potential: Option<String>,
    #[arg(long)]
    eps: String,
    /// Energy λ/4π².
    #[arg(long)]
    mu: String,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    report: ReportFormat,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    subspace: SubspaceArg,
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long, default_value = "1/2")]
    eps: String,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u128,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Directory for report.json (and sweep.csv for sweep/fit); stdout when
    /// omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    stdout_result(writeln!(io::stdout().lock(), "{text}"))
}

/// A closed downstream pipe (`| head`) is not an error.
fn stdout_result(r: io::Result<()>) -> Result<(), CliError> {
    match r {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Io(e.to_string())),
        _ => Ok(()),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn load_domain(arg: &DomainArg, n: usize) -> Result<anisolattice::domains::Domain, CliError> {
    match &arg.domain {
        Some(p) => read_json::<DomainInput>(p)?.build(),
        None => DomainInput::unit_ball(n).build(),
    }
}

fn load_subspace(arg: &SubspaceArg) -> Result<anisolattice::SubspaceData, CliError> {
    read_json::<SubspaceInput>(&arg.subspace)?.build()
}

fn rational(s: &str) -> Result<anisolattice::Rational, CliError> {
    Ok(parse_rational(s.trim())?)
}

fn execute(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Lattice(a) => print_json(&anisolattice_cli::lattice_report(&load_subspace(&a)?)),
        Command::Count(a) => {
            let s = load_subspace(&a.subspace)?;
            let d = load_domain(&a.domain, s.n())?;
            print_json(&anisolattice_cli::count(&d, &s, &rational(&a.eps)?, a.budget)?)
        }
        Command::Leading(a) => {
            let s = load_subspace(&a.subspace)?;
            let d = load_domain(&a.domain, s.n())?;
            let opts = LeadingOptions {
                samples: a.mc.samples,
                seed: a.mc.seed,
                ..Default::default()
            };
            print_json(&anisolattice_cli::leading(&d, &s, &rational(&a.eps)?, &opts)?)
        }
        Command::Sweep(a) => {
            let s = load_subspace(&a.subspace)?;
            let d = load_domain(&a.domain, s.n())?;
            let opts = SweepOptions {
                count: CountOptions { budget: a.budget },
                leading: LeadingOptions {
                    samples: a.mc.samples,
                    seed: a.mc.seed,
                    ..Default::default()
                },
            };
            let rows: Vec<SweepRow> = anisolattice_cli::sweep_rows(&d, &s, &a.grid.values()?, &opts)?
                .iter()
                .map(SweepRow::from)
                .collect();
            match a.out {
                Some(p) => {
                    let f = File::create(&p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                    write_csv(&rows, BufWriter::new(f))
                }
                None => {
                    let mut buf = Vec::new();
                    write_csv(&rows, &mut buf)?;
                    stdout_result(io::stdout().lock().write_all(&buf))
                }
            }
        }
        Command::Fit(a) => {
            let f = File::open(&a.input).map_err(|e| CliError::Io(format!("{}: {e}", a.input.display())))?;
            let records = read_csv(f)?
                .iter()
                .map(SweepRow::to_record)
                .collect::<Result<Vec<_>, _>>()?;
            print_json(&anisolattice_cli::fit(&records)?)
        }
        Command::Spectral(a) => {
            let s = load_subspace(&a.subspace)?;
            let potential = match &a.potential {
                Some(p) => parse_rational_list(p)?,
                None => vec![anisolattice::Rational::from_integer(0.into()); s.n()],
            };
            let r = anisolattice_cli::spectral(&s, potential, rational(&a.eps)?, rational(&a.mu)?, a.budget)?;
            match a.report {
                ReportFormat::Json => print_json(&r),
                ReportFormat::Text => stdout_result(writeln!(
                    io::stdout().lock(),
                    "N_eps(4π²·{}) = {}\nlattice count of equivalent ball = {} (center {})\nleading term = {} (lattice {})",
                    r.mu,
                    r.counting_function,
                    r.lattice_count,
                    r.equivalent_ball_center.join(", "),
                    r.leading_term,
                    r.lattice_leading_term
                )),
            }
        }
        Command::Verify(a) => {
            let s = load_subspace(&a.subspace)?;
            let d = match &a.domain.domain {
                Some(_) => Some(load_domain(&a.domain, s.n())?),
                None => None,
            };
            print_json(&anisolattice_cli::verify(&s, d, rational(&a.eps)?, a.budget))
        }
        Command::Run(a) => {
            let spec: ProblemSpec = read_json(&a.spec)?;
            let report = anisolattice_cli::run(&spec)?;
            match a.out {
                None => print_json(&report),
                Some(dir) => {
                    std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                    if let RunResult::Sweep { rows } | RunResult::Fit { rows, .. } = &report.result {
                        let mut buf = Vec::new();
                        write_csv(rows, &mut buf)?;
                        write_file(&dir.join("sweep.csv"), &buf)?;
                    }
                    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Io(e.to_string()))?;
                    write_file(&dir.join("report.json"), text.as_bytes())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: could not configure {t} threads: {e}");
        }
    }
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let report = e.report();
            let text = serde_json::to_string(&report).unwrap_or_else(|_| e.to_string());
            let _ = writeln!(io::stderr(), "{text}");
            ExitCode::from(u8::try_from(report.exit_code).unwrap_or(1))
        }
    }
}
