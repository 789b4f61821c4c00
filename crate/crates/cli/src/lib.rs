//! Command implementations behind the `anisolattice` binary.

pub mod input;
pub mod report;

use anisolattice::asymptotics::{
    fit_remainder, leading_term, sweep, sweep_record, LeadingOptions, SweepOptions, SweepRecord,
};
use anisolattice::counting::{count_points, CountOptions, CountReport};
use anisolattice::domains::Domain;
use anisolattice::scalar::format_rational;
use anisolattice::spectral::{counting_function, equivalent_ball, spectral_leading_term, SpectralConfig};
use anisolattice::verify::{verify_suite, VerifyOptions};
use anisolattice::{Rational, SubspaceData, SCHEMA_VERSION};

use input::{Mode, ProblemSpec};
use report::{
    FitReport, LeadingReport, RunReport, RunResult, SpectralReport, SubspaceReport, SweepRow, VerifyOutput,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] anisolattice::Error),
    #[error("io: {0}")]
    Io(String),
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(format!("csv: {e}"))
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use anisolattice::Error as E;
        match self {
            CliError::Input(_) => 2,
            CliError::Io(_) => 1,
            CliError::Core(e) => match e {
                E::BudgetExceeded { .. } => 3,
                E::FitDegenerate { .. } => 4,
                E::Overflow(_) | E::DivisionByZero => 1,
                _ => 2,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            2 => "input",
            3 => "budget",
            4 => "fit",
            _ => "internal",
        }
    }

    pub fn report(&self) -> report::ErrorReport {
        report::ErrorReport {
            schema_version: SCHEMA_VERSION,
            error: self.to_string(),
            kind: self.kind().to_string(),
            exit_code: self.exit_code(),
        }
    }
}

pub fn lattice_report(s: &SubspaceData) -> SubspaceReport {
    s.into()
}

pub fn count(
    domain: &Domain,
    s: &SubspaceData,
    eps: &Rational,
    budget: u128,
) -> Result<CountReport, CliError> {
    let c = count_points(domain, s, eps, &CountOptions { budget })?;
    Ok((&c).into())
}

pub fn leading(
    domain: &Domain,
    s: &SubspaceData,
    eps: &Rational,
    opts: &LeadingOptions,
) -> Result<LeadingReport, CliError> {
    Ok(LeadingReport::new(eps, &leading_term(domain, s, eps, opts)?))
}

/// Sweep rows for a grid; a single ε is allowed here and produces one row.
pub fn sweep_rows(
    domain: &Domain,
    s: &SubspaceData,
    grid: &[Rational],
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>, CliError> {
    match grid {
        [] => Err(CliError::Input("empty ε grid".into())),
        [eps] => Ok(vec![sweep_record(domain, s, eps, opts)?]),
        _ => Ok(sweep(domain, s, grid, opts)?),
    }
}

pub fn fit(records: &[SweepRecord]) -> Result<FitReport, CliError> {
    Ok(FitReport::new(&fit_remainder(records)?, records))
}

pub fn spectral(
    s: &SubspaceData,
    potential: Vec<Rational>,
    eps: Rational,
    mu: Rational,
    budget: u128,
) -> Result<SpectralReport, CliError> {
    let cfg = SpectralConfig::new(s, potential, eps, mu)?;
    let opts = CountOptions { budget };
    let n = counting_function(&cfg, &opts)?;
    let (lattice_count, center, lattice_leading) = if cfg.mu > Rational::from_integer(0.into()) {
        let ball = equivalent_ball(&cfg)?;
        let center: Vec<String> = ball.center().iter().map(ToString::to_string).collect();
        let count = count_points(&ball.into(), s, &cfg.eps, &opts)?.total;
        let centered = anisolattice::domains::Ellipsoid::ball(cfg.potential.clone(), cfg.mu.clone())?;
        let lead = leading_term(&centered.into(), s, &cfg.eps, &LeadingOptions::default())?.value;
        (count, center, lead)
    } else {
        (0, Vec::new(), 0.0)
    };
    Ok(SpectralReport {
        schema_version: SCHEMA_VERSION,
        epsilon: format_rational(&cfg.eps),
        mu: format_rational(&cfg.mu),
        lambda: cfg.lambda(),
        potential: cfg.potential.iter().map(format_rational).collect(),
        counting_function: n,
        lattice_count,
        equivalent_ball_center: center,
        counts_agree: n == lattice_count,
        leading_term: spectral_leading_term(&cfg)?,
        lattice_leading_term: lattice_leading,
    })
}

pub fn verify(
    s: &SubspaceData,
    domain: Option<Domain>,
    eps: Rational,
    budget: u128,
) -> VerifyOutput {
    let opts = VerifyOptions {
        domain,
        eps,
        budget,
        ..Default::default()
    };
    VerifyOutput {
        schema_version: SCHEMA_VERSION,
        subspace: s.into(),
        verify: verify_suite(s, &opts),
    }
}

/// Executes a [`ProblemSpec`].
pub fn run(spec: &ProblemSpec) -> Result<RunReport, CliError> {
    let s = spec.subspace.build()?;
    let domain = spec.domain().build()?;
    let grid = spec.eps_values()?;
    if grid.is_empty() {
        return Err(CliError::Input("eps_grid is empty".into()));
    }
    let sweep_opts = SweepOptions {
        count: CountOptions { budget: spec.budget },
        leading: LeadingOptions {
            samples: spec.samples,
            seed: spec.seed,
            ..Default::default()
        },
    };
    let result = match spec.mode {
        Mode::Count => RunResult::Count {
            counts: grid
                .iter()
                .map(|e| count(&domain, &s, e, spec.budget))
                .collect::<Result<_, _>>()?,
        },
        Mode::Sweep => RunResult::Sweep {
            rows: sweep_rows(&domain, &s, &grid, &sweep_opts)?
                .iter()
                .map(SweepRow::from)
                .collect(),
        },
        Mode::Fit => {
            anisolattice::asymptotics::check_grid(&grid)?;
            let records = sweep_rows(&domain, &s, &grid, &sweep_opts)?;
            RunResult::Fit {
                rows: records.iter().map(SweepRow::from).collect(),
                fit: fit(&records)?,
            }
        }
        Mode::Spectral => {
            let potential = match &spec.potential {
                Some(a) => input::parse_rationals(a)?,
                None => vec![Rational::from_integer(0.into()); s.n()],
            };
            if spec.mu.is_empty() {
                return Err(CliError::Input("spectral mode needs at least one mu".into()));
            }
            let mus = input::parse_rationals(&spec.mu)?;
            let mut results = Vec::new();
            for e in &grid {
                for mu in &mus {
                    results.push(spectral(&s, potential.clone(), e.clone(), mu.clone(), spec.budget)?);
                }
            }
            RunResult::Spectral { results }
        }
        Mode::Verify => {
            let out = verify(&s, Some(domain), grid[0].clone(), spec.budget);
            RunResult::Verify {
                subspace: out.subspace,
                verify: out.verify,
            }
        }
    };
    Ok(RunReport {
        schema_version: SCHEMA_VERSION,
        result,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(json: &str) -> ProblemSpec {
        serde_json::from_str(json).unwrap()
    }

    #[test]
    fn verify_rational_line() {
        let r = run(&spec(
            r#"{"subspace": {"n": 2, "basis": [["1", "1/2"]]}, "eps_grid": ["1/2"], "mode": "verify"}"#,
        ))
        .unwrap();
        let RunResult::Verify { subspace, verify } = r.result else {
            panic!("wrong mode")
        };
        assert_eq!(subspace.gamma, vec![vec!["2".to_string(), "1".to_string()]]);
        assert_eq!(subspace.covolume_sq, "5");
        assert!(verify.all_passed, "{:?}", verify.checks);
    }

    #[test]
    fn count_mode() {
        let r = run(&spec(
            r#"{"subspace": {"n": 2, "basis": [["1", "0"]]}, "eps_grid": ["1/2"], "mode": "count"}"#,
        ))
        .unwrap();
        let RunResult::Count { counts } = r.result else {
            panic!("wrong mode")
        };
        assert_eq!(counts[0].total, 3);
    }

    #[test]
    fn spectral_mode() {
        let r = run(&spec(
            r#"{"subspace": {"n": 2, "basis": [["1", "1/2"]]}, "eps_grid": ["1/2"], "mode": "spectral",
                "potential": ["1/2", "0"], "mu": ["1"]}"#,
        ))
        .unwrap();
        let RunResult::Spectral { results } = r.result else {
            panic!("wrong mode")
        };
        assert_eq!(results[0].counting_function, 6);
        assert!(results[0].counts_agree);
    }

    #[test]
    fn error_codes() {
        let budget = spec(
            r#"{"subspace": {"n": 2, "basis": []}, "eps_grid": ["1/1000000"], "mode": "count", "budget": 10}"#,
        );
        assert_eq!(run(&budget).unwrap_err().exit_code(), 3);
        let short = spec(
            r#"{"subspace": {"n": 2, "basis": [["1", "0"]]}, "eps_grid": ["1/2", "1/4"], "mode": "fit"}"#,
        );
        assert_eq!(run(&short).unwrap_err().exit_code(), 2);
        let bad = spec(r#"{"subspace": {"n": 2, "basis": [["1", "0"]]}, "eps_grid": ["-1"], "mode": "count"}"#);
        assert_eq!(run(&bad).unwrap_err().exit_code(), 2);
    }
}
