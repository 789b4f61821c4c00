//! Serializable outputs. Every JSON report carries `schema_version`.

use anisolattice::asymptotics::{FitResult, LeadingTerm, SweepRecord};
use anisolattice::counting::CountReport;
use anisolattice::scalar::{format_rational, parse_rational};
use anisolattice::verify::VerifyReport;
use anisolattice::{Rational, SubspaceData, SCHEMA_VERSION};
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn strings(m: &[Vec<Rational>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(format_rational).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceReport {
    pub schema_version: u32,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub r: usize,
    pub d: u64,
    pub gamma: Vec<Vec<String>>,
    pub gamma_star: Vec<Vec<String>>,
    pub gamma_perp: Vec<Vec<String>>,
    pub covolume_sq: String,
    pub covolume: f64,
    pub projector_v: Vec<Vec<String>>,
}

impl From<&SubspaceData> for SubspaceReport {
    fn from(s: &SubspaceData) -> Self {
        let ints = |m: &[Vec<BigInt>]| -> Vec<Vec<String>> {
            m.iter().map(|r| r.iter().map(|v| v.to_string()).collect()).collect()
        };
        SubspaceReport {
            schema_version: SCHEMA_VERSION,
            n: s.n(),
            p: s.p(),
            q: s.q(),
            r: s.r(),
            d: s.d(),
            gamma: ints(s.v_basis()),
            gamma_star: strings(s.gamma_star().basis()),
            gamma_perp: ints(s.gamma_perp().basis()),
            covolume_sq: format_rational(s.covolume_sq()),
            covolume: s.covolume(),
            projector_v: strings(s.projector_v()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberVolume {
    pub gamma_star: Vec<i64>,
    pub volume: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeadingReport {
    pub schema_version: u32,
    pub epsilon: String,
    pub value: f64,
    pub stderr: f64,
    pub fibers: Vec<FiberVolume>,
}

impl LeadingReport {
    pub fn new(eps: &Rational, lt: &LeadingTerm) -> Self {
        LeadingReport {
            schema_version: SCHEMA_VERSION,
            epsilon: format_rational(eps),
            value: lt.value,
            stderr: lt.stderr,
            fibers: lt
                .slices
                .fibers
                .iter()
                .map(|f| FiberVolume {
                    gamma_star: f.label.clone(),
                    volume: f.volume,
                    stderr: f.stderr,
                })
                .collect(),
        }
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps_num: String,
    pub eps_den: String,
    pub count: Option<u64>,
    pub leading: f64,
    pub remainder: Option<f64>,
    pub predicted_exponent: f64,
    pub ambiguous_count: u64,
}

impl From<&SweepRecord> for SweepRow {
    fn from(r: &SweepRecord) -> Self {
        SweepRow {
            eps_num: r.epsilon.numer().to_string(),
            eps_den: r.epsilon.denom().to_string(),
            count: r.count,
            leading: r.leading,
            remainder: r.remainder,
            predicted_exponent: r.predicted_exponent,
            ambiguous_count: r.ambiguous,
        }
    }
}

impl SweepRow {
    pub fn to_record(&self) -> Result<SweepRecord, CliError> {
        let epsilon = parse_rational(&format!("{}/{}", self.eps_num, self.eps_den))?;
        Ok(SweepRecord {
            epsilon,
            count: self.count,
            leading: self.leading,
            leading_stderr: 0.0,
            remainder: self.remainder,
            predicted_exponent: self.predicted_exponent,
            ambiguous: self.ambiguous_count,
            error: None,
        })
    }
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepRow>, CliError> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(CliError::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub n_points: usize,
    /// ε values excluded from the fit (zero remainder or failed row).
    pub dropped: Vec<String>,
    /// Predicted ε-exponent of the remainder; the fitted slope should not
    /// exceed its magnitude.
    pub predicted_exponent: f64,
}

impl FitReport {
    pub fn new(fit: &FitResult, rows: &[SweepRecord]) -> Self {
        FitReport {
            schema_version: SCHEMA_VERSION,
            slope: fit.slope,
            intercept: fit.intercept,
            stderr_slope: fit.stderr_slope,
            n_points: fit.n_points,
            dropped: fit.dropped.iter().map(format_rational).collect(),
            predicted_exponent: rows.first().map_or(0.0, |r| r.predicted_exponent),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub schema_version: u32,
    pub epsilon: String,
    pub mu: String,
    pub lambda: f64,
    pub potential: Vec<String>,
    /// `#{k : λ_k < 4π²μ}`.
    pub counting_function: u64,
    /// Integer points of the equivalent ball under `T_ε`.
    pub lattice_count: u64,
    pub equivalent_ball_center: Vec<String>,
    pub counts_agree: bool,
    pub leading_term: f64,
    /// Slice-sum leading term of `B_√μ(A)`.
    pub lattice_leading_term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub schema_version: u32,
    pub subspace: SubspaceReport,
    pub verify: VerifyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RunResult {
    Count { counts: Vec<CountReport> },
    Sweep { rows: Vec<SweepRow> },
    Fit { rows: Vec<SweepRow>, fit: FitReport },
    Spectral { results: Vec<SpectralReport> },
    Verify { subspace: SubspaceReport, verify: VerifyReport },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    #[serde(flatten)]
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub schema_version: u32,
    pub error: String,
    pub kind: String,
    pub exit_code: i32,
}
