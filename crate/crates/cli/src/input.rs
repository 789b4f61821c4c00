//! JSON problem descriptions. Every exact quantity is a string such as
//! `"3/4"` or `"1/2+sqrt(2)"`; floats are accepted only for the
//! superellipsoid exponent, which is never evaluated exactly.

use anisolattice::domains::{AxisBox, Domain, Ellipsoid, OracleDomain};
use anisolattice::scalar::parse_rational;
use anisolattice::{build_subspace, QuadScalar, Rational, SubspaceData};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceInput {
    pub n: usize,
    /// Squarefree radicand shared by all irrational entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u64>,
    /// Rows spanning F.
    pub basis: Vec<Vec<String>>,
}

impl SubspaceInput {
    pub fn build(&self) -> Result<SubspaceData, CliError> {
        let rows = self
            .basis
            .iter()
            .map(|row| row.iter().map(|s| parse_quad(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(build_subspace(rows, self.n, self.d)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainInput {
    /// `(x-c)^T M (x-c) < 1`.
    Ellipsoid { center: Vec<String>, shape: Vec<Vec<String>> },
    /// `|x-c|^2 < radius_sq`.
    Ball { center: Vec<String>, radius_sq: String },
    Box { lower: Vec<String>, upper: Vec<String> },
    /// `Σ |(x_i-c_i)/a_i|^power < 1`.
    Superellipsoid {
        center: Vec<String>,
        radii: Vec<String>,
        power: f64,
    },
}

impl DomainInput {
    pub fn build(&self) -> Result<Domain, CliError> {
        Ok(match self {
            DomainInput::Ellipsoid { center, shape } => {
                let center = parse_quads(center)?;
                let shape = shape.iter().map(|r| parse_rationals(r)).collect::<Result<_, _>>()?;
                Ellipsoid::new(center, shape)?.into()
            }
            DomainInput::Ball { center, radius_sq } => {
                Ellipsoid::ball(parse_quads(center)?, parse_rational(radius_sq)?)?.into()
            }
            DomainInput::Box { lower, upper } => {
                AxisBox::new(parse_rationals(lower)?, parse_rationals(upper)?)?.into()
            }
            DomainInput::Superellipsoid { center, radii, power } => {
                OracleDomain::superellipsoid(parse_rationals(center)?, parse_rationals(radii)?, *power)?.into()
            }
        })
    }

    pub fn unit_ball(n: usize) -> Self {
        DomainInput::Ball {
            center: vec!["0".into(); n],
            radius_sq: "1".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Count,
    Sweep,
    Fit,
    Spectral,
    Verify,
}

fn default_budget() -> u128 {
    anisolattice::counting::DEFAULT_BUDGET
}

fn default_samples() -> usize {
    anisolattice::asymptotics::DEFAULT_SAMPLES
}

/// A complete run description for `anisolattice run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub subspace: SubspaceInput,
    /// Defaults to the unit ball.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainInput>,
    pub eps_grid: Vec<String>,
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u128,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Magnetic potential for `spectral` mode; zero when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<String>>,
    /// Energies `λ/4π²` for `spectral` mode.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mu: Vec<String>,
}

impl ProblemSpec {
    pub fn eps_values(&self) -> Result<Vec<Rational>, CliError> {
        parse_rationals(&self.eps_grid)
    }

    pub fn domain(&self) -> DomainInput {
        self.domain
            .clone()
            .unwrap_or_else(|| DomainInput::unit_ball(self.subspace.n))
    }
}

pub fn parse_quad(s: &str) -> Result<QuadScalar, CliError> {
    Ok(s.trim().parse::<QuadScalar>()?)
}

pub fn parse_quads(v: &[String]) -> Result<Vec<QuadScalar>, CliError> {
    v.iter().map(|s| parse_quad(s)).collect()
}

pub fn parse_rationals(v: &[String]) -> Result<Vec<Rational>, CliError> {
    v.iter().map(|s| Ok(parse_rational(s.trim())?)).collect()
}

/// `"1/2,0,-3"` as a vector.
pub fn parse_rational_list(s: &str) -> Result<Vec<Rational>, CliError> {
    let parts: Vec<String> = s.split(',').map(str::to_string).collect();
    parse_rationals(&parts)
}

/// `"3:9"` as the dyadic grid `2^-3, ..., 2^-9`.
pub fn parse_dyadic(s: &str) -> Result<Vec<Rational>, CliError> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("dyadic range must look like 3:9, got {s:?}")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<u32>()
            .map_err(|e| CliError::Input(format!("bad dyadic exponent {x:?}: {e}")))
    };
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if lo > hi || hi > 62 {
        return Err(CliError::Input(format!("bad dyadic range {s:?}")));
    }
    Ok(anisolattice::asymptotics::dyadic_grid(lo, hi))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &std::path::Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subspace_json() {
        let s: SubspaceInput = serde_json::from_str(r#"{"n": 2, "basis": [["1", "1/2"]]}"#).unwrap();
        let data = s.build().unwrap();
        assert_eq!(data.r(), 1);
        assert_eq!(data.covolume_sq().to_string(), "5");
        assert!(serde_json::from_str::<SubspaceInput>(r#"{"n": 2, "basis": [["1", "x"]]}"#)
            .unwrap()
            .build()
            .is_err());
    }

    #[test]
    fn domain_json() {
        let d: DomainInput =
            serde_json::from_str(r#"{"type": "ball", "center": ["0", "1/2+sqrt(3)"], "radius_sq": "2"}"#).unwrap();
        assert_eq!(d.build().unwrap().dim(), 2);
        let d: DomainInput = serde_json::from_str(
            r#"{"type": "superellipsoid", "center": ["0", "0"], "radii": ["1", "2"], "power": 4}"#,
        )
        .unwrap();
        assert!(!d.build().unwrap().is_exact());
        assert!(serde_json::from_str::<DomainInput>(r#"{"type": "torus"}"#).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_dyadic("1:3").unwrap().len(), 3);
        assert!(parse_dyadic("3").is_err());
        assert_eq!(parse_rational_list("1/2, 0").unwrap().len(), 2);
    }
}
