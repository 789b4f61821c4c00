//! Leading terms, remainder exponents, ε-sweeps and log-log fits.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::counting::{check_epsilon, count_points, CountOptions};
use crate::domains::{bounding_box, slice_volume_mc, AxisBox, Domain, Ellipsoid, EllipsoidSlicer, OracleDomain};
use crate::error::{Error, Result};
use crate::lattice::SubspaceData;
use crate::linalg;
use crate::scalar::{format_rational, rational_to_f64, QuadScalar, Rational};

pub const DEFAULT_SAMPLES: usize = 200_000;
pub const DEFAULT_MAX_FIBERS: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeadingOptions {
    /// Monte Carlo samples per fiber for non-ellipsoidal domains.
    pub samples: usize,
    pub seed: u64,
    pub max_fibers: u128,
}

impl Default for LeadingOptions {
    fn default() -> Self {
        LeadingOptions {
            samples: DEFAULT_SAMPLES,
            seed: 0,
            max_fibers: DEFAULT_MAX_FIBERS,
        }
    }
}

/// One fiber with a non-empty slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberSlice {
    /// Coordinates of `γ*` in the dual basis.
    pub label: Vec<i64>,
    pub volume: f64,
    pub stderr: f64,
}

/// `Σ_{γ*} vol_{n-r}(P_{γ*} ∩ S)`, independent of ε.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSum {
    pub total: f64,
    pub stderr: f64,
    pub fibers: Vec<FiberSlice>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeadingTerm {
    pub value: f64,
    /// Zero for closed-form slices.
    pub stderr: f64,
    pub slices: SliceSum,
}

/// Range of `<x, l>` over the box, rounded inward to integers.
fn pairing_range(bb: &AxisBox, l: &[BigInt]) -> (BigInt, BigInt) {
    let mut lo = Rational::zero();
    let mut hi = Rational::zero();
    for ((a, b), c) in bb.lower().iter().zip(bb.upper()).zip(l) {
        let c = Rational::from_integer(c.clone());
        let (x, y) = (a * &c, b * &c);
        if x <= y {
            lo += x;
            hi += y;
        } else {
            lo += y;
            hi += x;
        }
    }
    (lo.ceil().to_integer(), hi.floor().to_integer())
}

/// Labels of the fibers meeting `{(x-c)^T M (x-c) < 1}`. In dual
/// coordinates the fiber minimum is `(l - l0)^T A (l - l0)` with
/// `A = B* S B*^T`, `S` the Schur complement of `M` along `Γ⊥` and
/// `l0_j = <c, ℓ_j>`.
fn ellipsoid_fibers(e: &Ellipsoid, subspace: &SubspaceData, max: u128) -> Result<Vec<Vec<i64>>> {
    let n = subspace.n();
    let m = e.shape();
    let w = subspace.gamma_perp().rational_basis();
    let schur = if w.is_empty() {
        m.clone()
    } else {
        let wm = linalg::mat_mul(&w, m);
        let inv = linalg::inverse(&linalg::mat_mul(&wm, &linalg::transpose(&w, n)))
            .ok_or(Error::NotPositiveDefinite)?;
        let corr = linalg::mat_mul(&linalg::transpose(&wm, n), &linalg::mat_mul(&inv, &wm));
        m.iter()
            .zip(&corr)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
            .collect()
    };
    let dual = subspace.gamma_star().basis();
    let a = linalg::mat_mul(&linalg::mat_mul(dual, &schur), &linalg::transpose(dual, n));
    let a: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect();
    let center: Vec<f64> = e.center().iter().map(QuadScalar::to_f64).collect();
    let l0: Vec<f64> = subspace
        .v_basis()
        .iter()
        .map(|l| l.iter().zip(&center).map(|(v, c)| v.to_f64().unwrap_or(f64::NAN) * c).sum())
        .collect();
    let limit = usize::try_from(max).unwrap_or(usize::MAX);
    linalg::integer_points_in_ellipsoid(&a, &l0, 1.0, limit).ok_or(Error::BudgetExceeded {
        candidates: max.saturating_add(1),
        budget: max,
    })
}

/// Every `γ*` whose fiber can meet the domain, as dual coordinates.
pub(crate) fn candidate_fibers(domain: &Domain, subspace: &SubspaceData, max: u128) -> Result<Vec<Vec<i64>>> {
    if let Domain::Ellipsoid(e) = domain {
        return ellipsoid_fibers(e, subspace, max);
    }
    let bb = bounding_box(domain);
    let mut ranges = Vec::new();
    let mut total: u128 = 1;
    for l in subspace.v_basis() {
        let (lo, hi) = pairing_range(&bb, l);
        if lo > hi {
            return Ok(Vec::new());
        }
        let width = (&hi - &lo + BigInt::one()).to_u128().unwrap_or(u128::MAX);
        total = total.saturating_mul(width);
        if total > max {
            return Err(Error::BudgetExceeded {
                candidates: total,
                budget: max,
            });
        }
        let lo = lo.to_i64().ok_or_else(|| Error::Overflow("fiber label".into()))?;
        let hi = hi.to_i64().ok_or_else(|| Error::Overflow("fiber label".into()))?;
        ranges.push((lo, hi));
    }
    let mut out = vec![Vec::new()];
    for (lo, hi) in ranges {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<i64>| {
                (lo..=hi).map(move |c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    Ok(out)
}

/// Sums slice volumes over all fibers meeting the domain. Ellipsoids use the
/// closed form; other domains are sampled with one seed stream per fiber.
pub fn slice_sum(domain: &Domain, subspace: &SubspaceData, opts: &LeadingOptions) -> Result<SliceSum> {
    if domain.dim() != subspace.n() {
        return Err(Error::DimensionMismatch {
            expected: subspace.n(),
            found: domain.dim(),
        });
    }
    let labels = candidate_fibers(domain, subspace, opts.max_fibers)?;
    let point = |label: &[i64]| {
        let c: Vec<Rational> = label.iter().map(|&v| Rational::from_integer(v.into())).collect();
        subspace.gamma_star().combination(&c)
    };
    let mut fibers = Vec::new();
    match domain {
        Domain::Ellipsoid(e) => {
            let slicer = EllipsoidSlicer::new(e, subspace)?;
            fibers = labels
                .into_par_iter()
                .filter_map(|label| {
                    let volume = slicer.volume(&point(&label));
                    (volume > 0.0).then_some(FiberSlice { label, volume, stderr: 0.0 })
                })
                .collect();
        }
        Domain::Box(_) | Domain::Oracle(_) => {
            let oracle = match domain {
                Domain::Box(b) => OracleDomain::from_box(b),
                Domain::Oracle(o) => o.clone(),
                Domain::Ellipsoid(_) => unreachable!(),
            };
            for (i, label) in labels.into_iter().enumerate() {
                let seed = opts.seed.wrapping_add((i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let (volume, stderr) = slice_volume_mc(&oracle, &point(&label), subspace, opts.samples, seed)?;
                if volume > 0.0 {
                    fibers.push(FiberSlice { label, volume, stderr });
                }
            }
        }
    }
    Ok(SliceSum {
        total: fibers.iter().map(|f| f.volume).sum(),
        stderr: fibers.iter().map(|f| f.stderr * f.stderr).sum::<f64>().sqrt(),
        fibers,
    })
}

/// `ε^{-q}` as a float; exact when ε is a power of two.
fn inverse_power(eps: &Rational, q: usize) -> f64 {
    rational_to_f64(&eps.recip().pow(q as i32))
}

/// Scales a precomputed slice sum to the leading term at `eps`.
pub fn scale_leading(sum: &SliceSum, subspace: &SubspaceData, eps: &Rational) -> Result<LeadingTerm> {
    check_epsilon(eps)?;
    let factor = inverse_power(eps, subspace.q());
    let covol = subspace.covolume();
    Ok(LeadingTerm {
        value: sum.total / covol * factor,
        stderr: sum.stderr / covol * factor,
        slices: sum.clone(),
    })
}

/// `ε^{-q} |Q|^{-1} Σ_{γ*} vol_{n-r}(P_{γ*} ∩ S)`.
pub fn leading_term(
    domain: &Domain,
    subspace: &SubspaceData,
    eps: &Rational,
    opts: &LeadingOptions,
) -> Result<LeadingTerm> {
    check_epsilon(eps)?;
    scale_leading(&slice_sum(domain, subspace, opts)?, subspace, eps)
}

/// Exponent `e` with `|n_ε(S) - leading| = O(ε^e)`.
pub fn remainder_exponent(p: usize, r: usize, q: usize, strictly_convex: bool) -> Rational {
    let rat = |a: usize, b: usize| Rational::new(BigInt::from(a), BigInt::from(b));
    let gap = p - r;
    let k = if !strictly_convex {
        rat(1, gap + 1)
    } else if q <= 2 * gap + 1 {
        rat(q + 1, 2 * (gap + 1))
    } else {
        rat(2 * q, q + 1 + 2 * gap)
    };
    k - Rational::from_integer(q.into())
}

pub fn predicted_exponent(subspace: &SubspaceData, strictly_convex: bool) -> f64 {
    rational_to_f64(&remainder_exponent(
        subspace.p(),
        subspace.r(),
        subspace.q(),
        strictly_convex,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub epsilon: Rational,
    /// `None` when counting failed; see `error`.
    pub count: Option<u64>,
    pub leading: f64,
    pub leading_stderr: f64,
    pub remainder: Option<f64>,
    pub predicted_exponent: f64,
    pub ambiguous: u64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SweepOptions {
    pub count: CountOptions,
    pub leading: LeadingOptions,
}

fn record(
    domain: &Domain,
    subspace: &SubspaceData,
    eps: &Rational,
    sum: &SliceSum,
    opts: &SweepOptions,
) -> Result<SweepRecord> {
    let lead = scale_leading(sum, subspace, eps)?;
    let mut rec = SweepRecord {
        epsilon: eps.clone(),
        count: None,
        leading: lead.value,
        leading_stderr: lead.stderr,
        remainder: None,
        predicted_exponent: predicted_exponent(subspace, domain.slicewise_strictly_convex()),
        ambiguous: 0,
        error: None,
    };
    match count_points(domain, subspace, eps, &opts.count) {
        Ok(c) => {
            rec.count = Some(c.total);
            rec.remainder = Some(c.total as f64 - lead.value);
            rec.ambiguous = c.ambiguous;
        }
        Err(e @ Error::BudgetExceeded { .. }) => rec.error = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(rec)
}

/// Count and leading term at a single ε.
pub fn sweep_record(
    domain: &Domain,
    subspace: &SubspaceData,
    eps: &Rational,
    opts: &SweepOptions,
) -> Result<SweepRecord> {
    check_epsilon(eps)?;
    let sum = slice_sum(domain, subspace, &opts.leading)?;
    record(domain, subspace, eps, &sum, opts)
}

/// One record per ε, in input order. Rows whose enumeration exceeds the
/// budget are kept with `count: None` and the error message.
pub fn sweep(
    domain: &Domain,
    subspace: &SubspaceData,
    eps_list: &[Rational],
    opts: &SweepOptions,
) -> Result<Vec<SweepRecord>> {
    check_grid(eps_list)?;
    let sum = slice_sum(domain, subspace, &opts.leading)?;
    eps_list
        .iter()
        .map(|eps| record(domain, subspace, eps, &sum, opts))
        .collect()
}

/// At least three strictly decreasing positive values.
pub fn check_grid(eps_list: &[Rational]) -> Result<()> {
    if eps_list.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "an ε grid needs at least 3 values, got {}",
            eps_list.len()
        )));
    }
    for e in eps_list {
        check_epsilon(e)?;
    }
    if let Some(w) = eps_list.windows(2).find(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(format!(
            "ε grid must be strictly decreasing: {} then {}",
            format_rational(&w[0]),
            format_rational(&w[1])
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// `|remainder| ~ C ε^{-slope}`.
    pub slope: f64,
    pub intercept: f64,
    pub stderr_slope: f64,
    pub n_points: usize,
    /// ε values left out because the row failed or its remainder was 0.
    pub dropped: Vec<Rational>,
}

/// Least squares fit of `y` against `x`: `(slope, intercept, stderr_slope)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let stderr = if x.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, stderr)
}

/// Fits `ln|remainder|` against `ln(1/ε)`.
pub fn fit_remainder(records: &[SweepRecord]) -> Result<FitResult> {
    let mut x = Vec::new();
    let mut y = Vec::new();
    let mut dropped = Vec::new();
    for r in records {
        match r.remainder {
            Some(rem) if rem != 0.0 && r.epsilon.is_positive() => {
                x.push(-rational_to_f64(&r.epsilon).ln());
                y.push(rem.abs().ln());
            }
            _ => dropped.push(r.epsilon.clone()),
        }
    }
    let distinct = {
        let mut xs = x.clone();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.len()
    };
    if x.len() < 3 || distinct < 2 {
        return Err(Error::FitDegenerate { usable: x.len() });
    }
    let (slope, intercept, stderr_slope) = ols(&x, &y);
    Ok(FitResult {
        slope,
        intercept,
        stderr_slope,
        n_points: x.len(),
        dropped,
    })
}

/// `ε = 2^{-lo}, ..., 2^{-hi}`.
pub fn dyadic_grid(lo: u32, hi: u32) -> Vec<Rational> {
    (lo..=hi)
        .map(|k| Rational::new(BigInt::one(), BigInt::one() << k))
        .collect()
}
