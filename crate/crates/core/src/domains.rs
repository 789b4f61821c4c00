//! Bounded open sets `S`: exact ellipsoids and boxes, plus float-membership
//! oracle domains. Each supports membership, a bounding box and the volume
//! of its slices by fibers `P_x = x + V⊥`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::SubspaceData;
use crate::linalg::{self, determinant, gram, inverse, mat_mul, mat_vec, transpose, Matrix};
use crate::scalar::{rational_to_f64, QuadScalar, Rational};

pub const DEFAULT_ORACLE_TOLERANCE: f64 = 1e-12;

/// Volume of the unit ball in `R^m`, `π^{m/2} / Γ(m/2 + 1)`.
pub fn unit_ball_volume(m: u32) -> f64 {
    use std::f64::consts::PI;
    let j = m / 2;
    let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
    if m.is_multiple_of(2) {
        PI.powi(j as i32) / fact(j)
    } else {
        // ω_{2j+1} = 2 j! (4π)^j / (2j+1)!
        2.0 * fact(j) * (4.0 * PI).powi(j as i32) / fact(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    In,
    Out,
    /// Oracle decision within the tolerance band; counted as out.
    Ambiguous,
}

/// `{x : (x-c)^T M (x-c) < 1}` with `M` rational symmetric positive definite
/// and the center `c` in `Q(sqrt(d))^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    center: Vec<QuadScalar>,
    shape: Matrix<Rational>,
}

impl Ellipsoid {
    pub fn new<C: Into<QuadScalar>>(center: Vec<C>, shape: Matrix<Rational>) -> Result<Self> {
        let center: Vec<QuadScalar> = center.into_iter().map(Into::into).collect();
        let n = center.len();
        if n == 0 {
            return Err(Error::InvalidDomain("zero-dimensional ellipsoid".into()));
        }
        if shape.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: shape.len(),
            });
        }
        for row in &shape {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if shape[i][j] != shape[j][i] {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        }
        // Sylvester: every leading principal minor positive.
        for k in 1..=n {
            let minor: Matrix<Rational> = shape[..k].iter().map(|r| r[..k].to_vec()).collect();
            if !determinant(&minor).is_positive() {
                return Err(Error::NotPositiveDefinite);
            }
        }
        let mut field = None;
        for c in &center {
            match (field, c.field()) {
                (Some(a), Some(b)) if a != b => return Err(Error::FieldMismatch(a, b)),
                (None, Some(b)) => field = Some(b),
                _ => {}
            }
        }
        Ok(Ellipsoid { center, shape })
    }

    /// The open ball `|x - c|^2 < radius_sq`.
    pub fn ball<C: Into<QuadScalar>>(center: Vec<C>, radius_sq: Rational) -> Result<Self> {
        if !radius_sq.is_positive() {
            return Err(Error::InvalidDomain("ball radius must be positive".into()));
        }
        let n = center.len();
        let diag = radius_sq.recip();
        let shape = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { diag.clone() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Ellipsoid::new(center, shape)
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &[QuadScalar] {
        &self.center
    }

    /// Quadratic field of the center, if irrational.
    pub fn field(&self) -> Option<u64> {
        self.center.iter().find_map(QuadScalar::field)
    }

    pub fn shape(&self) -> &Matrix<Rational> {
        &self.shape
    }

    /// `(x-c)^T M (x-c)`, exactly.
    pub fn form(&self, x: &[QuadScalar]) -> QuadScalar {
        let y: Vec<QuadScalar> = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| a - c)
            .collect();
        let mut acc = QuadScalar::zero();
        for (i, yi) in y.iter().enumerate() {
            if yi.is_zero() {
                continue;
            }
            let mut row = QuadScalar::zero();
            for (j, yj) in y.iter().enumerate() {
                if !self.shape[i][j].is_zero() && !yj.is_zero() {
                    row = row + QuadScalar::from_rational(self.shape[i][j].clone()) * yj;
                }
            }
            acc = acc + yi * &row;
        }
        acc
    }

    /// `vol_n = ω_n / sqrt(det M)`.
    pub fn volume(&self) -> f64 {
        let det = rational_to_f64(&determinant(&self.shape));
        unit_ball_volume(self.dim() as u32) / det.sqrt()
    }
}

/// Open axis-aligned box `lower < x < upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct AxisBox {
    lower: Vec<Rational>,
    upper: Vec<Rational>,
}

impl AxisBox {
    pub fn new(lower: Vec<Rational>, upper: Vec<Rational>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidDomain("zero-dimensional box".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l >= u) {
            return Err(Error::InvalidDomain("box has empty interior".into()));
        }
        Ok(AxisBox { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[Rational] {
        &self.lower
    }

    pub fn upper(&self) -> &[Rational] {
        &self.upper
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| rational_to_f64(&(u - l)))
            .product()
    }

    fn center_f64(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| rational_to_f64(&((l + u) / Rational::from_integer(2.into()))))
            .collect()
    }

    fn half_diagonal(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| {
                let h = rational_to_f64(&(u - l)) / 2.0;
                h * h
            })
            .sum::<f64>()
            .sqrt()
    }
}

type LevelFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A domain known only through a float level function: `x ∈ S` iff
/// `level(x) < 0`. Points with `|level(x)| <= tolerance` are ambiguous.
#[derive(Clone)]
pub struct OracleDomain {
    label: String,
    level: Arc<LevelFn>,
    bounding_box: AxisBox,
    smooth: bool,
    slicewise_strictly_convex: bool,
    tolerance: f64,
}

impl fmt::Debug for OracleDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleDomain")
            .field("label", &self.label)
            .field("bounding_box", &self.bounding_box)
            .field("smooth", &self.smooth)
            .field("slicewise_strictly_convex", &self.slicewise_strictly_convex)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

impl OracleDomain {
    /// The caller guarantees that `level(x) < 0` implies `x ∈ bounding_box`.
    pub fn new(
        label: impl Into<String>,
        level: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        bounding_box: AxisBox,
        smooth: bool,
        slicewise_strictly_convex: bool,
    ) -> Self {
        OracleDomain {
            label: label.into(),
            level: Arc::new(level),
            bounding_box,
            smooth,
            slicewise_strictly_convex,
            tolerance: DEFAULT_ORACLE_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    /// `Σ |(x_i - c_i) / a_i|^power < 1`.
    pub fn superellipsoid(center: Vec<Rational>, radii: Vec<Rational>, power: f64) -> Result<Self> {
        if center.len() != radii.len() {
            return Err(Error::DimensionMismatch {
                expected: center.len(),
                found: radii.len(),
            });
        }
        if radii.iter().any(|a| !a.is_positive()) || power.is_nan() || power < 1.0 {
            return Err(Error::InvalidDomain(
                "superellipsoid needs positive radii and power >= 1".into(),
            ));
        }
        let lower = center.iter().zip(&radii).map(|(c, a)| c - a).collect();
        let upper = center.iter().zip(&radii).map(|(c, a)| c + a).collect();
        let bbox = AxisBox::new(lower, upper)?;
        let c: Vec<f64> = center.iter().map(rational_to_f64).collect();
        let a: Vec<f64> = radii.iter().map(rational_to_f64).collect();
        let level = move |x: &[f64]| {
            x.iter()
                .zip(&c)
                .zip(&a)
                .map(|((xi, ci), ai)| ((xi - ci) / ai).abs().powf(power))
                .sum::<f64>()
                - 1.0
        };
        // smooth for power >= 2; strictly convex for power > 1
        Ok(OracleDomain::new(
            format!("superellipsoid(power={power})"),
            level,
            bbox,
            power >= 2.0,
            power > 1.0,
        ))
    }

    /// Float-membership view of an exact ellipsoid.
    pub fn from_ellipsoid(e: &Ellipsoid) -> Self {
        let c: Vec<f64> = e.center.iter().map(QuadScalar::to_f64).collect();
        let m: Vec<Vec<f64>> = e
            .shape
            .iter()
            .map(|r| r.iter().map(rational_to_f64).collect())
            .collect();
        let level = move |x: &[f64]| {
            let y: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a - b).collect();
            let mut acc = 0.0;
            for (i, yi) in y.iter().enumerate() {
                for (j, yj) in y.iter().enumerate() {
                    acc += yi * m[i][j] * yj;
                }
            }
            acc - 1.0
        };
        OracleDomain::new("ellipsoid", level, ellipsoid_bounding_box(e), true, true)
    }

    pub fn from_box(b: &AxisBox) -> Self {
        let lo: Vec<f64> = b.lower.iter().map(rational_to_f64).collect();
        let hi: Vec<f64> = b.upper.iter().map(rational_to_f64).collect();
        let level = move |x: &[f64]| {
            x.iter()
                .zip(&lo)
                .zip(&hi)
                .map(|((xi, l), h)| {
                    let mid = (l + h) / 2.0;
                    let half = (h - l) / 2.0;
                    (xi - mid).abs() / half
                })
                .fold(f64::NEG_INFINITY, f64::max)
                - 1.0
        };
        OracleDomain::new("box", level, b.clone(), false, false)
    }

    pub fn dim(&self) -> usize {
        self.bounding_box.dim()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn bounding_box(&self) -> &AxisBox {
        &self.bounding_box
    }

    pub fn smooth(&self) -> bool {
        self.smooth
    }

    pub fn slicewise_strictly_convex(&self) -> bool {
        self.slicewise_strictly_convex
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn level(&self, x: &[f64]) -> f64 {
        (self.level)(x)
    }

    pub fn classify(&self, x: &[f64]) -> Membership {
        let v = self.level(x);
        if v.abs() <= self.tolerance {
            Membership::Ambiguous
        } else if v < 0.0 {
            Membership::In
        } else {
            Membership::Out
        }
    }
}

#[derive(Debug, Clone)]
pub enum Domain {
    Ellipsoid(Ellipsoid),
    Box(AxisBox),
    Oracle(OracleDomain),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Ellipsoid(e) => e.dim(),
            Domain::Box(b) => b.dim(),
            Domain::Oracle(o) => o.dim(),
        }
    }

    /// Whether the smooth-boundary hypothesis of the asymptotic formulas holds.
    pub fn smooth(&self) -> bool {
        match self {
            Domain::Ellipsoid(_) => true,
            Domain::Box(_) => false,
            Domain::Oracle(o) => o.smooth,
        }
    }

    /// Strict convexity of every slice `S ∩ (x + H)`. Analytic for
    /// ellipsoids, trusted flag for oracles.
    pub fn slicewise_strictly_convex(&self) -> bool {
        match self {
            Domain::Ellipsoid(_) => true,
            Domain::Box(_) => false,
            Domain::Oracle(o) => o.slicewise_strictly_convex,
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, Domain::Oracle(_))
    }

    /// Quadratic field the exact description lives in, if irrational.
    pub fn field(&self) -> Option<u64> {
        match self {
            Domain::Ellipsoid(e) => e.field(),
            _ => None,
        }
    }
}

impl From<Ellipsoid> for Domain {
    fn from(e: Ellipsoid) -> Self {
        Domain::Ellipsoid(e)
    }
}

impl From<AxisBox> for Domain {
    fn from(b: AxisBox) -> Self {
        Domain::Box(b)
    }
}

impl From<OracleDomain> for Domain {
    fn from(o: OracleDomain) -> Self {
        Domain::Oracle(o)
    }
}

/// Membership of `x` in the open set. Exact for ellipsoids and boxes, with
/// boundary points reported as out.
pub fn contains(domain: &Domain, x: &[QuadScalar]) -> Result<Membership> {
    if x.len() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: domain.dim(),
            found: x.len(),
        });
    }
    Ok(match domain {
        Domain::Ellipsoid(e) => {
            let v = e.form(x).checked_sub(&QuadScalar::one())?;
            if v.sign() < 0 {
                Membership::In
            } else {
                Membership::Out
            }
        }
        Domain::Box(b) => {
            for ((xi, l), u) in x.iter().zip(&b.lower).zip(&b.upper) {
                let lo = xi.checked_sub(&QuadScalar::from_rational(l.clone()))?;
                let hi = QuadScalar::from_rational(u.clone()).checked_sub(xi)?;
                if lo.sign() <= 0 || hi.sign() <= 0 {
                    return Ok(Membership::Out);
                }
            }
            Membership::In
        }
        Domain::Oracle(o) => {
            let xf: Vec<f64> = x.iter().map(QuadScalar::to_f64).collect();
            o.classify(&xf)
        }
    })
}

/// Smallest `u = m / 2^bits` (or the exact root) with `u >= sqrt(s)`.
pub fn sqrt_upper_bound(s: &Rational, bits: u32) -> Rational {
    if !s.is_positive() {
        return Rational::zero();
    }
    let (num, den) = (s.numer(), s.denom());
    let rn = num.sqrt();
    let rd = den.sqrt();
    if &(&rn * &rn) == num && &(&rd * &rd) == den {
        return Rational::new(rn, rd);
    }
    let scale = BigInt::one() << (2 * bits as usize);
    let t = (num * &scale) / den;
    let root = t.sqrt();
    Rational::new(root + 1, BigInt::one() << bits as usize)
}

/// Rationals `lo <= x <= hi`, equal to `x` when it is rational.
fn rational_enclosure(x: &QuadScalar) -> (Rational, Rational) {
    if let Some(r) = x.to_rational() {
        return (r.clone(), r.clone());
    }
    let a = x.approx(64);
    let slack = (a.abs() + Rational::one()) / Rational::from_integer(BigInt::one() << 60);
    (&a - &slack, &a + &slack)
}

fn ellipsoid_bounding_box(e: &Ellipsoid) -> AxisBox {
    let inv = inverse(&e.shape).expect("positive definite shape is invertible");
    let (lower, upper) = e
        .center
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let h = sqrt_upper_bound(&inv[i][i], 32);
            let (lo, hi) = rational_enclosure(c);
            (lo - &h, hi + &h)
        })
        .unzip();
    AxisBox { lower, upper }
}

/// A box containing the closure of the domain.
pub fn bounding_box(domain: &Domain) -> AxisBox {
    match domain {
        Domain::Ellipsoid(e) => ellipsoid_bounding_box(e),
        Domain::Box(b) => b.clone(),
        Domain::Oracle(o) => o.bounding_box.clone(),
    }
}

/// Fiber geometry shared by all slices of one ellipsoid: the fibers are
/// parametrized as `x + W^T t` with `W` the basis of `Γ⊥`.
#[derive(Debug, Clone)]
pub struct EllipsoidSlicer {
    center: Vec<QuadScalar>,
    shape: Matrix<QuadScalar>,
    /// `W M` (rows).
    wm: Matrix<QuadScalar>,
    /// `(W M W^T)^{-1}`.
    restricted_inv: Matrix<QuadScalar>,
    /// `det(W M W^T) / det(W W^T)`: determinant of `M` restricted to `V⊥`
    /// in an orthonormal basis.
    restricted_det: Rational,
    fiber_dim: usize,
    /// Float copies of center, shape, `W M`, `(W M W^T)^{-1}`, used to skip
    /// fibers that clearly miss the ellipsoid.
    approx: [Vec<Vec<f64>>; 4],
}

fn to_f64_rows(m: &Matrix<Rational>) -> Vec<Vec<f64>> {
    m.iter().map(|r| r.iter().map(rational_to_f64).collect()).collect()
}

fn lift(m: &Matrix<Rational>) -> Matrix<QuadScalar> {
    m.iter()
        .map(|r| r.iter().cloned().map(QuadScalar::from_rational).collect())
        .collect()
}

impl EllipsoidSlicer {
    pub fn new(e: &Ellipsoid, subspace: &SubspaceData) -> Result<Self> {
        if e.dim() != subspace.n() {
            return Err(Error::DimensionMismatch {
                expected: subspace.n(),
                found: e.dim(),
            });
        }
        let w = subspace.gamma_perp().rational_basis();
        let n = subspace.n();
        let wm = mat_mul(&w, &e.shape);
        let restricted = mat_mul(&wm, &transpose(&w, n));
        let restricted_inv = inverse(&restricted).ok_or(Error::NotPositiveDefinite)?;
        let restricted_det = determinant(&restricted) / determinant(&gram(&w));
        if !restricted_det.is_positive() {
            return Err(Error::NotPositiveDefinite);
        }
        let approx = [
            vec![e.center.iter().map(QuadScalar::to_f64).collect()],
            to_f64_rows(&e.shape),
            to_f64_rows(&wm),
            to_f64_rows(&restricted_inv),
        ];
        Ok(EllipsoidSlicer {
            approx,
            center: e.center.clone(),
            shape: lift(&e.shape),
            wm: lift(&wm),
            restricted_inv: lift(&restricted_inv),
            restricted_det,
            fiber_dim: w.len(),
        })
    }

    /// Minimum of the quadratic form over the fiber through `point`.
    pub fn fiber_minimum(&self, point: &[Rational]) -> QuadScalar {
        let y: Vec<QuadScalar> = point
            .iter()
            .zip(&self.center)
            .map(|(a, c)| QuadScalar::from_rational(a.clone()) - c)
            .collect();
        let my = mat_vec(&self.shape, &y);
        let c0 = linalg::dot(&y, &my);
        let b = mat_vec(&self.wm, &y);
        let t = mat_vec(&self.restricted_inv, &b);
        c0 - linalg::dot(&b, &t)
    }

    /// Float fiber minimum and the magnitude of the terms it cancels.
    fn approx_fiber_minimum(&self, point: &[Rational]) -> (f64, f64) {
        let [c, m, wm, rinv] = &self.approx;
        let y: Vec<f64> = point.iter().zip(&c[0]).map(|(a, c)| rational_to_f64(a) - c).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let c0 = m.iter().zip(&y).map(|(row, yi)| yi * dot(row, &y)).sum::<f64>();
        let b: Vec<f64> = wm.iter().map(|row| dot(row, &y)).collect();
        let t: Vec<f64> = rinv.iter().map(|row| dot(row, &b)).collect();
        (c0 - dot(&b, &t), c0.abs())
    }

    /// `vol_{n-r}` of the slice through `point`.
    pub fn volume(&self, point: &[Rational]) -> f64 {
        let (approx, scale) = self.approx_fiber_minimum(point);
        if approx > 1.0 + 1e-6 * scale.max(1.0) {
            return 0.0;
        }
        let gap = QuadScalar::one() - self.fiber_minimum(point);
        if gap.sign() <= 0 {
            return 0.0;
        }
        // vol^2 = ω^2 (1-m)^k / det, evaluated exactly up to the final root.
        let k = self.fiber_dim;
        let mut ratio = QuadScalar::one();
        for _ in 0..k {
            ratio = ratio * &gap;
        }
        let ratio = ratio * QuadScalar::from_rational(self.restricted_det.recip());
        unit_ball_volume(k as u32) * ratio.to_f64().sqrt()
    }
}

/// `vol_{n-r}(P_x ∩ E)` for the fiber `P_x = x + V⊥`.
pub fn slice_volume_ellipsoid(
    e: &Ellipsoid,
    point: &[Rational],
    subspace: &SubspaceData,
) -> Result<f64> {
    if point.len() != subspace.n() {
        return Err(Error::DimensionMismatch {
            expected: subspace.n(),
            found: point.len(),
        });
    }
    Ok(EllipsoidSlicer::new(e, subspace)?.volume(point))
}

const MC_CHUNK: usize = 1 << 16;

/// Orthonormal basis of `V⊥` in floating point, via Gram–Schmidt on `Γ⊥`.
pub(crate) fn orthonormal_complement(subspace: &SubspaceData) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in subspace.gamma_perp().rational_basis() {
        let mut w: Vec<f64> = v.iter().map(rational_to_f64).collect();
        for u in &out {
            let c: f64 = w.iter().zip(u).map(|(a, b)| a * b).sum();
            for (wi, ui) in w.iter_mut().zip(u) {
                *wi -= c * ui;
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        out.push(w.into_iter().map(|x| x / norm).collect());
    }
    out
}

/// Hit-or-miss Monte Carlo estimate of `vol_{n-r}(P_x ∩ D)`.
///
/// Samples uniformly from a cube in the fiber that covers the fiber's
/// intersection with the circumscribed ball of the bounding box. Returns
/// `(estimate, stderr)`; the sample stream is split into fixed chunks with
/// one ChaCha stream each, so results depend only on `seed`.
pub fn slice_volume_mc(
    domain: &OracleDomain,
    point: &[Rational],
    subspace: &SubspaceData,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples < 1000 {
        return Err(Error::InvalidArgument(format!(
            "Monte Carlo needs at least 1000 samples, got {samples}"
        )));
    }
    if point.len() != subspace.n() || domain.dim() != subspace.n() {
        return Err(Error::DimensionMismatch {
            expected: subspace.n(),
            found: point.len().min(domain.dim()),
        });
    }
    let basis = orthonormal_complement(subspace);
    let k = basis.len();
    let p: Vec<f64> = point.iter().map(rational_to_f64).collect();
    let cb = domain.bounding_box.center_f64();
    let radius = domain.bounding_box.half_diagonal();

    // Split cb - p into its V and V⊥ parts using the orthonormal V⊥ basis.
    let diff: Vec<f64> = cb.iter().zip(&p).map(|(a, b)| a - b).collect();
    let s0: Vec<f64> = basis
        .iter()
        .map(|u| u.iter().zip(&diff).map(|(a, b)| a * b).sum())
        .collect();
    let perp_sq: f64 = s0.iter().map(|x| x * x).sum();
    let dist_sq = (diff.iter().map(|x| x * x).sum::<f64>() - perp_sq).max(0.0);
    if dist_sq >= radius * radius {
        return Ok((0.0, 0.0));
    }
    let rho = (radius * radius - dist_sq).sqrt();
    let box_volume = (2.0 * rho).powi(k as i32);

    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut x = vec![0.0; p.len()];
            let mut hits = 0u64;
            for _ in 0..len {
                x.copy_from_slice(&p);
                for (u, s0i) in basis.iter().zip(&s0) {
                    let s = s0i + rho * (2.0 * rng.random::<f64>() - 1.0);
                    for (xi, ui) in x.iter_mut().zip(u) {
                        *xi += s * ui;
                    }
                }
                if domain.level(&x) < 0.0 {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let phat = hits as f64 / samples as f64;
    let estimate = box_volume * phat;
    let stderr = box_volume * (phat * (1.0 - phat) / samples as f64).sqrt();
    Ok((estimate, stderr))
}
