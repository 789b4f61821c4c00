//! Exact enumeration of `n_ε(S) = #(T_ε(S) ∩ Z^n)` and its split over the
//! fibers `P_{γ*}`, `γ* ∈ Γ*`.
//!
//! `k ∈ T_ε(S)` iff `T_ε^{-1}(k) = k_F + ε k_H ∈ S`. For exact domains the
//! membership test is compiled once per `(S, F, ε)` into integer polynomials
//! in `k` with coefficients in `Z[sqrt(d)]`, so each candidate costs a few
//! machine multiplications and an exact sign test.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domains::{bounding_box, contains, Domain, Ellipsoid, Membership, OracleDomain};
use crate::error::{Error, Result};
use crate::lattice::SubspaceData;
use crate::linalg::{self, Matrix};
use crate::scalar::{format_rational, rational_to_f64, QuadScalar, Rational};

pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountOptions {
    /// Refuse enumerations with more candidate points than this.
    pub budget: u128,
}

impl Default for CountOptions {
    fn default() -> Self {
        CountOptions {
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountResult {
    pub epsilon: Rational,
    pub total: u64,
    /// Keyed by the coordinates of `γ*` in the dual basis.
    pub by_fiber: BTreeMap<Vec<i64>, u64>,
    /// Oracle points inside the tolerance band (counted as out).
    pub ambiguous: u64,
}

impl CountResult {
    pub fn fiber_sum(&self) -> u64 {
        self.by_fiber.values().sum()
    }

    pub fn fiber(&self, label: &[i64]) -> u64 {
        self.by_fiber.get(label).copied().unwrap_or(0)
    }
}

/// JSON form of a [`CountResult`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub schema_version: u32,
    pub epsilon: String,
    pub total: u64,
    pub by_fiber: Vec<FiberCount>,
    pub ambiguous: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiberCount {
    pub gamma_star: Vec<i64>,
    pub count: u64,
}

impl From<&CountResult> for CountReport {
    fn from(c: &CountResult) -> Self {
        CountReport {
            schema_version: crate::SCHEMA_VERSION,
            epsilon: format_rational(&c.epsilon),
            total: c.total,
            by_fiber: c
                .by_fiber
                .iter()
                .map(|(k, v)| FiberCount {
                    gamma_star: k.clone(),
                    count: *v,
                })
                .collect(),
            ambiguous: c.ambiguous,
        }
    }
}

pub(crate) fn check_epsilon(eps: &Rational) -> Result<()> {
    if eps.is_positive() {
        Ok(())
    } else {
        Err(Error::InvalidEpsilon(format_rational(eps)))
    }
}

/// `T_ε^{-1} = P_F + ε (I - P_F)`.
pub fn pullback_matrix(subspace: &SubspaceData, eps: &Rational) -> Matrix<QuadScalar> {
    let e = QuadScalar::from_rational(eps.clone());
    let one_minus = QuadScalar::from_rational(Rational::one() - eps);
    let n = subspace.n();
    let pf = subspace.projector_f();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let diag = if i == j { e.clone() } else { QuadScalar::zero() };
                    diag + &one_minus * &pf[i][j]
                })
                .collect()
        })
        .collect()
}

/// `T_ε^{-1}(k) = k_F + ε k_H`.
pub fn t_eps_inverse(k: &[i64], eps: &Rational, subspace: &SubspaceData) -> Result<Vec<QuadScalar>> {
    check_epsilon(eps)?;
    let x: Vec<QuadScalar> = k.iter().map(|&v| QuadScalar::from_i64(v)).collect();
    let (xf, xh) = subspace.decompose(&x)?;
    let e = QuadScalar::from_rational(eps.clone());
    Ok(xf.iter().zip(&xh).map(|(f, h)| f + &(&e * h)).collect())
}

/// A polynomial of degree at most two in `k ∈ Z^n` with coefficients in
/// `Z[sqrt(d)]`, stored as separate rational-part and radical-part integers.
#[derive(Debug, Clone)]
struct ExactPoly {
    d: i128,
    quad: Vec<(usize, usize, BigInt, BigInt)>,
    lin: Vec<(usize, BigInt, BigInt)>,
    konst: (BigInt, BigInt),
    small: Option<SmallPoly>,
}

#[derive(Debug, Clone)]
struct SmallPoly {
    quad: Vec<(usize, usize, i128, i128)>,
    lin: Vec<(usize, i128, i128)>,
    konst: (i128, i128),
}

impl ExactPoly {
    /// Scales all coefficients by the positive lcm of their denominators,
    /// which preserves the sign of every value.
    fn new(
        d: u64,
        quad: Vec<(usize, usize, QuadScalar)>,
        lin: Vec<(usize, QuadScalar)>,
        konst: QuadScalar,
    ) -> Self {
        let mut l = BigInt::one();
        let all = quad
            .iter()
            .map(|t| &t.2)
            .chain(lin.iter().map(|t| &t.1))
            .chain(std::iter::once(&konst));
        for c in all {
            l = l.lcm(c.a().denom()).lcm(c.b().denom());
        }
        let lr = Rational::from_integer(l);
        let split = |c: &QuadScalar| {
            (
                (c.a() * &lr).to_integer(),
                (c.b() * &lr).to_integer(),
            )
        };
        let quad: Vec<_> = quad
            .iter()
            .filter(|t| !t.2.is_zero())
            .map(|(i, j, c)| {
                let (a, b) = split(c);
                (*i, *j, a, b)
            })
            .collect();
        let lin: Vec<_> = lin
            .iter()
            .filter(|t| !t.1.is_zero())
            .map(|(i, c)| {
                let (a, b) = split(c);
                (*i, a, b)
            })
            .collect();
        let konst = split(&konst);
        let small = (|| {
            Some(SmallPoly {
                quad: quad
                    .iter()
                    .map(|(i, j, a, b)| Some((*i, *j, a.to_i128()?, b.to_i128()?)))
                    .collect::<Option<_>>()?,
                lin: lin
                    .iter()
                    .map(|(i, a, b)| Some((*i, a.to_i128()?, b.to_i128()?)))
                    .collect::<Option<_>>()?,
                konst: (konst.0.to_i128()?, konst.1.to_i128()?),
            })
        })();
        ExactPoly {
            d: d as i128,
            quad,
            lin,
            konst,
            small,
        }
    }

    fn sign(&self, k: &[i64]) -> i8 {
        if let Some(s) = self.small.as_ref().and_then(|p| p.sign(k, self.d)) {
            return s;
        }
        self.sign_big(k)
    }

    fn sign_big(&self, k: &[i64]) -> i8 {
        let kb: Vec<BigInt> = k.iter().map(|&v| BigInt::from(v)).collect();
        let (mut a, mut b) = self.konst.clone();
        for (i, ca, cb) in &self.lin {
            a += ca * &kb[*i];
            b += cb * &kb[*i];
        }
        for (i, j, ca, cb) in &self.quad {
            let kk = &kb[*i] * &kb[*j];
            a += ca * &kk;
            b += cb * &kk;
        }
        let sa = big_sign(&a);
        let sb = big_sign(&b);
        if sb == 0 || self.d == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let aa = &a * &a;
        let bbd = &b * &b * BigInt::from(self.d);
        match aa.cmp(&bbd) {
            std::cmp::Ordering::Greater => sa,
            std::cmp::Ordering::Less => sb,
            std::cmp::Ordering::Equal => 0,
        }
    }
}

impl SmallPoly {
    /// `None` on overflow.
    fn sign(&self, k: &[i64], d: i128) -> Option<i8> {
        let (mut a, mut b) = self.konst;
        for &(i, ca, cb) in &self.lin {
            let ki = k[i] as i128;
            a = a.checked_add(ca.checked_mul(ki)?)?;
            b = b.checked_add(cb.checked_mul(ki)?)?;
        }
        for &(i, j, ca, cb) in &self.quad {
            let kk = (k[i] as i128).checked_mul(k[j] as i128)?;
            a = a.checked_add(ca.checked_mul(kk)?)?;
            b = b.checked_add(cb.checked_mul(kk)?)?;
        }
        let sa = a.signum() as i8;
        let sb = b.signum() as i8;
        if sb == 0 || d == 0 {
            return Some(sa);
        }
        if sa == 0 || sa == sb {
            return Some(sb);
        }
        let aa = a.checked_mul(a)?;
        let bbd = b.checked_mul(b)?.checked_mul(d)?;
        Some(match aa.cmp(&bbd) {
            std::cmp::Ordering::Greater => sa,
            std::cmp::Ordering::Less => sb,
            std::cmp::Ordering::Equal => 0,
        })
    }
}

fn big_sign(x: &BigInt) -> i8 {
    if x.is_zero() {
        0
    } else if x.is_negative() {
        -1
    } else {
        1
    }
}

/// Membership of `k` in `T_ε(S)`, compiled for one `(S, F, ε)`.
#[derive(Debug, Clone)]
enum CompiledDomain {
    /// `k` is inside iff every polynomial is negative.
    Exact(Vec<ExactPoly>),
    Oracle {
        pullback: Vec<Vec<f64>>,
        oracle: OracleDomain,
    },
}

impl CompiledDomain {
    fn new(domain: &Domain, subspace: &SubspaceData, eps: &Rational) -> Result<Self> {
        let r = pullback_matrix(subspace, eps);
        let n = subspace.n();
        let d = common_field(domain, subspace)?;
        Ok(
        match domain {
            Domain::Ellipsoid(e) => CompiledDomain::Exact(vec![ellipsoid_poly(e, &r, d)]),
            Domain::Box(b) => {
                let mut polys = Vec::with_capacity(2 * n);
                for i in 0..n {
                    let row = &r[i];
                    let lo = QuadScalar::from_rational(b.lower()[i].clone());
                    let hi = QuadScalar::from_rational(b.upper()[i].clone());
                    // lower - y_i < 0
                    polys.push(ExactPoly::new(
                        d,
                        vec![],
                        row.iter().enumerate().map(|(j, c)| (j, -c)).collect(),
                        lo,
                    ));
                    // y_i - upper < 0
                    polys.push(ExactPoly::new(
                        d,
                        vec![],
                        row.iter().enumerate().map(|(j, c)| (j, c.clone())).collect(),
                        -hi,
                    ));
                }
                CompiledDomain::Exact(polys)
            }
            Domain::Oracle(o) => CompiledDomain::Oracle {
                pullback: to_f64_matrix(&r),
                oracle: o.clone(),
            },
        })
    }

    fn classify(&self, k: &[i64], scratch: &mut Vec<f64>) -> Membership {
        match self {
            CompiledDomain::Exact(polys) => {
                if polys.iter().all(|p| p.sign(k) < 0) {
                    Membership::In
                } else {
                    Membership::Out
                }
            }
            CompiledDomain::Oracle { pullback, oracle } => {
                scratch.clear();
                scratch.extend(
                    pullback
                        .iter()
                        .map(|row| row.iter().zip(k).map(|(a, &b)| a * b as f64).sum::<f64>()),
                );
                oracle.classify(scratch)
            }
        }
    }
}

/// The one quadratic field shared by the domain and the subspace.
pub(crate) fn common_field(domain: &Domain, subspace: &SubspaceData) -> Result<u64> {
    match (domain.field(), subspace.d()) {
        (None, d) => Ok(d),
        (Some(x), 0) => Ok(x),
        (Some(x), d) if x == d => Ok(d),
        (Some(x), d) => Err(Error::FieldMismatch(d, x)),
    }
}

/// `(R k - c)^T M (R k - c) - 1` as a polynomial in `k`.
fn ellipsoid_poly(e: &Ellipsoid, r: &Matrix<QuadScalar>, d: u64) -> ExactPoly {
    let n = e.dim();
    let m: Matrix<QuadScalar> = e
        .shape()
        .iter()
        .map(|row| row.iter().cloned().map(QuadScalar::from_rational).collect())
        .collect();
    let c: Vec<QuadScalar> = e.center().to_vec();
    // R is symmetric, so R^T M R = R M R.
    let g = linalg::mat_mul(r, &linalg::mat_mul(&m, r));
    let mc = linalg::mat_vec(&m, &c);
    let h = linalg::mat_vec(r, &mc);
    let c0 = linalg::dot(&c, &mc) - QuadScalar::one();
    let mut quad = Vec::new();
    for i in 0..n {
        quad.push((i, i, g[i][i].clone()));
        for j in i + 1..n {
            quad.push((i, j, &g[i][j] + &g[j][i]));
        }
    }
    let two = QuadScalar::from_i64(-2);
    let lin = h.iter().enumerate().map(|(i, hi)| (i, &two * hi)).collect();
    ExactPoly::new(d, quad, lin, c0)
}

fn to_f64_matrix(m: &Matrix<QuadScalar>) -> Vec<Vec<f64>> {
    m.iter()
        .map(|row| row.iter().map(QuadScalar::to_f64).collect())
        .collect()
}

/// Integer ranges covering `T_ε(S)`, one per coordinate.
fn candidate_ranges(domain: &Domain, subspace: &SubspaceData, eps: &Rational) -> Vec<(i64, i64)> {
    let n = subspace.n();
    let inv_eps = eps.recip();
    let pf = to_f64_matrix(subspace.projector_f());
    let ie = rational_to_f64(&inv_eps);
    // T_ε = P_F + ε^{-1} (I - P_F)
    let t: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let id = if i == j { 1.0 } else { 0.0 };
                    pf[i][j] + ie * (id - pf[i][j])
                })
                .collect()
        })
        .collect();
    let (center, half): (Vec<f64>, Vec<f64>) = match domain {
        Domain::Ellipsoid(e) => {
            let c: Vec<f64> = e.center().iter().map(QuadScalar::to_f64).collect();
            let minv = linalg::inverse(e.shape()).expect("positive definite");
            let minv: Vec<Vec<f64>> = minv
                .iter()
                .map(|r| r.iter().map(rational_to_f64).collect())
                .collect();
            let tc = t.iter().map(|row| dot_f(row, &c)).collect();
            // half-width_i = sqrt((T M^{-1} T^T)_ii)
            let hw = t
                .iter()
                .map(|row| {
                    let v: Vec<f64> = (0..n).map(|j| dot_f(row, &column(&minv, j))).collect();
                    dot_f(&v, row).max(0.0).sqrt()
                })
                .collect();
            (tc, hw)
        }
        _ => {
            let bb = bounding_box(domain);
            let mid: Vec<f64> = bb
                .lower()
                .iter()
                .zip(bb.upper())
                .map(|(l, u)| (rational_to_f64(l) + rational_to_f64(u)) / 2.0)
                .collect();
            let hb: Vec<f64> = bb
                .lower()
                .iter()
                .zip(bb.upper())
                .map(|(l, u)| (rational_to_f64(u) - rational_to_f64(l)) / 2.0)
                .collect();
            let tc = t.iter().map(|row| dot_f(row, &mid)).collect();
            let hw = t
                .iter()
                .map(|row| row.iter().zip(&hb).map(|(a, b)| a.abs() * b).sum())
                .collect();
            (tc, hw)
        }
    };
    center
        .iter()
        .zip(&half)
        .map(|(c, h)| {
            let slack = 1e-9 * (c.abs() + h.abs() + 1.0);
            (
                (c - h - slack).floor() as i64,
                (c + h + slack).ceil() as i64,
            )
        })
        .collect()
}

fn dot_f(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn column(m: &[Vec<f64>], j: usize) -> Vec<f64> {
    m.iter().map(|r| r[j]).collect()
}

fn candidate_count(ranges: &[(i64, i64)]) -> u128 {
    ranges
        .iter()
        .map(|(lo, hi)| (hi - lo + 1).max(0) as u128)
        .product()
}

fn check_budget(ranges: &[(i64, i64)], opts: &CountOptions) -> Result<()> {
    let candidates = candidate_count(ranges);
    if candidates > opts.budget {
        return Err(Error::BudgetExceeded {
            candidates,
            budget: opts.budget,
        });
    }
    Ok(())
}

/// Visits every integer point of the box, in parallel over slabs of the
/// first coordinate, and merges per-slab results in slab order.
pub(crate) fn for_each_slab<T, F>(ranges: &[(i64, i64)], init: impl Fn() -> T + Sync, visit: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut T, &[i64]) + Sync,
{
    let (lo0, hi0) = ranges[0];
    let rest = &ranges[1..];
    (lo0..=hi0)
        .into_par_iter()
        .map(|k0| {
            let mut acc = init();
            let mut k: Vec<i64> = std::iter::once(k0).chain(rest.iter().map(|r| r.0)).collect();
            if rest.iter().any(|(lo, hi)| lo > hi) {
                return acc;
            }
            loop {
                visit(&mut acc, &k);
                // odometer over coordinates 1..n
                let mut i = k.len() - 1;
                loop {
                    if i == 0 {
                        return acc;
                    }
                    if k[i] < ranges[i].1 {
                        k[i] += 1;
                        break;
                    }
                    k[i] = ranges[i].0;
                    i -= 1;
                }
            }
        })
        .collect()
}

/// `n_ε(S)` with its fiber decomposition.
pub fn count_points(
    domain: &Domain,
    subspace: &SubspaceData,
    eps: &Rational,
    opts: &CountOptions,
) -> Result<CountResult> {
    check_epsilon(eps)?;
    if domain.dim() != subspace.n() {
        return Err(Error::DimensionMismatch {
            expected: subspace.n(),
            found: domain.dim(),
        });
    }
    let ranges = candidate_ranges(domain, subspace, eps);
    check_budget(&ranges, opts)?;
    let compiled = CompiledDomain::new(domain, subspace, eps)?;

    #[derive(Default)]
    struct Slab {
        total: u64,
        ambiguous: u64,
        by_fiber: BTreeMap<Vec<i64>, u64>,
        scratch: Vec<f64>,
    }

    let slabs = for_each_slab(&ranges, Slab::default, |acc, k| {
        match compiled.classify(k, &mut acc.scratch) {
            Membership::In => {
                acc.total += 1;
                *acc.by_fiber.entry(subspace.fiber_label(k)).or_default() += 1;
            }
            Membership::Ambiguous => acc.ambiguous += 1,
            Membership::Out => {}
        }
    });

    let mut out = CountResult {
        epsilon: eps.clone(),
        total: 0,
        by_fiber: BTreeMap::new(),
        ambiguous: 0,
    };
    for s in slabs {
        out.total += s.total;
        out.ambiguous += s.ambiguous;
        for (k, v) in s.by_fiber {
            *out.by_fiber.entry(k).or_default() += v;
        }
    }
    Ok(out)
}

/// `#(ε^{-1} S ∩ Z^n)`: the classical homothetic count, computed by testing
/// `ε k ∈ S` directly without any subspace machinery.
pub fn gauss_reference(domain: &Domain, eps: &Rational, opts: &CountOptions) -> Result<u64> {
    check_epsilon(eps)?;
    let bb = bounding_box(domain);
    let ranges: Vec<(i64, i64)> = bb
        .lower()
        .iter()
        .zip(bb.upper())
        .map(|(l, u)| {
            let lo = (l / eps).ceil().to_integer();
            let hi = (u / eps).floor().to_integer();
            Ok((to_i64(&lo)?, to_i64(&hi)?))
        })
        .collect::<Result<_>>()?;
    check_budget(&ranges, opts)?;
    let e = QuadScalar::from_rational(eps.clone());
    let counts = for_each_slab(&ranges, || Ok(0u64), |acc: &mut Result<u64>, k| {
        let Ok(c) = acc else { return };
        let x: Vec<QuadScalar> = k.iter().map(|&v| &e * &QuadScalar::from_i64(v)).collect();
        match contains(domain, &x) {
            Ok(Membership::In) => *c += 1,
            Ok(_) => {}
            Err(err) => *acc = Err(err),
        }
    });
    counts.into_iter().sum()
}

fn to_i64(x: &BigInt) -> Result<i64> {
    x.to_i64()
        .ok_or_else(|| Error::Overflow(format!("coordinate {x} does not fit in i64")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::AxisBox;
    use crate::lattice::build_subspace;
    use crate::scalar::parse_rational;

    fn r(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    fn q(s: &str) -> QuadScalar {
        s.parse().unwrap()
    }

    fn line(a: &str, b: &str) -> SubspaceData {
        build_subspace(vec![vec![q(a), q(b)]], 2, None).unwrap()
    }

    fn disk(radius_sq: &str) -> Domain {
        Ellipsoid::ball(vec![r("0"), r("0")], r(radius_sq)).unwrap().into()
    }

    #[test]
    fn t_eps_inverse_examples() {
        let s = line("1", "0");
        assert_eq!(t_eps_inverse(&[0, 1], &r("1/2"), &s).unwrap(), vec![q("0"), q("1/2")]);
        assert_eq!(t_eps_inverse(&[1, 0], &r("1/7"), &s).unwrap(), vec![q("1"), q("0")]);
        let irr = line("1", "sqrt(2)");
        let y = t_eps_inverse(&[1, 1], &r("1/2"), &irr).unwrap();
        let c = q("1/3+1/3*sqrt(2)");
        let kf = [c.clone(), &c * &q("sqrt(2)")];
        let kh: Vec<QuadScalar> = kf.iter().map(|x| &QuadScalar::one() - x).collect();
        let expect: Vec<QuadScalar> =
            kf.iter().zip(&kh).map(|(f, h)| f + &(&q("1/2") * h)).collect();
        assert_eq!(y, expect);
        assert!(t_eps_inverse(&[1, 1], &r("0"), &irr).is_err());
    }

    #[test]
    fn count_examples() {
        let opts = CountOptions::default();
        let c = count_points(&disk("1"), &line("1", "0"), &r("1/2"), &opts).unwrap();
        assert_eq!(c.total, 3);
        assert_eq!(c.by_fiber.len(), 1);
        assert_eq!(c.fiber(&[0]), 3);

        let trivial = build_subspace(vec![], 2, None).unwrap();
        let c = count_points(&disk("9/4"), &trivial, &r("1"), &opts).unwrap();
        assert_eq!(c.total, 9);
        assert_eq!(c.by_fiber.get(&vec![]), Some(&9));
    }

    #[test]
    fn gauss_reference_examples() {
        let opts = CountOptions::default();
        // i^2 + j^2 < 4
        assert_eq!(gauss_reference(&disk("1"), &r("1/2"), &opts).unwrap(), 9);
        // i^2 + j^2 < 1
        assert_eq!(gauss_reference(&disk("1"), &r("1"), &opts).unwrap(), 1);
        let b: Domain = AxisBox::new(vec![r("-1/4"), r("-1/4")], vec![r("1/4"), r("1/4")])
            .unwrap()
            .into();
        assert_eq!(gauss_reference(&b, &r("1"), &opts).unwrap(), 1);
    }

    #[test]
    fn budget_guard() {
        let opts = CountOptions { budget: 100 };
        let err = count_points(&disk("1"), &line("1", "0"), &r("1/1000"), &opts).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 100, .. }));
    }

    #[test]
    fn compiled_membership_matches_direct_test() {
        let s = line("1", "sqrt(2)");
        let e: Domain = Ellipsoid::new(
            vec![r("1/3"), r("-1/5")],
            vec![vec![r("2"), r("1/2")], vec![r("1/2"), r("1")]],
        )
        .unwrap()
        .into();
        let b: Domain = AxisBox::new(vec![r("-1"), r("-1/2")], vec![r("3/2"), r("1")])
            .unwrap()
            .into();
        let eps = r("1/3");
        for dom in [&e, &b] {
            let compiled = CompiledDomain::new(dom, &s, &eps).unwrap();
            let mut scratch = Vec::new();
            for i in -6..=6 {
                for j in -6..=6 {
                    let k = [i, j];
                    let direct = contains(dom, &t_eps_inverse(&k, &eps, &s).unwrap()).unwrap();
                    assert_eq!(compiled.classify(&k, &mut scratch), direct, "{k:?}");
                }
            }
        }
    }

    #[test]
    fn big_coefficients_fall_back_to_bigint() {
        let s = line("1", "sqrt(2)");
        let e = Ellipsoid::ball(vec![r("0"), r("0")], r("1")).unwrap();
        let eps = r("1/12345678901");
        let poly = ellipsoid_poly(&e, &pullback_matrix(&s, &eps), 2);
        for k in [[0i64, 0], [1, 1], [123456, -87654], [5, 7]] {
            let direct = contains(&e.clone().into(), &t_eps_inverse(&k, &eps, &s).unwrap()).unwrap();
            let compiled = if poly.sign(&k) < 0 { Membership::In } else { Membership::Out };
            assert_eq!(poly.sign_big(&k), poly.sign(&k));
            assert_eq!(compiled, direct);
        }
    }

    #[test]
    fn oracle_counts_match_exact_ellipsoid() {
        let s = line("1", "1/2");
        let e = Ellipsoid::ball(vec![r("1/3"), r("0")], r("1")).unwrap();
        let exact = count_points(&e.clone().into(), &s, &r("1/8"), &CountOptions::default()).unwrap();
        let oracle = count_points(
            &OracleDomain::from_ellipsoid(&e).into(),
            &s,
            &r("1/8"),
            &CountOptions::default(),
        )
        .unwrap();
        assert!(oracle.total <= exact.total);
        assert!(exact.total <= oracle.total + oracle.ambiguous);
    }
}
