//! Dense exact linear algebra: Gaussian elimination over `Q` and `Q(sqrt(d))`,
//! and unimodular column reduction over `Z` for saturated integer kernels.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::scalar::{QuadScalar, Rational};

pub type Matrix<T> = Vec<Vec<T>>;

/// The handful of field operations elimination needs.
pub trait FieldElement: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// Callers only divide by nonzero pivots.
    fn div(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
}

impl FieldElement for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
}

impl FieldElement for QuadScalar {
    fn zero() -> Self {
        QuadScalar::zero()
    }
    fn one() -> Self {
        QuadScalar::one()
    }
    fn is_zero(&self) -> bool {
        QuadScalar::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn neg(&self) -> Self {
        -self
    }
}

pub fn dot<T: FieldElement>(x: &[T], y: &[T]) -> T {
    x.iter()
        .zip(y)
        .fold(T::zero(), |acc, (a, b)| acc.add(&a.mul(b)))
}

pub fn mat_vec<T: FieldElement>(m: &Matrix<T>, x: &[T]) -> Vec<T> {
    m.iter().map(|row| dot(row, x)).collect()
}

pub fn mat_mul<T: FieldElement>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    row.iter()
                        .zip(b)
                        .fold(T::zero(), |acc, (x, brow)| acc.add(&x.mul(&brow[j])))
                })
                .collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(m: &Matrix<T>, cols: usize) -> Matrix<T> {
    (0..cols)
        .map(|j| m.iter().map(|row| row[j].clone()).collect())
        .collect()
}

/// Gram matrix of the rows.
pub fn gram<T: FieldElement>(rows: &Matrix<T>) -> Matrix<T> {
    rows.iter()
        .map(|x| rows.iter().map(|y| dot(x, y)).collect())
        .collect()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref<T: FieldElement>(m: &mut Matrix<T>) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = T::one().div(&m[r][c]);
        for x in m[r].iter_mut() {
            *x = x.mul(&inv);
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    let t = m[r][j].mul(&f);
                    m[i][j] = m[i][j].sub(&t);
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<T: FieldElement>(m: &Matrix<T>) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// Basis of the right kernel `{x : m x = 0}` of an `rows x cols` matrix.
pub fn nullspace<T: FieldElement>(m: &Matrix<T>, cols: usize) -> Matrix<T> {
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![T::zero(); cols];
            v[f] = T::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = w[row][f].neg();
            }
            v
        })
        .collect()
}

pub fn determinant<T: FieldElement>(m: &Matrix<T>) -> T {
    let n = m.len();
    let mut w = m.clone();
    let mut det = T::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !w[i][c].is_zero()) else {
            return T::zero();
        };
        if p != c {
            w.swap(p, c);
            det = det.neg();
        }
        det = det.mul(&w[c][c]);
        let piv = w[c][c].clone();
        for i in c + 1..n {
            if !w[i][c].is_zero() {
                let f = w[i][c].div(&piv);
                for j in c..n {
                    let t = w[c][j].mul(&f);
                    w[i][j] = w[i][j].sub(&t);
                }
            }
        }
    }
    det
}

pub fn inverse<T: FieldElement>(m: &Matrix<T>) -> Option<Matrix<T>> {
    let n = m.len();
    let mut aug: Matrix<T> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(aug.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Lift an integer matrix into the rationals.
pub fn int_to_rational(m: &Matrix<BigInt>) -> Matrix<Rational> {
    m.iter()
        .map(|row| row.iter().cloned().map(Rational::from_integer).collect())
        .collect()
}

/// Multiply each row by the lcm of its denominators.
pub fn clear_denominators(m: &Matrix<Rational>) -> Matrix<BigInt> {
    m.iter()
        .map(|row| {
            let l = row
                .iter()
                .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter()
                .map(|x| (x * Rational::from_integer(l.clone())).to_integer())
                .collect()
        })
        .collect()
}

/// Extended gcd with `g >= 0` and `s*a + t*b == g`.
fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let e = a.extended_gcd(b);
    if e.gcd.is_negative() {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Basis of the saturated lattice `Z^n ∩ ker(m)` for an integer `rows x n`
/// matrix, in row Hermite normal form.
///
/// Column operations bring `m` to lower echelon form `m U = [L | 0]` with `U`
/// unimodular; the columns of `U` facing the zero block span the kernel over
/// `Z`, and unimodularity makes that span saturated.
pub fn integer_kernel_basis(m: &Matrix<BigInt>, n: usize) -> Matrix<BigInt> {
    let mut a: Matrix<BigInt> = m.clone();
    // u is stored column-major: u[j] is column j.
    let mut u: Matrix<BigInt> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let mut col = 0;
    for i in 0..a.len() {
        if col == n {
            break;
        }
        for j in col + 1..n {
            if a[i][j].is_zero() {
                continue;
            }
            let x = a[i][col].clone();
            let y = a[i][j].clone();
            let (g, s, t) = ext_gcd(&x, &y);
            let xg = &x / &g;
            let yg = &y / &g;
            // [c_col, c_j] <- [s c_col + t c_j, yg c_col - xg c_j]; det = -1.
            for row in a.iter_mut() {
                let (p, q) = (row[col].clone(), row[j].clone());
                row[col] = &s * &p + &t * &q;
                row[j] = &yg * &p - &xg * &q;
            }
            let (cp, cq) = (u[col].clone(), u[j].clone());
            u[col] = cp.iter().zip(&cq).map(|(p, q)| &s * p + &t * q).collect();
            u[j] = cp.iter().zip(&cq).map(|(p, q)| &yg * p - &xg * q).collect();
        }
        if !a[i][col].is_zero() {
            col += 1;
        }
    }
    let kernel: Matrix<BigInt> = u[col..].to_vec();
    hermite_normal_form(kernel)
}

/// Row Hermite normal form of a full-row-rank integer matrix: positive
/// pivots, entries above each pivot reduced into `[0, pivot)`, zero rows
/// dropped.
pub fn hermite_normal_form(mut m: Matrix<BigInt>) -> Matrix<BigInt> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        for i in r + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let x = m[r][c].clone();
            let y = m[i][c].clone();
            let (g, s, t) = ext_gcd(&x, &y);
            let xg = &x / &g;
            let yg = &y / &g;
            let (pr, qr) = (m[r].clone(), m[i].clone());
            m[r] = pr.iter().zip(&qr).map(|(p, q)| &s * p + &t * q).collect();
            m[i] = pr.iter().zip(&qr).map(|(p, q)| &yg * p - &xg * q).collect();
        }
        if m[r][c].is_zero() {
            continue;
        }
        if m[r][c].is_negative() {
            for x in m[r].iter_mut() {
                *x = -&*x;
            }
        }
        let piv = m[r][c].clone();
        for i in 0..r {
            let f = m[i][c].div_floor(&piv);
            if !f.is_zero() {
                let pr = m[r].clone();
                for (x, p) in m[i].iter_mut().zip(&pr) {
                    *x -= &f * p;
                }
            }
        }
        r += 1;
    }
    m.truncate(r);
    m
}

/// Integer vectors `c` with `(c - center)^T A (c - center) <= bound`, for
/// `A` symmetric positive definite, by depth-first search over the Cholesky
/// factor. Points within rounding of the boundary may be included; callers
/// decide membership exactly. Returns `None` once more than `limit` points
/// have been found.
pub fn integer_points_in_ellipsoid(
    a: &[Vec<f64>],
    center: &[f64],
    bound: f64,
    limit: usize,
) -> Option<Vec<Vec<i64>>> {
    let r = a.len();
    // Upper triangular U with A = U^T U.
    let mut u = vec![vec![0.0; r]; r];
    for i in 0..r {
        for j in i..r {
            let s: f64 = a[i][j] - (0..i).map(|k| u[k][i] * u[k][j]).sum::<f64>();
            if i == j {
                u[i][i] = s.max(0.0).sqrt();
            } else {
                u[i][j] = s / u[i][i];
            }
        }
    }
    let bound = bound * (1.0 + 1e-9) + 1e-12;
    let mut out = Vec::new();
    let mut c = vec![0i64; r];
    #[allow(clippy::too_many_arguments)]
    fn descend(
        i: usize,
        partial: f64,
        u: &[Vec<f64>],
        center: &[f64],
        bound: f64,
        c: &mut [i64],
        out: &mut Vec<Vec<i64>>,
        limit: usize,
    ) -> bool {
        let shift: f64 = (i + 1..u.len())
            .map(|j| u[i][j] * (c[j] as f64 - center[j]))
            .sum();
        let room = (bound - partial).max(0.0).sqrt();
        let mid = center[i] - shift / u[i][i];
        let half = room / u[i][i] * (1.0 + 1e-9) + 1e-9;
        let (lo, hi) = ((mid - half).ceil() as i64, (mid + half).floor() as i64);
        for v in lo..=hi {
            c[i] = v;
            let t = u[i][i] * (v as f64 - center[i]) + shift;
            let next = partial + t * t;
            if i == 0 {
                out.push(c.to_vec());
                if out.len() > limit {
                    return false;
                }
            } else if !descend(i - 1, next.min(bound), u, center, bound, c, out, limit) {
                return false;
            }
        }
        true
    }
    if r == 0 {
        return Some(vec![Vec::new()]);
    }
    descend(r - 1, 0.0, &u, center, bound, &mut c, &mut out, limit).then_some(out)
}
