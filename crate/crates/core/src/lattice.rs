//! The lattice apparatus attached to a linear subspace `F ⊂ R^n`.
//!
//! From a basis of `F` we build the orthogonal complement `H`, the integer
//! sublattice `Γ = Z^n ∩ F` (rank `r`, spanning `V`), its dual `Γ*` inside
//! `V`, the complementary lattice `Γ⊥ = Z^n ∩ V⊥`, the squared covolume
//! `|Q|^2 = vol(V/Γ)^2`, and the orthogonal projections onto `F` and `V`.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{
    self, clear_denominators, determinant, gram, int_to_rational, integer_kernel_basis, inverse,
    mat_mul, nullspace, transpose, Matrix,
};
use crate::scalar::{QuadScalar, Rational};

/// A sublattice of `Z^n` given by linearly independent integer vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegerLattice {
    ambient_dim: usize,
    basis: Matrix<BigInt>,
    gram_det: Rational,
}

impl IntegerLattice {
    pub fn new(ambient_dim: usize, basis: Matrix<BigInt>) -> Result<Self> {
        for v in &basis {
            if v.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: v.len(),
                });
            }
        }
        let rb = int_to_rational(&basis);
        if linalg::rank(&rb) != basis.len() {
            return Err(Error::DependentBasis);
        }
        let gram_det = if basis.is_empty() {
            Rational::one()
        } else {
            determinant(&gram(&rb))
        };
        Ok(IntegerLattice {
            ambient_dim,
            basis,
            gram_det,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &Matrix<BigInt> {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn rational_basis(&self) -> Matrix<Rational> {
        int_to_rational(&self.basis)
    }

    /// Squared covolume: the Gram determinant, 1 for the zero lattice.
    pub fn covolume_sq(&self) -> Rational {
        self.gram_det.clone()
    }

    /// Coefficients of `x` in the basis when `x` lies in the rational span.
    pub fn coordinates(&self, x: &[Rational]) -> Option<Vec<Rational>> {
        let b = self.rational_basis();
        let g = gram(&b);
        let ginv = inverse(&g)?;
        let bx = linalg::mat_vec(&b, x);
        let c = linalg::mat_vec(&ginv, &bx);
        let back = combine(&b, &c, self.ambient_dim);
        (back == x).then_some(c)
    }
}

/// The dual of a lattice inside its own rational span.
#[derive(Debug, Clone, PartialEq)]
pub struct DualLattice {
    ambient_dim: usize,
    basis: Matrix<Rational>,
}

impl DualLattice {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &Matrix<Rational> {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn covolume_sq(&self) -> Rational {
        if self.basis.is_empty() {
            Rational::one()
        } else {
            determinant(&gram(&self.basis))
        }
    }

    /// `Σ c_j ℓ*_j`.
    pub fn combination(&self, coeffs: &[Rational]) -> Vec<Rational> {
        combine(&self.basis, coeffs, self.ambient_dim)
    }
}

fn combine(basis: &Matrix<Rational>, coeffs: &[Rational], n: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); n];
    for (v, c) in basis.iter().zip(coeffs) {
        for (o, x) in out.iter_mut().zip(v) {
            *o += x * c;
        }
    }
    out
}

/// Squared covolume of either kind of lattice.
pub trait Covolume {
    fn covolume_sq(&self) -> Rational;
}

impl Covolume for IntegerLattice {
    fn covolume_sq(&self) -> Rational {
        IntegerLattice::covolume_sq(self)
    }
}

impl Covolume for DualLattice {
    fn covolume_sq(&self) -> Rational {
        DualLattice::covolume_sq(self)
    }
}

pub fn covolume_sq(lattice: &impl Covolume) -> Rational {
    lattice.covolume_sq()
}

/// Rows `a + b*sqrt(d)` become the two rational rows `a` and `b`; an integer
/// vector annihilates the original row iff it annihilates both.
pub fn split_quadratic_rows(rows: &Matrix<QuadScalar>) -> Matrix<Rational> {
    let mut out = Vec::with_capacity(rows.len() * 2);
    for row in rows {
        out.push(row.iter().map(|x| x.a().clone()).collect());
        if row.iter().any(|x| !x.is_rational()) {
            out.push(row.iter().map(|x| x.b().clone()).collect());
        }
    }
    out
}

/// The saturated lattice `Z^n ∩ ker(m)` in Hermite normal form.
///
/// Entries must be rational; quadratic rows have to go through
/// [`split_quadratic_rows`] first.
pub fn integer_kernel(m: &Matrix<QuadScalar>, n: usize) -> Result<IntegerLattice> {
    let mut rational = Vec::with_capacity(m.len());
    for row in m {
        if row.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: row.len(),
            });
        }
        let r: Option<Vec<Rational>> = row.iter().map(|x| x.to_rational().cloned()).collect();
        rational.push(r.ok_or(Error::NonRational)?);
    }
    integer_kernel_rational(&rational, n)
}

pub fn integer_kernel_rational(m: &Matrix<Rational>, n: usize) -> Result<IntegerLattice> {
    if let Some(row) = m.iter().find(|row| row.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: row.len(),
        });
    }
    let basis = integer_kernel_basis(&clear_denominators(m), n);
    IntegerLattice::new(n, basis)
}

/// Dual basis `B* = (B B^T)^{-1} B`, so that `<ℓ_i, ℓ*_j> = δ_ij`.
pub fn dual_basis(lattice: &IntegerLattice) -> DualLattice {
    let b = lattice.rational_basis();
    let basis = if b.is_empty() {
        Vec::new()
    } else {
        let ginv = inverse(&gram(&b)).expect("lattice basis is independent");
        mat_mul(&ginv, &b)
    };
    DualLattice {
        ambient_dim: lattice.ambient_dim,
        basis,
    }
}

/// Everything derived from one subspace `F`.
#[derive(Debug, Clone)]
pub struct SubspaceData {
    n: usize,
    d: u64,
    f_basis: Matrix<QuadScalar>,
    h_basis: Matrix<QuadScalar>,
    gamma: IntegerLattice,
    gamma_star: DualLattice,
    gamma_perp: IntegerLattice,
    covolume_sq: Rational,
    proj_f: Matrix<QuadScalar>,
    proj_v: Matrix<Rational>,
}

/// Builds the lattice apparatus for `F = span(f_basis) ⊂ R^n`.
///
/// `d` pins the quadratic field; when `None` it is read off the entries.
/// All irrational entries must share one field.
pub fn build_subspace(
    f_basis: Matrix<QuadScalar>,
    n: usize,
    d: Option<u64>,
) -> Result<SubspaceData> {
    if n == 0 {
        return Err(Error::InvalidSubspace("ambient dimension must be positive".into()));
    }
    let p = f_basis.len();
    if p >= n {
        return Err(Error::InvalidSubspace(format!(
            "dim F = {p} must be smaller than n = {n}"
        )));
    }
    let mut field = d;
    for v in &f_basis {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        for x in v {
            if let Some(fd) = x.field() {
                match field {
                    Some(0) | None => field = Some(fd),
                    Some(prev) if prev != fd => return Err(Error::FieldMismatch(prev, fd)),
                    _ => {}
                }
            }
        }
    }
    let d = field.unwrap_or(0);
    if !crate::scalar::is_squarefree(d) {
        return Err(Error::NotSquarefree(d));
    }
    if linalg::rank(&f_basis) != p {
        return Err(Error::DependentBasis);
    }

    let h_basis = if p == 0 {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| QuadScalar::from_i64((i == j) as i64))
                    .collect()
            })
            .collect()
    } else {
        nullspace(&f_basis, n)
    };
    debug_assert_eq!(h_basis.len(), n - p);

    let gamma = integer_kernel_rational(&split_quadratic_rows(&h_basis), n)?;
    let gamma_star = dual_basis(&gamma);
    let gamma_perp = integer_kernel_rational(&gamma.rational_basis(), n)?;
    let covolume_sq = gamma.covolume_sq();

    let proj_f = if p == 0 {
        vec![vec![QuadScalar::zero(); n]; n]
    } else {
        let ginv = inverse(&gram(&f_basis)).ok_or(Error::DependentBasis)?;
        mat_mul(&transpose(&f_basis, n), &mat_mul(&ginv, &f_basis))
    };
    let proj_v = if gamma.rank() == 0 {
        vec![vec![Rational::zero(); n]; n]
    } else {
        let b = gamma.rational_basis();
        mat_mul(&transpose(&b, n), &gamma_star.basis)
    };

    Ok(SubspaceData {
        n,
        d,
        f_basis,
        h_basis,
        gamma,
        gamma_star,
        gamma_perp,
        covolume_sq,
        proj_f,
        proj_v,
    })
}

impl SubspaceData {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.f_basis.len()
    }

    pub fn q(&self) -> usize {
        self.n - self.p()
    }

    /// Rank of `Γ`.
    pub fn r(&self) -> usize {
        self.gamma.rank()
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn f_basis(&self) -> &Matrix<QuadScalar> {
        &self.f_basis
    }

    pub fn h_basis(&self) -> &Matrix<QuadScalar> {
        &self.h_basis
    }

    pub fn gamma(&self) -> &IntegerLattice {
        &self.gamma
    }

    /// Basis of `V = span Γ`; the same vectors as `Γ`'s basis.
    pub fn v_basis(&self) -> &Matrix<BigInt> {
        self.gamma.basis()
    }

    pub fn gamma_star(&self) -> &DualLattice {
        &self.gamma_star
    }

    pub fn gamma_perp(&self) -> &IntegerLattice {
        &self.gamma_perp
    }

    /// `|Q|^2`.
    pub fn covolume_sq(&self) -> &Rational {
        &self.covolume_sq
    }

    /// `|Q|` as a float, for reporting and leading terms.
    pub fn covolume(&self) -> f64 {
        crate::scalar::rational_to_f64(&self.covolume_sq).sqrt()
    }

    /// Orthogonal projector onto `F`.
    pub fn projector_f(&self) -> &Matrix<QuadScalar> {
        &self.proj_f
    }

    /// Orthogonal projector onto `V`.
    pub fn projector_v(&self) -> &Matrix<Rational> {
        &self.proj_v
    }

    /// `π_V(x)`; the zero vector when `r = 0`.
    pub fn project_v(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.check_dim(x.len())?;
        Ok(linalg::mat_vec(&self.proj_v, x))
    }

    /// `(x_F, x_H)` with `x = x_F + x_H`, `x_F ∈ F`, `x_H ∈ H`.
    pub fn decompose(&self, x: &[QuadScalar]) -> Result<(Vec<QuadScalar>, Vec<QuadScalar>)> {
        self.check_dim(x.len())?;
        let xf = linalg::mat_vec(&self.proj_f, x);
        let xh = x.iter().zip(&xf).map(|(a, b)| a - b).collect();
        Ok((xf, xh))
    }

    /// Integer coordinates `<k, ℓ_j>` of `π_V(k)` in the dual basis. This is
    /// the fiber label of `k`.
    pub fn fiber_label(&self, k: &[i64]) -> Vec<i64> {
        self.gamma
            .basis()
            .iter()
            .map(|l| {
                l.iter()
                    .zip(k)
                    .map(|(a, &b)| a * BigInt::from(b))
                    .sum::<BigInt>()
                    .try_into()
                    .expect("fiber label fits in i64")
            })
            .collect()
    }

    /// Coefficients of `x ∈ V` in the dual basis `Γ*`, obtained by solving
    /// against the dual basis; `None` if `x ∉ V`.
    pub fn dual_coordinates(&self, x: &[Rational]) -> Option<Vec<Rational>> {
        let bs = &self.gamma_star.basis;
        if bs.is_empty() {
            return x.iter().all(Zero::is_zero).then(Vec::new);
        }
        let g = gram(bs);
        let ginv = inverse(&g)?;
        let c = linalg::mat_vec(&ginv, &linalg::mat_vec(bs, x));
        (self.gamma_star.combination(&c) == x).then_some(c)
    }

    fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }
}
