//! Magnetic Laplacian on the flat torus with the adiabatic metric family.
//!
//! Eigenfunctions `exp(2πi<k, x>)` have eigenvalues
//! `λ_k = 4π² (|π_F(k-A)|² + ε² |π_H(k-A)|²)`. Energies are passed as
//! `μ = λ / 4π²` so every comparison stays exact.

use std::f64::consts::PI;

use num_traits::{One, Signed, Zero};

use crate::counting::{check_epsilon, for_each_slab, CountOptions};
use crate::domains::Ellipsoid;
use crate::error::{Error, Result};
use crate::lattice::SubspaceData;
use crate::linalg::{self, Matrix};
use crate::scalar::{format_rational, rational_to_f64, QuadScalar, Rational};

pub use crate::domains::unit_ball_volume;

#[derive(Debug, Clone)]
pub struct SpectralConfig<'a> {
    pub subspace: &'a SubspaceData,
    /// Magnetic potential.
    pub potential: Vec<Rational>,
    pub eps: Rational,
    /// Energy in units of `4π²`.
    pub mu: Rational,
}

impl<'a> SpectralConfig<'a> {
    pub fn new(subspace: &'a SubspaceData, potential: Vec<Rational>, eps: Rational, mu: Rational) -> Result<Self> {
        check_epsilon(&eps)?;
        if mu.is_negative() {
            return Err(Error::InvalidArgument(format!(
                "energy must be nonnegative, got {}",
                format_rational(&mu)
            )));
        }
        if potential.len() != subspace.n() {
            return Err(Error::DimensionMismatch {
                expected: subspace.n(),
                found: potential.len(),
            });
        }
        Ok(SpectralConfig {
            subspace,
            potential,
            eps,
            mu,
        })
    }

    pub fn lambda(&self) -> f64 {
        4.0 * PI * PI * rational_to_f64(&self.mu)
    }

    /// `P_F + ε² (I - P_F)`: the inverse metric in standard coordinates.
    fn inverse_metric(&self) -> Matrix<QuadScalar> {
        let n = self.subspace.n();
        let e2 = QuadScalar::from_rational(&self.eps * &self.eps);
        let one_minus = QuadScalar::from_rational(Rational::one() - &self.eps * &self.eps);
        let pf = self.subspace.projector_f();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let diag = if i == j { e2.clone() } else { QuadScalar::zero() };
                        diag + &one_minus * &pf[i][j]
                    })
                    .collect()
            })
            .collect()
    }
}

fn shifted(k: &[i64], a: &[Rational]) -> Vec<QuadScalar> {
    k.iter()
        .zip(a)
        .map(|(&ki, ai)| QuadScalar::from_rational(Rational::from_integer(ki.into()) - ai))
        .collect()
}

/// `λ_k / 4π²`, exactly.
pub fn scaled_eigenvalue(k: &[i64], cfg: &SpectralConfig) -> Result<QuadScalar> {
    let x = shifted(k, &cfg.potential);
    let (xf, xh) = cfg.subspace.decompose(&x)?;
    let e2 = QuadScalar::from_rational(&cfg.eps * &cfg.eps);
    Ok(linalg::dot(&xf, &xf) + e2 * linalg::dot(&xh, &xh))
}

/// `λ_k`, rounded once at the end.
pub fn eigenvalue(k: &[i64], cfg: &SpectralConfig) -> Result<f64> {
    Ok(4.0 * PI * PI * scaled_eigenvalue(k, cfg)?.to_f64())
}

/// `N_ε(4π²μ) = #{k : λ_k < 4π²μ}`.
///
/// Enumerates the box `|k_i - A_i| ≤ sqrt(μ (P_F + ε^{-2}(I - P_F))_{ii})`
/// and evaluates the quadratic form exactly at every point.
pub fn counting_function(cfg: &SpectralConfig, opts: &CountOptions) -> Result<u64> {
    if cfg.mu.is_zero() {
        return Ok(0);
    }
    let n = cfg.subspace.n();
    let pf = cfg.subspace.projector_f();
    let mu = rational_to_f64(&cfg.mu);
    let inv_e2 = rational_to_f64(&(&cfg.eps * &cfg.eps).recip());
    let mut ranges = Vec::with_capacity(n);
    let mut candidates: u128 = 1;
    for i in 0..n {
        let p = pf[i][i].to_f64();
        let half = (mu * (p + inv_e2 * (1.0 - p)).max(0.0)).sqrt() * (1.0 + 1e-9) + 1e-9;
        let c = rational_to_f64(&cfg.potential[i]);
        let (lo, hi) = ((c - half).floor(), (c + half).ceil());
        if !(lo.abs() < 9e15 && hi.abs() < 9e15) {
            return Err(Error::Overflow("spectral enumeration box".into()));
        }
        candidates = candidates.saturating_mul((hi - lo) as u128 + 1);
        ranges.push((lo as i64, hi as i64));
    }
    if candidates > opts.budget {
        return Err(Error::BudgetExceeded {
            candidates,
            budget: opts.budget,
        });
    }
    let g = cfg.inverse_metric();
    let mu = QuadScalar::from_rational(cfg.mu.clone());
    let counts = for_each_slab(&ranges, || 0u64, |acc, k| {
        let x = shifted(k, &cfg.potential);
        let gx = linalg::mat_vec(&g, &x);
        if (linalg::dot(&x, &gx) - &mu).sign() < 0 {
            *acc += 1;
        }
    });
    Ok(counts.into_iter().sum())
}

/// `ε^{-q} ω_{n-r} |Q|^{-1} Σ_{γ*} (μ - |γ* - π_V A|²)_+^{(n-r)/2}`.
///
/// The distance is measured to `π_V A`, the foot of the fiber through the
/// ball center, so the sum agrees with the slice sum of `B_√μ(A)`.
pub fn spectral_leading_term(cfg: &SpectralConfig) -> Result<f64> {
    let s = cfg.subspace;
    let m = s.n() - s.r();
    let center = s.project_v(&cfg.potential)?;
    let basis = s.gamma_star().basis();

    // In dual coordinates |γ* - π_V A|² = (c - c0)^T G (c - c0) with G the
    // Gram matrix of the dual basis and c0_j = <A, ℓ_j>.
    let gram: Vec<Vec<f64>> = linalg::gram(basis)
        .iter()
        .map(|r| r.iter().map(rational_to_f64).collect())
        .collect();
    let c0: Vec<f64> = s
        .v_basis()
        .iter()
        .map(|l| {
            let lr: Vec<Rational> = l.iter().cloned().map(Rational::from_integer).collect();
            rational_to_f64(&linalg::dot(&lr, &center))
        })
        .collect();
    let coeffs = linalg::integer_points_in_ellipsoid(&gram, &c0, rational_to_f64(&cfg.mu), usize::MAX)
        .unwrap_or_default();
    let mut sum = 0.0;
    for c in coeffs {
        let cr: Vec<Rational> = c.iter().map(|&v| Rational::from_integer(v.into())).collect();
        let gamma: Vec<Rational> = if basis.is_empty() {
            vec![Rational::zero(); s.n()]
        } else {
            s.gamma_star().combination(&cr)
        };
        let diff: Vec<Rational> = gamma.iter().zip(&center).map(|(a, b)| a - b).collect();
        let gap = &cfg.mu - linalg::dot(&diff, &diff);
        if gap.is_positive() {
            sum += rational_to_f64(&gap).powf(m as f64 / 2.0);
        }
    }
    let factor = rational_to_f64(&cfg.eps.recip().pow(s.q() as i32));
    Ok(sum * unit_ball_volume(m as u32) / s.covolume() * factor)
}

/// The ball whose integer-point count under `T_ε` equals
/// `N_ε(4π²μ)`: radius `√μ`, centered at `T_ε^{-1} A = A_F + ε A_H`.
pub fn equivalent_ball(cfg: &SpectralConfig) -> Result<Ellipsoid> {
    let a: Vec<QuadScalar> = cfg.potential.iter().cloned().map(QuadScalar::from_rational).collect();
    let (af, ah) = cfg.subspace.decompose(&a)?;
    let e = QuadScalar::from_rational(cfg.eps.clone());
    let center: Vec<QuadScalar> = af.iter().zip(&ah).map(|(f, h)| f + &(&e * h)).collect();
    if cfg.mu.is_zero() {
        return Err(Error::InvalidDomain("zero radius ball".into()));
    }
    Ellipsoid::ball(center, cfg.mu.clone())
}
