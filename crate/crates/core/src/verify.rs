//! Exact self-checks of the lattice, counting and spectral identities for
//! one subspace. Failures are reported, never raised.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::asymptotics::{candidate_fibers, leading_term, LeadingOptions};
use crate::counting::{count_points, gauss_reference, CountOptions};
use crate::domains::{Domain, Ellipsoid};
use crate::lattice::SubspaceData;
use crate::linalg::{self, determinant, int_to_rational};
use crate::scalar::{format_rational, QuadScalar, Rational};
use crate::spectral::{counting_function, equivalent_ball, spectral_leading_term, SpectralConfig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub all_passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Domain for the counting checks; the unit ball when absent.
    pub domain: Option<Domain>,
    pub eps: Rational,
    pub budget: u128,
    /// Upper bound on the number of points in the projection-inclusion box.
    pub box_points: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            domain: None,
            eps: Rational::new(1.into(), 2.into()),
            budget: CountOptions::default().budget,
            box_points: 20_000,
        }
    }
}

struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.0.push(Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        });
    }
}

fn gcd_of_maximal_minors(basis: &[Vec<BigInt>], n: usize) -> BigInt {
    let r = basis.len();
    if r == 0 {
        return BigInt::one();
    }
    let rows = int_to_rational(&basis.to_vec());
    let mut g = BigInt::zero();
    let mut cols: Vec<usize> = (0..r).collect();
    loop {
        let minor: Vec<Vec<Rational>> = rows
            .iter()
            .map(|row| cols.iter().map(|&c| row[c].clone()).collect())
            .collect();
        g = g.gcd(&determinant(&minor).to_integer());
        // next r-combination of 0..n
        let mut i = r;
        loop {
            if i == 0 {
                return g;
            }
            i -= 1;
            if cols[i] < n - r + i {
                cols[i] += 1;
                for j in i + 1..r {
                    cols[j] = cols[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn lattice_checks(s: &SubspaceData, opts: &VerifyOptions, out: &mut Checks) {
    let n = s.n();
    let gamma = int_to_rational(s.v_basis());
    let dual = s.gamma_star().basis();

    let pairing = gamma.iter().enumerate().all(|(i, l)| {
        dual.iter().enumerate().all(|(j, m)| {
            let want = if i == j { Rational::one() } else { Rational::zero() };
            linalg::dot(l, m) == want
        })
    });
    out.push("pairing", pairing, "<ℓ_i, ℓ*_j> = δ_ij");

    let in_v = dual
        .iter()
        .all(|m| s.project_v(m).map(|p| &p == m).unwrap_or(false));
    out.push("dual_in_v", in_v, "dual basis lies in span(Γ)");

    let prod = s.gamma().covolume_sq() * s.gamma_star().covolume_sq();
    out.push(
        "duality",
        prod.is_one(),
        format!("|Q|² · covol²(Γ*) = {}", format_rational(&prod)),
    );

    let perp = s.gamma_perp().covolume_sq();
    out.push(
        "perp_volume",
        &perp == s.covolume_sq(),
        format!(
            "covol²(Γ⊥) = {}, |Q|² = {}",
            format_rational(&perp),
            format_rational(s.covolume_sq())
        ),
    );

    let gs = gcd_of_maximal_minors(s.v_basis(), n);
    let gp = gcd_of_maximal_minors(s.gamma_perp().basis(), n);
    out.push(
        "saturation",
        gs.is_one() && gp.is_one(),
        format!("gcd of maximal minors: Γ {gs}, Γ⊥ {gp}"),
    );

    let pf = s.projector_f();
    let gamma_q: Vec<Vec<QuadScalar>> = gamma
        .iter()
        .map(|v| v.iter().cloned().map(QuadScalar::from_rational).collect())
        .collect();
    let in_f = gamma_q.iter().all(|v| &linalg::mat_vec(pf, v) == v);
    out.push("gamma_in_f", in_f, "Γ ⊂ F");

    let orth = s
        .f_basis()
        .iter()
        .all(|f| s.h_basis().iter().all(|h| linalg::dot(f, h).is_zero()));
    out.push("h_perp_f", orth, "H ⊥ F");

    let mut half = 5i64;
    while half > 0 && ((2 * half + 1) as f64).powi(n as i32) > opts.box_points as f64 {
        half -= 1;
    }
    let mut k = vec![-half; n];
    let mut bad = None;
    let mut visited = 0u64;
    'outer: loop {
        visited += 1;
        let kr: Vec<Rational> = k.iter().map(|&v| Rational::from_integer(v.into())).collect();
        let ok = s
            .project_v(&kr)
            .ok()
            .and_then(|p| s.dual_coordinates(&p))
            .is_some_and(|c| c.iter().all(|x| x.is_integer()));
        if !ok {
            bad = Some(k.clone());
            break;
        }
        for i in (0..n).rev() {
            if k[i] < half {
                k[i] += 1;
                continue 'outer;
            }
            k[i] = -half;
        }
        break;
    }
    out.push(
        "projection_inclusion",
        bad.is_none(),
        match bad {
            None => format!("π_V(k) ∈ Γ* for {visited} points of [-{half},{half}]^{n}"),
            Some(k) => format!("π_V({k:?}) ∉ Γ*"),
        },
    );
}

fn unit_ball(n: usize) -> Domain {
    Ellipsoid::ball(vec![Rational::zero(); n], Rational::one())
        .expect("unit ball")
        .into()
}

fn counting_checks(s: &SubspaceData, opts: &VerifyOptions, out: &mut Checks) {
    let domain = opts.domain.clone().unwrap_or_else(|| unit_ball(s.n()));
    let copts = CountOptions { budget: opts.budget };
    let count = match count_points(&domain, s, &opts.eps, &copts) {
        Ok(c) => c,
        Err(e) => {
            out.push("fiber_sum", false, e.to_string());
            return;
        }
    };
    out.push(
        "fiber_sum",
        count.fiber_sum() == count.total,
        format!("Σ fibers = {}, total = {}", count.fiber_sum(), count.total),
    );

    match candidate_fibers(&domain, s, LeadingOptions::default().max_fibers) {
        Ok(labels) => {
            let allowed: BTreeSet<Vec<i64>> = labels.into_iter().collect();
            let stray = count.by_fiber.keys().find(|k| !allowed.contains(*k));
            out.push(
                "finite_fibers",
                stray.is_none(),
                match stray {
                    None => format!(
                        "{} occupied fibers among {} candidates",
                        count.by_fiber.len(),
                        allowed.len()
                    ),
                    Some(k) => format!("occupied fiber {k:?} outside the candidate set"),
                },
            );
        }
        Err(e) => out.push("finite_fibers", false, e.to_string()),
    }

    if s.p() == 0 {
        match gauss_reference(&domain, &opts.eps, &copts) {
            Ok(g) => out.push(
                "gauss_equivalence",
                g == count.total,
                format!("count {} vs direct {}", count.total, g),
            ),
            Err(e) => out.push("gauss_equivalence", false, e.to_string()),
        }
    }
}

fn spectral_checks(s: &SubspaceData, opts: &VerifyOptions, out: &mut Checks) {
    let n = s.n();
    let copts = CountOptions { budget: opts.budget };
    let mut half = vec![Rational::zero(); n];
    half[0] = Rational::new(1.into(), 2.into());
    let mut details = Vec::new();
    let mut equal = true;
    let mut lead_ok = true;
    for a in [vec![Rational::zero(); n], half] {
        for mu in ["1", "5/2"] {
            let mu: Rational = crate::scalar::parse_rational(mu).expect("literal");
            let run = || -> crate::Result<(u64, u64, f64, f64)> {
                let cfg = SpectralConfig::new(s, a.clone(), opts.eps.clone(), mu.clone())?;
                let spectral = counting_function(&cfg, &copts)?;
                let ball = equivalent_ball(&cfg)?;
                let lattice = count_points(&ball.into(), s, &opts.eps, &copts)?.total;
                let sl = spectral_leading_term(&cfg)?;
                let centered = Ellipsoid::ball(a.clone(), mu.clone())?;
                let ll = leading_term(&centered.into(), s, &opts.eps, &LeadingOptions::default())?.value;
                Ok((spectral, lattice, sl, ll))
            };
            let label = format!(
                "A=({}) μ={}",
                a.iter().map(format_rational).collect::<Vec<_>>().join(","),
                format_rational(&mu)
            );
            match run() {
                Ok((sp, la, sl, ll)) => {
                    equal &= sp == la;
                    let rel = (sl - ll).abs() / sl.abs().max(ll.abs()).max(f64::MIN_POSITIVE);
                    lead_ok &= rel <= 1e-9 || sl == ll;
                    details.push(format!("{label}: N={sp} n={la}"));
                }
                Err(e) => {
                    equal = false;
                    lead_ok = false;
                    details.push(format!("{label}: {e}"));
                }
            }
        }
    }
    out.push("spectral_equivalence", equal, details.join("; "));
    out.push(
        "spectral_leading_term",
        lead_ok,
        "spectral leading term equals the slice sum of B_√μ(A)",
    );
}

/// Runs every check for the subspace.
pub fn verify_suite(s: &SubspaceData, opts: &VerifyOptions) -> VerifyReport {
    let mut out = Checks(Vec::new());
    lattice_checks(s, opts, &mut out);
    if opts.eps.is_positive() {
        counting_checks(s, opts, &mut out);
        spectral_checks(s, opts, &mut out);
    } else {
        out.push("epsilon", false, format!("ε = {} is not positive", format_rational(&opts.eps)));
    }
    VerifyReport {
        schema_version: crate::SCHEMA_VERSION,
        all_passed: out.0.iter().all(|c| c.passed),
        checks: out.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_subspace;

    fn subspace(rows: &[&[&str]], n: usize) -> SubspaceData {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|s| s.parse().unwrap()).collect())
            .collect();
        build_subspace(rows, n, None).unwrap()
    }

    fn assert_all_pass(r: &VerifyReport) {
        for c in &r.checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
        assert!(r.all_passed);
    }

    #[test]
    fn rational_line() {
        let r = verify_suite(&subspace(&[&["1", "1/2"]], 2), &VerifyOptions::default());
        assert_all_pass(&r);
        assert!(r.checks.iter().any(|c| c.name == "projection_inclusion"));
    }

    #[test]
    fn irrational_line() {
        assert_all_pass(&verify_suite(&subspace(&[&["1", "sqrt(2)"]], 2), &VerifyOptions::default()));
    }

    #[test]
    fn trivial_subspace_runs_gauss_check() {
        let r = verify_suite(&subspace(&[], 2), &VerifyOptions::default());
        assert_all_pass(&r);
        assert!(r.checks.iter().any(|c| c.name == "gauss_equivalence"));
    }

    #[test]
    fn plane_in_three_space() {
        let s = subspace(&[&["1", "0", "0"], &["0", "1", "sqrt(2)"]], 3);
        assert_all_pass(&verify_suite(&s, &VerifyOptions::default()));
    }

    #[test]
    fn minors_detect_non_saturated_bases() {
        let b = vec![vec![BigInt::from(2), BigInt::from(4)]];
        assert_eq!(gcd_of_maximal_minors(&b, 2), BigInt::from(2));
    }
}
