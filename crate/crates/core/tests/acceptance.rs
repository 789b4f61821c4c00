//! Acceptance criteria 1-9. Each test prints one PASS/FAIL line.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use anisolattice::asymptotics::{dyadic_grid, fit_remainder, leading_term, sweep, LeadingOptions, SweepOptions};
use anisolattice::counting::{count_points, gauss_reference, CountOptions};
use anisolattice::domains::{slice_volume_ellipsoid, slice_volume_mc, Domain, Ellipsoid, OracleDomain};
use anisolattice::linalg::{self, gram, inverse, Matrix};
use anisolattice::scalar::parse_rational;
use anisolattice::spectral::{counting_function, equivalent_ball, spectral_leading_term, SpectralConfig};
use anisolattice::{build_subspace, QuadScalar, Rational, SubspaceData};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

fn q(s: &str) -> Rational {
    parse_rational(s).unwrap()
}

fn subspace(rows: &[&[&str]], n: usize) -> SubspaceData {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|s| s.parse::<QuadScalar>().unwrap()).collect())
        .collect();
    build_subspace(rows, n, None).unwrap()
}

fn report(id: u32, name: &str, passed: bool, elapsed: Duration, limit: Duration, detail: &str) {
    let ok = passed && elapsed <= limit;
    println!(
        "criterion {id} [{name}]: {} ({:.2?} of {:.0?}) {detail}",
        if ok { "PASS" } else { "FAIL" },
        elapsed,
        limit
    );
    assert!(passed, "criterion {id} failed: {detail}");
    assert!(elapsed <= limit, "criterion {id} too slow: {elapsed:?} > {limit:?}");
}

fn unit_disk() -> Domain {
    Ellipsoid::ball(vec![q("0"), q("0")], q("1")).unwrap().into()
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let num: i64 = rng.random_range(-4..=4);
    let den: i64 = rng.random_range(1..=3);
    Rational::new(num.into(), den.into())
}

/// Random rational subspaces of R^n with 2 ≤ n ≤ 4 and 1 ≤ p < n.
fn random_subspaces(count: usize, seed: u64) -> Vec<SubspaceData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.random_range(2..=4);
        let p = rng.random_range(1..n);
        let rows: Vec<Vec<QuadScalar>> = (0..p)
            .map(|_| (0..n).map(|_| QuadScalar::from_rational(random_rational(&mut rng))).collect())
            .collect();
        if let Ok(s) = build_subspace(rows, n, None) {
            out.push(s);
        }
    }
    out
}

#[test]
fn criterion_1_rational_line_lattice() {
    let start = Instant::now();
    let mut failures = Vec::new();
    for (p, qq) in [(1i64, 2i64), (2, 3), (3, 5)] {
        let slope = format!("{p}/{qq}");
        let s = subspace(&[&["1", &slope]], 2);
        let b = s.v_basis();
        let expect = vec![BigInt::from(qq), BigInt::from(p)];
        let neg: Vec<BigInt> = expect.iter().map(|x| -x).collect();
        let basis_ok = b.len() == 1 && (b[0] == expect || b[0] == neg);
        let norm = Rational::from_integer((p * p + qq * qq).into());
        let covol_ok = s.covolume_sq() == &norm;
        let dual = s.gamma_star().basis();
        let want: Vec<Rational> = [qq, p].iter().map(|&v| Rational::from_integer(v.into()) / &norm).collect();
        let want_neg: Vec<Rational> = want.iter().map(|x| -x).collect();
        let dual_ok = dual.len() == 1 && (dual[0] == want || dual[0] == want_neg);
        if !(basis_ok && covol_ok && dual_ok) {
            failures.push(format!("p/q={slope}: Γ={b:?} |Q|²={} Γ*={dual:?}", s.covolume_sq()));
        }
    }
    report(
        1,
        "rational line lattice",
        failures.is_empty(),
        start.elapsed(),
        Duration::from_secs(1),
        &failures.join("; "),
    );
}

#[test]
fn criterion_2_complement_volume() {
    let start = Instant::now();
    let subs = random_subspaces(60, 2);
    let bad: Vec<String> = subs
        .iter()
        .filter(|s| s.gamma_perp().covolume_sq() != *s.covolume_sq())
        .map(|s| format!("{:?}", s.f_basis()))
        .collect();
    report(
        2,
        "covol(Γ⊥) = covol(Γ)",
        bad.is_empty(),
        start.elapsed(),
        Duration::from_secs(10),
        &format!("{} subspaces, {} mismatches", subs.len(), bad.len()),
    );
}

/// Integer vectors of `[-h, h]^n`.
fn cube(n: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p: Vec<i64>| {
                (-h..=h).map(move |c| {
                    let mut v = p.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

#[test]
fn criterion_3_projection_lands_in_dual() {
    let start = Instant::now();
    let subs = random_subspaces(60, 2);
    let mut points = 0usize;
    let mut bad = Vec::new();
    for s in &subs {
        // Dual coordinates of π_V(x) are C x with C = (B* B*^T)^{-1} B* P_V.
        // B*^T C = P_V confirms C x reconstructs π_V(x) for every x; each
        // lattice point then only needs D C x ≡ 0 (mod D) in integers.
        let dual = s.gamma_star().basis();
        let ginv: Matrix<Rational> = inverse(&gram(dual)).expect("dual basis independent");
        let pv = s.projector_v();
        let c = linalg::mat_mul(&linalg::mat_mul(&ginv, dual), pv);
        let back = linalg::mat_mul(&linalg::transpose(dual, s.n()), &c);
        if &back != pv {
            bad.push(format!("{:?}: dual coordinates do not reconstruct π_V", s.f_basis()));
            continue;
        }
        let den = c
            .iter()
            .flatten()
            .fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
        let den_i = i128::try_from(&den).unwrap();
        let scaled: Vec<Vec<i128>> = c
            .iter()
            .map(|row| {
                row.iter()
                    .map(|x| i128::try_from(&(x * &den).to_integer()).unwrap())
                    .collect()
            })
            .collect();
        let ks = cube(s.n(), 5);
        points += ks.len();
        let failed = ks.par_iter().find_any(|k| {
            scaled.iter().any(|row| {
                let v: i128 = row.iter().zip(k.iter()).map(|(a, &b)| a * b as i128).sum();
                v % den_i != 0
            })
        });
        if let Some(k) = failed {
            bad.push(format!("{:?} at k={k:?}", s.f_basis()));
        }
    }
    report(
        3,
        "π_V(Z^n) ⊂ Γ*",
        bad.is_empty(),
        start.elapsed(),
        Duration::from_secs(30),
        &format!("{} subspaces, {points} points; {}", subs.len(), bad.join("; ")),
    );
}

fn spectral_grid() -> Vec<SubspaceData> {
    vec![
        subspace(&[&["1", "0"]], 2),
        subspace(&[&["1", "1/2"]], 2),
        subspace(&[&["1", "sqrt(2)"]], 2),
        subspace(&[&["1", "0", "0"], &["0", "1", "sqrt(2)"]], 3),
        subspace(&[&["1", "0", "1"], &["0", "1", "0"]], 3),
        subspace(&[&["1", "1/2", "1/3"]], 3),
        subspace(&[&["1", "sqrt(2)", "0"]], 3),
    ]
}

struct SpectralCase<'a> {
    subspace: &'a SubspaceData,
    potential: Vec<Rational>,
    eps: Rational,
    mu: Rational,
}

fn spectral_cases(subs: &[SubspaceData]) -> Vec<SpectralCase<'_>> {
    let mut out = Vec::new();
    for s in subs {
        let n = s.n();
        let mut half = vec![Rational::zero(); n];
        half[0] = q("1/2");
        for a in [vec![Rational::zero(); n], half] {
            for eps in ["1/2", "1/4", "1/8"] {
                for mu in ["1", "5/2", "4"] {
                    out.push(SpectralCase {
                        subspace: s,
                        potential: a.clone(),
                        eps: q(eps),
                        mu: q(mu),
                    });
                }
            }
        }
    }
    out
}

fn in_subspace(s: &SubspaceData, a: &[Rational]) -> bool {
    let x: Vec<QuadScalar> = a.iter().cloned().map(QuadScalar::from_rational).collect();
    let (_, xh) = s.decompose(&x).unwrap();
    xh.iter().all(QuadScalar::is_zero)
}

#[test]
fn criterion_4_spectral_equivalence() {
    let start = Instant::now();
    let subs = spectral_grid();
    let cases = spectral_cases(&subs);
    let opts = CountOptions::default();
    // (equal, literal form applicable, literal form equal)
    let results: Vec<(bool, bool, bool, String)> = cases
        .par_iter()
        .map(|c| {
            let cfg = SpectralConfig::new(c.subspace, c.potential.clone(), c.eps.clone(), c.mu.clone()).unwrap();
            let spectral = counting_function(&cfg, &opts).unwrap();
            let ball: Domain = equivalent_ball(&cfg).unwrap().into();
            let lattice = count_points(&ball, c.subspace, &c.eps, &opts).unwrap().total;
            let literal: Domain = Ellipsoid::ball(c.potential.clone(), c.mu.clone()).unwrap().into();
            let literal_count = count_points(&literal, c.subspace, &c.eps, &opts).unwrap().total;
            let applicable = in_subspace(c.subspace, &c.potential);
            (
                spectral == lattice,
                applicable,
                literal_count == spectral,
                format!(
                    "F={:?} A={:?} ε={} μ={}: N={spectral} n={lattice} literal={literal_count}",
                    c.subspace.f_basis(),
                    c.potential,
                    c.eps,
                    c.mu
                ),
            )
        })
        .collect();
    let mismatched: Vec<&String> = results.iter().filter(|r| !r.0).map(|r| &r.3).collect();
    let literal_bad: Vec<&String> = results.iter().filter(|r| r.1 && !r.2).map(|r| &r.3).collect();
    let literal_checked = results.iter().filter(|r| r.1).count();
    let off_subspace_diff = results.iter().filter(|r| !r.1 && !r.2).count();
    report(
        4,
        "N_ε(4π²μ) = n_ε(ball)",
        mismatched.is_empty() && literal_bad.is_empty(),
        start.elapsed(),
        Duration::from_secs(60),
        &format!(
            "{} configs; ball centered at A_F + εA_H; centered at A itself for the {literal_checked} \
             configs with A ∈ F ({} mismatches); A ∉ F differs from the A-centered ball in {off_subspace_diff} configs {:?}",
            results.len(),
            literal_bad.len(),
            mismatched
        ),
    );
}

#[test]
fn criterion_5_gauss_case() {
    let start = Instant::now();
    let s = subspace(&[], 2);
    let opts = CountOptions::default();
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for eps in dyadic_grid(0, 6) {
        let c = count_points(&unit_disk(), &s, &eps, &opts).unwrap().total;
        let g = gauss_reference(&unit_disk(), &eps, &opts).unwrap();
        let inv = 1.0 / anisolattice::scalar::rational_to_f64(&eps);
        let scaled = (c as f64 - inv * inv * PI).abs() / inv;
        worst = worst.max(scaled);
        if c != g || scaled > 10.0 {
            bad.push(format!("ε={eps}: count {c}, direct {g}, scaled remainder {scaled:.3}"));
        }
    }
    report(
        5,
        "Gauss circle",
        bad.is_empty(),
        start.elapsed(),
        Duration::from_secs(60),
        &format!("max |n - πε⁻²| ε = {worst:.3} {}", bad.join("; ")),
    );
}

fn line_sweep(slope: &str) -> Vec<anisolattice::asymptotics::SweepRecord> {
    let s = subspace(&[&["1", slope]], 2);
    sweep(&unit_disk(), &s, &dyadic_grid(3, 9), &SweepOptions::default()).unwrap()
}

#[test]
fn criterion_6_irrational_line_remainder() {
    let start = Instant::now();
    let recs = line_sweep("sqrt(2)");
    let fit = fit_remainder(&recs).unwrap();
    let rems: Vec<String> = recs
        .iter()
        .map(|r| format!("{:.3}", r.remainder.unwrap_or(f64::NAN)))
        .collect();
    report(
        6,
        "remainder slope, F = span(1, √2)",
        fit.slope <= 0.65 && recs.iter().all(|r| r.count.is_some()),
        start.elapsed(),
        Duration::from_secs(120),
        &format!(
            "slope {:.4} ± {:.4} over {} points; remainders [{}]",
            fit.slope,
            fit.stderr_slope,
            fit.n_points,
            rems.join(", ")
        ),
    );
}

#[test]
fn criterion_7_rational_line_remainder() {
    let start = Instant::now();
    let recs = line_sweep("1/2");
    let worst = recs
        .iter()
        .map(|r| r.remainder.map_or(f64::INFINITY, f64::abs))
        .fold(0.0, f64::max);
    report(
        7,
        "bounded remainder, F = span(1, 1/2)",
        worst <= 10.0,
        start.elapsed(),
        Duration::from_secs(120),
        &format!("max |remainder| = {worst:.4}"),
    );
}

fn random_ellipsoid(rng: &mut ChaCha8Rng, n: usize) -> Ellipsoid {
    // M = L L^T + I/4 with small rational L.
    let l: Matrix<Rational> = (0..n)
        .map(|_| (0..n).map(|_| random_rational(rng) / Rational::from_integer(2.into())).collect())
        .collect();
    let mut m = linalg::mat_mul(&l, &linalg::transpose(&l, n));
    for (i, row) in m.iter_mut().enumerate() {
        row[i] += q("1/4");
    }
    let center: Vec<Rational> = (0..n).map(|_| random_rational(rng) / Rational::from_integer(4.into())).collect();
    Ellipsoid::new(center, m).unwrap()
}

#[test]
fn criterion_8_slice_volume_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let subspaces = [
        subspace(&[&["1", "0"]], 2),
        subspace(&[&["1", "1/2"]], 2),
        subspace(&[&["1", "sqrt(2)"]], 2),
        subspace(&[&["1", "0", "0"]], 3),
        subspace(&[&["1", "1/2", "0"], &["0", "0", "1"]], 3),
        subspace(&[&["2", "-1", "1"]], 3),
    ];
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    while cases < 24 {
        let s = &subspaces[cases % subspaces.len()];
        let e = random_ellipsoid(&mut rng, s.n());
        // A fiber through a point near the center, so most slices are nonempty.
        let point: Vec<Rational> = e
            .center()
            .iter()
            .map(|c| c.to_rational().unwrap() + random_rational(&mut rng) / Rational::from_integer(8.into()))
            .collect();
        let exact = slice_volume_ellipsoid(&e, &point, s).unwrap();
        let oracle = OracleDomain::from_ellipsoid(&e);
        let (mc, se) = slice_volume_mc(&oracle, &point, s, 1_000_000, 1000 + cases as u64).unwrap();
        let z = if se > 0.0 {
            (mc - exact).abs() / se
        } else if mc == exact {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
        if z > 4.0 {
            bad.push(format!("case {cases}: exact {exact}, mc {mc} ± {se}"));
        }
        cases += 1;
    }
    report(
        8,
        "slice volume, closed form vs Monte Carlo",
        bad.is_empty(),
        start.elapsed(),
        Duration::from_secs(120),
        &format!("{cases} ellipsoids, max |z| = {worst:.2} {}", bad.join("; ")),
    );
}

#[test]
fn criterion_9_leading_term_cross_check() {
    let start = Instant::now();
    let subs = spectral_grid();
    let cases = spectral_cases(&subs);
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    for c in &cases {
        let cfg = SpectralConfig::new(c.subspace, c.potential.clone(), c.eps.clone(), c.mu.clone()).unwrap();
        let spectral = spectral_leading_term(&cfg).unwrap();
        let ball: Domain = Ellipsoid::ball(c.potential.clone(), c.mu.clone()).unwrap().into();
        let lattice = leading_term(&ball, c.subspace, &c.eps, &LeadingOptions::default()).unwrap().value;
        let rel = (spectral - lattice).abs() / spectral.abs().max(lattice.abs());
        worst = worst.max(rel);
        if rel.is_nan() || rel > 1e-9 {
            bad.push(format!("F={:?} A={:?} ε={} μ={}: {spectral} vs {lattice}", c.subspace.f_basis(), c.potential, c.eps, c.mu));
        }
    }
    report(
        9,
        "spectral vs lattice leading term",
        bad.is_empty(),
        start.elapsed(),
        Duration::from_secs(60),
        &format!("{} configs, max relative difference {worst:.2e} {}", cases.len(), bad.join("; ")),
    );
}
