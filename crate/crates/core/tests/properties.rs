use anisolattice::asymptotics::{leading_term, LeadingOptions};
use anisolattice::counting::{count_points, CountOptions};
use anisolattice::domains::{contains, Domain, Ellipsoid, Membership};
use anisolattice::lattice::build_subspace;
use anisolattice::linalg::{self, int_to_rational};
use anisolattice::spectral::{counting_function, SpectralConfig};
use anisolattice::{QuadScalar, Rational, SubspaceData};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=6).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

/// Small entries keep `|Q|` and hence the number of fibers moderate.
fn small_rational() -> impl Strategy<Value = Rational> {
    (-3i64..=3, 1i64..=3).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

fn small_quad(d: u64) -> impl Strategy<Value = QuadScalar> {
    (small_rational(), small_rational()).prop_map(move |(a, b)| QuadScalar::new(a, b, d).unwrap())
}

fn positive_rational() -> impl Strategy<Value = Rational> {
    (1i64..=20, 1i64..=6).prop_map(|(a, b)| Rational::new(a.into(), b.into()))
}

fn quad(d: u64) -> impl Strategy<Value = QuadScalar> {
    (rational(), rational()).prop_map(move |(a, b)| QuadScalar::new(a, b, d).unwrap())
}

fn field() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

/// A basis of a `p`-dimensional subspace of `R^n`, rational or in `Q(sqrt(d))`.
fn subspace_strategy() -> impl Strategy<Value = SubspaceData> {
    (2usize..=3, any::<bool>(), field())
        .prop_flat_map(|(n, irrational, d)| {
            let entry = if irrational {
                small_quad(d).boxed()
            } else {
                small_rational().prop_map(QuadScalar::from_rational).boxed()
            };
            (1..n).prop_flat_map(move |p| {
                prop::collection::vec(prop::collection::vec(entry.clone(), n), p)
                    .prop_map(move |rows| (rows, n))
            })
        })
        .prop_filter_map("dependent rows", |(rows, n)| build_subspace(rows, n, None).ok())
}

fn unit_ball(n: usize) -> Domain {
    Ellipsoid::ball(vec![Rational::zero(); n], Rational::one()).unwrap().into()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_axioms(d in field(), x in quad(2), y in quad(2), z in quad(2)) {
        let lift = |v: &QuadScalar| QuadScalar::new(v.a().clone(), v.b().clone(), d).unwrap();
        let (x, y, z) = (lift(&x), lift(&y), lift(&z));
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&(&x - &y) + &y, x.clone());
        if !x.is_zero() {
            prop_assert_eq!(&x * &x.checked_recip().unwrap(), QuadScalar::one());
        }
    }

    #[test]
    fn squares_are_nonnegative(x in quad(3)) {
        prop_assert!((&x * &x).sign() >= 0);
    }

    #[test]
    fn float_agrees_with_exact_sign(x in quad(5)) {
        let f = x.to_f64();
        match x.sign() {
            0 => prop_assert_eq!(f, 0.0),
            s => prop_assert_eq!(f.signum() as i8, s),
        }
    }

    #[test]
    fn ordering_is_consistent_with_subtraction(x in quad(7), y in quad(7)) {
        let ord = x.try_cmp(&y).unwrap();
        prop_assert_eq!(ord as i8, (&x - &y).sign());
    }

    #[test]
    fn lattice_invariants(s in subspace_strategy()) {
        let n = s.n();
        prop_assert_eq!(s.p() + s.q(), n);
        prop_assert!(s.r() <= s.p());
        prop_assert_eq!(s.gamma_perp().rank(), n - s.r());
        prop_assert_eq!(s.gamma_perp().covolume_sq(), s.covolume_sq().clone());
        prop_assert!((s.gamma().covolume_sq() * s.gamma_star().covolume_sq()).is_one());
        let gamma = int_to_rational(s.v_basis());
        for (i, l) in gamma.iter().enumerate() {
            for (j, m) in s.gamma_star().basis().iter().enumerate() {
                let want = if i == j { Rational::one() } else { Rational::zero() };
                prop_assert_eq!(linalg::dot(l, m), want);
            }
            for w in int_to_rational(s.gamma_perp().basis()) {
                prop_assert!(linalg::dot(l, &w).is_zero());
            }
        }
    }

    #[test]
    fn fiber_labels_are_dual_coordinates(s in subspace_strategy(), k in prop::collection::vec(-6i64..=6, 3)) {
        let k = &k[..s.n()];
        let kr: Vec<Rational> = k.iter().map(|&v| Rational::from_integer(v.into())).collect();
        let coords = s.dual_coordinates(&s.project_v(&kr).unwrap()).unwrap();
        let label: Vec<Rational> = s.fiber_label(k).iter().map(|&v| Rational::from_integer(v.into())).collect();
        prop_assert_eq!(coords, label);
    }

    #[test]
    fn membership_is_monotone_in_radius(
        r1 in positive_rational(),
        extra in positive_rational(),
        x in prop::collection::vec(rational(), 2),
    ) {
        let small: Domain = Ellipsoid::ball(vec![Rational::zero(); 2], r1.clone()).unwrap().into();
        let big: Domain = Ellipsoid::ball(vec![Rational::zero(); 2], r1 + extra).unwrap().into();
        let x: Vec<QuadScalar> = x.into_iter().map(QuadScalar::from_rational).collect();
        if contains(&small, &x).unwrap() == Membership::In {
            prop_assert_eq!(contains(&big, &x).unwrap(), Membership::In);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fibers_partition_the_count(s in subspace_strategy(), e in 1i64..=4) {
        let eps = Rational::new(BigInt::one(), BigInt::from(e));
        let c = count_points(&unit_ball(s.n()), &s, &eps, &CountOptions::default()).unwrap();
        prop_assert_eq!(c.fiber_sum(), c.total);
    }

    #[test]
    fn symmetric_domains_have_symmetric_fibers(s in subspace_strategy(), e in 1i64..=4) {
        let eps = Rational::new(BigInt::one(), BigInt::from(e));
        let c = count_points(&unit_ball(s.n()), &s, &eps, &CountOptions::default()).unwrap();
        for (label, v) in &c.by_fiber {
            let neg: Vec<i64> = label.iter().map(|x| -x).collect();
            prop_assert_eq!(*v, c.fiber(&neg));
        }
    }

    #[test]
    fn counts_grow_with_the_ball(s in subspace_strategy(), r1 in positive_rational(), extra in positive_rational()) {
        let n = s.n();
        let eps = Rational::new(BigInt::one(), BigInt::from(2));
        let small: Domain = Ellipsoid::ball(vec![Rational::zero(); n], r1.clone() / Rational::from_integer(4.into())).unwrap().into();
        let big: Domain = Ellipsoid::ball(vec![Rational::zero(); n], (r1 + extra) / Rational::from_integer(4.into())).unwrap().into();
        let opts = CountOptions::default();
        let a = count_points(&small, &s, &eps, &opts).unwrap().total;
        let b = count_points(&big, &s, &eps, &opts).unwrap().total;
        prop_assert!(a <= b);
    }

    #[test]
    fn leading_term_doubles_per_halving_of_eps(s in subspace_strategy(), e in 0u32..=3) {
        let eps = Rational::new(BigInt::one(), BigInt::one() << e);
        let half = &eps / Rational::from_integer(2.into());
        let opts = LeadingOptions::default();
        let a = leading_term(&unit_ball(s.n()), &s, &eps, &opts).unwrap().value;
        let b = leading_term(&unit_ball(s.n()), &s, &half, &opts).unwrap().value;
        prop_assert_eq!(b, a * f64::powi(2.0, s.q() as i32));
    }

    #[test]
    fn gauge_shift_leaves_spectrum_invariant(
        s in subspace_strategy(),
        a in prop::collection::vec(rational(), 3),
        shift in prop::collection::vec(-3i64..=3, 3),
        mu in positive_rational(),
    ) {
        let n = s.n();
        let a: Vec<Rational> = a[..n].iter().map(|x| x / Rational::from_integer(8.into())).collect();
        let shifted: Vec<Rational> = a.iter().zip(&shift).map(|(x, &t)| x + Rational::from_integer(t.into())).collect();
        let eps = Rational::new(BigInt::one(), BigInt::from(2));
        let mu = mu / Rational::from_integer(4.into());
        let opts = CountOptions::default();
        let c1 = counting_function(&SpectralConfig::new(&s, a, eps.clone(), mu.clone()).unwrap(), &opts).unwrap();
        let c2 = counting_function(&SpectralConfig::new(&s, shifted, eps, mu).unwrap(), &opts).unwrap();
        prop_assert_eq!(c1, c2);
    }

    #[test]
    fn spectral_count_is_monotone_in_energy(s in subspace_strategy(), mu in positive_rational(), extra in positive_rational()) {
        let n = s.n();
        let eps = Rational::new(BigInt::one(), BigInt::from(2));
        let opts = CountOptions::default();
        let scale = Rational::from_integer(4.into());
        let lo = SpectralConfig::new(&s, vec![Rational::zero(); n], eps.clone(), &mu / &scale).unwrap();
        let hi = SpectralConfig::new(&s, vec![Rational::zero(); n], eps, (mu + extra) / scale).unwrap();
        prop_assert!(counting_function(&lo, &opts).unwrap() <= counting_function(&hi, &opts).unwrap());
    }
}
