use ffpos_core::gf::Field;
use ffpos_core::numtheory::{self, gcd, DigitVector};
use proptest::prelude::*;

/// `C(a, b)` by the multiplicative formula in `u128`, exact for `a <= 60`.
fn binom(a: u64, b: u64) -> u128 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    (0..b).fold(1u128, |acc, i| acc * (a - i) as u128 / (i + 1) as u128)
}

proptest! {
    #[test]
    fn lucas_matches_exact_binomials(a in 0u64..=60, b in 0u64..=60, pi in 0usize..5) {
        let p = [2u64, 3, 5, 7, 13][pi];
        prop_assert_eq!(numtheory::lucas_binom(a, b, p) as u128, binom(a, b) % p as u128);
    }

    #[test]
    fn digit_vectors_round_trip(v in 0u64..1_000_000, pi in 0usize..4) {
        let p = [2u64, 3, 5, 11][pi];
        let d = DigitVector::new(v, p);
        prop_assert_eq!(d.value(), v);
        prop_assert!(d.digits.iter().all(|&x| x < p));
    }

    #[test]
    fn exponent_reduction_stays_in_range(e in 1u64..10_000, m in 1u64..500) {
        let r = numtheory::reduce_exponent(e, m);
        prop_assert!((1..=m).contains(&r));
        prop_assert_eq!(r % m, e % m);
    }
}

#[test]
fn phi_counts_units() {
    for n in 1..300u64 {
        let direct = (1..=n).filter(|&k| gcd(k, n) == 1).count() as u64;
        assert_eq!(numtheory::euler_phi(n), direct, "n={n}");
    }
}

#[test]
fn prime_power_detection() {
    assert_eq!(numtheory::prime_power(81), Some((3, 4)));
    assert_eq!(numtheory::prime_power(2), Some((2, 1)));
    assert_eq!(numtheory::prime_power(12), None);
    assert_eq!(numtheory::prime_power(1), None);
}

#[test]
fn multiplier_construction_lands_in_the_upper_half() {
    for q in [7u64, 11, 19, 23, 27, 31, 43] {
        let (p, k) = numtheory::prime_power(q).unwrap();
        let m = q - 1;
        for n in (1..m).filter(|&n| gcd(n, m) == 1 && !numtheory::is_power_of_p_mod(n, p, k)) {
            let r = numtheory::construct_r(n, p, k).unwrap();
            let s = numtheory::reduce_exponent(n * r, m);
            assert!(s > m / 2 && s < m, "q={q} n={n} r={r}");
            assert!(DigitVector::new(r, p)
                .digits
                .iter()
                .all(|&d| d <= (p - 1) / 2));
        }
        assert!(numtheory::construct_r(1, p, k).is_err());
    }
}

#[test]
fn weil_bound_is_tight_at_squares() {
    for (q, max) in [(9u32, 6u64), (25, 10), (49, 14)] {
        let f = Field::from_order(q).unwrap();
        assert_eq!(numtheory::weil_triple_scan(&f).unwrap(), max);
        assert!(numtheory::within_weil_bound(max, q as u64));
        assert!(!numtheory::within_weil_bound(max + 1, q as u64));
    }
}

#[test]
fn key_polynomial_routes() {
    let f = Field::from_order(27).unwrap();
    let h = numtheory::key_polynomial(&f, 1);
    for n in [1u64, 3, 9, 5, 7, 25] {
        let pointwise = numtheory::key_lemma_test(&f, n).unwrap();
        assert_eq!(pointwise, numtheory::is_power_of_p_mod(n, 3, 3), "n={n}");
        assert_eq!(pointwise, numtheory::key_polynomial(&f, n) == h, "n={n}");
    }
}
