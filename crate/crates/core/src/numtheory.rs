//! Integer helpers, base-`p` digits, Lucas' theorem, and the monomial criterion for
//! `q ≡ 3 (mod 4)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf::{Congruence, Elem, Field};

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Distinct prime divisors, ascending.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// `(p, k)` with `n = p^k`, if `n` is a prime power.
pub fn prime_power(n: u64) -> Option<(u64, u32)> {
    let f = prime_factors(n);
    if f.len() != 1 {
        return None;
    }
    let p = f[0];
    let mut k = 0;
    let mut m = n;
    while m > 1 {
        m /= p;
        k += 1;
    }
    Some((p, k))
}

pub fn euler_phi(n: u64) -> u64 {
    prime_factors(n).iter().fold(n, |acc, &p| acc / p * (p - 1))
}

/// Odd prime powers in `lo..=hi`.
pub fn odd_prime_powers(lo: u32, hi: u32) -> Vec<u32> {
    (lo..=hi)
        .filter(|&q| q % 2 == 1 && prime_power(q as u64).is_some())
        .collect()
}

/// Whether `n ≡ p^i (mod q - 1)` for some `0 <= i < k`.
pub fn is_power_of_p_mod(n: u64, p: u64, k: u32) -> bool {
    let m = p.pow(k) - 1;
    (0..k).any(|i| n % m == p.pow(i) % m)
}

/// Little-endian base-`p` digits with an explicit width.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitVector {
    pub p: u64,
    pub digits: Vec<u64>,
}

impl DigitVector {
    /// Minimal-width expansion (width 1 for zero).
    pub fn new(value: u64, p: u64) -> DigitVector {
        let mut digits = Vec::new();
        let mut v = value;
        loop {
            digits.push(v % p);
            v /= p;
            if v == 0 {
                break;
            }
        }
        DigitVector { p, digits }
    }

    /// Expansion padded with leading zeros to `width` digits; `value` must fit.
    pub fn with_width(value: u64, p: u64, width: usize) -> DigitVector {
        let mut d = DigitVector::new(value, p);
        assert!(
            d.digits.len() <= width || value == 0,
            "{value} does not fit in {width} digits"
        );
        d.digits.resize(width.max(1), 0);
        d
    }

    pub fn value(&self) -> u64 {
        self.digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    pub fn digit(&self, i: usize) -> u64 {
        self.digits.get(i).copied().unwrap_or(0)
    }
}

fn small_binom_mod(a: u64, b: u64, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    // a < p here, so the product of b terms never contains a multiple of p
    let mut num = 1u64;
    let mut den = 1u64;
    for i in 0..b {
        num = num * ((a - i) % p) % p;
        den = den * ((i + 1) % p) % p;
    }
    num * mod_inverse(den, p) % p
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    let mut r = 1u64;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// `C(a, b) mod p` as a product of digit-wise binomials.
pub fn lucas_binom(a: u64, b: u64, p: u64) -> u64 {
    if b > a {
        return 0;
    }
    let da = DigitVector::new(a, p);
    let db = DigitVector::with_width(b, p, da.digits.len());
    da.digits
        .iter()
        .zip(&db.digits)
        .fold(1, |acc, (&ai, &bi)| acc * small_binom_mod(ai, bi, p) % p)
}

/// Builds a multiplier `r` whose base-`p` digits are at most `(p-1)/2` and such that the
/// representative `s ∈ [1, q-1]` of `n r (mod q-1)` lies strictly between `(q-1)/2` and `q-1`.
///
/// Requires `q = p^k ≡ 3 (mod 4)`, `gcd(n, q-1) = 1` and `n` not a power of `p` modulo `q-1`.
pub fn construct_r(n: u64, p: u64, k: u32) -> Result<u64> {
    let q = p
        .checked_pow(k)
        .ok_or_else(|| Error::PreconditionViolated("q overflows".into()))?;
    if !is_prime(p) || q % 4 != 3 {
        return Err(Error::PreconditionViolated(format!(
            "q = {p}^{k} is not ≡ 3 (mod 4)"
        )));
    }
    let m = q - 1;
    if n == 0 || n > m {
        return Err(Error::PreconditionViolated(format!(
            "exponent {n} outside 1..={m}"
        )));
    }
    if gcd(n, m) != 1 {
        return Err(Error::PreconditionViolated(format!("gcd({n}, {m}) != 1")));
    }
    if is_power_of_p_mod(n, p, k) {
        return Err(Error::PreconditionViolated(format!(
            "{n} is a power of {p} mod {m}"
        )));
    }
    let k = k as usize;
    let digits = DigitVector::with_width(n, p, k);
    let t = *digits.digits.iter().max().unwrap();
    let j = (0..k).rev().find(|&i| digits.digits[i] == t).unwrap();
    let half = (p - 1) / 2;
    let r = if t > 1 {
        let rj = half / t + 1;
        rj * p.pow((k - 1 - j) as u32)
    } else {
        // all digits are 0/1 and at least two of them are 1
        let l = (0..j)
            .rev()
            .find(|&i| digits.digits[i] == 1)
            .ok_or_else(|| {
                Error::PreconditionViolated(format!("{n} has a single non-zero digit"))
            })?;
        half * p.pow((k - 1 - j) as u32) + half * p.pow((k - 1 - l) as u32)
    };
    let s = reduce_exponent(n * r, m);
    if !(s > m / 2 && s < m) {
        return Err(Error::RouteDisagreement(format!(
            "construction for n = {n}, q = {q} gave r = {r}, s = {s}"
        )));
    }
    Ok(r)
}

/// The representative of a positive exponent in `[1, m]`.
pub fn reduce_exponent(e: u64, m: u64) -> u64 {
    debug_assert!(e >= 1);
    (e - 1) % m + 1
}

/// A polynomial of degree at most `q - 1`: the canonical residue modulo `x^q - x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyModReduced {
    /// `coefficients[i]` multiplies `x^i`; length exactly `q`.
    pub coefficients: Vec<Elem>,
}

impl PolyModReduced {
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.iter().rposition(|c| !c.is_zero())
    }

    pub fn eval(&self, field: &Field, x: Elem) -> Elem {
        self.coefficients
            .iter()
            .rev()
            .fold(Elem::ZERO, |acc, &c| field.add(field.mul(acc, x), c))
    }
}

/// Folds every exponent `m >= 1` onto `[1, q-1]`; the constant term stays put.
pub fn reduce_mod_xq_minus_x(field: &Field, coefficients: &[Elem]) -> PolyModReduced {
    let q = field.size();
    let mut out = vec![Elem::ZERO; q];
    for (e, &c) in coefficients.iter().enumerate() {
        let idx = if e == 0 {
            0
        } else {
            reduce_exponent(e as u64, q as u64 - 1) as usize
        };
        out[idx] = field.add(out[idx], c);
    }
    PolyModReduced { coefficients: out }
}

fn require_three_mod_four(field: &Field) -> Result<()> {
    if field.congruence() != Congruence::ThreeModFour {
        return Err(Error::PreconditionViolated(format!(
            "q = {} is not ≡ 3 (mod 4)",
            field.q()
        )));
    }
    Ok(())
}

/// `(x^n - 1)^{(q-1)/2}` reduced modulo `x^q - x`, with coefficients from Lucas' theorem.
pub fn key_polynomial(field: &Field, n: u64) -> PolyModReduced {
    let q = field.q() as u64;
    let p = field.p() as u64;
    let half = (q - 1) / 2;
    let mut coeffs = vec![Elem::ZERO; q as usize];
    for r in 0..=half {
        let b = lucas_binom(half, r, p) as i64;
        let sign = if (half - r).is_multiple_of(2) { 1 } else { -1 };
        let c = field.from_int(sign * b);
        let idx = if r == 0 {
            0
        } else {
            reduce_exponent(n * r, q - 1) as usize
        };
        coeffs[idx] = field.add(coeffs[idx], c);
    }
    PolyModReduced {
        coefficients: coeffs,
    }
}

/// Whether `(x^n - 1)^{(q-1)/2}` and `(x - 1)^{(q-1)/2}` agree at every point of `F_q`.
///
/// The pointwise evaluation is the answer; the power-of-`p` criterion is recomputed
/// independently and any disagreement is reported as an error.
pub fn key_lemma_test(field: &Field, n: u64) -> Result<bool> {
    require_three_mod_four(field)?;
    let m = field.q() as u64 - 1;
    if n == 0 || gcd(n, m) != 1 {
        return Err(Error::PreconditionViolated(format!("gcd({n}, {m}) != 1")));
    }
    let half = m / 2;
    let agree = field.elements().all(|c| {
        let g = field.pow_u(field.sub(field.pow_u(c, n), Elem::ONE), half);
        let h = field.pow_u(field.sub(c, Elem::ONE), half);
        g == h
    });
    let digit = is_power_of_p_mod(n, field.p() as u64, field.k());
    if agree != digit {
        return Err(Error::RouteDisagreement(format!(
            "key lemma at q = {}, n = {n}: pointwise {agree}, digit criterion {digit}",
            field.q()
        )));
    }
    Ok(agree)
}

/// Largest `|Σ_x η((x-a)(x-b)(x-c))|` over unordered distinct triples.
pub fn weil_triple_scan(field: &Field) -> Result<u64> {
    if !field.is_odd() {
        return Err(Error::EvenCharacteristic);
    }
    crate::limits::check(field.q() as u128, 49)?;
    let q = field.q();
    let eta: Vec<i64> = field
        .elements()
        .map(|x| field.eta(x).as_i8() as i64)
        .collect();
    let max = (0..q)
        .into_par_iter()
        .map(|a| {
            let mut best = 0u64;
            for b in a + 1..q {
                for c in b + 1..q {
                    let s: i64 = field
                        .elements()
                        .map(|x| {
                            let prod = field.mul(
                                field.mul(field.sub(x, Elem(a)), field.sub(x, Elem(b))),
                                field.sub(x, Elem(c)),
                            );
                            eta[prod.index()]
                        })
                        .sum();
                    best = best.max(s.unsigned_abs());
                }
            }
            best
        })
        .max()
        .unwrap_or(0);
    Ok(max)
}

/// Whether `value <= 2 sqrt(q)`, compared exactly as `value^2 <= 4q`.
pub fn within_weil_bound(value: u64, q: u64) -> bool {
    value * value <= 4 * q
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigUint;
    use proptest::prelude::*;

    fn big_binom_mod(a: u64, b: u64, p: u64) -> u64 {
        let mut num = BigUint::from(1u32);
        let mut den = BigUint::from(1u32);
        for i in 0..b {
            num *= a - i;
            den *= i + 1;
        }
        let c = num / den;
        (c % p).try_into().unwrap()
    }

    #[test]
    fn integer_helpers() {
        assert_eq!(prime_factors(12), vec![2, 3]);
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(12), None);
        assert_eq!(prime_power(1), None);
        assert_eq!(euler_phi(7), 6);
        assert_eq!(euler_phi(15), 8);
        assert!(is_power_of_p_mod(3, 3, 3));
        assert!(is_power_of_p_mod(9, 3, 3));
        assert!(!is_power_of_p_mod(5, 3, 3));
        assert_eq!(odd_prime_powers(3, 13), vec![3, 5, 7, 9, 11, 13]);
    }

    #[test]
    fn digit_vectors() {
        let d = DigitVector::new(10, 7);
        assert_eq!(d.digits, vec![3, 1]);
        assert_eq!(d.value(), 10);
        let w = DigitVector::with_width(5, 3, 4);
        assert_eq!(w.digits, vec![2, 1, 0, 0]);
        assert_eq!(w.value(), 5);
    }

    #[test]
    fn lucas_examples() {
        assert_eq!(lucas_binom(10, 3, 7), 1);
        assert_eq!(lucas_binom(5, 2, 3), 1);
        // 9 = (1,0,0)_3 vs 1 = (0,0,1)_3: digit b_0 > a_0
        assert_eq!(lucas_binom(9, 1, 3), 0);
        assert_eq!(lucas_binom(3, 5, 3), 0);
    }

    #[test]
    fn lucas_matches_big_integer_binomials() {
        for &p in &[3u64, 5, 7, 11] {
            for a in 0..=300u64 {
                for b in 0..=a {
                    assert_eq!(
                        lucas_binom(a, b, p),
                        big_binom_mod(a, b, p),
                        "C({a},{b}) mod {p}"
                    );
                }
            }
        }
    }

    #[test]
    fn construct_r_examples() {
        assert_eq!(construct_r(5, 7, 1).unwrap(), 1);
        assert!(matches!(
            construct_r(3, 3, 3),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            construct_r(9, 3, 3),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            construct_r(2, 7, 1),
            Err(Error::PreconditionViolated(_))
        ));
        assert!(matches!(
            construct_r(3, 5, 1),
            Err(Error::PreconditionViolated(_))
        ));

        let r = construct_r(5, 3, 3).unwrap();
        let d = DigitVector::with_width(r, 3, 3);
        assert!(d.digits.iter().all(|&x| x <= 1));
        let s = reduce_exponent(5 * r, 26);
        assert!(13 < s && s < 26);
    }

    #[test]
    fn construct_r_sweep() {
        for &(p, k) in &[(7u64, 1u32), (11, 1), (19, 1), (23, 1), (3, 3)] {
            let m = p.pow(k) - 1;
            let mut count = 0;
            for n in 1..=m {
                if gcd(n, m) != 1 || is_power_of_p_mod(n, p, k) {
                    continue;
                }
                let r = construct_r(n, p, k).unwrap();
                let d = DigitVector::with_width(r, p, k as usize);
                assert!(d.digits.iter().all(|&x| x <= (p - 1) / 2));
                let s = reduce_exponent(n * r, m);
                assert!(s > m / 2 && s < m, "p={p} k={k} n={n}");
                count += 1;
            }
            assert!(count > 0);
        }
    }

    #[test]
    fn reduction_examples() {
        let f7 = Field::new(7, 1).unwrap();
        let mono = |e: usize| {
            let mut v = vec![Elem::ZERO; e + 1];
            v[e] = Elem::ONE;
            v
        };
        assert_eq!(
            reduce_mod_xq_minus_x(&f7, &mono(7)).coefficients,
            mono(1)
                .into_iter()
                .chain(std::iter::repeat(Elem::ZERO))
                .take(7)
                .collect::<Vec<_>>()
        );
        let r12 = reduce_mod_xq_minus_x(&f7, &mono(12));
        assert_eq!(r12.degree(), Some(6));
        assert_eq!(r12.coefficients[6], Elem::ONE);
        let c = reduce_mod_xq_minus_x(&f7, &[Elem(3)]);
        assert_eq!(c.degree(), Some(0));
        assert_eq!(c.coefficients[0], Elem(3));
    }

    proptest! {
        #[test]
        fn reduction_preserves_function(coeffs in proptest::collection::vec(0u32..9, 0..60)) {
            let f = Field::new(3, 2).unwrap();
            let coeffs: Vec<Elem> = coeffs.into_iter().map(Elem).collect();
            let red = reduce_mod_xq_minus_x(&f, &coeffs);
            prop_assert_eq!(red.coefficients.len(), 9);
            for x in f.elements() {
                let direct = coeffs.iter().enumerate().fold(Elem::ZERO, |acc, (e, &c)| {
                    f.add(acc, f.mul(c, f.pow_u(x, e as u64)))
                });
                prop_assert_eq!(red.eval(&f, x), direct);
            }
        }
    }

    #[test]
    fn key_lemma_examples() {
        let f27 = Field::new(3, 3).unwrap();
        assert!(key_lemma_test(&f27, 3).unwrap());
        assert!(!key_lemma_test(&f27, 5).unwrap());
        let f7 = Field::new(7, 1).unwrap();
        assert!(key_lemma_test(&f7, 1).unwrap());
        assert!(key_lemma_test(&f7, 2).is_err());
        let f9 = Field::new(3, 2).unwrap();
        assert!(key_lemma_test(&f9, 1).is_err());
    }

    #[test]
    fn key_lemma_routes_agree() {
        for &q in &[7u32, 11, 27] {
            let f = Field::from_order(q).unwrap();
            let m = q as u64 - 1;
            let half = (m / 2) as usize;
            for n in (1..=m).filter(|&n| gcd(n, m) == 1) {
                let pointwise = key_lemma_test(&f, n).unwrap();
                assert_eq!(pointwise, is_power_of_p_mod(n, f.p() as u64, f.k()));
                // Lucas route: reduced polynomial degree exceeds (q-1)/2 exactly off powers of p
                let g = key_polynomial(&f, n);
                let h = key_polynomial(&f, 1);
                assert_eq!(h.degree(), Some(half));
                assert_eq!(g == h, pointwise, "q={q} n={n}");
                if !pointwise {
                    assert!(g.degree().unwrap() > half);
                }
                for x in f.elements() {
                    let direct = f.pow_u(f.sub(f.pow_u(x, n), Elem::ONE), m / 2);
                    assert_eq!(g.eval(&f, x), direct);
                }
            }
        }
    }

    #[test]
    fn weil_examples() {
        let f3 = Field::new(3, 1).unwrap();
        // only triple {0,1,2}: the product vanishes everywhere
        assert_eq!(weil_triple_scan(&f3).unwrap(), 0);
        let f7 = Field::new(7, 1).unwrap();
        let m7 = weil_triple_scan(&f7).unwrap();
        assert!(m7 <= 5);
        assert!(within_weil_bound(m7, 7));
        let f13 = Field::new(13, 1).unwrap();
        assert!(weil_triple_scan(&f13).unwrap() <= 7);
        assert!(weil_triple_scan(&Field::new(2, 2).unwrap()).is_err());
        assert!(weil_triple_scan(&Field::new(53, 1).unwrap()).is_err());
        assert!(!within_weil_bound(6, 7));
    }
}
