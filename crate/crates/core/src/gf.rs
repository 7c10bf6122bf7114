//! Finite fields `F_{p^k}` with dense lookup tables.
//!
//! Elements are stored as integer codes: the polynomial `c_0 + c_1 x + ... + c_{k-1} x^{k-1}`
//! over `F_p` is encoded as `c_0 + c_1 p + ... + c_{k-1} p^{k-1}`. Code `0` is the additive
//! identity and code `1` the multiplicative identity; the prime subfield occupies codes `0..p`.
//!
//! The modulus is the monic irreducible polynomial of degree `k` whose low coefficients, read
//! as a base-`p` integer in the same packing, are smallest. The generator is the smallest code of
//! multiplicative order `q - 1`.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limits;
use crate::numtheory::{is_prime, prime_factors, prime_power};

/// Field element, encoded as a base-`p` packed coefficient vector.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Elem(pub u32);

impl Elem {
    pub const ZERO: Elem = Elem(0);
    pub const ONE: Elem = Elem(1);

    #[inline]
    pub fn code(self) -> u32 {
        self.0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Elem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Value of the quadratic character: square, non-square, or zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn from_i8(v: i8) -> Sign {
        match v.signum() {
            -1 => Sign::Negative,
            0 => Sign::Zero,
            _ => Sign::Positive,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_i8(self.as_i8() * rhs.as_i8())
    }
}

/// Residue class of the field order that decides which structure theory applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Congruence {
    Even,
    OneModFour,
    ThreeModFour,
}

/// Serializable description of a field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub p: u32,
    pub k: u32,
    pub q: u32,
    /// Coefficients `c_0..c_k` of the monic modulus.
    pub modulus: Vec<u32>,
    pub generator: u32,
}

const TABLE_MAX_Q: u32 = 256;

/// A concrete finite field `F_q`, `q = p^k`.
///
/// All tables are built at construction and never mutated, so a `Field` can be shared freely
/// between threads.
#[derive(Clone)]
pub struct Field {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u32>,
    generator: Elem,
    /// `exp[i] = g^i` for `i < 2(q-1)`.
    exp: Vec<u32>,
    /// Discrete logarithm base `g`; `log[0]` is unused.
    log: Vec<u32>,
    neg: Vec<u32>,
    signs: Vec<Sign>,
    positives: Vec<Elem>,
    add_tab: Option<Vec<u32>>,
    mul_tab: Option<Vec<u32>>,
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Field")
            .field("p", &self.p)
            .field("k", &self.k)
            .field("q", &self.q)
            .field("modulus", &self.modulus)
            .field("generator", &self.generator)
            .finish()
    }
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for Field {}

impl Field {
    /// Builds `F_{p^k}` under the default order bound of `2^20`.
    pub fn new(p: u32, k: u32) -> Result<Field> {
        Field::with_order_limit(p, k, limits::DEFAULT_FIELD_ORDER_LIMIT)
    }

    /// Builds the field of order `q`, which must be a prime power.
    pub fn from_order(q: u32) -> Result<Field> {
        match prime_power(q as u64) {
            Some((p, k)) => Field::new(p as u32, k),
            None => Err(Error::InvalidInput(format!("{q} is not a prime power"))),
        }
    }

    pub fn with_order_limit(p: u32, k: u32, max_q: u64) -> Result<Field> {
        if !is_prime(p as u64) {
            return Err(Error::NotPrime(p as u64));
        }
        if k == 0 {
            return Err(Error::ZeroDegree);
        }
        let q = (p as u128).checked_pow(k).unwrap_or(u128::MAX);
        limits::check(q, max_q as u128)?;
        let q = q as u32;

        let modulus = smallest_irreducible(p, k).ok_or(Error::NoIrreducible { p, k })?;
        let poly = PolyRing {
            p,
            k,
            modulus: &modulus,
        };

        // The smallest element whose order is exactly q - 1.
        let order = (q - 1) as u64;
        let factors = prime_factors(order);
        let generator = (1..q)
            .find(|&c| {
                factors
                    .iter()
                    .all(|&l| poly.pow(c, order / l) != 1 || order == 1)
            })
            .expect("the multiplicative group of a field is cyclic");

        let m = (q - 1) as usize;
        let mut exp = vec![0u32; 2 * m.max(1)];
        let mut log = vec![u32::MAX; q as usize];
        let mut cur = 1u32;
        for i in 0..m {
            exp[i] = cur;
            assert_eq!(
                log[cur as usize],
                u32::MAX,
                "generator has order below q - 1"
            );
            log[cur as usize] = i as u32;
            cur = poly.mul(cur, generator);
        }
        for i in m..exp.len() {
            exp[i] = exp[i - m];
        }

        let neg: Vec<u32> = (0..q)
            .map(|a| digitwise(p, k, a, 0, |x, _| (p - x) % p))
            .collect();

        let mut field = Field {
            p,
            k,
            q,
            modulus,
            generator: Elem(generator),
            exp,
            log,
            neg,
            signs: Vec::new(),
            positives: Vec::new(),
            add_tab: None,
            mul_tab: None,
        };
        if q <= TABLE_MAX_Q {
            let n = q as usize;
            let mut add = vec![0u32; n * n];
            let mut mul = vec![0u32; n * n];
            for a in 0..q {
                for b in 0..q {
                    add[a as usize * n + b as usize] = field.add_slow(a, b);
                    mul[a as usize * n + b as usize] = field.mul(Elem(a), Elem(b)).0;
                }
            }
            field.add_tab = Some(add);
            field.mul_tab = Some(mul);
        }

        field.signs = (0..q)
            .map(|x| {
                if x == 0 {
                    Sign::Zero
                } else if p == 2 {
                    Sign::Positive
                } else {
                    let e = field.pow_u(Elem(x), ((q - 1) / 2) as u64);
                    if e == Elem::ONE {
                        Sign::Positive
                    } else {
                        debug_assert_eq!(e, field.neg(Elem::ONE));
                        Sign::Negative
                    }
                }
            })
            .collect();
        let mut pos: Vec<Elem> = (1..q).map(|x| field.mul(Elem(x), Elem(x))).collect();
        pos.sort_unstable();
        pos.dedup();
        field.positives = pos;
        Ok(field)
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.q as usize
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Elem {
        self.generator
    }

    pub fn is_odd(&self) -> bool {
        self.p != 2
    }

    pub fn congruence(&self) -> Congruence {
        if self.p == 2 {
            Congruence::Even
        } else if self.q % 4 == 1 {
            Congruence::OneModFour
        } else {
            Congruence::ThreeModFour
        }
    }

    pub fn info(&self) -> FieldInfo {
        FieldInfo {
            p: self.p,
            k: self.k,
            q: self.q,
            modulus: self.modulus.clone(),
            generator: self.generator.0,
        }
    }

    /// All elements in code order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + Clone {
        (0..self.q).map(Elem)
    }

    pub fn nonzero(&self) -> impl Iterator<Item = Elem> + Clone {
        (1..self.q).map(Elem)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: i64) -> Elem {
        Elem(v.rem_euclid(self.p as i64) as u32)
    }

    pub fn contains(&self, x: Elem) -> bool {
        x.0 < self.q
    }

    /// Coefficients `c_0..c_{k-1}` of the polynomial represented by `x`.
    pub fn digits(&self, x: Elem) -> Vec<u32> {
        let mut v = x.0;
        (0..self.k)
            .map(|_| {
                let d = v % self.p;
                v /= self.p;
                d
            })
            .collect()
    }

    pub fn from_digits(&self, digits: &[u32]) -> Elem {
        Elem(
            digits
                .iter()
                .rev()
                .fold(0, |acc, &d| acc * self.p + d % self.p),
        )
    }

    fn add_slow(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            a ^ b
        } else {
            let p = self.p;
            digitwise(p, self.k, a, b, |x, y| (x + y) % p)
        }
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match &self.add_tab {
            Some(t) => Elem(t[a.index() * self.size() + b.index()]),
            None => Elem(self.add_slow(a.0, b.0)),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        Elem(self.neg[a.index()])
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if let Some(t) = &self.mul_tab {
            return Elem(t[a.index() * self.size() + b.index()]);
        }
        if a.0 == 0 || b.0 == 0 {
            return Elem::ZERO;
        }
        Elem(self.exp[(self.log[a.index()] + self.log[b.index()]) as usize])
    }

    pub fn inv(&self, a: Elem) -> Result<Elem> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let m = self.q - 1;
        Ok(Elem(
            self.exp[((m - self.log[a.index()]) % m.max(1)) as usize],
        ))
    }

    pub fn div(&self, a: Elem, b: Elem) -> Result<Elem> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// `a^e` for a non-negative exponent by square-and-multiply, with `0^0 = 1`.
    pub fn pow_u(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return Elem::ONE;
        }
        if a.is_zero() {
            return Elem::ZERO;
        }
        // a^(q-1) = 1, so only the residue matters; keep e >= 1 to leave a^(q-1) = 1.
        let m = (self.q - 1) as u64;
        let mut e = e % m;
        let mut base = a;
        let mut acc = Elem::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `a^e` for any integer exponent; negative exponents need a non-zero base.
    pub fn pow(&self, a: Elem, e: i64) -> Result<Elem> {
        if e >= 0 {
            return Ok(self.pow_u(a, e as u64));
        }
        let inv = self.inv(a)?;
        Ok(self.pow_u(inv, e.unsigned_abs()))
    }

    /// Discrete logarithm base the generator, `None` for zero.
    pub fn log(&self, a: Elem) -> Option<u32> {
        if a.is_zero() {
            None
        } else {
            Some(self.log[a.index()])
        }
    }

    /// `g^i` for the fixed generator `g`.
    pub fn gen_pow(&self, i: u64) -> Elem {
        Elem(self.exp[(i % (self.q as u64 - 1).max(1)) as usize])
    }

    /// Multiplicative order of a non-zero element.
    pub fn order(&self, a: Elem) -> Option<u64> {
        let l = self.log(a)? as u64;
        let m = (self.q - 1) as u64;
        Some(m / crate::numtheory::gcd(l, m))
    }

    /// The quadratic character. In characteristic 2 every non-zero element is a square, so
    /// the character is `Positive` off zero.
    #[inline]
    pub fn eta(&self, x: Elem) -> Sign {
        self.signs[x.index()]
    }

    #[inline]
    pub fn is_positive(&self, x: Elem) -> bool {
        self.signs[x.index()] == Sign::Positive
    }

    #[inline]
    pub fn is_negative(&self, x: Elem) -> bool {
        self.signs[x.index()] == Sign::Negative
    }

    /// The non-zero squares, ascending by code.
    pub fn positives(&self) -> &[Elem] {
        &self.positives
    }

    /// The non-squares, ascending by code.
    pub fn negatives(&self) -> Vec<Elem> {
        self.nonzero().filter(|&x| self.is_negative(x)).collect()
    }

    /// The unique square root lying in `F_q^+ ∪ {0}`.
    ///
    /// Defined only when `q` is even or `q ≡ 3 (mod 4)`; for `q ≡ 1 (mod 4)` both roots share
    /// a sign and no canonical choice exists.
    pub fn sqrt_positive(&self, x: Elem) -> Result<Elem> {
        if self.congruence() == Congruence::OneModFour {
            return Err(Error::NotApplicable(format!(
                "positive square roots are not unique for q = {} ≡ 1 (mod 4)",
                self.q
            )));
        }
        if x.is_zero() {
            return Ok(Elem::ZERO);
        }
        if self.p == 2 {
            return Ok(self.pow_u(x, (self.q / 2) as u64));
        }
        if !self.is_positive(x) {
            return Err(Error::NotASquare(x.0));
        }
        let y = self.pow_u(x, ((self.q + 1) / 4) as u64);
        debug_assert_eq!(self.mul(y, y), x);
        Ok(if self.is_negative(y) { self.neg(y) } else { y })
    }

    /// All square roots of `x` (empty for non-squares).
    pub(crate) fn square_roots(&self, x: Elem) -> Vec<Elem> {
        if x.is_zero() {
            return vec![Elem::ZERO];
        }
        let l = self.log[x.index()];
        let m = self.q - 1;
        if self.p == 2 {
            // squaring is a bijection; m is odd so 2 is invertible mod m
            let half = (l as u64 * (m as u64).div_ceil(2)) % m as u64;
            return vec![self.gen_pow(half)];
        }
        if l % 2 == 1 {
            return Vec::new();
        }
        let y = Elem(self.exp[(l / 2) as usize]);
        let mut roots = vec![y, self.neg(y)];
        roots.sort_unstable();
        roots
    }

    /// The automorphism `x ↦ x^{p^ell}`; `ell` is taken modulo `k`.
    pub fn frobenius(&self, ell: u32, x: Elem) -> Elem {
        let e = (self.p as u64).pow(ell % self.k);
        self.pow_u(x, e)
    }

    /// The subfield of order `r`, as the fixed points of `x ↦ x^r`.
    pub fn subfield_elements(&self, r: u32) -> Result<Vec<Elem>> {
        let bad = Error::NotASubfieldOrder { r, q: self.q };
        let (rp, d) = prime_power(r as u64).ok_or(bad.clone())?;
        if rp as u32 != self.p || !self.k.is_multiple_of(d) {
            return Err(bad);
        }
        let elems: Vec<Elem> = self
            .elements()
            .filter(|&x| self.pow_u(x, r as u64) == x)
            .collect();
        debug_assert_eq!(elems.len(), r as usize);
        Ok(elems)
    }

    /// `r` with `q = r^2`, if the order is an even power of `p`.
    pub fn square_root_order(&self) -> Option<u32> {
        if self.k.is_multiple_of(2) {
            Some(self.p.pow(self.k / 2))
        } else {
            None
        }
    }
}

fn digitwise(p: u32, k: u32, mut a: u32, mut b: u32, op: impl Fn(u32, u32) -> u32) -> u32 {
    let mut out = 0;
    let mut place = 1;
    for _ in 0..k {
        out += op(a % p, b % p) * place;
        a /= p;
        b /= p;
        place *= p;
    }
    out
}

/// Arithmetic in `F_p[x]/(modulus)` on packed codes, used only while the tables are built.
struct PolyRing<'a> {
    p: u32,
    k: u32,
    modulus: &'a [u32],
}

impl PolyRing<'_> {
    fn unpack(&self, mut c: u32) -> Vec<u32> {
        (0..self.k)
            .map(|_| {
                let d = c % self.p;
                c /= self.p;
                d
            })
            .collect()
    }

    fn pack(&self, v: &[u32]) -> u32 {
        v.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    fn mul(&self, a: u32, b: u32) -> u32 {
        let (a, b) = (self.unpack(a), self.unpack(b));
        let p = self.p as u64;
        let mut prod = vec![0u64; 2 * self.k as usize];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x as u64 * y as u64) % p;
            }
        }
        let rem = poly_rem(
            &prod.iter().map(|&c| c as u32).collect::<Vec<_>>(),
            self.modulus,
            self.p,
        );
        let mut out = vec![0u32; self.k as usize];
        out[..rem.len()].copy_from_slice(&rem);
        self.pack(&out)
    }

    fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut acc = 1;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

fn trim(v: &mut Vec<u32>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn inv_mod_p(a: u32, p: u32) -> u32 {
    let mut r = 1u64;
    let mut b = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

/// Remainder of `a` modulo the non-zero polynomial `m` over `F_p`, trimmed.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    trim(&mut r);
    let mut m = m.to_vec();
    trim(&mut m);
    let dm = m.len() - 1;
    let lead_inv = inv_mod_p(m[dm], p) as u64;
    while r.len() > dm {
        let dr = r.len() - 1;
        let c = r[dr] as u64 * lead_inv % p as u64;
        if c != 0 {
            for (i, &mi) in m.iter().enumerate() {
                let idx = dr - dm + i;
                let sub = c * mi as u64 % p as u64;
                r[idx] = ((r[idx] as u64 + p as u64 - sub) % p as u64) as u32;
            }
        }
        trim(&mut r);
    }
    r
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let deg = m.len() - 1;
    for d in 1..=deg / 2 {
        let count = (p as u64).pow(d as u32);
        for low in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut v = low;
            for _ in 0..d {
                g.push((v % p as u64) as u32);
                v /= p as u64;
            }
            g.push(1);
            if poly_rem(m, &g, p).is_empty() {
                return false;
            }
        }
    }
    true
}

fn smallest_irreducible(p: u32, k: u32) -> Option<Vec<u32>> {
    let count = (p as u64).checked_pow(k)?;
    (0..count).find_map(|low| {
        let mut m = Vec::with_capacity(k as usize + 1);
        let mut v = low;
        for _ in 0..k {
            m.push((v % p as u64) as u32);
            v /= p as u64;
        }
        m.push(1);
        is_irreducible(&m, p).then_some(m)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_squares(f: &Field) -> Vec<Elem> {
        let mut v: Vec<Elem> = f.nonzero().map(|x| f.mul(x, x)).collect();
        v.sort();
        v.dedup();
        v
    }

    const SMALL_Q: &[u32] = &[
        2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27, 29, 31, 32, 49, 81, 121,
    ];

    #[test]
    fn construction_examples() {
        let f7 = Field::new(7, 1).unwrap();
        assert_eq!(f7.q(), 7);
        assert_eq!(f7.generator(), Elem(3));
        // 2 has order 3 mod 7, so it is not primitive; 3 is.
        assert_eq!(f7.order(Elem(2)), Some(3));

        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(f4.modulus(), &[1, 1, 1]);

        // monic quadratics over F_3 in increasing order: x^2, x^2+1, ... ; x^2+1 has no root.
        let f9 = Field::new(3, 2).unwrap();
        let roots = |m: &[u32]| (0..3u32).any(|x| (m[0] + m[1] * x + x * x).is_multiple_of(3));
        let first = (0..9u32)
            .map(|c| vec![c % 3, c / 3, 1])
            .find(|m| !roots(m))
            .unwrap();
        assert_eq!(f9.modulus(), first.as_slice());
        assert_eq!(f9.modulus(), &[1, 0, 1]);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(Field::new(4, 1).unwrap_err(), Error::NotPrime(4));
        assert_eq!(Field::new(3, 0).unwrap_err(), Error::ZeroDegree);
        assert!(matches!(Field::new(2, 21), Err(Error::SizeExceeded { .. })));
        assert!(matches!(Field::from_order(12), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn arithmetic_examples() {
        let f7 = Field::new(7, 1).unwrap();
        assert_eq!(f7.mul(Elem(3), Elem(5)), Elem(1));
        assert_eq!(f7.pow(Elem(3), 6).unwrap(), Elem(1));
        assert_eq!(f7.pow(Elem(3), -1).unwrap(), Elem(5));
        assert_eq!(f7.div(Elem(1), Elem(0)), Err(Error::DivisionByZero));
        assert_eq!(f7.inv(Elem(0)), Err(Error::DivisionByZero));
        assert_eq!(f7.pow(Elem(0), -2), Err(Error::DivisionByZero));

        let f4 = Field::new(2, 2).unwrap();
        // omega = x has code 2; x^2 = x + 1 has code 3
        assert_eq!(f4.mul(Elem(2), Elem(2)), Elem(3));
    }

    #[test]
    fn field_axioms_exhaustive() {
        for &q in &[4u32, 8, 9, 25, 27] {
            let f = Field::from_order(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.add(a, f.neg(a)), Elem::ZERO);
                if !a.is_zero() {
                    assert_eq!(f.mul(a, f.inv(a).unwrap()), Elem::ONE);
                }
                for b in f.elements() {
                    assert_eq!(f.add(a, b), f.add(b, a));
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in f.elements().step_by(3) {
                        assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
                    }
                }
            }
        }
    }

    #[test]
    fn large_field_without_tables() {
        let f = Field::new(2, 10).unwrap();
        assert!(f.add_tab.is_none());
        let g = f.generator();
        assert_eq!(f.order(g), Some(1023));
        assert_eq!(f.pow_u(g, 1023), Elem::ONE);
        let f = Field::new(257, 1).unwrap();
        assert_eq!(f.mul(Elem(256), Elem(256)), Elem(1));
        assert_eq!(f.add(Elem(200), Elem(100)), Elem(43));
    }

    #[test]
    fn eta_examples() {
        let f7 = Field::new(7, 1).unwrap();
        assert_eq!(brute_squares(&f7), vec![Elem(1), Elem(2), Elem(4)]);
        assert_eq!(f7.eta(Elem(2)), Sign::Positive);
        assert_eq!(f7.eta(Elem(3)), Sign::Negative);
        for &q in SMALL_Q {
            let f = Field::from_order(q).unwrap();
            assert_eq!(f.eta(Elem::ZERO), Sign::Zero);
        }
    }

    #[test]
    fn positives_examples() {
        let pos = |q| Field::from_order(q).unwrap().positives().to_vec();
        assert_eq!(pos(7), vec![Elem(1), Elem(2), Elem(4)]);
        assert_eq!(pos(4), vec![Elem(1), Elem(2), Elem(3)]);
        assert_eq!(pos(5), vec![Elem(1), Elem(4)]);
    }

    #[test]
    fn eta_matches_square_enumeration_and_is_multiplicative() {
        for &q in SMALL_Q {
            let f = Field::from_order(q).unwrap();
            let sq = brute_squares(&f);
            assert_eq!(f.positives(), sq.as_slice());
            let expected = if q % 2 == 0 { q - 1 } else { (q - 1) / 2 };
            assert_eq!(sq.len() as u32, expected);
            for x in f.elements() {
                for y in f.elements() {
                    assert_eq!(f.eta(f.mul(x, y)), f.eta(x) * f.eta(y), "q={q} x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn minus_one_trichotomy() {
        for q in (3..=121u32).step_by(2) {
            let Ok(f) = Field::from_order(q) else {
                continue;
            };
            let m1 = f.neg(Elem::ONE);
            let three_mod_four = q % 4 == 3;
            assert_eq!(three_mod_four, !f.is_positive(m1), "q={q}");
            let neg_is_minus_pos = f.negatives() == {
                let mut v: Vec<Elem> = f.positives().iter().map(|&x| f.neg(x)).collect();
                v.sort();
                v
            };
            assert_eq!(three_mod_four, neg_is_minus_pos, "q={q}");
        }
    }

    #[test]
    fn sqrt_examples() {
        let f7 = Field::new(7, 1).unwrap();
        assert_eq!(f7.sqrt_positive(Elem(2)).unwrap(), Elem(4));
        assert_eq!(f7.sqrt_positive(Elem(1)).unwrap(), Elem(1));
        assert_eq!(f7.sqrt_positive(Elem(0)).unwrap(), Elem(0));
        assert_eq!(f7.sqrt_positive(Elem(3)), Err(Error::NotASquare(3)));
        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(f4.sqrt_positive(Elem(2)).unwrap(), Elem(3));
        let f5 = Field::new(5, 1).unwrap();
        assert!(matches!(
            f5.sqrt_positive(Elem(4)),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn sqrt_positive_is_a_positive_root() {
        for &q in SMALL_Q {
            let f = Field::from_order(q).unwrap();
            if f.congruence() == Congruence::OneModFour {
                continue;
            }
            for &x in f.positives() {
                let y = f.sqrt_positive(x).unwrap();
                assert_eq!(f.mul(y, y), x);
                assert!(f.is_positive(y));
            }
        }
    }

    #[test]
    fn square_roots_any() {
        for &q in SMALL_Q {
            let f = Field::from_order(q).unwrap();
            for x in f.elements() {
                let roots = f.square_roots(x);
                let brute: Vec<Elem> = f.elements().filter(|&y| f.mul(y, y) == x).collect();
                assert_eq!(roots, brute, "q={q} x={x}");
            }
        }
    }

    #[test]
    fn frobenius_examples_and_homomorphism() {
        let f9 = Field::new(3, 2).unwrap();
        for x in f9.elements() {
            assert_eq!(f9.frobenius(1, f9.frobenius(1, x)), x);
            assert_eq!(f9.frobenius(0, x), x);
        }
        let f4 = Field::new(2, 2).unwrap();
        assert_eq!(f4.frobenius(1, Elem(2)), Elem(3));
        for &q in SMALL_Q {
            let f = Field::from_order(q).unwrap();
            for ell in 0..f.k() {
                for x in f.elements() {
                    for y in f.elements() {
                        let s = |z| f.frobenius(ell, z);
                        assert_eq!(s(f.add(x, y)), f.add(s(x), s(y)));
                        assert_eq!(s(f.mul(x, y)), f.mul(s(x), s(y)));
                    }
                }
            }
        }
    }

    #[test]
    fn generator_order_and_fermat() {
        for &q in SMALL_Q {
            let f = Field::from_order(q).unwrap();
            assert_eq!(f.order(f.generator()), Some(q as u64 - 1));
            // smallest such code
            for c in 1..f.generator().0 {
                assert_ne!(f.order(Elem(c)), Some(q as u64 - 1));
            }
            for x in f.elements() {
                assert_eq!(f.pow_u(x, q as u64), x);
            }
        }
    }

    #[test]
    fn subfields() {
        let f9 = Field::new(3, 2).unwrap();
        assert_eq!(
            f9.subfield_elements(3).unwrap(),
            vec![Elem(0), Elem(1), Elem(2)]
        );
        assert_eq!(
            f9.subfield_elements(4),
            Err(Error::NotASubfieldOrder { r: 4, q: 9 })
        );
        let f25 = Field::new(5, 2).unwrap();
        let sub = f25.subfield_elements(5).unwrap();
        assert_eq!(sub.len(), 5);
        assert!(sub
            .iter()
            .filter(|x| !x.is_zero())
            .all(|&x| f25.is_positive(x)));
        for &q in &[9u32, 25, 49, 81, 121] {
            let f = Field::from_order(q).unwrap();
            let r = f.square_root_order().unwrap();
            let sub = f.subfield_elements(r).unwrap();
            assert!(sub
                .iter()
                .filter(|x| !x.is_zero())
                .all(|&x| f.is_positive(x)));
        }
        let f8 = Field::new(2, 3).unwrap();
        assert!(f8.subfield_elements(4).is_err());
        assert_eq!(f8.subfield_elements(2).unwrap().len(), 2);
    }
}
