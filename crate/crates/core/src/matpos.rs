//! Symmetric matrices over `F_q` and positive definiteness.
//!
//! A symmetric matrix is positive definite when every leading principal minor is a non-zero
//! square. Matrices store their upper triangle row by row: `a_11, a_12, ..., a_1n, a_22, ...`.
//! Enumerations run in lexicographic order of that tuple.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Congruence, Elem, Field};
use crate::limits::{self, saturating_pow};
use crate::preserver::FnTable;

/// Largest dimension the enumerations and Leibniz cross-checks are written for.
pub const MAX_DIM: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SymMatrix {
    n: usize,
    upper: Vec<Elem>,
}

#[inline]
fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

pub fn upper_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl SymMatrix {
    /// From the upper triangle in row-major order.
    pub fn from_upper(n: usize, upper: Vec<Elem>) -> Result<SymMatrix> {
        if upper.len() != upper_len(n) {
            return Err(Error::InvalidInput(format!(
                "expected {} upper-triangle entries for n = {n}, got {}",
                upper_len(n),
                upper.len()
            )));
        }
        Ok(SymMatrix { n, upper })
    }

    /// From full rows; rejects non-square or non-symmetric input.
    pub fn from_rows(rows: &[Vec<Elem>]) -> Result<SymMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        let mut upper = Vec::with_capacity(upper_len(n));
        for i in 0..n {
            for j in i..n {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
                upper.push(rows[i][j]);
            }
        }
        Ok(SymMatrix { n, upper })
    }

    pub fn from_codes(rows: &[&[u32]]) -> Result<SymMatrix> {
        let rows: Vec<Vec<Elem>> = rows
            .iter()
            .map(|r| r.iter().map(|&c| Elem(c)).collect())
            .collect();
        SymMatrix::from_rows(&rows)
    }

    pub fn identity(n: usize) -> SymMatrix {
        Self::scalar(n, Elem::ONE)
    }

    pub fn scalar(n: usize, a: Elem) -> SymMatrix {
        let mut m = SymMatrix {
            n,
            upper: vec![Elem::ZERO; upper_len(n)],
        };
        for i in 0..n {
            m.upper[upper_index(n, i, i)] = a;
        }
        m
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Elem {
        self.upper[upper_index(self.n, i, j)]
    }

    pub fn upper(&self) -> &[Elem] {
        &self.upper
    }

    pub fn rows(&self) -> Vec<Vec<Elem>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Row-major codes of the full matrix.
    pub fn row_major_codes(&self) -> Vec<u32> {
        self.rows().into_iter().flatten().map(Elem::code).collect()
    }

    /// The leading `r × r` block.
    pub fn leading(&self, r: usize) -> SymMatrix {
        let mut upper = Vec::with_capacity(upper_len(r));
        for i in 0..r {
            for j in i..r {
                upper.push(self.get(i, j));
            }
        }
        SymMatrix { n: r, upper }
    }

    pub fn map(&self, f: impl Fn(Elem) -> Elem) -> SymMatrix {
        SymMatrix {
            n: self.n,
            upper: self.upper.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            n: self.n,
            entries: self.row_major_codes(),
        }
    }
}

/// Wire form: dimension plus the full matrix in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<u32>,
}

impl MatrixJson {
    pub fn to_matrix(&self, field: &Field) -> Result<SymMatrix> {
        if self.entries.len() != self.n * self.n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries, got {}",
                self.n * self.n,
                self.entries.len()
            )));
        }
        if let Some(&bad) = self.entries.iter().find(|&&c| c >= field.q()) {
            return Err(Error::InvalidInput(format!(
                "{bad} is not an element of F_{}",
                field.q()
            )));
        }
        let rows: Vec<Vec<Elem>> = self
            .entries
            .chunks(self.n.max(1))
            .take(self.n)
            .map(|r| r.iter().map(|&c| Elem(c)).collect())
            .collect();
        SymMatrix::from_rows(&rows)
    }
}

/// Lower-triangular factor with positive diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerTriangular {
    n: usize,
    /// Row-major lower triangle: `l_11, l_21, l_22, l_31, ...`.
    entries: Vec<Elem>,
}

impl LowerTriangular {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Elem {
        if j > i {
            Elem::ZERO
        } else {
            self.entries[i * (i + 1) / 2 + j]
        }
    }

    pub fn rows(&self) -> Vec<Vec<Elem>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `L L^T`.
    pub fn gram(&self, field: &Field) -> SymMatrix {
        let n = self.n;
        let mut upper = Vec::with_capacity(upper_len(n));
        for i in 0..n {
            for j in i..n {
                let s = (0..=i).fold(Elem::ZERO, |acc, t| {
                    field.add(acc, field.mul(self.get(i, t), self.get(j, t)))
                });
                upper.push(s);
            }
        }
        SymMatrix { n, upper }
    }
}

/// Determinant of a square matrix by Gaussian elimination with row swaps.
pub fn determinant(field: &Field, rows: &[Vec<Elem>]) -> Elem {
    let n = rows.len();
    let mut m: Vec<Vec<Elem>> = rows.to_vec();
    let mut det = Elem::ONE;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Elem::ZERO;
        };
        if piv != col {
            m.swap(piv, col);
            det = field.neg(det);
        }
        let pv = m[col][col];
        det = field.mul(det, pv);
        let inv = field.inv(pv).expect("pivot is non-zero");
        for r in col + 1..n {
            let factor = field.mul(m[r][col], inv);
            if factor.is_zero() {
                continue;
            }
            for c in col..n {
                let v = field.mul(factor, m[col][c]);
                m[r][c] = field.sub(m[r][c], v);
            }
        }
    }
    det
}

/// Determinants of the leading `r × r` blocks, `r = 1..=n`.
pub fn leading_minors(field: &Field, a: &SymMatrix) -> Vec<Elem> {
    let n = a.n();
    let mut minors = Vec::with_capacity(n);
    // Elimination without pivoting yields minor_r = product of the first r pivots until a
    // zero pivot appears; the remaining minors are computed one by one.
    let mut m = a.rows();
    let mut prod = Elem::ONE;
    for col in 0..n {
        let pv = m[col][col];
        if pv.is_zero() {
            for r in col + 1..=n {
                minors.push(determinant(field, &a.leading(r).rows()));
            }
            return minors;
        }
        prod = field.mul(prod, pv);
        minors.push(prod);
        let inv = field.inv(pv).expect("pivot is non-zero");
        for r in col + 1..n {
            let factor = field.mul(m[r][col], inv);
            for c in col..n {
                let v = field.mul(factor, m[col][c]);
                m[r][c] = field.sub(m[r][c], v);
            }
        }
    }
    minors
}

/// Whether every leading principal minor is a non-zero square.
pub fn is_positive_definite(field: &Field, a: &SymMatrix) -> bool {
    match a.n() {
        0 => true,
        1 => field.is_positive(a.get(0, 0)),
        2 => is_pd2(field, a.get(0, 0), a.get(0, 1), a.get(1, 1)),
        3 => is_pd3(field, a.upper()),
        _ => leading_minors(field, a)
            .iter()
            .all(|&m| field.is_positive(m)),
    }
}

#[inline]
pub(crate) fn is_pd2(f: &Field, a: Elem, b: Elem, c: Elem) -> bool {
    f.is_positive(a) && f.is_positive(f.sub(f.mul(a, c), f.mul(b, b)))
}

#[inline]
pub(crate) fn det3(f: &Field, u: &[Elem]) -> Elem {
    // [[a, b, c], [b, d, e], [c, e, g]]
    let (a, b, c, d, e, g) = (u[0], u[1], u[2], u[3], u[4], u[5]);
    let t1 = f.mul(a, f.sub(f.mul(d, g), f.mul(e, e)));
    let t2 = f.mul(b, f.sub(f.mul(b, g), f.mul(c, e)));
    let t3 = f.mul(c, f.sub(f.mul(b, e), f.mul(c, d)));
    f.add(f.sub(t1, t2), t3)
}

/// Determinant of the symmetric matrix with the given upper triangle; allocation-free for
/// `n <= 3`.
pub fn det_upper(field: &Field, n: usize, upper: &[Elem]) -> Elem {
    match n {
        0 => Elem::ONE,
        1 => upper[0],
        2 => field.sub(field.mul(upper[0], upper[2]), field.mul(upper[1], upper[1])),
        3 => det3(field, upper),
        _ => determinant(
            field,
            &SymMatrix {
                n,
                upper: upper.to_vec(),
            }
            .rows(),
        ),
    }
}

#[inline]
pub(crate) fn is_pd3(f: &Field, u: &[Elem]) -> bool {
    is_pd2(f, u[0], u[1], u[3]) && f.is_positive(det3(f, u))
}

/// `A = L L^T` with `L` lower triangular and every diagonal entry in `F_q^+`.
///
/// For `q` even or `q ≡ 3 (mod 4)` the pivots are rooted with the unique positive square
/// root. For `q ≡ 1 (mod 4)` every square root of every pivot is tried, so `None` means no
/// such factorization exists at all.
pub fn cholesky(field: &Field, a: &SymMatrix) -> Option<LowerTriangular> {
    let n = a.n();
    let mut entries = vec![Elem::ZERO; n * (n + 1) / 2];
    if cholesky_column(field, a, 0, &mut entries) {
        Some(LowerTriangular { n, entries })
    } else {
        None
    }
}

fn cholesky_column(field: &Field, a: &SymMatrix, j: usize, l: &mut [Elem]) -> bool {
    let n = a.n();
    if j == n {
        return true;
    }
    let at = |i: usize, k: usize| i * (i + 1) / 2 + k;
    let mut pivot = a.get(j, j);
    for t in 0..j {
        let v = l[at(j, t)];
        pivot = field.sub(pivot, field.mul(v, v));
    }
    if !field.is_positive(pivot) {
        return false;
    }
    let roots: Vec<Elem> = match field.congruence() {
        Congruence::OneModFour => field.square_roots(pivot),
        _ => vec![field
            .sqrt_positive(pivot)
            .expect("pivot is a non-zero square")],
    };
    for d in roots.into_iter().filter(|&d| field.is_positive(d)) {
        l[at(j, j)] = d;
        let inv = field.inv(d).expect("positive elements are non-zero");
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for t in 0..j {
                s = field.sub(s, field.mul(l[at(i, t)], l[at(j, t)]));
            }
            l[at(i, j)] = field.mul(s, inv);
        }
        if cholesky_column(field, a, j + 1, l) {
            return true;
        }
    }
    false
}

/// `f[A]`.
pub fn apply_entrywise(f: &FnTable, a: &SymMatrix) -> SymMatrix {
    a.map(|x| f.eval(x))
}

/// All symmetric `n × n` matrices in lexicographic order.
pub fn symmetric_iter(field: &Field, n: usize) -> impl Iterator<Item = SymMatrix> + '_ {
    let len = upper_len(n);
    let q = field.q();
    let total = saturating_pow(q as u128, len as u32);
    (0..total).map(move |mut idx| {
        let mut upper = vec![Elem::ZERO; len];
        for slot in upper.iter_mut().rev() {
            *slot = Elem((idx % q as u128) as u32);
            idx /= q as u128;
        }
        SymMatrix { n, upper }
    })
}

pub fn count_symmetric(field: &Field, n: usize) -> u128 {
    saturating_pow(field.q() as u128, upper_len(n) as u32)
}

/// Streams the positive definite `n × n` matrices in lexicographic order.
///
/// Each leading block is tested as soon as its last upper entry is fixed, and the final
/// diagonal entry is solved for rather than searched: the determinant is affine in it with
/// slope equal to the previous leading minor.
pub fn pd_iter(field: &Field, n: usize) -> PdIter<'_> {
    PdIter::new(field, n)
}

pub struct PdIter<'a> {
    field: &'a Field,
    n: usize,
    /// Positions of the upper triangle, except the last diagonal slot.
    upper: Vec<Elem>,
    /// Pending values for the final slot, in ascending order.
    tails: Vec<Elem>,
    tail_pos: usize,
    depth_ok: bool,
    done: bool,
    started: bool,
}

impl<'a> PdIter<'a> {
    fn new(field: &'a Field, n: usize) -> Self {
        PdIter {
            field,
            n,
            upper: vec![Elem::ZERO; upper_len(n)],
            tails: Vec::new(),
            tail_pos: 0,
            depth_ok: false,
            done: n == 0,
            started: false,
        }
    }

    /// Slot index at which the leading `r × r` block becomes complete.
    fn block_end(&self, r: usize) -> usize {
        upper_index(self.n, r - 1, r - 1)
    }

    /// Checks the leading blocks completed at or before `slot`.
    fn prefix_ok(&self, slot: usize) -> bool {
        (1..self.n).all(|r| {
            let end = self.block_end(r);
            if end > slot {
                return true;
            }
            let mut upper = Vec::with_capacity(upper_len(r));
            for i in 0..r {
                for j in i..r {
                    upper.push(self.upper[upper_index(self.n, i, j)]);
                }
            }
            let m = SymMatrix { n: r, upper };
            let minor = match r {
                1 => m.get(0, 0),
                _ => determinant(self.field, &m.rows()),
            };
            self.field.is_positive(minor)
        })
    }

    fn solve_tail(&mut self) {
        let f = self.field;
        let n = self.n;
        let last = upper_len(n) - 1;
        self.upper[last] = Elem::ZERO;
        let base = SymMatrix {
            n,
            upper: self.upper.clone(),
        };
        let d0 = determinant(f, &base.rows());
        let slope = if n == 1 {
            Elem::ONE
        } else {
            determinant(f, &base.leading(n - 1).rows())
        };
        let inv = f.inv(slope).expect("previous leading minor is positive");
        let mut tails: Vec<Elem> = f
            .positives()
            .iter()
            .map(|&t| f.mul(f.sub(t, d0), inv))
            .collect();
        tails.sort_unstable();
        self.tails = tails;
        self.tail_pos = 0;
    }

    /// Advances the prefix (all slots but the last) to the next admissible tuple.
    fn advance_prefix(&mut self) -> bool {
        let last = upper_len(self.n) - 1;
        if last == 0 {
            if self.started {
                return false;
            }
            self.started = true;
            return true;
        }
        let q = self.field.q();
        let mut slot;
        if !self.started {
            self.started = true;
            slot = 0;
            self.upper[0] = Elem::ZERO;
            // descend from slot 0 with fresh zeros below
            loop {
                if self.prefix_ok(slot) {
                    if slot + 1 == last {
                        return true;
                    }
                    slot += 1;
                    self.upper[slot] = Elem::ZERO;
                    continue;
                }
                // bump at this slot, carrying upwards
                loop {
                    if self.upper[slot].0 + 1 < q {
                        self.upper[slot].0 += 1;
                        break;
                    }
                    if slot == 0 {
                        return false;
                    }
                    slot -= 1;
                }
            }
        }
        slot = last - 1;
        loop {
            // bump
            loop {
                if self.upper[slot].0 + 1 < q {
                    self.upper[slot].0 += 1;
                    break;
                }
                if slot == 0 {
                    return false;
                }
                slot -= 1;
            }
            // descend
            loop {
                if !self.prefix_ok(slot) {
                    break;
                }
                if slot + 1 == last {
                    return true;
                }
                slot += 1;
                self.upper[slot] = Elem::ZERO;
            }
        }
    }
}

impl Iterator for PdIter<'_> {
    type Item = SymMatrix;

    fn next(&mut self) -> Option<SymMatrix> {
        if self.done {
            return None;
        }
        loop {
            if self.depth_ok && self.tail_pos < self.tails.len() {
                let last = upper_len(self.n) - 1;
                self.upper[last] = self.tails[self.tail_pos];
                self.tail_pos += 1;
                return Some(SymMatrix {
                    n: self.n,
                    upper: self.upper.clone(),
                });
            }
            if !self.advance_prefix() {
                self.done = true;
                return None;
            }
            self.depth_ok = true;
            self.solve_tail();
        }
    }
}

/// All positive definite `n × n` matrices, materialized.
pub fn enumerate_pd(field: &Field, n: usize) -> Result<Vec<SymMatrix>> {
    enumerate_pd_with_limit(field, n, limits::candidate_limit())
}

pub fn enumerate_pd_with_limit(field: &Field, n: usize, limit: u128) -> Result<Vec<SymMatrix>> {
    limits::check(count_symmetric(field, n), limit)?;
    Ok(pd_iter(field, n).collect())
}

/// `x^T A x`.
pub fn quad_form(field: &Field, a: &SymMatrix, x: &[Elem]) -> Elem {
    let n = a.n();
    let mut acc = Elem::ZERO;
    for i in 0..n {
        if x[i].is_zero() {
            continue;
        }
        for j in 0..n {
            acc = field.add(acc, field.mul(field.mul(x[i], a.get(i, j)), x[j]));
        }
    }
    acc
}

fn vectors(field: &Field, n: usize) -> impl Iterator<Item = Vec<Elem>> + '_ {
    let q = field.q() as u128;
    (0..saturating_pow(q, n as u32)).map(move |mut idx| {
        let mut v = vec![Elem::ZERO; n];
        for slot in v.iter_mut().rev() {
            *slot = Elem((idx % q) as u32);
            idx /= q;
        }
        v
    })
}

/// The set of values of the quadratic form, ascending.
pub fn quad_form_range(field: &Field, a: &SymMatrix) -> Result<Vec<Elem>> {
    limits::check(
        saturating_pow(field.q() as u128, a.n() as u32),
        limits::candidate_limit(),
    )?;
    let mut seen = vec![false; field.size()];
    let mut count = 0;
    for v in vectors(field, a.n()) {
        let val = quad_form(field, a, &v);
        if !seen[val.index()] {
            seen[val.index()] = true;
            count += 1;
            if count == field.size() {
                break;
            }
        }
    }
    Ok(field.elements().filter(|x| seen[x.index()]).collect())
}

/// The first non-zero vector (in lexicographic order) with `x^T A x = 0`, if any.
pub fn isotropic_vector(field: &Field, a: &SymMatrix) -> Option<Vec<Elem>> {
    vectors(field, a.n())
        .skip(1)
        .find(|v| quad_form(field, a, v).is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[u32]]) -> SymMatrix {
        SymMatrix::from_codes(rows).unwrap()
    }

    /// Leibniz expansion, independent of the elimination path.
    fn leibniz(f: &Field, rows: &[Vec<Elem>]) -> Elem {
        fn perms(n: usize) -> Vec<(Vec<usize>, bool)> {
            if n == 0 {
                return vec![(vec![], true)];
            }
            let mut out = Vec::new();
            for (p, even) in perms(n - 1) {
                for pos in 0..n {
                    let mut v = p.clone();
                    v.insert(pos, n - 1);
                    // inserting at pos shifts the new element past (n-1-pos) others
                    let flips = (n - 1 - pos) % 2 == 1;
                    out.push((v, even ^ flips));
                }
            }
            out
        }
        let n = rows.len();
        perms(n).into_iter().fold(Elem::ZERO, |acc, (p, even)| {
            let term = (0..n).fold(Elem::ONE, |t, i| f.mul(t, rows[i][p[i]]));
            if even {
                f.add(acc, term)
            } else {
                f.sub(acc, term)
            }
        })
    }

    #[test]
    fn storage_layout() {
        let a = m(&[&[1, 2, 3], &[2, 4, 5], &[3, 5, 6]]);
        assert_eq!(
            a.upper(),
            &[Elem(1), Elem(2), Elem(3), Elem(4), Elem(5), Elem(6)]
        );
        assert_eq!(a.get(2, 1), Elem(5));
        assert!(SymMatrix::from_codes(&[&[1, 2], &[3, 4]]).is_err());
        assert!(SymMatrix::from_codes(&[&[1, 2]]).is_err());
        assert_eq!(a.to_json().entries, vec![1, 2, 3, 2, 4, 5, 3, 5, 6]);
    }

    #[test]
    fn minors_examples() {
        let f7 = Field::new(7, 1).unwrap();
        let f5 = Field::new(5, 1).unwrap();
        let f3 = Field::new(3, 1).unwrap();
        assert_eq!(
            leading_minors(&f7, &m(&[&[1, 1], &[1, 2]])),
            vec![Elem(1), Elem(1)]
        );
        assert_eq!(
            leading_minors(&f5, &m(&[&[1, 1], &[1, 0]])),
            vec![Elem(1), Elem(4)]
        );
        assert_eq!(
            leading_minors(&f3, &SymMatrix::identity(2)),
            vec![Elem(1), Elem(1)]
        );
        // zero first pivot with non-zero later minors
        assert_eq!(
            leading_minors(&f7, &m(&[&[0, 1], &[1, 0]])),
            vec![Elem(0), Elem(6)]
        );
    }

    #[test]
    fn determinant_matches_leibniz() {
        for &q in &[3u32, 4, 5] {
            let f = Field::from_order(q).unwrap();
            for n in 1..=3 {
                for a in symmetric_iter(&f, n) {
                    let rows = a.rows();
                    assert_eq!(determinant(&f, &rows), leibniz(&f, &rows));
                    let minors = leading_minors(&f, &a);
                    for r in 1..=n {
                        assert_eq!(minors[r - 1], leibniz(&f, &a.leading(r).rows()));
                    }
                    if n == 3 {
                        assert_eq!(det3(&f, a.upper()), minors[2]);
                    }
                }
            }
        }
        let f = Field::new(3, 1).unwrap();
        let a = m(&[&[1, 2, 0, 1], &[2, 0, 1, 1], &[0, 1, 2, 2], &[1, 1, 2, 1]]);
        assert_eq!(determinant(&f, &a.rows()), leibniz(&f, &a.rows()));
    }

    #[test]
    fn pd_examples() {
        let f5 = Field::new(5, 1).unwrap();
        let f7 = Field::new(7, 1).unwrap();
        assert!(is_positive_definite(&f5, &m(&[&[1, 1], &[1, 0]])));
        assert!(!is_positive_definite(&f7, &m(&[&[1, 1], &[1, 1]])));
        assert!(!is_positive_definite(&f7, &m(&[&[3, 0], &[0, 1]])));
    }

    #[test]
    fn cholesky_examples() {
        let f7 = Field::new(7, 1).unwrap();
        let a = m(&[&[1, 1], &[1, 2]]);
        let l = cholesky(&f7, &a).unwrap();
        assert_eq!(
            l.rows(),
            vec![vec![Elem(1), Elem(0)], vec![Elem(1), Elem(1)]]
        );
        assert_eq!(l.gram(&f7), a);

        let f5 = Field::new(5, 1).unwrap();
        assert!(cholesky(&f5, &m(&[&[1, 1], &[1, 0]])).is_none());

        for &q in &[2u32, 3, 4, 5, 7, 9] {
            let f = Field::from_order(q).unwrap();
            for n in 1..=3 {
                let l = cholesky(&f, &SymMatrix::identity(n)).unwrap();
                assert_eq!(l.rows(), SymMatrix::identity(n).rows());
            }
        }
    }

    #[test]
    fn cholesky_sound_whenever_present() {
        for &q in &[3u32, 5, 7, 9, 13] {
            let f = Field::from_order(q).unwrap();
            for n in 1..=2 {
                for a in symmetric_iter(&f, n) {
                    if let Some(l) = cholesky(&f, &a) {
                        assert_eq!(l.gram(&f), a);
                        assert!((0..n).all(|i| f.is_positive(l.get(i, i))));
                        assert!(is_positive_definite(&f, &a));
                    }
                }
            }
        }
    }

    #[test]
    fn apply_entrywise_examples() {
        let f7 = Field::new(7, 1).unwrap();
        let a = m(&[&[1, 3], &[3, 5]]);
        assert_eq!(apply_entrywise(&FnTable::identity(&f7), &a), a);
        let zero = FnTable::from_fn(&f7, |_| Elem::ZERO);
        assert_eq!(apply_entrywise(&zero, &a), SymMatrix::scalar(2, Elem::ZERO));

        let f9 = Field::new(3, 2).unwrap();
        let frob = FnTable::from_fn(&f9, |x| f9.frobenius(1, x));
        for a in pd_iter(&f9, 2) {
            assert!(is_positive_definite(&f9, &apply_entrywise(&frob, &a)));
        }
    }

    #[test]
    fn enumerate_examples() {
        let f3 = Field::new(3, 1).unwrap();
        let pd = enumerate_pd(&f3, 2).unwrap();
        let expected: Vec<SymMatrix> = (0..3u32)
            .map(|b| m(&[&[1, b], &[b, (1 + b * b) % 3]]))
            .collect();
        assert_eq!(pd, expected);

        let f5 = Field::new(5, 1).unwrap();
        assert_eq!(enumerate_pd(&f5, 2).unwrap().len(), 20);

        let f2 = Field::new(2, 1).unwrap();
        assert_eq!(enumerate_pd(&f2, 1).unwrap(), vec![SymMatrix::identity(1)]);

        assert!(matches!(
            enumerate_pd_with_limit(&f5, 3, 1000),
            Err(Error::SizeExceeded { .. })
        ));
    }

    #[test]
    fn pd_iter_matches_filtered_brute_force() {
        for &q in &[2u32, 3, 4, 5, 7, 8, 9] {
            let f = Field::from_order(q).unwrap();
            for n in 1..=3 {
                if q > 5 && n == 3 {
                    continue;
                }
                let brute: Vec<SymMatrix> = symmetric_iter(&f, n)
                    .filter(|a| leading_minors(&f, a).iter().all(|&x| f.is_positive(x)))
                    .collect();
                let fast: Vec<SymMatrix> = pd_iter(&f, n).collect();
                assert_eq!(fast, brute, "q={q} n={n}");
            }
        }
        let f3 = Field::new(3, 1).unwrap();
        let brute4 = symmetric_iter(&f3, 4)
            .filter(|a| is_positive_definite(&f3, a))
            .count();
        assert_eq!(pd_iter(&f3, 4).count(), brute4);
    }

    #[test]
    fn quad_form_examples() {
        let f5 = Field::new(5, 1).unwrap();
        assert_eq!(
            quad_form_range(&f5, &SymMatrix::identity(2)).unwrap().len(),
            5
        );
        let f7 = Field::new(7, 1).unwrap();
        assert_eq!(
            quad_form_range(&f7, &SymMatrix::identity(1)).unwrap(),
            vec![Elem(0), Elem(1), Elem(2), Elem(4)]
        );
        let f3 = Field::new(3, 1).unwrap();
        let id3 = SymMatrix::identity(3);
        assert_eq!(quad_form_range(&f3, &id3).unwrap().len(), 3);
        let v = isotropic_vector(&f3, &id3).unwrap();
        assert!(v.iter().any(|x| !x.is_zero()));
        assert!(quad_form(&f3, &id3, &v).is_zero());
        // 1x1 positive form only vanishes at 0
        assert!(isotropic_vector(&f7, &SymMatrix::identity(1)).is_none());
    }

    #[test]
    fn det_upper_matches_elimination() {
        let f = Field::new(5, 1).unwrap();
        for n in 1..=3 {
            for a in symmetric_iter(&f, n) {
                assert_eq!(det_upper(&f, n, a.upper()), determinant(&f, &a.rows()));
            }
        }
    }
}
