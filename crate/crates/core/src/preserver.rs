//! Functions `f: F_q -> F_q`, the positivity- and sign-preserver properties, the necessary
//! conditions used to prune the search, and the exhaustive classification.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Congruence, Elem, Field};
use crate::limits::{self, saturating_pow};
use crate::matpos::{self, is_pd2, is_positive_definite, SymMatrix, MAX_DIM};
use crate::numtheory::{gcd, key_lemma_test, PolyModReduced};

/// A total function on `F_q`, stored as `values[x] = f(x)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FnTable {
    values: Vec<Elem>,
}

impl FnTable {
    pub fn from_values(field: &Field, values: Vec<Elem>) -> Result<FnTable> {
        if values.len() != field.size() {
            return Err(Error::InvalidInput(format!(
                "a table over F_{} needs {} values, got {}",
                field.q(),
                field.size(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|&&v| !field.contains(v)) {
            return Err(Error::InvalidInput(format!(
                "{bad} is not an element of F_{}",
                field.q()
            )));
        }
        Ok(FnTable { values })
    }

    pub fn from_codes(field: &Field, codes: &[u32]) -> Result<FnTable> {
        FnTable::from_values(field, codes.iter().map(|&c| Elem(c)).collect())
    }

    pub fn from_fn(field: &Field, f: impl Fn(Elem) -> Elem) -> FnTable {
        FnTable {
            values: field.elements().map(f).collect(),
        }
    }

    pub fn identity(field: &Field) -> FnTable {
        FnTable::from_fn(field, |x| x)
    }

    /// `x ↦ c x^e` for `e >= 1`.
    pub fn monomial(field: &Field, c: Elem, e: u64) -> FnTable {
        FnTable::from_fn(field, |x| field.mul(c, field.pow_u(x, e)))
    }

    /// `x ↦ c x^{p^ell}`.
    pub fn automorphism_multiple(field: &Field, c: Elem, ell: u32) -> FnTable {
        FnTable::from_fn(field, |x| field.mul(c, field.frobenius(ell, x)))
    }

    #[inline]
    pub fn eval(&self, x: Elem) -> Elem {
        self.values[x.index()]
    }

    pub fn values(&self) -> &[Elem] {
        &self.values
    }

    pub fn codes(&self) -> Vec<u32> {
        self.values.iter().map(|v| v.code()).collect()
    }

    pub fn is_bijective(&self) -> bool {
        let mut seen = vec![false; self.values.len()];
        self.values
            .iter()
            .all(|v| !std::mem::replace(&mut seen[v.index()], true))
    }
}

/// A table under construction; entries are assigned once and never overwritten.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialFnTable {
    values: Vec<Option<Elem>>,
}

impl PartialFnTable {
    pub fn new(field: &Field) -> PartialFnTable {
        PartialFnTable {
            values: vec![None; field.size()],
        }
    }

    pub fn with_assignments(field: &Field, pairs: &[(u32, u32)]) -> Result<PartialFnTable> {
        let mut t = PartialFnTable::new(field);
        for &(x, v) in pairs {
            if x >= field.q() || v >= field.q() {
                return Err(Error::InvalidInput(format!(
                    "({x}, {v}) is outside F_{}",
                    field.q()
                )));
            }
            t.assign(Elem(x), Elem(v))?;
        }
        Ok(t)
    }

    pub fn assign(&mut self, x: Elem, v: Elem) -> Result<()> {
        match self.values[x.index()] {
            Some(old) if old != v => Err(Error::InvalidInput(format!(
                "f({x}) is already {old}, cannot reassign to {v}"
            ))),
            _ => {
                self.values[x.index()] = Some(v);
                Ok(())
            }
        }
    }

    #[inline]
    pub fn get(&self, x: Elem) -> Option<Elem> {
        self.values[x.index()]
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    pub fn to_table(&self) -> Option<FnTable> {
        self.values
            .iter()
            .copied()
            .collect::<Option<Vec<_>>>()
            .map(|values| FnTable { values })
    }

    fn assigned(&self) -> impl Iterator<Item = (Elem, Elem)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|v| (Elem(i as u32), v)))
    }
}

/// Necessary conditions satisfied by every positivity preserver on `M_2(F_q)`, listed in the
/// order they are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma {
    /// `f(0) = 0`; `q` even or `q ≡ 3 (mod 4)`.
    ZeroFixed,
    /// If `f(0) = 0` then `f(x) != 0` for `x != 0`; `q ≡ 1 (mod 4)`.
    Nonzero,
    /// `f` is injective on `F_q^+`; `q` even or `q ≡ 3 (mod 4)`.
    InjectiveOnPositives,
    /// `a - b ∈ F_q^+` with `a` or `b` in `F_q^+` forces `f(a) - f(b) ∈ F_q^+`; `q ≡ 1 (mod 4)`.
    PositiveDifference,
    /// `f(F_q^+) ⊆ F_q^+`; every `q`.
    PositiveImage,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [
        Lemma::ZeroFixed,
        Lemma::Nonzero,
        Lemma::InjectiveOnPositives,
        Lemma::PositiveDifference,
        Lemma::PositiveImage,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Lemma::ZeroFixed => "zero-fixed",
            Lemma::Nonzero => "nonzero",
            Lemma::InjectiveOnPositives => "injective-on-positives",
            Lemma::PositiveDifference => "positive-difference",
            Lemma::PositiveImage => "positive-image",
        }
    }

    pub fn valid_for(self, congruence: Congruence) -> bool {
        match self {
            Lemma::PositiveImage => true,
            Lemma::ZeroFixed | Lemma::InjectiveOnPositives => congruence != Congruence::OneModFour,
            Lemma::Nonzero | Lemma::PositiveDifference => congruence == Congruence::OneModFour,
        }
    }
}

/// The lemmas enabled for a field; only ones valid for its congruence class can be added.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaSet {
    lemmas: Vec<Lemma>,
}

impl LemmaSet {
    /// Every lemma valid for the field.
    pub fn for_field(field: &Field) -> LemmaSet {
        let c = field.congruence();
        LemmaSet {
            lemmas: Lemma::ALL.into_iter().filter(|l| l.valid_for(c)).collect(),
        }
    }

    pub fn empty() -> LemmaSet {
        LemmaSet { lemmas: Vec::new() }
    }

    pub fn only(field: &Field, lemmas: &[Lemma]) -> Result<LemmaSet> {
        let c = field.congruence();
        if let Some(bad) = lemmas.iter().find(|l| !l.valid_for(c)) {
            return Err(Error::NotApplicable(format!(
                "{} does not hold for q = {}",
                bad.id(),
                field.q()
            )));
        }
        let mut lemmas = lemmas.to_vec();
        lemmas.sort_unstable();
        lemmas.dedup();
        Ok(LemmaSet { lemmas })
    }

    pub fn contains(&self, l: Lemma) -> bool {
        self.lemmas.contains(&l)
    }

    pub fn lemmas(&self) -> &[Lemma] {
        &self.lemmas
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FilterOutcome {
    Consistent,
    Violated(Lemma),
}

/// Whether the assigned entries already refute one of the enabled lemmas.
pub fn necessary_filter(field: &Field, f: &PartialFnTable, lemmas: &LemmaSet) -> FilterOutcome {
    let assigned: Vec<(Elem, Elem)> = f.assigned().collect();
    for &l in lemmas.lemmas() {
        let violated = match l {
            Lemma::ZeroFixed => f.get(Elem::ZERO).is_some_and(|v| !v.is_zero()),
            Lemma::Nonzero => {
                f.get(Elem::ZERO) == Some(Elem::ZERO)
                    && assigned.iter().any(|&(x, v)| !x.is_zero() && v.is_zero())
            }
            Lemma::InjectiveOnPositives => {
                let mut seen = vec![false; field.size()];
                assigned
                    .iter()
                    .filter(|(x, _)| field.is_positive(*x))
                    .any(|&(_, v)| std::mem::replace(&mut seen[v.index()], true))
            }
            Lemma::PositiveDifference => assigned.iter().any(|&(a, fa)| {
                assigned
                    .iter()
                    .any(|&(b, fb)| difference_violated(field, a, fa, b, fb))
            }),
            Lemma::PositiveImage => assigned
                .iter()
                .any(|&(x, v)| field.is_positive(x) && !field.is_positive(v)),
        };
        if violated {
            return FilterOutcome::Violated(l);
        }
    }
    FilterOutcome::Consistent
}

#[inline]
fn difference_violated(field: &Field, a: Elem, fa: Elem, b: Elem, fb: Elem) -> bool {
    field.is_positive(field.sub(a, b))
        && (field.is_positive(a) || field.is_positive(b))
        && !field.is_positive(field.sub(fa, fb))
}

/// The first enabled lemma refuted by the new assignment `x ↦ v`, given that the entries in
/// `values` were already consistent.
fn violated_by(
    field: &Field,
    lemmas: &LemmaSet,
    values: &[Option<Elem>],
    x: Elem,
    v: Elem,
) -> Option<Lemma> {
    let x_pos = field.is_positive(x);
    for &l in lemmas.lemmas() {
        let violated = match l {
            Lemma::ZeroFixed => x.is_zero() && !v.is_zero(),
            Lemma::Nonzero => {
                if x.is_zero() {
                    v.is_zero()
                        && values
                            .iter()
                            .enumerate()
                            .any(|(y, fy)| y != 0 && *fy == Some(Elem::ZERO))
                } else {
                    v.is_zero() && values[0] == Some(Elem::ZERO)
                }
            }
            Lemma::InjectiveOnPositives => {
                x_pos
                    && values.iter().enumerate().any(|(y, fy)| {
                        y != x.index() && *fy == Some(v) && field.is_positive(Elem(y as u32))
                    })
            }
            Lemma::PositiveDifference => values.iter().enumerate().any(|(y, fy)| match fy {
                Some(fy) if y != x.index() => {
                    let y = Elem(y as u32);
                    difference_violated(field, x, v, y, *fy)
                        || difference_violated(field, y, *fy, x, v)
                }
                _ => false,
            }),
            Lemma::PositiveImage => x_pos && !field.is_positive(v),
        };
        if violated {
            return Some(l);
        }
    }
    None
}

/// Result of a preserver check: on failure, the first matrix (in enumeration order) whose
/// image breaks the property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<SymMatrix>,
}

impl Verdict {
    fn from_witness(witness: Option<SymMatrix>) -> Verdict {
        Verdict {
            holds: witness.is_none(),
            witness,
        }
    }
}

/// Whether `f[A]` is positive definite for every positive definite `n × n` matrix `A`.
pub fn is_preserver(field: &Field, f: &FnTable, n: usize) -> Result<Verdict> {
    limits::check(matpos::count_symmetric(field, n), limits::candidate_limit())?;
    let witness = matpos::pd_iter(field, n)
        .find(|a| !is_positive_definite(field, &matpos::apply_entrywise(f, a)));
    Ok(Verdict::from_witness(witness))
}

/// Whether `A` is positive definite exactly when `f[A]` is, over every symmetric `n × n` `A`.
pub fn is_sign_preserver(field: &Field, f: &FnTable, n: usize) -> Result<Verdict> {
    limits::check(matpos::count_symmetric(field, n), limits::candidate_limit())?;
    let witness = matpos::symmetric_iter(field, n).find(|a| {
        is_positive_definite(field, a)
            != is_positive_definite(field, &matpos::apply_entrywise(f, a))
    });
    Ok(Verdict::from_witness(witness))
}

/// The interpolation polynomial of degree at most `q - 1` inducing `f`.
pub fn interpolate(field: &Field, f: &FnTable) -> PolyModReduced {
    let q = field.size();
    let mut coefficients = vec![Elem::ZERO; q];
    coefficients[0] = f.eval(Elem::ZERO);
    for (j, slot) in coefficients.iter_mut().enumerate().take(q - 1).skip(1) {
        let s = field.nonzero().fold(Elem::ZERO, |acc, a| {
            let a_inv_j = field.pow_u(field.inv(a).expect("non-zero"), j as u64);
            field.add(acc, field.mul(f.eval(a), a_inv_j))
        });
        *slot = field.neg(s);
    }
    let total = field
        .elements()
        .fold(Elem::ZERO, |acc, a| field.add(acc, f.eval(a)));
    coefficients[q - 1] = field.add(coefficients[q - 1], field.neg(total));
    PolyModReduced { coefficients }
}

/// Canonical shape of a table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Form {
    /// `c x^{p^ell}` with `c` positive (any non-zero `c` when `q` is even).
    AutomorphismMultiple {
        c: Elem,
        ell: u32,
        exponent: u64,
        c_positive: bool,
    },
    /// `c x^n` with `gcd(n, q - 1) = 1` and no automorphism-multiple reading.
    BijectiveMonomial {
        c: Elem,
        exponent: u64,
        c_positive: bool,
    },
    Other,
}

impl Form {
    pub fn is_automorphism_multiple(&self) -> bool {
        matches!(self, Form::AutomorphismMultiple { .. })
    }

    pub fn is_bijective_monomial(&self) -> bool {
        matches!(self, Form::BijectiveMonomial { .. })
    }
}

/// Matches `f` against `c x^{p^ell}`, then against bijective monomials `c x^n`, smallest
/// exponent first.
pub fn recognize_form(field: &Field, f: &FnTable) -> Form {
    let c = f.eval(Elem::ONE);
    if c.is_zero() || !f.eval(Elem::ZERO).is_zero() {
        return Form::Other;
    }
    let c_positive = field.is_positive(c);
    let matches = |e: u64| {
        field
            .nonzero()
            .all(|x| f.eval(x) == field.mul(c, field.pow_u(x, e)))
    };
    if c_positive {
        for ell in 0..field.k() {
            let e = (field.p() as u64).pow(ell);
            if matches(e) {
                return Form::AutomorphismMultiple {
                    c,
                    ell,
                    exponent: e,
                    c_positive,
                };
            }
        }
    }
    let m = field.q() as u64 - 1;
    for e in 1..=m {
        if gcd(e, m) == 1 && matches(e) {
            return Form::BijectiveMonomial {
                c,
                exponent: e,
                c_positive,
            };
        }
    }
    Form::Other
}

/// `f(0) = 0` and `η(f(a) - f(b)) = η(a - b)` for all `a, b`.
pub fn carlitz_predicate(field: &Field, f: &FnTable) -> Result<bool> {
    if !field.is_odd() {
        return Err(Error::EvenCharacteristic);
    }
    if !f.eval(Elem::ZERO).is_zero() {
        return Ok(false);
    }
    Ok(field.elements().all(|a| {
        field
            .elements()
            .all(|b| field.eta(field.sub(f.eval(a), f.eval(b))) == field.eta(field.sub(a, b)))
    }))
}

/// Every bijection with `f(0) = 0`, `f(1) = 1` satisfying [`carlitz_predicate`], ascending.
pub fn carlitz_solutions(field: &Field) -> Result<Vec<FnTable>> {
    if !field.is_odd() {
        return Err(Error::EvenCharacteristic);
    }
    let q = field.size();
    let mut values: Vec<Option<Elem>> = vec![None; q];
    values[0] = Some(Elem::ZERO);
    values[1] = Some(Elem::ONE);
    let mut used = vec![false; q];
    used[0] = true;
    used[1] = true;
    let mut out = Vec::new();
    carlitz_dfs(field, 2, &mut values, &mut used, &mut out);
    let mut verified = Vec::with_capacity(out.len());
    for t in out {
        if carlitz_predicate(field, &t)? {
            verified.push(t);
        }
    }
    verified.sort();
    Ok(verified)
}

fn carlitz_dfs(
    field: &Field,
    x: usize,
    values: &mut [Option<Elem>],
    used: &mut [bool],
    out: &mut Vec<FnTable>,
) {
    if x == values.len() {
        out.push(FnTable {
            values: values.iter().map(|v| v.expect("complete")).collect(),
        });
        return;
    }
    let xe = Elem(x as u32);
    for v in field.elements() {
        if used[v.index()] {
            continue;
        }
        let ok = (0..x).all(|y| {
            let ye = Elem(y as u32);
            let fy = values[y].expect("assigned");
            field.eta(field.sub(v, fy)) == field.eta(field.sub(xe, ye))
                && field.eta(field.sub(fy, v)) == field.eta(field.sub(ye, xe))
        });
        if ok {
            values[x] = Some(v);
            used[v.index()] = true;
            carlitz_dfs(field, x + 1, values, used, out);
            used[v.index()] = false;
            values[x] = None;
        }
    }
}

/// Number of `f` with `f(F_q^+) ⊆ F_q^+`, i.e. positivity preservers on `1 × 1` matrices.
pub fn count_dim1_preservers(field: &Field) -> BigUint {
    let q = BigUint::from(field.q());
    let q1 = field.q() - 1;
    if field.is_odd() {
        let h = q1 / 2;
        BigUint::from(h).pow(h) * q.pow(field.q().div_ceil(2))
    } else {
        BigUint::from(q1).pow(q1) * q
    }
}

/// The same count by testing every table against the `1 × 1` positive definite matrices.
pub fn brute_force_dim1_count(field: &Field) -> Result<u64> {
    let q = field.q() as u128;
    let total = saturating_pow(q, field.q());
    limits::check(total, limits::candidate_limit())?;
    let pd = matpos::enumerate_pd(field, 1)?;
    let count = (0..total as u64)
        .into_par_iter()
        .filter(|&idx| {
            let t = table_from_index(field, idx);
            pd.iter()
                .all(|a| is_positive_definite(field, &matpos::apply_entrywise(&t, a)))
        })
        .count();
    Ok(count as u64)
}

fn table_from_index(field: &Field, mut idx: u64) -> FnTable {
    let q = field.q() as u64;
    let mut values = vec![Elem::ZERO; field.size()];
    for slot in values.iter_mut().rev() {
        *slot = Elem((idx % q) as u32);
        idx /= q;
    }
    FnTable { values }
}

/// Whether `x^e` preserves positivity on `M_2(F_q)`, `q ≡ 3 (mod 4)`, by two routes: the
/// direct check, and the exponent screens followed by the key-lemma criterion.
pub fn monomial_preserver_test(field: &Field, e: u64) -> Result<bool> {
    if field.congruence() != Congruence::ThreeModFour {
        return Err(Error::PreconditionViolated(format!(
            "q = {} is not ≡ 3 (mod 4)",
            field.q()
        )));
    }
    let m = field.q() as u64 - 1;
    if e == 0 || e > m {
        return Err(Error::PreconditionViolated(format!(
            "exponent {e} is outside [1, {m}]"
        )));
    }
    let direct = is_preserver(field, &FnTable::monomial(field, Elem::ONE, e), 2)?.holds;
    let screened = if e.is_multiple_of(2) || gcd(e, m) != 1 {
        false
    } else {
        key_lemma_test(field, e)?
    };
    if direct != screened {
        return Err(Error::RouteDisagreement(format!(
            "x^{e} over F_{}: direct check {direct}, exponent criterion {screened}",
            field.q()
        )));
    }
    Ok(direct)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Preserver,
    SignPreserver,
}

impl Mode {
    pub fn id(self) -> &'static str {
        match self {
            Mode::Preserver => "preserver",
            Mode::SignPreserver => "sign_preserver",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    pub prune: bool,
    /// Worker threads; `0` lets the pool decide.
    pub jobs: usize,
    pub timeout: Option<Duration>,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            prune: true,
            jobs: 0,
            timeout: None,
        }
    }
}

/// Search counters. Every field is a deterministic function of the inputs unless the run was
/// interrupted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PruningProfile {
    pub nodes: u64,
    pub zero_fixed: u64,
    pub nonzero: u64,
    pub injective_on_positives: u64,
    pub positive_difference: u64,
    pub positive_image: u64,
    pub matrix_tests: u64,
    /// Complete tables reached by the search (for `n >= 3`, the `n = 2` survivors).
    pub completed: u64,
    /// Complete tables that passed the full re-verification.
    pub verified: u64,
}

impl PruningProfile {
    fn bump(&mut self, l: Lemma) {
        match l {
            Lemma::ZeroFixed => self.zero_fixed += 1,
            Lemma::Nonzero => self.nonzero += 1,
            Lemma::InjectiveOnPositives => self.injective_on_positives += 1,
            Lemma::PositiveDifference => self.positive_difference += 1,
            Lemma::PositiveImage => self.positive_image += 1,
        }
    }

    fn merge(mut self, o: PruningProfile) -> PruningProfile {
        self.nodes += o.nodes;
        self.zero_fixed += o.zero_fixed;
        self.nonzero += o.nonzero;
        self.injective_on_positives += o.injective_on_positives;
        self.positive_difference += o.positive_difference;
        self.positive_image += o.positive_image;
        self.matrix_tests += o.matrix_tests;
        self.completed += o.completed;
        self.verified += o.verified;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classified {
    pub table: FnTable,
    pub form: Form,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub q: u32,
    pub p: u32,
    pub k: u32,
    pub n: usize,
    pub mode: Mode,
    /// Which structure result predicts the answer, or `experimental_evidence` when none does.
    pub regime: String,
    pub pruned: bool,
    pub exhaustive: bool,
    pub count: usize,
    pub preservers: Vec<Classified>,
    pub pruning_profile: PruningProfile,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl ClassificationResult {
    pub fn tables(&self) -> Vec<FnTable> {
        self.preservers.iter().map(|c| c.table.clone()).collect()
    }
}

/// The predicted shape of the answer for `(q, n, mode)`.
pub fn regime(field: &Field, n: usize, mode: Mode) -> &'static str {
    match (field.congruence(), n, mode) {
        (Congruence::Even, 2, _) => "bijective_monomials",
        (Congruence::Even, _, _) => "automorphism_multiples",
        (Congruence::OneModFour, 2, Mode::Preserver) if field.k() % 2 == 1 => {
            "experimental_evidence"
        }
        _ => "positive_automorphism_multiples",
    }
}

/// Finds every positivity preserver (or sign preserver) on `M_n(F_q)`.
///
/// The pruned search assigns values along `0, 1, F_q^+` by ascending discrete log, then
/// `F_q^-`, rejecting a branch as soon as an enabled lemma or a fully assigned `2 × 2` test
/// matrix refutes it. Every complete table is re-verified against the full test set for `n`;
/// for `n >= 3` the candidates are the `n = 2` preservers.
pub fn classify(
    field: &Field,
    n: usize,
    mode: Mode,
    options: &ClassifyOptions,
) -> Result<ClassificationResult> {
    let start = Instant::now();
    if !(2..=MAX_DIM).contains(&n) {
        return Err(Error::InvalidInput(format!(
            "dimension {n} is outside [2, {MAX_DIM}]"
        )));
    }
    let limit = limits::candidate_limit();
    limits::check(matpos::count_symmetric(field, n), limit)?;
    let q = field.q();
    if options.prune {
        if q > limits::PRUNED_SEARCH_MAX_Q {
            return Err(Error::SizeExceeded {
                size: saturating_pow(q as u128, q),
                limit: saturating_pow(
                    limits::PRUNED_SEARCH_MAX_Q as u128,
                    limits::PRUNED_SEARCH_MAX_Q,
                ),
            });
        }
    } else {
        limits::check(saturating_pow(q as u128, q), limit)?;
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    let deadline = options.timeout.map(|t| start + t);
    let stop = AtomicBool::new(false);

    let (tables, profile) = pool.install(|| -> Result<_> {
        let tests = TestSet::new(field, n, mode);
        if !options.prune {
            return Ok(unpruned(field, &tests, deadline, &stop));
        }
        let base_mode = if n == 2 { mode } else { Mode::Preserver };
        let base_tests = if n == 2 {
            None
        } else {
            Some(TestSet::new(field, 2, base_mode))
        };
        let pair_tests = base_tests.as_ref().unwrap_or(&tests);
        let search = Search::new(
            field,
            pair_tests,
            LemmaSet::for_field(field),
            deadline,
            &stop,
        );
        let (candidates, mut profile) = search.run();
        let tables: Vec<FnTable> = candidates
            .into_par_iter()
            .filter(|t| tests.passes(field, t))
            .collect();
        profile.verified = tables.len() as u64;
        Ok((tables, profile))
    })?;

    let mut tables = tables;
    tables.sort();
    let preservers: Vec<Classified> = tables
        .into_iter()
        .map(|t| Classified {
            form: recognize_form(field, &t),
            table: t,
        })
        .collect();
    Ok(ClassificationResult {
        q,
        p: field.p(),
        k: field.k(),
        n,
        mode,
        regime: regime(field, n, mode).to_string(),
        pruned: options.prune,
        exhaustive: !stop.load(Ordering::Relaxed),
        count: preservers.len(),
        preservers,
        pruning_profile: profile,
        elapsed: start.elapsed(),
    })
}

/// Matrices a table must pass: positive definite ones (preserver mode) or all symmetric
/// ones with their positivity flag (sign mode).
struct TestSet {
    n: usize,
    mode: Mode,
    matrices: Vec<(SymMatrix, bool)>,
}

impl TestSet {
    fn new(field: &Field, n: usize, mode: Mode) -> TestSet {
        let matrices = match mode {
            Mode::Preserver => matpos::pd_iter(field, n).map(|a| (a, true)).collect(),
            Mode::SignPreserver => matpos::symmetric_iter(field, n)
                .map(|a| {
                    let pd = is_positive_definite(field, &a);
                    (a, pd)
                })
                .collect(),
        };
        TestSet { n, mode, matrices }
    }

    fn passes(&self, field: &Field, f: &FnTable) -> bool {
        self.matrices.iter().all(|(a, pd)| {
            let img = matpos::apply_entrywise(f, a);
            let ok = if self.n == 2 {
                is_pd2(field, img.get(0, 0), img.get(0, 1), img.get(1, 1))
            } else {
                is_positive_definite(field, &img)
            };
            ok == *pd
        })
    }
}

fn unpruned(
    field: &Field,
    tests: &TestSet,
    deadline: Option<Instant>,
    stop: &AtomicBool,
) -> (Vec<FnTable>, PruningProfile) {
    let total = saturating_pow(field.q() as u128, field.q()) as u64;
    let tables: Vec<FnTable> = (0..total)
        .into_par_iter()
        .filter_map(|idx| {
            if idx % 4096 == 0 && deadline.is_some_and(|d| Instant::now() > d) {
                stop.store(true, Ordering::Relaxed);
            }
            if stop.load(Ordering::Relaxed) {
                return None;
            }
            let t = table_from_index(field, idx);
            tests.passes(field, &t).then_some(t)
        })
        .collect();
    let profile = PruningProfile {
        nodes: total,
        completed: total,
        verified: tables.len() as u64,
        ..PruningProfile::default()
    };
    debug_assert!(tests.mode == Mode::Preserver || tests.mode == Mode::SignPreserver);
    (tables, profile)
}

/// A `2 × 2` test matrix `[[a, b], [b, c]]` and the required positivity of its image.
#[derive(Clone, Copy)]
struct PairTest {
    a: Elem,
    b: Elem,
    c: Elem,
    pd: bool,
}

struct Search<'a> {
    field: &'a Field,
    lemmas: LemmaSet,
    /// Elements in assignment order.
    order: Vec<Elem>,
    /// `buckets[d]`: tests whose last entry is assigned at depth `d`.
    buckets: Vec<Vec<PairTest>>,
    deadline: Option<Instant>,
    stop: &'a AtomicBool,
}

impl<'a> Search<'a> {
    fn new(
        field: &'a Field,
        tests: &TestSet,
        lemmas: LemmaSet,
        deadline: Option<Instant>,
        stop: &'a AtomicBool,
    ) -> Search<'a> {
        debug_assert_eq!(tests.n, 2);
        let by_log = |xs: Vec<Elem>| {
            let mut xs = xs;
            xs.sort_by_key(|&x| field.log(x));
            xs
        };
        let mut order = vec![Elem::ZERO];
        order.extend(by_log(field.positives().to_vec()));
        order.extend(by_log(field.negatives()));
        let mut depth_of = vec![0usize; field.size()];
        for (d, x) in order.iter().enumerate() {
            depth_of[x.index()] = d;
        }
        let mut buckets = vec![Vec::new(); field.size()];
        for (m, pd) in &tests.matrices {
            let (a, b, c) = (m.get(0, 0), m.get(0, 1), m.get(1, 1));
            let d = depth_of[a.index()]
                .max(depth_of[b.index()])
                .max(depth_of[c.index()]);
            buckets[d].push(PairTest { a, b, c, pd: *pd });
        }
        Search {
            field,
            lemmas,
            order,
            buckets,
            deadline,
            stop,
        }
    }

    fn run(&self) -> (Vec<FnTable>, PruningProfile) {
        let q = self.field.size();
        let branches: Vec<(Vec<FnTable>, PruningProfile)> = self
            .field
            .elements()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|v| {
                let mut values = vec![None; q];
                let mut out = Vec::new();
                let mut profile = PruningProfile::default();
                let mut ticks = 0u32;
                self.try_assign(0, v, &mut values, &mut out, &mut profile, &mut ticks);
                (out, profile)
            })
            .collect();
        let mut tables = Vec::new();
        let mut profile = PruningProfile::default();
        for (t, p) in branches {
            tables.extend(t);
            profile = profile.merge(p);
        }
        (tables, profile)
    }

    fn try_assign(
        &self,
        depth: usize,
        v: Elem,
        values: &mut [Option<Elem>],
        out: &mut Vec<FnTable>,
        profile: &mut PruningProfile,
        ticks: &mut u32,
    ) {
        *ticks += 1;
        if (*ticks).is_multiple_of(4096) && self.deadline.is_some_and(|d| Instant::now() > d) {
            self.stop.store(true, Ordering::Relaxed);
        }
        if self.stop.load(Ordering::Relaxed) {
            return;
        }
        profile.nodes += 1;
        let x = self.order[depth];
        if let Some(l) = violated_by(self.field, &self.lemmas, values, x, v) {
            profile.bump(l);
            return;
        }
        values[x.index()] = Some(v);
        let f = self.field;
        let ok = self.buckets[depth].iter().all(|t| {
            let get = |e: Elem| values[e.index()].expect("assigned");
            is_pd2(f, get(t.a), get(t.b), get(t.c)) == t.pd
        });
        if !ok {
            profile.matrix_tests += 1;
        } else if depth + 1 == values.len() {
            profile.completed += 1;
            out.push(FnTable {
                values: values.iter().map(|v| v.expect("complete")).collect(),
            });
        } else {
            for w in f.elements() {
                self.try_assign(depth + 1, w, values, out, profile, ticks);
            }
        }
        values[x.index()] = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> Field {
        Field::from_order(q).unwrap()
    }

    #[test]
    fn table_basics() {
        let f7 = f(7);
        assert!(FnTable::from_codes(&f7, &[0, 1, 2]).is_err());
        assert!(FnTable::from_codes(&f7, &[0, 1, 2, 3, 4, 5, 7]).is_err());
        let t = FnTable::monomial(&f7, Elem(2), 1);
        assert_eq!(t.codes(), vec![0, 2, 4, 6, 1, 3, 5]);
        assert!(t.is_bijective());
        let mut p = PartialFnTable::new(&f7);
        p.assign(Elem(1), Elem(2)).unwrap();
        assert!(p.assign(Elem(1), Elem(3)).is_err());
        assert!(!p.is_complete());
        assert!(p.to_table().is_none());
    }

    #[test]
    fn interpolation_examples() {
        let f7 = f(7);
        let id = interpolate(&f7, &FnTable::identity(&f7));
        assert_eq!(id.degree(), Some(1));
        assert_eq!(id.coefficients[1], Elem::ONE);

        let ind0 = FnTable::from_fn(&f7, |x| if x.is_zero() { Elem::ONE } else { Elem::ZERO });
        let poly = interpolate(&f7, &ind0);
        let mut expected = vec![Elem::ZERO; 7];
        expected[0] = Elem::ONE;
        expected[6] = f7.neg(Elem::ONE);
        assert_eq!(poly.coefficients, expected);

        let f9 = f(9);
        let frob = FnTable::from_fn(&f9, |x| f9.frobenius(1, x));
        let poly = interpolate(&f9, &frob);
        assert_eq!(poly.degree(), Some(3));
        assert_eq!(poly.coefficients.iter().filter(|c| !c.is_zero()).count(), 1);
        assert_eq!(poly.coefficients[3], Elem::ONE);
    }

    #[test]
    fn preserver_examples() {
        let f7 = f(7);
        assert!(
            is_preserver(&f7, &FnTable::monomial(&f7, Elem(2), 1), 2)
                .unwrap()
                .holds
        );
        let v = is_preserver(&f7, &FnTable::monomial(&f7, Elem(3), 1), 2).unwrap();
        assert!(!v.holds);
        assert_eq!(v.witness, matpos::pd_iter(&f7, 2).next());

        let f4 = f(4);
        assert!(
            is_preserver(&f4, &FnTable::monomial(&f4, Elem::ONE, 2), 3)
                .unwrap()
                .holds
        );
    }

    #[test]
    fn sign_preserver_examples() {
        let f5 = f(5);
        assert!(
            is_sign_preserver(&f5, &FnTable::monomial(&f5, Elem(4), 1), 2)
                .unwrap()
                .holds
        );
        let f4 = f(4);
        for c in f4.nonzero() {
            for e in [1u64, 2] {
                let t = FnTable::monomial(&f4, c, e);
                assert!(is_sign_preserver(&f4, &t, 2).unwrap().holds);
            }
        }
        let f7 = f(7);
        let shift = FnTable::from_fn(&f7, |x| f7.add(x, Elem::ONE));
        assert!(!is_sign_preserver(&f7, &shift, 2).unwrap().holds);
    }

    #[test]
    fn filter_examples() {
        let f7 = f(7);
        let set7 = LemmaSet::for_field(&f7);
        let p = PartialFnTable::with_assignments(&f7, &[(1, 3)]).unwrap();
        assert_eq!(
            necessary_filter(&f7, &p, &set7),
            FilterOutcome::Violated(Lemma::PositiveImage)
        );
        let p = PartialFnTable::with_assignments(&f7, &[(0, 1)]).unwrap();
        assert_eq!(
            necessary_filter(&f7, &p, &set7),
            FilterOutcome::Violated(Lemma::ZeroFixed)
        );
        let p = PartialFnTable::with_assignments(&f7, &[(1, 2), (2, 2)]).unwrap();
        assert_eq!(
            necessary_filter(&f7, &p, &set7),
            FilterOutcome::Violated(Lemma::InjectiveOnPositives)
        );

        let f5 = f(5);
        let set5 = LemmaSet::for_field(&f5);
        let p = PartialFnTable::with_assignments(&f5, &[(0, 0), (1, 0)]).unwrap();
        assert_eq!(
            necessary_filter(&f5, &p, &set5),
            FilterOutcome::Violated(Lemma::Nonzero)
        );
        assert_eq!(
            necessary_filter(&f5, &PartialFnTable::new(&f5), &set5),
            FilterOutcome::Consistent
        );
        assert!(LemmaSet::only(&f5, &[Lemma::ZeroFixed]).is_err());
        assert!(LemmaSet::only(&f7, &[Lemma::PositiveDifference]).is_err());
    }

    #[test]
    fn incremental_filter_matches_full_filter() {
        for q in [4u32, 5, 7, 9] {
            let field = f(q);
            let set = LemmaSet::for_field(&field);
            // every pair of assignments
            for x in field.elements() {
                for y in field.elements().filter(|&y| y != x) {
                    for vx in field.elements() {
                        for vy in field.elements() {
                            let mut p = PartialFnTable::new(&field);
                            p.assign(x, vx).unwrap();
                            if necessary_filter(&field, &p, &set) != FilterOutcome::Consistent {
                                continue;
                            }
                            let inc = violated_by(&field, &set, &p.values, y, vy);
                            p.assign(y, vy).unwrap();
                            let full = necessary_filter(&field, &p, &set);
                            assert_eq!(
                                inc.is_some(),
                                full != FilterOutcome::Consistent,
                                "q={q} {x}->{vx} {y}->{vy}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn forms() {
        let f9 = f(9);
        let t = FnTable::automorphism_multiple(&f9, Elem(2), 1);
        // 2 = -1 is a square in F_9
        assert!(f9.is_positive(Elem(2)));
        assert_eq!(
            recognize_form(&f9, &t),
            Form::AutomorphismMultiple {
                c: Elem(2),
                ell: 1,
                exponent: 3,
                c_positive: true
            }
        );
        let f7 = f(7);
        assert_eq!(
            recognize_form(&f7, &FnTable::identity(&f7)),
            Form::AutomorphismMultiple {
                c: Elem(1),
                ell: 0,
                exponent: 1,
                c_positive: true
            }
        );
        assert_eq!(
            recognize_form(&f7, &FnTable::monomial(&f7, Elem::ONE, 5)),
            Form::BijectiveMonomial {
                c: Elem(1),
                exponent: 5,
                c_positive: true
            }
        );
        assert_eq!(
            recognize_form(&f7, &FnTable::monomial(&f7, Elem(3), 1)),
            Form::BijectiveMonomial {
                c: Elem(3),
                exponent: 1,
                c_positive: false
            }
        );
        assert_eq!(
            recognize_form(&f7, &FnTable::monomial(&f7, Elem::ONE, 2)),
            Form::Other
        );
        let f4 = f(4);
        assert!(recognize_form(&f4, &FnTable::monomial(&f4, Elem(2), 2)).is_automorphism_multiple());
    }

    #[test]
    fn carlitz_examples() {
        let f9 = f(9);
        assert!(carlitz_predicate(&f9, &FnTable::monomial(&f9, Elem::ONE, 3)).unwrap());
        assert!(carlitz_predicate(&f9, &FnTable::identity(&f9)).unwrap());
        assert!(!carlitz_predicate(&f9, &FnTable::monomial(&f9, Elem::ONE, 5)).unwrap());
        assert!(carlitz_predicate(&f(4), &FnTable::identity(&f(4))).is_err());
    }

    #[test]
    fn dim1_counts() {
        assert_eq!(count_dim1_preservers(&f(3)), BigUint::from(9u32));
        assert_eq!(count_dim1_preservers(&f(2)), BigUint::from(2u32));
        assert_eq!(count_dim1_preservers(&f(5)), BigUint::from(500u32));
        for q in [2u32, 3, 4, 5] {
            let field = f(q);
            assert_eq!(
                BigUint::from(brute_force_dim1_count(&field).unwrap()),
                count_dim1_preservers(&field)
            );
        }
    }

    #[test]
    fn monomial_examples() {
        assert!(!monomial_preserver_test(&f(7), 5).unwrap());
        assert!(!monomial_preserver_test(&f(7), 2).unwrap());
        assert!(monomial_preserver_test(&f(7), 1).unwrap());
        assert!(monomial_preserver_test(&f(27), 3).unwrap());
        assert!(monomial_preserver_test(&f(5), 1).is_err());
    }

    #[test]
    fn classify_small() {
        let opts = ClassifyOptions::default();
        let r = classify(&f(7), 2, Mode::Preserver, &opts).unwrap();
        let expected: Vec<FnTable> = [1u32, 2, 4]
            .iter()
            .map(|&c| FnTable::monomial(&f(7), Elem(c), 1))
            .collect();
        assert_eq!(r.tables(), expected);
        assert!(r.exhaustive);
        assert_eq!(r.regime, "positive_automorphism_multiples");

        let r = classify(
            &f(3),
            2,
            Mode::Preserver,
            &ClassifyOptions {
                prune: false,
                ..opts
            },
        )
        .unwrap();
        assert_eq!(r.count, 1);
        assert!(classify(&f(3), 1, Mode::Preserver, &ClassifyOptions::default()).is_err());
    }
}
