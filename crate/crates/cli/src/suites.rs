//! Verification suites. Each suite runs over a default list of field orders, or over one
//! field chosen on the command line.

use std::collections::BTreeSet;

use anyhow::{bail, Result};
use ffpos_core::gf::{Congruence, Elem, Field, Sign};
use ffpos_core::matpos::{self, SymMatrix};
use ffpos_core::numtheory::{self, gcd};
use ffpos_core::paley;
use ffpos_core::preserver::{self, ClassificationResult, ClassifyOptions, FnTable, Mode};
use ffpos_core::Error;
use rayon::prelude::*;

use crate::report::{Check, SuiteReport};

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    pub jobs: usize,
}

type SuiteFn = fn(&Field, &SuiteOptions) -> Result<Vec<Check>>;

pub struct SuiteDescriptor {
    pub id: &'static str,
    pub anchor: &'static str,
    pub default_orders: &'static [u32],
    admissible: fn(&Field) -> bool,
    run: SuiteFn,
}

impl SuiteDescriptor {
    pub fn admits(&self, field: &Field) -> bool {
        (self.admissible)(field)
    }
}

const SRG_ORDERS: &[u32] = &[
    5, 9, 13, 17, 25, 29, 37, 41, 49, 53, 61, 73, 81, 89, 97, 101, 109, 113, 121,
];
const THREE_MOD_FOUR_ORDERS: &[u32] = &[
    3, 7, 11, 19, 23, 27, 31, 43, 47, 59, 67, 71, 79, 83, 103, 107,
];
const ODD_ORDERS: &[u32] = &[
    3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29, 31, 37, 41, 43, 47, 49, 53, 59, 61, 67, 71, 73, 79,
    81, 83, 89, 97, 101, 103, 107, 109, 113, 121,
];
const ODD_ORDERS_TO_49: &[u32] = &[
    3, 5, 7, 9, 11, 13, 17, 19, 23, 25, 27, 29, 31, 37, 41, 43, 47, 49,
];
const ORDERS_TO_27: &[u32] = &[2, 3, 4, 5, 7, 8, 9, 11, 13, 16, 17, 19, 23, 25, 27];

fn is_even(f: &Field) -> bool {
    f.congruence() == Congruence::Even
}
fn is_three_mod_four(f: &Field) -> bool {
    f.congruence() == Congruence::ThreeModFour
}
fn is_one_mod_four(f: &Field) -> bool {
    f.congruence() == Congruence::OneModFour
}
fn odd_square(f: &Field) -> bool {
    f.is_odd() && f.square_root_order().is_some()
}

static REGISTRY: &[SuiteDescriptor] = &[
    SuiteDescriptor {
        id: "thmA",
        anchor: "even q: bijective monomials for n = 2, non-zero automorphism multiples for n = 3",
        default_orders: &[2, 4, 8],
        admissible: |f| is_even(f) && f.q() <= 8,
        run: thm_a,
    },
    SuiteDescriptor {
        id: "thmB",
        anchor: "q ≡ 3 (mod 4): positive automorphism multiples for n = 2, 3",
        default_orders: &[3, 7, 11],
        admissible: |f| is_three_mod_four(f) && f.q() <= 11,
        run: thm_b,
    },
    SuiteDescriptor {
        id: "thmC",
        anchor:
            "q ≡ 1 (mod 4): positive automorphism multiples for n = 3, and for n = 2 at square q",
        default_orders: &[9, 13],
        admissible: |f| is_one_mod_four(f) && f.q() <= 13,
        run: thm_c,
    },
    SuiteDescriptor {
        id: "thmD",
        anchor: "sign preservers on 2 × 2 matrices",
        default_orders: &[3, 4, 5, 7, 8, 9],
        admissible: |f| f.q() <= 13,
        run: thm_d,
    },
    SuiteDescriptor {
        id: "open-case",
        anchor: "q ≡ 1 (mod 4) non-square, n = 2: recorded evidence",
        default_orders: &[5, 13],
        admissible: |f| is_one_mod_four(f) && f.k() % 2 == 1 && f.q() <= 13,
        run: open_case,
    },
    SuiteDescriptor {
        id: "dim1count",
        anchor: "number of positivity preservers on 1 × 1 matrices",
        default_orders: ORDERS_TO_27,
        admissible: |_| true,
        run: dim1count,
    },
    SuiteDescriptor {
        id: "srg",
        anchor: "Paley graph strongly regular parameters",
        default_orders: SRG_ORDERS,
        admissible: |f| is_one_mod_four(f) && f.q() <= 121,
        run: srg,
    },
    SuiteDescriptor {
        id: "ekr",
        anchor: "maximum cliques of P(r^2) are the square translates of F_r",
        default_orders: &[9, 25],
        admissible: |f| odd_square(f) && f.q() <= paley::CLIQUE_MAX_Q,
        run: ekr,
    },
    SuiteDescriptor {
        id: "hoffman",
        anchor: "neighbours of a vertex inside a square coset",
        default_orders: &[9, 25],
        admissible: odd_square,
        run: hoffman,
    },
    SuiteDescriptor {
        id: "translate",
        anchor: "|F_q^+ ∩ (a + F_q^+)| = (q - 3)/4 for q ≡ 3 (mod 4)",
        default_orders: THREE_MOD_FOUR_ORDERS,
        admissible: is_three_mod_four,
        run: translate,
    },
    SuiteDescriptor {
        id: "triples",
        anchor: "number of common positive translates of three points",
        default_orders: ODD_ORDERS,
        admissible: |f| f.is_odd() && f.q() <= 243,
        run: triples,
    },
    SuiteDescriptor {
        id: "weil",
        anchor: "cubic character sums within 2√q",
        default_orders: ODD_ORDERS_TO_49,
        admissible: |f| f.is_odd() && f.q() <= 49,
        run: weil,
    },
    SuiteDescriptor {
        id: "carlitz",
        anchor: "character-preserving bijections fixing 0 and 1 are Frobenius powers",
        default_orders: &[3, 5, 7, 9, 13],
        admissible: |f| f.is_odd() && f.q() <= 13,
        run: carlitz,
    },
    SuiteDescriptor {
        id: "lucas",
        anchor: "binomial coefficients modulo p from base-p digits",
        default_orders: &[3, 5, 7, 11],
        admissible: |f| f.k() == 1,
        run: lucas,
    },
    SuiteDescriptor {
        id: "keylemma",
        anchor: "(x^n - 1)^((q-1)/2) = (x - 1)^((q-1)/2) iff n is a power of p",
        default_orders: &[7, 11, 27],
        admissible: |f| is_three_mod_four(f) && f.q() <= 243,
        run: keylemma,
    },
    SuiteDescriptor {
        id: "monomial",
        anchor: "x^n preserves positivity on 2 × 2 matrices iff n is a power of p, q ≡ 3 (mod 4)",
        default_orders: &[7, 11, 27],
        admissible: |f| is_three_mod_four(f) && f.q() <= 31,
        run: monomial,
    },
    SuiteDescriptor {
        id: "cholesky",
        anchor: "positive definite iff Cholesky factorization exists, unless q ≡ 1 (mod 4)",
        default_orders: &[2, 3, 4, 5, 7, 8, 9, 11, 13, 17, 25],
        admissible: |f| f.q() <= 27,
        run: cholesky,
    },
    SuiteDescriptor {
        id: "quadrange",
        anchor: "isotropic vectors for n >= 3; positive definite forms are onto for n >= 2",
        default_orders: &[2, 3, 4, 5, 7, 8, 9, 11, 13],
        admissible: |f| f.q() <= 13,
        run: quadrange,
    },
    SuiteDescriptor {
        id: "automorphisms",
        anchor: "automorphisms of Γ(q) are x ↦ a x^(±p^l)",
        default_orders: &[9, 13, 17, 25],
        admissible: |f| {
            is_one_mod_four(f) && (f.q() as usize - 1) / 2 <= paley::AUTOMORPHISM_MAX_VERTICES
        },
        run: automorphisms,
    },
    SuiteDescriptor {
        id: "galois-pairs",
        anchor: "points outside F_r with equal F_r-neighbourhoods are Frobenius conjugates",
        default_orders: &[25],
        admissible: |f| odd_square(f) && f.square_root_order().is_some_and(|r| r % 4 == 1),
        run: galois_pairs,
    },
    SuiteDescriptor {
        id: "oval",
        anchor: "powers of an element of order (r+1)/2 form a maximal clique or independent set",
        default_orders: &[9, 25, 49],
        admissible: |f| odd_square(f) && f.q() <= 121,
        run: oval,
    },
    SuiteDescriptor {
        id: "neighborhoods",
        anchor: "Γ(q) regularity and separating witnesses in P(q)",
        default_orders: SRG_ORDERS,
        admissible: |f| is_one_mod_four(f) && f.q() <= 121,
        run: neighborhoods,
    },
    SuiteDescriptor {
        id: "frobenius",
        anchor: "det σ[A] = σ(det A) for every automorphism σ",
        default_orders: &[4, 8, 9, 16, 25],
        admissible: |f| f.q() <= 25,
        run: frobenius,
    },
    SuiteDescriptor {
        id: "minor-signs",
        anchor: "n = 3 preservers keep the sign of every determinant up to size 3",
        default_orders: &[3, 4, 5, 7, 8, 9],
        admissible: |f| f.q() <= 9,
        run: minor_signs,
    },
    SuiteDescriptor {
        id: "prune-audit",
        anchor: "pruned search agrees with the unpruned enumeration",
        default_orders: &[2, 3, 4, 5, 7],
        admissible: |f| f.q() <= 7,
        run: prune_audit,
    },
];

pub fn suite_registry() -> &'static [SuiteDescriptor] {
    REGISTRY
}

pub fn find_suite(id: &str) -> Option<&'static SuiteDescriptor> {
    REGISTRY.iter().find(|s| s.id == id)
}

/// Runs a suite over its defaults, or over `field` alone.
pub fn run_suite(
    suite: &SuiteDescriptor,
    field: Option<&Field>,
    opts: &SuiteOptions,
) -> Result<SuiteReport> {
    let fields: Vec<Field> = match field {
        Some(f) => {
            if !suite.admits(f) {
                return Err(Error::NotApplicable(format!(
                    "suite {} does not apply to q = {}",
                    suite.id,
                    f.q()
                ))
                .into());
            }
            vec![f.clone()]
        }
        None => suite
            .default_orders
            .iter()
            .map(|&q| Field::from_order(q))
            .collect::<ffpos_core::Result<_>>()?,
    };
    let mut report = SuiteReport::new(suite.id, suite.anchor);
    for f in &fields {
        report.fields.push(f.info());
        let checks = (suite.run)(f, opts)?;
        report.extend(&format!("q={}", f.q()), checks);
    }
    Ok(report)
}

type TableSet = BTreeSet<Vec<u32>>;

fn classify(f: &Field, n: usize, mode: Mode, opts: &SuiteOptions) -> Result<ClassificationResult> {
    let options = ClassifyOptions {
        prune: true,
        jobs: opts.jobs,
        timeout: None,
    };
    Ok(preserver::classify(f, n, mode, &options)?)
}

fn codes(r: &ClassificationResult) -> TableSet {
    r.preservers.iter().map(|c| c.table.codes()).collect()
}

/// `{c x^{p^l}}` with `c` positive (or any non-zero `c` when `positive_only` is false).
fn automorphism_multiples(f: &Field, positive_only: bool) -> TableSet {
    let mut out = TableSet::new();
    for c in f.nonzero().filter(|&c| !positive_only || f.is_positive(c)) {
        for l in 0..f.k() {
            out.insert(FnTable::automorphism_multiple(f, c, l).codes());
        }
    }
    out
}

fn bijective_monomials(f: &Field) -> TableSet {
    let m = f.q() as u64 - 1;
    let mut out = TableSet::new();
    for c in f.nonzero() {
        for e in (1..=m).filter(|&e| gcd(e, m) == 1) {
            out.insert(FnTable::monomial(f, c, e).codes());
        }
    }
    out
}

fn classification_checks(label: &str, r: &ClassificationResult, expected: &TableSet) -> Vec<Check> {
    vec![
        Check::holds(format!("{label} exhaustive"), r.exhaustive),
        Check::eq(format!("{label} count"), expected.len(), r.count),
        Check::eq(format!("{label} tables"), expected.clone(), codes(r)),
        Check::holds(
            format!("{label} every table has a recognized form"),
            r.preservers
                .iter()
                .all(|c| c.form != preserver::Form::Other),
        ),
    ]
}

fn euler_phi(n: u64) -> u64 {
    numtheory::euler_phi(n)
}

fn thm_a(f: &Field, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let q = f.q() as u64;
    let mut checks = Vec::new();
    let r2 = classify(f, 2, Mode::Preserver, opts)?;
    let mono = bijective_monomials(f);
    checks.push(Check::eq(
        "n=2 count formula",
        (q - 1) * euler_phi(q - 1),
        mono.len() as u64,
    ));
    checks.extend(classification_checks("n=2", &r2, &mono));
    let r3 = classify(f, 3, Mode::Preserver, opts)?;
    let auto = automorphism_multiples(f, false);
    checks.push(Check::eq(
        "n=3 count formula",
        (q - 1) * f.k() as u64,
        auto.len() as u64,
    ));
    checks.extend(classification_checks("n=3", &r3, &auto));
    Ok(checks)
}

fn thm_b(f: &Field, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let expected = automorphism_multiples(f, true);
    let mut checks = vec![Check::eq(
        "count formula",
        f.k() as u64 * (f.q() as u64 - 1) / 2,
        expected.len() as u64,
    )];
    for n in [2, 3] {
        let r = classify(f, n, Mode::Preserver, opts)?;
        checks.extend(classification_checks(&format!("n={n}"), &r, &expected));
    }
    Ok(checks)
}

fn thm_c(f: &Field, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let expected = automorphism_multiples(f, true);
    let mut checks = Vec::new();
    let dims: &[usize] = if f.k().is_multiple_of(2) {
        &[2, 3]
    } else {
        &[3]
    };
    for &n in dims {
        let r = classify(f, n, Mode::Preserver, opts)?;
        checks.extend(classification_checks(&format!("n={n}"), &r, &expected));
    }
    Ok(checks)
}

fn thm_d(f: &Field, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let expected = if f.is_odd() {
        automorphism_multiples(f, true)
    } else {
        bijective_monomials(f)
    };
    let r = classify(f, 2, Mode::SignPreserver, opts)?;
    Ok(classification_checks("sign n=2", &r, &expected))
}

fn open_case(f: &Field, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let floor = automorphism_multiples(f, true);
    let pruned = classify(f, 2, Mode::Preserver, opts)?;
    let observed = codes(&pruned);
    let mut checks = vec![
        Check::holds("pruned search exhaustive", pruned.exhaustive),
        Check::superset(
            "contains the positive automorphism multiples",
            &floor,
            &observed,
        ),
        Check::record("preservers", &observed),
        Check::record(
            "every preserver injective on F_q^+",
            pruned.preservers.iter().all(|c| {
                let imgs: BTreeSet<Elem> = f.positives().iter().map(|&x| c.table.eval(x)).collect();
                imgs.len() == f.positives().len()
            }),
        ),
    ];
    let total = (f.q() as u128).pow(f.q());
    if total <= ffpos_core::limits::candidate_limit() && f.q() <= 7 {
        let options = ClassifyOptions {
            prune: false,
            jobs: opts.jobs,
            timeout: None,
        };
        let full = preserver::classify(f, 2, Mode::Preserver, &options)?;
        checks.push(Check::holds(
            "unpruned enumeration exhaustive",
            full.exhaustive,
        ));
        checks.push(Check::eq(
            "tables enumerated",
            total as u64,
            full.pruning_profile.completed,
        ));
        checks.push(Check::eq("unpruned equals pruned", observed, codes(&full)));
    }
    Ok(checks)
}

fn dim1count(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    use num_bigint::BigUint;
    let closed = preserver::count_dim1_preservers(f);
    // each positive x has |F_q^+| admissible images, every other x has q
    let pos = f.positives().len() as u32;
    let product = BigUint::from(pos).pow(pos) * BigUint::from(f.q()).pow(f.q() - pos);
    let mut checks = vec![Check::eq(
        "closed form",
        product.to_string(),
        closed.to_string(),
    )];
    if f.q() <= 5 {
        let brute = preserver::brute_force_dim1_count(f)?;
        checks.push(Check::eq(
            "brute force",
            closed.to_string(),
            brute.to_string(),
        ));
    }
    Ok(checks)
}

fn srg(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let q = f.q() as usize;
    let s = paley::paley_srg_params(f)?;
    Ok(vec![Check::eq(
        "(v, k, lambda, mu)",
        (q, (q - 1) / 2, (q - 5) / 4, (q - 1) / 4),
        (s.v, s.k, s.lambda, s.mu),
    )])
}

fn ekr(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let r = f.square_root_order().expect("admissible") as usize;
    let g = paley::paley_graph(f)?;
    let cliques = paley::max_cliques(f, &g)?;
    let translates = paley::square_translates(f)?;
    let sub = f.subfield_elements(r as u32)?;
    let sizes: BTreeSet<usize> = cliques.iter().map(Vec::len).collect();
    let through_01: Vec<&Vec<Elem>> = cliques
        .iter()
        .filter(|c| c.contains(&Elem::ZERO) && c.contains(&Elem::ONE))
        .collect();
    let as_codes = |v: &[Vec<Elem>]| -> TableSet {
        v.iter()
            .map(|c| c.iter().map(|e| e.code()).collect())
            .collect()
    };
    Ok(vec![
        Check::eq("clique number", BTreeSet::from([r]), sizes),
        Check::eq(
            "maximum cliques are the square translates",
            as_codes(&translates),
            as_codes(&cliques),
        ),
        Check::eq(
            "maximum cliques through 0 and 1 are F_r",
            vec![sub.iter().map(|e| e.code()).collect::<Vec<_>>()],
            through_01
                .iter()
                .map(|c| c.iter().map(|e| e.code()).collect())
                .collect(),
        ),
    ])
}

fn hoffman(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let r = f.square_root_order().expect("admissible") as usize;
    let g = paley::paley_graph(f)?;
    let fam = paley::square_cosets(f)?;
    let mut pos_counts = BTreeSet::new();
    let mut neg_counts = BTreeSet::new();
    for c in &fam.cosets {
        for u in f.nonzero().filter(|u| !c.contains(u)) {
            let k = paley::neighborhood_counts(&g, u, c);
            if f.is_positive(u) {
                pos_counts.insert(k);
            } else {
                neg_counts.insert(k);
            }
        }
    }
    Ok(vec![
        Check::eq("square cosets", r.div_ceil(2), fam.cosets.len()),
        Check::eq("positive u", BTreeSet::from([(r - 3) / 2]), pos_counts),
        Check::eq("negative u", BTreeSet::from([(r - 1) / 2]), neg_counts),
    ])
}

fn translate(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let values: BTreeSet<u64> = f
        .nonzero()
        .map(|a| paley::translate_intersection(f, a))
        .collect();
    Ok(vec![Check::eq(
        "values over a != 0",
        BTreeSet::from([(f.q() as u64 - 3) / 4]),
        values,
    )])
}

/// Exact value sets of the triple count for the small orders.
fn small_triple_values(q: u32) -> Option<BTreeSet<u64>> {
    let v: &[u64] = match q {
        3 | 5 => &[0],
        7 | 9 | 11 => &[0, 1],
        13 | 17 => &[0, 1, 2],
        19 | 23 => &[1, 2, 3],
        25 => &[0, 2, 3, 4],
        _ => return None,
    };
    Some(v.iter().copied().collect())
}

fn triples(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let values = paley::triple_count_values(f)?;
    let q = f.q() as u64;
    if let Some(expected) = small_triple_values(f.q()) {
        return Ok(vec![Check::eq("values", expected, values)]);
    }
    let mut checks = vec![Check::record("values", &values)];
    if q >= 27 {
        let min = *values.first().expect("q >= 3");
        let max = *values.last().expect("q >= 3");
        checks.push(Check::holds("minimum > 0", min > 0));
        checks.push(Check::holds("4 · maximum < q - 5", 4 * max < q - 5));
    }
    Ok(checks)
}

fn weil(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let max = numtheory::weil_triple_scan(f)?;
    Ok(vec![Check::le(
        "max² against 4q",
        4 * f.q() as u64,
        max * max,
    )])
}

fn carlitz(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let solutions: TableSet = preserver::carlitz_solutions(f)?
        .iter()
        .map(FnTable::codes)
        .collect();
    let frobenius: TableSet = (0..f.k())
        .map(|l| FnTable::automorphism_multiple(f, Elem::ONE, l).codes())
        .collect();
    Ok(vec![Check::eq("solutions", frobenius, solutions)])
}

fn lucas(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    const MAX_A: usize = 300;
    let p = f.p() as u64;
    // Pascal's rule modulo p
    let mut row = vec![1u64];
    let mut mismatches = 0u64;
    let mut compared = 0u64;
    for a in 0..=MAX_A {
        if a > 0 {
            let mut next = vec![1u64; a + 1];
            for b in 1..a {
                next[b] = (row[b - 1] + row[b]) % p;
            }
            row = next;
        }
        for (b, &direct) in row.iter().enumerate() {
            compared += 1;
            if numtheory::lucas_binom(a as u64, b as u64, p) != direct {
                mismatches += 1;
            }
        }
    }
    Ok(vec![
        Check::eq(
            "pairs compared",
            ((MAX_A + 1) * (MAX_A + 2) / 2) as u64,
            compared,
        ),
        Check::eq("mismatches", 0, mismatches),
    ])
}

fn powers_of_p_mod(f: &Field) -> BTreeSet<u64> {
    let m = f.q() as u64 - 1;
    (0..f.k()).map(|i| (f.p() as u64).pow(i) % m).collect()
}

fn keylemma(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let m = f.q() as u64 - 1;
    let h = numtheory::key_polynomial(f, 1);
    let mut pointwise = BTreeSet::new();
    let mut polynomial = BTreeSet::new();
    let mut errors = Vec::new();
    for n in (1..m).filter(|&n| gcd(n, m) == 1) {
        match numtheory::key_lemma_test(f, n) {
            Ok(true) => {
                pointwise.insert(n);
            }
            Ok(false) => {}
            Err(e) => errors.push(e.to_string()),
        }
        if numtheory::key_polynomial(f, n) == h {
            polynomial.insert(n);
        }
    }
    let digits = powers_of_p_mod(f);
    Ok(vec![
        Check::eq("route errors", Vec::<String>::new(), errors),
        Check::eq("pointwise agreement", digits.clone(), pointwise),
        Check::eq("Lucas polynomial agreement", digits, polynomial),
    ])
}

fn monomial(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let m = f.q() as u64 - 1;
    let mut preserving = BTreeSet::new();
    let mut errors = Vec::new();
    for e in 1..=m {
        match preserver::monomial_preserver_test(f, e) {
            Ok(true) => {
                preserving.insert(e);
            }
            Ok(false) => {}
            Err(err) => errors.push(err.to_string()),
        }
    }
    let expected: BTreeSet<u64> = (0..f.k()).map(|i| (f.p() as u64).pow(i)).collect();
    Ok(vec![
        Check::eq("route disagreements", Vec::<String>::new(), errors),
        Check::eq("preserving exponents", expected, preserving),
    ])
}

fn cholesky_scan(f: &Field, n: usize) -> (u64, u64, u64) {
    // (pd without factor, factor without pd or wrong product, pd count)
    matpos::symmetric_iter(f, n)
        .par_bridge()
        .map(|a| {
            let pd = matpos::is_positive_definite(f, &a);
            match matpos::cholesky(f, &a) {
                Some(l) => {
                    let bad = !pd || l.gram(f) != a;
                    (0, bad as u64, pd as u64)
                }
                None => (pd as u64, 0, pd as u64),
            }
        })
        .reduce(|| (0, 0, 0), |x, y| (x.0 + y.0, x.1 + y.1, x.2 + y.2))
}

fn cholesky(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let complete = f.congruence() != Congruence::OneModFour;
    let max_n = if f.q() <= 11 { 3 } else { 2 };
    for n in 1..=max_n {
        let (missing, unsound, pd) = cholesky_scan(f, n);
        checks.push(Check::eq(
            format!("n={n} unsound factorizations"),
            0,
            unsound,
        ));
        if complete {
            checks.push(Check::eq(
                format!("n={n} positive definite without factorization"),
                0,
                missing,
            ));
        } else if n == 2 {
            let witness = matpos::pd_iter(f, 2).find(|a| matpos::cholesky(f, a).is_none());
            checks.push(Check::holds(
                "n=2 positive definite matrix without factorization",
                witness.is_some(),
            ));
            checks.push(Check::record(
                "n=2 first witness",
                witness.map(|a| a.to_json()),
            ));
            checks.push(Check::record(
                "n=2 positive definite without factorization",
                (missing, pd),
            ));
        }
    }
    Ok(checks)
}

/// Whether the form takes every value.
fn form_is_onto(f: &Field, a: &SymMatrix, scratch: &mut [bool]) -> bool {
    scratch.iter_mut().for_each(|s| *s = false);
    let n = a.n();
    let q = f.q() as u64;
    let mut hit = 0;
    let mut v = vec![Elem::ZERO; n];
    for idx in 0..q.pow(n as u32) {
        let mut t = idx;
        for slot in v.iter_mut().rev() {
            *slot = Elem((t % q) as u32);
            t /= q;
        }
        let val = matpos::quad_form(f, a, &v);
        if !std::mem::replace(&mut scratch[val.index()], true) {
            hit += 1;
            if hit == f.size() {
                return true;
            }
        }
    }
    false
}

fn quadrange(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in [2usize, 3] {
        let pd: Vec<SymMatrix> = matpos::pd_iter(f, n).collect();
        let failures: u64 = pd
            .par_iter()
            .map_init(
                || vec![false; f.size()],
                |s, a| (!form_is_onto(f, a, s)) as u64,
            )
            .sum();
        checks.push(Check::eq(
            format!("n={n} positive definite forms not onto"),
            0,
            failures,
        ));
    }
    let anisotropic: u64 = matpos::symmetric_iter(f, 3)
        .par_bridge()
        .map(|a| matpos::isotropic_vector(f, &a).is_none() as u64)
        .sum();
    checks.push(Check::eq(
        "n=3 forms without isotropic vector",
        0,
        anisotropic,
    ));
    Ok(checks)
}

fn automorphisms(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let g = paley::paley_graph(f)?;
    let gamma = paley::gamma_subgraph(f, &g)?;
    let found = paley::graph_automorphisms(&gamma.graph)?;
    let algebraic = paley::algebraic_gamma_maps(f, &gamma);
    let mut checks = vec![Check::record("group order", found.len())];
    if f.q() == 9 {
        checks.push(Check::flag(
            "automorphisms equal algebraic maps",
            algebraic,
            found,
        ));
    } else {
        checks.push(Check::eq(
            "automorphisms equal algebraic maps",
            algebraic,
            found,
        ));
    }
    Ok(checks)
}

fn galois_pairs(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let r = f.square_root_order().expect("admissible") as u64;
    let g = paley::paley_graph(f)?;
    let pairs = paley::same_subfield_neighborhood_pairs(f, &g)?;
    let conjugate = pairs.iter().all(|&(u, v)| f.pow_u(u, r) == v);
    Ok(vec![
        Check::holds("pairs exist", !pairs.is_empty()),
        Check::holds("every pair is Frobenius-conjugate", conjugate),
        Check::record("pair count", pairs.len()),
    ])
}

fn oval(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let r = f.square_root_order().expect("admissible") as usize;
    let g = paley::paley_graph(f)?;
    let o = paley::oval_set(f, &g)?;
    let (kind, size) = if r % 4 == 1 {
        (paley::OvalKind::Independent, r.div_ceil(2))
    } else {
        (paley::OvalKind::Clique, r.div_ceil(2) + 1)
    };
    Ok(vec![
        Check::eq("order of Δ", Some(r as u64 / 2 + 1), f.order(o.delta)),
        Check::eq("kind", kind, o.kind),
        Check::eq("size", size, o.elements.len()),
        Check::holds("maximal", o.maximal),
    ])
}

fn neighborhoods(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let q = f.q() as usize;
    let g = paley::paley_graph(f)?;
    let gamma = paley::gamma_subgraph(f, &g)?;
    let degrees: BTreeSet<usize> = (0..gamma.graph.n())
        .map(|v| gamma.graph.degree(v))
        .collect();
    let pos = f.positives();
    let neg = f.negatives();
    let pos_ok = pos.iter().all(|&a| {
        pos.iter()
            .filter(|&&b| b != a)
            .all(|&b| paley::positive_pair_witness(f, a, b).is_some())
    });
    let neg_ok = neg.iter().all(|&a| {
        neg.iter()
            .filter(|&&b| b != a)
            .all(|&b| paley::negative_pair_witness(f, a, b).is_some())
    });
    let mut checks = vec![
        Check::eq("Γ(q) degrees", BTreeSet::from([(q - 5) / 4]), degrees),
        Check::holds("witness for every positive pair", pos_ok),
        Check::holds("witness for every negative pair", neg_ok),
    ];
    if q >= 13 {
        checks.push(Check::holds(
            "N(0) ∩ N(a) distinct over a ∈ F_q^+",
            paley::zero_neighborhoods_distinct(f, &g),
        ));
    }
    Ok(checks)
}

/// Counts upper triangles `u` of size `n` with `det σ[u] != σ(det u)`.
fn frobenius_mismatches(f: &Field, sigma: &FnTable, n: usize) -> u64 {
    let len = matpos::upper_len(n);
    let q = f.q();
    (0..q)
        .into_par_iter()
        .map(|first| {
            let mut u = vec![Elem::ZERO; len];
            let mut image = vec![Elem::ZERO; len];
            u[0] = Elem(first);
            let mut bad = 0u64;
            loop {
                for (i, &x) in u.iter().enumerate() {
                    image[i] = sigma.eval(x);
                }
                let lhs = matpos::det_upper(f, n, &image);
                let rhs = sigma.eval(matpos::det_upper(f, n, &u));
                bad += (lhs != rhs) as u64;
                // odometer over the entries after the first
                let mut i = len;
                loop {
                    i -= 1;
                    if i == 0 {
                        return bad;
                    }
                    if u[i].0 + 1 < q {
                        u[i].0 += 1;
                        break;
                    }
                    u[i] = Elem::ZERO;
                }
            }
        })
        .sum()
}

fn frobenius(f: &Field, _: &SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for l in 1..f.k() {
        let sigma = FnTable::automorphism_multiple(f, Elem::ONE, l);
        for n in 1..=3usize {
            let mismatches = frobenius_mismatches(f, &sigma, n);
            checks.push(Check::eq(format!("l={l} n={n} mismatches"), 0, mismatches));
        }
    }
    if checks.is_empty() {
        checks.push(Check::record("only the identity automorphism", true));
    }
    Ok(checks)
}

fn sign_of_det(f: &Field, a: &SymMatrix) -> Sign {
    f.eta(matpos::determinant(f, &a.rows()))
}

fn minor_signs(f: &Field, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let r = classify(f, 3, Mode::Preserver, opts)?;
    let mut violations = 0u64;
    for c in &r.preservers {
        for n in 1..=3 {
            violations += matpos::symmetric_iter(f, n)
                .filter(|a| {
                    sign_of_det(f, &matpos::apply_entrywise(&c.table, a)) != sign_of_det(f, a)
                })
                .count() as u64;
        }
    }
    Ok(vec![
        Check::record("preservers", r.count),
        Check::eq("sign changes", 0, violations),
    ])
}

fn prune_audit(f: &Field, opts: &SuiteOptions) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let mut cases = vec![(2usize, Mode::Preserver), (2, Mode::SignPreserver)];
    if f.q() <= 5 {
        cases.push((3, Mode::Preserver));
    }
    for (n, mode) in cases {
        let pruned = classify(f, n, mode, opts)?;
        let full = preserver::classify(
            f,
            n,
            mode,
            &ClassifyOptions {
                prune: false,
                jobs: opts.jobs,
                timeout: None,
            },
        )?;
        checks.push(Check::eq(
            format!("{} n={n}", mode.id()),
            codes(&full),
            codes(&pruned),
        ));
    }
    Ok(checks)
}

/// Fails unless every suite id is unique.
pub fn validate_registry() -> Result<()> {
    let mut seen = BTreeSet::new();
    for s in REGISTRY {
        if !seen.insert(s.id) {
            bail!("duplicate suite id {}", s.id);
        }
    }
    Ok(())
}
