//! Paley graphs, the graph `Γ(q)` on `F_q^+`, and the clique and coset combinatorics of
//! square orders.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Congruence, Elem, Field};

/// Largest vertex count for the automorphism backtracking.
pub const AUTOMORPHISM_MAX_VERTICES: usize = 16;
/// Largest field order for maximum-clique enumeration.
pub const CLIQUE_MAX_Q: u32 = 49;

/// A fixed-size set of vertex indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> BitSet {
        BitSet {
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> BitSet {
        let mut s = BitSet::new(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    pub fn intersection_len(&self, other: &BitSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + t)
            })
        })
    }
}

/// A simple graph on `0..n`, possibly directed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    out: Vec<BitSet>,
}

impl Graph {
    pub fn from_fn(n: usize, directed: bool, adjacent: impl Fn(usize, usize) -> bool) -> Graph {
        let out = (0..n)
            .map(|u| {
                let mut s = BitSet::new(n);
                for v in (0..n).filter(|&v| v != u && adjacent(u, v)) {
                    s.insert(v);
                }
                s
            })
            .collect();
        Graph { n, directed, out }
    }

    pub fn complete(n: usize) -> Graph {
        Graph::from_fn(n, false, |_, _| true)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn directed(&self) -> bool {
        self.directed
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u].contains(v)
    }

    pub fn neighbors(&self, u: usize) -> &BitSet {
        &self.out[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.out[u].len()
    }

    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        self.out[u].intersection_len(&self.out[v])
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|u| self.out[u].iter().all(|v| self.has_edge(v, u)))
    }

    pub fn induced(&self, vertices: &[usize]) -> Graph {
        Graph::from_fn(vertices.len(), self.directed, |i, j| {
            self.has_edge(vertices[i], vertices[j])
        })
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for u in 0..self.n {
            for v in self.out[u].iter() {
                if self.directed || u < v {
                    e.push((u, v));
                }
            }
        }
        e
    }
}

/// `P(q)`: `a → b` whenever `a - b ∈ F_q^+`; vertex `i` is the element with code `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PaleyGraph {
    pub q: u32,
    pub graph: Graph,
}

impl PaleyGraph {
    pub fn directed(&self) -> bool {
        self.graph.directed()
    }

    pub fn adjacent(&self, a: Elem, b: Elem) -> bool {
        self.graph.has_edge(a.index(), b.index())
    }

    /// Out-neighbourhood as element codes, ascending.
    pub fn neighborhood(&self, a: Elem) -> Vec<Elem> {
        self.graph
            .neighbors(a.index())
            .iter()
            .map(|i| Elem(i as u32))
            .collect()
    }
}

pub fn paley_graph(field: &Field) -> Result<PaleyGraph> {
    if !field.is_odd() {
        return Err(Error::EvenCharacteristic);
    }
    let directed = field.congruence() == Congruence::ThreeModFour;
    let graph = Graph::from_fn(field.size(), directed, |a, b| {
        field.is_positive(field.sub(Elem(a as u32), Elem(b as u32)))
    });
    Ok(PaleyGraph {
        q: field.q(),
        graph,
    })
}

fn require_one_mod_four(field: &Field) -> Result<()> {
    if field.congruence() != Congruence::OneModFour {
        return Err(Error::NotApplicable(format!(
            "q = {} is not ≡ 1 (mod 4)",
            field.q()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SrgParams {
    pub v: usize,
    pub k: usize,
    pub lambda: usize,
    pub mu: usize,
}

/// Strongly regular parameters measured over every vertex and pair of the graph.
pub fn srg_params(graph: &Graph) -> Result<SrgParams> {
    if graph.directed() || !graph.is_symmetric() {
        return Err(Error::NotStronglyRegular("graph is directed".into()));
    }
    let n = graph.n();
    if n < 2 {
        return Err(Error::NotStronglyRegular("fewer than two vertices".into()));
    }
    let k = graph.degree(0);
    if let Some(u) = (0..n).find(|&u| graph.degree(u) != k) {
        return Err(Error::NotStronglyRegular(format!(
            "vertex {u} has degree {}",
            graph.degree(u)
        )));
    }
    let mut lambda = None;
    let mut mu = None;
    for u in 0..n {
        for v in u + 1..n {
            let c = graph.common_neighbors(u, v);
            let slot = if graph.has_edge(u, v) {
                &mut lambda
            } else {
                &mut mu
            };
            match *slot {
                None => *slot = Some(c),
                Some(prev) if prev != c => {
                    return Err(Error::NotStronglyRegular(format!(
                        "pair ({u}, {v}) has {c} common neighbours, expected {prev}"
                    )))
                }
                _ => {}
            }
        }
    }
    Ok(SrgParams {
        v: n,
        k,
        lambda: lambda.unwrap_or(0),
        mu: mu.unwrap_or(0),
    })
}

/// `srg_params` of `P(q)`, for `q ≡ 1 (mod 4)`.
pub fn paley_srg_params(field: &Field) -> Result<SrgParams> {
    require_one_mod_four(field)?;
    srg_params(&paley_graph(field)?.graph)
}

/// `Γ(q)`: the subgraph of `P(q)` induced on `F_q^+`. Vertex `i` is `positives()[i]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaGraph {
    pub vertices: Vec<Elem>,
    pub graph: Graph,
}

pub fn gamma_subgraph(field: &Field, paley: &PaleyGraph) -> Result<GammaGraph> {
    require_one_mod_four(field)?;
    let vertices = field.positives().to_vec();
    let idx: Vec<usize> = vertices.iter().map(|v| v.index()).collect();
    Ok(GammaGraph {
        vertices,
        graph: paley.graph.induced(&idx),
    })
}

/// Every automorphism, as `perm[v] = image of v`, in lexicographic order.
pub fn graph_automorphisms(graph: &Graph) -> Result<Vec<Vec<usize>>> {
    let n = graph.n();
    if n > AUTOMORPHISM_MAX_VERTICES {
        return Err(Error::SizeExceeded {
            size: n as u128,
            limit: AUTOMORPHISM_MAX_VERTICES as u128,
        });
    }
    // refinement signature: degree plus the sorted common-neighbour counts
    let signature: Vec<(usize, Vec<usize>, Vec<usize>)> = (0..n)
        .map(|u| {
            let mut adj = Vec::new();
            let mut non = Vec::new();
            for v in (0..n).filter(|&v| v != u) {
                let c = graph.common_neighbors(u, v);
                if graph.has_edge(u, v) {
                    adj.push(c);
                } else {
                    non.push(c);
                }
            }
            adj.sort_unstable();
            non.sort_unstable();
            (graph.degree(u), adj, non)
        })
        .collect();
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut out = Vec::new();
    automorphism_dfs(graph, &signature, 0, &mut perm, &mut used, &mut out);
    Ok(out)
}

fn automorphism_dfs<S: PartialEq>(
    graph: &Graph,
    signature: &[S],
    u: usize,
    perm: &mut [usize],
    used: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    let n = graph.n();
    if u == n {
        out.push(perm.to_vec());
        return;
    }
    for img in 0..n {
        if used[img] || signature[img] != signature[u] {
            continue;
        }
        let consistent = (0..u).all(|w| {
            graph.has_edge(u, w) == graph.has_edge(img, perm[w])
                && graph.has_edge(w, u) == graph.has_edge(perm[w], img)
        });
        if consistent {
            perm[u] = img;
            used[img] = true;
            automorphism_dfs(graph, signature, u + 1, perm, used, out);
            used[img] = false;
            perm[u] = usize::MAX;
        }
    }
}

/// The maps `x ↦ a x^{±p^l}` restricted to `F_q^+`, as permutations of the vertices of `Γ(q)`,
/// deduplicated and sorted.
pub fn algebraic_gamma_maps(field: &Field, gamma: &GammaGraph) -> Vec<Vec<usize>> {
    let pos_of = |x: Elem| gamma.vertices.binary_search(&x).expect("image is positive");
    let m = field.q() as u64 - 1;
    let mut maps = BTreeSet::new();
    for &a in &gamma.vertices {
        for l in 0..field.k() {
            let e = (field.p() as u64).pow(l);
            for exp in [e, m - e % m] {
                let perm: Vec<usize> = gamma
                    .vertices
                    .iter()
                    .map(|&x| pos_of(field.mul(a, field.pow_u(x, exp))))
                    .collect();
                maps.insert(perm);
            }
        }
    }
    maps.into_iter().collect()
}

/// `|N(u) ∩ target|` in `P(q)`.
pub fn neighborhood_counts(paley: &PaleyGraph, u: Elem, target: &[Elem]) -> usize {
    target.iter().filter(|&&v| paley.adjacent(u, v)).count()
}

/// The multiplicative cosets `g^{2i} F_r^*`, `i = 0..=(r-1)/2`, of the subfield in `F_{r^2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetFamily {
    pub r: u32,
    pub cosets: Vec<Vec<Elem>>,
}

fn square_order(field: &Field) -> Result<u32> {
    match field.square_root_order() {
        Some(r) if field.is_odd() => Ok(r),
        _ => Err(Error::NotSquareOrder(field.q())),
    }
}

pub fn square_cosets(field: &Field) -> Result<CosetFamily> {
    let r = square_order(field)?;
    let sub_star: Vec<Elem> = field
        .subfield_elements(r)?
        .into_iter()
        .filter(|x| !x.is_zero())
        .collect();
    let cosets = (0..=(r as u64 - 1) / 2)
        .map(|i| {
            let rep = field.gen_pow(2 * i);
            let mut c: Vec<Elem> = sub_star.iter().map(|&x| field.mul(rep, x)).collect();
            c.sort_unstable();
            c
        })
        .collect();
    Ok(CosetFamily { r, cosets })
}

/// Every maximum clique of `P(q)`, `q = r^2 <= 49`, each sorted, in lexicographic order.
pub fn max_cliques(field: &Field, paley: &PaleyGraph) -> Result<Vec<Vec<Elem>>> {
    square_order(field)?;
    if field.q() > CLIQUE_MAX_Q {
        return Err(Error::SizeExceeded {
            size: field.q() as u128,
            limit: CLIQUE_MAX_Q as u128,
        });
    }
    let g = &paley.graph;
    let n = g.n();
    // Split on the lowest vertex of the clique; branches are independent and merged in order.
    let per_root: Vec<(usize, Vec<Vec<usize>>)> = (0..n)
        .into_par_iter()
        .map(|v| {
            let mut p = g.neighbors(v).clone();
            for w in 0..=v {
                p.remove(w);
            }
            let mut best = 0;
            let mut found = Vec::new();
            bron_kerbosch(g, &mut vec![v], p, BitSet::new(n), &mut best, &mut found);
            (best, found)
        })
        .collect();
    let best = per_root.iter().map(|(b, _)| *b).max().unwrap_or(0);
    let mut cliques: Vec<Vec<Elem>> = per_root
        .into_iter()
        .filter(|(b, _)| *b == best)
        .flat_map(|(_, cs)| cs)
        .map(|c| c.into_iter().map(|i| Elem(i as u32)).collect())
        .collect();
    cliques.sort();
    Ok(cliques)
}

/// Maximal cliques extending `r` within `p`, keeping only those of the largest size seen.
fn bron_kerbosch(
    g: &Graph,
    r: &mut Vec<usize>,
    p: BitSet,
    mut x: BitSet,
    best: &mut usize,
    found: &mut Vec<Vec<usize>>,
) {
    if r.len() + p.len() < *best {
        return;
    }
    if p.is_empty() {
        if x.is_empty() {
            if r.len() > *best {
                *best = r.len();
                found.clear();
            }
            let mut c = r.clone();
            c.sort_unstable();
            found.push(c);
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .max_by_key(|&u| (p.intersection_len(g.neighbors(u)), std::cmp::Reverse(u)))
        .expect("p is non-empty");
    let mut p = p;
    let candidates: Vec<usize> = p.iter().filter(|&v| !g.has_edge(pivot, v)).collect();
    for v in candidates {
        r.push(v);
        bron_kerbosch(
            g,
            r,
            p.intersection(g.neighbors(v)),
            x.intersection(g.neighbors(v)),
            best,
            found,
        );
        r.pop();
        p.remove(v);
        x.insert(v);
    }
}

/// The sets `α F_r + β` with `α ∈ F_q^+`, each sorted, deduplicated, in lexicographic order.
pub fn square_translates(field: &Field) -> Result<Vec<Vec<Elem>>> {
    let r = square_order(field)?;
    let sub = field.subfield_elements(r)?;
    let mut out = BTreeSet::new();
    for &alpha in field.positives() {
        for beta in field.elements() {
            let mut s: Vec<Elem> = sub
                .iter()
                .map(|&x| field.add(field.mul(alpha, x), beta))
                .collect();
            s.sort_unstable();
            out.insert(s);
        }
    }
    Ok(out.into_iter().collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OvalKind {
    Independent,
    Clique,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Oval {
    pub delta: Elem,
    pub elements: Vec<Elem>,
    pub kind: OvalKind,
    /// No vertex outside the set can be added while keeping the kind.
    pub maximal: bool,
}

/// `{1, Δ, ..., Δ^{(r-1)/2}}` with `Δ = g^{2(r-1)}`, plus `0` when `r ≡ 3 (mod 4)`.
pub fn oval_set(field: &Field, paley: &PaleyGraph) -> Result<Oval> {
    let r = square_order(field)?;
    let delta = field.gen_pow(2 * (r as u64 - 1));
    let mut elements: Vec<Elem> = (0..=(r as u64 - 1) / 2)
        .map(|i| field.pow_u(delta, i))
        .collect();
    let kind = if r % 4 == 1 {
        OvalKind::Independent
    } else {
        elements.push(Elem::ZERO);
        OvalKind::Clique
    };
    elements.sort_unstable();
    elements.dedup();
    let fits = |v: Elem, set: &[Elem]| {
        set.iter().all(|&u| match kind {
            OvalKind::Independent => !paley.adjacent(u, v),
            OvalKind::Clique => paley.adjacent(u, v),
        })
    };
    let valid = elements
        .iter()
        .enumerate()
        .all(|(i, &v)| fits(v, &elements[..i]));
    let maximal = valid
        && field
            .elements()
            .all(|v| elements.contains(&v) || !fits(v, &elements));
    Ok(Oval {
        delta,
        elements,
        kind,
        maximal,
    })
}

/// `#{x : η(x-a) = η(x-b) = η(x-c) = 1}`.
pub fn triple_count(field: &Field, a: Elem, b: Elem, c: Elem) -> u64 {
    field
        .elements()
        .filter(|&x| {
            field.is_positive(field.sub(x, a))
                && field.is_positive(field.sub(x, b))
                && field.is_positive(field.sub(x, c))
        })
        .count() as u64
}

/// The set of values of [`triple_count`] over all distinct triples.
pub fn triple_count_values(field: &Field) -> Result<BTreeSet<u64>> {
    if !field.is_odd() {
        return Err(Error::EvenCharacteristic);
    }
    let q = field.q();
    // the count is invariant under translation, so a = 0 suffices
    let sets: Vec<BTreeSet<u64>> = (1..q)
        .into_par_iter()
        .map(|b| {
            (b + 1..q)
                .map(|c| triple_count(field, Elem::ZERO, Elem(b), Elem(c)))
                .collect()
        })
        .collect();
    Ok(sets.into_iter().flatten().collect())
}

/// `|F_q^+ ∩ (a + F_q^+)|`.
pub fn translate_intersection(field: &Field, a: Elem) -> u64 {
    field
        .positives()
        .iter()
        .filter(|&&y| field.is_positive(field.sub(y, a)))
        .count() as u64
}

/// Pairs `u < v` outside `F_r` whose neighbourhoods inside `F_r` coincide, `q = r^2`,
/// `r ≡ 1 (mod 4)`.
pub fn same_subfield_neighborhood_pairs(
    field: &Field,
    paley: &PaleyGraph,
) -> Result<Vec<(Elem, Elem)>> {
    let r = square_order(field)?;
    if r % 4 != 1 {
        return Err(Error::NotApplicable(format!("r = {r} is not ≡ 1 (mod 4)")));
    }
    let sub = field.subfield_elements(r)?;
    let outside: Vec<Elem> = field.elements().filter(|x| !sub.contains(x)).collect();
    let hood = |u: Elem| -> Vec<Elem> {
        sub.iter()
            .copied()
            .filter(|&x| paley.adjacent(u, x))
            .collect()
    };
    let hoods: Vec<Vec<Elem>> = outside.iter().map(|&u| hood(u)).collect();
    let mut pairs = Vec::new();
    for i in 0..outside.len() {
        for j in i + 1..outside.len() {
            if hoods[i] == hoods[j] {
                pairs.push((outside[i], outside[j]));
            }
        }
    }
    Ok(pairs)
}

/// For distinct `a, b ∈ F_q^+`, the first `c ∈ F_q^-` with `a - c ∈ F_q^+`, `b - c ∈ F_q^-`.
pub fn positive_pair_witness(field: &Field, a: Elem, b: Elem) -> Option<Elem> {
    field.nonzero().find(|&c| {
        field.is_negative(c)
            && field.is_positive(field.sub(a, c))
            && field.is_negative(field.sub(b, c))
    })
}

/// For distinct `a, b ∈ F_q^-`, the first `c ∈ F_q^+` with `a - c ∈ F_q^-`, `b - c ∈ F_q^+`.
pub fn negative_pair_witness(field: &Field, a: Elem, b: Elem) -> Option<Elem> {
    field.nonzero().find(|&c| {
        field.is_positive(c)
            && field.is_negative(field.sub(a, c))
            && field.is_positive(field.sub(b, c))
    })
}

/// Whether `N(0) ∩ N(a)` differs for every pair of distinct `a, b ∈ F_q^+`.
pub fn zero_neighborhoods_distinct(field: &Field, paley: &PaleyGraph) -> bool {
    let zero = paley.graph.neighbors(0);
    let sets: BTreeSet<Vec<usize>> = field
        .positives()
        .iter()
        .map(|a| {
            zero.intersection(paley.graph.neighbors(a.index()))
                .iter()
                .collect()
        })
        .collect();
    sets.len() == field.positives().len()
}

/// Graphviz rendering of `P(q)`.
pub fn to_dot(paley: &PaleyGraph) -> String {
    let (kw, arrow) = if paley.directed() {
        ("digraph", "->")
    } else {
        ("graph", "--")
    };
    let mut s = format!("{kw} P{} {{\n", paley.q);
    for v in 0..paley.graph.n() {
        s.push_str(&format!("  {v};\n"));
    }
    for (u, v) in paley.graph.edges() {
        s.push_str(&format!("  {u} {arrow} {v};\n"));
    }
    s.push_str("}\n");
    s
}
