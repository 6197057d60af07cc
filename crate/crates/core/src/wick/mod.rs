//! Admissible pairings of random edges, quotient graphs and Gaussian
//! expectations of random product graphs.

mod genus;
mod isserlis;

pub use genus::{
    centered_product_expectation, fluctuation_stats, lambda_g, leading_order, Fluctuation, LeadingOrder,
};
pub use isserlis::{double_factorial, isserlis_oracle, isserlis_oracle_with, EntryLaw, DEFAULT_CAP};

use crate::error::{Error, Result};
use crate::graph::{CellInput, Dsu, ProductGraph, Strategy};
use crate::scalar::Scalar;
use serde::Serialize;
use std::collections::BTreeMap;

/// Pairing rule: equal labels (real) or opposite labels (complex).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Real,
    Complex,
}

/// Perfect matching of the random edges of a graph; each pair is `(e, e')`
/// with `e < e'`, sorted by first element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pairing {
    pub pairs: Vec<(usize, usize)>,
    pub mode: Mode,
}

#[derive(Debug, Clone)]
pub struct QuotientGraph<T = f64> {
    pub graph: ProductGraph<T>,
    /// Original vertex id to quotient vertex id.
    pub vertex_classes: Vec<usize>,
    /// Original edge id to quotient edge id.
    pub edge_classes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClassKind {
    FullyAtomic,
    BiAtomic,
    AtomFree,
    Other,
}

impl ClassKind {
    pub fn tag(self) -> &'static str {
        match self {
            ClassKind::FullyAtomic => "A",
            ClassKind::BiAtomic => "B",
            ClassKind::AtomFree => "AF",
            ClassKind::Other => "other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingClass {
    pub kind: ClassKind,
    /// Bi-atomic pairings are also atom-free.
    pub atom_free: bool,
    /// Per original component: whether its image in the quotient is a tree.
    pub component_tree: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphStats {
    pub c: usize,
    pub e_check: f64,
    pub sigma_g: f64,
    pub n_random: usize,
    pub label_multiset: BTreeMap<i32, usize>,
}

fn label_of<T: Scalar>(g: &ProductGraph<T>, e: usize) -> (i32, f64) {
    match g.edges()[e].input {
        CellInput::Random { label, sigma } => (label, sigma),
        _ => unreachable!("not a random edge"),
    }
}

fn matchings(items: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let first = items[0];
    let mut out = Vec::new();
    for k in 1..items.len() {
        let rest: Vec<usize> = items[1..].iter().enumerate().filter(|&(j, _)| j + 1 != k).map(|(_, &x)| x).collect();
        for mut m in matchings(&rest) {
            m.insert(0, (first, items[k]));
            out.push(m);
        }
    }
    out
}

fn bijections(pos: &[usize], neg: &[usize]) -> Vec<Vec<(usize, usize)>> {
    if pos.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for k in 0..neg.len() {
        let rest: Vec<usize> = neg.iter().enumerate().filter(|&(j, _)| j != k).map(|(_, &x)| x).collect();
        for mut m in bijections(&pos[1..], &rest) {
            m.insert(0, (pos[0], neg[k]));
            out.push(m);
        }
    }
    out
}

/// All admissible pairings in a deterministic order. Empty when some label
/// class cannot be matched.
pub fn admissible_pairings<T: Scalar>(g: &ProductGraph<T>, mode: Mode) -> Vec<Pairing> {
    let mut classes: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
    for e in g.random_edges() {
        classes.entry(label_of(g, e).0).or_default().push(e);
    }
    let mut per_class: Vec<Vec<Vec<(usize, usize)>>> = Vec::new();
    match mode {
        Mode::Real => {
            for edges in classes.values() {
                if edges.len() % 2 == 1 {
                    return Vec::new();
                }
                per_class.push(matchings(edges));
            }
        }
        Mode::Complex => {
            for (&l, pos) in classes.range(1..) {
                let neg = classes.get(&-l).map_or(&[][..], |v| v.as_slice());
                if neg.len() != pos.len() {
                    return Vec::new();
                }
                per_class.push(bijections(pos, neg));
            }
            if classes.range(..0).any(|(l, _)| !classes.contains_key(&-l)) {
                return Vec::new();
            }
        }
    }
    let mut out: Vec<Vec<(usize, usize)>> = vec![vec![]];
    for options in &per_class {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for prefix in &out {
            for o in options {
                let mut p = prefix.clone();
                p.extend(o.iter().copied());
                next.push(p);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|mut pairs| {
            for p in pairs.iter_mut() {
                if p.0 > p.1 {
                    *p = (p.1, p.0);
                }
            }
            pairs.sort_unstable();
            Pairing { pairs, mode }
        })
        .collect()
}

fn check_admissible<T: Scalar>(g: &ProductGraph<T>, phi: &Pairing) -> Result<()> {
    let random = g.random_edges();
    let mut seen = vec![false; g.edges().len()];
    for &(a, b) in &phi.pairs {
        for e in [a, b] {
            if e >= seen.len() || !random.contains(&e) {
                return Err(Error::NotAdmissible(format!("edge {e} is not random")));
            }
            if std::mem::replace(&mut seen[e], true) {
                return Err(Error::NotAdmissible(format!("edge {e} paired twice")));
            }
        }
        let (la, lb) = (label_of(g, a).0, label_of(g, b).0);
        let ok = match phi.mode {
            Mode::Real => la == lb,
            Mode::Complex => la == -lb,
        };
        if !ok {
            return Err(Error::NotAdmissible(format!("labels {la} and {lb} cannot be paired")));
        }
    }
    if let Some(&e) = random.iter().find(|&&e| !seen[e]) {
        return Err(Error::NotAdmissible(format!("edge {e} is unpaired")));
    }
    Ok(())
}

/// Merge paired edges head-to-head and tail-to-tail. Each merged edge is
/// fixed to `σ_e σ_e'` times the all-ones matrix.
pub fn quotient<T: Scalar>(g: &ProductGraph<T>, phi: &Pairing) -> Result<QuotientGraph<T>> {
    check_admissible(g, phi)?;
    let mut h = g.clone();
    let mut dsu = Dsu::new(g.vertices().len());
    let mut drop = Vec::new();
    let mut partner = vec![usize::MAX; g.edges().len()];
    for &(a, b) in &phi.pairs {
        let (ea, eb) = (&g.edges()[a], &g.edges()[b]);
        dsu.union(ea.head, eb.head);
        dsu.union(ea.tail, eb.tail);
        let w = label_of(g, a).1 * label_of(g, b).1;
        h = h.with_input(crate::graph::Cell::Edge(a), CellInput::Const(T::from(w)))?;
        drop.push(b);
        partner[b] = a;
    }
    let (graph, vertex_classes, emap) = h.merge(&mut dsu, &drop)?;
    let edge_classes = (0..g.edges().len())
        .map(|e| emap[e].or_else(|| emap[partner[e]]).expect("edge class"))
        .collect();
    Ok(QuotientGraph { graph, vertex_classes, edge_classes })
}

pub fn stats<T: Scalar>(g: &ProductGraph<T>) -> GraphStats {
    let random = g.random_edges();
    let mut label_multiset = BTreeMap::new();
    let mut sigma_g = 1.0;
    for &e in &random {
        let (l, s) = label_of(g, e);
        *label_multiset.entry(l).or_insert(0) += 1;
        sigma_g *= s;
    }
    let deterministic = g.edges().len() - random.len();
    GraphStats {
        c: g.components().1,
        e_check: random.len() as f64 / 2.0 + deterministic as f64,
        sigma_g,
        n_random: random.len(),
        label_multiset,
    }
}

/// Component-wise classification of a pairing; a component of the quotient
/// is a tree when it has one edge fewer than vertices (loops and parallel
/// edges are cycles).
pub fn classify<T: Scalar>(g: &ProductGraph<T>, phi: &Pairing) -> Result<PairingClass> {
    let q = quotient(g, phi)?;
    let (orig_comp, n_orig) = g.components();
    let (q_comp, n_q) = q.graph.components();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_q];
    let mut image = vec![usize::MAX; n_orig];
    for (v, &c) in orig_comp.iter().enumerate() {
        if image[c] == usize::MAX {
            let qc = q_comp[q.vertex_classes[v]];
            image[c] = qc;
            members[qc].push(c);
        }
    }
    let mut nv = vec![0usize; n_q];
    let mut ne = vec![0usize; n_q];
    for &c in &q_comp {
        nv[c] += 1;
    }
    for e in q.graph.edges() {
        ne[q_comp[e.head]] += 1;
    }
    let tree: Vec<bool> = (0..n_q).map(|c| ne[c] + 1 == nv[c]).collect();
    let fully = (0..n_q).all(|c| members[c].len() == 1 && tree[c]);
    let bi = (0..n_q).all(|c| members[c].len() == 2 && tree[c]);
    let atom_free = !(0..n_q).any(|c| members[c].len() == 1 && tree[c]);
    let kind = if fully {
        ClassKind::FullyAtomic
    } else if bi {
        ClassKind::BiAtomic
    } else if atom_free {
        ClassKind::AtomFree
    } else {
        ClassKind::Other
    };
    Ok(PairingClass { kind, atom_free, component_tree: image.iter().map(|&qc| tree[qc]).collect() })
}

/// Number of index classes of a quotient: its vertices joined along
/// deterministic identity edges.
pub fn index_classes<T: Scalar>(q: &ProductGraph<T>) -> usize {
    let mut dsu = Dsu::new(q.vertices().len());
    for e in q.edges() {
        if e.input == CellInput::Identity {
            dsu.union(e.head, e.tail);
        }
    }
    dsu.classes().1
}

/// Exact Gaussian expectation: the sum of quotient values over all
/// admissible pairings.
pub fn wick_expectation<T: Scalar>(g: &ProductGraph<T>, mode: Mode) -> Result<T> {
    let mut total = T::zero();
    for phi in admissible_pairings(g, mode) {
        total += quotient(g, &phi)?.graph.value(Strategy::Greedy)?;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairingReport {
    pub pairing: Vec<[usize; 2]>,
    pub class: &'static str,
    pub exponent: usize,
    pub value: f64,
}

pub fn pairing_reports(g: &ProductGraph<f64>, mode: Mode) -> Result<Vec<PairingReport>> {
    admissible_pairings(g, mode)
        .iter()
        .map(|phi| {
            let q = quotient(g, phi)?;
            Ok(PairingReport {
                pairing: phi.pairs.iter().map(|&(a, b)| [a, b]).collect(),
                class: classify(g, phi)?.kind.tag(),
                exponent: index_classes(&q.graph),
                value: q.graph.value(Strategy::Greedy)?,
            })
        })
        .collect()
}
