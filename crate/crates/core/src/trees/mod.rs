//! Non-plane rooted layered trees: the terms of the expansion of a network
//! output, its Jacobian and its tangent kernel.

mod graph;
mod literal;
mod symtuple;

pub use graph::{
    decorated_cycle, eval_tree_expansion, jacobian_expansion, jacobian_moment_via_cycles, tree_to_graph, trunk_decorations,
    LayerWeight, TreeGraphSpec,
};
pub use literal::{format_tree, parse_tree};
pub use symtuple::{multiset_power_expand, multisets, tuple_value, SymTuple};

use crate::activation::Activation;
use crate::error::{Error, Result};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LeafDecor {
    /// Standard basis vector `e_i`, 1-based.
    Basis(usize),
    /// The network input `x`.
    X,
    /// A free input leaf, left open by differentiation in `x`.
    Free,
}

/// Layered tree. A node of layer `l` has children of layer `l-1`; leaves
/// have layer 0. `freed` marks the edge above a subtree as a free cell.
/// Children are kept sorted so that structural equality is non-plane
/// equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tree {
    Leaf { decor: LeafDecor, freed: bool },
    Node { layer: usize, children: Vec<Tree>, freed: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMode {
    /// Root vertex is a free output.
    FreeOut,
    /// Root vertex fixed to `e_k`, 1-based.
    FixedBasis(usize),
    /// Root vertex and root edge removed; the top internal vertex is the output.
    Pruned,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeafMode {
    Basis,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivKind {
    /// Free one `x` leaf.
    X,
    /// Free one edge carrying `W_l`.
    Layer(usize),
}

impl Tree {
    pub fn leaf(decor: LeafDecor) -> Self {
        Tree::Leaf { decor, freed: false }
    }

    pub fn node(layer: usize, mut children: Vec<Tree>) -> Self {
        children.sort();
        Tree::Node { layer, children, freed: false }
    }

    pub fn layer(&self) -> usize {
        match self {
            Tree::Leaf { .. } => 0,
            Tree::Node { layer, .. } => *layer,
        }
    }

    pub fn children(&self) -> &[Tree] {
        match self {
            Tree::Leaf { .. } => &[],
            Tree::Node { children, .. } => children,
        }
    }

    pub fn is_freed(&self) -> bool {
        match self {
            Tree::Leaf { freed, .. } | Tree::Node { freed, .. } => *freed,
        }
    }

    fn with_freed(&self, f: bool) -> Tree {
        let mut t = self.clone();
        match &mut t {
            Tree::Leaf { freed, .. } | Tree::Node { freed, .. } => *freed = f,
        }
        t
    }

    /// Leaves in canonical order.
    pub fn leaves(&self) -> Vec<&LeafDecor> {
        match self {
            Tree::Leaf { decor, .. } => vec![decor],
            Tree::Node { children, .. } => children.iter().flat_map(|c| c.leaves()).collect(),
        }
    }

    pub fn count_free_leaves(&self) -> usize {
        self.leaves().iter().filter(|d| ***d == LeafDecor::Free).count()
    }

    /// Check layering and canonical order.
    pub fn is_canonical(&self) -> bool {
        match self {
            Tree::Leaf { .. } => true,
            Tree::Node { layer, children, .. } => {
                *layer >= 1
                    && children.windows(2).all(|w| w[0] <= w[1])
                    && children.iter().all(|c| c.layer() + 1 == *layer && c.is_canonical())
            }
        }
    }

    /// `s(τ) = Π k_i! s(τ_i)^{k_i}` over the distinct children `τ_i` with
    /// multiplicities `k_i`.
    pub fn symmetry_factor(&self) -> u128 {
        let children = self.children();
        let mut s: u128 = 1;
        let mut i = 0;
        while i < children.len() {
            let mut j = i;
            while j < children.len() && children[j] == children[i] {
                j += 1;
            }
            let k = (j - i) as u128;
            let sc = children[i].symmetry_factor();
            s *= (1..=k).product::<u128>() * sc.pow(k as u32);
            i = j;
        }
        s
    }

    /// `φ_τ`: product over internal nodes of `φ_l^{(M)}(0)` with `M` the
    /// number of children. `acts[l-1]` is the activation of layer `l`.
    pub fn phi_coeff(&self, acts: &[Activation]) -> Result<f64> {
        match self {
            Tree::Leaf { .. } => Ok(1.0),
            Tree::Node { layer, children, .. } => {
                let act = acts.get(layer - 1).ok_or(Error::NoSuchLayer(*layer))?;
                let mut p = act.deriv_at_zero(children.len())?;
                for c in children {
                    if p == 0.0 {
                        break;
                    }
                    p *= c.phi_coeff(acts)?;
                }
                Ok(p)
            }
        }
    }

    /// Like [`Tree::phi_coeff`] but with `φ^{(M+1)}(0)` at the root, the
    /// coefficient of a tree from which one child has been removed.
    pub fn dot_phi(&self, acts: &[Activation]) -> Result<f64> {
        match self {
            Tree::Leaf { .. } => Ok(1.0),
            Tree::Node { layer, children, .. } => {
                let act = acts.get(layer - 1).ok_or(Error::NoSuchLayer(*layer))?;
                let mut p = act.deriv_at_zero(children.len() + 1)?;
                for c in children {
                    p *= c.phi_coeff(acts)?;
                }
                Ok(p)
            }
        }
    }

    /// Product of the coordinates of `x` picked by the basis leaves.
    pub fn x_weight(&self, x: &[f64]) -> Result<f64> {
        let mut p = 1.0;
        for d in self.leaves() {
            match d {
                LeafDecor::Basis(i) => {
                    p *= *x.get(i - 1).ok_or_else(|| Error::LeafModeMismatch(format!("no coordinate {i}")))?
                }
                other => return Err(Error::LeafModeMismatch(format!("{other:?} leaf in a basis-mode tree"))),
            }
        }
        Ok(p)
    }
}

/// Default bound on the size of any enumerated tree space.
pub const TREE_CAP: usize = 2_000_000;

/// Trees of layer `L` with nonzero `φ_τ`. Nodes of layer `l` get every
/// multiset of `M` children with `φ_l^{(M)}(0) != 0`.
pub fn enumerate_trees(l: usize, n_symbols: usize, acts: &[Activation], mode: LeafMode) -> Result<Vec<Tree>> {
    enumerate_trees_capped(l, n_symbols, acts, mode, TREE_CAP)
}

pub fn enumerate_trees_capped(
    l: usize,
    n_symbols: usize,
    acts: &[Activation],
    mode: LeafMode,
    cap: usize,
) -> Result<Vec<Tree>> {
    let mut level: Vec<Tree> = match mode {
        LeafMode::Basis => (1..=n_symbols).map(|i| Tree::leaf(LeafDecor::Basis(i))).collect(),
        LeafMode::X => vec![Tree::leaf(LeafDecor::X)],
    };
    for layer in 1..=l {
        let act = acts.get(layer - 1).ok_or(Error::NoSuchLayer(layer))?;
        let degree = act.degree()?;
        let mut next = Vec::new();
        for m in 0..=degree {
            if act.deriv_at_zero(m)? == 0.0 {
                continue;
            }
            let count = multiset_count(level.len(), m);
            if next.len().saturating_add(count) > cap {
                return Err(Error::CapExceeded(format!("layer {layer} has more than {cap} trees")));
            }
            for idx in multisets(level.len(), m) {
                next.push(Tree::node(layer, idx.iter().map(|&i| level[i].clone()).collect()));
            }
        }
        next.sort();
        level = next;
    }
    Ok(level)
}

fn multiset_count(n: usize, m: usize) -> usize {
    // C(n+m-1, m)
    let mut c: usize = 1;
    for i in 0..m {
        c = c.saturating_mul(n + i) / (i + 1);
    }
    if n == 0 && m > 0 {
        0
    } else {
        c
    }
}

fn variants(t: &Tree, kind: DerivKind) -> Vec<Tree> {
    let mut out = Vec::new();
    match (t, kind) {
        (Tree::Leaf { decor: LeafDecor::X, freed }, DerivKind::X) => {
            out.push(Tree::Leaf { decor: LeafDecor::Free, freed: *freed });
        }
        (Tree::Leaf { .. }, DerivKind::Layer(0)) => out.push(t.with_freed(true)),
        (Tree::Leaf { .. }, _) => {}
        (Tree::Node { layer, children, freed }, _) => {
            if kind == DerivKind::Layer(*layer) {
                out.push(t.with_freed(true));
            }
            for i in 0..children.len() {
                if i > 0 && children[i] == children[i - 1] {
                    continue;
                }
                for v in variants(&children[i], kind) {
                    let mut c = children.clone();
                    c[i] = v;
                    c.sort();
                    out.push(Tree::Node { layer: *layer, children: c, freed: *freed });
                }
            }
        }
    }
    out
}

/// Trees with exactly one `x` leaf freed, or one `W_l` edge freed,
/// deduplicated as non-plane trees.
pub fn derivative_trees(base: &[Tree], kind: DerivKind) -> Result<Vec<Tree>> {
    if let DerivKind::Layer(l) = kind {
        if let Some(t) = base.iter().find(|t| t.layer() < l) {
            return Err(Error::NoSuchLayer(l.max(t.layer())));
        }
    }
    let mut set = BTreeSet::new();
    for t in base {
        set.extend(variants(t, kind));
    }
    Ok(set.into_iter().collect())
}

/// Split a tree with one free leaf along the path from the free leaf to the
/// root: the l-th entry is the layer-l trunk node without its trunk child.
pub fn trunk_decompose(eta: &Tree) -> Result<Vec<Tree>> {
    if eta.count_free_leaves() != 1 {
        return Err(Error::PatternMismatch("trunk decomposition needs exactly one free leaf".into()));
    }
    let mut out = Vec::new();
    let mut cur = eta;
    while let Tree::Node { layer, children, .. } = cur {
        let k = children.iter().position(|c| c.count_free_leaves() == 1).expect("free leaf below");
        let mut rest = children.clone();
        rest.remove(k);
        out.push(Tree::node(*layer, rest));
        cur = &children[k];
    }
    out.reverse();
    Ok(out)
}

/// Inverse of [`trunk_decompose`].
pub fn trunk_compose(zetas: &[Tree]) -> Result<Tree> {
    let mut cur = Tree::leaf(LeafDecor::Free);
    for (i, z) in zetas.iter().enumerate() {
        let layer = i + 1;
        match z {
            Tree::Node { layer: zl, children, .. } if *zl == layer && z.count_free_leaves() == 0 => {
                let mut c = children.clone();
                c.push(cur);
                cur = Tree::node(layer, c);
            }
            _ => {
                return Err(Error::PatternMismatch(format!(
                    "trunk position {layer} needs a layer-{layer} node without free leaves"
                )))
            }
        }
    }
    Ok(cur)
}
