use super::{derivative_trees, enumerate_trees, multisets, trunk_compose, DerivKind, LeafDecor, LeafMode, RootMode, Tree};
use crate::activation::Activation;
use crate::error::{Error, Result};
use crate::graph::{CellInput, GraphBuilder, Mat, OperatorGraph, ProductGraph, Strategy};
use crate::wick::{wick_expectation, Mode};
use nalgebra::DMatrix;

/// What to put on the edges of layer `l`.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerWeight {
    Matrix(Mat<f64>),
    Random { label: i32, sigma: f64 },
}

/// Widths `N_0..` and per-layer weights used to realize trees as graphs.
/// `W_l` has shape `N_{l+1} x N_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeGraphSpec {
    pub widths: Vec<usize>,
    pub weights: Vec<LayerWeight>,
    pub x: Option<Vec<f64>>,
}

impl TreeGraphSpec {
    pub fn concrete(weights: &[Mat<f64>], x: Option<&[f64]>) -> Self {
        let mut widths = vec![weights.first().map_or(0, |w| w.cols)];
        widths.extend(weights.iter().map(|w| w.rows));
        TreeGraphSpec {
            widths,
            weights: weights.iter().cloned().map(LayerWeight::Matrix).collect(),
            x: x.map(<[f64]>::to_vec),
        }
    }

    /// Random weights with label `l + 1` on layer `l`.
    pub fn random(widths: Vec<usize>, sigmas: &[f64], x: Option<&[f64]>) -> Self {
        TreeGraphSpec {
            widths,
            weights: sigmas
                .iter()
                .enumerate()
                .map(|(l, &sigma)| LayerWeight::Random { label: l as i32 + 1, sigma })
                .collect(),
            x: x.map(<[f64]>::to_vec),
        }
    }

    fn width(&self, layer: usize) -> Result<usize> {
        self.widths.get(layer).copied().ok_or_else(|| Error::ShapeMismatch(format!("no width for layer {layer}")))
    }

    fn edge_input(&self, layer: usize) -> Result<CellInput<f64>> {
        match self.weights.get(layer) {
            Some(LayerWeight::Matrix(m)) => Ok(CellInput::Matrix(m.clone())),
            Some(&LayerWeight::Random { label, sigma }) => Ok(CellInput::Random { label, sigma }),
            None => Err(Error::ShapeMismatch(format!("no weight for layer {layer}"))),
        }
    }
}

fn attach(b: &mut GraphBuilder<f64>, t: &Tree, parent: usize, spec: &TreeGraphSpec) -> Result<()> {
    let layer = t.layer();
    let input = match t {
        Tree::Leaf { decor: LeafDecor::Basis(i), .. } => CellInput::Basis(*i),
        Tree::Leaf { decor: LeafDecor::X, .. } => CellInput::Vector(
            spec.x.clone().ok_or_else(|| Error::LeafModeMismatch("x leaf without an input vector".into()))?,
        ),
        Tree::Leaf { decor: LeafDecor::Free, .. } => CellInput::FreeIn,
        Tree::Node { .. } => CellInput::Ones,
    };
    let v = b.vertex(spec.width(layer)?, input);
    let edge = if t.is_freed() { CellInput::FreeIn } else { spec.edge_input(layer)? };
    b.edge(parent, v, edge);
    for c in t.children() {
        attach(b, c, v, spec)?;
    }
    Ok(())
}

/// Realize a tree as a graph: internal vertices are all-ones, each subtree
/// hangs from its parent by an edge carrying its layer's weight.
pub fn tree_to_graph(t: &Tree, spec: &TreeGraphSpec, root: RootMode) -> Result<ProductGraph<f64>> {
    let mut b = GraphBuilder::new();
    match root {
        RootMode::FreeOut | RootMode::FixedBasis(_) => {
            let input = match root {
                RootMode::FixedBasis(k) => CellInput::Basis(k),
                _ => CellInput::FreeOut,
            };
            let r = b.vertex(spec.width(t.layer() + 1)?, input);
            attach(&mut b, t, r, spec)?;
        }
        RootMode::Pruned => {
            let Tree::Node { layer, children, .. } = t else {
                return Err(Error::PatternMismatch("a leaf has no root edge to prune".into()));
            };
            let r = b.vertex(spec.width(*layer)?, CellInput::FreeOut);
            for c in children {
                attach(&mut b, c, r, spec)?;
            }
        }
    }
    b.build()
}

fn coefficient(t: &Tree, acts: &[Activation]) -> Result<f64> {
    Ok(t.phi_coeff(acts)? / t.symmetry_factor() as f64)
}

/// `[Φ_L(x)]_k` from the tree expansion. `weights` holds `W_0..W_L`.
/// Basis mode sums over trees with basis leaves weighted by `x_τ`; x mode
/// puts `x` on every leaf.
pub fn eval_tree_expansion(
    l: usize,
    k: usize,
    x: &[f64],
    weights: &[Mat<f64>],
    acts: &[Activation],
    mode: LeafMode,
) -> Result<f64> {
    if weights.len() < l + 1 {
        return Err(Error::ShapeMismatch(format!("need {} weight matrices, got {}", l + 1, weights.len())));
    }
    let n0 = weights[0].cols;
    if x.len() != n0 {
        return Err(Error::ShapeMismatch(format!("input of length {} for width {n0}", x.len())));
    }
    let spec = TreeGraphSpec::concrete(&weights[..=l], Some(x));
    let trees = enumerate_trees(l, n0, acts, mode)?;
    let mut total = 0.0;
    for t in &trees {
        let c = coefficient(t, acts)?;
        let w = match mode {
            LeafMode::Basis => t.x_weight(x)?,
            LeafMode::X => 1.0,
        };
        if c == 0.0 || w == 0.0 {
            continue;
        }
        total += c * w * tree_to_graph(t, &spec, RootMode::FixedBasis(k))?.value(Strategy::Greedy)?;
    }
    Ok(total)
}

/// Jacobian of `φ_L ∘ Φ_{L-1}` at `x` assembled from pruned trees with one
/// free leaf. `weights` holds `W_0..W_{L-1}`.
pub fn jacobian_expansion(l: usize, x: &[f64], weights: &[Mat<f64>], acts: &[Activation]) -> Result<DMatrix<f64>> {
    if l == 0 || weights.len() < l {
        return Err(Error::ShapeMismatch(format!("depth {l} needs {l} weight matrices")));
    }
    let spec = TreeGraphSpec::concrete(&weights[..l], Some(x));
    let base = enumerate_trees(l, 1, acts, LeafMode::X)?;
    let mut total = DMatrix::zeros(spec.widths[l], spec.widths[0]);
    for eta in derivative_trees(&base, DerivKind::X)? {
        let c = coefficient(&eta, acts)?;
        if c == 0.0 {
            continue;
        }
        let op = OperatorGraph::new(tree_to_graph(&eta, &spec, RootMode::Pruned)?);
        total += op.operator_matrix()? * c;
    }
    Ok(total)
}

/// Pruned layer-`l` trees with nonzero `dot_phi`: the decorations hung on a
/// Jacobian trunk at layer `l`.
pub fn trunk_decorations(l: usize, acts: &[Activation]) -> Result<Vec<Tree>> {
    let act = acts.get(l - 1).ok_or(Error::NoSuchLayer(l))?;
    let below = enumerate_trees(l - 1, 1, acts, LeafMode::X)?;
    let mut out = Vec::new();
    for m in 0..act.degree()? {
        if act.deriv_at_zero(m + 1)? == 0.0 {
            continue;
        }
        for idx in multisets(below.len(), m) {
            out.push(Tree::node(l, idx.iter().map(|&i| below[i].clone()).collect()));
        }
    }
    Ok(out)
}

/// `Tr(η_1 ∘ η_2^T ∘ η_3 ∘ ... ∘ η_{2k}^T)` where `η_i` is the Jacobian tree
/// whose trunk carries `zetas[(i-1)L .. iL]`.
pub fn decorated_cycle(k: usize, l: usize, zetas: &[Tree], spec: &TreeGraphSpec) -> Result<ProductGraph<f64>> {
    if k == 0 || l == 0 || zetas.len() != 2 * k * l {
        return Err(Error::PatternMismatch(format!(
            "expected {} trunk trees for k={k}, L={l}, got {}",
            2 * k * l,
            zetas.len()
        )));
    }
    let mut acc: Option<OperatorGraph<f64>> = None;
    for (i, chunk) in zetas.chunks(l).enumerate() {
        let eta = trunk_compose(chunk)?;
        let mut op = OperatorGraph::new(tree_to_graph(&eta, spec, RootMode::Pruned)?);
        if i % 2 == 1 {
            op = op.transpose()?;
        }
        acc = Some(match acc {
            None => op,
            Some(a) => {
                let (c2, c1) = (a.ins()[0], op.outs()[0]);
                OperatorGraph::compose(&a, &op, c2, c1)?
            }
        });
    }
    acc.expect("at least one tree").trace_graph()
}

/// Exact `E (1/N) Tr((J J^T)^k)` for Gaussian weights of standard deviation
/// `sigma` and all widths `n`, summed over decorated cycles.
pub fn jacobian_moment_via_cycles(
    k: usize,
    l: usize,
    x: &[f64],
    acts: &[Activation],
    sigma: f64,
    cap: usize,
) -> Result<f64> {
    let n = x.len();
    let spec = TreeGraphSpec::random(vec![n; l + 1], &vec![sigma; l], Some(x));
    let per_layer: Vec<Vec<(Tree, f64)>> = (1..=l)
        .map(|layer| {
            trunk_decorations(layer, acts)?
                .into_iter()
                .map(|z| {
                    let c = z.dot_phi(acts)? / z.symmetry_factor() as f64;
                    Ok((z, c))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let slots = 2 * k * l;
    let sizes: Vec<usize> = (0..slots).map(|s| per_layer[s % l].len()).collect();
    let total_tuples = sizes.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s)).unwrap_or(usize::MAX);
    if total_tuples > cap {
        return Err(Error::CapExceeded(format!("{total_tuples} decorated cycles")));
    }
    let mut idx = vec![0usize; slots];
    let mut total = 0.0;
    for _ in 0..total_tuples {
        let mut c = 1.0;
        let mut zetas = Vec::with_capacity(slots);
        for (s, &i) in idx.iter().enumerate() {
            let (z, cz) = &per_layer[s % l][i];
            c *= cz;
            zetas.push(z.clone());
        }
        if c != 0.0 {
            let g = decorated_cycle(k, l, &zetas, &spec)?;
            total += c * wick_expectation(&g, Mode::Real)?;
        }
        for s in (0..slots).rev() {
            idx[s] += 1;
            if idx[s] < sizes[s] {
                break;
            }
            idx[s] = 0;
        }
    }
    Ok(total / n as f64)
}
