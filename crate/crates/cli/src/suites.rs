use crate::output::Report;
use anyhow::Result;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wickgraph::activation::Activation;
use wickgraph::graph::{CellInput, GraphBuilder, Mat, ProductGraph};
use wickgraph::montecarlo::{forward_net, jacobian_net, Law, NetworkSpec};
use wickgraph::trees::{eval_tree_expansion, jacobian_expansion, LeafMode};
use wickgraph::wick::{isserlis_oracle, wick_expectation, Mode, DEFAULT_CAP};

const WICK_TOL: f64 = 1e-9;
const TREE_TOL: f64 = 1e-8;

fn rel_tol(expected: f64, rel: f64) -> f64 {
    rel * expected.abs() + 1e-12
}

/// Random product graph on all-ones, basis, constant and vector vertices with
/// up to `max_random` random edges over at most three labels.
pub fn random_wick_graph(seed: u64, max_v: usize, max_dim: usize, max_random: usize, complex: bool) -> ProductGraph<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = rng.random_range(1..=max_v);
    let dims: Vec<usize> = (0..nv).map(|_| rng.random_range(1..=max_dim)).collect();
    let mut b = GraphBuilder::new();
    for &d in &dims {
        let input = match rng.random_range(0..4) {
            0 => CellInput::Ones,
            1 => CellInput::Basis(rng.random_range(1..=d)),
            2 => CellInput::Const(rng.random_range(0.5..1.5)),
            _ => CellInput::Vector((0..d).map(|_| rng.random_range(-1.0..1.0)).collect()),
        };
        b.vertex(d, input);
    }
    let mut budget = max_random;
    for label in 1..=rng.random_range(1..=3) {
        if budget < 2 {
            break;
        }
        let pairs = rng.random_range(1..=budget / 2);
        budget -= 2 * pairs;
        let (dh, dt) = (dims[rng.random_range(0..nv)], dims[rng.random_range(0..nv)]);
        let heads: Vec<usize> = (0..nv).filter(|&v| dims[v] == dh).collect();
        let tails: Vec<usize> = (0..nv).filter(|&v| dims[v] == dt).collect();
        let sigma = rng.random_range(0.5..1.5);
        for j in 0..2 * pairs {
            let h = heads[rng.random_range(0..heads.len())];
            let t = tails[rng.random_range(0..tails.len())];
            let l = if complex && j % 2 == 1 { -label } else { label };
            b.edge(h, t, CellInput::Random { label: l, sigma });
        }
    }
    for _ in 0..rng.random_range(0..=2) {
        let (h, t) = (rng.random_range(0..nv), rng.random_range(0..nv));
        let input = if dims[h] == dims[t] && rng.random_bool(0.3) {
            CellInput::Identity
        } else {
            CellInput::Matrix(Mat::from_fn(dims[h], dims[t], |_, _| rng.random_range(-1.0..1.0)))
        };
        b.edge(h, t, input);
    }
    b.build().expect("consistent shapes")
}

pub fn wick_check(r: &mut Report, name: &str, g: &ProductGraph<f64>, complex: bool) -> Result<()> {
    let mode = if complex { Mode::Complex } else { Mode::Real };
    let w = wick_expectation(g, mode)?;
    let o = isserlis_oracle(g, complex, DEFAULT_CAP)?;
    let detail = format!("{} random edges, {}", g.random_edges().len(), if complex { "complex" } else { "real" });
    r.check(name, w, o, rel_tol(o, WICK_TOL), detail);
    Ok(())
}

fn trace_wwt(n: usize, p: usize, sigma: f64) -> ProductGraph<f64> {
    let mut b = GraphBuilder::new();
    let vs: Vec<usize> = (0..2 * p).map(|_| b.vertex(n, CellInput::Ones)).collect();
    for j in 0..2 * p {
        let (u, v) = (vs[j], vs[(j + 1) % (2 * p)]);
        let (h, t) = if j % 2 == 1 { (v, u) } else { (u, v) };
        b.edge(h, t, CellInput::Random { label: 1, sigma });
    }
    b.build().expect("cycle")
}

pub fn trace_moment_checks(r: &mut Report) -> Result<()> {
    let s: f64 = 0.7;
    for n in [2usize, 3] {
        let nf = n as f64;
        let a = wick_expectation(&trace_wwt(n, 1, s), Mode::Real)?;
        let e = s * s * nf * nf;
        r.check(format!("trace_wwt_n{n}"), a, e, rel_tol(e, WICK_TOL), "sigma^2 N^2");
        let b = wick_expectation(&trace_wwt(n, 2, s), Mode::Real)?;
        let e = s.powi(4) * (2.0 * nf.powi(3) + nf * nf);
        r.check(format!("trace_wwt2_n{n}"), b, e, rel_tol(e, WICK_TOL), "sigma^4 (2N^3 + N^2)");
    }
    Ok(())
}

fn to_mat(m: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Tree expansion against the forward pass and, at depth at most two, the
/// Jacobian expansion against the chain rule.
pub fn tree_checks(r: &mut Report, i: usize, seed: u64, max_depth: usize, max_width: usize, max_degree: usize) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
    let l = 1 + i % max_depth;
    let widths: Vec<usize> = (0..=l + 1).map(|_| rng.random_range(1..=max_width)).collect();
    let w: Vec<DMatrix<f64>> =
        widths.windows(2).map(|p| DMatrix::from_fn(p[1], p[0], |_, _| rng.random_range(-0.8..0.8))).collect();
    let acts: Vec<Activation> = (0..l)
        .map(|_| {
            let d = rng.random_range(1..=max_degree);
            let c: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.0..1.0)).collect();
            Activation::poly(&c)
        })
        .collect();
    let x: Vec<f64> = (0..widths[0]).map(|_| rng.random_range(-1.0..1.0)).collect();
    let spec = NetworkSpec {
        widths: widths.clone(),
        activations: acts.clone(),
        sigmas: vec![1.0; l + 1],
        rates: vec![1.0; l + 1],
        law: Law::gaussian(),
    };
    let out = forward_net(&spec, &w, &x)?.output().clone();
    let wm: Vec<Mat<f64>> = w.iter().map(to_mat).collect();
    let mode = if l >= 3 { LeafMode::X } else { LeafMode::Basis };
    for k in 1..=widths[l + 1] {
        let e = eval_tree_expansion(l, k, &x, &wm, &acts, mode)?;
        r.check(format!("expansion_{i}_{k}"), e, out[k - 1], rel_tol(out[k - 1], TREE_TOL), format!("L={l}"));
    }
    if l <= 2 {
        let je = jacobian_expansion(l, &x, &wm[..l], &acts)?;
        let jn = jacobian_net(&spec, &w, &x)?;
        let gap = (&je - &jn).amax();
        let scale = jn.amax();
        r.check_flag(format!("jacobian_{i}"), gap <= rel_tol(scale, TREE_TOL), gap, 0.0, rel_tol(scale, TREE_TOL), format!("L={l}, max entry gap"));
    }
    Ok(())
}
