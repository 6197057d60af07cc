#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wickgraph::graph::{CellInput, GraphBuilder, Mat, ProductGraph};

/// Cycle graph of a trace word. Letter `(label, transposed)` sits between
/// consecutive vertices; all vertices are all-ones of dimension `n`.
pub fn trace_word(n: usize, letters: &[(i32, bool)], sigma: f64) -> ProductGraph<f64> {
    let k = letters.len();
    let mut b = GraphBuilder::new();
    let vs: Vec<usize> = (0..k).map(|_| b.vertex(n, CellInput::Ones)).collect();
    for (j, &(label, t)) in letters.iter().enumerate() {
        let (u, v) = (vs[j], vs[(j + 1) % k]);
        let (h, tl) = if t { (v, u) } else { (u, v) };
        b.edge(h, tl, CellInput::Random { label, sigma });
    }
    b.build().unwrap()
}

/// `Tr((W W^T)^p)`.
pub fn trace_wwt(n: usize, p: usize, sigma: f64) -> ProductGraph<f64> {
    let letters: Vec<(i32, bool)> = (0..2 * p).map(|j| (1, j % 2 == 1)).collect();
    trace_word(n, &letters, sigma)
}

fn det_vertex_input(rng: &mut ChaCha8Rng, dim: usize) -> CellInput<f64> {
    match rng.random_range(0..4) {
        0 => CellInput::Ones,
        1 => CellInput::Basis(rng.random_range(1..=dim)),
        2 => CellInput::Const(rng.random_range(0.5..1.5)),
        _ => CellInput::Vector((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()),
    }
}

/// Random graph with at most `max_v` vertices of dimension at most
/// `max_dim`, up to `max_random` random edges over at most three labels and
/// a few deterministic edges. Complex graphs pair label `l` with `-l`.
pub fn random_wick_graph(seed: u64, max_v: usize, max_dim: usize, max_random: usize, complex: bool) -> ProductGraph<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nv = rng.random_range(1..=max_v);
    let dims: Vec<usize> = (0..nv).map(|_| rng.random_range(1..=max_dim)).collect();
    let mut b = GraphBuilder::new();
    for &d in &dims {
        let inp = det_vertex_input(&mut rng, d);
        b.vertex(d, inp);
    }
    let n_labels = rng.random_range(1..=3);
    let mut budget = max_random;
    for label in 1..=n_labels {
        if budget < 2 {
            break;
        }
        let pairs = rng.random_range(1..=budget / 2);
        let mut count = 2 * pairs;
        if !complex && rng.random_bool(0.1) {
            count -= 1;
        }
        budget -= 2 * pairs;
        let (h0, t0) = (rng.random_range(0..nv), rng.random_range(0..nv));
        let (dh, dt) = (dims[h0], dims[t0]);
        let heads: Vec<usize> = (0..nv).filter(|&v| dims[v] == dh).collect();
        let tails: Vec<usize> = (0..nv).filter(|&v| dims[v] == dt).collect();
        let sigma = rng.random_range(0.5..1.5);
        for j in 0..count {
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
    b.build().unwrap()
}
