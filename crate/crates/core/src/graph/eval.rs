use super::{Cell, CellInput, ProductGraph};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// How to evaluate the index sum of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Enumerate every indexation.
    Naive,
    /// Eliminate vertices one at a time, smallest produced tensor first.
    Greedy,
}

/// Dense tensor over a sorted list of vertex variables.
#[derive(Debug, Clone)]
struct Factor<T> {
    vars: Vec<usize>,
    dims: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> Factor<T> {
    fn stride_for(&self, var: usize) -> usize {
        match self.vars.iter().position(|&v| v == var) {
            None => 0,
            Some(p) => self.dims[p + 1..].iter().product(),
        }
    }
}

/// Product of `factors` over the union of their variables, with `sum_out`
/// summed away when given.
fn combine<T: Scalar>(factors: &[Factor<T>], dim_of: &dyn Fn(usize) -> usize, sum_out: Option<usize>) -> Factor<T> {
    let mut union: Vec<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
    union.sort_unstable();
    union.dedup();
    let dims: Vec<usize> = union.iter().map(|&v| dim_of(v)).collect();
    let strides: Vec<Vec<usize>> = factors.iter().map(|f| union.iter().map(|&v| f.stride_for(v)).collect()).collect();

    let keep: Vec<usize> = union.iter().copied().filter(|&v| Some(v) != sum_out).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&v| dim_of(v)).collect();
    let out_strides: Vec<usize> = union
        .iter()
        .map(|&v| match keep.iter().position(|&k| k == v) {
            None => 0,
            Some(p) => keep_dims[p + 1..].iter().product(),
        })
        .collect();
    let mut out = vec![T::zero(); keep_dims.iter().product()];

    let total: usize = dims.iter().product();
    let mut idx = vec![0usize; union.len()];
    let mut offs = vec![0usize; factors.len()];
    let mut out_off = 0usize;
    for _ in 0..total {
        let mut p = T::one();
        for (f, &o) in factors.iter().zip(&offs) {
            p *= f.data[o];
        }
        out[out_off] += p;
        // odometer step, last variable fastest
        for a in (0..union.len()).rev() {
            idx[a] += 1;
            for (o, s) in offs.iter_mut().zip(&strides) {
                *o += s[a];
            }
            out_off += out_strides[a];
            if idx[a] < dims[a] {
                break;
            }
            for (o, s) in offs.iter_mut().zip(&strides) {
                *o -= s[a] * dims[a];
            }
            out_off -= out_strides[a] * dims[a];
            idx[a] = 0;
        }
    }
    Factor { vars: keep, dims: keep_dims, data: out }
}

impl<T: Scalar> ProductGraph<T> {
    /// Value of a product graph.
    pub fn value(&self, strategy: Strategy) -> Result<T> {
        if !self.free_cells().is_empty() {
            return Err(Error::FreeCellPresent);
        }
        match strategy {
            Strategy::Naive => self.value_naive(),
            Strategy::Greedy => Ok(self.contract_open(&[])?.0[0]),
        }
    }

    fn value_naive(&self) -> Result<T> {
        if !self.random_edges().is_empty() {
            return Err(Error::RandomCellPresent);
        }
        let n = self.vertices.len();
        let dims: Vec<usize> = self.vertices.iter().map(|v| v.dim).collect();
        let mut idx = vec![0usize; n];
        let mut total = T::zero();
        loop {
            let mut p = T::one();
            for (v, vert) in self.vertices.iter().enumerate() {
                p *= vertex_entry(&vert.input, idx[v]);
            }
            for e in &self.edges {
                p *= edge_entry(&e.input, idx[e.head], idx[e.tail]);
            }
            total += p;
            let mut a = 0;
            while a < n {
                idx[a] += 1;
                if idx[a] < dims[a] {
                    break;
                }
                idx[a] = 0;
                a += 1;
            }
            if a == n {
                return Ok(total);
            }
        }
    }

    /// Contract everything except the indices of the `open` cells, which must
    /// be exactly the free cells of the graph. The result is laid out
    /// row-major over the cells in order, each cell contributing `[i]` or
    /// `[i_head, i_tail]`.
    pub(crate) fn contract_open(&self, open: &[Cell]) -> Result<(Vec<T>, Vec<usize>)> {
        let free = self.free_cells();
        if free.len() != open.len() || free.iter().any(|c| !open.contains(c)) {
            return Err(Error::FreeCellPresent);
        }
        if !self.random_edges().is_empty() {
            return Err(Error::RandomCellPresent);
        }
        let dim_of = |v: usize| self.vertices[v].dim;
        let mut scalar = T::one();
        let mut factors: Vec<Factor<T>> = Vec::new();
        for (v, vert) in self.vertices.iter().enumerate() {
            match &vert.input {
                CellInput::Ones | CellInput::FreeIn | CellInput::FreeOut => {}
                CellInput::Const(c) => scalar *= *c,
                input => factors.push(Factor {
                    vars: vec![v],
                    dims: vec![vert.dim],
                    data: (0..vert.dim).map(|i| vertex_entry(input, i)).collect(),
                }),
            }
        }
        for e in &self.edges {
            let (h, t) = (e.head, e.tail);
            match &e.input {
                CellInput::Ones | CellInput::FreeIn | CellInput::FreeOut => {}
                CellInput::Const(c) => scalar *= *c,
                CellInput::Identity if h == t => {}
                input if h == t => factors.push(Factor {
                    vars: vec![h],
                    dims: vec![dim_of(h)],
                    data: (0..dim_of(h)).map(|i| edge_entry(input, i, i)).collect(),
                }),
                input => {
                    let (a, b) = if h < t { (h, t) } else { (t, h) };
                    let mut data = Vec::with_capacity(dim_of(a) * dim_of(b));
                    for i in 0..dim_of(a) {
                        for j in 0..dim_of(b) {
                            data.push(if h < t { edge_entry(input, i, j) } else { edge_entry(input, j, i) });
                        }
                    }
                    factors.push(Factor { vars: vec![a, b], dims: vec![dim_of(a), dim_of(b)], data });
                }
            }
        }

        let mut keep: Vec<usize> = Vec::new();
        for &c in open {
            match c {
                Cell::Vertex(v) => keep.push(v),
                Cell::Edge(e) => {
                    keep.push(self.edges[e].head);
                    keep.push(self.edges[e].tail);
                }
            }
        }
        let mut present = vec![false; self.vertices.len()];
        for f in &factors {
            for &v in &f.vars {
                present[v] = true;
            }
        }
        for v in 0..self.vertices.len() {
            if !present[v] && !keep.contains(&v) {
                scalar *= T::from(dim_of(v) as f64);
            }
        }

        loop {
            let mut best: Option<(usize, usize, usize)> = None;
            for v in 0..self.vertices.len() {
                if keep.contains(&v) || !present[v] {
                    continue;
                }
                let mut union: Vec<usize> = factors
                    .iter()
                    .filter(|f| f.vars.contains(&v))
                    .flat_map(|f| f.vars.iter().copied())
                    .collect();
                union.sort_unstable();
                union.dedup();
                let full: usize = union.iter().map(|&u| dim_of(u)).product();
                let produced = full / dim_of(v);
                if best.is_none_or(|(p, f, _)| (produced, full) < (p, f)) {
                    best = Some((produced, full, v));
                }
            }
            let Some((_, _, v)) = best else { break };
            let (using, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.vars.contains(&v));
            factors = rest;
            let merged = combine(&using, &dim_of, Some(v));
            present[v] = false;
            if merged.vars.is_empty() {
                scalar *= merged.data[0];
            } else {
                factors.push(merged);
            }
        }

        let result = if factors.is_empty() {
            Factor { vars: vec![], dims: vec![], data: vec![T::one()] }
        } else {
            combine(&factors, &dim_of, None)
        };

        // gather into the requested layout
        let mut slot_vars = Vec::new();
        for &c in open {
            match c {
                Cell::Vertex(v) => slot_vars.push(v),
                Cell::Edge(e) => {
                    slot_vars.push(self.edges[e].head);
                    slot_vars.push(self.edges[e].tail);
                }
            }
        }
        let shape: Vec<usize> = slot_vars.iter().map(|&v| dim_of(v)).collect();
        let total: usize = shape.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; shape.len()];
        let mut assign = vec![usize::MAX; self.vertices.len()];
        for _ in 0..total {
            for &v in &slot_vars {
                assign[v] = usize::MAX;
            }
            let mut consistent = true;
            for (s, &v) in slot_vars.iter().enumerate() {
                if assign[v] == usize::MAX {
                    assign[v] = idx[s];
                } else if assign[v] != idx[s] {
                    consistent = false;
                }
            }
            if consistent {
                let mut off = 0;
                for (p, &v) in result.vars.iter().enumerate() {
                    off = off * result.dims[p] + assign[v];
                }
                out.push(scalar * result.data[off]);
            } else {
                out.push(T::zero());
            }
            for a in (0..shape.len()).rev() {
                idx[a] += 1;
                if idx[a] < shape[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok((out, shape))
    }
}

pub(crate) fn vertex_entry<T: Scalar>(input: &CellInput<T>, i: usize) -> T {
    match input {
        CellInput::Vector(x) => x[i],
        CellInput::Const(c) => *c,
        CellInput::Basis(k) => {
            if i + 1 == *k {
                T::one()
            } else {
                T::zero()
            }
        }
        _ => T::one(),
    }
}

pub(crate) fn edge_entry<T: Scalar>(input: &CellInput<T>, i: usize, j: usize) -> T {
    match input {
        CellInput::Matrix(m) => m.get(i, j),
        CellInput::Const(c) => *c,
        CellInput::Identity => {
            if i == j {
                T::one()
            } else {
                T::zero()
            }
        }
        _ => T::one(),
    }
}
