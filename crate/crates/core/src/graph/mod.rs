//! Product graphs: directed multigraphs whose vertices carry vectors and
//! whose edges carry matrices. The value of a graph is the sum over all
//! indexations of the product of the indexed entries.

mod eval;
mod json;
mod ops;

pub use eval::Strategy;
pub(crate) use eval::{edge_entry as eval_edge_entry, vertex_entry as eval_vertex_entry};
pub use json::GraphDoc;
pub use ops::OperatorGraph;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense row-major matrix used as an edge input.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Mat { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Mat<U> {
        Mat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }
}

/// Input attached to a vertex or an edge.
///
/// `Ones` is the all-ones vector on a vertex and the all-ones matrix on an
/// edge; `Const(c)` is `c` times the same. `Basis` is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub enum CellInput<T> {
    Vector(Vec<T>),
    Matrix(Mat<T>),
    Ones,
    Identity,
    Const(T),
    Basis(usize),
    Random { label: i32, sigma: f64 },
    FreeIn,
    FreeOut,
}

impl<T> CellInput<T> {
    pub fn is_free(&self) -> bool {
        matches!(self, CellInput::FreeIn | CellInput::FreeOut)
    }

    pub fn is_random(&self) -> bool {
        matches!(self, CellInput::Random { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    Vertex(usize),
    Edge(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex<T> {
    pub dim: usize,
    pub input: CellInput<T>,
}

/// Edge `(head, tail)`: rows of the input are indexed by the head.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge<T> {
    pub head: usize,
    pub tail: usize,
    pub input: CellInput<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductGraph<T = f64> {
    vertices: Vec<Vertex<T>>,
    edges: Vec<Edge<T>>,
}

/// Incremental construction of a [`ProductGraph`].
#[derive(Debug, Clone)]
pub struct GraphBuilder<T = f64> {
    vertices: Vec<Vertex<T>>,
    edges: Vec<Edge<T>>,
}

impl<T: Scalar> Default for GraphBuilder<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> GraphBuilder<T> {
    pub fn new() -> Self {
        GraphBuilder { vertices: Vec::new(), edges: Vec::new() }
    }

    pub fn vertex(&mut self, dim: usize, input: CellInput<T>) -> usize {
        self.vertices.push(Vertex { dim, input });
        self.vertices.len() - 1
    }

    pub fn edge(&mut self, head: usize, tail: usize, input: CellInput<T>) -> usize {
        self.edges.push(Edge { head, tail, input });
        self.edges.len() - 1
    }

    pub fn build(self) -> Result<ProductGraph<T>> {
        ProductGraph::new(self.vertices, self.edges)
    }
}

fn check_vertex<T>(v: &Vertex<T>) -> Result<()> {
    if v.dim == 0 {
        return Err(Error::ShapeMismatch("vertex of dimension 0".into()));
    }
    match &v.input {
        CellInput::Vector(x) if x.len() != v.dim => Err(Error::ShapeMismatch(format!(
            "vector of length {} on a vertex of dimension {}",
            x.len(),
            v.dim
        ))),
        CellInput::Matrix(_) => Err(Error::ShapeMismatch("matrix input on a vertex".into())),
        CellInput::Identity => Err(Error::ShapeMismatch("identity input on a vertex".into())),
        CellInput::Random { .. } => Err(Error::ShapeMismatch("random input on a vertex".into())),
        &CellInput::Basis(i) if i == 0 || i > v.dim => {
            Err(Error::BadBasisIndex { index: i, dim: v.dim })
        }
        _ => Ok(()),
    }
}

fn check_edge<T>(dh: usize, dt: usize, input: &CellInput<T>) -> Result<()> {
    match input {
        CellInput::Matrix(m) if m.rows != dh || m.cols != dt => Err(Error::ShapeMismatch(format!(
            "{}x{} matrix on a {dh}x{dt} edge",
            m.rows, m.cols
        ))),
        CellInput::Vector(_) => Err(Error::ShapeMismatch("vector input on an edge".into())),
        CellInput::Basis(_) => Err(Error::ShapeMismatch("basis input on an edge".into())),
        CellInput::Identity if dh != dt => Err(Error::IdentityOnRectangular { head: dh, tail: dt }),
        &CellInput::Random { label, sigma } if label == 0 || !(sigma > 0.0) => Err(
            Error::BadParameter(format!("random edge needs nonzero label and positive sigma, got {label}, {sigma}")),
        ),
        _ => Ok(()),
    }
}

/// Entrywise product of two vertex inputs of dimension `dim`.
pub(crate) fn hadamard<T: Scalar>(a: &CellInput<T>, b: &CellInput<T>, dim: usize) -> Result<CellInput<T>> {
    use CellInput::*;
    Ok(match (a, b) {
        (Ones, x) | (x, Ones) => x.clone(),
        (x, _) | (_, x) if x.is_free() => {
            return Err(Error::CellKindMismatch("cannot merge a free vertex with a fixed input".into()))
        }
        (Basis(i), Basis(j)) => {
            if i == j {
                Basis(*i)
            } else {
                Const(T::zero())
            }
        }
        (Const(c), Const(d)) => Const(*c * *d),
        _ => {
            let (x, y) = (dense_vector(a, dim), dense_vector(b, dim));
            Vector(x.iter().zip(&y).map(|(&p, &q)| p * q).collect())
        }
    })
}

fn dense_vector<T: Scalar>(a: &CellInput<T>, dim: usize) -> Vec<T> {
    match a {
        CellInput::Vector(x) => x.clone(),
        CellInput::Const(c) => vec![*c; dim],
        CellInput::Basis(i) => (0..dim).map(|k| if k + 1 == *i { T::one() } else { T::zero() }).collect(),
        _ => vec![T::one(); dim],
    }
}

/// Disjoint-set forest over `0..n`.
#[derive(Debug, Clone)]
pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    /// Compact class labels in order of first appearance.
    pub fn classes(&mut self) -> (Vec<usize>, usize) {
        let n = self.parent.len();
        let mut label = vec![usize::MAX; n];
        let mut out = vec![0; n];
        let mut count = 0;
        for x in 0..n {
            let r = self.find(x);
            if label[r] == usize::MAX {
                label[r] = count;
                count += 1;
            }
            out[x] = label[r];
        }
        (out, count)
    }
}

impl<T: Scalar> ProductGraph<T> {
    pub fn new(vertices: Vec<Vertex<T>>, edges: Vec<Edge<T>>) -> Result<Self> {
        for v in &vertices {
            check_vertex(v)?;
        }
        for e in &edges {
            if e.head >= vertices.len() || e.tail >= vertices.len() {
                return Err(Error::ShapeMismatch(format!(
                    "edge ({}, {}) references a missing vertex",
                    e.head, e.tail
                )));
            }
            check_edge(vertices[e.head].dim, vertices[e.tail].dim, &e.input)?;
        }
        Ok(ProductGraph { vertices, edges })
    }

    pub fn vertices(&self) -> &[Vertex<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn dim(&self, v: usize) -> usize {
        self.vertices[v].dim
    }

    pub fn cell_input(&self, c: Cell) -> &CellInput<T> {
        match c {
            Cell::Vertex(v) => &self.vertices[v].input,
            Cell::Edge(e) => &self.edges[e].input,
        }
    }

    /// Dimensions of the indices carried by a cell: `[d]` or `[d_head, d_tail]`.
    pub fn cell_dims(&self, c: Cell) -> Vec<usize> {
        match c {
            Cell::Vertex(v) => vec![self.vertices[v].dim],
            Cell::Edge(e) => vec![self.dim(self.edges[e].head), self.dim(self.edges[e].tail)],
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.vertices.len()).map(Cell::Vertex).chain((0..self.edges.len()).map(Cell::Edge))
    }

    pub fn free_cells(&self) -> Vec<Cell> {
        self.cells().filter(|&c| self.cell_input(c).is_free()).collect()
    }

    pub fn random_edges(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].input.is_random()).collect()
    }

    pub fn is_product_graph(&self) -> bool {
        self.free_cells().is_empty()
    }

    pub fn with_input(&self, c: Cell, input: CellInput<T>) -> Result<Self> {
        let mut g = self.clone();
        match c {
            Cell::Vertex(v) => {
                g.vertices[v].input = input;
                check_vertex(&g.vertices[v])?;
            }
            Cell::Edge(e) => {
                let (dh, dt) = (self.dim(self.edges[e].head), self.dim(self.edges[e].tail));
                check_edge(dh, dt, &input)?;
                g.edges[e].input = input;
            }
        }
        Ok(g)
    }

    /// Component label per vertex (undirected connectivity) and the count.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let mut dsu = Dsu::new(self.vertices.len());
        for e in &self.edges {
            dsu.union(e.head, e.tail);
        }
        dsu.classes()
    }

    /// Disjoint union; ids of `other` are shifted by the sizes of `self`.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().cloned());
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Edge { head: e.head + nv, tail: e.tail + nv, input: e.input.clone() }));
        ProductGraph { vertices, edges }
    }

    /// Merge vertices sharing a class label and drop the listed edges.
    /// Merged vertices take the entrywise product of their inputs.
    /// Returns the new graph with the vertex map and edge map.
    pub(crate) fn merge(
        &self,
        dsu: &mut Dsu,
        drop_edges: &[usize],
    ) -> Result<(Self, Vec<usize>, Vec<Option<usize>>)> {
        let (vmap, n) = dsu.classes();
        let mut slots: Vec<Option<Vertex<T>>> = vec![None; n];
        for (v, vert) in self.vertices.iter().enumerate() {
            let slot = &mut slots[vmap[v]];
            *slot = Some(match slot.take() {
                None => vert.clone(),
                Some(prev) => {
                    if prev.dim != vert.dim {
                        return Err(Error::DimMismatch(format!(
                            "merging vertices of dimensions {} and {}",
                            prev.dim, vert.dim
                        )));
                    }
                    Vertex { dim: prev.dim, input: hadamard(&prev.input, &vert.input, prev.dim)? }
                }
            });
        }
        let vertices: Vec<Vertex<T>> = slots.into_iter().map(|s| s.expect("class without members")).collect();
        let mut emap = vec![None; self.edges.len()];
        let mut edges = Vec::new();
        for (e, edge) in self.edges.iter().enumerate() {
            if drop_edges.contains(&e) {
                continue;
            }
            emap[e] = Some(edges.len());
            edges.push(Edge { head: vmap[edge.head], tail: vmap[edge.tail], input: edge.input.clone() });
        }
        Ok((ProductGraph::new(vertices, edges)?, vmap, emap))
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(T) -> U) -> ProductGraph<U> {
        let conv = |input: &CellInput<T>| -> CellInput<U> {
            match input {
                CellInput::Vector(x) => CellInput::Vector(x.iter().map(|&a| f(a)).collect()),
                CellInput::Matrix(m) => CellInput::Matrix(m.map(&f)),
                CellInput::Ones => CellInput::Ones,
                CellInput::Identity => CellInput::Identity,
                CellInput::Const(c) => CellInput::Const(f(*c)),
                CellInput::Basis(i) => CellInput::Basis(*i),
                CellInput::Random { label, sigma } => CellInput::Random { label: *label, sigma: *sigma },
                CellInput::FreeIn => CellInput::FreeIn,
                CellInput::FreeOut => CellInput::FreeOut,
            }
        };
        ProductGraph {
            vertices: self.vertices.iter().map(|v| Vertex { dim: v.dim, input: conv(&v.input) }).collect(),
            edges: self.edges.iter().map(|e| Edge { head: e.head, tail: e.tail, input: conv(&e.input) }).collect(),
        }
    }

    /// Replace every random edge by the matrix returned from `draw(label, sigma, rows, cols)`.
    pub fn instantiate(&self, mut draw: impl FnMut(i32, f64, usize, usize) -> Mat<T>) -> Result<Self> {
        let mut g = self.clone();
        for e in self.random_edges() {
            if let CellInput::Random { label, sigma } = self.edges[e].input {
                let (dh, dt) = (self.dim(self.edges[e].head), self.dim(self.edges[e].tail));
                let m = draw(label, sigma, dh, dt);
                check_edge(dh, dt, &CellInput::Matrix(m.clone()))?;
                g.edges[e].input = CellInput::Matrix(m);
            }
        }
        Ok(g)
    }
}
