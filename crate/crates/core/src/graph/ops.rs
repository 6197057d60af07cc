use super::{Cell, CellInput, Dsu, ProductGraph};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// A graph with ordered free input and output cells, read as a multilinear map.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorGraph<T = f64> {
    base: ProductGraph<T>,
    ins: Vec<Cell>,
    outs: Vec<Cell>,
}

fn remap(c: Cell, vmap: &[usize], emap: &[Option<usize>]) -> Cell {
    match c {
        Cell::Vertex(v) => Cell::Vertex(vmap[v]),
        Cell::Edge(e) => Cell::Edge(emap[e].expect("free cell was dropped")),
    }
}

fn shift(c: Cell, nv: usize, ne: usize) -> Cell {
    match c {
        Cell::Vertex(v) => Cell::Vertex(v + nv),
        Cell::Edge(e) => Cell::Edge(e + ne),
    }
}

/// Endpoints of identified edges are merged, except when one of them is free
/// and the other carries a non-trivial input: those are joined by an identity
/// edge, which forces the same index without combining the inputs.
fn identify<T: Scalar>(g: &ProductGraph<T>, dsu: &mut Dsu, links: &mut Vec<(usize, usize)>, a: usize, b: usize) {
    let (ia, ib) = (&g.vertices[a].input, &g.vertices[b].input);
    let plain = |x: &CellInput<T>| *x == CellInput::Ones;
    if a != b && (ia.is_free() || ib.is_free()) && !plain(ia) && !plain(ib) {
        links.push((a, b));
    } else {
        dsu.union(a, b);
    }
}

fn add_links<T: Scalar>(g: &mut ProductGraph<T>, links: &[(usize, usize)], vmap: &[usize]) {
    for &(a, b) in links {
        g.edges.push(super::Edge { head: vmap[a], tail: vmap[b], input: CellInput::Identity });
    }
}

impl<T: Scalar> OperatorGraph<T> {
    /// Free cells are taken in id order, vertices before edges.
    pub fn new(base: ProductGraph<T>) -> Self {
        let ins = base.cells().filter(|&c| *base.cell_input(c) == CellInput::FreeIn).collect();
        let outs = base.cells().filter(|&c| *base.cell_input(c) == CellInput::FreeOut).collect();
        OperatorGraph { base, ins, outs }
    }

    pub fn with_order(base: ProductGraph<T>, ins: Vec<Cell>, outs: Vec<Cell>) -> Result<Self> {
        let mut seen = ins.clone();
        seen.extend(outs.iter().copied());
        seen.sort();
        seen.dedup();
        if seen.len() != ins.len() + outs.len() {
            return Err(Error::CellKindMismatch("a cell is listed twice".into()));
        }
        for &c in &ins {
            if *base.cell_input(c) != CellInput::FreeIn {
                return Err(Error::CellKindMismatch(format!("{c:?} is not a free input")));
            }
        }
        for &c in &outs {
            if *base.cell_input(c) != CellInput::FreeOut {
                return Err(Error::CellKindMismatch(format!("{c:?} is not a free output")));
            }
        }
        if base.free_cells().len() != seen.len() {
            return Err(Error::FreeCellCountMismatch { expected: "every free cell listed".into(), found: seen.len() });
        }
        Ok(OperatorGraph { base, ins, outs })
    }

    pub fn base(&self) -> &ProductGraph<T> {
        &self.base
    }

    pub fn ins(&self) -> &[Cell] {
        &self.ins
    }

    pub fn outs(&self) -> &[Cell] {
        &self.outs
    }

    /// Full tensor of the map, row-major over the out cells then the in cells.
    pub fn operator_tensor(&self) -> Result<(Vec<T>, Vec<usize>)> {
        let mut open = self.outs.clone();
        open.extend(self.ins.iter().copied());
        self.base.contract_open(&open)
    }

    /// Matrix of a one-in/one-out map. Edge cells are flattened row-major by
    /// (head, tail).
    pub fn operator_matrix(&self) -> Result<DMatrix<T>> {
        if self.ins.len() != 1 || self.outs.len() != 1 {
            return Err(Error::FreeCellCountMismatch {
                expected: "one in and one out".into(),
                found: self.ins.len() + self.outs.len(),
            });
        }
        let (data, _) = self.operator_tensor()?;
        let rows: usize = self.base.cell_dims(self.outs[0]).iter().product();
        let cols: usize = self.base.cell_dims(self.ins[0]).iter().product();
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }

    /// Fix the in cells to the given inputs and return the output tensor.
    pub fn apply(&self, inputs: &[CellInput<T>]) -> Result<Vec<T>> {
        if inputs.len() != self.ins.len() {
            return Err(Error::ArityMismatch { expected: self.ins.len(), got: inputs.len() });
        }
        let mut g = self.base.clone();
        for (&c, input) in self.ins.iter().zip(inputs) {
            g = g.with_input(c, input.clone())?;
        }
        Ok(g.contract_open(&self.outs)?.0)
    }

    fn single_out_vertex(&self) -> Result<usize> {
        match self.outs.as_slice() {
            [Cell::Vertex(v)] => Ok(*v),
            _ => Err(Error::FreeCellCountMismatch { expected: "one output vertex".into(), found: self.outs.len() }),
        }
    }

    /// Identify the output vertices of two vector-valued graphs; the result
    /// computes the entrywise product. Free inputs of both operands are kept.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        let (a, b) = (self.single_out_vertex()?, other.single_out_vertex()?);
        let (da, db) = (self.base.dim(a), other.base.dim(b));
        if da != db {
            return Err(Error::DimMismatch(format!("wedge of dimensions {da} and {db}")));
        }
        let nv = self.base.vertices.len();
        let ne = self.base.edges.len();
        let mut g = self.base.disjoint_union(&other.base);
        g.vertices[a].input = CellInput::Ones;
        g.vertices[b + nv].input = CellInput::Ones;
        let mut dsu = Dsu::new(g.vertices.len());
        dsu.union(a, b + nv);
        let (mut g, vmap, emap) = g.merge(&mut dsu, &[])?;
        g.vertices[vmap[a]].input = CellInput::FreeOut;
        let mut ins: Vec<Cell> = self.ins.iter().map(|&c| remap(c, &vmap, &emap)).collect();
        ins.extend(other.ins.iter().map(|&c| remap(shift(c, nv, ne), &vmap, &emap)));
        Ok(OperatorGraph { base: g, ins, outs: vec![Cell::Vertex(vmap[a])] })
    }

    /// `g2 ∘ g1`: identify the out cell `c1` of `g1` with the in cell `c2` of
    /// `g2`. The identified cell becomes all-ones; for edges, both endpoint
    /// pairs are merged so the summed indices coincide.
    pub fn compose(g2: &Self, g1: &Self, c2: Cell, c1: Cell) -> Result<Self> {
        if !g1.outs.contains(&c1) {
            return Err(Error::CellKindMismatch(format!("{c1:?} is not an output of the inner graph")));
        }
        if !g2.ins.contains(&c2) {
            return Err(Error::CellKindMismatch(format!("{c2:?} is not an input of the outer graph")));
        }
        let (d1, d2) = (g1.base.cell_dims(c1), g2.base.cell_dims(c2));
        let nv = g1.base.vertices.len();
        let ne = g1.base.edges.len();
        let mut g = g1.base.disjoint_union(&g2.base);
        let mut dsu = Dsu::new(g.vertices.len());
        let mut drop = Vec::new();
        let mut links = Vec::new();
        match (c1, c2) {
            (Cell::Vertex(a), Cell::Vertex(b)) => {
                if d1 != d2 {
                    return Err(Error::DimMismatch(format!("composing {d1:?} with {d2:?}")));
                }
                g.vertices[a].input = CellInput::Ones;
                g.vertices[b + nv].input = CellInput::Ones;
                dsu.union(a, b + nv);
            }
            (Cell::Edge(a), Cell::Edge(b)) => {
                if d1 != d2 {
                    return Err(Error::DimMismatch(format!("composing {d1:?} with {d2:?}")));
                }
                let (ea, eb) = (g.edges[a].clone(), g.edges[b + ne].clone());
                g.edges[a].input = CellInput::Ones;
                drop.push(b + ne);
                identify(&g, &mut dsu, &mut links, ea.head, eb.head);
                identify(&g, &mut dsu, &mut links, ea.tail, eb.tail);
            }
            _ => return Err(Error::CellKindMismatch("composing a vertex with an edge".into())),
        }
        let (mut g, vmap, emap) = g.merge(&mut dsu, &drop)?;
        add_links(&mut g, &links, &vmap);
        let c2s = shift(c2, nv, ne);
        let mut ins: Vec<Cell> = g1.ins.iter().map(|&c| remap(c, &vmap, &emap)).collect();
        ins.extend(g2.ins.iter().filter(|&&c| c != c2).map(|&c| remap(shift(c, nv, ne), &vmap, &emap)));
        let mut outs: Vec<Cell> =
            g2.outs.iter().map(|&c| shift(c, nv, ne)).filter(|&c| c != c2s).map(|c| remap(c, &vmap, &emap)).collect();
        outs.extend(g1.outs.iter().filter(|&&c| c != c1).map(|&c| remap(c, &vmap, &emap)));
        OperatorGraph::with_order(g, ins, outs)
    }

    /// Swap the roles of the single in and single out cell.
    pub fn transpose(&self) -> Result<Self> {
        if self.ins.len() != 1 || self.outs.len() != 1 {
            return Err(Error::FreeCellCountMismatch {
                expected: "one in and one out".into(),
                found: self.ins.len() + self.outs.len(),
            });
        }
        let (i, o) = (self.ins[0], self.outs[0]);
        let g = self.base.with_input(i, CellInput::FreeOut)?.with_input(o, CellInput::FreeIn)?;
        Ok(OperatorGraph { base: g, ins: vec![o], outs: vec![i] })
    }

    /// Identify the in and out cell; the value of the result is the trace.
    pub fn trace_graph(&self) -> Result<ProductGraph<T>> {
        if self.ins.len() != 1 || self.outs.len() != 1 {
            return Err(Error::FreeCellCountMismatch {
                expected: "one in and one out".into(),
                found: self.ins.len() + self.outs.len(),
            });
        }
        let (i, o) = (self.ins[0], self.outs[0]);
        let (di, d_o) = (self.base.cell_dims(i), self.base.cell_dims(o));
        if di != d_o {
            return Err(Error::DimMismatch(format!("trace of a {d_o:?} by {di:?} map")));
        }
        let mut g = self.base.clone();
        let mut dsu = Dsu::new(g.vertices.len());
        let mut drop = Vec::new();
        let mut links = Vec::new();
        match (i, o) {
            (Cell::Vertex(a), Cell::Vertex(b)) => {
                g.vertices[a].input = CellInput::Ones;
                g.vertices[b].input = CellInput::Ones;
                dsu.union(a, b);
            }
            (Cell::Edge(a), Cell::Edge(b)) => {
                let (ea, eb) = (g.edges[a].clone(), g.edges[b].clone());
                g.edges[a].input = CellInput::Ones;
                drop.push(b);
                identify(&g, &mut dsu, &mut links, ea.head, eb.head);
                identify(&g, &mut dsu, &mut links, ea.tail, eb.tail);
            }
            _ => return Err(Error::CellKindMismatch("trace of a vertex against an edge".into())),
        }
        let (mut g, vmap, _) = g.merge(&mut dsu, &drop)?;
        add_links(&mut g, &links, &vmap);
        Ok(g)
    }

    /// Partial differentials at `at`: the i-th graph keeps only in cell i free
    /// and fixes every other in cell to its entry of `at`.
    pub fn differential(&self, at: &[CellInput<T>]) -> Result<Vec<Self>> {
        if at.len() != self.ins.len() {
            return Err(Error::ArityMismatch { expected: self.ins.len(), got: at.len() });
        }
        let mut out = Vec::with_capacity(at.len());
        for i in 0..self.ins.len() {
            let mut g = self.base.clone();
            for (j, (&c, input)) in self.ins.iter().zip(at).enumerate() {
                if j != i {
                    g = g.with_input(c, input.clone())?;
                }
            }
            out.push(OperatorGraph { base: g, ins: vec![self.ins[i]], outs: self.outs.clone() });
        }
        Ok(out)
    }
}
