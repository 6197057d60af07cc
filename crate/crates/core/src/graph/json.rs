use super::{CellInput, Edge, Mat, ProductGraph, Vertex};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::HashMap;

/// Serialized form of a real product graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: Value,
    pub dim: usize,
    pub input: InputDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub id: Value,
    pub head: Value,
    pub tail: Value,
    pub input: InputDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputDoc {
    Ones,
    Identity,
    Basis { i: usize },
    Dense { data: Value },
    Const { value: f64 },
    Random { label: i32, sigma: f64 },
    FreeIn,
    FreeOut,
}

fn key(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn numbers(v: &Value) -> Result<Vec<f64>> {
    v.as_array()
        .ok_or_else(|| Error::Parse("dense data must be an array".into()))?
        .iter()
        .map(|x| x.as_f64().ok_or_else(|| Error::Parse(format!("not a number: {x}"))))
        .collect()
}

fn edge_input(doc: &InputDoc, dh: usize, dt: usize) -> Result<CellInput<f64>> {
    if let InputDoc::Dense { data } = doc {
        let rows = data.as_array().ok_or_else(|| Error::Parse("dense data must be an array".into()))?;
        if rows.iter().all(Value::is_array) {
            let parsed: Vec<Vec<f64>> = rows.iter().map(numbers).collect::<Result<_>>()?;
            let cols = parsed.first().map_or(0, Vec::len);
            if parsed.iter().any(|r| r.len() != cols) {
                return Err(Error::ShapeMismatch("ragged matrix rows".into()));
            }
            return Ok(CellInput::Matrix(Mat { rows: parsed.len(), cols, data: parsed.concat() }));
        }
        return Ok(CellInput::Matrix(Mat::new(dh, dt, numbers(data)?)?));
    }
    Ok(plain_input(doc))
}

fn plain_input(doc: &InputDoc) -> CellInput<f64> {
    match doc {
        InputDoc::Ones => CellInput::Ones,
        InputDoc::Identity => CellInput::Identity,
        InputDoc::Basis { i } => CellInput::Basis(*i),
        InputDoc::Const { value } => CellInput::Const(*value),
        InputDoc::Random { label, sigma } => CellInput::Random { label: *label, sigma: *sigma },
        InputDoc::FreeIn => CellInput::FreeIn,
        InputDoc::FreeOut => CellInput::FreeOut,
        InputDoc::Dense { .. } => unreachable!("dense inputs are handled by the caller"),
    }
}

fn to_doc(input: &CellInput<f64>) -> InputDoc {
    match input {
        CellInput::Vector(x) => InputDoc::Dense { data: Value::from(x.clone()) },
        CellInput::Matrix(m) => InputDoc::Dense {
            data: Value::Array(m.data.chunks(m.cols.max(1)).map(|r| Value::from(r.to_vec())).collect()),
        },
        CellInput::Ones => InputDoc::Ones,
        CellInput::Identity => InputDoc::Identity,
        CellInput::Const(c) => InputDoc::Const { value: *c },
        CellInput::Basis(i) => InputDoc::Basis { i: *i },
        CellInput::Random { label, sigma } => InputDoc::Random { label: *label, sigma: *sigma },
        CellInput::FreeIn => InputDoc::FreeIn,
        CellInput::FreeOut => InputDoc::FreeOut,
    }
}

impl ProductGraph<f64> {
    pub fn from_doc(doc: &GraphDoc) -> Result<Self> {
        let mut index = HashMap::new();
        let mut vertices = Vec::new();
        for v in &doc.vertices {
            if index.insert(key(&v.id), vertices.len()).is_some() {
                return Err(Error::Parse(format!("duplicate vertex id {}", v.id)));
            }
            let input = match &v.input {
                InputDoc::Dense { data } => CellInput::Vector(numbers(data)?),
                other => plain_input(other),
            };
            vertices.push(Vertex { dim: v.dim, input });
        }
        let lookup = |id: &Value| {
            index.get(&key(id)).copied().ok_or_else(|| Error::ShapeMismatch(format!("unknown vertex id {id}")))
        };
        let mut edges = Vec::new();
        for e in &doc.edges {
            let (head, tail) = (lookup(&e.head)?, lookup(&e.tail)?);
            let input = edge_input(&e.input, vertices[head].dim, vertices[tail].dim)?;
            edges.push(Edge { head, tail, input });
        }
        ProductGraph::new(vertices, edges)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDoc = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_doc(&doc)
    }

    pub fn to_doc(&self) -> GraphDoc {
        GraphDoc {
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(i, v)| VertexDoc { id: Value::from(i), dim: v.dim, input: to_doc(&v.input) })
                .collect(),
            edges: self
                .edges
                .iter()
                .enumerate()
                .map(|(i, e)| EdgeDoc {
                    id: Value::from(i),
                    head: Value::from(e.head),
                    tail: Value::from(e.tail),
                    input: to_doc(&e.input),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_doc()).expect("graph documents always serialize")
    }
}
