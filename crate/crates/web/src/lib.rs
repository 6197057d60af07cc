//! WebAssembly bindings for the browser demo. Every export returns a JSON
//! string, or an error message.

use serde::Serialize;
use wasm_bindgen::prelude::*;
use wickgraph::activation::Activation;
use wickgraph::kernels::{gp_kernel_recursive, kreweras_dual, nc_enumerate, ntk_limit, MomentTable};

fn parse_activation(s: &str) -> Result<Activation, String> {
    s.parse().map_err(|e: wickgraph::Error| e.to_string())
}

/// Fuss-Catalan moment table as produced by `MomentTable::to_json`.
#[wasm_bindgen]
pub fn fc_table(activation: &str, k_max: usize, depth: usize, x2: f64) -> Result<String, String> {
    if k_max == 0 || k_max > 8 || depth == 0 || depth > 12 {
        return Err("k_max must be in 1..=8 and depth in 1..=12".into());
    }
    let act = parse_activation(activation)?;
    MomentTable::compute(k_max, depth, x2, &act).map(|t| t.to_json()).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curve {
    theta: Vec<f64>,
    gp: Vec<f64>,
    ntk: Vec<f64>,
}

/// `K_L` and `Theta_L` between unit inputs at angle `theta` in `[0, pi]`.
#[wasm_bindgen]
pub fn kernel_curve(activation: &str, depth: usize, points: usize) -> Result<String, String> {
    if !(2..=2000).contains(&points) || depth > 50 {
        return Err("points must be in 2..=2000 and depth at most 50".into());
    }
    let acts = vec![parse_activation(activation)?; depth];
    let mut c = Curve { theta: Vec::new(), gp: Vec::new(), ntk: Vec::new() };
    let x = [1.0, 0.0];
    for i in 0..points {
        let t = std::f64::consts::PI * i as f64 / (points - 1) as f64;
        let y = [t.cos(), t.sin()];
        c.theta.push(t);
        c.gp.push(gp_kernel_recursive(depth, &x, &y, &acts).map_err(|e| e.to_string())?);
        c.ntk.push(ntk_limit(depth, &x, &y, &acts).map_err(|e| e.to_string())?);
    }
    Ok(serde_json::to_string(&c).expect("curve serializes"))
}

#[derive(Serialize)]
struct Pair {
    blocks: Vec<Vec<usize>>,
    dual: Vec<Vec<usize>>,
}

/// Every non-crossing partition of `1..=k` with its Kreweras dual.
#[wasm_bindgen]
pub fn nc_partitions(k: usize) -> Result<String, String> {
    if k == 0 || k > 8 {
        return Err("k must be in 1..=8".into());
    }
    let mut out = Vec::new();
    for p in nc_enumerate(k).map_err(|e| e.to_string())? {
        let d = kreweras_dual(&p, k).map_err(|e| e.to_string())?;
        out.push(Pair { blocks: p.blocks, dual: d.blocks });
    }
    Ok(serde_json::to_string(&out).expect("partitions serialize"))
}
