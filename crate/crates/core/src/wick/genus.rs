use super::{admissible_pairings, classify, index_classes, quotient, stats, ClassKind, Mode, PairingReport};
use crate::error::{Error, Result};
use crate::graph::{CellInput, ProductGraph, Strategy};
use serde::Serialize;

/// Leading-order structure of `E W_G` as a polynomial in the bulk dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeadingOrder {
    pub sigma_g: f64,
    pub e_check: f64,
    pub c: usize,
    /// `ě + c`, the largest exponent any pairing can reach.
    pub bound_a: f64,
    /// `ě + c/2`, the largest exponent an atom-free pairing can reach.
    pub bound_b: f64,
    pub exponent_max: Option<usize>,
    pub count_at_max: usize,
    pub count_a: usize,
    pub exponent_sub: Option<usize>,
    pub count_at_sub: usize,
    pub count_b: usize,
    pub pairings: Vec<PairingReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fluctuation {
    pub count_a: usize,
    /// Number of bi-atomic pairings of the doubled graph `G ⊔ G`.
    pub count_b_pair: usize,
}

fn check_assumption(g: &ProductGraph<f64>) -> Result<()> {
    if let Some(v) = g.vertices().iter().position(|v| v.input != CellInput::Ones) {
        return Err(Error::AssumptionViolated(format!("vertex {v} is not all-ones")));
    }
    if let Some(e) = g.edges().iter().position(|e| !e.input.is_random() && e.input != CellInput::Identity) {
        return Err(Error::AssumptionViolated(format!("deterministic edge {e} is not the identity")));
    }
    Ok(())
}

/// Enumerate every pairing and record its exponent and class.
pub fn leading_order(g: &ProductGraph<f64>, mode: Mode) -> Result<LeadingOrder> {
    check_assumption(g)?;
    let st = stats(g);
    let mut out = LeadingOrder {
        sigma_g: st.sigma_g,
        e_check: st.e_check,
        c: st.c,
        bound_a: st.e_check + st.c as f64,
        bound_b: st.e_check + st.c as f64 / 2.0,
        exponent_max: None,
        count_at_max: 0,
        count_a: 0,
        exponent_sub: None,
        count_at_sub: 0,
        count_b: 0,
        pairings: Vec::new(),
    };
    for phi in admissible_pairings(g, mode) {
        let q = quotient(g, &phi)?;
        let class = classify(g, &phi)?;
        let exponent = index_classes(&q.graph);
        if class.kind == ClassKind::FullyAtomic {
            out.count_a += 1;
        }
        if class.kind == ClassKind::BiAtomic {
            out.count_b += 1;
        }
        bump(&mut out.exponent_max, &mut out.count_at_max, exponent);
        if class.atom_free {
            bump(&mut out.exponent_sub, &mut out.count_at_sub, exponent);
        }
        out.pairings.push(PairingReport {
            pairing: phi.pairs.iter().map(|&(a, b)| [a, b]).collect(),
            class: class.kind.tag(),
            exponent,
            value: q.graph.value(Strategy::Greedy)?,
        });
    }
    Ok(out)
}

fn bump(best: &mut Option<usize>, count: &mut usize, x: usize) {
    match *best {
        Some(b) if b > x => {}
        Some(b) if b == x => *count += 1,
        _ => {
            *best = Some(x);
            *count = 1;
        }
    }
}

pub fn fluctuation_stats(g: &ProductGraph<f64>, mode: Mode) -> Result<Fluctuation> {
    check_assumption(g)?;
    let mut count_a = 0;
    for phi in admissible_pairings(g, mode) {
        if classify(g, &phi)?.kind == ClassKind::FullyAtomic {
            count_a += 1;
        }
    }
    let doubled = g.disjoint_union(g);
    let mut count_b_pair = 0;
    for phi in admissible_pairings(&doubled, mode) {
        if classify(&doubled, &phi)?.kind == ClassKind::BiAtomic {
            count_b_pair += 1;
        }
    }
    Ok(Fluctuation { count_a, count_b_pair })
}

/// Normalization `λ_G = (σ_G N^{ě+1})^{-1}` at bulk dimension `n`.
pub fn lambda_g(g: &ProductGraph<f64>, n: usize) -> f64 {
    let st = stats(g);
    1.0 / (st.sigma_g * (n as f64).powf(st.e_check + 1.0))
}

/// `E Π_i (W_{G_i} - Σ_{atomic ψ} W_{(G_i)_ψ})`, computed as the sum over
/// atom-free pairings of the disjoint union.
pub fn centered_product_expectation(components: &[ProductGraph<f64>], mode: Mode) -> Result<f64> {
    let Some(first) = components.first() else {
        return Ok(1.0);
    };
    let union = components[1..].iter().fold(first.clone(), |acc, g| acc.disjoint_union(g));
    let mut total = 0.0;
    for phi in admissible_pairings(&union, mode) {
        if classify(&union, &phi)?.atom_free {
            total += quotient(&union, &phi)?.graph.value(Strategy::Greedy)?;
        }
    }
    Ok(total)
}
