use crate::activation::factorial;

/// Symmetric tuple: a multiset stored in sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymTuple<T: Ord + Clone> {
    items: Vec<T>,
}

impl<T: Ord + Clone> SymTuple<T> {
    pub fn new(mut items: Vec<T>) -> Self {
        items.sort();
        SymTuple { items }
    }

    pub fn items(&self) -> &[T] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn multiplicities(&self) -> Vec<(T, usize)> {
        let mut out: Vec<(T, usize)> = Vec::new();
        for x in &self.items {
            match out.last_mut() {
                Some((y, k)) if y == x => *k += 1,
                _ => out.push((x.clone(), 1)),
            }
        }
        out
    }

    /// `𝔰 = Π multiplicity!`.
    pub fn sym_factor(&self) -> f64 {
        self.multiplicities().iter().map(|(_, k)| factorial(*k)).product()
    }
}

/// Nondecreasing index sequences of length `m` over `0..n`, lexicographic.
pub fn multisets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m == 0 {
        out.push(Vec::new());
        return out;
    }
    if n == 0 {
        return out;
    }
    let mut cur = vec![0usize; m];
    loop {
        out.push(cur.clone());
        let mut i = m;
        while i > 0 && cur[i - 1] == n - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        let v = cur[i - 1];
        for c in cur.iter_mut().skip(i) {
            *c = v;
        }
    }
}

/// Terms of `(Σ_a v_a)^{⊙M} = Σ_τ (M!/𝔰(τ)) v_τ`, where `v_τ` is the
/// entrywise product over the tuple.
pub fn multiset_power_expand(vectors: &[Vec<f64>], m: usize) -> Vec<(SymTuple<usize>, f64)> {
    multisets(vectors.len(), m)
        .into_iter()
        .map(|idx| {
            let t = SymTuple::new(idx);
            let c = factorial(m) / t.sym_factor();
            (t, c)
        })
        .collect()
}

/// Entrywise product of the vectors indexed by `t`; all ones when empty.
pub fn tuple_value(vectors: &[Vec<f64>], t: &SymTuple<usize>, dim: usize) -> Vec<f64> {
    let mut out = vec![1.0; dim];
    for &i in t.items() {
        for (o, v) in out.iter_mut().zip(&vectors[i]) {
            *o *= v;
        }
    }
    out
}
