use crate::error::{Error, Result};
use serde::Serialize;

/// Partition of `{1..k}` with sorted blocks ordered by their smallest element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NcPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl NcPartition {
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Self {
        for b in blocks.iter_mut() {
            b.sort_unstable();
        }
        blocks.retain(|b| !b.is_empty());
        blocks.sort();
        NcPartition { blocks }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }
}

pub fn catalan(k: usize) -> u64 {
    let mut c: u64 = 1;
    for i in 0..k as u64 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

/// True when `blocks` partition `{1..k}` with no `a < c < b < d` such that
/// `a, b` and `c, d` lie in different blocks.
pub fn is_non_crossing(p: &NcPartition, k: usize) -> bool {
    let mut owner = vec![usize::MAX; k + 1];
    for (i, b) in p.blocks.iter().enumerate() {
        for &x in b {
            if x == 0 || x > k || owner[x] != usize::MAX {
                return false;
            }
            owner[x] = i;
        }
    }
    if owner[1..].contains(&usize::MAX) {
        return false;
    }
    for a in 1..=k {
        for c in a + 1..=k {
            for b in c + 1..=k {
                if owner[a] != owner[b] || owner[a] == owner[c] {
                    continue;
                }
                for d in b + 1..=k {
                    if owner[c] == owner[d] {
                        return false;
                    }
                }
            }
        }
    }
    true
}

// Non-crossing partitions of the consecutive range lo..=hi.
fn nc_range(lo: usize, hi: usize) -> Vec<Vec<Vec<usize>>> {
    if lo > hi {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    // block of `lo` is {lo = b_0 < b_1 < ... < b_r}; gaps are independent ranges
    fn extend(block: &mut Vec<usize>, hi: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        let last = *block.last().expect("nonempty block");
        // close the block here: the tail range last+1..=hi is free
        let mut gaps = Vec::new();
        for w in block.windows(2) {
            gaps.push((w[0] + 1, w[1] - 1));
        }
        gaps.push((last + 1, hi));
        let mut combos: Vec<Vec<Vec<usize>>> = vec![vec![block.clone()]];
        for &(a, b) in &gaps {
            let parts = if a > b { vec![vec![]] } else { nc_range(a, b) };
            let mut next = Vec::new();
            for c in &combos {
                for p in &parts {
                    let mut m = c.clone();
                    m.extend(p.iter().cloned());
                    next.push(m);
                }
            }
            combos = next;
        }
        out.extend(combos);
        for nxt in last + 1..=hi {
            block.push(nxt);
            extend(block, hi, out);
            block.pop();
        }
    }
    extend(&mut vec![lo], hi, &mut out);
    out
}

/// All non-crossing partitions of `{1..k}` in sorted order; `k <= 12`.
pub fn nc_enumerate(k: usize) -> Result<Vec<NcPartition>> {
    if k > 12 {
        return Err(Error::TooLarge(format!("NC({k}) has {} elements", catalan(k))));
    }
    let mut out: Vec<NcPartition> = nc_range(1, k).into_iter().map(NcPartition::new).collect();
    out.sort();
    Ok(out)
}

/// Kreweras complement `π^{-1} γ` with `γ = (1 2 ... k)` and blocks read as
/// increasing cycles. Block `j` of the result collects the edges of the
/// k-cycle (edge `i` joins vertices `i` and `i+1`) that can be joined
/// inside the circle without crossing `π`.
pub fn kreweras_dual(p: &NcPartition, k: usize) -> Result<NcPartition> {
    if !is_non_crossing(p, k) {
        return Err(Error::NotNonCrossing);
    }
    let mut inv = vec![0usize; k + 1];
    for b in &p.blocks {
        for (i, &x) in b.iter().enumerate() {
            let next = b[(i + 1) % b.len()];
            inv[next] = x;
        }
    }
    let sigma = |i: usize| inv[i % k + 1];
    let mut seen = vec![false; k + 1];
    let mut blocks = Vec::new();
    for start in 1..=k {
        if seen[start] {
            continue;
        }
        let mut b = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            b.push(i);
            i = sigma(i);
        }
        blocks.push(b);
    }
    Ok(NcPartition::new(blocks))
}
