//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;

use fpplab::SpreadGraph;

/// Exact law of the final blue vertex count of the half-edge chain, by
/// forward recursion over `(X, Y, Z, blue vertices)`, written directly from
/// the five transition probabilities.
pub fn chain_final_blue_law(n: u64, d: u64, beta: f64, b0: u64, r0: u64) -> Vec<f64> {
    let m = n * d;
    let mut level: HashMap<(u64, u64, u64, u64), f64> = HashMap::new();
    level.insert((d * b0, d * r0, m - d * (b0 + r0), b0), 1.0);
    let mut law = vec![0.0; n as usize + 1];
    while !level.is_empty() {
        let mut next: HashMap<(u64, u64, u64, u64), f64> = HashMap::new();
        for ((x, y, z, bv), p) in level {
            if x + y == 0 {
                law[bv as usize] += p;
                continue;
            }
            let (xf, yf, zf) = (x as f64, y as f64, z as f64);
            let norm = (beta * xf + yf) * (xf + yf + zf - 1.0);
            let mut add = |key, w: f64| {
                if w > 0.0 {
                    *next.entry(key).or_insert(0.0) += p * w / norm;
                }
            };
            if z > 0 {
                add((x + d - 2, y, z - d, bv + 1), beta * xf * zf);
                add((x, y + d - 2, z - d, bv), yf * zf);
            }
            if x >= 2 {
                add((x - 2, y, z, bv), beta * xf * (xf - 1.0));
            }
            if x >= 1 && y >= 1 {
                add((x - 1, y - 1, z, bv), (1.0 + beta) * xf * yf);
            }
            if y >= 2 {
                add((x, y - 2, z, bv), yf * (yf - 1.0));
            }
        }
        level = next;
    }
    law
}

/// `(k - 1)!!`, the number of perfect matchings of `k` labels.
pub fn matching_count(k: usize) -> usize {
    (1..k).step_by(2).product()
}

/// Matching with each pair ordered and pairs sorted.
pub fn canonical(pairs: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let mut v: Vec<(usize, usize)> = pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    v.sort_unstable();
    v
}

/// Star `K_{1,k}`: vertex 0 is the centre.
pub struct Star {
    pub leaves: usize,
}

impl SpreadGraph for Star {
    fn num_vertices(&self) -> usize {
        self.leaves + 1
    }

    fn for_each_neighbor(&self, v: usize, f: &mut dyn FnMut(usize, u32)) {
        if v == 0 {
            for w in 1..=self.leaves {
                f(w, 1);
            }
        } else {
            f(0, 1);
        }
    }
}

/// Empirical pmf over `0..=max`.
pub fn pmf_of(values: impl IntoIterator<Item = usize>, max: usize) -> Vec<f64> {
    let mut counts = vec![0u64; max + 1];
    let mut total = 0u64;
    for v in values {
        counts[v] += 1;
        total += 1;
    }
    counts.into_iter().map(|c| c as f64 / total as f64).collect()
}

/// CSV with its last column removed from every row.
pub fn strip_last_column(csv: &str) -> String {
    csv.lines()
        .map(|l| l.rsplit_once(',').map(|(head, _)| head).unwrap_or(l))
        .collect::<Vec<_>>()
        .join("\n")
}
