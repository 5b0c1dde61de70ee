//! Minimum-weight matching decoder over a [`DecodingGraph`].

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use super::blossom::max_weight_matching;
use super::dem::DecodingGraph;

/// Integer scale applied to log-likelihood weights.
const SCALE: f64 = 1000.0;
/// Largest defect count decoded by exhaustive subset search.
pub const EXACT_LIMIT: usize = 14;
const INF: i64 = i64::MAX / 4;

#[derive(Clone, Debug)]
pub struct MatchingDecoder {
    n: usize,
    /// Shortest path length and its observable parity for every node pair;
    /// index `n` is the boundary.
    dist: Vec<i64>,
    parity: Vec<bool>,
}

impl MatchingDecoder {
    pub fn new(g: &DecodingGraph) -> Self {
        let n = g.num_nodes();
        let mut adj: Vec<Vec<(usize, i64, bool)>> = vec![Vec::new(); n + 1];
        for e in &g.edges {
            let b = e.b.unwrap_or(n);
            let w = (e.weight() * SCALE).round().max(0.0) as i64;
            adj[e.a].push((b, w, e.observable));
            adj[b].push((e.a, w, e.observable));
        }
        let m = n + 1;
        let mut dist = vec![INF; m * m];
        let mut parity = vec![false; m * m];
        for s in 0..m {
            let row = &mut dist[s * m..(s + 1) * m];
            let prow = &mut parity[s * m..(s + 1) * m];
            row[s] = 0;
            let mut heap = BinaryHeap::new();
            heap.push(Reverse((0i64, s)));
            while let Some(Reverse((d, u))) = heap.pop() {
                if d > row[u] {
                    continue;
                }
                for &(v, w, o) in &adj[u] {
                    let nd = d + w;
                    if nd < row[v] {
                        row[v] = nd;
                        prow[v] = prow[u] ^ o;
                        heap.push(Reverse((nd, v)));
                    }
                }
            }
        }
        MatchingDecoder { n, dist, parity }
    }

    fn d(&self, a: usize, b: usize) -> (i64, bool) {
        let i = a * (self.n + 1) + b;
        (self.dist[i], self.parity[i])
    }

    /// Predicted observable flip for the given defect nodes.
    pub fn decode(&self, defects: &[usize]) -> bool {
        match defects.len() {
            0 => false,
            k if k <= EXACT_LIMIT => self.decode_exact(defects),
            _ => self.decode_blossom(defects),
        }
    }

    fn decode_exact(&self, defects: &[usize]) -> bool {
        let k = defects.len();
        let b = self.n;
        let full = (1usize << k) - 1;
        // best[mask] = cost and parity of matching the defects in `mask`.
        let mut best = vec![(INF, false); 1 << k];
        best[0] = (0, false);
        for mask in 1..=full {
            let i = mask.trailing_zeros() as usize;
            let rest = mask & !(1 << i);
            let (cb, pb) = best[rest];
            let (db, ob) = self.d(defects[i], b);
            let mut cand = (cb.saturating_add(db), pb ^ ob);
            let mut r = rest;
            while r != 0 {
                let j = r.trailing_zeros() as usize;
                r &= r - 1;
                let (cr, pr) = best[rest & !(1 << j)];
                let (dij, oij) = self.d(defects[i], defects[j]);
                let c = cr.saturating_add(dij);
                if c < cand.0 {
                    cand = (c, pr ^ oij);
                }
            }
            best[mask] = cand;
        }
        best[full].1
    }

    fn decode_blossom(&self, defects: &[usize]) -> bool {
        let k = defects.len();
        let b = self.n;
        let bd: Vec<(i64, bool)> = defects.iter().map(|&u| self.d(u, b)).collect();
        let mut edges = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let (dij, _) = self.d(defects[i], defects[j]);
                if dij < bd[i].0.saturating_add(bd[j].0) {
                    edges.push((i, j, -dij));
                }
                edges.push((k + i, k + j, 0));
            }
            edges.push((i, k + i, -bd[i].0));
        }
        let mate = max_weight_matching(&edges, true);
        let mut parity = false;
        for i in 0..k {
            match mate[i] {
                Some(j) if j < k => {
                    if i < j {
                        parity ^= self.d(defects[i], defects[j]).1;
                    }
                }
                _ => parity ^= bd[i].1,
            }
        }
        parity
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::dem::Edge;

    /// Repetition-code chain 0-1-2-...-(n-1) with boundaries at both ends;
    /// the left boundary edge flips the observable.
    fn chain(n: usize) -> DecodingGraph {
        // Slightly uneven weights avoid ties between equally good matchings.
        let p = |i: usize| 0.01 * (1.0 + 0.013 * (i % 7) as f64);
        let mut edges = vec![Edge { a: 0, b: None, probability: p(n), observable: true }];
        for i in 0..n - 1 {
            edges.push(Edge { a: i, b: Some(i + 1), probability: p(i), observable: false });
        }
        edges.push(Edge { a: n - 1, b: None, probability: p(n + 1), observable: false });
        DecodingGraph { detectors: (0..n).collect(), node_of: (0..n).map(Some).collect(), edges }
    }

    #[test]
    fn chain_decisions() {
        let dec = MatchingDecoder::new(&chain(9));
        assert!(!dec.decode(&[]));
        assert!(dec.decode(&[1]));
        assert!(!dec.decode(&[7]));
        assert!(!dec.decode(&[3, 4]));
        assert!(dec.decode(&[0, 5]));
    }

    #[test]
    fn exact_and_blossom_agree() {
        use rand::seq::index::sample;
        use rand::SeedableRng;
        let n = 60;
        let dec = MatchingDecoder::new(&chain(n));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let k = 1 + (rand::Rng::random_range(&mut rng, 0..EXACT_LIMIT));
            let mut defects = sample(&mut rng, n, k).into_vec();
            defects.sort();
            assert_eq!(dec.decode_exact(&defects), dec.decode_blossom(&defects), "{defects:?}");
        }
    }
}
