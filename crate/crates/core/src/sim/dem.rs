//! Single-fault enumeration and the matching graph built from it.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cycle::{CycleCircuit, DetectorKind, Instr, NoiseClass};
use super::frame::{inject, Frame, Injection, LANES};
use super::NoiseModel;

/// One Pauli outcome of one noisy instruction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaultLocation {
    pub injection: Injection,
    pub probability: f64,
}

/// Every fault with nonzero probability, in instruction order.
pub fn fault_locations(c: &CycleCircuit, noise: &NoiseModel) -> Vec<FaultLocation> {
    let mut out = Vec::new();
    let mut push = |instr, paulis, probability: f64| {
        if probability > 0.0 {
            out.push(FaultLocation { injection: Injection { instr, paulis }, probability });
        }
    };
    for (i, ins) in c.instrs.iter().enumerate() {
        match *ins {
            Instr::Gate(_) => {}
            Instr::XFlip(q) => push(i, [(q, 1), (q, 0)], noise.p_gate),
            Instr::Dep1(q, class) => {
                let p = match class {
                    NoiseClass::Gate => noise.p_gate,
                    NoiseClass::Idle => noise.p_idle,
                };
                for code in 1..=3u8 {
                    push(i, [(q, code), (q, 0)], p / 3.0);
                }
            }
            Instr::Dep2(a, b) => {
                for r in 1..16u8 {
                    push(i, [(a, r & 3), (b, r >> 2)], noise.p_gate / 15.0);
                }
            }
        }
    }
    out
}

/// Detectors flipped by a fault (indices into the detector model) and
/// whether it flips the logical observable.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub detectors: Vec<usize>,
    pub observable: bool,
}

/// Reads per-lane signatures out of a simulated frame.
pub fn frame_signatures(c: &CycleCircuit, f: &Frame, lanes: usize) -> Vec<Signature> {
    let mut out = vec![Signature::default(); lanes];
    for (k, det) in c.model.detectors.iter().enumerate() {
        let mut m = f.parity(&det.records);
        while m != 0 {
            let lane = m.trailing_zeros() as usize;
            m &= m - 1;
            if lane < lanes {
                out[lane].detectors.push(k);
            }
        }
    }
    let obs = f.parity(&c.model.observable);
    for (lane, s) in out.iter_mut().enumerate() {
        s.observable = obs >> lane & 1 == 1;
    }
    out
}

/// Signatures of the given faults, simulated 64 at a time.
pub fn fault_signatures(c: &CycleCircuit, faults: &[Injection]) -> Vec<Signature> {
    faults
        .par_chunks(LANES)
        .flat_map_iter(|chunk| frame_signatures(c, &inject(c, chunk), chunk.len()))
        .collect()
}

/// XOR combination of two independent mechanisms.
fn combine(p: f64, q: f64) -> f64 {
    p * (1.0 - q) + q * (1.0 - p)
}

/// Edge between two detector nodes, or from one node to the boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: usize,
    pub b: Option<usize>,
    pub probability: f64,
    pub observable: bool,
}

impl Edge {
    pub fn weight(&self) -> f64 {
        let p = self.probability.clamp(1e-300, 0.5);
        ((1.0 - p) / p).ln()
    }
}

/// Matching graph over the detectors relevant to the Z observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodingGraph {
    /// Detector index of each node.
    pub detectors: Vec<usize>,
    /// Node of each detector, if it takes part in decoding.
    pub node_of: Vec<Option<usize>>,
    pub edges: Vec<Edge>,
}

type Key = (usize, Option<usize>);

fn key(nodes: &[usize]) -> Key {
    match *nodes {
        [a] => (a, None),
        [a, b] => (a.min(b), Some(a.max(b))),
        _ => unreachable!("primitive mechanisms touch one or two nodes"),
    }
}

/// Probabilities of a node pair (or node-boundary) mechanism, split by
/// observable effect.
type Primitives = BTreeMap<Key, [f64; 2]>;

/// Splits `rest` into primitive parts whose observable effects XOR to
/// `target` when possible; otherwise returns any split into primitives.
fn decompose(rest: &[usize], prims: &Primitives, target: bool) -> Option<Vec<(Key, bool)>> {
    fn rec(
        rest: &[usize],
        prims: &Primitives,
        acc: &mut Vec<(Key, bool)>,
        parity: bool,
        target: bool,
        fallback: &mut Option<Vec<(Key, bool)>>,
    ) -> bool {
        let Some((&first, tail)) = rest.split_first() else {
            if parity == target {
                return true;
            }
            if fallback.is_none() {
                *fallback = Some(acc.clone());
            }
            return false;
        };
        let mut options: Vec<(Key, Vec<usize>)> = Vec::new();
        for (i, &other) in tail.iter().enumerate() {
            let k = key(&[first, other]);
            if prims.contains_key(&k) {
                let mut r = tail.to_vec();
                r.remove(i);
                options.push((k, r));
            }
        }
        if prims.contains_key(&(first, None)) {
            options.push(((first, None), tail.to_vec()));
        }
        for (k, r) in options {
            let ps = prims[&k];
            for obs in [false, true] {
                if ps[obs as usize] <= 0.0 {
                    continue;
                }
                acc.push((k, obs));
                if rec(&r, prims, acc, parity ^ obs, target, fallback) {
                    return true;
                }
                acc.pop();
            }
        }
        false
    }
    let mut acc = Vec::new();
    let mut fallback = None;
    if rec(rest, prims, &mut acc, false, target, &mut fallback) {
        Some(acc)
    } else {
        fallback
    }
}

impl DecodingGraph {
    pub fn num_nodes(&self) -> usize {
        self.detectors.len()
    }

    /// Node ids of the decoding detectors in a full-model signature.
    pub fn defects(&self, detectors: &[usize]) -> Vec<usize> {
        detectors.iter().filter_map(|&k| self.node_of[k]).collect()
    }

    /// Enumerates all single faults of `c` under `noise` and reduces them to
    /// a graph with at most two nodes per mechanism.
    pub fn build(c: &CycleCircuit, noise: &NoiseModel) -> Self {
        let mut detectors = Vec::new();
        let mut node_of = vec![None; c.model.detectors.len()];
        for (k, d) in c.model.detectors.iter().enumerate() {
            if d.z_class {
                node_of[k] = Some(detectors.len());
                detectors.push(k);
            }
        }
        let faults = fault_locations(c, noise);
        let injections: Vec<Injection> = faults.iter().map(|f| f.injection).collect();
        let sigs = fault_signatures(c, &injections);

        let mut merged: BTreeMap<(Vec<usize>, bool), f64> = BTreeMap::new();
        for (f, s) in faults.iter().zip(sigs) {
            let nodes: Vec<usize> = s.detectors.iter().filter_map(|&k| node_of[k]).collect();
            if nodes.is_empty() && !s.observable {
                continue;
            }
            let e = merged.entry((nodes, s.observable)).or_insert(0.0);
            *e = combine(*e, f.probability);
        }

        let mut prims: Primitives = BTreeMap::new();
        let mut hyper = Vec::new();
        for ((nodes, obs), p) in merged {
            match nodes.len() {
                // Undetectable logical flips cannot be corrected by matching.
                0 => {}
                1 | 2 => {
                    let slot = &mut prims.entry(key(&nodes)).or_insert([0.0; 2])[obs as usize];
                    *slot = combine(*slot, p);
                }
                _ => hyper.push((nodes, obs, p)),
            }
        }
        let is_flag = |n: usize| matches!(c.model.detectors[detectors[n]].kind, DetectorKind::Flag { .. });
        for (nodes, obs, p) in hyper {
            // A flagged hook: flags go to the boundary and the data error
            // they announce becomes one direct edge.
            let (flags, rest): (Vec<usize>, Vec<usize>) = nodes.iter().partition(|&&n| is_flag(n));
            let flagged = (!flags.is_empty() && !rest.is_empty() && rest.len() <= 2).then(|| {
                let mut parts: Vec<(Key, bool)> = flags.iter().map(|&f| ((f, None), false)).collect();
                parts.push((key(&rest), obs));
                parts
            });
            let parts = flagged.or_else(|| decompose(&nodes, &prims, obs)).unwrap_or_else(|| {
                let mut parts: Vec<(Key, bool)> = nodes.chunks(2).map(|c| (key(c), false)).collect();
                parts[0].1 = obs;
                parts
            });
            for (k, o) in parts {
                let slot = &mut prims.entry(k).or_insert([0.0; 2])[o as usize];
                *slot = combine(*slot, p);
            }
        }

        let edges = prims
            .into_iter()
            .map(|((a, b), [p0, p1])| Edge { a, b, probability: p0.max(p1), observable: p1 > p0 })
            .collect();
        DecodingGraph { detectors, node_of, edges }
    }
}
