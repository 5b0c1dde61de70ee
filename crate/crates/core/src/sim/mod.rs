//! Circuit-level noise simulation of the memory experiment and matching
//! decoding.

pub mod blossom;
pub mod cycle;
pub mod decoder;
pub mod dem;
pub mod frame;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cycle::{build_cycle_circuit, CycleCircuit, Detector, DetectorKind, DetectorModel, Instr, NoiseClass};
pub use decoder::MatchingDecoder;
pub use dem::{DecodingGraph, Edge, FaultLocation, Signature};

pub const DEFAULT_P_IDLE: f64 = 0.0002;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub p_gate: f64,
    pub p_idle: f64,
}

impl NoiseModel {
    pub fn new(p_gate: f64, p_idle: f64) -> Result<Self> {
        for (name, p) in [("p_gate", p_gate), ("p_idle", p_idle)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("{name} = {p} is not a probability")));
            }
        }
        Ok(NoiseModel { p_gate, p_idle })
    }

    /// Gate noise `p_gate` with the default idle rate.
    pub fn gate(p_gate: f64) -> Result<Self> {
        Self::new(p_gate, DEFAULT_P_IDLE)
    }

    pub fn noiseless() -> Self {
        NoiseModel { p_gate: 0.0, p_idle: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub shots: u64,
    pub logical_errors: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SimResult {
    pub fn new(shots: u64, logical_errors: u64) -> Self {
        let (ci_low, ci_high) = wilson_interval(logical_errors, shots);
        let rate = if shots == 0 { 0.0 } else { logical_errors as f64 / shots as f64 };
        SimResult { shots, logical_errors, rate, ci_low, ci_high }
    }
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + Z * Z / n;
    let centre = (p + Z * Z / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// A cycle circuit together with its decoder.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub circuit: CycleCircuit,
    pub graph: DecodingGraph,
    pub decoder: MatchingDecoder,
    pub noise: NoiseModel,
}

impl Experiment {
    /// Prepares the decoder for `noise`. With zero noise the graph is built
    /// from a nominal rate so that weights stay finite.
    pub fn new(circuit: CycleCircuit, noise: NoiseModel) -> Self {
        let weights = if noise.p_gate > 0.0 { noise } else { NoiseModel { p_gate: 1e-3, p_idle: DEFAULT_P_IDLE } };
        let graph = DecodingGraph::build(&circuit, &weights);
        let decoder = MatchingDecoder::new(&graph);
        Experiment { circuit, graph, decoder, noise }
    }

    /// Whether decoding the signature gets the observable wrong.
    pub fn is_logical_error(&self, s: &Signature) -> bool {
        self.decoder.decode(&self.graph.defects(&s.detectors)) != s.observable
    }

    /// Logical errors among the shots of batch `index`.
    fn batch(&self, seed: u64, index: u64, lanes: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let f = frame::sample_batch(&self.circuit, &self.noise, &mut rng);
        dem::frame_signatures(&self.circuit, &f, lanes)
            .iter()
            .filter(|s| self.is_logical_error(s))
            .count() as u64
    }

    /// Monte-Carlo logical error rate. Batches of 64 shots draw from
    /// independent streams, so the count does not depend on thread timing.
    pub fn run(&self, shots: u64, seed: u64) -> SimResult {
        let lanes = frame::LANES as u64;
        let batches = shots.div_ceil(lanes);
        let errors = (0..batches)
            .into_par_iter()
            .map(|b| {
                let n = (shots - b * lanes).min(lanes) as usize;
                self.batch(seed, b, n)
            })
            .sum();
        SimResult::new(shots, errors)
    }
}

/// Builds the experiment and runs `shots` noisy shots.
pub fn run_shots(circuit: &CycleCircuit, noise: &NoiseModel, shots: u64, seed: u64) -> Result<SimResult> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    Ok(Experiment::new(circuit.clone(), *noise).run(shots, seed))
}

/// Logical error curve of one code distance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub distance: usize,
    /// `(p_gate, result)` in increasing `p_gate`.
    pub points: Vec<(f64, SimResult)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum ThresholdEstimate {
    Crossing { p: f64, low: f64, high: f64 },
    NoCrossing,
}

impl ThresholdEstimate {
    pub fn value(&self) -> Option<f64> {
        match *self {
            ThresholdEstimate::Crossing { p, .. } => Some(p),
            ThresholdEstimate::NoCrossing => None,
        }
    }
}

/// Rates with zero counts are replaced by half a count so that logs stay
/// finite.
fn log_rate(r: &SimResult, pick: impl Fn(&SimResult) -> f64) -> f64 {
    let floor = 0.5 / r.shots.max(1) as f64;
    pick(r).max(floor).ln()
}

/// First p where `larger - smaller` turns from negative to non-negative,
/// interpolated linearly in log-log coordinates.
fn crossing(ps: &[f64], small: &[f64], large: &[f64]) -> Option<f64> {
    let diff: Vec<f64> = small.iter().zip(large).map(|(s, l)| l - s).collect();
    for i in 1..ps.len() {
        if diff[i - 1] < 0.0 && diff[i] >= 0.0 {
            let (x0, x1) = (ps[i - 1].ln(), ps[i].ln());
            let t = diff[i - 1] / (diff[i - 1] - diff[i]);
            return Some((x0 + t * (x1 - x0)).exp());
        }
    }
    None
}

/// Crossing of the logical error curves of a smaller and a larger distance,
/// sampled at the same `p_gate` values. The interval comes from crossing the
/// Wilson bounds of the two curves against each other.
pub fn estimate_threshold(smaller: &Curve, larger: &Curve) -> Result<ThresholdEstimate> {
    let ps: Vec<f64> = smaller.points.iter().map(|p| p.0).collect();
    if ps.len() != larger.points.len() || larger.points.iter().zip(&ps).any(|(a, &b)| a.0 != b) {
        return Err(Error::InvalidArgument("curves must share their p_gate grid".into()));
    }
    if ps.iter().any(|&p| p <= 0.0) {
        return Err(Error::InvalidArgument("threshold estimation needs p_gate > 0".into()));
    }
    let series = |c: &Curve, f: fn(&SimResult) -> f64| -> Vec<f64> { c.points.iter().map(|(_, r)| log_rate(r, f)).collect() };
    let Some(p) = crossing(&ps, &series(smaller, |r| r.rate), &series(larger, |r| r.rate)) else {
        return Ok(ThresholdEstimate::NoCrossing);
    };
    let low = crossing(&ps, &series(smaller, |r| r.ci_low), &series(larger, |r| r.ci_high)).unwrap_or(ps[0]);
    let high = crossing(&ps, &series(smaller, |r| r.ci_high), &series(larger, |r| r.ci_low)).unwrap_or(ps[ps.len() - 1]);
    Ok(ThresholdEstimate::Crossing { p, low: low.min(p), high: high.max(p) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_model_validation() {
        assert!(NoiseModel::new(0.1, 0.0).is_ok());
        assert!(NoiseModel::new(-0.1, 0.0).is_err());
        assert!(NoiseModel::new(0.1, 1.5).is_err());
        assert_eq!(NoiseModel::gate(0.01).unwrap().p_idle, 0.0002);
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100);
        assert!(lo.abs() < 1e-12);
        assert!((hi - 0.036_993).abs() < 1e-5);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.403_832).abs() < 1e-5 && (hi - 0.596_168).abs() < 1e-5);
    }

    fn curve(distance: usize, rates: &[(f64, u64)]) -> Curve {
        Curve { distance, points: rates.iter().map(|&(p, k)| (p, SimResult::new(100_000, k))).collect() }
    }

    #[test]
    fn crossing_is_interpolated_in_log_log() {
        let small = curve(3, &[(0.001, 100), (0.01, 10_000)]);
        let large = curve(5, &[(0.001, 10), (0.01, 100_000)]);
        // log10 rates: small -3 -> -1, large -4 -> 0 across one decade; they
        // meet halfway.
        let est = estimate_threshold(&small, &large).unwrap();
        let p = est.value().unwrap();
        assert!((p - 0.001 * 10f64.sqrt()).abs() < 1e-9, "{p}");
        let ThresholdEstimate::Crossing { low, high, .. } = est else { unreachable!() };
        assert!(low <= p && p <= high);
    }

    #[test]
    fn below_threshold_sweep_reports_no_crossing() {
        let small = curve(3, &[(1e-4, 100), (1e-3, 1000)]);
        let large = curve(5, &[(1e-4, 10), (1e-3, 200)]);
        assert_eq!(estimate_threshold(&small, &large).unwrap(), ThresholdEstimate::NoCrossing);
    }
}
