//! Whole-experiment circuit: `rounds` repetitions of the scheduled cycle on
//! an encoded logical |0>, then a noiseless transversal Z readout.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::allocate::{DataLayout, StabType};
use crate::arch::QubitId;
use crate::circuit::{circuit_for, Gate, MeasurementCircuit};
use crate::error::{Error, Result};
use crate::schedule::{Schedule, Task};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseClass {
    Gate,
    Idle,
}

/// Gate or noise channel in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Instr {
    Gate(Gate),
    /// X with probability `p_gate`.
    XFlip(QubitId),
    /// Uniform X/Y/Z with total probability `p_gate` or `p_idle`.
    Dep1(QubitId, NoiseClass),
    /// One of the 15 non-identity two-qubit Paulis with total `p_gate`.
    Dep2(QubitId, QubitId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectorKind {
    Syndrome { stabilizer: usize, round: usize },
    Flag { stabilizer: usize, round: usize, qubit: QubitId },
    Final { stabilizer: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Detector {
    pub kind: DetectorKind,
    /// Measurement records whose parity forms the detector.
    pub records: Vec<usize>,
    /// Sensitive to X-type data errors, i.e. relevant to the Z observable.
    pub z_class: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub detectors: Vec<Detector>,
    /// Records of the logical Z readout.
    pub observable: Vec<usize>,
}

impl DetectorModel {
    pub fn syndrome_detector_count(&self) -> usize {
        self.detectors
            .iter()
            .filter(|d| matches!(d.kind, DetectorKind::Syndrome { .. }))
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleCircuit {
    pub num_qubits: usize,
    pub rounds: usize,
    /// Noiseless gate layers, including the final readout layer.
    pub layers: Vec<Vec<Gate>>,
    pub instrs: Vec<Instr>,
    pub num_measurements: usize,
    pub model: DetectorModel,
}

/// One partition laid out with aligned data slots.
struct Frame {
    layers: Vec<Vec<Gate>>,
    /// Layers (after dropping empty ones) during which each ancilla is live.
    live: Vec<(QubitId, usize, usize)>,
    /// Which stabilizer and role each measured qubit belongs to.
    owner: BTreeMap<QubitId, (usize, bool)>,
}

fn local_sequence(c: &MeasurementCircuit) -> (Vec<Vec<Gate>>, usize) {
    let p = &c.phases;
    let mut seq = vec![p.reset.clone()];
    if !p.pre.is_empty() {
        seq.push(p.pre.clone());
    }
    seq.extend(p.forward.iter().cloned());
    let data_start = seq.len();
    seq.extend(p.data.iter().cloned());
    seq.extend(p.reverse.iter().cloned());
    if !p.post.is_empty() {
        seq.push(p.post.clone());
    }
    seq.push(p.measure.clone());
    (seq, data_start)
}

fn partition_frame(circuits: &[(usize, MeasurementCircuit)]) -> Frame {
    let seqs: Vec<(Vec<Vec<Gate>>, usize)> = circuits.iter().map(|(_, c)| local_sequence(c)).collect();
    let start = seqs.iter().map(|s| s.1).max().unwrap_or(0);
    let len = seqs.iter().map(|(seq, ds)| start - ds + seq.len()).max().unwrap_or(0);
    let mut layers = vec![Vec::new(); len];
    let mut spans = Vec::new();
    let mut owner = BTreeMap::new();
    for ((stab, c), (seq, ds)) in circuits.iter().zip(&seqs) {
        let shift = start - ds;
        for (i, l) in seq.iter().enumerate() {
            layers[shift + i].extend(l.iter().copied());
        }
        for q in c.tree.bridge_nodes() {
            spans.push((q, shift, shift + seq.len()));
            owner.insert(q, (*stab, q == c.syndrome_qubit()));
        }
    }
    // Drop layers where nothing happens and remap the live spans.
    let keep: Vec<usize> = (0..len).filter(|&t| !layers[t].is_empty()).collect();
    let remap = |t: usize| keep.iter().position(|&k| k >= t).unwrap_or(keep.len());
    let live = spans.into_iter().map(|(q, a, b)| (q, remap(a), remap(b))).collect();
    let layers = keep.into_iter().map(|t| std::mem::take(&mut layers[t])).collect();
    Frame { layers, live, owner }
}

/// Builds the memory experiment for a scheduled layout.
pub fn build_cycle_circuit(
    layout: &DataLayout,
    num_qubits: usize,
    tasks: &[Task],
    schedule: &Schedule,
    rounds: usize,
) -> Result<CycleCircuit> {
    if rounds == 0 {
        return Err(Error::InvalidArgument("at least one round is required".into()));
    }
    schedule.validate(tasks).map_err(|e| Error::Validation(vec![e]))?;
    let rects = &layout.syndrome_rects;
    let data: Vec<QubitId> = layout.data_qubits();

    let mut frames = Vec::new();
    for part in &schedule.partitions {
        let circuits = part
            .iter()
            .map(|e| {
                let id = tasks[e.task].id;
                circuit_for(&rects[id], e.choice).map(|c| (id, c))
            })
            .collect::<Result<Vec<_>>>()?;
        frames.push(partition_frame(&circuits));
    }

    let mut layers = Vec::new();
    let mut instrs = Vec::new();
    let mut nmeas = 0usize;
    let mut syndrome: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut detectors = Vec::new();

    for round in 0..rounds {
        for frame in &frames {
            for (t, layer) in frame.layers.iter().enumerate() {
                let mut touched = BTreeSet::new();
                for g in layer {
                    touched.extend(g.qubits());
                    match *g {
                        Gate::Reset(q) => {
                            instrs.push(Instr::Gate(*g));
                            instrs.push(Instr::XFlip(q));
                        }
                        Gate::H(q) => {
                            instrs.push(Instr::Gate(*g));
                            instrs.push(Instr::Dep1(q, NoiseClass::Gate));
                        }
                        Gate::Cx(c, tq) => {
                            instrs.push(Instr::Gate(*g));
                            instrs.push(Instr::Dep2(c, tq));
                        }
                        Gate::Measure(q) => {
                            instrs.push(Instr::XFlip(q));
                            instrs.push(Instr::Gate(*g));
                            let rec = nmeas;
                            nmeas += 1;
                            let (stab, is_root) = frame.owner[&q];
                            if is_root {
                                syndrome.insert((stab, round), rec);
                            } else {
                                detectors.push(Detector {
                                    kind: DetectorKind::Flag { stabilizer: stab, round, qubit: q },
                                    records: vec![rec],
                                    z_class: rects[stab].stab_type == StabType::X,
                                });
                            }
                        }
                    }
                }
                let live = frame.live.iter().filter(|&&(_, a, b)| a <= t && t < b).map(|&(q, _, _)| q);
                let idle: BTreeSet<QubitId> =
                    data.iter().copied().chain(live).filter(|q| !touched.contains(q)).collect();
                for q in idle {
                    instrs.push(Instr::Dep1(q, NoiseClass::Idle));
                }
                layers.push(layer.clone());
            }
        }
        for r in rects {
            let mut records = vec![syndrome[&(r.id, round)]];
            if round > 0 {
                records.push(syndrome[&(r.id, round - 1)]);
            }
            detectors.push(Detector {
                kind: DetectorKind::Syndrome { stabilizer: r.id, round },
                records,
                z_class: r.stab_type == StabType::Z,
            });
        }
    }

    // Noiseless readout of every data qubit.
    let mut readout = BTreeMap::new();
    let final_layer: Vec<Gate> = data.iter().map(|&q| Gate::Measure(q)).collect();
    for g in &final_layer {
        instrs.push(Instr::Gate(*g));
        if let Gate::Measure(q) = *g {
            readout.insert(q, nmeas);
            nmeas += 1;
        }
    }
    layers.push(final_layer);
    for r in rects.iter().filter(|r| r.stab_type == StabType::Z) {
        let mut records: Vec<usize> = r.data().iter().map(|q| readout[q]).collect();
        records.push(syndrome[&(r.id, rounds - 1)]);
        detectors.push(Detector { kind: DetectorKind::Final { stabilizer: r.id }, records, z_class: true });
    }
    let observable = layout.logical_z_support().iter().map(|q| readout[q]).collect();

    Ok(CycleCircuit {
        num_qubits,
        rounds,
        layers,
        instrs,
        num_measurements: nmeas,
        model: DetectorModel { detectors, observable },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocate::AllocationMode;
    use crate::arch::Architecture;
    use crate::driver::synth;

    #[test]
    fn detector_counts() {
        let s = synth(Architecture::Square, 3, AllocationMode::Pair3).unwrap();
        for rounds in [1, 3] {
            let c = s.cycle_circuit(rounds).unwrap();
            assert_eq!(c.model.syndrome_detector_count(), 8 * rounds);
            let finals = c.model.detectors.iter().filter(|d| matches!(d.kind, DetectorKind::Final { .. })).count();
            assert_eq!(finals, 4);
            assert_eq!(c.model.observable.len(), 3);
            let readout = c.layers.last().unwrap();
            assert_eq!(readout.len(), 9);
            assert!(readout.iter().all(|g| matches!(g, Gate::Measure(_))));
        }
    }

    #[test]
    fn rounds_repeat_the_cycle() {
        let s = synth(Architecture::Square, 3, AllocationMode::Pair3).unwrap();
        let one = s.cycle_circuit(1).unwrap();
        let two = s.cycle_circuit(2).unwrap();
        let per_round = one.layers.len() - 1;
        assert_eq!(per_round, s.report.total_cycle_time);
        assert_eq!(two.layers.len(), 2 * per_round + 1);
        assert_eq!(two.layers[..per_round], two.layers[per_round..2 * per_round]);
    }

    #[test]
    fn zero_rounds_rejected() {
        let s = synth(Architecture::Square, 3, AllocationMode::Pair3).unwrap();
        assert!(s.cycle_circuit(0).is_err());
    }

    #[test]
    fn noise_follows_its_gate() {
        let s = synth(Architecture::Square, 3, AllocationMode::Center4).unwrap();
        let c = s.cycle_circuit(1).unwrap();
        let readout_start = c.instrs.len() - c.layers.last().unwrap().len();
        for (i, w) in c.instrs.windows(2).enumerate() {
            match w[0] {
                Instr::Gate(Gate::Cx(a, b)) => assert_eq!(w[1], Instr::Dep2(a, b)),
                Instr::Gate(Gate::H(q)) => assert_eq!(w[1], Instr::Dep1(q, NoiseClass::Gate)),
                Instr::Gate(Gate::Reset(q)) => assert_eq!(w[1], Instr::XFlip(q)),
                _ => {}
            }
            if let Instr::Gate(Gate::Measure(q)) = w[1] {
                if i + 1 < readout_start {
                    assert_eq!(w[0], Instr::XFlip(q));
                }
            }
        }
        assert!(c.instrs[readout_start..].iter().all(|i| matches!(i, Instr::Gate(Gate::Measure(_)))));
    }
}
