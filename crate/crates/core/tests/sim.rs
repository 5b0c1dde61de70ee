use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use surfweave::allocate::{AllocationMode, StabType};
use surfweave::arch::Architecture;
use surfweave::circuit::Gate;
use surfweave::driver::{simulate, synth, Synthesis};
use surfweave::sim::dem::{fault_locations, fault_signatures, frame_signatures, Signature};
use surfweave::sim::frame::{inject, Injection};
use surfweave::sim::{DetectorKind, Experiment, Instr, NoiseClass, NoiseModel};

fn square(d: usize) -> Synthesis {
    synth(Architecture::Square, d, AllocationMode::Pair3).unwrap()
}

fn single(c: &surfweave::sim::CycleCircuit, f: Injection) -> Signature {
    frame_signatures(c, &inject(c, &[f]), 1).remove(0)
}

#[test]
fn early_data_flip_trips_its_two_z_checks() {
    let s = square(3);
    let c = s.cycle_circuit(3).unwrap();
    let centre = s.layout.data_qubit(1, 1).unwrap();
    let at = c.instrs.iter().position(|i| *i == Instr::Dep1(centre, NoiseClass::Idle)).unwrap();
    let sig = single(&c, Injection { instr: at, paulis: [(centre, 1), (centre, 0)] });
    let z_faces: Vec<usize> = s
        .layout
        .syndrome_rects
        .iter()
        .filter(|r| r.stab_type == StabType::Z && r.data().contains(&centre))
        .map(|r| r.id)
        .collect();
    assert_eq!(z_faces.len(), 2);
    let fired: Vec<DetectorKind> = sig.detectors.iter().map(|&k| c.model.detectors[k].kind).collect();
    let expect: Vec<DetectorKind> = z_faces.iter().map(|&id| DetectorKind::Syndrome { stabilizer: id, round: 0 }).collect();
    let mut fired_sorted = fired.clone();
    fired_sorted.sort_by_key(|k| format!("{k:?}"));
    let mut expect_sorted = expect.clone();
    expect_sorted.sort_by_key(|k| format!("{k:?}"));
    assert_eq!(fired_sorted, expect_sorted);
    assert!(!sig.observable, "centre qubit is off the logical Z row");
    assert!(!Experiment::new(c, NoiseModel::gate(1e-3).unwrap()).is_logical_error(&sig));
}

#[test]
fn logical_row_flip_is_corrected() {
    let s = square(3);
    let c = s.cycle_circuit(3).unwrap();
    let q = s.layout.logical_z_support()[1];
    let at = c.instrs.iter().position(|i| *i == Instr::Dep1(q, NoiseClass::Idle)).unwrap();
    let sig = single(&c, Injection { instr: at, paulis: [(q, 1), (q, 0)] });
    assert!(sig.observable);
    assert!(!Experiment::new(c, NoiseModel::gate(1e-3).unwrap()).is_logical_error(&sig));
}

#[test]
fn measurement_flip_trips_consecutive_rounds() {
    let s = square(3);
    let c = s.cycle_circuit(4).unwrap();
    let z = s.layout.syndrome_rects.iter().find(|r| r.stab_type == StabType::Z && r.weight() == 4).unwrap();
    let det = c
        .model
        .detectors
        .iter()
        .find(|d| d.kind == DetectorKind::Syndrome { stabilizer: z.id, round: 1 })
        .unwrap();
    let record = *det.records.iter().max().unwrap();
    let (at, root) = c
        .instrs
        .iter()
        .enumerate()
        .filter_map(|(k, i)| match i {
            Instr::Gate(Gate::Measure(q)) => Some((k, *q)),
            _ => None,
        })
        .nth(record)
        .unwrap();
    assert_eq!(c.instrs[at - 1], Instr::XFlip(root));
    let sig = single(&c, Injection { instr: at - 1, paulis: [(root, 1), (root, 0)] });
    let kinds: Vec<DetectorKind> = sig.detectors.iter().map(|&k| c.model.detectors[k].kind).collect();
    assert_eq!(
        kinds,
        vec![
            DetectorKind::Syndrome { stabilizer: z.id, round: 1 },
            DetectorKind::Syndrome { stabilizer: z.id, round: 2 }
        ]
    );
    assert!(!sig.observable);
}

#[test]
fn batched_injection_matches_one_at_a_time() {
    let s = square(3);
    let c = s.cycle_circuit(2).unwrap();
    let faults = fault_locations(&c, &NoiseModel::gate(1e-3).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let picks: Vec<Injection> = (0..100).map(|_| faults[rng.random_range(0..faults.len())].injection).collect();
    let batched = fault_signatures(&c, &picks);
    for (f, b) in picks.iter().zip(&batched) {
        assert_eq!(&single(&c, *f), b);
    }
}

#[test]
fn noiseless_runs_have_no_errors() {
    let s = square(3);
    let r = simulate(&s, NoiseModel::noiseless(), None, 640, 1).unwrap();
    assert_eq!(r.logical_errors, 0);
}

#[test]
fn seeded_runs_repeat() {
    let s = square(3);
    let noise = NoiseModel::gate(3e-3).unwrap();
    let a = simulate(&s, noise, None, 5000, 7).unwrap();
    let b = simulate(&s, noise, None, 5000, 7).unwrap();
    assert_eq!(a, b);
    assert!(a.ci_low <= a.rate && a.rate <= a.ci_high);
}

#[test]
fn more_noise_more_errors() {
    let s = square(3);
    let lo = simulate(&s, NoiseModel::gate(1e-3).unwrap(), None, 20_000, 3).unwrap();
    let hi = simulate(&s, NoiseModel::gate(1e-2).unwrap(), None, 20_000, 3).unwrap();
    assert!(lo.ci_high < hi.ci_low, "{lo:?} vs {hi:?}");
}

#[test]
fn zero_shots_rejected() {
    assert!(simulate(&square(3), NoiseModel::noiseless(), None, 0, 0).is_err());
}
