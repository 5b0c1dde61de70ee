use std::collections::BTreeSet;

use proptest::prelude::*;
use surfweave::allocate::{AllocationMode, StabType};
use surfweave::arch::{Architecture, QubitId};
use surfweave::driver::synth;
use surfweave::schedule::{init_schedule, refine, Candidate, Task, DEFAULT_K};

fn task(id: usize, t: StabType, depth: usize, anc: &[QubitId]) -> Task {
    Task {
        id,
        stab_type: t,
        candidates: vec![Candidate { ancillas: anc.iter().copied().collect(), depth, cnot_count: depth - 4 }],
    }
}

fn sorted(parts: Vec<Vec<usize>>) -> Vec<BTreeSet<usize>> {
    parts.into_iter().map(|p| p.into_iter().collect()).collect()
}

/// Six stabilizers: X = {s1, s4, s5}, Z = {s2, s3, s6}, with tree conflicts
/// s2-s4, s4-s6 and s3-s1.
fn walkthrough() -> Vec<Task> {
    vec![
        task(1, StabType::X, 12, &[1, 2]),
        task(2, StabType::Z, 12, &[7, 3]),
        task(3, StabType::Z, 10, &[1, 9]),
        task(4, StabType::X, 10, &[3, 4]),
        task(5, StabType::X, 12, &[5, 6]),
        task(6, StabType::Z, 10, &[4, 8]),
    ]
}

#[test]
fn walkthrough_partitions() {
    let tasks = walkthrough();
    let init = init_schedule(&tasks);
    assert_eq!(sorted(init.ids(&tasks)), vec![BTreeSet::from([1, 4, 5]), BTreeSet::from([2, 3, 6])]);
    assert_eq!(init.total_cycle_time(&tasks), 24);

    let s = refine(&init, &tasks, DEFAULT_K);
    s.validate(&tasks).unwrap();
    assert_eq!(sorted(s.ids(&tasks)), vec![BTreeSet::from([1, 2, 5, 6]), BTreeSet::from([3, 4])]);
    assert_eq!(s.total_cycle_time(&tasks), 22);
    assert_eq!(s.cnot_count(&tasks), init.cnot_count(&tasks));
}

/// Two X and two Z faces where only the long X and the short Z trees touch:
/// grouping the two long circuits together beats the plain X/Z split.
#[test]
fn grouping_long_circuits_saves_two_steps() {
    let tasks = vec![
        task(0, StabType::X, 10, &[1, 2]),
        task(1, StabType::X, 8, &[3]),
        task(2, StabType::Z, 10, &[4, 5]),
        task(3, StabType::Z, 8, &[2]),
    ];
    let init = init_schedule(&tasks);
    assert_eq!(init.total_cycle_time(&tasks), 20);
    let s = refine(&init, &tasks, DEFAULT_K);
    s.validate(&tasks).unwrap();
    assert_eq!(s.total_cycle_time(&tasks), 18);
}

#[test]
fn reselection_avoids_a_cascade() {
    let mut tasks = vec![
        task(0, StabType::X, 12, &[1, 2]),
        task(1, StabType::Z, 12, &[2, 3]),
        task(2, StabType::Z, 8, &[9]),
    ];
    tasks[1].candidates.push(Candidate { ancillas: BTreeSet::from([3, 4]), depth: 12, cnot_count: 8 });
    let s = refine(&init_schedule(&tasks), &tasks, DEFAULT_K);
    s.validate(&tasks).unwrap();
    assert_eq!(s.total_cycle_time(&tasks), 12);
}

#[test]
fn layouts_schedule_every_stabilizer_once() {
    for (arch, mode) in [
        (Architecture::Square, AllocationMode::Pair3),
        (Architecture::Square, AllocationMode::Center4),
        (Architecture::HeavySquare, AllocationMode::Pair3),
        (Architecture::Hexagon, AllocationMode::Pair3),
        (Architecture::HeavyHexagon, AllocationMode::Pair3),
    ] {
        let s = synth(arch, 3, mode).unwrap();
        s.schedule.validate(&s.tasks).unwrap();
        let init = init_schedule(&s.tasks);
        assert!(s.schedule.total_cycle_time(&s.tasks) <= init.total_cycle_time(&s.tasks), "{arch}");
        let per_part: usize = (0..s.schedule.partitions.len()).map(|i| s.schedule.partition_time(&s.tasks, i)).sum();
        assert_eq!(per_part, s.report.total_cycle_time);
    }
}

#[test]
fn plain_syndrome_qubits_give_eight_steps() {
    for d in [3, 5] {
        let s = synth(Architecture::Square, d, AllocationMode::Center4).unwrap();
        assert_eq!(s.report.total_cycle_time, 8, "d={d}");
    }
}

fn arb_tasks() -> impl Strategy<Value = Vec<Task>> {
    let one = (any::<bool>(), prop::collection::vec((4usize..9, prop::collection::btree_set(0usize..24, 1..4)), 1..4));
    prop::collection::vec(one, 1..12).prop_map(|ts| {
        ts.into_iter()
            .enumerate()
            .map(|(id, (x, cands))| Task {
                id,
                stab_type: if x { StabType::X } else { StabType::Z },
                candidates: cands
                    .into_iter()
                    .map(|(half, ancillas)| Candidate { ancillas, depth: 2 * half, cnot_count: 2 * half - 4 })
                    .collect(),
            })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 200, ..ProptestConfig::default() })]

    #[test]
    fn refinement_never_lengthens_the_cycle(tasks in arb_tasks(), k in 1usize..6) {
        let init = init_schedule(&tasks);
        prop_assert!(init.validate(&tasks).is_ok());
        let s = refine(&init, &tasks, k);
        prop_assert!(s.validate(&tasks).is_ok());
        prop_assert!(s.total_cycle_time(&tasks) <= init.total_cycle_time(&tasks));
    }
}
