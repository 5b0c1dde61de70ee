//! Stabilizer measurement scheduling.
//!
//! Stabilizers start in an X set and a Z set. The refinement loop then pulls
//! the longest Z-side measurement into the longer set and cascades whatever
//! it collides with back and forth, re-selecting trees when that avoids a
//! collision.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::allocate::{DataLayout, StabType};
use crate::arch::QubitId;
use crate::bridge::BridgeTree;
use crate::circuit::{circuit_for, MeasurementCircuit};
use crate::error::Result;

/// Two trees can run in the same partition iff their ancillas are disjoint.
pub fn compatible_trees(t1: &BridgeTree, t2: &BridgeTree) -> bool {
    !t1.conflicts_with(t2)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Candidate {
    pub ancillas: BTreeSet<QubitId>,
    pub depth: usize,
    pub cnot_count: usize,
}

impl Candidate {
    pub fn of(c: &MeasurementCircuit) -> Self {
        Candidate {
            ancillas: c.tree.bridge_nodes().collect(),
            depth: c.depth(),
            cnot_count: c.cnot_count(),
        }
    }

    fn conflicts(&self, other: &Candidate) -> bool {
        !self.ancillas.is_disjoint(&other.ancillas)
    }
}

/// One stabilizer with its candidate measurements.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub id: usize,
    pub stab_type: StabType,
    pub candidates: Vec<Candidate>,
}

/// Builds the scheduling tasks of a layout, one candidate per tree.
pub fn tasks_from_layout(layout: &DataLayout) -> Result<Vec<Task>> {
    layout
        .syndrome_rects
        .iter()
        .map(|r| {
            let candidates = (0..r.trees.len())
                .map(|i| circuit_for(r, i).map(|c| Candidate::of(&c)))
                .collect::<Result<Vec<_>>>()?;
            Ok(Task { id: r.id, stab_type: r.stab_type, candidates })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Entry {
    /// Index into the task list.
    pub task: usize,
    /// Index into that task's candidates.
    pub choice: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub partitions: Vec<Vec<Entry>>,
}

fn cand<'a>(tasks: &'a [Task], e: &Entry) -> &'a Candidate {
    &tasks[e.task].candidates[e.choice]
}

fn exec(tasks: &[Task], e: &Entry) -> usize {
    cand(tasks, e).depth
}

fn set_time(tasks: &[Task], set: &[Entry]) -> usize {
    set.iter().map(|e| exec(tasks, e)).max().unwrap_or(0)
}

impl Schedule {
    pub fn partition_time(&self, tasks: &[Task], i: usize) -> usize {
        set_time(tasks, &self.partitions[i])
    }

    /// Sum over partitions of the deepest member circuit.
    pub fn total_cycle_time(&self, tasks: &[Task]) -> usize {
        (0..self.partitions.len()).map(|i| self.partition_time(tasks, i)).sum()
    }

    pub fn cnot_count(&self, tasks: &[Task]) -> usize {
        self.partitions.iter().flatten().map(|e| cand(tasks, e).cnot_count).sum()
    }

    /// Every task scheduled exactly once and no partition holds two
    /// overlapping trees.
    pub fn validate(&self, tasks: &[Task]) -> std::result::Result<(), String> {
        let mut seen = vec![false; tasks.len()];
        for p in &self.partitions {
            for e in p {
                if e.task >= tasks.len() || e.choice >= tasks[e.task].candidates.len() {
                    return Err(format!("entry {e:?} is out of range"));
                }
                if std::mem::replace(&mut seen[e.task], true) {
                    return Err(format!("task {} scheduled twice", tasks[e.task].id));
                }
            }
            for (i, a) in p.iter().enumerate() {
                for b in &p[i + 1..] {
                    if cand(tasks, a).conflicts(cand(tasks, b)) {
                        return Err(format!(
                            "stabilizers {} and {} share ancillas",
                            tasks[a.task].id, tasks[b.task].id
                        ));
                    }
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(format!("task {} is not scheduled", tasks[i].id)),
            None => Ok(()),
        }
    }

    /// Stabilizer ids per partition.
    pub fn ids(&self, tasks: &[Task]) -> Vec<Vec<usize>> {
        self.partitions
            .iter()
            .map(|p| p.iter().map(|e| tasks[e.task].id).collect())
            .collect()
    }
}

/// Places `e` into the first of `parts` where it conflicts with nothing,
/// opening a new partition when none fits.
fn first_fit(tasks: &[Task], parts: &mut Vec<Vec<Entry>>, e: Entry) {
    let c = cand(tasks, &e);
    match parts.iter_mut().find(|p| p.iter().all(|o| !cand(tasks, o).conflicts(c))) {
        Some(p) => p.push(e),
        None => parts.push(vec![e]),
    }
}

/// X set and Z set with first candidates, the longer one first. Stabilizers
/// whose trees overlap a same-type tree are split off into extra partitions.
pub fn init_schedule(tasks: &[Task]) -> Schedule {
    let mut sets = Vec::new();
    for t in [StabType::X, StabType::Z] {
        let mut parts: Vec<Vec<Entry>> = Vec::new();
        for (i, task) in tasks.iter().enumerate().filter(|(_, task)| task.stab_type == t) {
            debug_assert!(!task.candidates.is_empty());
            first_fit(tasks, &mut parts, Entry { task: i, choice: 0 });
        }
        sets.push(parts);
    }
    let mut z = sets.pop().expect("two sets");
    let mut x = sets.pop().expect("two sets");
    let time = |p: &Vec<Vec<Entry>>| p.first().map_or(0, |s| set_time(tasks, s));
    if time(&x) < time(&z) {
        std::mem::swap(&mut x, &mut z);
    }
    let mut partitions = Vec::new();
    let mut overflow = Vec::new();
    for mut parts in [x, z] {
        if !parts.is_empty() {
            partitions.push(parts.remove(0));
        }
        overflow.extend(parts);
    }
    partitions.extend(overflow);
    Schedule { partitions }
}

/// Chooses the candidate of `task` with the fewest collisions against `set`,
/// preferring the current choice, then shallower circuits.
fn reselect(tasks: &[Task], set: &[Entry], e: Entry) -> Entry {
    let hits = |choice: usize| {
        let c = &tasks[e.task].candidates[choice];
        set.iter().filter(|o| o.task != e.task && cand(tasks, o).conflicts(c)).count()
    };
    let best = (0..tasks[e.task].candidates.len())
        .min_by_key(|&ch| (hits(ch), ch != e.choice, tasks[e.task].candidates[ch].depth, ch))
        .unwrap_or(e.choice);
    Entry { choice: best, ..e }
}

fn sort_desc(tasks: &[Task], set: &mut [Entry]) {
    set.sort_by(|a, b| exec(tasks, b).cmp(&exec(tasks, a)).then(tasks[a.task].id.cmp(&tasks[b.task].id)));
}

enum Pass {
    Done,
    Stuck,
}

/// One refinement iteration on `(s1, s2)`; leaves them modified.
fn iteration(tasks: &[Task], s1: &mut Vec<Entry>, s2: &mut Vec<Entry>, k: usize) -> Pass {
    sort_desc(tasks, s2);
    let r2 = s2.remove(0);
    let mut swap_list = vec![r2];
    for i in 0..k {
        let s = if i % 2 == 0 { &mut *s1 } else { &mut *s2 };
        let mut next = Vec::new();
        for r in swap_list.drain(..) {
            let r = reselect(tasks, s, r);
            sort_desc(tasks, s);
            let mut kept = Vec::with_capacity(s.len() + 1);
            for r1 in s.drain(..) {
                if cand(tasks, &r1).conflicts(cand(tasks, &r)) {
                    if exec(tasks, &r1) > exec(tasks, &r) {
                        return Pass::Stuck;
                    }
                    next.push(r1);
                } else {
                    kept.push(r1);
                }
            }
            kept.push(r);
            *s = kept;
        }
        swap_list = next;
        if swap_list.is_empty() {
            return Pass::Done;
        }
    }
    Pass::Stuck
}

/// Refinement of the first two partitions, followed by an attempt to fold
/// any overflow partitions into earlier ones. An iteration is kept only if it
/// completes and the total cycle time does not grow.
pub fn refine(s: &Schedule, tasks: &[Task], k: usize) -> Schedule {
    let mut out = s.clone();
    if out.partitions.len() >= 2 {
        let limit = 4 * tasks.len() + 4;
        for _ in 0..limit {
            if out.partitions[1].is_empty() {
                break;
            }
            let before = out.clone();
            let (head, tail) = out.partitions.split_at_mut(1);
            let pass = iteration(tasks, &mut head[0], &mut tail[0], k);
            let worse = out.total_cycle_time(tasks) > before.total_cycle_time(tasks);
            if matches!(pass, Pass::Stuck) || worse {
                out = before;
                break;
            }
            if out.partitions[0].iter().collect::<BTreeSet<_>>() == before.partitions[0].iter().collect() {
                break;
            }
        }
    }
    fold_overflow(&mut out, tasks);
    out.partitions.retain(|p| !p.is_empty());
    for p in &mut out.partitions {
        p.sort_by_key(|e| tasks[e.task].id);
    }
    out
}

/// Moves entries of later partitions into earlier ones when some candidate
/// fits without lengthening the target partition.
fn fold_overflow(s: &mut Schedule, tasks: &[Task]) {
    for src in (1..s.partitions.len()).rev() {
        let entries = std::mem::take(&mut s.partitions[src]);
        let mut stay = Vec::new();
        'entry: for e in entries {
            for dst in 0..src {
                let limit = set_time(tasks, &s.partitions[dst]);
                for choice in 0..tasks[e.task].candidates.len() {
                    let c = &tasks[e.task].candidates[choice];
                    if c.depth <= limit && s.partitions[dst].iter().all(|o| !cand(tasks, o).conflicts(c)) {
                        s.partitions[dst].push(Entry { choice, ..e });
                        continue 'entry;
                    }
                }
            }
            stay.push(e);
        }
        s.partitions[src] = stay;
    }
}

/// Schedule of a whole layout: tasks, initial and refined schedules.
pub fn schedule_layout(layout: &DataLayout, k: usize) -> Result<(Vec<Task>, Schedule)> {
    let tasks = tasks_from_layout(layout)?;
    let init = init_schedule(&tasks);
    let refined = refine(&init, &tasks, k);
    Ok((tasks, refined))
}

pub const DEFAULT_K: usize = 4;

#[cfg(test)]
mod tests {
    use super::*;

    fn task(id: usize, t: StabType, depth: usize, anc: &[QubitId]) -> Task {
        Task {
            id,
            stab_type: t,
            candidates: vec![Candidate {
                ancillas: anc.iter().copied().collect(),
                depth,
                cnot_count: depth - 4,
            }],
        }
    }

    #[test]
    fn empty_schedule_is_zero() {
        assert_eq!(Schedule::default().total_cycle_time(&[]), 0);
    }

    #[test]
    fn single_task_gives_one_partition() {
        let tasks = vec![task(0, StabType::Z, 10, &[1, 2])];
        let s = refine(&init_schedule(&tasks), &tasks, DEFAULT_K);
        assert_eq!(s.partitions.len(), 1);
        assert_eq!(s.total_cycle_time(&tasks), 10);
    }

    #[test]
    fn uniform_conflicting_schedule_is_fixed_point() {
        let tasks = vec![
            task(0, StabType::X, 10, &[1, 2]),
            task(1, StabType::Z, 10, &[2, 3]),
        ];
        let init = init_schedule(&tasks);
        let s = refine(&init, &tasks, DEFAULT_K);
        assert_eq!(s.ids(&tasks), init.ids(&tasks));
    }

    #[test]
    fn same_type_overlap_spills_into_extra_partition() {
        let tasks = vec![
            task(0, StabType::X, 10, &[1, 2]),
            task(1, StabType::X, 10, &[2, 3]),
            task(2, StabType::Z, 10, &[1, 3]),
        ];
        let s = init_schedule(&tasks);
        assert_eq!(s.partitions.len(), 3);
        assert!(s.validate(&tasks).is_ok());
    }
}
