//! End-to-end pipeline: patch search, synthesis report, simulation sweeps.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocate::{allocate_data_qubits, allocate_with_vectors, feasibility_check, AllocationMode, DataLayout, StabType};
use crate::arch::{Architecture, DeviceGraph};
use crate::circuit::{circuit_for, layers_to_text, stabilizer_of, verify_stabilizer};
use crate::error::{Error, Result};
use crate::schedule::{schedule_layout, Schedule, Task, DEFAULT_K};
use crate::sim::{build_cycle_circuit, estimate_threshold, Curve, CycleCircuit, Experiment, NoiseModel, SimResult, ThresholdEstimate};

/// Patch on which the lattice vectors are learned.
const LEARN_DIMS: (usize, usize) = (10, 10);
/// Largest patch side tried by the growth search.
const MAX_SIDE: usize = 24;
/// Once a layout is found, larger patches are still tried up to this factor
/// in qubit count in search of one without same-type overlaps.
const CLASH_SLACK: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilizerMetrics {
    pub id: usize,
    pub logical_pos: (i32, i32),
    pub stab_type: StabType,
    pub weight: usize,
    pub bridge_qubits: usize,
    pub cnot_count: usize,
    pub depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Averages {
    pub bridge_qubits: f64,
    pub cnot_count: f64,
    pub depth: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Utilization {
    pub total: usize,
    pub data: usize,
    pub bridge: usize,
    pub unused: usize,
    pub data_pct: f64,
    pub bridge_pct: f64,
    pub unused_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checks {
    pub feasibility_violations: Vec<String>,
    pub circuit_mismatches: Vec<String>,
    pub same_type_clashes: usize,
}

impl Checks {
    pub fn passed(&self) -> bool {
        self.feasibility_violations.is_empty() && self.circuit_mismatches.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub arch: Architecture,
    pub mode: AllocationMode,
    pub distance: usize,
    pub patch: (usize, usize),
    pub patch_qubits: usize,
    pub stabilizers: Vec<StabilizerMetrics>,
    /// Averages over weight-4 X-type stabilizers.
    pub x_averages: Averages,
    /// Averages over all X-type stabilizers, boundary ones included.
    pub x_averages_all: Averages,
    pub total_cycle_time: usize,
    pub utilization: Utilization,
    /// Stabilizer ids per partition, in execution order.
    pub partitions: Vec<Vec<usize>>,
    pub checks: Checks,
}

impl SynthesisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Human-readable summary table.
    pub fn to_text(&self) -> String {
        let u = &self.utilization;
        let a = &self.x_averages;
        let mut s = String::new();
        let _ = writeln!(s, "arch {} mode {} distance {}", self.arch, self.mode, self.distance);
        let _ = writeln!(s, "patch {}x{} ({} qubits)", self.patch.0, self.patch.1, self.patch_qubits);
        let _ = writeln!(
            s,
            "qubits {} = data {} ({:.1}%) + bridge {} ({:.1}%) + unused {} ({:.1}%)",
            u.total, u.data, u.data_pct, u.bridge, u.bridge_pct, u.unused, u.unused_pct
        );
        let _ = writeln!(
            s,
            "bulk X-stabilizer averages: bridge {:.2} cnot {:.2} depth {:.2}",
            a.bridge_qubits, a.cnot_count, a.depth
        );
        let _ = writeln!(s, "partitions {} total cycle time {}", self.partitions.len(), self.total_cycle_time);
        let _ = writeln!(
            s,
            "checks: {} feasibility violations, {} circuit mismatches, {} same-type clashes",
            self.checks.feasibility_violations.len(),
            self.checks.circuit_mismatches.len(),
            self.checks.same_type_clashes
        );
        s
    }
}

/// Output of the full pipeline.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub graph: DeviceGraph,
    pub layout: DataLayout,
    pub tasks: Vec<Task>,
    pub schedule: Schedule,
    pub report: SynthesisReport,
}

impl Synthesis {
    /// Memory experiment over `rounds` cycles.
    pub fn cycle_circuit(&self, rounds: usize) -> Result<CycleCircuit> {
        build_cycle_circuit(&self.layout, self.graph.num_qubits(), &self.tasks, &self.schedule, rounds)
    }

    /// One error-detection cycle as layered gate text.
    pub fn export_cycle(&self) -> Result<String> {
        let c = self.cycle_circuit(1)?;
        Ok(layers_to_text(&c.layers[..c.layers.len() - 1]))
    }
}

fn patch_sizes(arch: Architecture) -> Vec<(usize, usize)> {
    let (r0, c0) = arch.min_dims();
    let mut sizes: Vec<(usize, usize, usize)> = (r0..=MAX_SIDE)
        .flat_map(|r| (c0..=MAX_SIDE).map(move |c| (r, c)))
        .filter_map(|(r, c)| arch.generate(r, c).ok().map(|g| (g.num_qubits(), r, c)))
        .collect();
    sizes.sort_unstable();
    sizes.into_iter().map(|(_, r, c)| (r, c)).collect()
}

/// Smallest patch that hosts the code, preferring layouts without
/// same-type tree overlaps.
pub fn find_layout(arch: Architecture, d: usize, mode: AllocationMode) -> Result<(DeviceGraph, DataLayout, (usize, usize))> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("distance must be odd and >= 3, got {d}")));
    }
    let learn = arch.generate(LEARN_DIMS.0, LEARN_DIMS.1)?;
    let seed = allocate_data_qubits(&learn, 3, mode)
        .map_err(|e| Error::Infeasible(format!("{arch} ({mode}) admits no lattice pattern: {e}")))?;
    let vectors = [(seed.pattern.u, seed.pattern.v)];

    let mut fallback: Option<(DeviceGraph, DataLayout, (usize, usize))> = None;
    let mut limit = usize::MAX;
    for (r, c) in patch_sizes(arch) {
        let g = arch.generate(r, c)?;
        if g.num_qubits() > limit {
            break;
        }
        let Ok(layout) = allocate_with_vectors(&g, d, mode, &vectors) else { continue };
        if layout.same_type_clashes() == 0 {
            return Ok((g, layout, (r, c)));
        }
        if fallback.is_none() {
            limit = (g.num_qubits() as f64 * CLASH_SLACK) as usize;
            fallback = Some((g, layout, (r, c)));
        }
    }
    fallback.ok_or_else(|| Error::Infeasible(format!("no patch up to {MAX_SIDE}x{MAX_SIDE} hosts distance {d} on {arch} ({mode})")))
}

fn average(xs: impl Iterator<Item = usize>) -> f64 {
    let v: Vec<usize> = xs.collect();
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<usize>() as f64 / v.len() as f64
    }
}

fn pct(part: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * part as f64 / total as f64
    }
}

/// Runs allocation, tree search, circuit generation and scheduling.
pub fn synth(arch: Architecture, d: usize, mode: AllocationMode) -> Result<Synthesis> {
    let (graph, layout, patch) = find_layout(arch, d, mode)?;
    let (tasks, schedule) = schedule_layout(&layout, DEFAULT_K)?;
    let rects = &layout.syndrome_rects;

    let mut stabilizers = Vec::with_capacity(rects.len());
    let mut bridge: BTreeSet<usize> = BTreeSet::new();
    let mut circuit_mismatches = Vec::new();
    for e in schedule.partitions.iter().flatten() {
        let r = &rects[tasks[e.task].id];
        let c = circuit_for(r, e.choice)?;
        if let Err(bad) = verify_stabilizer(&c, &stabilizer_of(r)) {
            circuit_mismatches.extend(bad.into_iter().map(|m| format!("stabilizer {}: {}", r.id, m.description)));
        }
        bridge.extend(c.tree.bridge_nodes());
        stabilizers.push(StabilizerMetrics {
            id: r.id,
            logical_pos: r.logical_pos,
            stab_type: r.stab_type,
            weight: r.weight(),
            bridge_qubits: c.tree.bridge_count(),
            cnot_count: c.cnot_count(),
            depth: c.depth(),
        });
    }
    stabilizers.sort_by_key(|s| s.id);

    let averages = |bulk_only: bool| {
        let x: Vec<&StabilizerMetrics> = stabilizers
            .iter()
            .filter(|s| s.stab_type == StabType::X && (!bulk_only || s.weight == 4))
            .collect();
        Averages {
            bridge_qubits: average(x.iter().map(|s| s.bridge_qubits)),
            cnot_count: average(x.iter().map(|s| s.cnot_count)),
            depth: average(x.iter().map(|s| s.depth)),
        }
    };
    let (x_averages, x_averages_all) = (averages(true), averages(false));

    let data: BTreeSet<usize> = layout.data_qubits().into_iter().collect();
    let mut footprint = layout.footprint(&graph);
    footprint.extend(&data);
    footprint.extend(&bridge);
    let total = footprint.len();
    let unused = total - data.len() - bridge.len();
    let utilization = Utilization {
        total,
        data: data.len(),
        bridge: bridge.len(),
        unused,
        data_pct: pct(data.len(), total),
        bridge_pct: pct(bridge.len(), total),
        unused_pct: pct(unused, total),
    };

    let feasibility_violations = match feasibility_check(&layout, &graph) {
        Ok(()) => Vec::new(),
        Err(v) => v.into_iter().map(|v| format!("stabilizer {} at {:?}: {}", v.stabilizer, v.logical_pos, v.reason)).collect(),
    };

    let report = SynthesisReport {
        arch,
        mode,
        distance: d,
        patch,
        patch_qubits: graph.num_qubits(),
        stabilizers,
        x_averages,
        x_averages_all,
        total_cycle_time: schedule.total_cycle_time(&tasks),
        utilization,
        partitions: schedule.ids(&tasks),
        checks: Checks { feasibility_violations, circuit_mismatches, same_type_clashes: layout.same_type_clashes() },
    };
    Ok(Synthesis { graph, layout, tasks, schedule, report })
}

/// Memory experiment of `rounds` cycles (the distance when `None`).
pub fn simulate(s: &Synthesis, noise: NoiseModel, rounds: Option<usize>, shots: u64, seed: u64) -> Result<SimResult> {
    if shots == 0 {
        return Err(Error::InvalidArgument("shots must be at least 1".into()));
    }
    let c = s.cycle_circuit(rounds.unwrap_or(s.layout.distance))?;
    Ok(Experiment::new(c, noise).run(shots, seed))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub p_gate: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    #[serde(default = "default_distances")]
    pub distances: Vec<usize>,
    #[serde(default = "default_p_idle")]
    pub p_idle: f64,
}

fn default_distances() -> Vec<usize> {
    vec![3, 5]
}

fn default_p_idle() -> f64 {
    crate::sim::DEFAULT_P_IDLE
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: SweepConfig = serde_json::from_str(text)?;
        if c.shots == 0 {
            return Err(Error::InvalidArgument("sweep shots must be at least 1".into()));
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub arch: Architecture,
    pub mode: AllocationMode,
    pub distance: usize,
    pub p_gate: f64,
    pub result: std::result::Result<SimResult, String>,
}

pub const CSV_HEADER: &str = "arch,mode,distance,p_gate,shots,logical_errors,rate,ci_low,ci_high";

/// Simulates every (distance, p_gate) point; a failing point is reported in
/// its row and the others still run.
pub fn sweep(arch: Architecture, mode: AllocationMode, cfg: &SweepConfig) -> Vec<SweepRow> {
    let synths: Vec<(usize, std::result::Result<Synthesis, String>)> = cfg
        .distances
        .iter()
        .map(|&d| (d, synth(arch, d, mode).map_err(|e| e.to_string())))
        .collect();
    let points: Vec<(usize, usize)> = (0..synths.len()).flat_map(|i| (0..cfg.p_gate.len()).map(move |j| (i, j))).collect();
    points
        .into_par_iter()
        .map(|(i, j)| {
            let (distance, s) = &synths[i];
            let p = cfg.p_gate[j];
            let result = s.as_ref().map_err(Clone::clone).and_then(|s| {
                let noise = NoiseModel::new(p, cfg.p_idle).map_err(|e| e.to_string())?;
                simulate(s, noise, None, cfg.shots, cfg.seed).map_err(|e| e.to_string())
            });
            SweepRow { arch, mode, distance: *distance, p_gate: p, result }
        })
        .collect()
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        let _ = match &r.result {
            Ok(x) => writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.arch, r.mode, r.distance, r.p_gate, x.shots, x.logical_errors, x.rate, x.ci_low, x.ci_high
            ),
            Err(_) => writeln!(s, "{},{},{},{},,,,,", r.arch, r.mode, r.distance, r.p_gate),
        };
    }
    s
}

/// Log-log chart of logical error rate against `p_gate`, one polyline per
/// (arch, mode, distance). Zero rates are left out.
pub fn sweep_svg(rows: &[SweepRow]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const M: f64 = 60.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.result.as_ref().ok().filter(|x| x.rate > 0.0 && r.p_gate > 0.0).map(|x| (r.p_gate.log10(), x.rate.log10())))
        .collect();
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n");
    let _ = writeln!(s, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    if pts.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, pick: fn(&(f64, f64)) -> f64| pts.iter().map(pick).fold(init, f);
    let (x0, x1) = (fold(f64::min, f64::MAX, |p| p.0).floor(), fold(f64::max, f64::MIN, |p| p.0).ceil());
    let (y0, y1) = (fold(f64::min, f64::MAX, |p| p.1).floor(), fold(f64::max, f64::MIN, |p| p.1).ceil());
    let (x1, y1) = (x1.max(x0 + 1.0), y1.max(y0 + 1.0));
    let px = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let py = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let _ = writeln!(
        s,
        "<rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>",
        W - 2.0 * M,
        H - 2.0 * M
    );
    for e in x0 as i32..=x1 as i32 {
        let x = px(e as f64);
        let _ = writeln!(s, "<text x=\"{x:.1}\" y=\"{:.1}\" font-size=\"12\" text-anchor=\"middle\">1e{e}</text>", H - M + 18.0);
    }
    for e in y0 as i32..=y1 as i32 {
        let y = py(e as f64);
        let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{y:.1}\" font-size=\"12\" text-anchor=\"end\">1e{e}</text>", M - 6.0);
    }
    let _ = writeln!(s, "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">physical error rate</text>", W / 2.0, H - 15.0);
    let _ = writeln!(s, "<text x=\"15\" y=\"{:.1}\" font-size=\"13\" transform=\"rotate(-90 15 {:.1})\" text-anchor=\"middle\">logical error rate</text>", H / 2.0, H / 2.0);

    let mut series: Vec<(Architecture, AllocationMode, usize)> = rows.iter().map(|r| (r.arch, r.mode, r.distance)).collect();
    series.sort();
    series.dedup();
    for (i, key) in series.iter().enumerate() {
        let mut line: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| (r.arch, r.mode, r.distance) == *key)
            .filter_map(|r| r.result.as_ref().ok().filter(|x| x.rate > 0.0 && r.p_gate > 0.0).map(|x| (r.p_gate, x.rate)))
            .collect();
        line.sort_by(|a, b| a.0.total_cmp(&b.0));
        let color = COLORS[i % COLORS.len()];
        let coords: Vec<String> = line.iter().map(|(p, r)| format!("{:.1},{:.1}", px(p.log10()), py(r.log10()))).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>", coords.join(" "));
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{color}\">{} {} d={}</text>",
            M + 10.0,
            M + 16.0 * (i + 1) as f64,
            key.0,
            key.1,
            key.2
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Threshold from the crossing of the two smallest distances in a sweep.
pub fn threshold_from_rows(rows: &[SweepRow]) -> Result<ThresholdEstimate> {
    let mut ds: Vec<usize> = rows.iter().map(|r| r.distance).collect();
    ds.sort_unstable();
    ds.dedup();
    let [small, large, ..] = ds[..] else {
        return Err(Error::InvalidArgument("threshold needs two distances".into()));
    };
    let curve = |d: usize| -> Result<Curve> {
        let mut points = rows
            .iter()
            .filter(|r| r.distance == d)
            .map(|r| r.result.clone().map(|x| (r.p_gate, x)).map_err(Error::InvalidArgument))
            .collect::<Result<Vec<_>>>()?;
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Curve { distance: d, points })
    };
    estimate_threshold(&curve(small)?, &curve(large)?)
}
