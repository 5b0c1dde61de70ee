//! Flag-bridge stabilizer measurement circuits.
//!
//! Every circuit has the same phase structure:
//! reset, basis change, forward cascade, four data slots, reverse cascade,
//! basis change, measure. X-type circuits prepare a cat state rooted at the
//! syndrome qubit; Z-type circuits use the Hadamard-dual construction so the
//! syndrome qubit reads the Z parity and every other tree qubit is a flag
//! whose ideal outcome is 0.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::allocate::{Role, StabType, SyndromeRectangle};
use crate::arch::QubitId;
use crate::bridge::BridgeTree;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gate {
    Reset(QubitId),
    H(QubitId),
    Cx(QubitId, QubitId),
    Measure(QubitId),
}

impl Gate {
    pub fn qubits(&self) -> impl Iterator<Item = QubitId> {
        let (a, b) = match *self {
            Gate::Reset(q) | Gate::H(q) | Gate::Measure(q) => (q, None),
            Gate::Cx(c, t) => (c, Some(t)),
        };
        std::iter::once(a).chain(b)
    }

    fn sort_key(&self) -> (QubitId, QubitId) {
        match *self {
            Gate::Reset(q) | Gate::H(q) | Gate::Measure(q) => (q, q),
            Gate::Cx(c, t) => (c, t),
        }
    }

    pub fn to_text(&self) -> String {
        match *self {
            Gate::Reset(q) => format!("R {q}"),
            Gate::H(q) => format!("H {q}"),
            Gate::Cx(c, t) => format!("CX {c} {t}"),
            Gate::Measure(q) => format!("M {q}"),
        }
    }
}

/// Data slot of each role. X faces visit a, c, b, d and Z faces a, b, c, d;
/// with these orders every data qubit meets its four faces in four distinct
/// slots and hook errors run parallel to the matching logical boundary.
pub fn slot_of(stab_type: StabType, role: Role) -> usize {
    match (stab_type, role) {
        (_, Role::A) => 0,
        (StabType::X, Role::C) | (StabType::Z, Role::B) => 1,
        (StabType::X, Role::B) | (StabType::Z, Role::C) => 2,
        (_, Role::D) => 3,
    }
}

/// The circuit split into its phases, so partitions can align the data slots
/// of circuits with different cascade depths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phases {
    pub reset: Vec<Gate>,
    pub pre: Vec<Gate>,
    pub forward: Vec<Vec<Gate>>,
    pub data: [Vec<Gate>; 4],
    pub reverse: Vec<Vec<Gate>>,
    pub post: Vec<Gate>,
    pub measure: Vec<Gate>,
}

impl Phases {
    /// Layer sequence with empty layers dropped.
    pub fn layers(&self) -> Vec<Vec<Gate>> {
        std::iter::once(self.reset.clone())
            .chain(std::iter::once(self.pre.clone()))
            .chain(self.forward.iter().cloned())
            .chain(self.data.iter().cloned())
            .chain(self.reverse.iter().cloned())
            .chain(std::iter::once(self.post.clone()))
            .chain(std::iter::once(self.measure.clone()))
            .filter(|l| !l.is_empty())
            .map(|mut l| {
                l.sort_by_key(Gate::sort_key);
                l
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementCircuit {
    pub stab_type: StabType,
    pub tree: BridgeTree,
    pub phases: Phases,
    pub layers: Vec<Vec<Gate>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitMetrics {
    pub cnot_count: usize,
    pub depth: usize,
    pub bridge_qubit_count: usize,
}

impl MeasurementCircuit {
    pub fn syndrome_qubit(&self) -> QubitId {
        self.tree.syndrome_qubit
    }

    /// Tree qubits other than the syndrome qubit.
    pub fn flag_qubits(&self) -> Vec<QubitId> {
        self.tree.bridge_nodes().filter(|&q| q != self.tree.syndrome_qubit).collect()
    }

    pub fn cascade_depth(&self) -> usize {
        self.phases.forward.len()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates().filter(|g| matches!(g, Gate::Cx(..))).count()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    pub fn metrics(&self) -> CircuitMetrics {
        CircuitMetrics {
            cnot_count: self.cnot_count(),
            depth: self.depth(),
            bridge_qubit_count: self.tree.bridge_count(),
        }
    }

    pub fn to_text(&self) -> String {
        layers_to_text(&self.layers)
    }
}

/// Renders layers in the `R`/`H`/`CX`/`M` text format with `TICK` separators.
pub fn layers_to_text(layers: &[Vec<Gate>]) -> String {
    let mut out = String::new();
    for (i, layer) in layers.iter().enumerate() {
        if i > 0 {
            out.push_str("TICK\n");
        }
        let mut gates = layer.clone();
        gates.sort_by_key(Gate::sort_key);
        for g in gates {
            let _ = writeln!(out, "{}", g.to_text());
        }
    }
    out
}

/// Parses the text format back into layers.
pub fn parse_layers(text: &str) -> Result<Vec<Vec<Gate>>> {
    let mut layers = vec![Vec::new()];
    for (n, line) in text.lines().enumerate() {
        let parse_err = |message: String| Error::Parse { line: n + 1, column: 1, message };
        let toks: Vec<&str> = line.split_whitespace().collect();
        let nums = |k: usize| -> Result<Vec<QubitId>> {
            if toks.len() != k + 1 {
                return Err(parse_err(format!("'{}' expects {k} operand(s)", toks[0])));
            }
            toks[1..]
                .iter()
                .map(|t| t.parse().map_err(|_| parse_err(format!("bad qubit '{t}'"))))
                .collect()
        };
        let gate = match toks.first() {
            None => continue,
            Some(&"TICK") => {
                layers.push(Vec::new());
                continue;
            }
            Some(&"R") => Gate::Reset(nums(1)?[0]),
            Some(&"H") => Gate::H(nums(1)?[0]),
            Some(&"M") => Gate::Measure(nums(1)?[0]),
            Some(&"CX") => {
                let q = nums(2)?;
                Gate::Cx(q[0], q[1])
            }
            Some(other) => return Err(parse_err(format!("unknown instruction '{other}'"))),
        };
        layers.last_mut().expect("non-empty").push(gate);
    }
    Ok(layers)
}

/// Broadcast order of the tree ancillas from the syndrome qubit: each entry
/// is `(parent, child, layer)`, where every informed qubit informs at most one
/// child per layer and deeper subtrees go first.
fn cascade(tree: &BridgeTree) -> Vec<(QubitId, QubitId, usize)> {
    let bridges: BTreeSet<QubitId> = tree.bridge_nodes().collect();
    let root = tree.syndrome_qubit;
    let mut children: BTreeMap<QubitId, Vec<QubitId>> = BTreeMap::new();
    let mut order = vec![root];
    let mut seen = BTreeSet::from([root]);
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        let mut kids: Vec<QubitId> = tree
            .tree_neighbors(v)
            .into_iter()
            .filter(|q| bridges.contains(q) && !seen.contains(q))
            .collect();
        kids.sort_unstable();
        for &k in &kids {
            seen.insert(k);
            order.push(k);
        }
        children.insert(v, kids);
    }
    // Broadcast time of each subtree, children sorted by it (descending).
    let mut time: BTreeMap<QubitId, usize> = BTreeMap::new();
    for &v in order.iter().rev() {
        let kids = children.get_mut(&v).expect("visited");
        kids.sort_by(|a, b| time[b].cmp(&time[a]).then(a.cmp(b)));
        let t = kids.iter().enumerate().map(|(j, k)| j + 1 + time[k]).max().unwrap_or(0);
        time.insert(v, t);
    }
    let mut out = Vec::new();
    let mut start = BTreeMap::from([(root, 0usize)]);
    for &v in &order {
        let t0 = start[&v];
        for (j, &k) in children[&v].iter().enumerate() {
            let layer = t0 + j;
            out.push((v, k, layer));
            start.insert(k, layer + 1);
        }
    }
    out
}

/// Builds the measurement circuit of `tree` with data qubits visited in
/// `slots` (slot index per data qubit, each in 0..4).
pub fn gen_measurement_circuit_slotted(
    stab_type: StabType,
    tree: &BridgeTree,
    slots: &[(QubitId, usize)],
) -> Result<MeasurementCircuit> {
    let w = tree.weight();
    if w != 2 && w != 4 {
        return Err(Error::UnsupportedStabilizer(format!("weight {w} stabilizer; only 2 and 4 are supported")));
    }
    if tree.bridge_count() == 0 {
        return Err(Error::UnsupportedStabilizer("tree has no ancilla".into()));
    }
    let bridges: Vec<QubitId> = tree.bridge_nodes().collect();
    let root = tree.syndrome_qubit;
    let others: Vec<QubitId> = bridges.iter().copied().filter(|&q| q != root).collect();
    let steps = cascade(tree);
    let depth = steps.iter().map(|s| s.2 + 1).max().unwrap_or(0);

    let mut forward = vec![Vec::new(); depth];
    for &(p, c, l) in &steps {
        forward[l].push(match stab_type {
            StabType::X => Gate::Cx(p, c),
            StabType::Z => Gate::Cx(c, p),
        });
    }
    let reverse: Vec<Vec<Gate>> = forward.iter().rev().cloned().collect();

    let mut data: [Vec<Gate>; 4] = Default::default();
    for &(q, slot) in slots {
        let anc = tree
            .tree_neighbors(q)
            .into_iter()
            .find(|n| bridges.contains(n))
            .ok_or_else(|| Error::Validation(vec![format!("data qubit {q} is not a tree leaf")]))?;
        if slot >= 4 || !data[slot].is_empty() {
            return Err(Error::InvalidArgument(format!("slot {slot} for data qubit {q} is invalid or taken")));
        }
        data[slot].push(match stab_type {
            StabType::X => Gate::Cx(anc, q),
            StabType::Z => Gate::Cx(q, anc),
        });
    }
    if slots.len() != w {
        return Err(Error::InvalidArgument(format!("{} slots for a weight-{w} tree", slots.len())));
    }

    let basis: Vec<Gate> = match stab_type {
        StabType::X => vec![Gate::H(root)],
        StabType::Z => others.iter().map(|&q| Gate::H(q)).collect(),
    };
    let phases = Phases {
        reset: bridges.iter().map(|&q| Gate::Reset(q)).collect(),
        pre: basis.clone(),
        forward,
        data,
        reverse,
        post: basis,
        measure: bridges.iter().map(|&q| Gate::Measure(q)).collect(),
    };
    let layers = phases.layers();
    Ok(MeasurementCircuit {
        stab_type,
        tree: tree.clone(),
        phases,
        layers,
    })
}

/// Builds the circuit for a tree whose leaves are given in role order
/// `a, b, c, d` (weight 4) or in the order of the two present roles.
pub fn gen_measurement_circuit(stab_type: StabType, tree: &BridgeTree) -> Result<MeasurementCircuit> {
    let roles: Vec<Role> = match tree.weight() {
        4 => Role::ALL.to_vec(),
        _ => vec![Role::A, Role::D],
    };
    let slots: Vec<(QubitId, usize)> =
        tree.leaves.iter().zip(roles).map(|(&q, r)| (q, slot_of(stab_type, r))).collect();
    gen_measurement_circuit_slotted(stab_type, tree, &slots)
}

/// Circuit for candidate `tree_index` of a syndrome rectangle, with slots
/// taken from the rectangle's role map.
pub fn circuit_for(rect: &SyndromeRectangle, tree_index: usize) -> Result<MeasurementCircuit> {
    let tree = rect
        .trees
        .get(tree_index)
        .ok_or_else(|| Error::InvalidArgument(format!("stabilizer {} has no tree {tree_index}", rect.id)))?;
    let slots: Vec<(QubitId, usize)> =
        rect.roles.iter().map(|(&role, &q)| (q, slot_of(rect.stab_type, role))).collect();
    gen_measurement_circuit_slotted(rect.stab_type, tree, &slots)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Option<Pauli> {
        match (x, z) {
            (true, false) => Some(Pauli::X),
            (true, true) => Some(Pauli::Y),
            (false, true) => Some(Pauli::Z),
            (false, false) => None,
        }
    }
}

/// Sparse Pauli operator (phases ignored).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PauliString {
    terms: BTreeMap<QubitId, (bool, bool)>,
}

impl PauliString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn uniform(p: Pauli, qubits: impl IntoIterator<Item = QubitId>) -> Self {
        let mut s = Self::new();
        for q in qubits {
            s.mul(q, p);
        }
        s
    }

    pub fn get(&self, q: QubitId) -> Option<Pauli> {
        self.terms.get(&q).and_then(|&(x, z)| Pauli::from_bits(x, z))
    }

    fn bits(&self, q: QubitId) -> (bool, bool) {
        self.terms.get(&q).copied().unwrap_or((false, false))
    }

    fn set(&mut self, q: QubitId, (x, z): (bool, bool)) {
        if x || z {
            self.terms.insert(q, (x, z));
        } else {
            self.terms.remove(&q);
        }
    }

    pub fn mul(&mut self, q: QubitId, p: Pauli) {
        let (x, z) = self.bits(q);
        let (px, pz) = p.bits();
        self.set(q, (x ^ px, z ^ pz));
    }

    pub fn support(&self) -> impl Iterator<Item = (QubitId, Pauli)> + '_ {
        self.terms.iter().filter_map(|(&q, &(x, z))| Pauli::from_bits(x, z).map(|p| (q, p)))
    }

    pub fn is_identity(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn anticommutes(&self, other: &PauliString) -> bool {
        let mut odd = false;
        for (q, &(x, z)) in &self.terms {
            let (ox, oz) = other.bits(*q);
            odd ^= (x && oz) ^ (z && ox);
        }
        odd
    }

    /// Restriction to the given qubits.
    pub fn restrict(&self, keep: &BTreeSet<QubitId>) -> PauliString {
        PauliString {
            terms: self.terms.iter().filter(|(q, _)| keep.contains(q)).map(|(&q, &b)| (q, b)).collect(),
        }
    }

    /// Conjugates by a unitary gate (Heisenberg picture is the same map for
    /// these self-inverse gates).
    fn apply(&mut self, g: &Gate) {
        match *g {
            Gate::H(q) => {
                let (x, z) = self.bits(q);
                self.set(q, (z, x));
            }
            Gate::Cx(c, t) => {
                let (cx, cz) = self.bits(c);
                let (tx, tz) = self.bits(t);
                self.set(c, (cx, cz ^ tz));
                self.set(t, (tx ^ cx, tz));
            }
            Gate::Reset(_) | Gate::Measure(_) => {}
        }
    }
}

/// Outcome flips caused by a Pauli error injected before the circuit.
/// A Z-basis measurement flips iff the propagated error has an X component.
pub fn measurement_flips(c: &MeasurementCircuit, error: &PauliString) -> BTreeMap<QubitId, bool> {
    let mut e = error.clone();
    let mut flips = BTreeMap::new();
    for layer in &c.layers {
        for g in layer {
            match *g {
                Gate::Measure(q) => {
                    flips.insert(q, e.bits(q).0);
                }
                Gate::Reset(q) => e.set(q, (false, false)),
                _ => e.apply(g),
            }
        }
    }
    flips
}

/// Propagates an error injected before the circuit to its end.
pub fn propagate(c: &MeasurementCircuit, error: &PauliString) -> PauliString {
    let mut e = error.clone();
    for g in c.gates() {
        match *g {
            Gate::Reset(q) => e.set(q, (false, false)),
            Gate::Measure(_) => {}
            _ => e.apply(g),
        }
    }
    e
}

/// Heisenberg back-propagation of `Z_q` from the measurement of `q` to the
/// circuit start, checking that it only crosses resets as `I` or `Z`.
/// Returns the operator on non-reset qubits (the data part) or `None` if the
/// outcome is not determined by reset states and data operators.
fn measured_operator(c: &MeasurementCircuit, q: QubitId) -> Option<PauliString> {
    let mut op = PauliString::new();
    op.mul(q, Pauli::Z);
    let measure_layer = c.layers.iter().rposition(|l| l.contains(&Gate::Measure(q)))?;
    for layer in c.layers[..measure_layer].iter().rev() {
        for g in layer.iter().rev() {
            match *g {
                Gate::Reset(r) => {
                    if op.bits(r).0 {
                        return None;
                    }
                    op.set(r, (false, false));
                }
                Gate::Measure(_) => {}
                _ => op.apply(g),
            }
        }
    }
    Some(op)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub description: String,
}

/// Checks that the circuit measures `stab`:
/// the syndrome outcome equals the stabilizer eigenvalue and every flag is
/// deterministically 0; a single-qubit data error flips the syndrome iff it
/// anticommutes with `stab`, never flips a flag, and is not spread to other
/// data qubits.
pub fn verify_stabilizer(c: &MeasurementCircuit, stab: &PauliString) -> std::result::Result<(), Vec<Mismatch>> {
    let mut bad = Vec::new();
    let data: BTreeSet<QubitId> = c.tree.leaves.iter().copied().collect();
    let root = c.syndrome_qubit();
    let bridges: Vec<QubitId> = c.tree.bridge_nodes().collect();

    for &q in &bridges {
        let expect = if q == root { stab.clone() } else { PauliString::new() };
        match measured_operator(c, q) {
            None => bad.push(Mismatch { description: format!("outcome of qubit {q} is random") }),
            Some(op) => {
                let leftover = op.restrict(&bridges.iter().copied().collect());
                if !leftover.is_identity() {
                    bad.push(Mismatch {
                        description: format!("outcome of qubit {q} depends on unreset ancillas"),
                    });
                }
                if op.restrict(&data) != expect.restrict(&data) {
                    bad.push(Mismatch {
                        description: format!("qubit {q} measures the wrong data operator"),
                    });
                }
            }
        }
    }

    for &q in &data {
        for p in Pauli::ALL {
            let mut e = PauliString::new();
            e.mul(q, p);
            let flips = measurement_flips(c, &e);
            let expect = e.anticommutes(stab);
            if flips.get(&root).copied().unwrap_or(false) != expect {
                bad.push(Mismatch {
                    description: format!("{p:?} on data qubit {q}: syndrome flip should be {expect}"),
                });
            }
            if let Some(f) = bridges.iter().find(|&&f| f != root && flips.get(&f).copied().unwrap_or(false)) {
                bad.push(Mismatch {
                    description: format!("{p:?} on data qubit {q} flips flag qubit {f}"),
                });
            }
            if propagate(c, &e).restrict(&data) != e {
                bad.push(Mismatch {
                    description: format!("{p:?} on data qubit {q} spreads to other data qubits"),
                });
            }
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}

/// The stabilizer a rectangle should measure.
pub fn stabilizer_of(rect: &SyndromeRectangle) -> PauliString {
    let p = match rect.stab_type {
        StabType::X => Pauli::X,
        StabType::Z => Pauli::Z,
    };
    PauliString::uniform(p, rect.data())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{gen_heavy, gen_square, DeviceGraph};
    use crate::geom::PointPair;

    fn tree(g: &DeviceGraph, edges: &[PointPair], leaves: &[(i32, i32)]) -> BridgeTree {
        let id = |p: (i32, i32)| g.qubit_at(p.0, p.1).expect("qubit");
        let edges = edges.iter().map(|&(a, b)| (id(a).min(id(b)), id(a).max(id(b)))).collect();
        let leaves: Vec<QubitId> = leaves.iter().map(|&p| id(p)).collect();
        BridgeTree::from_edges(g, edges, &leaves).unwrap()
    }

    /// Plus-shaped star: one ancilla touching all four data qubits.
    fn star() -> (DeviceGraph, BridgeTree) {
        let g = gen_square(3, 3).unwrap();
        let c = (2, 2);
        let t = tree(&g, &[(c, (2, 0)), (c, (0, 2)), (c, (4, 2)), (c, (2, 4))], &[(2, 0), (0, 2), (4, 2), (2, 4)]);
        (g, t)
    }

    /// Two ancillas in a column, data at the four corners.
    fn pair() -> (DeviceGraph, BridgeTree) {
        let g = gen_square(2, 3).unwrap();
        let t = tree(
            &g,
            &[((0, 0), (2, 0)), ((2, 0), (4, 0)), ((2, 0), (2, 2)), ((2, 2), (0, 2)), ((2, 2), (4, 2))],
            &[(0, 0), (0, 2), (4, 0), (4, 2)],
        );
        (g, t)
    }

    /// Weight-2 path around a heavy-square corner: three ancillas.
    fn heavy_cell() -> (DeviceGraph, BridgeTree) {
        let g = gen_heavy(&gen_square(2, 2).unwrap()).unwrap();
        let t = tree(
            &g,
            &[((0, 0), (1, 0)), ((1, 0), (2, 0)), ((2, 0), (2, 1)), ((2, 1), (2, 2))],
            &[(0, 0), (2, 2)],
        );
        (g, t)
    }

    #[test]
    fn star_counts() {
        let (_, t) = star();
        let x = gen_measurement_circuit(StabType::X, &t).unwrap();
        let z = gen_measurement_circuit(StabType::Z, &t).unwrap();
        assert_eq!((x.cnot_count(), x.depth()), (4, 8));
        assert_eq!((z.cnot_count(), z.depth()), (4, 6));
        assert!(x.flag_qubits().is_empty());
    }

    #[test]
    fn pair_counts() {
        let (_, t) = pair();
        for ty in [StabType::X, StabType::Z] {
            let c = gen_measurement_circuit(ty, &t).unwrap();
            assert_eq!(c.metrics(), CircuitMetrics { cnot_count: 6, depth: 10, bridge_qubit_count: 2 });
        }
    }

    #[test]
    fn weight_two_path() {
        let (_, t) = heavy_cell();
        assert_eq!((t.weight(), t.bridge_count()), (2, 3));
        let c = gen_measurement_circuit(StabType::Z, &t).unwrap();
        assert_eq!(c.cnot_count(), 2 + 2 * (t.bridge_count() - 1));
        assert!(verify_stabilizer(&c, &PauliString::uniform(Pauli::Z, t.leaves.clone())).is_ok());
    }

    #[test]
    fn layer_structure() {
        let (_, t) = pair();
        for ty in [StabType::X, StabType::Z] {
            let c = gen_measurement_circuit(ty, &t).unwrap();
            let bridges: BTreeSet<QubitId> = t.bridge_nodes().collect();
            assert_eq!(c.layers[0].iter().copied().collect::<BTreeSet<_>>(), bridges.iter().map(|&q| Gate::Reset(q)).collect());
            assert_eq!(
                c.layers.last().unwrap().iter().copied().collect::<BTreeSet<_>>(),
                bridges.iter().map(|&q| Gate::Measure(q)).collect()
            );
            for layer in &c.layers {
                let qs: Vec<QubitId> = layer.iter().flat_map(|g| g.qubits()).collect();
                let uniq: BTreeSet<QubitId> = qs.iter().copied().collect();
                assert_eq!(qs.len(), uniq.len(), "qubit repeated in a layer");
            }
            for g in c.gates() {
                if let Gate::Reset(q) | Gate::Measure(q) = *g {
                    assert!(!t.leaves.contains(&q));
                }
            }
        }
    }

    #[test]
    fn single_pauli_injections() {
        let (_, t) = pair();
        let c = gen_measurement_circuit(StabType::Z, &t).unwrap();
        let stab = PauliString::uniform(Pauli::Z, t.leaves.clone());
        let mut flips = 0;
        for &q in &t.leaves {
            for p in Pauli::ALL {
                let mut e = PauliString::new();
                e.mul(q, p);
                if measurement_flips(&c, &e)[&c.syndrome_qubit()] {
                    flips += 1;
                    assert_ne!(p, Pauli::Z);
                }
            }
        }
        assert_eq!(flips, 8);
        assert!(verify_stabilizer(&c, &stab).is_ok());
    }

    #[test]
    fn wrong_stabilizer_is_reported() {
        let (_, t) = pair();
        let c = gen_measurement_circuit(StabType::X, &t).unwrap();
        let wrong = PauliString::uniform(Pauli::Z, t.leaves.clone());
        let err = verify_stabilizer(&c, &wrong).unwrap_err();
        assert!(!err.is_empty());
    }

    #[test]
    fn no_error_leaves_data_untouched() {
        let (_, t) = heavy_cell();
        let c = gen_measurement_circuit(StabType::X, &t).unwrap();
        assert!(propagate(&c, &PauliString::new()).is_identity());
    }

    #[test]
    fn text_round_trip() {
        let (_, t) = pair();
        let c = gen_measurement_circuit(StabType::X, &t).unwrap();
        let text = c.to_text();
        let parsed = parse_layers(&text).unwrap();
        assert_eq!(layers_to_text(&parsed), text);
        assert_eq!(parsed.len(), c.depth());
        assert!(text.lines().filter(|l| *l == "TICK").count() == c.depth() - 1);
    }

    #[test]
    fn text_errors_carry_line_numbers() {
        match parse_layers("R 1\nTICK\nCX 1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_layers("FOO 3").is_err());
        assert!(parse_layers("M x").is_err());
    }

    #[test]
    fn slots_are_distinct_per_type() {
        for ty in [StabType::X, StabType::Z] {
            let s: BTreeSet<usize> = Role::ALL.iter().map(|&r| slot_of(ty, r)).collect();
            assert_eq!(s.len(), 4);
        }
    }

    #[test]
    fn pauli_algebra() {
        let x = PauliString::uniform(Pauli::X, [1, 2]);
        let z = PauliString::uniform(Pauli::Z, [2, 3]);
        assert!(x.anticommutes(&z));
        let mut y = PauliString::new();
        y.mul(1, Pauli::X);
        y.mul(1, Pauli::Z);
        assert_eq!(y.get(1), Some(Pauli::Y));
        y.mul(1, Pauli::Y);
        assert!(y.is_identity());
    }
}
