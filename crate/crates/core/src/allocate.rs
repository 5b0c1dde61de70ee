//! Data-qubit allocation.
//!
//! The d x d data lattice is placed as `origin + col * u + row * v` on the
//! device. Every face of that lattice becomes a syndrome rectangle whose
//! bridge trees are searched locally. Lattice vectors and origin are chosen
//! by exhaustive search, preferring the fewest bulk bridge qubits, then
//! the fewest same-type tree overlaps, then the smallest footprint.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arch::{DeviceGraph, QubitId};
use crate::bridge::{BridgeTree, TreeCache, TreeRegion};
use crate::error::{Error, Result};
use crate::geom::{PointPair, Rect};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocationMode {
    /// Syndrome rectangles induced by pairs of degree-3 qubits.
    #[default]
    Pair3,
    /// Syndrome rectangles centred on degree-4 qubits.
    Center4,
}

impl AllocationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            AllocationMode::Pair3 => "pair3",
            AllocationMode::Center4 => "center4",
        }
    }
}

impl fmt::Display for AllocationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AllocationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair3" => Ok(AllocationMode::Pair3),
            "center4" => Ok(AllocationMode::Center4),
            _ => Err(Error::InvalidArgument(format!("unknown allocation mode '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum StabType {
    X,
    Z,
}

impl fmt::Display for StabType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabType::X => "X",
            StabType::Z => "Z",
        })
    }
}

/// Data-qubit role inside a face: `a` at logical `(r, c)`, `b` at `(r+1, c)`,
/// `c` at `(r, c+1)`, `d` at `(r+1, c+1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    A,
    B,
    C,
    D,
}

impl Role {
    pub const ALL: [Role; 4] = [Role::A, Role::B, Role::C, Role::D];

    pub fn offset(self) -> (i32, i32) {
        match self {
            Role::A => (0, 0),
            Role::B => (1, 0),
            Role::C => (0, 1),
            Role::D => (1, 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BridgeRectangle {
    pub anchors: Vec<QubitId>,
    pub bounds: Rect,
    pub contained: Vec<QubitId>,
}

impl BridgeRectangle {
    /// Minimal rectangle around the anchors and all their neighbours.
    pub fn around(g: &DeviceGraph, anchors: Vec<QubitId>) -> Self {
        let pts = anchors.iter().flat_map(|&a| std::iter::once(a).chain(g.neighbors(a).iter().copied()));
        let bounds = Rect::bounding_qubits(g, pts).expect("anchor list is non-empty");
        BridgeRectangle {
            contained: bounds.qubits(g),
            anchors,
            bounds,
        }
    }
}

/// Lattice placement: data `(row, col)` sits at `origin + col * u + row * v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    pub origin: (i32, i32),
    pub u: (i32, i32),
    pub v: (i32, i32),
}

impl Pattern {
    pub fn position(&self, row: i32, col: i32) -> (i32, i32) {
        (
            self.origin.0 + col * self.u.0 + row * self.v.0,
            self.origin.1 + col * self.u.1 + row * self.v.1,
        )
    }

    pub fn translated(&self, origin: (i32, i32)) -> Self {
        Pattern { origin, ..*self }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyndromeRectangle {
    pub id: usize,
    pub logical_pos: (i32, i32),
    pub stab_type: StabType,
    pub bounds: Rect,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub base: Option<BridgeRectangle>,
    pub roles: BTreeMap<Role, QubitId>,
    /// Other stabilizers' data qubits lying inside `bounds`.
    pub excluded: Vec<QubitId>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trees: Vec<BridgeTree>,
}

impl SyndromeRectangle {
    pub fn weight(&self) -> usize {
        self.roles.len()
    }

    /// Data qubits in role order.
    pub fn data(&self) -> Vec<QubitId> {
        self.roles.values().copied().collect()
    }

    pub fn region(&self) -> TreeRegion {
        TreeRegion {
            bounds: self.bounds,
            terminals: self.data(),
            blocked: self.excluded.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataEntry {
    pub row: i32,
    pub col: i32,
    pub qubit: QubitId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataLayout {
    pub distance: usize,
    pub mode: AllocationMode,
    pub pattern: Pattern,
    pub data_map: Vec<DataEntry>,
    pub syndrome_rects: Vec<SyndromeRectangle>,
}

impl DataLayout {
    pub fn data_qubit(&self, row: i32, col: i32) -> Option<QubitId> {
        self.data_map.iter().find(|e| e.row == row && e.col == col).map(|e| e.qubit)
    }

    pub fn data_qubits(&self) -> Vec<QubitId> {
        self.data_map.iter().map(|e| e.qubit).collect()
    }

    /// Qubits covered by the union of all syndrome rectangles.
    pub fn footprint(&self, g: &DeviceGraph) -> BTreeSet<QubitId> {
        (0..g.num_qubits())
            .filter(|&q| {
                let (x, y) = g.coord(q);
                self.syndrome_rects.iter().any(|r| r.bounds.contains(x, y))
            })
            .collect()
    }

    /// Ancillas used by the first candidate tree of any stabilizer.
    pub fn bridge_qubits(&self) -> BTreeSet<QubitId> {
        self.syndrome_rects
            .iter()
            .filter_map(|r| r.trees.first())
            .flat_map(|t| t.bridge_nodes().collect::<Vec<_>>())
            .collect()
    }

    /// Pairs of same-type stabilizers whose first trees share an ancilla.
    pub fn same_type_clashes(&self) -> usize {
        let rs = &self.syndrome_rects;
        let mut n = 0;
        for (i, a) in rs.iter().enumerate() {
            for b in &rs[i + 1..] {
                if a.stab_type == b.stab_type && a.trees[0].conflicts_with(&b.trees[0]) {
                    n += 1;
                }
            }
        }
        n
    }

    /// Qubits of the Z-type logical operator: the data of row 0.
    pub fn logical_z_support(&self) -> Vec<QubitId> {
        (0..self.distance as i32).filter_map(|c| self.data_qubit(0, c)).collect()
    }

    /// Qubits of the X-type logical operator: the data of column 0.
    pub fn logical_x_support(&self) -> Vec<QubitId> {
        (0..self.distance as i32).filter_map(|r| self.data_qubit(r, 0)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// All qubits of degree >= 3, top-left first.
pub fn high_degree_nodes(g: &DeviceGraph) -> Vec<QubitId> {
    let mut nodes: Vec<QubitId> = (0..g.num_qubits()).filter(|&q| g.degree(q) >= 3).collect();
    nodes.sort_by_key(|&q| g.yx(q));
    nodes
}

/// Nearest other high-degree node by hop distance, ties by `(y, x)`.
pub fn nearest_high_degree(g: &DeviceGraph, q: QubitId) -> Option<QubitId> {
    let dist = g.bfs(q, |_| true);
    (0..g.num_qubits())
        .filter(|&o| o != q && g.degree(o) >= 3)
        .filter_map(|o| dist[o].map(|d| (d, g.yx(o), o)))
        .min()
        .map(|(_, _, o)| o)
}

pub fn build_bridge_rectangles(g: &DeviceGraph, mode: AllocationMode) -> Result<Vec<BridgeRectangle>> {
    let hubs = high_degree_nodes(g);
    if hubs.is_empty() {
        return Err(Error::Infeasible(format!("device '{}' has no qubit of degree >= 3", g.name())));
    }
    let mut seen = BTreeSet::new();
    let mut rects = Vec::new();
    for &na in &hubs {
        let anchors = match (g.degree(na), mode) {
            (d, _) if d >= 4 => vec![na],
            (_, AllocationMode::Center4) => continue,
            _ => match nearest_high_degree(g, na) {
                Some(nb) => vec![na, nb],
                None => continue,
            },
        };
        let rect = BridgeRectangle::around(g, anchors);
        if seen.insert(rect.bounds) {
            rects.push(rect);
        }
    }
    if rects.is_empty() {
        return Err(Error::Infeasible(format!(
            "device '{}' yields no bridge rectangle in {mode} mode",
            g.name()
        )));
    }
    Ok(rects)
}

/// Zero-area intersection; shared boundary lines are allowed.
pub fn compatible(r1: &BridgeRectangle, r2: &BridgeRectangle) -> bool {
    r1.bounds.intersection_area(&r2.bounds) == 0
}

/// Rectangles surrounding a prospective data qubit, by the corner they occupy.
#[derive(Clone, Copy, Debug, Default)]
pub struct Surrounding<'a> {
    pub top_left: Option<&'a Rect>,
    pub top_right: Option<&'a Rect>,
    pub bottom_left: Option<&'a Rect>,
    pub bottom_right: Option<&'a Rect>,
}

/// Qubits enclosed by the surrounding rectangles. Missing corners relax the
/// corresponding side, which is how boundary positions are located.
pub fn potential_data_area(g: &DeviceGraph, s: &Surrounding) -> Vec<QubitId> {
    let (lo_x, hi_x, lo_y, hi_y) = area_limits(s);
    let rects: Vec<&Rect> = [s.top_left, s.top_right, s.bottom_left, s.bottom_right].into_iter().flatten().collect();
    let mut area: Vec<QubitId> = (0..g.num_qubits())
        .filter(|&q| {
            let (x, y) = g.coord(q);
            lo_x.is_none_or(|l| x >= l)
                && hi_x.is_none_or(|h| x <= h)
                && lo_y.is_none_or(|l| y >= l)
                && hi_y.is_none_or(|h| y <= h)
                && !rects.iter().any(|r| r.strictly_contains(x, y))
        })
        .collect();
    area.sort_by_key(|&q| g.yx(q));
    area
}

fn area_limits(s: &Surrounding) -> (Option<i32>, Option<i32>, Option<i32>, Option<i32>) {
    let max = |a: Option<i32>, b: Option<i32>| match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, y) => x.or(y),
    };
    let min = |a: Option<i32>, b: Option<i32>| match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    };
    let lo_x = max(s.top_left.map(|r| r.xmax), s.bottom_left.map(|r| r.xmax));
    let hi_x = min(s.top_right.map(|r| r.xmin), s.bottom_right.map(|r| r.xmin));
    let lo_y = max(s.top_left.map(|r| r.ymax), s.top_right.map(|r| r.ymax));
    let hi_y = min(s.bottom_left.map(|r| r.ymin), s.bottom_right.map(|r| r.ymin));
    (lo_x, hi_x, lo_y, hi_y)
}

/// The area qubit nearest the area's centre; on a relaxed side the
/// constrained edge stands in for the centre. Ties by `(y, x)`.
pub fn pick_data_qubit(g: &DeviceGraph, s: &Surrounding) -> Option<QubitId> {
    let area = potential_data_area(g, s);
    let (lo_x, hi_x, lo_y, hi_y) = area_limits(s);
    let centroid = |f: fn((i32, i32)) -> i32| {
        area.iter().map(|&q| f(g.coord(q)) as f64).sum::<f64>() / area.len().max(1) as f64
    };
    let target = |lo: Option<i32>, hi: Option<i32>, c: f64| match (lo, hi) {
        (Some(_), Some(_)) | (None, None) => c,
        (Some(l), None) => l as f64,
        (None, Some(h)) => h as f64,
    };
    let tx = target(lo_x, hi_x, centroid(|p| p.0));
    let ty = target(lo_y, hi_y, centroid(|p| p.1));
    area.into_iter().min_by(|&a, &b| {
        let d = |q: QubitId| {
            let (x, y) = g.coord(q);
            (x as f64 - tx).powi(2) + (y as f64 - ty).powi(2)
        };
        d(a).total_cmp(&d(b)).then(g.yx(a).cmp(&g.yx(b)))
    })
}

/// Candidate lattice vectors for a mode, smallest cells first.
pub fn candidate_vectors(mode: AllocationMode) -> Vec<PointPair> {
    let mut out = Vec::new();
    match mode {
        AllocationMode::Pair3 => {
            for u in 1..=8 {
                for v in 1..=8 {
                    out.push(((u, 0), (0, v)));
                }
            }
            out.sort_by_key(|&((u, _), (_, v))| (u * v, v, u));
        }
        AllocationMode::Center4 => {
            for s in 1..=8 {
                out.push(((s, s), (-s, s)));
            }
        }
    }
    out
}

/// Picks the best lattice placement over all candidate vectors and origins.
pub fn allocate_data_qubits(g: &DeviceGraph, d: usize, mode: AllocationMode) -> Result<DataLayout> {
    allocate_with_vectors(g, d, mode, &candidate_vectors(mode))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Score {
    bulk_bridges: usize,
    clashes: usize,
    footprint: usize,
}

pub fn allocate_with_vectors(
    g: &DeviceGraph,
    d: usize,
    mode: AllocationMode,
    vectors: &[PointPair],
) -> Result<DataLayout> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("distance must be odd and >= 3, got {d}")));
    }
    let rects = build_bridge_rectangles(g, mode)?;
    let mut origins: Vec<QubitId> = (0..g.num_qubits()).collect();
    origins.sort_by_key(|&q| g.yx(q));

    let mut cache = TreeCache::new();
    let mut best: Option<(Score, DataLayout)> = None;
    let mut first_failure: Option<String> = None;
    for &(u, v) in vectors {
        for &o in &origins {
            let pattern = Pattern { origin: g.coord(o), u, v };
            if !lattice_fits(g, d, &pattern) {
                continue;
            }
            let bound = best.as_ref().map(|(s, _)| s.bulk_bridges);
            match build_layout(g, d, mode, pattern, &rects, bound, &mut cache) {
                Ok(Some((score, layout))) => {
                    if best.as_ref().is_none_or(|(s, _)| score < *s) {
                        best = Some((score, layout));
                    }
                }
                Ok(None) => {}
                Err(e) => {
                    first_failure.get_or_insert_with(|| e.to_string());
                }
            }
        }
    }
    best.map(|(_, l)| l).ok_or_else(|| {
        Error::Infeasible(match first_failure {
            Some(msg) => format!("no distance-{d} placement in {mode} mode on '{}': {msg}", g.name()),
            None => format!(
                "no distance-{d} placement in {mode} mode on '{}': data lattice does not fit; first unsatisfiable logical position (0, 0)",
                g.name()
            ),
        })
    })
}

fn lattice_fits(g: &DeviceGraph, d: usize, p: &Pattern) -> bool {
    let d = d as i32;
    (0..d).all(|r| (0..d).all(|c| {
        let (x, y) = p.position(r, c);
        g.qubit_at(x, y).is_some()
    }))
}

struct Face {
    pos: (i32, i32),
    stab_type: StabType,
    roles: BTreeMap<Role, QubitId>,
    corners: [(i32, i32); 4],
}

fn faces(g: &DeviceGraph, d: usize, p: &Pattern) -> Vec<Face> {
    let d = d as i32;
    let mut out = Vec::new();
    for r in -1..d {
        for c in -1..d {
            let stab_type = if (r + c).rem_euclid(2) == 0 { StabType::X } else { StabType::Z };
            let mut roles = BTreeMap::new();
            let mut corners = [(0, 0); 4];
            for (k, role) in Role::ALL.into_iter().enumerate() {
                let (dr, dc) = role.offset();
                let (rr, cc) = (r + dr, c + dc);
                corners[k] = p.position(rr, cc);
                if (0..d).contains(&rr) && (0..d).contains(&cc) {
                    let (x, y) = corners[k];
                    roles.insert(role, g.qubit_at(x, y).expect("lattice fits"));
                }
            }
            let keep = match roles.len() {
                4 => true,
                2 => {
                    let row_edge = r == -1 || r == d - 1;
                    let col_edge = c == -1 || c == d - 1;
                    (row_edge && stab_type == StabType::X) || (col_edge && stab_type == StabType::Z)
                }
                _ => false,
            };
            if keep {
                out.push(Face {
                    pos: (r, c),
                    stab_type,
                    roles,
                    corners,
                });
            }
        }
    }
    out
}

fn device_bounds(g: &DeviceGraph) -> Rect {
    Rect::bounding_qubits(g, 0..g.num_qubits()).unwrap_or(Rect::point(0, 0))
}

fn clip(r: Rect, to: &Rect) -> Option<Rect> {
    let c = Rect::new(r.xmin.max(to.xmin), r.ymin.max(to.ymin), r.xmax.min(to.xmax), r.ymax.min(to.ymax));
    (c.xmin <= c.xmax && c.ymin <= c.ymax).then_some(c)
}

/// Face rectangle before any boundary handling, plus its anchoring bridge
/// rectangle when the mode requires one.
fn face_rect(
    g: &DeviceGraph,
    mode: AllocationMode,
    p: &Pattern,
    face: &Face,
) -> (Rect, Option<BridgeRectangle>) {
    let corners = Rect::bounding(face.corners).expect("four corners");
    match mode {
        AllocationMode::Pair3 => (corners, None),
        AllocationMode::Center4 => {
            let (r, c) = face.pos;
            let (ax, ay) = p.position(r, c);
            let (bx, by) = p.position(r + 1, c + 1);
            let centre = ((ax + bx) / 2, (ay + by) / 2);
            match g.qubit_at(centre.0, centre.1) {
                Some(q) if g.degree(q) >= 4 => {
                    let base = BridgeRectangle::around(g, vec![q]);
                    (corners.union(base.bounds), Some(base))
                }
                _ => (corners, None),
            }
        }
    }
}

fn excluded_in(g: &DeviceGraph, bounds: &Rect, all_data: &BTreeSet<QubitId>, own: &BTreeMap<Role, QubitId>) -> Vec<QubitId> {
    all_data
        .iter()
        .copied()
        .filter(|q| !own.values().any(|o| o == q))
        .filter(|&q| {
            let (x, y) = g.coord(q);
            bounds.contains(x, y)
        })
        .collect()
}

fn bulk_neighbor(d: i32, (r, c): (i32, i32)) -> (i32, i32) {
    (r.clamp(0, d - 2), c.clamp(0, d - 2))
}

/// Builds the full layout for one placement. `Ok(None)` means the placement
/// is valid-looking but cannot beat `bound`.
fn build_layout(
    g: &DeviceGraph,
    d: usize,
    mode: AllocationMode,
    pattern: Pattern,
    rects: &[BridgeRectangle],
    bound: Option<usize>,
    cache: &mut TreeCache,
) -> Result<Option<(Score, DataLayout)>> {
    let faces = faces(g, d, &pattern);
    let mut data_map = Vec::with_capacity(d * d);
    for r in 0..d as i32 {
        for c in 0..d as i32 {
            let (x, y) = pattern.position(r, c);
            data_map.push(DataEntry { row: r, col: c, qubit: g.qubit_at(x, y).expect("lattice fits") });
        }
    }
    let all_data: BTreeSet<QubitId> = data_map.iter().map(|e| e.qubit).collect();
    let dev = device_bounds(g);

    let mut bulk_rects: BTreeMap<(i32, i32), (Rect, Option<BridgeRectangle>)> = BTreeMap::new();
    let mut out = Vec::with_capacity(faces.len());
    let mut bulk_bridges = 0;
    // Weight-4 faces first so the bound can prune early.
    for face in faces.iter().filter(|f| f.roles.len() == 4) {
        let (bounds, base) = face_rect(g, mode, &pattern, face);
        if mode == AllocationMode::Center4 && base.is_none() {
            return Err(Error::Infeasible(format!(
                "logical position {:?} has no degree-4 centre qubit",
                face.pos
            )));
        }
        if mode == AllocationMode::Pair3 && !rects.iter().any(|r| r.anchors.iter().all(|&a| {
            let (x, y) = g.coord(a);
            bounds.contains(x, y)
        })) {
            return Err(Error::Infeasible(format!(
                "logical position {:?} encloses no bridge-rectangle anchors",
                face.pos
            )));
        }
        let excluded = excluded_in(g, &bounds, &all_data, &face.roles);
        let region = TreeRegion { bounds, terminals: face.roles.values().copied().collect(), blocked: excluded.clone() };
        let trees = cache.find(&region, g).map_err(|e| {
            Error::Infeasible(format!("logical position {:?}: {e}", face.pos))
        })?;
        bulk_bridges += trees[0].bridge_count();
        if bound.is_some_and(|b| bulk_bridges > b) {
            return Ok(None);
        }
        bulk_rects.insert(face.pos, (bounds, base.clone()));
        out.push(SyndromeRectangle {
            id: 0,
            logical_pos: face.pos,
            stab_type: face.stab_type,
            bounds,
            base,
            roles: face.roles.clone(),
            excluded,
            trees,
        });
    }

    for face in faces.iter().filter(|f| f.roles.len() == 2) {
        let (outer, _) = face_rect(g, mode, &pattern, face);
        let neighbour = bulk_neighbor(d as i32, face.pos);
        let mut attempts = Vec::new();
        if let Some(c) = clip(outer, &dev) {
            attempts.push(c);
        }
        if let Some((inner, _)) = bulk_rects.get(&neighbour) {
            attempts.push(*inner);
        }
        let mut found = None;
        for region_bounds in attempts {
            let excluded = excluded_in(g, &region_bounds, &all_data, &face.roles);
            let region = TreeRegion {
                bounds: region_bounds,
                terminals: face.roles.values().copied().collect(),
                blocked: excluded,
            };
            if let Ok(trees) = cache.find(&region, g) {
                found = Some(trees);
                break;
            }
        }
        let trees = found.ok_or_else(|| {
            Error::Infeasible(format!("boundary logical position {:?} admits no bridge tree", face.pos))
        })?;
        let tight = Rect::bounding_qubits(g, trees[0].nodes.iter().copied()).expect("tree has nodes");
        let excluded = excluded_in(g, &tight, &all_data, &face.roles);
        out.push(SyndromeRectangle {
            id: 0,
            logical_pos: face.pos,
            stab_type: face.stab_type,
            bounds: tight,
            base: None,
            roles: face.roles.clone(),
            excluded,
            trees,
        });
    }

    out.sort_by_key(|r| r.logical_pos);
    for (i, r) in out.iter_mut().enumerate() {
        r.id = i;
    }
    let clashes = separate_same_type(&mut out);

    let layout = DataLayout {
        distance: d,
        mode,
        pattern,
        data_map,
        syndrome_rects: out,
    };
    let footprint = layout.footprint(g).len();
    Ok(Some((Score { bulk_bridges, clashes, footprint }, layout)))
}

/// Reorders candidate trees so that the first choices of same-type
/// stabilizers are node-disjoint where possible. Returns how many
/// stabilizers had to keep an overlapping tree; the scheduler separates
/// those into extra partitions.
fn separate_same_type(rects: &mut [SyndromeRectangle]) -> usize {
    let mut clashes = 0;
    for t in [StabType::X, StabType::Z] {
        let mut chosen: Vec<BridgeTree> = Vec::new();
        for r in rects.iter_mut().filter(|r| r.stab_type == t) {
            match r.trees.iter().position(|cand| chosen.iter().all(|c| !c.conflicts_with(cand))) {
                Some(pick) => r.trees.swap(0, pick),
                None => clashes += 1,
            }
            chosen.push(r.trees[0].clone());
        }
    }
    clashes
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub stabilizer: usize,
    pub logical_pos: (i32, i32),
    pub reason: String,
}

/// Checks the branching-capacity condition on every weight-4 rectangle:
/// its closed region (own data plus non-data qubits) needs a qubit of
/// region degree >= 4 or two of region degree >= 3.
pub fn feasibility_check(layout: &DataLayout, g: &DeviceGraph) -> std::result::Result<(), Vec<Violation>> {
    let mut bad = Vec::new();
    for r in layout.syndrome_rects.iter().filter(|r| r.weight() == 4) {
        let own: BTreeSet<QubitId> = r.data().into_iter().collect();
        let excluded: BTreeSet<QubitId> = r.excluded.iter().copied().collect();
        let region: BTreeSet<QubitId> = r.bounds.qubits(g).into_iter().filter(|q| !excluded.contains(q)).collect();
        let degrees: Vec<usize> = region
            .iter()
            .filter(|q| !own.contains(q))
            .map(|&q| g.neighbors(q).iter().filter(|n| region.contains(n)).count())
            .collect();
        let ok = degrees.iter().any(|&x| x >= 4) || degrees.iter().filter(|&&x| x >= 3).count() >= 2;
        if !ok {
            bad.push(Violation {
                stabilizer: r.id,
                logical_pos: r.logical_pos,
                reason: "no degree-4 qubit and fewer than two degree-3 qubits inside the rectangle".into(),
            });
        }
    }
    if bad.is_empty() {
        Ok(())
    } else {
        Err(bad)
    }
}
