//! Device graphs on an integer grid.
//!
//! Coordinates are doubled so that the midpoint qubits of heavy
//! architectures land on integer points: a plain lattice site `(i, j)`
//! sits at `(2i, 2j)` and an inserted edge qubit at the odd midpoint.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type QubitId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QubitRecord {
    pub id: QubitId,
    pub x: i32,
    pub y: i32,
}

#[derive(Clone, Debug)]
pub struct DeviceGraph {
    name: String,
    qubits: Vec<QubitRecord>,
    edges: BTreeSet<(QubitId, QubitId)>,
    adj: Vec<Vec<QubitId>>,
    by_coord: HashMap<(i32, i32), QubitId>,
}

impl PartialEq for DeviceGraph {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.qubits == other.qubits && self.edges == other.edges
    }
}

impl Eq for DeviceGraph {}

impl DeviceGraph {
    /// Builds a graph and checks every structural invariant, collecting all
    /// violations into one validation error.
    pub fn new(
        name: impl Into<String>,
        qubits: Vec<QubitRecord>,
        edges: impl IntoIterator<Item = (QubitId, QubitId)>,
    ) -> Result<Self> {
        let mut problems = Vec::new();
        let n = qubits.len();
        for (pos, q) in qubits.iter().enumerate() {
            if q.id != pos {
                problems.push(format!("qubit at position {pos} has id {} (ids must be dense 0..{n})", q.id));
            }
        }
        let mut by_coord = HashMap::with_capacity(n);
        for q in &qubits {
            if let Some(prev) = by_coord.insert((q.x, q.y), q.id) {
                problems.push(format!("qubits {prev} and {} share coordinate ({}, {})", q.id, q.x, q.y));
            }
        }
        let mut edge_set = BTreeSet::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                problems.push(format!("edge ({u}, {v}) references an unknown qubit"));
                continue;
            }
            if u == v {
                problems.push(format!("self-loop on qubit {u}"));
                continue;
            }
            let e = (u.min(v), u.max(v));
            if !edge_set.insert(e) {
                problems.push(format!("duplicate edge ({}, {})", e.0, e.1));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }

        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edge_set {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_by_key(|&q| (qubits[q].y, qubits[q].x));
        }
        let g = DeviceGraph {
            name: name.into(),
            qubits,
            edges: edge_set,
            adj,
            by_coord,
        };
        if n > 0 {
            let reach = g.bfs(0, |_| true);
            let unreached: Vec<_> = (0..n).filter(|&q| reach[q].is_none()).collect();
            if !unreached.is_empty() {
                return Err(Error::Validation(vec![format!(
                    "graph is disconnected; unreachable from qubit 0: {unreached:?}"
                )]));
            }
        }
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn qubits(&self) -> &[QubitRecord] {
        &self.qubits
    }

    pub fn edges(&self) -> &BTreeSet<(QubitId, QubitId)> {
        &self.edges
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn neighbors(&self, q: QubitId) -> &[QubitId] {
        &self.adj[q]
    }

    pub fn degree(&self, q: QubitId) -> usize {
        self.adj[q].len()
    }

    pub fn coord(&self, q: QubitId) -> (i32, i32) {
        let r = &self.qubits[q];
        (r.x, r.y)
    }

    /// Row-major ordering key: top-left first.
    pub fn yx(&self, q: QubitId) -> (i32, i32) {
        let r = &self.qubits[q];
        (r.y, r.x)
    }

    pub fn qubit_at(&self, x: i32, y: i32) -> Option<QubitId> {
        self.by_coord.get(&(x, y)).copied()
    }

    pub fn has_edge(&self, u: QubitId, v: QubitId) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn average_degree(&self) -> f64 {
        if self.qubits.is_empty() {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.qubits.len() as f64
    }

    /// Hop distances from `src` through qubits accepted by `allowed`
    /// (the source itself is always entered).
    pub fn bfs(&self, src: QubitId, allowed: impl Fn(QubitId) -> bool) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.qubits.len()];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adj[u] {
                if dist[v].is_none() && allowed(v) {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Canonical device-file text. Byte-stable for equal graphs.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n");
        out.push_str(&format!(
            "  \"name\": {},\n",
            serde_json::to_string(&self.name).unwrap_or_else(|_| "\"\"".into())
        ));
        out.push_str("  \"qubits\": [");
        for (i, q) in self.qubits.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            out.push_str(&format!("    {{\"id\": {}, \"x\": {}, \"y\": {}}}", q.id, q.x, q.y));
        }
        out.push_str(if self.qubits.is_empty() { "],\n" } else { "\n  ],\n" });
        out.push_str("  \"edges\": [");
        for (i, (u, v)) in self.edges.iter().enumerate() {
            out.push_str(if i == 0 { "\n" } else { ",\n" });
            out.push_str(&format!("    [{u}, {v}]"));
        }
        out.push_str(if self.edges.is_empty() { "]\n" } else { "\n  ]\n" });
        out.push_str("}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct DeviceFile {
            name: String,
            qubits: Vec<QubitRecord>,
            edges: Vec<[QubitId; 2]>,
        }
        let file: DeviceFile = serde_json::from_str(text)?;
        DeviceGraph::new(file.name, file.qubits, file.edges.into_iter().map(|[u, v]| (u, v)))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

fn check_dims(rows: usize, cols: usize, min_rows: usize, min_cols: usize) -> Result<()> {
    if rows < min_rows || cols < min_cols {
        return Err(Error::InvalidDimension(format!(
            "got {rows}x{cols}, need at least {min_rows} rows and {min_cols} columns"
        )));
    }
    Ok(())
}

fn lattice_qubits(rows: usize, cols: usize) -> Vec<QubitRecord> {
    (0..rows)
        .flat_map(|j| (0..cols).map(move |i| (i, j)))
        .enumerate()
        .map(|(id, (i, j))| QubitRecord {
            id,
            x: 2 * i as i32,
            y: 2 * j as i32,
        })
        .collect()
}

/// Full square lattice; qubit `(i, j)` has id `j * cols + i`.
pub fn gen_square(rows: usize, cols: usize) -> Result<DeviceGraph> {
    check_dims(rows, cols, 2, 2)?;
    let id = |i: usize, j: usize| j * cols + i;
    let mut edges = Vec::new();
    for j in 0..rows {
        for i in 0..cols {
            if i + 1 < cols {
                edges.push((id(i, j), id(i + 1, j)));
            }
            if j + 1 < rows {
                edges.push((id(i, j), id(i, j + 1)));
            }
        }
    }
    DeviceGraph::new(format!("square-{rows}x{cols}"), lattice_qubits(rows, cols), edges)
}

/// Hexagonal lattice squashed into a brick wall: every horizontal edge is
/// present, vertical edges only where `i + j` is even.
pub fn gen_hexagon(rows: usize, cols: usize) -> Result<DeviceGraph> {
    check_dims(rows, cols, 2, 3)?;
    let id = |i: usize, j: usize| j * cols + i;
    let mut edges = Vec::new();
    for j in 0..rows {
        for i in 0..cols {
            if i + 1 < cols {
                edges.push((id(i, j), id(i + 1, j)));
            }
            if j + 1 < rows && (i + j) % 2 == 0 {
                edges.push((id(i, j), id(i, j + 1)));
            }
        }
    }
    DeviceGraph::new(format!("hexagon-{rows}x{cols}"), lattice_qubits(rows, cols), edges)
}

/// Subdivides every edge with one new qubit at its midpoint. Original ids are
/// kept; inserted qubits follow in edge order.
pub fn gen_heavy(g: &DeviceGraph) -> Result<DeviceGraph> {
    let mut qubits = g.qubits.clone();
    let mut edges = Vec::with_capacity(2 * g.edges.len());
    for &(u, v) in &g.edges {
        let (ux, uy) = g.coord(u);
        let (vx, vy) = g.coord(v);
        if (ux + vx) % 2 != 0 || (uy + vy) % 2 != 0 {
            return Err(Error::Embedding(format!(
                "midpoint of edge ({u}, {v}) is not on the integer grid"
            )));
        }
        let (mx, my) = ((ux + vx) / 2, (uy + vy) / 2);
        if g.qubit_at(mx, my).is_some() {
            return Err(Error::Embedding(format!(
                "midpoint ({mx}, {my}) of edge ({u}, {v}) is already occupied"
            )));
        }
        let m = qubits.len();
        qubits.push(QubitRecord { id: m, x: mx, y: my });
        edges.push((u, m));
        edges.push((m, v));
    }
    DeviceGraph::new(format!("heavy-{}", g.name), qubits, edges)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    Square,
    Hexagon,
    HeavySquare,
    HeavyHexagon,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [
        Architecture::Square,
        Architecture::Hexagon,
        Architecture::HeavySquare,
        Architecture::HeavyHexagon,
    ];

    /// A `rows x cols` patch, counted in sites of the underlying plain lattice.
    pub fn generate(self, rows: usize, cols: usize) -> Result<DeviceGraph> {
        match self {
            Architecture::Square => gen_square(rows, cols),
            Architecture::Hexagon => gen_hexagon(rows, cols),
            Architecture::HeavySquare => gen_heavy(&gen_square(rows, cols)?),
            Architecture::HeavyHexagon => gen_heavy(&gen_hexagon(rows, cols)?),
        }
    }

    pub fn min_dims(self) -> (usize, usize) {
        match self {
            Architecture::Square | Architecture::HeavySquare => (2, 2),
            Architecture::Hexagon | Architecture::HeavyHexagon => (2, 3),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Square => "square",
            Architecture::Hexagon => "hexagon",
            Architecture::HeavySquare => "heavy-square",
            Architecture::HeavyHexagon => "heavy-hexagon",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Architecture::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown architecture '{s}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn degrees(g: &DeviceGraph) -> Vec<usize> {
        (0..g.num_qubits()).map(|q| g.degree(q)).collect()
    }

    #[test]
    fn smallest_square() {
        let g = gen_square(2, 2).unwrap();
        assert_eq!(g.num_qubits(), 4);
        assert_eq!(g.edges().len(), 4);
        assert!(degrees(&g).iter().all(|&d| d == 2));
    }

    #[test]
    fn square_three_by_three() {
        let g = gen_square(3, 3).unwrap();
        assert_eq!(g.num_qubits(), 9);
        assert_eq!(g.edges().len(), 12);
        assert_eq!(g.degree(g.qubit_at(2, 2).unwrap()), 4);
    }

    #[test]
    fn square_seven_by_seven_degrees() {
        let g = gen_square(7, 7).unwrap();
        assert_eq!(g.num_qubits(), 49);
        let count = |d| degrees(&g).iter().filter(|&&x| x == d).count();
        assert_eq!((count(2), count(3), count(4)), (4, 20, 25));
    }

    #[test]
    fn rejects_small_dimensions() {
        assert!(matches!(gen_square(1, 5), Err(Error::InvalidDimension(_))));
        assert!(matches!(gen_hexagon(2, 2), Err(Error::InvalidDimension(_))));
    }

    #[test]
    fn smallest_hexagon() {
        let g = gen_hexagon(2, 3).unwrap();
        assert_eq!(g.num_qubits(), 6);
        let verticals: Vec<_> = g
            .edges()
            .iter()
            .filter(|&&(u, v)| g.coord(u).0 == g.coord(v).0)
            .map(|&(u, _)| g.coord(u).0 / 2)
            .collect();
        assert_eq!(verticals, vec![0, 2]);
    }

    #[test]
    fn hexagon_max_degree_three() {
        let g = gen_hexagon(4, 6).unwrap();
        assert_eq!(degrees(&g).into_iter().max(), Some(3));
    }

    #[test]
    fn hexagon_faces_are_six_cycles() {
        let (rows, cols) = (6, 8);
        let g = gen_hexagon(rows, cols).unwrap();
        let at = |i: usize, j: usize| g.qubit_at(2 * i as i32, 2 * j as i32).unwrap();
        let mut faces = 0;
        for j in 0..rows - 1 {
            for i in 0..cols - 2 {
                if !(g.has_edge(at(i, j), at(i, j + 1)) && g.has_edge(at(i + 2, j), at(i + 2, j + 1))) {
                    continue;
                }
                assert!(!g.has_edge(at(i + 1, j), at(i + 1, j + 1)));
                let cycle = [at(i, j), at(i + 1, j), at(i + 2, j), at(i + 2, j + 1), at(i + 1, j + 1), at(i, j + 1)];
                for k in 0..6 {
                    assert!(g.has_edge(cycle[k], cycle[(k + 1) % 6]));
                }
                faces += 1;
            }
        }
        // Bounded faces of a connected plane graph: E - V + 1.
        assert_eq!(faces, g.edges().len() + 1 - g.num_qubits());
    }

    #[test]
    fn heavy_counts() {
        let g = gen_heavy(&gen_square(2, 2).unwrap()).unwrap();
        assert_eq!((g.num_qubits(), g.edges().len()), (8, 8));
        assert!((4..8).all(|q| g.degree(q) == 2));

        let g = gen_heavy(&gen_square(3, 3).unwrap()).unwrap();
        assert_eq!((g.num_qubits(), g.edges().len()), (21, 24));

        let hex = gen_hexagon(4, 6).unwrap();
        let heavy = gen_heavy(&hex).unwrap();
        assert_eq!(heavy.num_qubits() - hex.num_qubits(), hex.edges().len());
    }

    #[test]
    fn heavy_average_degree_identity() {
        for g in [gen_square(5, 4).unwrap(), gen_hexagon(5, 7).unwrap()] {
            let h = gen_heavy(&g).unwrap();
            let (v, e) = (g.num_qubits() as f64, g.edges().len() as f64);
            assert!((h.average_degree() - 4.0 * e / (v + e)).abs() < 1e-12);
        }
    }

    #[test]
    fn heavy_rejects_occupied_midpoint() {
        let qubits = vec![
            QubitRecord { id: 0, x: 0, y: 0 },
            QubitRecord { id: 1, x: 2, y: 0 },
            QubitRecord { id: 2, x: 1, y: 0 },
        ];
        let g = DeviceGraph::new("t", qubits, [(0, 1), (1, 2)]).unwrap();
        assert!(matches!(gen_heavy(&g), Err(Error::Embedding(_))));
    }

    #[test]
    fn json_round_trip_is_byte_stable() {
        let g = gen_heavy(&gen_hexagon(3, 4).unwrap()).unwrap();
        let text = g.to_json();
        let back = DeviceGraph::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dev.json");
        let g = gen_square(3, 3).unwrap();
        g.save(&path).unwrap();
        assert_eq!(DeviceGraph::load(&path).unwrap(), g);
    }

    #[test]
    fn duplicate_coordinate_is_rejected() {
        let text = r#"{"name":"x","qubits":[{"id":0,"x":0,"y":0},{"id":1,"x":0,"y":0}],"edges":[[0,1]]}"#;
        match DeviceGraph::from_json(text) {
            Err(Error::Validation(msgs)) => assert!(msgs[0].contains("share coordinate")),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_edge_endpoint_is_rejected() {
        let text = r#"{"name":"x","qubits":[{"id":0,"x":0,"y":0},{"id":1,"x":2,"y":0}],"edges":[[0,7]]}"#;
        assert!(matches!(DeviceGraph::from_json(text), Err(Error::Validation(_))));
    }

    #[test]
    fn malformed_file_reports_position() {
        let text = "{\n  \"name\": \"x\",\n  \"qubits\": [oops]\n}";
        match DeviceGraph::from_json(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn disconnected_graph_is_rejected() {
        let qubits = vec![QubitRecord { id: 0, x: 0, y: 0 }, QubitRecord { id: 1, x: 4, y: 0 }];
        assert!(matches!(
            DeviceGraph::new("t", qubits, std::iter::empty()),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn architecture_names_round_trip() {
        for a in Architecture::ALL {
            assert_eq!(a.as_str().parse::<Architecture>().unwrap(), a);
        }
    }
}
