//! Bridge trees: trees of ancilla qubits joining a stabilizer's data qubits
//! inside its syndrome rectangle.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::arch::{DeviceGraph, QubitId};
use crate::error::{Error, Result};
use crate::geom::{PointPair, Rect};

/// Maximum number of tied minimal trees kept per rectangle.
pub const TREE_CAP: usize = 32;
/// Shortest paths enumerated per endpoint pair while building candidates.
const PATH_CAP: usize = 6;
/// Largest interior the exhaustive oracle accepts.
pub const ORACLE_MAX_INTERIOR: usize = 64;

/// The search space for one stabilizer's tree: qubits inside `bounds`,
/// excluding every data qubit other than the stabilizer's own `terminals`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeRegion {
    pub bounds: Rect,
    pub terminals: Vec<QubitId>,
    pub blocked: Vec<QubitId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BridgeTree {
    pub nodes: BTreeSet<QubitId>,
    pub edges: BTreeSet<(QubitId, QubitId)>,
    pub leaves: Vec<QubitId>,
    pub syndrome_qubit: QubitId,
}

impl BridgeTree {
    /// Builds a tree from its edge set, picking the eccentricity-minimizing
    /// ancilla as syndrome qubit.
    pub fn from_edges(
        g: &DeviceGraph,
        edges: BTreeSet<(QubitId, QubitId)>,
        leaves: &[QubitId],
    ) -> Result<Self> {
        let nodes: BTreeSet<QubitId> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        let mut tree = BridgeTree {
            nodes,
            edges,
            leaves: leaves.to_vec(),
            syndrome_qubit: 0,
        };
        tree.validate(g)?;
        tree.syndrome_qubit = tree.center(g);
        Ok(tree)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self) -> usize {
        self.leaves.len()
    }

    /// Number of ancilla (non-data) qubits.
    pub fn bridge_count(&self) -> usize {
        self.nodes.len() - self.leaves.len()
    }

    pub fn bridge_nodes(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.nodes.iter().copied().filter(|q| !self.leaves.contains(q))
    }

    pub fn tree_neighbors(&self, q: QubitId) -> Vec<QubitId> {
        self.edges
            .iter()
            .filter_map(|&(u, v)| match () {
                _ if u == q => Some(v),
                _ if v == q => Some(u),
                _ => None,
            })
            .collect()
    }

    pub fn tree_degree(&self, q: QubitId) -> usize {
        self.edges.iter().filter(|&&(u, v)| u == q || v == q).count()
    }

    /// Prop.-1 restated: a weight-4 tree has a degree-4 node or two degree-3 nodes.
    pub fn has_branching_structure(&self) -> bool {
        let degs: Vec<usize> = self.bridge_nodes().map(|q| self.tree_degree(q)).collect();
        degs.iter().any(|&d| d >= 4) || degs.iter().filter(|&&d| d == 3).count() >= 2
    }

    fn validate(&self, g: &DeviceGraph) -> Result<()> {
        let fail = |m: String| Err(Error::Validation(vec![m]));
        if self.edges.len() + 1 != self.nodes.len() {
            return fail(format!("{} edges on {} nodes is not a tree", self.edges.len(), self.nodes.len()));
        }
        for &(u, v) in &self.edges {
            if !g.has_edge(u, v) {
                return fail(format!("tree edge ({u}, {v}) is not a device edge"));
            }
        }
        for &l in &self.leaves {
            if !self.nodes.contains(&l) || self.tree_degree(l) != 1 {
                return fail(format!("data qubit {l} is not a leaf of the tree"));
            }
        }
        if self.bridge_count() == 0 {
            return fail("tree has no ancilla qubit".into());
        }
        // Connectivity: |E| = |V| - 1 plus connected implies acyclic.
        let start = *self.nodes.iter().next().unwrap_or(&0);
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in self.tree_neighbors(u) {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        if seen.len() != self.nodes.len() {
            return fail("tree is disconnected".into());
        }
        Ok(())
    }

    fn eccentricity(&self, src: QubitId) -> usize {
        let mut dist = BTreeMap::from([(src, 0usize)]);
        let mut queue = VecDeque::from([src]);
        let mut far = 0;
        while let Some(u) = queue.pop_front() {
            let du = dist[&u];
            far = far.max(du);
            for v in self.tree_neighbors(u) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(v) {
                    e.insert(du + 1);
                    queue.push_back(v);
                }
            }
        }
        far
    }

    fn center(&self, g: &DeviceGraph) -> QubitId {
        self.bridge_nodes()
            .min_by_key(|&q| (self.eccentricity(q), g.yx(q)))
            .expect("validated tree has an ancilla")
    }

    /// Translation-invariant ordering key: edges as sorted coordinate pairs
    /// relative to the tree's top-left corner.
    pub fn coord_key(&self, g: &DeviceGraph) -> Vec<PointPair> {
        let (x0, y0) = self
            .nodes
            .iter()
            .map(|&q| g.coord(q))
            .fold((i32::MAX, i32::MAX), |(ax, ay), (x, y)| (ax.min(x), ay.min(y)));
        let rel = |q: QubitId| {
            let (x, y) = g.coord(q);
            (y - y0, x - x0)
        };
        let mut key: Vec<_> = self
            .edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (rel(u), rel(v));
                (a.min(b), a.max(b))
            })
            .collect();
        key.sort();
        key
    }

    /// Node-disjointness on ancillas; shared data leaves are allowed.
    pub fn conflicts_with(&self, other: &BridgeTree) -> bool {
        self.bridge_nodes().any(|q| other.nodes.contains(&q))
            || other.bridge_nodes().any(|q| self.nodes.contains(&q))
    }
}

/// Local view of a region with its own dense indexing and all-pairs
/// distances where only interior qubits may be intermediate hops.
struct Local {
    ids: Vec<QubitId>,
    adj: Vec<Vec<usize>>,
    interior: Vec<bool>,
    terminals: Vec<usize>,
    dist: Vec<Vec<u32>>,
}

const UNREACHABLE: u32 = u32::MAX;

impl Local {
    fn new(region: &TreeRegion, g: &DeviceGraph) -> Self {
        let blocked: BTreeSet<_> = region.blocked.iter().copied().collect();
        let terms: BTreeSet<_> = region.terminals.iter().copied().collect();
        let mut ids: Vec<QubitId> = region
            .bounds
            .qubits(g)
            .into_iter()
            .filter(|q| !blocked.contains(q) && !terms.contains(q))
            .collect();
        let n_interior = ids.len();
        ids.extend(region.terminals.iter().copied());
        ids[..n_interior].sort_by_key(|&q| g.yx(q));
        let index: BTreeMap<QubitId, usize> = ids.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let adj = ids
            .iter()
            .map(|&q| g.neighbors(q).iter().filter_map(|v| index.get(v).copied()).collect())
            .collect();
        let interior = (0..ids.len()).map(|i| i < n_interior).collect();
        let terminals = (n_interior..ids.len()).collect();
        let mut local = Local {
            ids,
            adj,
            interior,
            terminals,
            dist: Vec::new(),
        };
        local.dist = (0..local.ids.len()).map(|s| local.bfs(s)).collect();
        local
    }

    fn bfs(&self, src: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHABLE; self.ids.len()];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            if u != src && !self.interior[u] {
                continue;
            }
            for &v in &self.adj[u] {
                if dist[v] != UNREACHABLE {
                    continue;
                }
                // Terminals are endpoints only and never adjacent hops of each other.
                if self.interior[v] || self.interior[u] {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    fn interior_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ids.len()).filter(|&i| self.interior[i])
    }

    /// Up to `cap` shortest paths from `s` to `t`, as node sequences.
    fn shortest_paths(&self, s: usize, t: usize, cap: usize) -> Vec<Vec<usize>> {
        let len = self.dist[s][t];
        let mut out = Vec::new();
        if len == UNREACHABLE {
            return out;
        }
        let mut path = vec![s];
        self.extend_path(t, len, &mut path, &mut out, cap);
        out
    }

    fn extend_path(&self, t: usize, len: u32, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, cap: usize) {
        if out.len() >= cap {
            return;
        }
        let u = *path.last().expect("non-empty path");
        if u == t {
            out.push(path.clone());
            return;
        }
        let du = path.len() as u32 - 1;
        for &v in &self.adj[u] {
            let ok_node = v == t || self.interior[v];
            if ok_node && self.dist[path[0]][v] == du + 1 && self.dist[v][t] == len - du - 1 {
                path.push(v);
                self.extend_path(t, len, path, out, cap);
                path.pop();
            }
        }
    }

    /// Spanning tree of the union of `paths`, pruned to terminal leaves.
    fn tree_from_paths(&self, paths: &[&[usize]]) -> Option<BTreeSet<(usize, usize)>> {
        let mut uadj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
        for p in paths {
            for w in p.windows(2) {
                uadj.entry(w[0]).or_default().insert(w[1]);
                uadj.entry(w[1]).or_default().insert(w[0]);
            }
        }
        let root = *self.terminals.first()?;
        if !uadj.contains_key(&root) {
            return None;
        }
        let mut parent = BTreeMap::from([(root, root)]);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if u != root && !self.interior[u] {
                continue;
            }
            for &v in &uadj[&u] {
                if !parent.contains_key(&v) && (self.interior[v] || self.interior[u]) {
                    parent.insert(v, u);
                    queue.push_back(v);
                }
            }
        }
        if self.terminals.iter().any(|t| !parent.contains_key(t)) {
            return None;
        }
        let mut edges: BTreeSet<(usize, usize)> =
            parent.iter().filter(|(c, p)| c != p).map(|(&c, &p)| (c.min(p), c.max(p))).collect();
        loop {
            let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
            for &(u, v) in &edges {
                *degree.entry(u).or_default() += 1;
                *degree.entry(v).or_default() += 1;
            }
            let dangling: Vec<usize> = degree
                .iter()
                .filter(|&(&q, &d)| d == 1 && self.interior[q])
                .map(|(&q, _)| q)
                .collect();
            if dangling.is_empty() {
                break;
            }
            edges.retain(|&(u, v)| !dangling.contains(&u) && !dangling.contains(&v));
        }
        Some(edges)
    }

    fn to_tree(&self, g: &DeviceGraph, edges: &BTreeSet<(usize, usize)>) -> Result<BridgeTree> {
        let global: BTreeSet<(QubitId, QubitId)> = edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (self.ids[u], self.ids[v]);
                (a.min(b), a.max(b))
            })
            .collect();
        let leaves: Vec<QubitId> = self.terminals.iter().map(|&t| self.ids[t]).collect();
        BridgeTree::from_edges(g, global, &leaves)
    }

    fn check_reachable(&self) -> Result<()> {
        let t0 = self.terminals[0];
        for &t in &self.terminals[1..] {
            if self.dist[t0][t] == UNREACHABLE {
                return Err(Error::Infeasible(format!(
                    "data qubits {} and {} are not connected inside the rectangle",
                    self.ids[t0], self.ids[t]
                )));
            }
        }
        Ok(())
    }
}

fn keep_minimal(
    g: &DeviceGraph,
    local: &Local,
    candidates: impl IntoIterator<Item = BTreeSet<(usize, usize)>>,
) -> Result<Vec<BridgeTree>> {
    let mut best: Option<usize> = None;
    let mut kept: BTreeSet<Vec<(usize, usize)>> = BTreeSet::new();
    for edges in candidates {
        let n = edges.len();
        match best {
            Some(b) if n > b => continue,
            Some(b) if n < b => kept.clear(),
            _ => {}
        }
        best = Some(n);
        kept.insert(edges.into_iter().collect());
    }
    let mut trees = Vec::new();
    for edges in kept {
        let tree = local.to_tree(g, &edges.into_iter().collect())?;
        if !trees.contains(&tree) {
            trees.push(tree);
        }
    }
    trees.sort_by_cached_key(|t| t.coord_key(g));
    trees.truncate(TREE_CAP);
    Ok(trees)
}

fn validate_region(region: &TreeRegion) -> Result<()> {
    let w = region.terminals.len();
    if w != 2 && w != 4 {
        return Err(Error::UnsupportedStabilizer(format!("weight {w} (expected 2 or 4)")));
    }
    Ok(())
}

/// Root-first construction: every interior root joined to each data qubit by
/// shortest paths; all minimal unions are returned.
pub fn star_trees(region: &TreeRegion, g: &DeviceGraph) -> Result<Vec<BridgeTree>> {
    validate_region(region)?;
    let local = Local::new(region, g);
    local.check_reachable()?;
    let mut candidates = Vec::new();
    for root in local.interior_nodes() {
        if local.terminals.iter().any(|&t| local.dist[root][t] == UNREACHABLE) {
            continue;
        }
        let per_terminal: Vec<Vec<Vec<usize>>> =
            local.terminals.iter().map(|&t| local.shortest_paths(root, t, PATH_CAP)).collect();
        for combo in cartesian(&per_terminal.iter().map(Vec::len).collect::<Vec<_>>()) {
            let paths: Vec<&[usize]> = combo.iter().enumerate().map(|(k, &i)| per_terminal[k][i].as_slice()).collect();
            if let Some(edges) = local.tree_from_paths(&paths) {
                candidates.push(edges);
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::Infeasible("no interior root reaches every data qubit".into()));
    }
    keep_minimal(g, &local, candidates)
}

/// Pair-first construction: join the cheapest pairing of data qubits with
/// shortest paths, then connect the two paths by a shortest connector.
pub fn branching_trees(region: &TreeRegion, g: &DeviceGraph) -> Result<Vec<BridgeTree>> {
    validate_region(region)?;
    let local = Local::new(region, g);
    local.check_reachable()?;
    let t = &local.terminals;
    let d = |a: usize, b: usize| local.dist[t[a]][t[b]];
    let mut candidates = Vec::new();
    if t.len() == 2 {
        for p in local.shortest_paths(t[0], t[1], PATH_CAP) {
            candidates.extend(local.tree_from_paths(&[&p]));
        }
        return keep_minimal(g, &local, candidates);
    }

    let pairings = [((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))];
    let cost = |((a, b), (c, e)): ((usize, usize), (usize, usize))| {
        let (x, y) = (d(a, b), d(c, e));
        (x != UNREACHABLE && y != UNREACHABLE).then(|| x + y)
    };
    let min_cost = pairings.iter().filter_map(|&p| cost(p)).min();
    for &((a, b), (c, e)) in &pairings {
        if cost(((a, b), (c, e))) != min_cost || min_cost.is_none() {
            continue;
        }
        let first = local.shortest_paths(t[a], t[b], PATH_CAP);
        let second = local.shortest_paths(t[c], t[e], PATH_CAP);
        for p1 in &first {
            for p2 in &second {
                candidates.extend(connect_paths(&local, p1, p2));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::Infeasible("no connector joins the paired paths".into()));
    }
    keep_minimal(g, &local, candidates)
}

fn connect_paths(local: &Local, p1: &[usize], p2: &[usize]) -> Vec<BTreeSet<(usize, usize)>> {
    let inner1 = &p1[1..p1.len() - 1];
    let inner2 = &p2[1..p2.len() - 1];
    if inner1.iter().any(|q| inner2.contains(q)) {
        return local.tree_from_paths(&[p1, p2]).into_iter().collect();
    }
    let best = inner1
        .iter()
        .flat_map(|&a| inner2.iter().map(move |&b| local.dist[a][b]))
        .min()
        .unwrap_or(UNREACHABLE);
    if best == UNREACHABLE {
        return Vec::new();
    }
    let mut out = Vec::new();
    for &a in inner1 {
        for &b in inner2 {
            if local.dist[a][b] != best {
                continue;
            }
            for conn in local.shortest_paths(a, b, 2) {
                out.extend(local.tree_from_paths(&[p1, p2, &conn]));
            }
        }
    }
    out
}

/// Union of both constructions, filtered to the minimum edge count.
pub fn find_bridge_trees(region: &TreeRegion, g: &DeviceGraph) -> Result<Vec<BridgeTree>> {
    let star = star_trees(region, g);
    let branching = branching_trees(region, g);
    let mut all: Vec<BridgeTree> = Vec::new();
    let mut last_err = None;
    for r in [star, branching] {
        match r {
            Ok(ts) => all.extend(ts),
            Err(e) => last_err = Some(e),
        }
    }
    let Some(min) = all.iter().map(BridgeTree::edge_count).min() else {
        return Err(last_err.unwrap_or_else(|| Error::Infeasible("no bridge tree".into())));
    };
    let mut merged: Vec<BridgeTree> = Vec::new();
    for t in all.into_iter().filter(|t| t.edge_count() == min) {
        if !merged.iter().any(|m| m.edges == t.edges) {
            merged.push(t);
        }
    }
    merged.sort_by_cached_key(|t| t.coord_key(g));
    merged.truncate(TREE_CAP);
    Ok(merged)
}

/// Memo for [`find_bridge_trees`] keyed on the region's shape, so
/// translated copies of one face are solved once.
#[derive(Default)]
pub struct TreeCache {
    map: HashMap<Vec<i32>, std::result::Result<Vec<RelTree>, String>>,
}

/// A tree in coordinates relative to its region's top-left corner.
#[derive(Clone)]
pub struct RelTree {
    edges: Vec<PointPair>,
}

impl TreeCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn find(&mut self, region: &TreeRegion, g: &DeviceGraph) -> Result<Vec<BridgeTree>> {
        let (ox, oy) = (region.bounds.xmin, region.bounds.ymin);
        let key = region_key(region, g);
        let entry = self.map.entry(key).or_insert_with(|| {
            find_bridge_trees(region, g)
                .map(|trees| {
                    trees
                        .iter()
                        .map(|t| RelTree {
                            edges: t
                                .edges
                                .iter()
                                .map(|&(u, v)| {
                                    let (ux, uy) = g.coord(u);
                                    let (vx, vy) = g.coord(v);
                                    ((ux - ox, uy - oy), (vx - ox, vy - oy))
                                })
                                .collect(),
                        })
                        .collect()
                })
                .map_err(|e| e.to_string())
        });
        match entry {
            Err(msg) => Err(Error::Infeasible(msg.clone())),
            Ok(rel) => rel
                .iter()
                .map(|t| {
                    let at = |(x, y): (i32, i32)| g.qubit_at(x + ox, y + oy).expect("same shape");
                    let edges = t.edges.iter().map(|&(a, b)| {
                        let (u, v) = (at(a), at(b));
                        (u.min(v), u.max(v))
                    });
                    BridgeTree::from_edges(g, edges.collect(), &region.terminals)
                })
                .collect(),
        }
    }
}

fn region_key(region: &TreeRegion, g: &DeviceGraph) -> Vec<i32> {
    let b = region.bounds;
    let mut key = vec![b.width(), b.height()];
    for q in b.qubits(g) {
        let (x, y) = g.coord(q);
        let kind = if let Some(k) = region.terminals.iter().position(|&t| t == q) {
            1 + k as i32
        } else if region.blocked.contains(&q) {
            -1
        } else {
            0
        };
        key.extend([x - b.xmin, y - b.ymin, kind]);
        for &n in g.neighbors(q) {
            let (nx, ny) = g.coord(n);
            if b.contains(nx, ny) {
                key.extend([nx - x, ny - y]);
            }
        }
        key.push(i32::MIN);
    }
    key
}

/// In-region shortest-path distances between every pair of data qubits.
pub fn terminal_distances(region: &TreeRegion, g: &DeviceGraph) -> Vec<Vec<Option<usize>>> {
    let local = Local::new(region, g);
    local
        .terminals
        .iter()
        .map(|&a| {
            local
                .terminals
                .iter()
                .map(|&b| {
                    let d = local.dist[a][b];
                    (d != UNREACHABLE).then_some(d as usize)
                })
                .collect()
        })
        .collect()
}

/// Exact minimum tree size (edges) by exhaustive search over connected
/// ancilla subsets of increasing size.
pub fn steiner_oracle(region: &TreeRegion, g: &DeviceGraph) -> Result<usize> {
    validate_region(region)?;
    let local = Local::new(region, g);
    let interior: Vec<usize> = local.interior_nodes().collect();
    if interior.len() > ORACLE_MAX_INTERIOR {
        return Err(Error::OracleScope(format!(
            "{} interior qubits exceeds the limit of {ORACLE_MAX_INTERIOR}",
            interior.len()
        )));
    }
    let n = interior.len();
    let nbr: Vec<u64> = interior
        .iter()
        .map(|&u| {
            interior
                .iter()
                .enumerate()
                .filter(|&(_, &v)| local.adj[u].contains(&v))
                .fold(0u64, |m, (j, _)| m | 1 << j)
        })
        .collect();
    let term_masks: Vec<u64> = local
        .terminals
        .iter()
        .map(|&t| {
            interior
                .iter()
                .enumerate()
                .filter(|&(_, &v)| local.adj[t].contains(&v))
                .fold(0u64, |m, (j, _)| m | 1 << j)
        })
        .collect();
    let w = local.terminals.len();
    for k in 1..=n {
        let mut search = Esu {
            nbr: &nbr,
            k,
            accept: &|set: u64| term_masks.iter().all(|&m| m & set != 0),
        };
        if (0..n).any(|v| search.extend(1 << v, ext_of(&nbr, v, 1 << v, v), v)) {
            return Ok(k + w - 1);
        }
    }
    Err(Error::Infeasible("no connected ancilla set touches every data qubit".into()))
}

fn ext_of(nbr: &[u64], w: usize, _sub: u64, root: usize) -> u64 {
    nbr[w] & !((1u64 << root) | ((1u64 << root) - 1))
}

/// Enumeration of connected induced subgraphs (ESU) with early exit.
struct Esu<'a> {
    nbr: &'a [u64],
    k: usize,
    accept: &'a dyn Fn(u64) -> bool,
}

impl Esu<'_> {
    fn extend(&mut self, sub: u64, mut ext: u64, root: usize) -> bool {
        if sub.count_ones() as usize == self.k {
            return (self.accept)(sub);
        }
        let closed_nbhd = sub | sub_neighbors(self.nbr, sub);
        while ext != 0 {
            let w = ext.trailing_zeros() as usize;
            ext &= ext - 1;
            let above_root = !((1u64 << root) | ((1u64 << root) - 1));
            let exclusive = self.nbr[w] & !closed_nbhd & above_root;
            if self.extend(sub | 1 << w, ext | exclusive, root) {
                return true;
            }
        }
        false
    }
}

fn sub_neighbors(nbr: &[u64], sub: u64) -> u64 {
    let mut m = 0;
    let mut s = sub;
    while s != 0 {
        let v = s.trailing_zeros() as usize;
        s &= s - 1;
        m |= nbr[v];
    }
    m
}

fn cartesian(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::{gen_heavy, gen_square, QubitRecord};

    fn region(g: &DeviceGraph, bounds: Rect, terminals: &[(i32, i32)]) -> TreeRegion {
        TreeRegion {
            bounds,
            terminals: terminals.iter().map(|&(x, y)| g.qubit_at(x, y).unwrap()).collect(),
            blocked: vec![],
        }
    }

    #[test]
    fn plus_star_is_four_edges() {
        let g = gen_square(3, 3).unwrap();
        let r = region(&g, Rect::new(0, 0, 4, 4), &[(2, 0), (0, 2), (4, 2), (2, 4)]);
        let trees = find_bridge_trees(&r, &g).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].edge_count(), 4);
        assert_eq!(trees[0].syndrome_qubit, g.qubit_at(2, 2).unwrap());
        assert_eq!(steiner_oracle(&r, &g).unwrap(), 4);
    }

    #[test]
    fn weight_two_path() {
        let g = gen_square(2, 3).unwrap();
        let r = region(&g, Rect::new(0, 0, 4, 0), &[(0, 0), (4, 0)]);
        let trees = branching_trees(&r, &g).unwrap();
        assert_eq!(trees.len(), 1);
        assert_eq!(trees[0].edge_count(), 2);
        assert_eq!(trees[0].bridge_count(), 1);
    }

    #[test]
    fn corner_face_of_square_lattice() {
        // Data on the corners of a 2x1 cell: two middle qubits form the tree.
        let g = gen_square(2, 3).unwrap();
        let r = region(&g, Rect::new(0, 0, 4, 2), &[(0, 0), (0, 2), (4, 0), (4, 2)]);
        let trees = find_bridge_trees(&r, &g).unwrap();
        assert_eq!(trees[0].edge_count(), 5);
        assert_eq!(trees[0].bridge_count(), 2);
        assert!(trees[0].has_branching_structure());
        assert_eq!(steiner_oracle(&r, &g).unwrap(), 5);
    }

    #[test]
    fn heavy_square_cell_uses_three_bridges() {
        let g = gen_heavy(&gen_square(2, 2).unwrap()).unwrap();
        // Data on the two vertical midpoints (0,1) and (2,1) only: weight 2.
        let r = region(&g, Rect::new(0, 0, 2, 2), &[(0, 1), (2, 1)]);
        let trees = find_bridge_trees(&r, &g).unwrap();
        assert_eq!(trees.len(), 2);
        assert!(trees.iter().all(|t| t.bridge_count() == 3));
    }

    #[test]
    fn disconnected_interior_is_infeasible() {
        let qubits = vec![
            QubitRecord { id: 0, x: 0, y: 0 },
            QubitRecord { id: 1, x: 2, y: 0 },
            QubitRecord { id: 2, x: 4, y: 0 },
            QubitRecord { id: 3, x: 4, y: 2 },
            QubitRecord { id: 4, x: 4, y: 4 },
        ];
        let g = DeviceGraph::new("t", qubits, [(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        // Blocking qubit 2 splits the line.
        let r = TreeRegion {
            bounds: Rect::new(0, 0, 4, 4),
            terminals: vec![0, 4],
            blocked: vec![2],
        };
        assert!(matches!(find_bridge_trees(&r, &g), Err(Error::Infeasible(_))));
        assert!(matches!(steiner_oracle(&r, &g), Err(Error::Infeasible(_))));
    }

    #[test]
    fn unsupported_weight() {
        let g = gen_square(3, 3).unwrap();
        let r = region(&g, Rect::new(0, 0, 4, 4), &[(0, 0), (4, 0), (0, 4)]);
        assert!(matches!(find_bridge_trees(&r, &g), Err(Error::UnsupportedStabilizer(_))));
    }

    #[test]
    fn conflicts_ignore_shared_leaves() {
        let g = gen_square(2, 5).unwrap();
        let left = find_bridge_trees(&region(&g, Rect::new(0, 0, 4, 0), &[(0, 0), (4, 0)]), &g).unwrap();
        let right = find_bridge_trees(&region(&g, Rect::new(4, 0, 8, 0), &[(4, 0), (8, 0)]), &g).unwrap();
        assert!(!left[0].conflicts_with(&right[0]));
        assert!(left[0].conflicts_with(&left[0]));
    }
}
