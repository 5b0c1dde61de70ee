use serde::{Deserialize, Serialize};

use crate::arch::{DeviceGraph, QubitId};

/// Two grid points: an edge, or a pair of lattice vectors.
pub type PointPair = ((i32, i32), (i32, i32));

/// Closed axis-aligned rectangle on the doubled grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rect {
    pub xmin: i32,
    pub ymin: i32,
    pub xmax: i32,
    pub ymax: i32,
}

impl Rect {
    pub fn new(xmin: i32, ymin: i32, xmax: i32, ymax: i32) -> Self {
        Rect { xmin, ymin, xmax, ymax }
    }

    pub fn point(x: i32, y: i32) -> Self {
        Rect::new(x, y, x, y)
    }

    /// Smallest rectangle containing every listed point; `None` when empty.
    pub fn bounding(points: impl IntoIterator<Item = (i32, i32)>) -> Option<Self> {
        points.into_iter().fold(None, |acc, (x, y)| {
            Some(match acc {
                None => Rect::point(x, y),
                Some(r) => r.include(x, y),
            })
        })
    }

    pub fn bounding_qubits(g: &DeviceGraph, qubits: impl IntoIterator<Item = QubitId>) -> Option<Self> {
        Rect::bounding(qubits.into_iter().map(|q| g.coord(q)))
    }

    pub fn include(self, x: i32, y: i32) -> Self {
        Rect::new(self.xmin.min(x), self.ymin.min(y), self.xmax.max(x), self.ymax.max(y))
    }

    pub fn union(self, o: Rect) -> Self {
        Rect::new(
            self.xmin.min(o.xmin),
            self.ymin.min(o.ymin),
            self.xmax.max(o.xmax),
            self.ymax.max(o.ymax),
        )
    }

    pub fn contains(&self, x: i32, y: i32) -> bool {
        (self.xmin..=self.xmax).contains(&x) && (self.ymin..=self.ymax).contains(&y)
    }

    pub fn strictly_contains(&self, x: i32, y: i32) -> bool {
        self.xmin < x && x < self.xmax && self.ymin < y && y < self.ymax
    }

    pub fn intersection_area(&self, o: &Rect) -> i64 {
        let w = (self.xmax.min(o.xmax) - self.xmin.max(o.xmin)).max(0) as i64;
        let h = (self.ymax.min(o.ymax) - self.ymin.max(o.ymin)).max(0) as i64;
        w * h
    }

    pub fn width(&self) -> i32 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> i32 {
        self.ymax - self.ymin
    }

    /// Qubits inside the closed rectangle, in `(y, x)` order.
    pub fn qubits(&self, g: &DeviceGraph) -> Vec<QubitId> {
        let area = (self.width() as i64 + 1) * (self.height() as i64 + 1);
        if area <= g.num_qubits() as i64 {
            (self.ymin..=self.ymax)
                .flat_map(|y| (self.xmin..=self.xmax).map(move |x| (x, y)))
                .filter_map(|(x, y)| g.qubit_at(x, y))
                .collect()
        } else {
            let mut qs: Vec<QubitId> = (0..g.num_qubits())
                .filter(|&q| {
                    let (x, y) = g.coord(q);
                    self.contains(x, y)
                })
                .collect();
            qs.sort_by_key(|&q| g.yx(q));
            qs
        }
    }
}
