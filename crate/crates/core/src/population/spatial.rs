use serde::{Deserialize, Serialize};

use crate::engine::AgentId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist2(self, other: Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// Uniform grid over the square `[0, side]^2`. The region is bounded:
/// queries near an edge see only the part of the ball inside the square.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    side: f64,
    cell: f64,
    dim: usize,
    cells: Vec<Vec<(AgentId, Point)>>,
    len: usize,
}

impl SpatialIndex {
    /// `cell_size` should be at least the largest radius queried.
    pub fn new(side: f64, cell_size: f64) -> Self {
        assert!(side > 0.0 && cell_size > 0.0);
        let dim = ((side / cell_size).ceil() as usize).clamp(1, 4096);
        let cell = side / dim as f64;
        SpatialIndex {
            side,
            cell,
            dim,
            cells: vec![Vec::new(); dim * dim],
            len: 0,
        }
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn coord(&self, v: f64) -> usize {
        ((v / self.cell).floor().max(0.0) as usize).min(self.dim - 1)
    }

    fn cell_of(&self, p: Point) -> usize {
        self.coord(p.y) * self.dim + self.coord(p.x)
    }

    pub fn insert(&mut self, id: AgentId, p: Point) {
        let c = self.cell_of(p);
        self.cells[c].push((id, p));
        self.len += 1;
    }

    /// Returns false if `id` was not stored at `p`.
    pub fn remove(&mut self, id: AgentId, p: Point) -> bool {
        let c = self.cell_of(p);
        let cell = &mut self.cells[c];
        match cell.iter().position(|(i, _)| *i == id) {
            Some(pos) => {
                cell.swap_remove(pos);
                self.len -= 1;
                true
            }
            None => false,
        }
    }

    /// Visit every stored agent at Euclidean distance `<= radius` from `center`.
    pub fn for_each_within(&self, center: Point, radius: f64, mut f: impl FnMut(AgentId, Point)) {
        if !(radius > 0.0) {
            return;
        }
        let r2 = radius * radius;
        let x0 = self.coord(center.x - radius);
        let x1 = self.coord(center.x + radius);
        let y0 = self.coord(center.y - radius);
        let y1 = self.coord(center.y + radius);
        for cy in y0..=y1 {
            for cx in x0..=x1 {
                for &(id, p) in &self.cells[cy * self.dim + cx] {
                    if p.dist2(center) <= r2 {
                        f(id, p);
                    }
                }
            }
        }
    }

    /// Agents within `radius` of `center`, excluding `exclude`.
    pub fn neighbors_within(&self, center: Point, radius: f64, exclude: AgentId) -> Vec<AgentId> {
        let mut out = Vec::new();
        self.for_each_within(center, radius, |id, _| {
            if id != exclude {
                out.push(id);
            }
        });
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_is_empty() {
        let mut idx = SpatialIndex::new(10.0, 2.0);
        idx.insert(AgentId(0), Point::new(5.0, 5.0));
        idx.insert(AgentId(1), Point::new(5.0, 5.0));
        assert!(idx
            .neighbors_within(Point::new(5.0, 5.0), 0.0, AgentId(0))
            .is_empty());
    }

    #[test]
    fn boundary_does_not_wrap() {
        let mut idx = SpatialIndex::new(100.0, 10.0);
        idx.insert(AgentId(0), Point::new(0.5, 50.0));
        idx.insert(AgentId(1), Point::new(99.5, 50.0));
        let n = idx.neighbors_within(Point::new(0.5, 50.0), 5.0, AgentId(0));
        assert!(n.is_empty());
    }

    #[test]
    fn inclusive_radius_and_removal() {
        let mut idx = SpatialIndex::new(10.0, 3.0);
        idx.insert(AgentId(0), Point::new(1.0, 1.0));
        idx.insert(AgentId(1), Point::new(4.0, 5.0));
        assert_eq!(
            idx.neighbors_within(Point::new(1.0, 1.0), 5.0, AgentId(0)),
            vec![AgentId(1)]
        );
        assert!(idx.remove(AgentId(1), Point::new(4.0, 5.0)));
        assert!(!idx.remove(AgentId(1), Point::new(4.0, 5.0)));
        assert_eq!(idx.len(), 1);
    }
}
