//! Uniform cell grid over the torus for fixed-radius neighbor queries.
//!
//! Cells are at least as wide as the query radius, so every neighbor of a
//! point lies in the 3×3 block of cells around it (with wrap-around).

use crate::region::{torus_distance, DeviceSet, Point, TorusRegion};

#[derive(Debug, Clone)]
pub struct CellGrid {
    region: TorusRegion,
    cells_per_side: usize,
    cell_size: f64,
    // CSR layout: ids of cell c are ids[starts[c]..starts[c + 1]], ascending.
    starts: Vec<usize>,
    ids: Vec<usize>,
}

impl CellGrid {
    /// Indexes `devices` with cells no narrower than `min_cell` meters.
    pub fn new(devices: &DeviceSet, min_cell: f64) -> Self {
        let region = *devices.region();
        let l = region.side_length();
        let by_radius = if min_cell > 0.0 {
            (l / min_cell).floor().max(1.0) as usize
        } else {
            usize::MAX
        };
        // More cells than ~4 per device buys nothing.
        let by_count = 2 * ((devices.count() as f64).sqrt().ceil() as usize).max(1);
        let cells_per_side = by_radius.min(by_count).max(1);
        let cell_size = l / cells_per_side as f64;

        let n_cells = cells_per_side * cells_per_side;
        let cell_of: Vec<usize> = devices
            .positions()
            .iter()
            .map(|&p| Self::locate(p, cell_size, cells_per_side))
            .collect();
        let mut starts = vec![0usize; n_cells + 1];
        for &c in &cell_of {
            starts[c + 1] += 1;
        }
        for c in 0..n_cells {
            starts[c + 1] += starts[c];
        }
        let mut fill = starts.clone();
        let mut ids = vec![0usize; devices.count()];
        for (id, &c) in cell_of.iter().enumerate() {
            ids[fill[c]] = id;
            fill[c] += 1;
        }
        Self {
            region,
            cells_per_side,
            cell_size,
            starts,
            ids,
        }
    }

    fn locate(p: Point, cell_size: f64, m: usize) -> usize {
        let cx = ((p.x / cell_size) as usize).min(m - 1);
        let cy = ((p.y / cell_size) as usize).min(m - 1);
        cy * m + cx
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn cells_per_side(&self) -> usize {
        self.cells_per_side
    }

    /// Distinct cells of the wrapped 3×3 block around the cell holding `p`.
    fn block(&self, p: Point) -> Vec<usize> {
        let m = self.cells_per_side;
        let c = Self::locate(p, self.cell_size, m);
        let (cx, cy) = (c % m, c / m);
        let mut cells = Vec::with_capacity(9);
        for dy in [m - 1, 0, 1] {
            for dx in [m - 1, 0, 1] {
                let cell = ((cy + dy) % m) * m + (cx + dx) % m;
                if !cells.contains(&cell) {
                    cells.push(cell);
                }
            }
        }
        cells.sort_unstable();
        cells
    }

    /// Calls `f(id)` for every indexed device within `radius` of `p`.
    ///
    /// `radius` must not exceed the cell size.
    pub fn for_each_within(&self, positions: &[Point], p: Point, radius: f64, mut f: impl FnMut(usize)) {
        debug_assert!(radius <= self.cell_size * (1.0 + 1e-12));
        for cell in self.block(p) {
            for &id in &self.ids[self.starts[cell]..self.starts[cell + 1]] {
                if torus_distance(p, positions[id], &self.region) <= radius {
                    f(id);
                }
            }
        }
    }
}
