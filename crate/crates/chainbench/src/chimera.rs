//! Chimera hardware graphs: a rows x cols grid of complete bipartite K_{L,L}
//! cells. Vertical-shore qubits couple to the cell below, horizontal-shore
//! qubits to the cell to the right.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Which half of a cell's bipartition a qubit sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shore {
    /// Couples to the same shore index in the cell one row down.
    Vertical,
    /// Couples to the same shore index in the cell one column right.
    Horizontal,
}

#[derive(Debug, Clone)]
pub struct ChimeraGraph {
    rows: usize,
    cols: usize,
    shore: usize,
    edges: HashSet<(u32, u32)>,
    neighbors: Vec<Vec<u32>>,
}

impl ChimeraGraph {
    pub fn new(rows: usize, cols: usize, shore: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || shore == 0 {
            return Err(Error::InvalidConfig(format!(
                "Chimera dimensions must be positive, got {rows}x{cols} with shore {shore}"
            )));
        }
        let count = rows
            .checked_mul(cols)
            .and_then(|c| c.checked_mul(2 * shore))
            .filter(|&c| c <= u32::MAX as usize)
            .ok_or_else(|| {
                Error::InvalidConfig(format!("{rows}x{cols}x{shore} graph is too large"))
            })?;

        let mut graph = ChimeraGraph {
            rows,
            cols,
            shore,
            edges: HashSet::new(),
            neighbors: vec![Vec::new(); count],
        };
        for r in 0..rows {
            for c in 0..cols {
                for k in 0..shore {
                    let v = graph.qubit(r, c, Shore::Vertical, k);
                    // Complete bipartite cell.
                    for k2 in 0..shore {
                        graph.add_edge(v, graph.qubit(r, c, Shore::Horizontal, k2));
                    }
                    // Inter-cell couplers along each shore's direction.
                    if r + 1 < rows {
                        graph.add_edge(v, graph.qubit(r + 1, c, Shore::Vertical, k));
                    }
                    if c + 1 < cols {
                        let h = graph.qubit(r, c, Shore::Horizontal, k);
                        graph.add_edge(h, graph.qubit(r, c + 1, Shore::Horizontal, k));
                    }
                }
            }
        }
        for adj in &mut graph.neighbors {
            adj.sort_unstable();
        }
        Ok(graph)
    }

    fn add_edge(&mut self, a: u32, b: u32) {
        let key = (a.min(b), a.max(b));
        if self.edges.insert(key) {
            self.neighbors[a as usize].push(b);
            self.neighbors[b as usize].push(a);
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shore(&self) -> usize {
        self.shore
    }

    pub fn qubit_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Qubit id for (row, col, shore, index-in-shore). Ids are dense:
    /// cells in row-major order, vertical shore before horizontal.
    pub fn qubit(&self, row: usize, col: usize, shore: Shore, k: usize) -> u32 {
        debug_assert!(row < self.rows && col < self.cols && k < self.shore);
        let cell = row * self.cols + col;
        let offset = match shore {
            Shore::Vertical => k,
            Shore::Horizontal => self.shore + k,
        };
        (cell * 2 * self.shore + offset) as u32
    }

    /// Inverse of `qubit`.
    pub fn coordinates(&self, id: u32) -> (usize, usize, Shore, usize) {
        let id = id as usize;
        let cell = id / (2 * self.shore);
        let within = id % (2 * self.shore);
        let (shore, k) = if within < self.shore {
            (Shore::Vertical, within)
        } else {
            (Shore::Horizontal, within - self.shore)
        };
        (cell / self.cols, cell % self.cols, shore, k)
    }

    pub fn contains(&self, id: u32) -> bool {
        (id as usize) < self.neighbors.len()
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Neighbor ids in ascending order.
    pub fn neighbors(&self, id: u32) -> &[u32] {
        &self.neighbors[id as usize]
    }

    pub fn degree(&self, id: u32) -> usize {
        self.neighbors[id as usize].len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cell_counts() {
        let g = ChimeraGraph::new(1, 1, 4).unwrap();
        assert_eq!(g.qubit_count(), 8);
        assert_eq!(g.edge_count(), 16);
        for id in 0..8 {
            assert_eq!(g.degree(id), 4);
        }
    }

    #[test]
    fn two_by_two_counts() {
        let g = ChimeraGraph::new(2, 2, 4).unwrap();
        assert_eq!(g.qubit_count(), 32);
        // 4 cells * 16 internal + 4 vertical + 4 horizontal inter-cell per seam.
        assert_eq!(g.edge_count(), 80);
    }

    #[test]
    fn edge_count_formula() {
        // Intra: M*N*L^2. Inter: (M-1)*N*L + M*(N-1)*L.
        for (m, n, l) in [(1, 1, 4), (3, 2, 4), (2, 5, 3), (16, 16, 4)] {
            let g = ChimeraGraph::new(m, n, l).unwrap();
            assert_eq!(g.qubit_count(), m * n * 2 * l);
            let expected = m * n * l * l + (m - 1) * n * l + m * (n - 1) * l;
            assert_eq!(g.edge_count(), expected, "{m}x{n}x{l}");
        }
    }

    #[test]
    fn degree_bounded_by_shore_plus_two() {
        let g = ChimeraGraph::new(3, 3, 4).unwrap();
        let max = (0..g.qubit_count() as u32).map(|q| g.degree(q)).max();
        assert_eq!(max, Some(6));
        // Middle-cell qubits hit the bound.
        let mid = g.qubit(1, 1, Shore::Vertical, 0);
        assert_eq!(g.degree(mid), 6);
    }

    #[test]
    fn coordinates_round_trip() {
        let g = ChimeraGraph::new(3, 4, 4).unwrap();
        for id in 0..g.qubit_count() as u32 {
            let (r, c, s, k) = g.coordinates(id);
            assert_eq!(g.qubit(r, c, s, k), id);
        }
    }

    #[test]
    fn couplers_follow_shore_orientation() {
        let g = ChimeraGraph::new(2, 2, 4).unwrap();
        let v = g.qubit(0, 0, Shore::Vertical, 2);
        let h = g.qubit(0, 0, Shore::Horizontal, 2);
        // Within a cell: opposite shores only.
        assert!(g.has_edge(v, h));
        assert!(!g.has_edge(v, g.qubit(0, 0, Shore::Vertical, 3)));
        // Across cells: same shore, same index, along the shore's direction.
        assert!(g.has_edge(v, g.qubit(1, 0, Shore::Vertical, 2)));
        assert!(!g.has_edge(v, g.qubit(0, 1, Shore::Vertical, 2)));
        assert!(g.has_edge(h, g.qubit(0, 1, Shore::Horizontal, 2)));
        assert!(!g.has_edge(h, g.qubit(1, 0, Shore::Horizontal, 2)));
        assert!(!g.has_edge(v, g.qubit(1, 0, Shore::Vertical, 3)));
    }

    #[test]
    fn rejects_degenerate_dimensions() {
        assert!(ChimeraGraph::new(0, 1, 4).is_err());
        assert!(ChimeraGraph::new(1, 0, 4).is_err());
        assert!(ChimeraGraph::new(1, 1, 0).is_err());
    }

    #[test]
    fn full_scale_graph() {
        let g = ChimeraGraph::new(16, 16, 4).unwrap();
        assert_eq!(g.qubit_count(), 2048);
    }
}
