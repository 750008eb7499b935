//! Random floorplan and maze graphs: a uniform spanning tree of the
//! `M x N` grid with each remaining grid edge re-inserted independently
//! with probability `p0`.
//!
//! Randomness comes from one `ChaCha8Rng` stream seeded with the spec's
//! seed. The tree is drawn first (Wilson's algorithm, root at node 0,
//! starting walks from nodes in ascending order, one `gen_range` per walk
//! step); then one `f64` coin is drawn for every non-tree grid edge in
//! lexicographic order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{grid_edges, Graph};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloorplanSpec {
    pub rows: usize,
    pub cols: usize,
    pub p0: f64,
    pub seed: u64,
}

impl FloorplanSpec {
    pub fn new(rows: usize, cols: usize, p0: f64, seed: u64) -> Result<Self> {
        let spec = FloorplanSpec { rows, cols, p0, seed };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParameter("M and N must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p0) {
            return Err(Error::InvalidParameter(format!("p0 = {} is outside [0, 1]", self.p0)));
        }
        Ok(())
    }
}

/// Samples a uniformly random spanning tree of `grid` with Wilson's
/// loop-erased random walks. Returns tree edges as `(u, v)`, `u < v`.
pub fn uniform_spanning_tree(grid: &Graph, rng: &mut impl Rng) -> Vec<(usize, usize)> {
    let n = grid.n();
    let mut in_tree = vec![false; n];
    let mut next = vec![usize::MAX; n];
    in_tree[0] = true;
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let nbrs = grid.neighbors(u);
            next[u] = nbrs[rng.gen_range(0..nbrs.len())];
            u = next[u];
        }
        // retrace the walk; overwritten `next` pointers erase the loops
        u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    let mut edges: Vec<_> = (1..n).map(|v| (v.min(next[v]), v.max(next[v]))).collect();
    edges.sort_unstable();
    edges
}

pub fn floorplan_graph(spec: &FloorplanSpec) -> Result<Graph> {
    spec.validate()?;
    let n = spec.rows * spec.cols;
    let grid = Graph::from_edges(n, grid_edges(spec.rows, spec.cols))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let tree = uniform_spanning_tree(&grid, &mut rng);
    let mut edges = Vec::with_capacity(grid.edge_count());
    let mut t = tree.iter().peekable();
    for &e in grid.edges() {
        if t.peek() == Some(&&e) {
            t.next();
            edges.push(e);
        } else if rng.gen::<f64>() < spec.p0 {
            edges.push(e);
        }
    }
    Graph::from_edges(n, edges)
}

/// The corridor graph of a maze. The same generator as [`floorplan_graph`];
/// the maze's edge game is played on its line graph.
pub fn maze_graph(spec: &FloorplanSpec) -> Result<Graph> {
    floorplan_graph(spec)
}
