//! Finite simple connected undirected graphs, the arenas every game is
//! played on.
//!
//! Nodes are indexed `0..n` in memory. The text format and every
//! user-facing listing use 1-based labels `1..=n`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graphs above this size are refused by [`is_isomorphic`].
pub const ISOMORPHISM_LIMIT: usize = 10;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Builds a graph from 0-based edges. Rejects self-loops, repeated edges,
    /// out-of-range endpoints and disconnected results.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("graph needs at least one node".into()));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::NodeOutOfRange { node: w + 1, n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u + 1));
            }
            let e = (u.min(v), u.max(v));
            if !set.insert(e) {
                return Err(Error::DuplicateEdge(e.0 + 1, e.1 + 1));
            }
        }
        let edges: Vec<_> = set.into_iter().collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Graph { adj, edges };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Open neighborhood N(v), ascending.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Closed neighborhood N[v], ascending.
    pub fn closed_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.adj[v].len() + 1);
        let mut placed = false;
        for &w in &self.adj[v] {
            if !placed && w > v {
                out.push(v);
                placed = true;
            }
            out.push(w);
        }
        if !placed {
            out.push(v);
        }
        out
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &self.adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == n
    }

    /// Serializes to the graph file format: `{"n":N,"edges":[[u,v],...]}`
    /// with 1-based labels and `u < v`.
    pub fn encode(&self) -> String {
        let file = GraphFile {
            n: self.n(),
            edges: self.edges.iter().map(|&(u, v)| [u + 1, v + 1]).collect(),
        };
        serde_json::to_string(&file).expect("graph file serialization cannot fail")
    }

    pub fn decode(text: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        let n = file.n;
        let mut edges = Vec::with_capacity(file.edges.len());
        for [u, v] in file.edges {
            for w in [u, v] {
                if w == 0 || w > n {
                    return Err(Error::NodeOutOfRange { node: w, n });
                }
            }
            edges.push((u - 1, v - 1));
        }
        Graph::from_edges(n, edges)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    n: usize,
    edges: Vec<[usize; 2]>,
}

/// The named graph families used throughout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Path(usize),
    Cycle(usize),
    Clique(usize),
    /// S_{N,1}: a center joined to `N` leaves.
    Star(usize),
    /// S_{N,M}: `rays` paths of `ray_len` nodes each, joined at a center.
    LongStar { rays: usize, ray_len: usize },
    /// `rows` x `cols` lattice with 4-neighbor adjacency.
    Grid { rows: usize, cols: usize },
}

impl Family {
    pub fn generate(self) -> Result<Graph> {
        let positive = |name: &str, v: usize| {
            if v == 0 {
                Err(Error::InvalidParameter(format!("{name} must be positive")))
            } else {
                Ok(())
            }
        };
        match self {
            Family::Path(n) => {
                positive("n", n)?;
                Graph::from_edges(n, (1..n).map(|i| (i - 1, i)))
            }
            Family::Cycle(n) => {
                if n < 3 {
                    return Err(Error::InvalidParameter("cycle needs n >= 3".into()));
                }
                Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n)))
            }
            Family::Clique(n) => {
                positive("n", n)?;
                Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))))
            }
            Family::Star(n) => Family::LongStar { rays: n, ray_len: 1 }.generate(),
            Family::LongStar { rays, ray_len } => {
                positive("N", rays)?;
                positive("M", ray_len)?;
                // center is node 0; ray j occupies 1 + j*M .. 1 + (j+1)*M, outward
                let n = rays * ray_len + 1;
                let mut edges = Vec::with_capacity(n - 1);
                for j in 0..rays {
                    let base = 1 + j * ray_len;
                    edges.push((0, base));
                    for i in 1..ray_len {
                        edges.push((base + i - 1, base + i));
                    }
                }
                Graph::from_edges(n, edges)
            }
            Family::Grid { rows, cols } => {
                positive("M", rows)?;
                positive("N", cols)?;
                Graph::from_edges(rows * cols, grid_edges(rows, cols))
            }
        }
    }
}

/// Lattice edges of the `rows` x `cols` grid, row-major node numbering,
/// in lexicographic order.
pub(crate) fn grid_edges(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let mut edges = Vec::with_capacity(rows * (cols - 1) + cols * (rows - 1));
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    edges
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Family::Path(n) => write!(f, "path:{n}"),
            Family::Cycle(n) => write!(f, "cycle:{n}"),
            Family::Clique(n) => write!(f, "clique:{n}"),
            Family::Star(n) => write!(f, "star:{n}"),
            Family::LongStar { rays, ray_len } => write!(f, "long_star:{rays},{ray_len}"),
            Family::Grid { rows, cols } => write!(f, "grid:{rows}x{cols}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    /// Parses `path:5`, `cycle:5`, `clique:6`, `star:6`, `long_star:3,10`,
    /// `grid:3x10`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognized family '{s}'"));
        let (name, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<usize> = args
            .split(|c| c == ',' || c == 'x')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name, nums.as_slice()) {
            ("path", [n]) => Ok(Family::Path(*n)),
            ("cycle", [n]) => Ok(Family::Cycle(*n)),
            ("clique", [n]) => Ok(Family::Clique(*n)),
            ("star", [n]) => Ok(Family::Star(*n)),
            ("long_star", [rays, ray_len]) => Ok(Family::LongStar { rays: *rays, ray_len: *ray_len }),
            ("grid", [rows, cols]) => Ok(Family::Grid { rows: *rows, cols: *cols }),
            _ => Err(bad()),
        }
    }
}

/// L(G) together with the edge of G each of its nodes stands for.
#[derive(Clone, Debug)]
pub struct LineGraph {
    pub graph: Graph,
    /// `edge_of_node[i]` is the 0-based edge `(u, v)` of the source graph.
    pub edge_of_node: Vec<(usize, usize)>,
}

/// Node `i` of the result is `g.edges()[i]`; two nodes are adjacent iff the
/// edges share an endpoint.
pub fn line_graph(g: &Graph) -> Result<LineGraph> {
    let m = g.edge_count();
    if m == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let mut incident = vec![Vec::new(); g.n()];
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        incident[u].push(i);
        incident[v].push(i);
    }
    let mut edges = BTreeSet::new();
    for list in &incident {
        for (a, &i) in list.iter().enumerate() {
            for &j in &list[a + 1..] {
                edges.insert((i.min(j), i.max(j)));
            }
        }
    }
    Ok(LineGraph {
        graph: Graph::from_edges(m, edges)?,
        edge_of_node: g.edges().to_vec(),
    })
}

/// Exhaustive isomorphism test for graphs of at most [`ISOMORPHISM_LIMIT`] nodes.
pub fn is_isomorphic(g: &Graph, h: &Graph) -> Result<bool> {
    for x in [g, h] {
        if x.n() > ISOMORPHISM_LIMIT {
            return Err(Error::SizeLimit { limit: ISOMORPHISM_LIMIT, got: x.n() });
        }
    }
    if g.n() != h.n() || g.edge_count() != h.edge_count() {
        return Ok(false);
    }
    let degrees = |x: &Graph| {
        let mut d: Vec<_> = (0..x.n()).map(|v| x.degree(v)).collect();
        d.sort_unstable();
        d
    };
    if degrees(g) != degrees(h) {
        return Ok(false);
    }
    let mut map = vec![usize::MAX; g.n()];
    let mut used = vec![false; h.n()];
    Ok(extend_mapping(g, h, 0, &mut map, &mut used))
}

fn extend_mapping(g: &Graph, h: &Graph, v: usize, map: &mut [usize], used: &mut [bool]) -> bool {
    if v == g.n() {
        return true;
    }
    for w in 0..h.n() {
        if used[w] || g.degree(v) != h.degree(w) {
            continue;
        }
        let consistent = (0..v).all(|u| g.has_edge(u, v) == h.has_edge(map[u], w));
        if !consistent {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if extend_mapping(g, h, v + 1, map, used) {
            return true;
        }
        used[w] = false;
    }
    map[v] = usize::MAX;
    false
}
