//! Weighted undirected graphs over viewpoints.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};

use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::gridmap::{CellIndex, OccupancyGrid};
use crate::visibility::{is_visible, segment_clear};

/// Euclidean distance between two cell centers, in meters.
pub fn cell_distance(grid: &OccupancyGrid, a: CellIndex, b: CellIndex) -> f64 {
    grid.distance(a, b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub nodes: Vec<CellIndex>,
    // neighbor lists sorted by neighbor index
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl Graph {
    pub fn empty(nodes: Vec<CellIndex>) -> Self {
        let adjacency = vec![Vec::new(); nodes.len()];
        Self { nodes, adjacency }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Adds the edge (no-op for self-loops and existing edges).
    pub fn add_edge(&mut self, a: usize, b: usize, weight: f64) {
        if a == b || self.has_edge(a, b) {
            return;
        }
        for (u, v) in [(a, b), (b, a)] {
            let list = &mut self.adjacency[u];
            let at = list.partition_point(|&(n, _)| n < v);
            list.insert(at, (v, weight));
        }
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.adjacency[a].retain(|&(n, _)| n != b);
        self.adjacency[b].retain(|&(n, _)| n != a);
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a]
            .binary_search_by(|&(n, _)| n.cmp(&b))
            .is_ok()
    }

    pub fn weight(&self, a: usize, b: usize) -> Option<f64> {
        let list = &self.adjacency[a];
        list.binary_search_by(|&(n, _)| n.cmp(&b))
            .ok()
            .map(|k| list[k].1)
    }

    pub fn neighbors(&self, a: usize) -> &[(usize, f64)] {
        &self.adjacency[a]
    }

    /// Edges as (a, b, weight) with a < b, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (a, list) in self.adjacency.iter().enumerate() {
            for &(b, w) in list {
                if a < b {
                    out.push((a, b, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Nodes without any edge.
    pub fn isolated(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.adjacency[i].is_empty())
            .collect()
    }

    /// Shortest path by summed weights; ties settle the lower node index
    /// first and keep the first predecessor found.
    pub fn shortest_path(&self, from: usize, to: usize) -> Option<(Vec<usize>, f64)> {
        #[derive(PartialEq)]
        struct Item(f64, usize);
        impl Eq for Item {}
        impl Ord for Item {
            fn cmp(&self, o: &Self) -> Ordering {
                o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
            }
        }
        impl PartialOrd for Item {
            fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
                Some(self.cmp(o))
            }
        }

        let n = self.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut parent = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[from] = 0.0;
        heap.push(Item(0.0, from));
        while let Some(Item(d, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            if u == to {
                break;
            }
            for &(v, w) in &self.adjacency[u] {
                let nd = d + w;
                if !done[v] && nd < dist[v] {
                    dist[v] = nd;
                    parent[v] = u;
                    heap.push(Item(nd, v));
                }
            }
        }
        if !done[to] {
            return None;
        }
        let mut path = vec![to];
        while *path.last().unwrap() != from {
            path.push(parent[*path.last().unwrap()]);
        }
        path.reverse();
        Some((path, dist[to]))
    }
}

/// Edges between every mutually visible pair within `r`.
pub fn build_visibility_graph(grid: &OccupancyGrid, viewpoints: &[CellIndex], r: f64) -> Graph {
    let mut g = Graph::empty(viewpoints.to_vec());
    for i in 0..viewpoints.len() {
        for j in i + 1..viewpoints.len() {
            if is_visible(grid, viewpoints[i], viewpoints[j], r).unwrap_or(false) {
                g.add_edge(i, j, cell_distance(grid, viewpoints[i], viewpoints[j]));
            }
        }
    }
    g
}

/// Delaunay edges that are collision-free and at most `r_relaxed` long,
/// joined with every edge of `visibility`.
pub fn build_roadmap(grid: &OccupancyGrid, visibility: &Graph, r_relaxed: f64) -> Graph {
    let nodes = &visibility.nodes;
    let mut g = visibility.clone();
    if nodes.len() < 3 {
        return g;
    }
    let keep = |a: usize, b: usize| {
        cell_distance(grid, nodes[a], nodes[b]) <= r_relaxed + 1e-9
            && segment_clear(grid, nodes[a], nodes[b])
    };
    for (a, b) in delaunay_edges(nodes) {
        if keep(a, b) {
            g.add_edge(a, b, cell_distance(grid, nodes[a], nodes[b]));
        }
    }
    g
}

// Triangulation edges as node pairs; a chain along the line for collinear
// input.
fn delaunay_edges(nodes: &[CellIndex]) -> Vec<(usize, usize)> {
    let p0 = nodes[0];
    let far = nodes
        .iter()
        .copied()
        .max_by_key(|p| p.dist2(p0))
        .unwrap_or(p0);
    let (ax, ay) = (
        far.col as i64 - p0.col as i64,
        far.row as i64 - p0.row as i64,
    );
    let collinear = nodes.iter().all(|p| {
        let (bx, by) = (p.col as i64 - p0.col as i64, p.row as i64 - p0.row as i64);
        ax * by - ay * bx == 0
    });
    if collinear {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by_key(|&i| (nodes[i].col, nodes[i].row));
        return order
            .windows(2)
            .map(|w| (w[0].min(w[1]), w[0].max(w[1])))
            .collect();
    }

    let mut tri: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut handle_to_node = BTreeMap::new();
    for (i, c) in nodes.iter().enumerate() {
        let h = tri
            .insert(Point2::new(c.col as f64, c.row as f64))
            .expect("cell coordinates are finite");
        handle_to_node.entry(h.index()).or_insert(i);
    }
    let mut edges: Vec<(usize, usize)> = tri
        .undirected_edges()
        .map(|e| {
            let [a, b] = e.vertices();
            let (a, b) = (
                handle_to_node[&a.fix().index()],
                handle_to_node[&b.fix().index()],
            );
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Split the segment between `a` and `b` into `ceil(len / r)` equal pieces
/// and snap the interior points to the cells containing them. Returns the
/// interior cells, or `None` when a snapped cell is not free or some piece
/// of the chain is not visible within `r`.
pub fn insert_steiner(
    grid: &OccupancyGrid,
    a: CellIndex,
    b: CellIndex,
    r: f64,
) -> Option<Vec<CellIndex>> {
    let len = cell_distance(grid, a, b);
    if len <= r + 1e-9 {
        return is_visible(grid, a, b, r).unwrap_or(false).then(Vec::new);
    }
    if r <= 0.0 {
        return None;
    }
    let k = (len / r - 1e-9).ceil() as usize;
    let mut chain = vec![a];
    for i in 1..k {
        let t = i as f64 / k as f64;
        let row = a.row as f64 + (b.row as f64 - a.row as f64) * t;
        let col = a.col as f64 + (b.col as f64 - a.col as f64) * t;
        let cell = CellIndex::new(row.round() as usize, col.round() as usize);
        if !grid.contains(cell) || !grid.is_free(cell) {
            return None;
        }
        if chain.last() != Some(&cell) {
            chain.push(cell);
        }
    }
    if chain.last() == Some(&b) {
        chain.pop();
    }
    chain.push(b);
    let ok = chain
        .windows(2)
        .all(|w| is_visible(grid, w[0], w[1], r).unwrap_or(false));
    ok.then(|| chain[1..chain.len() - 1].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gridmap::CellClass;

    fn open(w: usize, h: usize) -> OccupancyGrid {
        OccupancyGrid::filled(w, h, 0.1, CellClass::Free).unwrap()
    }

    #[test]
    fn visibility_graph_range_gate() {
        let g = open(60, 5);
        let vps = [
            CellIndex::new(2, 0),
            CellIndex::new(2, 10),
            CellIndex::new(2, 40),
        ];
        let vg = build_visibility_graph(&g, &vps, 2.0);
        assert_eq!(vg.edges(), vec![(0, 1, 1.0)]);
        assert_eq!(vg.isolated(), vec![2]);
    }

    #[test]
    fn roadmap_triangle() {
        let g = open(20, 20);
        let vps = [
            CellIndex::new(1, 1),
            CellIndex::new(1, 10),
            CellIndex::new(10, 5),
        ];
        let vg = build_visibility_graph(&g, &vps, 2.0);
        let rm = build_roadmap(&g, &vg, 3.0);
        assert_eq!(rm.edge_count(), 3);
        assert_eq!(vg, rm);
    }

    #[test]
    fn roadmap_cuts_edges_through_walls() {
        let mut g = open(30, 30);
        for r in 0..30 {
            g.set(CellIndex::new(r, 15), CellClass::Occupied);
        }
        let vps = [
            CellIndex::new(5, 5),
            CellIndex::new(20, 5),
            CellIndex::new(12, 25),
            CellIndex::new(25, 25),
        ];
        let vg = build_visibility_graph(&g, &vps, 10.0);
        let rm = build_roadmap(&g, &vg, 10.0);
        for (a, b, _) in rm.edges() {
            assert_eq!(
                vps[a].col < 15,
                vps[b].col < 15,
                "edge {a}-{b} crosses the wall"
            );
        }
        assert!(rm.has_edge(0, 1) && rm.has_edge(2, 3));
    }

    #[test]
    fn collinear_chain() {
        let g = open(50, 3);
        let vps = [
            CellIndex::new(1, 40),
            CellIndex::new(1, 0),
            CellIndex::new(1, 20),
        ];
        let vg = build_visibility_graph(&g, &vps, 1.0);
        assert_eq!(vg.edge_count(), 0);
        let rm = build_roadmap(&g, &vg, 3.0);
        assert_eq!(rm.edges(), vec![(0, 2, 2.0), (1, 2, 2.0)]);
    }

    #[test]
    fn steiner_counts() {
        let g = open(60, 3);
        let a = CellIndex::new(1, 0);
        assert_eq!(
            insert_steiner(&g, a, CellIndex::new(1, 30), 2.0).unwrap(),
            vec![CellIndex::new(1, 15)]
        );
        assert_eq!(
            insert_steiner(&g, a, CellIndex::new(1, 20), 2.0).unwrap(),
            vec![]
        );
        let s = insert_steiner(&g, a, CellIndex::new(1, 50), 2.0).unwrap();
        assert_eq!(s.len(), 2);
        let mut blocked = g.clone();
        blocked.set(CellIndex::new(1, 15), CellClass::Occupied);
        assert!(insert_steiner(&blocked, a, CellIndex::new(1, 30), 2.0).is_none());
    }

    #[test]
    fn dijkstra_prefers_lower_index_on_ties() {
        let mut gr = Graph::empty(vec![CellIndex::new(0, 0); 4]);
        gr.add_edge(0, 1, 1.0);
        gr.add_edge(0, 2, 1.0);
        gr.add_edge(1, 3, 1.0);
        gr.add_edge(2, 3, 1.0);
        assert_eq!(gr.shortest_path(0, 3).unwrap(), (vec![0, 1, 3], 2.0));
        gr.remove_edge(1, 3);
        assert_eq!(gr.shortest_path(0, 3).unwrap().0, vec![0, 2, 3]);
        gr.remove_edge(2, 3);
        assert!(gr.shortest_path(0, 3).is_none());
    }
}
