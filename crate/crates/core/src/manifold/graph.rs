use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::Mat;

use super::pairwise_distances;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphRule {
    /// Connect pairs at distance strictly below `ε`.
    Epsilon(f64),
    /// Connect each point to its `K` nearest neighbours, then symmetrize by union.
    Knn(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightRule {
    Euclidean,
    /// `exp(−‖x_i − x_j‖² / t)`.
    Gaussian(f64),
}

/// Undirected weighted graph without self-loops.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborGraph {
    n: usize,
    /// Edges `(i, j, w)` with `i < j`, sorted.
    edges: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
    pub rule: GraphRule,
    pub weight_rule: WeightRule,
}

impl NeighborGraph {
    pub fn build(data: &Mat, rule: GraphRule, weight_rule: WeightRule) -> Result<Self> {
        let n = data.nrows();
        if n < 2 {
            return Err(Error::InvalidParameter(format!("graph needs at least 2 points, got {n}")));
        }
        match rule {
            GraphRule::Epsilon(e) if !(e > 0.0) => {
                return Err(Error::InvalidParameter(format!("radius {e} must be positive")))
            }
            GraphRule::Knn(k) if k == 0 || k >= n => {
                return Err(Error::InvalidParameter(format!("neighbour count {k} not in 1..{n}")))
            }
            _ => {}
        }
        if let WeightRule::Gaussian(t) = weight_rule {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!("heat-kernel width {t} must be positive")));
            }
        }
        let dist = pairwise_distances(data);
        let mut connected = vec![vec![false; n]; n];
        match rule {
            GraphRule::Epsilon(e) => {
                for i in 0..n {
                    for j in (i + 1)..n {
                        if dist.get(i, j) < e {
                            connected[i][j] = true;
                        }
                    }
                }
            }
            GraphRule::Knn(k) => {
                for i in 0..n {
                    for j in nearest(&dist, i, k) {
                        connected[i.min(j)][i.max(j)] = true;
                    }
                }
            }
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if connected[i][j] {
                    let d = dist.get(i, j);
                    let w = match weight_rule {
                        WeightRule::Euclidean => d,
                        WeightRule::Gaussian(t) => (-d * d / t).exp(),
                    };
                    edges.push((i, j, w));
                }
            }
        }
        Ok(Self::from_edges(n, edges, rule, weight_rule))
    }

    /// Graph from an explicit edge list; duplicate pairs keep the last weight.
    pub fn from_edge_list(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            if i == j {
                return Err(Error::InvalidParameter(format!("self-loop at vertex {i}")));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidParameter(format!("edge weight {w} must be nonnegative")));
            }
            map.insert((i.min(j), i.max(j)), w);
        }
        let edges = map.into_iter().map(|((i, j), w)| (i, j, w)).collect();
        Ok(Self::from_edges(n, edges, GraphRule::Knn(0), WeightRule::Euclidean))
    }

    fn from_edges(n: usize, edges: Vec<(usize, usize, f64)>, rule: GraphRule, weight_rule: WeightRule) -> Self {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j, w) in &edges {
            adjacency[i].push((j, w));
            adjacency[j].push((i, w));
        }
        Self { n, edges, adjacency, rule, weight_rule }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// Component label per vertex, numbered in order of first appearance.
    pub fn component_labels(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = next;
            while let Some(v) = stack.pop() {
                for &(u, _) in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().into_iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    pub fn weight_matrix(&self) -> SymMatrix {
        let mut w = Mat::zeros(self.n, self.n);
        for &(i, j, v) in &self.edges {
            w[(i, j)] = v;
            w[(j, i)] = v;
        }
        SymMatrix::try_from_dense(w, 0.0).expect("square and symmetric by construction")
    }

    pub fn laplacian(&self) -> GraphLaplacian {
        let w = self.weight_matrix();
        let degrees: Vec<f64> = (0..self.n).map(|i| w.as_mat().row(i).sum()).collect();
        let laplacian = SymMatrix::from_fn(self.n, |i, j| if i == j { degrees[i] - w.get(i, i) } else { -w.get(i, j) });
        GraphLaplacian { laplacian, degrees }
    }
}

/// `k` nearest other points of `i`, ties going to the lower index.
fn nearest(dist: &SymMatrix, i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..dist.n()).filter(|&j| j != i).collect();
    others.sort_by(|&a, &b| dist.get(i, a).total_cmp(&dist.get(i, b)).then(a.cmp(&b)));
    others.truncate(k);
    others
}

pub(crate) fn k_nearest(data: &Mat, i: usize, k: usize) -> Vec<usize> {
    nearest(&pairwise_distances(data), i, k)
}

/// `L = D − W` together with the degree vector.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphLaplacian {
    pub laplacian: SymMatrix,
    pub degrees: Vec<f64>,
}

impl GraphLaplacian {
    /// `xᵀ L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(x);
        (v.transpose() * self.laplacian.as_mat() * &v)[0]
    }
}

#[derive(Debug, PartialEq)]
struct Frontier(f64, usize);

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on distance, then on vertex.
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All-pairs shortest path lengths by Dijkstra from every vertex; `+∞`
/// between components.
pub fn shortest_paths(g: &NeighborGraph) -> SymMatrix {
    let n = g.n;
    let mut out = Mat::from_element(n, n, f64::INFINITY);
    for s in 0..n {
        let mut dist = vec![f64::INFINITY; n];
        dist[s] = 0.0;
        let mut heap = BinaryHeap::from([Frontier(0.0, s)]);
        while let Some(Frontier(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(u, w) in &g.adjacency[v] {
                let nd = d + w;
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(Frontier(nd, u));
                }
            }
        }
        for (t, d) in dist.into_iter().enumerate() {
            out[(s, t)] = d;
        }
    }
    // Path sums from either end can differ in the last bit.
    SymMatrix::symmetrize(&out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Mat {
        Mat::from_fn(n, 2, |i, j| if j == 0 { i as f64 } else { 0.0 })
    }

    #[test]
    fn epsilon_path_graph() {
        let g = NeighborGraph::build(&line(3), GraphRule::Epsilon(1.5), WeightRule::Euclidean).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1.0), (1, 2, 1.0)]);
        assert!(g.is_connected());
        let d = shortest_paths(&g);
        assert_eq!(d.get(0, 2), 2.0);
    }

    #[test]
    fn knn_full_is_complete() {
        let g = NeighborGraph::build(&line(5), GraphRule::Knn(4), WeightRule::Euclidean).unwrap();
        assert_eq!(g.edges().len(), 10);
        let d = shortest_paths(&g);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(d.get(i, j), (i as f64 - j as f64).abs());
            }
        }
    }

    #[test]
    fn tiny_radius_is_edgeless() {
        let g = NeighborGraph::build(&line(4), GraphRule::Epsilon(0.5), WeightRule::Euclidean).unwrap();
        assert!(g.edges().is_empty());
        assert_eq!(g.component_count(), 4);
        assert_eq!(shortest_paths(&g).get(0, 1), f64::INFINITY);
    }

    #[test]
    fn knn_ties_prefer_lower_index() {
        // Point 1 is equidistant from 0 and 2.
        let g = NeighborGraph::build(&line(3), GraphRule::Knn(1), WeightRule::Euclidean).unwrap();
        assert_eq!(g.edges(), &[(0, 1, 1.0), (1, 2, 1.0)]);
        let data = Mat::from_row_slice(3, 1, &[0.0, 1.0, 2.0]);
        assert_eq!(nearest(&pairwise_distances(&data), 1, 1), vec![0]);
    }

    #[test]
    fn four_cycle() {
        let g = NeighborGraph::from_edge_list(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let d = shortest_paths(&g);
        assert_eq!(d.get(0, 2), 2.0);
        assert_eq!(d.get(1, 3), 2.0);
    }

    #[test]
    fn laplacian_rows_vanish() {
        let g = NeighborGraph::build(&line(5), GraphRule::Knn(2), WeightRule::Gaussian(2.0)).unwrap();
        let l = g.laplacian();
        for i in 0..5 {
            assert!(l.laplacian.as_mat().row(i).sum().abs() < 1e-12);
        }
    }

    #[test]
    fn bad_parameters() {
        assert!(NeighborGraph::build(&line(3), GraphRule::Knn(3), WeightRule::Euclidean).is_err());
        assert!(NeighborGraph::build(&line(3), GraphRule::Epsilon(0.0), WeightRule::Euclidean).is_err());
        assert!(NeighborGraph::build(&line(3), GraphRule::Knn(1), WeightRule::Gaussian(-1.0)).is_err());
        assert!(NeighborGraph::from_edge_list(2, &[(0, 0, 1.0)]).is_err());
    }
}
