use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::linear_dr::{mds_embed, MdsResult};
use crate::Mat;

use super::graph::{shortest_paths, GraphRule, NeighborGraph, WeightRule};

#[derive(Debug, Clone, PartialEq)]
pub struct Isomap {
    pub graph: NeighborGraph,
    pub geodesics: SymMatrix,
    pub mds: MdsResult,
}

impl Isomap {
    pub fn embeddings(&self) -> &Mat {
        &self.mds.embeddings
    }
}

/// Classical MDS on graph shortest-path distances over a Euclidean-weighted
/// neighbourhood graph.
pub fn isomap(data: &Mat, rule: GraphRule, d: usize) -> Result<Isomap> {
    let graph = NeighborGraph::build(data, rule, WeightRule::Euclidean)?;
    let components = graph.component_count();
    if components != 1 {
        return Err(Error::DisconnectedGraph { components });
    }
    let geodesics = shortest_paths(&graph);
    let mds = mds_embed(&geodesics, d)?;
    Ok(Isomap { graph, geodesics, mds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    /// `N × d`, satisfying `VᵀD1 = 0` and `VᵀDV = I`.
    pub embeddings: Mat,
    /// Generalized eigenvalues of `Lu = λDu` for the returned columns.
    pub eigenvalues: Vec<f64>,
}

/// Laplacian eigenmaps with heat-kernel weights `exp(−‖x_i − x_j‖²/t)`.
pub fn laplacian_eigenmaps(data: &Mat, rule: GraphRule, t: f64, d: usize) -> Result<SpectralEmbedding> {
    let graph = NeighborGraph::build(data, rule, WeightRule::Gaussian(t))?;
    laplacian_eigenmaps_graph(&graph, d)
}

/// Smallest nontrivial solutions of `Lu = λDu`, via the symmetric matrix
/// `D^{-1/2} L D^{-1/2}` with its known null vector `D^{1/2}1` lifted out
/// of the way.
pub fn laplacian_eigenmaps_graph(graph: &NeighborGraph, d: usize) -> Result<SpectralEmbedding> {
    let n = graph.vertex_count();
    let components = graph.component_count();
    if components != 1 {
        return Err(Error::DisconnectedGraph { components });
    }
    if d == 0 || d + 1 > n {
        return Err(Error::InvalidParameter(format!("{n} vertices cannot carry {d} nontrivial coordinates")));
    }
    let lap = graph.laplacian();
    if let Some(i) = lap.degrees.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::DegenerateGeometry(format!("vertex {i} has zero total edge weight")));
    }
    let inv_sqrt: Vec<f64> = lap.degrees.iter().map(|v| 1.0 / v.sqrt()).collect();
    let vol: f64 = lap.degrees.iter().sum();
    let q: Vec<f64> = lap.degrees.iter().map(|v| (v / vol).sqrt()).collect();
    let s = SymMatrix::from_fn(n, |i, j| lap.laplacian.get(i, j) * inv_sqrt[i] * inv_sqrt[j]);
    let lift = s.trace() + 1.0;
    let deflated = SymMatrix::from_fn(n, |i, j| s.get(i, j) + lift * q[i] * q[j]);
    let eig = deflated.eigen()?;
    let mut embeddings = Mat::zeros(n, d);
    let mut eigenvalues = Vec::with_capacity(d);
    for j in 0..d {
        let col = n - 1 - j;
        eigenvalues.push(eig.values[col]);
        for i in 0..n {
            embeddings[(i, j)] = eig.vectors[(i, col)] * inv_sqrt[i];
        }
    }
    Ok(SpectralEmbedding { embeddings, eigenvalues })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn constraint_residuals(g: &NeighborGraph, e: &SpectralEmbedding) -> (f64, f64) {
        let deg = nalgebra::DVector::from_vec(g.laplacian().degrees);
        let dmat = Mat::from_diagonal(&deg);
        let v = &e.embeddings;
        let ortho = (v.transpose() * &deg).norm();
        let d = v.ncols();
        let gram = (v.transpose() * dmat * v - Mat::identity(d, d)).norm();
        (ortho, gram)
    }

    #[test]
    fn path_graph_fiedler_vector_is_monotone() {
        let edges: Vec<_> = (0..7).map(|i| (i, i + 1, 1.0)).collect();
        let g = NeighborGraph::from_edge_list(8, &edges).unwrap();
        let e = laplacian_eigenmaps_graph(&g, 1).unwrap();
        let col: Vec<f64> = e.embeddings.column(0).iter().copied().collect();
        assert!(col.windows(2).all(|p| p[1] > p[0]) || col.windows(2).all(|p| p[1] < p[0]));
        let (a, b) = constraint_residuals(&g, &e);
        assert!(a <= 1e-8 && b <= 1e-8);
    }

    #[test]
    fn complete_graph_spectrum() {
        let n = 6;
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push((i, j, 1.0));
            }
        }
        let g = NeighborGraph::from_edge_list(n, &edges).unwrap();
        let e = laplacian_eigenmaps_graph(&g, 3).unwrap();
        for l in &e.eigenvalues {
            assert_abs_diff_eq!(*l, n as f64 / (n - 1) as f64, epsilon = 1e-10);
        }
    }

    #[test]
    fn disconnected_is_an_error() {
        let g = NeighborGraph::from_edge_list(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(laplacian_eigenmaps_graph(&g, 1), Err(Error::DisconnectedGraph { components: 2 })));
        let data = Mat::from_row_slice(4, 1, &[0.0, 1.0, 10.0, 11.0]);
        assert!(matches!(isomap(&data, GraphRule::Epsilon(2.0), 1), Err(Error::DisconnectedGraph { .. })));
    }

    #[test]
    fn isomap_on_a_segment_is_isometric() {
        let n = 30;
        let data = Mat::from_fn(n, 3, |i, j| [0.3, -0.4, 1.2][j] * i as f64 / 10.0);
        let r = isomap(&data, GraphRule::Knn(3), 1).unwrap();
        let step = (0.09f64 + 0.16 + 1.44).sqrt() / 10.0;
        for i in 0..n {
            for j in 0..n {
                let e = (r.embeddings()[(i, 0)] - r.embeddings()[(j, 0)]).abs();
                assert_abs_diff_eq!(e, step * (i as f64 - j as f64).abs(), epsilon = 1e-6);
            }
        }
    }
}
