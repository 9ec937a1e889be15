//! Neighbourhood graphs and the nonlinear embeddings built on them.

mod embed;
mod graph;
mod lle;
mod swiss_roll;

pub use embed::{isomap, laplacian_eigenmaps, laplacian_eigenmaps_graph, Isomap, SpectralEmbedding};
pub use graph::{shortest_paths, GraphLaplacian, GraphRule, NeighborGraph, WeightRule};
pub use lle::{lle_embed, lle_weights, LleWeights};
pub use swiss_roll::{spiral_arc_length, swiss_roll, SwissRoll, SWISS_ROLL_HEIGHT, SWISS_ROLL_T_RANGE};

use crate::linalg::SymMatrix;
use crate::Mat;

/// Pairwise Euclidean distances between rows.
pub fn pairwise_distances(data: &Mat) -> SymMatrix {
    let n = data.nrows();
    SymMatrix::from_fn(n, |i, j| {
        if i == j {
            0.0
        } else {
            data.row(i).iter().zip(data.row(j).iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
        }
    })
}
