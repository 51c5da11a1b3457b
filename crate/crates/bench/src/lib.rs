//! Shared inputs for the benchmarks.

use hisyn_core::clustering::StochasticMatrix;
use hisyn_core::fixtures::AGV_STOCHASTIC_MATRIX;
use nalgebra::DMatrix;

pub fn agv_matrix() -> StochasticMatrix {
    let n = AGV_STOCHASTIC_MATRIX.len();
    StochasticMatrix::from_weights(DMatrix::from_fn(n, n, |i, j| AGV_STOCHASTIC_MATRIX[i][j])).expect("AGV matrix")
}
