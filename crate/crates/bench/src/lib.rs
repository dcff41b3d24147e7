//! Benchmark fixtures.

use cpjoint::{gen_dataset, CovScenario, Dataset, ErrorDist, SimulationModel};

/// Null AR(1) dataset of the given shape.
pub fn null_dataset(n: usize, p: usize, seed: u64) -> Dataset {
    gen_dataset(&SimulationModel::null(n, p, CovScenario::Ar1, ErrorDist::Normal, seed)).expect("valid model")
}
