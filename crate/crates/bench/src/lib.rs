//! Shared setup helpers for the solver benchmarks.

use std::sync::Arc;
use tsdirac::grid::{build_grid, Grid, SpinorField};
use tsdirac::model::{sample_potentials, InitialData, PhysParams, PotentialSamples, PotentialSpec};

pub fn setup_1d(m: usize) -> (Arc<Grid>, PotentialSamples, SpinorField, PhysParams) {
    let grid = build_grid(-32.0, 32.0, m, 1).expect("grid");
    let params = PhysParams::classical();
    let samples = sample_potentials(&PotentialSpec::paper_1d(), &grid).expect("samples");
    let field = InitialData::Gaussian1d
        .sample(&grid, &params)
        .expect("field");
    (grid, samples, field, params)
}

pub fn setup_2d(m: usize) -> (Arc<Grid>, PotentialSamples, SpinorField, PhysParams) {
    let grid = build_grid(-10.0, 10.0, m, 2).expect("grid");
    let params = PhysParams::classical();
    let samples = sample_potentials(&PotentialSpec::honeycomb_2d(), &grid).expect("samples");
    let field = InitialData::Gaussian2d
        .sample(&grid, &params)
        .expect("field");
    (grid, samples, field, params)
}
