//! Time-splitting Fourier pseudospectral solvers for the dimensionless
//! two-component Dirac equation on periodic 1D/2D domains.
//!
//! The equation is split as d_t Phi = (T + W) Phi with T the constant-
//! coefficient derivative-plus-mass part (diagonal in Fourier space) and W
//! the pointwise potential part. Five compositions of the exact sub-flows
//! are provided: Lie (S1), Strang (S2), triple-jump fourth order (S4), the
//! 13-factor partitioned Runge-Kutta fourth order (S4RK), and the compact
//! fourth-order scheme (S4c) whose middle factor exponentiates
//! W + (tau^2/48)[W,[T,W]] using the closed form of the double commutator.
//!
//! The `harness` module reproduces the reference convergence tables and the
//! parameter-regime resolution studies; the `tsdirac-cli` crate exposes them
//! as subcommands.

pub mod commutator;
pub mod error;
pub mod grid;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod propagator;
pub mod scheme;

pub use error::{Error, Result};
pub use grid::{
    build_grid, dft_forward, dft_inverse, spectral_derivative, Grid, MultiField, MultiSpectral,
    SpectralField, SpinorField,
};
pub use linalg::{CMat, Mat2, Mat4, C64};
pub use model::{
    gauge_shift_reference, plane_wave_solution, sample_potentials, Branch, InitialData, PhysParams,
    PotentialSamples, PotentialSpec,
};
pub use observables::{energy, error_metrics, l2_error, mass, ErrorMetrics, ObservableRecord};
pub use propagator::{
    apply_pointwise, apply_symbol, build_t_propagator, build_w_propagator, build_what_propagator,
    PointwisePropagator, SymbolPropagator, WhatPropagator,
};
pub use scheme::{build_plan, evolve, step, CompositionPlan, Evolution, Flow, Observer, SchemeId};
