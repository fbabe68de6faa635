//! Brute-force referees for the main code paths: numerical Smith integrals,
//! deterministic quadrature of the two-bounce slice, furnace integration,
//! reciprocity sweeps and the Pearson statistic.

mod chi_square;
mod furnace;
mod lambda;
mod quadrature;
mod reciprocity;
mod rho2;

pub use chi_square::{merge_sparse_bins, pearson_statistic, ChiSquareError, MIN_EXPECTED};
pub use furnace::{furnace_albedo, FurnacePlan, FurnaceReport, FurnaceTally};
pub use lambda::{lambda_numeric, lambda_numeric_with};
pub use quadrature::{gauss_legendre, QuadratureGrid, QuadratureRule};
pub use reciprocity::{
    direction_grid, direction_pairs, reciprocity_cell, reciprocity_sweep, single_bounce_asymmetry, ReciprocityCell,
    ReciprocityReport,
};
pub use rho2::{rho2_quadrature, Rho2};
