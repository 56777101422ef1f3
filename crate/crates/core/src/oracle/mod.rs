//! Independent checks for the recursive solvers: exhaustive enumeration of
//! claim paths and Monte Carlo simulation of the surplus process.

mod enumerate;
mod monte_carlo;

pub use enumerate::{enumerate_finite_time, enumerate_finite_time_from, ENUMERATION_LIMIT};
pub use monte_carlo::{
    mc_finite_time, mc_finite_time_grid, mc_ultimate_proxy, z_score, McEstimate, DEFAULT_PROXY_HORIZON, RNG_ALGORITHM,
};
