//! Ruin probabilities for discrete-time risk models whose claim
//! distributions repeat over a cycle of seasons.
//!
//! The surplus after `n` periods is `u + n - (Z_1 + ... + Z_n)` and ruin is
//! the first time it drops to zero or below.

pub mod error;
pub mod finite_time;
pub mod golden;
pub mod model;
pub mod oracle;
pub mod pmf;
pub mod registry;
pub mod report;
pub mod scalar;
pub mod ultimate;

pub use error::{Result, RuinError};
pub use model::{Model, ModelSpec, SeasonSpec, SeasonalModel};
pub use pmf::Pmf;
pub use registry::{FiniteTimeMethod, FiniteTimeRequest, Registry, UltimateSolver};
pub use report::{ruin_table, RuinTable, UltimateSource};
pub use scalar::{NumericMode, Rational};
