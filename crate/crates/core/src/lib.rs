//! Approximate Nash equilibria of two-player games.
//!
//! [`pipeline::solve`] returns a profile whose maximum regret is at most
//! `1/3 + δ` for any `δ > 0`, in time polynomial in the game size and `1/δ`.
//! It descends on the maximum regret to a δ-stationary point, recovers a pair
//! of best-response strategies from the dual of the direction LP, and mixes
//! them with the stationary point according to a small case analysis.

pub mod construct;
pub mod descent;
pub mod dual;
pub mod error;
pub mod game;
pub mod lp;
pub mod oracle;
pub mod pipeline;

pub use construct::{CaseLabel, ConstructionTrace};
pub use descent::{SolverConfig, StationaryCertificate};
pub use error::{Error, Result};
pub use game::{BimatrixGame, MixedStrategy, Player, RegretReport, StrategyProfile};
pub use pipeline::{solve, Solution};
