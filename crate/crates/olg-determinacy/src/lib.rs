//! Steady states, local determinacy, and bubble dynamics of two-period
//! overlapping-generations economies with capital and an intrinsically
//! useless asset (fiat money).
//!
//! The library computes monetary (`P > 0`) and non-monetary (`P = 0`)
//! steady states of the equilibrium system
//!
//! ```text
//! k' + P  = s(w(k), f'(k'))        (market clearing)
//! P'      = P f'(k')               (no arbitrage)
//! ```
//!
//! classifies them through the eigenvalues of the equilibrium-map Jacobian,
//! and verifies the classifications dynamically by simulation, saddle-path
//! shooting, and Monte-Carlo basin probing. Two reverse constructions build
//! economies with prescribed steady states or prescribed Jacobian
//! eigenvalues. An endowment-economy module covers the production-free
//! benchmark.
//!
//! Everything is pure and deterministic: fixed seeds give byte-identical
//! results, and all types are immutable after construction, so concurrent
//! use needs no synchronization.
//!
//! Start with the runnable examples (`cargo run --example steady_states`)
//! or the `olg` binary (`cargo run --bin olg -- steady --config model.json`).

pub mod cdces;
pub mod cli;
pub mod determinacy;
pub mod dynamics;
pub mod endowment;
pub mod error;
pub mod model;
pub mod reverse;
pub mod rng;
pub mod roots;
pub mod steady;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{
    factor_prices, production_eval, solve_savings, ModelConfig, ModelParams, ProductionSpec,
    SavingsResult, UtilitySpec,
};
