//! Online decentralized dual descent for time-varying power allocation.
//!
//! `N` users draw power from `R` suppliers. At every step each user picks
//! the allocation maximising its own utility minus the cost at the broadcast
//! price, the suppliers meter the total excess over capacity, and the price
//! takes one dual-gradient step. Capacities and utilities drift between
//! steps, so the online iterate chases a moving optimum.
//!
//! The crate is organised as:
//!
//! * [`model`]: utilities, local demand and the global constants `σ, L, γ, α, η`.
//! * [`traces`]: synthetic and CSV-backed capacity/target series with drift checks.
//! * [`od3`]: the online loop.
//! * [`oracle`]: the exact per-step optimum through the dual.
//! * [`bounds`]: certificates comparing a run against its tracking,
//!   volatility, welfare and feasibility envelopes.
//! * [`experiment`]: configurable runs and randomized suites that write CSV/JSON artifacts.

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod model;
pub mod od3;
pub mod oracle;
pub mod roots;
pub mod traces;
pub mod vector;

pub use error::{Error, Result};
pub use model::{derive_global_params, local_demand, Dimensions, GlobalParams, QuadraticUtility, Utility};
pub use od3::{od3_step, run_od3, Od3Options, OnlineState, SignConvention, Trajectory};
pub use oracle::{solve_step, solve_trace, OracleSolution};
pub use traces::{synth_trace, validate_trace, SystemTrace, TraceSynthesis};
