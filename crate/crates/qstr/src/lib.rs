//! Qualitative spatio-temporal constraint reasoning.
//!
//! The crate models qualitative calculi (point algebra, interval algebra,
//! RCC8, or user-defined ones) as finite base-relation systems with
//! converse and weak composition, and reasons over constraint networks
//! built from them: algebraic closure, consistency checking, scenario
//! enumeration, a probabilistic robustness layer over scenario space, and
//! text exports for neuro-symbolic consumers.
//!
//! ```
//! use qstr::{a_closure, parse_network, solve, NetworkDocument};
//!
//! # fn main() -> qstr::Result<()> {
//! let doc = parse_network("../../samples/three_tasks.net")?;
//! let closed = a_closure(&doc.qcn);
//! assert!(closed.consistent);
//! if let Some(scenario) = solve(&doc.qcn) {
//!     print!("{}", NetworkDocument::new("solved", scenario.into_qcn()).to_text());
//! }
//! # Ok(())
//! # }
//! ```

pub mod algebra;
pub mod calculi;
mod error;
pub mod export;
pub mod generator;
pub mod network;
pub mod probabilistic;
pub mod solver;
mod textio;

pub use algebra::{Calculus, Relation};
pub use error::{Error, Result};
pub use network::{parse_network, parse_network_str, CalculusResolver, NetworkDocument, Qcn};
pub use probabilistic::{
    max_robust_scenario, rectify, robustness, EdgeDistributions, ProbabilisticQcn,
    RobustnessReport,
};
pub use solver::{
    a_closure, enumerate_scenarios, enumerate_scenarios_parallel, solve, ClosureResult, Scenario,
};
