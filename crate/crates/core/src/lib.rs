//! Laboratory for the grouped sequential public-goods game with position
//! uncertainty.
//!
//! * [`game`]: configurations, samples, strategy profiles, payoffs.
//! * [`closedform`]: closed-form φ, ψ, `H` and the pure-strategy bound.
//! * [`oracle`]: exact expectations, tremble beliefs and deviation checks
//!   from the generative model, plus a brute-force enumerator.
//! * [`solver`]: mixed-equilibrium roots, the critical return, thresholds.
//! * [`montecarlo`]: seeded simulation of full plays.
//! * [`reconcile`]: side-by-side tables of closed forms against the oracle.

pub mod closedform;
pub mod error;
pub mod game;
pub mod montecarlo;
pub mod num;
pub mod oracle;
pub mod reconcile;
pub mod solver;

pub use error::{GameError, Result};
pub use game::{Action, GameConfig, InfoSet, Sample, SampleClass, StrategyProfile};
