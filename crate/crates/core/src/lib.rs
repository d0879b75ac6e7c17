//! Path structure of best-response, better-response and satisficing graphs
//! of finite normal-form games.
//!
//! The crate is organised bottom-up:
//!
//! - [`game`] holds the exact game model and per-player response primitives.
//! - [`format`] reads and writes the JSON game file format.
//! - [`graph`] builds the three response graphs and classifies games as
//!   weakly acyclic / generalized weakly acyclic.
//! - [`chain`] is the satisficing Markov chain: exact kernel, seeded
//!   simulation, communicating classes and absorption analysis.
//! - [`conditions`] checks the strict-equilibrium sufficient conditions.
//! - [`search`] generates game corpora and runs censuses and sweeps.

pub mod chain;
pub mod conditions;
pub mod error;
pub mod format;
pub mod game;
pub mod graph;
pub mod search;

pub use error::{Error, Result};
pub use game::{ActionProfile, Game, Limits, NamedExample, PartialProfile, Payoff, PlayerSubset};
pub use graph::{classify, GraphKind, ResponseGraph};
