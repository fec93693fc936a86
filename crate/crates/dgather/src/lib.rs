//! Deterministic simulation laboratory for gathering oblivious
//! Look-Compute-Move robots under adversarial defected views.
//!
//! The crate is organized as:
//! - [`geometry`]: stateless planar-geometry kernel (midpoints, triangle
//!   classification, Go-Lines, extremal frames, hull metrics),
//! - [`model`]: configurations, the anonymity boundary, and observations,
//! - [`algo_fsync42`]: destination rule for four fully synchronous robots
//!   where each sees at most two others,
//! - [`algo_async_nk`]: level/Go-Line destination rule for asynchronous
//!   robots with one-axis agreement,
//! - [`adversary`]: seeded, replayable visibility / motion / scheduling
//!   policies,
//! - [`engine`]: the simulation loop, traces, and termination detection,
//! - [`checker`]: executable property suites (exhaustive small-instance
//!   oracles, trace audits, the gathering-point predictor),
//! - [`sweep`]: the parameter-sweep harness with CSV output.

pub mod adversary;
pub mod algo_async_nk;
pub mod algo_fsync42;
pub mod checker;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod model;
pub mod rng;
pub mod sweep;

pub use error::{Error, Result};
