//! Effort assignment and propagation over multi-attribute decision systems.
//!
//! A decision system is a set of factors linked by pairwise direct
//! influences, each with a normalized significance toward an implicit goal.
//! Some factors can be worked on directly (accessible), others only receive
//! effort through propagation (latent). This crate evaluates how much of a
//! unit of assigned effort reaches the goal under two families of strategies:
//!
//! * **parallel** ([`peap`]): every accessible factor is worked on at once and
//!   effort flows one hop into the latent factors;
//! * **hierarchical** ([`heap`]): effort is assigned block by block along a
//!   strategic path through the factor hierarchy and propagates upward through
//!   all ascending chains.
//!
//! Supporting modules cover opinion aggregation and project files
//! ([`ingestion`], [`project`]), total relation matrices and significance
//! thresholds ([`relation`]), brute-force verifiers ([`oracle`]) and the
//! comparison report plus command line front end ([`report`], [`cli`]).
//!
//! ```
//! use effprop::model::{Factor, FactorSystem, Level, SignificanceVector};
//! use effprop::peap;
//!
//! let system = FactorSystem::new(
//!     vec![
//!         Factor::new("a", "A", true, Level::new(1, 1)),
//!         Factor::new("b", "B", true, Level::new(1, 1)),
//!     ],
//!     "goal",
//! )?;
//! let (daf, _ndaf) = effprop::model::classify_factors(&system)?;
//! let nsig = SignificanceVector::from_pairs([("a", 0.25), ("b", 0.75)]);
//! let eff = peap::weighted_assignment(&daf, &nsig, 1.0)?;
//! assert!((eff.effort("b") - 0.75).abs() < 1e-12);
//! # Ok::<(), effprop::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod case_study;
pub mod cli;
pub mod error;
pub mod heap;
pub mod ingestion;
pub mod matrix;
pub mod model;
pub mod oracle;
pub mod peap;
pub mod project;
pub mod relation;
pub mod report;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::SquareMatrix;
pub use model::{
    EffortAssignment, Factor, FactorId, FactorSystem, Level, NormalizedInfluenceMatrix,
    SignificanceVector, StrategyResult,
};
