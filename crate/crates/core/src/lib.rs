//! Core algorithms for peer-influence analysis on mobile call networks.
//!
//! The crate covers the full analysis chain: monthly mutual-call graph
//! construction, attribute-aware overlapping community detection on adopter
//! ego-networks, core/periphery classification, discrete-time adoption hazard
//! panels with intransitive-triad instruments, and Probit / two-stage residual
//! inclusion estimation. A synthetic population generator with planted ground
//! truth closes the loop for end-to-end validation.
//!
//! Everything here is pure computation over `alloc` collections; file formats,
//! the CLI, and parallel orchestration live in the companion `corepulse` crate.
//! All randomness flows through the seeded [`rng::Rng`], and all collections
//! with observable iteration order are ordered, so identical inputs and seeds
//! produce bit-identical results.

#![cfg_attr(not(feature = "std"), no_std)]
// Published rational-approximation constants keep their source digits, and
// index loops spell out the matrix algebra.
#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

extern crate alloc;

pub mod attrs;
pub mod cesna;
pub mod community;
pub mod coreperi;
pub mod design;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod mathx;
pub mod panel;
pub mod probit;
pub mod profile;
pub mod report;
pub mod rng;
pub mod synth;
pub mod twosri;

pub use error::CoreError;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, CoreError>;
