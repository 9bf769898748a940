//! Membership oracles, samplers and from-scratch classifiers for the CHSH
//! quantum correlation set.
//!
//! The crate is organised around the pipeline it supports:
//!
//! - [`geometry`] — exact descriptions of the non-signalling polytope, the
//!   local polytope, CHSH functionals and the analytic TLM quantum boundary
//!   in correlation space.
//! - [`sdp`] — a small dense interior-point semidefinite solver used by the
//!   NPA and see-saw oracles.
//! - [`npa`] — moment-matrix relaxations of the quantum set at levels 1,
//!   1+AB, 2, 3 with membership / boundary queries.
//! - [`seesaw`] — steered see-saw: alternating SDPs over state and
//!   observables at fixed local dimension, used as an inner approximation.
//! - [`sampling`] — dataset generators: hit-and-run uniform sampling,
//!   boundary-offset pairs, shell/spread sampling and the non-local simplex.
//! - [`ml`] — RBF-kernel SVM trained by SMO and a dense MLP with focal or
//!   balanced-BCE loss, both written from scratch.
//! - [`eval`] — spread tests, 2D slices, Monte Carlo relative volumes and
//!   aggregate reports.
//! - [`io`] — JSONL / CSV dataset formats and model serialization.
//!
//! Batch operations run data-parallel via rayon when the `parallel` feature
//! (default) is enabled; [`exec`] provides the sequential fallback used for
//! comparison benchmarks.

pub mod exec;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod ml;
pub mod npa;
pub mod sampling;
pub mod sdp;
pub mod seesaw;

pub mod eval;

pub use geometry::{Behaviour, ChshVariant, Space};
pub use sampling::{Label, LabelledPoint};
