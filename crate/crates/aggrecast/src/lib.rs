//! Near-constant-rate wireless aggregation scheduling under the physical
//! (SINR) interference model.
//!
//! The crate builds Euclidean MSTs over arbitrary planar pointsets, colors
//! conflict graphs over the tree links, verifies every slot of the resulting
//! periodic schedule (directly for oblivious power, via a power-control
//! oracle for arbitrary power), simulates the realized aggregation rate and
//! latency, and reproduces the adversarial lower-bound pointsets exactly in
//! log-domain arithmetic.
//!
//! With the default `parallel` feature the quadratic and quartic inner loops
//! (conflict-pair scans, MST construction, slot verification, exhaustive
//! pairwise feasibility scans) run on rayon; disabling the feature falls back
//! to the sequential implementations, which are always compiled and exported
//! for benchmarking.

pub mod conflict;
pub mod formats;
pub mod geom;
pub mod instances;
pub mod logdomain;
pub mod mst;
pub mod scheduler;
pub mod sinr;

pub use geom::{ModelParams, Point};
pub use logdomain::{LogScalar, SignedLog};
