//! Laboratory for the susceptibility and higher component-size moments of
//! sparse random graphs.
//!
//! The crate has four parts:
//!
//! * [`poly`] and [`families`] — exact construction of the moment and
//!   covariance polynomial families (p_k, q_k, hp_{k,l}, pi_k, r_m, px_k,
//!   py_k) over arbitrary-precision rationals, with cross-recursion
//!   consistency checks.
//! * [`borel`] — the Borel distribution: exact pmf/moments/cumulants, the
//!   size-biased variant, a branching-process sampler, and a moment
//!   generating function check.
//! * [`graph`] — an evolving random graph with a union-find tracker that
//!   maintains S_1..S_kmax incrementally, plus G(n, p) snapshot and
//!   edge-ordered trajectory samplers.
//! * [`experiments`] — a Monte Carlo harness that verifies the laws of large
//!   numbers, variance asymptotics, normality, supercritical dominance and
//!   critical scaling of these statistics, with seeded, thread-count
//!   independent replication.

pub mod borel;
pub mod experiments;
pub mod families;
pub mod graph;
pub mod poly;
pub mod rng;
pub mod stats;

pub use families::{conjecture_report, leading_constant_c, PolyCache};
pub use graph::{ComponentTracker, SnapshotSummary};
pub use poly::Polynomial;
