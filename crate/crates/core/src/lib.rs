//! Simulation library for connectivity-oriented space-time scheduling in
//! MIMO ad hoc multicast networks.
//!
//! A source node streams packets to every other node over a fixed routing
//! tree. Frames are divided into time slots; links assigned to the same slot
//! interfere and manage that interference with transmit/receive beamforming
//! and power control. The crate provides:
//!
//! - network geometry, the multicast tree and its interference/collision
//!   graph ([`netgraph`]),
//! - MIMO channel sampling with a first-order Markov outdated-CSI model
//!   ([`channel`]),
//! - exact SINR and Jensen-bound evaluation ([`sinr`]),
//! - sigmoid-smoothed slot optimization of beamformers and powers
//!   ([`beamopt`]),
//! - priority-ordered greedy slot assignment ([`scheduler`]),
//! - iterative local power control ([`powerctl`]),
//! - interference-free connectivity and power benchmarks ([`bounds`]),
//! - the Monte Carlo experiment runner and CSV emitter ([`harness`]).

pub mod beamopt;
pub mod bounds;
pub mod channel;
pub mod harness;
pub mod linalg;
pub mod netgraph;
pub mod powerctl;
pub mod rng;
pub mod scheduler;
pub mod sinr;
