//! Deterministic simulation and allocation library for cooperative relaying
//! at a cellular cell border.
//!
//! A relay forwards fixed-length bursts of `K` packets to two mobiles and
//! splits each burst according to per-link packet error rate (PER) estimates
//! and per-mobile PER targets. The crate provides:
//!
//! - [`allocation`]: the closed-form burst split, its integerization, the
//!   uniform baseline, and a brute-force integer optimum used as an
//!   independent oracle;
//! - [`channel`]: link error models (fixed PER, or SNR-derived 16-QAM over
//!   AWGN) and reproducible Bernoulli packet outcomes;
//! - [`coop_route`]: tables of direct and two-hop relay routes with
//!   minimum-transmission-time route selection;
//! - [`engine`]: the deterministic burst-cycle simulator with ACK-driven
//!   PER estimation;
//! - [`experiments`]: sweep harnesses (throughput vs. relay count,
//!   adaptive vs. uniform allocation over the target ratio `a`) with
//!   deterministic CSV output.
//!
//! Every random quantity flows from a single 64-bit seed through a fixed
//! draw order, so identical configurations produce bit-identical results.

pub mod allocation;
pub mod channel;
pub mod coop_route;
pub mod engine;
pub mod experiments;
