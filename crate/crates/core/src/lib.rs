//! Resilient quantized consensus over multi-hop relay networks.
//!
//! The crate covers directed graphs with hop-bounded path enumeration,
//! exact robustness checks, minimum message covers, the QMW-MSR node update,
//! adversary behaviours and a discrete-time simulation engine.

pub mod adversary;
pub mod engine;
pub mod graph;
pub mod mmc;
pub mod protocol;
pub mod robustness;
pub mod seed;
