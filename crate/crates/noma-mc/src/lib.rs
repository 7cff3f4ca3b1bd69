//! Seeded Monte Carlo simulation of power-domain NOMA multiple-access
//! mechanics.
//!
//! The library covers three groups of machinery:
//!
//! - **Uplink SIC decoding orders** ([`sic`], [`outage`]): CSI-based,
//!   QoS-based, and hybrid successive-interference-cancellation orders for
//!   a two-user cluster, plus Monte Carlo outage estimation over SNR
//!   sweeps, error-floor detection, and independent gain-only asymptotic
//!   floor oracles.
//! - **Semi-grant-free uplink access** ([`semigf`]): broadcast MTP/MTI
//!   thresholds, grant-free contention over orthogonal resource blocks,
//!   layered power pools, access class barring, and connectivity
//!   measurement.
//! - **QoS-driven downlink planning** ([`downlink`]): finite-blocklength
//!   achievable rates, sensor/broadband user pairing, minimal power
//!   allocation, and greedy admission under a power budget.
//!
//! Everything is driven by the deterministic stream tree in [`channel`]:
//! a `(master_seed, stream_id)` pair pins every random draw, so results
//! are bit-identical across runs and across any parallel execution plan.
//!
//! The `examples/` directory holds one runnable study per capability; the
//! thin `noma-mc` binary runs config-driven experiments and emits CSV and
//! SVG (see [`cli`]).

// Validation deliberately writes `!(x > 0.0)` so NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod downlink;
pub mod outage;
pub mod semigf;
pub mod sic;
pub mod stats;

pub use channel::{FadingModel, LinkRealization, RngStream};
pub use sic::{DecodingOutcome, DecodingPolicy, Role, UserLoad};
