//! Cell-free massive MIMO link-level simulator under full pilot reuse.
//!
//! The crate covers the full uplink and downlink chain: network drops and
//! large-scale fading ([`scenario`]), shared-pilot MMSE estimation
//! ([`estimation`]), MR / MMSE / RC-MMSE / GMR combining ([`combining`]),
//! SINR and SE bounds ([`se`]), duality-based precoding ([`precoding`]) and a
//! seeded Monte Carlo engine ([`harness`]).
//! [`config`], [`output`] and [`cli`] wire these into the `cellfree` binary;
//! [`validate`] is its self-check suite.

pub mod cli;
pub mod combining;
pub mod config;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod output;
pub mod precoding;
pub mod scenario;
pub mod se;
pub mod validate;

pub use error::{Error, Result};
