//! Core engine for analysing the German ground-mounted PV auction programme.
//!
//! Everything here is `no_std` + `alloc`: clearing and penalty rules, the
//! register linkage that reconstructs bid values from TSO payment data, the
//! derived per-project and per-auction metrics, the rank/correlation/OLS
//! tests, and a seeded generator of synthetic registers with a ground-truth
//! oracle. File formats and the command line live in the `pvauction` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod calendar;
pub mod clearing;
pub mod ids;
pub mod linkage;
pub mod metrics;
pub mod oracle;
pub mod pipeline;
pub mod price;
pub mod registers;
pub mod stats;
pub mod synth;
mod text_serde;
pub mod validation;

pub use calendar::{Date, YearMonth};
pub use ids::{BidId, ProjectId, UnitId};
pub use price::Price;
