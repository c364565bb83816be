//! Simulation library for random linear network codes over line networks
//! with worst-case packet schedules.
//!
//! The library is organized around five pieces:
//!
//! * [`gf2`] — bit-packed GF(2) vectors and matrices (rank, RREF, extended
//!   solving, recoverability).
//! * [`banded`] — banded random binary matrix classes and their full-rank
//!   statistics.
//! * [`network`] — worst-case schedule generation (one-in-one-out,
//!   all-in-all-out) and per-chunk flow capacities on the schedule trellis.
//! * [`codes`] — dense, chunked (CC) and overlapped-chunked (OCC) coding
//!   over a schedule, with message/packet error rate evaluation.
//! * [`bounds`] — closed-form performance bounds for overlaying against
//!   simulation.
//!
//! [`harness`] ties everything together behind the `occsim` CLI: seeded,
//! worker-count-invariant experiment sweeps that emit CSV.

pub mod banded;
pub mod bounds;
pub mod codes;
pub mod gf2;
pub mod harness;
pub mod network;
pub mod stats;
