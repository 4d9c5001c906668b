//! Beamformed downlink control channel simulator.
//!
//! The crate is organised around the pieces of a system-level evaluation of
//! a beamformed PDCCH on a full-dimension MIMO array:
//!
//! * [`beam`] steers beams from a uniform rectangular array.
//! * [`control`] models the CCE grid and blind-decoding search spaces.
//! * [`link`] is the bit-level DCI chain used to generate BLER tables.
//! * [`abstraction`] maps SINR to aggregation level.
//! * [`deployment`] drops users in a wrapped hexagonal network and computes
//!   per-user SINR reports.
//! * [`sched`] holds the legacy, optimal, EPDCCH and beamformed schedulers.
//! * [`campaign`] ties everything together into reproducible runs.
//! * [`selftest`] is a quick invariant suite for installed binaries.

pub mod abstraction;
pub mod beam;
pub mod campaign;
pub mod control;
pub mod deployment;
pub mod error;
pub mod link;
pub mod rng;
pub mod sched;
pub mod selftest;
pub mod units;

pub use abstraction::{AlThresholdTable, InterferenceProfile};
pub use beam::{Beam, BeamSet, SteeringDirection, UraConfig};
pub use control::{AggregationLevel, CceGrid, DciPlacement, DciRequest, SearchSpaceClass};
pub use error::{Error, Result};
pub use sched::{Scheme, TtiResult};
