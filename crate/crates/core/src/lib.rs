//! Cupolets of the double scroll oscillator.
//!
//! Binary control words are turned into stabilized periodic orbits
//! ([`cupolet`]) by a bin-based control scheme on two Poincaré sections
//! ([`section`], [`control`]). Pairs of cupolets whose visitation sequences
//! drive each other through an [`exchange`] function are searched and
//! co-simulated in [`entangle`]; [`targeting`] moves between cupolets along
//! shortest transition paths and [`analysis`] collects entropy, spectra,
//! Lyapunov exponents and state-vector weights.

pub mod analysis;
pub mod config;
pub mod control;
pub mod cupolet;
pub mod dynsys;
pub mod entangle;
pub mod error;
pub mod exchange;
pub mod par;
pub mod section;
pub mod targeting;

pub use config::{Fingerprint, SystemConfig};
pub use dynsys::State;
pub use error::{Error, Result};
pub use section::{CodingTable, Plane, SectionSet};
