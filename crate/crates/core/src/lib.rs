//! Dynamic random geometric graphs on the unit torus.
//!
//! Points arrive one at a time (1-choice) or in partner pairs from which one
//! is kept (2-choice). The crate tracks hitting times for minimum degree,
//! k-connectivity and Hamiltonicity, and provides the tessellation-based
//! constructions used to build good choice sets and Hamilton cycles.

pub mod error;
pub mod geometry;
pub mod spatial_graph;
pub mod tessellation;
pub mod processes;
pub mod offline_choice;
pub mod hamilton;
pub mod experiments;

pub use error::{GeoError, Result};
pub use geometry::{GeoParams, TorusPoint};
