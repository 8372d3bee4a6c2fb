//! Numerical evidence about the dynamics near the network: attraction,
//! contraction, periodic points, crossing tests and the attractors that
//! appear once the connections are split.

pub mod attractors;
pub mod contraction;
pub mod horseshoe;
pub mod orbits;
pub mod periodic;
pub mod stability;

pub use attractors::{attractor_scan, ScanEntry, ScanOptions, Transient};
pub use contraction::{contraction_profile, log_grid, ContractionProfile, ProfileRow};
pub use horseshoe::{horseshoe_contrast, horseshoe_scan, CrossingReport, HorseshoeOptions, WallRect};
pub use orbits::{Multiplier, OrbitKind, PeriodicOrbit};
pub use periodic::{periodic_orbit_search, AttractorReport, SearchOptions};
pub use stability::{stability_sample, trapping_height, OrbitSummary, Outcome, StabilityOptions, StabilityReport};
