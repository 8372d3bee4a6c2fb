//! Segments, their spiral images, crossing tables and the construction of
//! trajectories following prescribed symbolic paths.

pub mod engine;
pub mod follows;
pub mod realize;
pub mod segment;

pub use engine::SwitchTolerances;
pub use follows::{verify_follows, FollowsReport, FollowsViolation, Neighbourhoods};
pub use realize::{
    crossing_residual, find_crossings, initial_interval, realize_infinite_prefix, realize_path,
    refine_once, AdmissibleInterval, BracketRecord, PrefixRealization, RealizeMode, RealizeOptions,
    Realization, ReseedLevel,
};
pub use segment::{segment_image, GridSpec, Segment, SpiralSamples};
