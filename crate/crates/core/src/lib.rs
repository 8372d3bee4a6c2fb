//! Return-map model of a symmetric pair of homoclinic loops at a
//! saddle-focus, with tools to realize symbolic paths and to audit the
//! absence of horseshoes.

// `!(x > a)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod audit;
pub mod commands;
pub mod config;
pub mod error;
pub mod geometry;
pub mod itinerary;
pub mod maps;
pub mod precision;
pub mod records;
pub mod suspension;
pub mod switching;

pub use error::{ModelError, Result};
