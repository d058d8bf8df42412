//! Metadata-based provenance analysis of ISO-BMFF (MP4/MOV) video files.
//!
//! The pipeline parses the box tree ([`bmff`]), refines it into a metadata
//! tree ([`refine`]), serializes that into strings ([`codec`]), turns string
//! collections into feature vectors ([`features`]) and trains classifiers on
//! them ([`classify`]). [`harness`] wires the stages into experiments.

pub mod bmff;
pub mod classify;
pub mod codec;
pub mod error;
pub mod features;
pub mod harness;
pub mod refine;

pub use error::{Error, Result};
