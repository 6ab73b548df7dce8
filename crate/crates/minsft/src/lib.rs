//! Generators and validators for a layered three-dimensional subshift of
//! finite type built on top of the rigid Robinson tiling.
//!
//! The crate is organized around one currency type, [`pattern::Pattern`]: a
//! finite box of multi-layer symbol codes. Generators (`robinson`,
//! `simulation`) produce patterns layer by layer, validators re-check every
//! local rule on them, and the `counters` and `machine` modules hold the pure
//! state machines that the spatial layers encode.

pub mod config;
pub mod counters;
pub mod geom;
pub mod hierarchy;
pub mod machine;
pub mod pattern;
pub mod ppm;
pub mod robinson;
pub mod simulation;

pub use geom::{Box2, Pos2};
pub use pattern::{Pattern, RuleViolation};
