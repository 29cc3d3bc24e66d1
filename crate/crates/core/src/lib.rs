//! Local search for the 2-3-Set Packing problem.
//!
//! Sets have two or three elements and weigh one less than their size. The
//! solver grows a packing by bounded-size local improvements and, in the
//! general mode, by improving binoculars of a search graph found with color
//! coding. A hereditary variant, an exact branch-and-bound oracle and a
//! normalization transform for analysis tuples complete the crate.

pub mod binocular;
pub mod color_coding;
pub mod conflict;
pub mod enumerate;
pub mod hereditary;
pub mod instance;
pub mod local_search;
pub mod normalizer;
pub mod oracle;
pub mod search_graph;

pub use conflict::{ConflictGraph, Vertex};
pub use instance::{ElementId, Format, Instance, InstanceError, PackSet, SetId};
pub use local_search::{solve, Mode, Packing, PairMode, RunStats, SearchParams};
