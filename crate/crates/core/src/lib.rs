//! N-to-M checkpointing for distributed unstructured finite-element meshes.
//!
//! A mesh, its function spaces and functions are saved from N simulated
//! ranks and reloaded on M. Reloading is driven by star forests keyed on
//! global point numbers; DoF values are copied, never recomputed.

pub mod checkpoint;
pub mod comm;
pub mod distribute;
pub mod element;
mod error;
pub mod harness;
pub mod plex;
pub mod section;
pub mod starforest;

pub use checkpoint::{CheckpointError, CheckpointReader, CheckpointWriter, Function, FunctionSpace, LoadOptions, Mesh};
pub use comm::{Schedule, SimComm};
pub use distribute::{balanced_chunks, Adjacency, PartitionPlan};
pub use element::{Family, LagrangeElement};
pub use error::{Error, ErrorClass};
pub use plex::{DistPlex, GlobalNumbering, Plex};
pub use section::{GlobalSection, LocalSection};
pub use starforest::{Composition, RemotePoint, StarForest};
