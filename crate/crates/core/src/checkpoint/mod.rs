//! Saving and loading meshes and functions through the NMCK container.
//!
//! Dataset layout:
//!
//! ```text
//! /topologies/{mesh}/cone_sizes | cones | depths
//! /topologies/{mesh}/labels/{label}/{value}
//! /topologies/{mesh}/distribution/{N}/owners | local_sizes | local_points
//! /dms/{space}/section/g | dof | off
//! /dms/{space}/element
//! /dms/{space}/vecs/{vec}/values
//! ```

mod api;
mod container;
mod coordinates;
mod labels;
mod section;
mod topology;
mod vector;

pub use api::{load_function, load_mesh, save_function, save_mesh, Function, FunctionSpace, LoadOptions, Mesh};
pub use container::{CheckpointReader, CheckpointWriter, Dtype, TocEntry, MAGIC, VERSION};
pub use coordinates::{coordinates_load, coordinates_space, coordinates_view};
pub use labels::{gather_labels, labels_load, labels_view, Labels};
pub use section::{read_element, section_load, section_view, LoadedSection};
pub use topology::{distribution_load, distribution_view, topology_load, topology_view, PlanSource};
pub use vector::{global_vector_load, global_vector_view, local_vector_load, local_vector_view};

use thiserror::Error;

use crate::distribute::DistributeError;
use crate::element::ElementError;
use crate::plex::NumberingError;
use crate::section::SectionError;
use crate::starforest::SfError;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("dataset {name} not found")]
    MissingDataset { name: String },
    #[error("not a readable checkpoint: {reason}")]
    VersionMismatch { reason: String },
    #[error("mesh {name} is already in this file")]
    DuplicateMeshName { name: String },
    #[error("function space {name} is already in this file")]
    DuplicateSpaceName { name: String },
    #[error("dataset {name} written twice")]
    DuplicateDataset { name: String },
    #[error("dataset {name} holds {found}, expected {expected}")]
    DtypeMismatch {
        name: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("{what}: expected {expected}, found {found}")]
    SizeMismatch {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("element mismatch: {reason}")]
    ElementMismatch { reason: String },
    #[error("saved distributions are for {saved:?} ranks, cannot restore on {requested}")]
    RankCountMismatch { saved: Vec<usize>, requested: usize },
    #[error("invalid name {name:?}: {reason}")]
    BadName { name: String, reason: &'static str },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Distribute(#[from] DistributeError),
    #[error(transparent)]
    Section(#[from] SectionError),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Sf(#[from] SfError),
    #[error(transparent)]
    Numbering(#[from] NumberingError),
}

pub(crate) fn topo_name(mesh: &str, leaf: &str) -> String {
    format!("/topologies/{mesh}/{leaf}")
}

pub(crate) fn dms_name(space: &str, leaf: &str) -> String {
    format!("/dms/{space}/{leaf}")
}

pub(crate) fn check_name(name: &str) -> Result<(), CheckpointError> {
    let reason = if name.is_empty() {
        Some("empty")
    } else if name.contains('/') {
        Some("contains '/'")
    } else {
        None
    };
    match reason {
        Some(reason) => Err(CheckpointError::BadName {
            name: name.to_owned(),
            reason,
        }),
        None => Ok(()),
    }
}

pub(crate) fn to_i64(v: &[usize]) -> Vec<i64> {
    v.iter().map(|&x| x as i64).collect()
}
