//! End-to-end driver: mesh generation, analytic fields, and the N-to-M
//! round trip with its verification report.

mod field;
mod mesh_gen;
mod roundtrip;

pub use crate::comm::{Schedule, SimComm};
pub use field::{Field, FieldError};
pub use mesh_gen::{distribute_serial, gen_mesh, MeshSpec, SerialMesh, Shape};
pub use roundtrip::{
    check_dof_map, check_point_map, interpolate_function, load_and_verify, run_roundtrip, save_state, verify_function,
    Report, RoundtripConfig, Verification, FUNCTION_NAME, MESH_NAME,
};

use thiserror::Error;

use crate::error::ErrorClass;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("unsupported mesh shape '{shape}'")]
    UnsupportedShape { shape: String },
    #[error("bad mesh spec '{spec}': {reason}")]
    BadMeshSpec { spec: String, reason: &'static str },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("rank count must be at least 1")]
    ZeroRanks,
}

impl HarnessError {
    pub fn class(&self) -> ErrorClass {
        ErrorClass::Usage
    }
}
