use std::io::{Read, Seek, Write};

use super::{dms_name, CheckpointError, CheckpointReader, CheckpointWriter};
use crate::comm::SimComm;
use crate::plex::DistPlex;
use crate::section::{local_to_global_vector, GlobalSection, LocalSection};
use crate::starforest::StarForest;

fn vec_name(space: &str, vec: &str) -> String {
    dms_name(space, &format!("vecs/{vec}/values"))
}

/// Writes owned slices, rank by rank, as one vector of length D.
pub fn global_vector_view<W: Write + Seek>(
    w: &mut CheckpointWriter<W>,
    space: &str,
    vec: &str,
    gs: &GlobalSection,
    owned: &[Vec<f64>],
) -> Result<(), CheckpointError> {
    super::check_name(vec)?;
    for (rank, slice) in owned.iter().enumerate() {
        if slice.len() != gs.owned_dofs[rank] {
            return Err(CheckpointError::SizeMismatch {
                what: format!("owned values on rank {rank}"),
                expected: gs.owned_dofs[rank],
                found: slice.len(),
            });
        }
    }
    let slices: Vec<&[f64]> = owned.iter().map(Vec::as_slice).collect();
    w.write_slices_f64(&vec_name(space, vec), &slices)
}

/// Drops ghost DoFs from local vectors and writes the result.
pub fn local_vector_view<W: Write + Seek>(
    w: &mut CheckpointWriter<W>,
    space: &str,
    vec: &str,
    gs: &GlobalSection,
    sections: &[LocalSection],
    dist: &DistPlex,
    local: &[Vec<f64>],
) -> Result<(), CheckpointError> {
    let owned = local_to_global_vector(sections, dist, local)?;
    global_vector_view(w, space, vec, gs, &owned)
}

/// Local vectors with ghosts: every local DoF copies its saved value.
pub fn local_vector_load<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    comm: &SimComm,
    space: &str,
    vec: &str,
    dof_sf: &StarForest,
) -> Result<Vec<Vec<f64>>, CheckpointError> {
    let name = vec_name(space, vec);
    let d: usize = dof_sf.root_sizes().iter().sum();
    let found = r.entry(&name)?.len();
    if found != d {
        return Err(CheckpointError::SizeMismatch {
            what: format!("values of {vec}"),
            expected: d,
            found,
        });
    }
    let mut chunks = Vec::with_capacity(comm.size());
    let mut at = 0;
    for &n in dof_sf.root_sizes() {
        chunks.push(r.read_f64_range(&name, at, n)?);
        at += n;
    }
    let out = dof_sf.broadcast(&chunks)?;
    comm.try_phase(|rank| {
        out[rank]
            .iter()
            .map(|v| {
                v.ok_or_else(|| CheckpointError::SizeMismatch {
                    what: format!("rank {rank}: DoFs without a saved value"),
                    expected: 0,
                    found: 1,
                })
            })
            .collect()
    })
}

/// Owned values only, in global-vector order per rank.
pub fn global_vector_load<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    comm: &SimComm,
    space: &str,
    vec: &str,
    dof_sf: &StarForest,
    sections: &[LocalSection],
    dist: &DistPlex,
) -> Result<Vec<Vec<f64>>, CheckpointError> {
    let local = local_vector_load(r, comm, space, vec, dof_sf)?;
    Ok(local_to_global_vector(sections, dist, &local)?)
}
