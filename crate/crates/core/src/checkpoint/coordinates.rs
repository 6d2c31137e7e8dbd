use std::io::{Read, Seek, Write};

use super::{
    local_vector_load, local_vector_view, section_load, section_view, CheckpointError, CheckpointReader,
    CheckpointWriter,
};
use crate::comm::SimComm;
use crate::element::{Family, LagrangeElement};
use crate::plex::DistPlex;
use crate::section::{build_local_section, local_to_global_section, LocalSection};
use crate::starforest::StarForest;

/// Name of the function space that carries a mesh's coordinates.
pub fn coordinates_space(mesh: &str) -> String {
    format!("{mesh}_coordinates")
}

fn coordinate_sections(
    comm: &SimComm,
    dist: &DistPlex,
    gdim: usize,
) -> Result<(LagrangeElement, Vec<LocalSection>), CheckpointError> {
    let el = LagrangeElement::vector(Family::P, 1, gdim)?;
    let sections =
        comm.try_phase(|r| build_local_section(&dist.plexes[r], &el.dofs_per_depth(dist.plexes[r].dim())))?;
    Ok((el, sections))
}

/// Saves vertex coordinates as a vector-valued P1 function.
pub fn coordinates_view<W: Write + Seek>(
    w: &mut CheckpointWriter<W>,
    comm: &SimComm,
    mesh: &str,
    dist: &DistPlex,
    gdim: usize,
    coords: &[Vec<[f64; 3]>],
) -> Result<(), CheckpointError> {
    let (el, sections) = coordinate_sections(comm, dist, gdim)?;
    let gs = local_to_global_section(comm, &sections, dist)?;
    let local: Vec<Vec<f64>> = comm.phase(|r| {
        let mut v = vec![0.0; sections[r].total];
        for p in dist.plexes[r].stratum(0) {
            v[sections[r].range(p)].copy_from_slice(&coords[r][p][..gdim]);
        }
        v
    });
    let space = coordinates_space(mesh);
    section_view(w, &space, &gs, &el)?;
    local_vector_view(w, &space, "coordinates", &gs, &sections, dist, &local)
}

type RankCoords = Vec<Vec<[f64; 3]>>;

/// Loads vertex coordinates onto a loaded mesh. Returns the geometric
/// dimension and per-rank coordinates indexed by local point.
pub fn coordinates_load<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    comm: &SimComm,
    mesh: &str,
    dist: &DistPlex,
    point_sf: &StarForest,
) -> Result<(usize, RankCoords), CheckpointError> {
    let space = coordinates_space(mesh);
    let loaded = section_load(r, comm, &space, dist, point_sf)?;
    let gdim = loaded.element.components;
    if loaded.element.family != Family::P || loaded.element.degree != 1 || gdim > 3 {
        return Err(CheckpointError::ElementMismatch {
            reason: format!("coordinates stored as {}", loaded.element),
        });
    }
    let values = local_vector_load(r, comm, &space, "coordinates", &loaded.dof_sf)?;
    Ok((
        gdim,
        comm.phase(|rank| {
            let s = &loaded.sections[rank];
            (0..s.npoints())
                .map(|p| {
                    let mut x = [0.0; 3];
                    x[..s.dof[p]].copy_from_slice(&values[rank][s.range(p)]);
                    x
                })
                .collect()
        }),
    ))
}
