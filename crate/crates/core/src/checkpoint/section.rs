use std::io::{Read, Seek, Write};

use super::{check_name, dms_name, to_i64, CheckpointError, CheckpointReader, CheckpointWriter};
use crate::comm::SimComm;
use crate::distribute::{balanced_chunks, chunk_slot, chunk_starts};
use crate::element::{Family, LagrangeElement};
use crate::plex::DistPlex;
use crate::section::{chunk_map, GlobalSection, LocalSection};
use crate::starforest::{RemotePoint, StarForest};

/// Writes the global section arrays and the element tag.
pub fn section_view<W: Write + Seek>(
    w: &mut CheckpointWriter<W>,
    space: &str,
    gs: &GlobalSection,
    element: &LagrangeElement,
) -> Result<(), CheckpointError> {
    check_name(space)?;
    if w.has_prefix(&dms_name(space, "")) {
        return Err(CheckpointError::DuplicateSpaceName { name: space.to_owned() });
    }
    w.write_i64(&dms_name(space, "section/g"), &to_i64(&gs.g))?;
    w.write_i64(&dms_name(space, "section/dof"), &to_i64(&gs.dof))?;
    w.write_i64(&dms_name(space, "section/off"), &to_i64(&gs.off))?;
    w.write_i64(
        &dms_name(space, "element"),
        &[element.family.code(), element.degree as i64, element.components as i64],
    )?;
    Ok(())
}

pub fn read_element<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    space: &str,
) -> Result<LagrangeElement, CheckpointError> {
    let tag = r.read_i64(&dms_name(space, "element"))?;
    let bad = |reason: String| CheckpointError::ElementMismatch { reason };
    if tag.len() != 3 {
        return Err(bad(format!("element tag of {space} has {} entries", tag.len())));
    }
    let family = Family::from_code(tag[0]).ok_or_else(|| bad(format!("unknown family code {}", tag[0])))?;
    let degree = usize::try_from(tag[1]).map_err(|_| bad(format!("negative degree {}", tag[1])))?;
    let components = usize::try_from(tag[2]).map_err(|_| bad(format!("negative component count {}", tag[2])))?;
    LagrangeElement::vector(family, degree, components).map_err(|e| bad(e.to_string()))
}

/// A section reconstructed on the loading ranks.
#[derive(Clone, Debug)]
pub struct LoadedSection {
    pub sections: Vec<LocalSection>,
    /// Map from every local DoF to its slot in the balanced chunks of the
    /// saved vector.
    pub dof_sf: StarForest,
    pub element: LagrangeElement,
    pub global_dofs: usize,
}

/// Rebuilds the local sections of a loaded mesh. `point_sf` maps loaded
/// points to saved point slots.
pub fn section_load<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    comm: &SimComm,
    space: &str,
    dist: &DistPlex,
    point_sf: &StarForest,
) -> Result<LoadedSection, CheckpointError> {
    let m = comm.size();
    let element = read_element(r, space)?;
    let e = r.entry(&dms_name(space, "section/g"))?.len();
    if e != dist.numbering.num_global {
        return Err(CheckpointError::SizeMismatch {
            what: format!("points in section {space}"),
            expected: dist.numbering.num_global,
            found: e,
        });
    }
    let sizes = balanced_chunks(e, m)?;
    let starts = chunk_starts(&sizes);
    let mut g_p = Vec::with_capacity(m);
    let mut dof_p = Vec::with_capacity(m);
    let mut off_p = Vec::with_capacity(m);
    for rank in 0..m {
        g_p.push(r.read_usize_range(&dms_name(space, "section/g"), starts[rank], sizes[rank])?);
        dof_p.push(r.read_usize_range(&dms_name(space, "section/dof"), starts[rank], sizes[rank])?);
        off_p.push(r.read_usize_range(&dms_name(space, "section/off"), starts[rank], sizes[rank])?);
    }
    let d: usize = comm.phase(|rank| dof_p[rank].iter().sum::<usize>()).into_iter().sum();

    let ip_to_lp = chunk_map(&g_p, e)?;
    let it_to_ip = point_sf.compose(&ip_to_lp.invert_bijective()?)?;
    let dof_t = it_to_ip.sf.broadcast(&dof_p)?;
    let off_t = it_to_ip.sf.broadcast(&off_p)?;
    let unset = |rank: usize| CheckpointError::SizeMismatch {
        what: format!("rank {rank}: points without a saved section entry"),
        expected: 0,
        found: 1,
    };

    let cell_dim = dist.plexes.first().map_or(0, |p| p.dim());
    let expected = element.dofs_per_depth(cell_dim);
    let sections = comm.try_phase(|rank| {
        let dof = dof_t[rank]
            .iter()
            .map(|d| d.ok_or_else(|| unset(rank)))
            .collect::<Result<Vec<_>, _>>()?;
        for (p, &count) in dof.iter().enumerate() {
            let want = expected.get(dist.plexes[rank].depth(p)).copied().unwrap_or(0);
            if count != want {
                return Err(CheckpointError::ElementMismatch {
                    reason: format!("rank {rank} point {p} has {count} saved DoFs, {element} expects {want}"),
                });
            }
        }
        Ok(LocalSection::from_dofs(dof))
    })?;

    // local DoFs -> global DoF index, all roots on rank 0
    let mut j_roots = vec![0; m];
    j_roots[0] = d;
    let jt_leaves = comm.try_phase(|rank| {
        let s = &sections[rank];
        let mut leaves = Vec::with_capacity(s.total);
        for (p, base) in off_t[rank].iter().enumerate() {
            let base = base.ok_or_else(|| unset(rank))?;
            leaves.extend((0..s.dof[p]).map(|i| (s.off[p] + i, RemotePoint::new(0, base + i))));
        }
        Ok::<_, CheckpointError>(leaves)
    })?;
    let jt_to_j = StarForest::new(j_roots.clone(), sections.iter().map(|s| s.total).collect(), jt_leaves)?;
    let jp_starts = chunk_starts(&balanced_chunks(d, m)?);
    let mut j_leaves = vec![Vec::new(); m];
    j_leaves[0] = (0..d).map(|j| (j, chunk_slot(j, &jp_starts))).collect();
    let j_to_jp = StarForest::new(balanced_chunks(d, m)?, j_roots, j_leaves)?;
    let dof_sf = jt_to_j.compose(&j_to_jp)?.sf;
    Ok(LoadedSection {
        sections,
        dof_sf,
        element,
        global_dofs: d,
    })
}
