use std::io::{Read, Seek, Write};

use super::{check_name, to_i64, topo_name, CheckpointError, CheckpointReader, CheckpointWriter};
use crate::comm::SimComm;
use crate::distribute::{
    distribute_topology, explicit_distribution, naive_topology_split, Adjacency, Distributed, PartitionPlan,
    PlanChoice, PlanMethod,
};
use crate::plex::DistPlex;

/// Where the load-side repartition gets its plan.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanSource {
    GreedyBfs,
    /// Restore the distribution saved with the same rank count.
    SavedDistribution,
}

/// Writes cones, cone sizes and depths indexed by global number. Each point
/// is written by its owner.
pub fn topology_view<W: Write + Seek>(
    w: &mut CheckpointWriter<W>,
    comm: &SimComm,
    mesh: &str,
    dist: &DistPlex,
) -> Result<(), CheckpointError> {
    check_name(mesh)?;
    if w.has_prefix(&topo_name(mesh, "")) {
        return Err(CheckpointError::DuplicateMeshName { name: mesh.to_owned() });
    }
    let owned: Vec<Vec<(usize, usize, Vec<usize>)>> = comm.phase(|r| {
        dist.owned_points(r)
            .into_iter()
            .map(|p| {
                (
                    dist.numbering.loc_g[r][p],
                    dist.plexes[r].depth(p),
                    dist.global_cone(r, p),
                )
            })
            .collect()
    });
    let e = dist.numbering.num_global;
    let mut depths = vec![0i64; e];
    let mut cones = vec![Vec::new(); e];
    for (g, d, cone) in owned.into_iter().flatten() {
        depths[g] = d as i64;
        cones[g] = to_i64(&cone);
    }
    let sizes: Vec<i64> = cones.iter().map(|c| c.len() as i64).collect();
    let flat: Vec<&[i64]> = cones.iter().map(Vec::as_slice).collect();
    w.write_i64(&topo_name(mesh, "cone_sizes"), &sizes)?;
    w.write_slices_i64(&topo_name(mesh, "cones"), &flat)?;
    w.write_i64(&topo_name(mesh, "depths"), &depths)?;
    Ok(())
}

pub(crate) fn read_cones<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    mesh: &str,
) -> Result<(Vec<Vec<usize>>, Vec<usize>), CheckpointError> {
    let sizes = r.read_usize(&topo_name(mesh, "cone_sizes"))?;
    let flat = r.read_usize(&topo_name(mesh, "cones"))?;
    let depths = r.read_usize(&topo_name(mesh, "depths"))?;
    let total: usize = sizes.iter().sum();
    if flat.len() != total || depths.len() != sizes.len() {
        return Err(CheckpointError::SizeMismatch {
            what: format!("topology of {mesh}"),
            expected: total,
            found: flat.len(),
        });
    }
    let mut cones = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for s in sizes {
        cones.push(flat[at..at + s].to_vec());
        at += s;
    }
    Ok((cones, depths))
}

/// Loads the topology onto `comm.size()` ranks and returns the distribution
/// with the map from loaded points to saved slots.
pub fn topology_load<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    comm: &SimComm,
    mesh: &str,
    layers: usize,
    adjacency: Adjacency,
    source: PlanSource,
) -> Result<Distributed, CheckpointError> {
    let (cones, depths) = read_cones(r, mesh)?;
    match source {
        PlanSource::GreedyBfs => Ok(distribute_topology(
            comm,
            &cones,
            &depths,
            &PlanChoice::GreedyBfs,
            layers,
            adjacency,
        )?),
        PlanSource::SavedDistribution => {
            let (owners, loc_g) = distribution_load(r, mesh, comm.size())?;
            let naive = naive_topology_split(comm, &cones, &depths)?;
            let exact = explicit_distribution(comm, &naive, loc_g, &owners)?;
            let sf = exact.sf.compose(&naive.sf)?.sf;
            Ok(Distributed {
                dist: exact.dist,
                plan: PartitionPlan {
                    parts: exact.partition.clone(),
                    method: PlanMethod::Explicit,
                },
                partition: exact.partition,
                sf,
            })
        }
    }
}

fn dist_name(mesh: &str, n: usize, leaf: &str) -> String {
    topo_name(mesh, &format!("distribution/{n}/{leaf}"))
}

/// Records owners and per-rank point order so the same distribution can be
/// restored on the same number of ranks.
pub fn distribution_view<W: Write + Seek>(
    w: &mut CheckpointWriter<W>,
    comm: &SimComm,
    mesh: &str,
    dist: &DistPlex,
) -> Result<(), CheckpointError> {
    let n = comm.size();
    let owners = to_i64(&dist.owners());
    let sizes: Vec<i64> = dist.numbering.loc_g.iter().map(|l| l.len() as i64).collect();
    let points: Vec<Vec<i64>> = comm.phase(|r| to_i64(&dist.numbering.loc_g[r]));
    let slices: Vec<&[i64]> = points.iter().map(Vec::as_slice).collect();
    w.write_i64(&dist_name(mesh, n, "owners"), &owners)?;
    w.write_i64(&dist_name(mesh, n, "local_sizes"), &sizes)?;
    w.write_slices_i64(&dist_name(mesh, n, "local_points"), &slices)?;
    Ok(())
}

/// Owner per global point and per-rank point lists saved for `nranks` ranks.
pub fn distribution_load<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    mesh: &str,
    nranks: usize,
) -> Result<(Vec<usize>, Vec<Vec<usize>>), CheckpointError> {
    let owners_name = dist_name(mesh, nranks, "owners");
    if !r.has(&owners_name) {
        let prefix = topo_name(mesh, "distribution/");
        let mut saved: Vec<usize> = r
            .names_with_prefix(&prefix)
            .filter_map(|n| n[prefix.len()..].split('/').next()?.parse().ok())
            .collect();
        saved.sort_unstable();
        saved.dedup();
        if saved.is_empty() {
            return Err(CheckpointError::MissingDataset { name: owners_name });
        }
        return Err(CheckpointError::RankCountMismatch {
            saved,
            requested: nranks,
        });
    }
    let owners = r.read_usize(&owners_name)?;
    let sizes = r.read_usize(&dist_name(mesh, nranks, "local_sizes"))?;
    if sizes.len() != nranks {
        return Err(CheckpointError::SizeMismatch {
            what: "local_sizes".into(),
            expected: nranks,
            found: sizes.len(),
        });
    }
    let points_name = dist_name(mesh, nranks, "local_points");
    let mut loc_g = Vec::with_capacity(nranks);
    let mut at = 0;
    for s in sizes {
        loc_g.push(r.read_usize_range(&points_name, at, s)?);
        at += s;
    }
    Ok((owners, loc_g))
}
