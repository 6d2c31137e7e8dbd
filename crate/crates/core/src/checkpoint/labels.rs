use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Seek, Write};

use super::{check_name, to_i64, topo_name, CheckpointError, CheckpointReader, CheckpointWriter};
use crate::comm::SimComm;
use crate::plex::DistPlex;

/// Label name -> stratum value -> sorted points.
pub type Labels = BTreeMap<String, BTreeMap<i64, Vec<usize>>>;

/// Union over ranks of owned labelled points, in global numbers.
pub fn gather_labels(comm: &SimComm, dist: &DistPlex, local: &[Labels]) -> Labels {
    let per_rank: Vec<Vec<(String, i64, usize)>> = comm.phase(|r| {
        let mut out = Vec::new();
        for (name, strata) in &local[r] {
            for (&value, points) in strata {
                out.extend(
                    points
                        .iter()
                        .filter(|&&p| dist.is_owned(r, p))
                        .map(|&p| (name.clone(), value, dist.numbering.loc_g[r][p])),
                );
            }
        }
        out
    });
    let mut sets: BTreeMap<String, BTreeMap<i64, BTreeSet<usize>>> = BTreeMap::new();
    for rank_labels in local {
        for (name, strata) in rank_labels {
            for &value in strata.keys() {
                sets.entry(name.clone()).or_default().entry(value).or_default();
            }
        }
    }
    for (name, value, g) in per_rank.into_iter().flatten() {
        sets.entry(name).or_default().entry(value).or_default().insert(g);
    }
    sets.into_iter()
        .map(|(n, s)| {
            (
                n,
                s.into_iter().map(|(v, pts)| (v, pts.into_iter().collect())).collect(),
            )
        })
        .collect()
}

fn label_prefix(mesh: &str) -> String {
    topo_name(mesh, "labels/")
}

pub fn labels_view<W: Write + Seek>(
    w: &mut CheckpointWriter<W>,
    comm: &SimComm,
    mesh: &str,
    dist: &DistPlex,
    local: &[Labels],
) -> Result<(), CheckpointError> {
    for (name, strata) in gather_labels(comm, dist, local) {
        check_name(&name)?;
        for (value, points) in strata {
            w.write_i64(&format!("{}{name}/{value}", label_prefix(mesh)), &to_i64(&points))?;
        }
    }
    Ok(())
}

/// Each rank keeps the labelled points it can see, in local numbers.
pub fn labels_load<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    comm: &SimComm,
    mesh: &str,
    dist: &DistPlex,
) -> Result<Vec<Labels>, CheckpointError> {
    let prefix = label_prefix(mesh);
    let names: Vec<String> = r.names_with_prefix(&prefix).map(str::to_owned).collect();
    let mut global: Vec<(String, i64, Vec<usize>)> = Vec::new();
    for full in names {
        let rest = &full[prefix.len()..];
        let (name, value) = rest.rsplit_once('/').ok_or_else(|| CheckpointError::VersionMismatch {
            reason: format!("malformed label dataset {full}"),
        })?;
        let value: i64 = value.parse().map_err(|_| CheckpointError::VersionMismatch {
            reason: format!("malformed label value in {full}"),
        })?;
        global.push((name.to_owned(), value, r.read_usize(&full)?));
    }
    Ok(comm.phase(|rank| {
        let index = dist.numbering.index(rank);
        let mut labels = Labels::new();
        for (name, value, points) in &global {
            let mut local: Vec<usize> = points.iter().filter_map(|g| index.get(g).copied()).collect();
            local.sort_unstable();
            labels.entry(name.clone()).or_default().insert(*value, local);
        }
        labels
    }))
}
