//! DoF layouts: per-point DoF counts and offsets, locally (ghosts included)
//! and globally (owned points only, concatenated over ranks).

use std::ops::Range;

use thiserror::Error;

use crate::comm::SimComm;
use crate::distribute::{balanced_chunks, chunk_slot, chunk_starts, DistributeError};
use crate::plex::{DistPlex, Plex};
use crate::starforest::{SfError, StarForest};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SectionError {
    #[error("no DoF count given for depth {depth}")]
    MissingStratum { depth: usize },
    #[error("rank {rank}, point {point}: {reason}")]
    InconsistentOwnership {
        rank: usize,
        point: usize,
        reason: &'static str,
    },
    #[error("traversal order is not a permutation of 0..{npoints}")]
    BadTraversal { npoints: usize },
    #[error("rank {rank}: expected {expected} entries, found {found}")]
    SizeMismatch { rank: usize, expected: usize, found: usize },
    #[error(transparent)]
    Sf(#[from] SfError),
    #[error(transparent)]
    Distribute(#[from] DistributeError),
}

/// DoF counts and offsets over one rank's points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSection {
    pub dof: Vec<usize>,
    pub off: Vec<usize>,
    pub total: usize,
}

impl LocalSection {
    /// Offsets laid out in local point order.
    pub fn from_dofs(dof: Vec<usize>) -> Self {
        let order: Vec<usize> = (0..dof.len()).collect();
        Self::with_traversal(dof, &order).expect("identity order")
    }

    /// Offsets laid out by visiting points in `order`.
    pub fn with_traversal(dof: Vec<usize>, order: &[usize]) -> Result<Self, SectionError> {
        let n = dof.len();
        let mut off = vec![usize::MAX; n];
        let mut total = 0;
        if order.len() != n {
            return Err(SectionError::BadTraversal { npoints: n });
        }
        for &p in order {
            if p >= n || off[p] != usize::MAX {
                return Err(SectionError::BadTraversal { npoints: n });
            }
            off[p] = total;
            total += dof[p];
        }
        Ok(Self { dof, off, total })
    }

    pub fn npoints(&self) -> usize {
        self.dof.len()
    }

    pub fn range(&self, point: usize) -> Range<usize> {
        self.off[point]..self.off[point] + self.dof[point]
    }

    /// Points in increasing offset order.
    pub fn traversal(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.npoints()).collect();
        order.sort_by_key(|&p| (self.off[p], self.dof[p] != 0));
        order
    }
}

/// Uniform DoF count per stratum, offsets in local point order.
pub fn build_local_section(plex: &Plex, dofs_per_depth: &[usize]) -> Result<LocalSection, SectionError> {
    let dof = (0..plex.npoints())
        .map(|p| {
            let depth = plex.depth(p);
            dofs_per_depth
                .get(depth)
                .copied()
                .ok_or(SectionError::MissingStratum { depth })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(LocalSection::from_dofs(dof))
}

/// The saved layout: one entry per global point, ordered by owning rank and
/// then local order. `off` indexes the global DoF vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalSection {
    pub g: Vec<usize>,
    pub dof: Vec<usize>,
    pub off: Vec<usize>,
    /// Owned point count per rank.
    pub owned_points: Vec<usize>,
    /// Owned DoF count per rank.
    pub owned_dofs: Vec<usize>,
}

impl GlobalSection {
    pub fn num_points(&self) -> usize {
        self.g.len()
    }

    pub fn total_dofs(&self) -> usize {
        self.dof.iter().sum()
    }

    /// Checks that `g` is a permutation and the DoF chunks tile `0..D`.
    pub fn is_consistent(&self) -> bool {
        let e = self.g.len();
        if self.dof.len() != e || self.off.len() != e {
            return false;
        }
        let mut seen = vec![false; e];
        for &g in &self.g {
            if g >= e || std::mem::replace(&mut seen[g], true) {
                return false;
            }
        }
        let mut chunks: Vec<(usize, usize)> = self.off.iter().copied().zip(self.dof.iter().copied()).collect();
        chunks.sort_unstable();
        let mut next = 0;
        for (off, dof) in chunks {
            if dof == 0 {
                continue;
            }
            if off != next {
                return false;
            }
            next += dof;
        }
        next == self.total_dofs()
    }
}

/// Owned points of `rank` in offset order: the order in which their DoFs
/// appear in the rank's slice of the global vector.
pub fn owned_by_offset(section: &LocalSection, dist: &DistPlex, rank: usize) -> Vec<usize> {
    let mut owned = dist.owned_points(rank);
    owned.sort_by_key(|&p| section.off[p]);
    owned
}

/// Drops ghost entries and shifts each rank's offsets past the owned DoFs of
/// lower ranks.
pub fn local_to_global_section(
    comm: &SimComm,
    sections: &[LocalSection],
    dist: &DistPlex,
) -> Result<GlobalSection, SectionError> {
    for (rank, s) in sections.iter().enumerate() {
        let expected = dist.plexes[rank].npoints();
        if s.npoints() != expected {
            return Err(SectionError::SizeMismatch {
                rank,
                expected,
                found: s.npoints(),
            });
        }
    }
    let roots: Vec<Vec<usize>> = sections.iter().map(|s| s.dof.clone()).collect();
    let owner_dofs = dist.point_sf.broadcast(&roots)?;
    comm.try_phase(|r| {
        for (p, d) in owner_dofs[r].iter().enumerate() {
            if let Some(d) = d {
                if *d != sections[r].dof[p] {
                    return Err(SectionError::InconsistentOwnership {
                        rank: r,
                        point: p,
                        reason: "ghost DoF count differs from its owner",
                    });
                }
            }
        }
        Ok(())
    })?;
    let owned_dofs: Vec<usize> = comm.phase(|r| dist.owned_points(r).iter().map(|&p| sections[r].dof[p]).sum());
    let shifts = chunk_starts(&owned_dofs);
    let per_rank: Vec<Vec<(usize, usize, usize)>> = comm.phase(|r| {
        let s = &sections[r];
        let mut new_off = vec![0; s.npoints()];
        let mut next = shifts[r];
        for p in owned_by_offset(s, dist, r) {
            new_off[p] = next;
            next += s.dof[p];
        }
        dist.owned_points(r)
            .into_iter()
            .map(|p| (dist.numbering.loc_g[r][p], s.dof[p], new_off[p]))
            .collect()
    });
    let owned_points = per_rank.iter().map(Vec::len).collect();
    let mut gs = GlobalSection {
        g: Vec::new(),
        dof: Vec::new(),
        off: Vec::new(),
        owned_points,
        owned_dofs,
    };
    for (g, d, o) in per_rank.into_iter().flatten() {
        gs.g.push(g);
        gs.dof.push(d);
        gs.off.push(o);
    }
    Ok(gs)
}

/// One rank's balanced slice of the saved section arrays.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionChunk {
    pub g: Vec<usize>,
    pub dof: Vec<usize>,
    pub off: Vec<usize>,
}

/// Splits the saved arrays into balanced chunks and builds the bijection
/// from each loaded position to the slot of its global number.
pub fn global_section_partition(
    gs: &GlobalSection,
    nranks: usize,
) -> Result<(Vec<SectionChunk>, StarForest), SectionError> {
    let sizes = balanced_chunks(gs.num_points(), nranks)?;
    let starts = chunk_starts(&sizes);
    let chunks: Vec<SectionChunk> = (0..nranks)
        .map(|r| {
            let range = starts[r]..starts[r] + sizes[r];
            SectionChunk {
                g: gs.g[range.clone()].to_vec(),
                dof: gs.dof[range.clone()].to_vec(),
                off: gs.off[range].to_vec(),
            }
        })
        .collect();
    let sf = chunk_map(&chunks.iter().map(|c| c.g.clone()).collect::<Vec<_>>(), gs.num_points())?;
    Ok((chunks, sf))
}

/// Map from loaded positions holding global numbers `loaded[r][i]` to the
/// balanced-chunk slot of each number.
pub fn chunk_map(loaded: &[Vec<usize>], total: usize) -> Result<StarForest, SectionError> {
    let nranks = loaded.len();
    let slots = chunk_starts(&balanced_chunks(total, nranks)?);
    let leaves = loaded
        .iter()
        .map(|g| g.iter().enumerate().map(|(i, &g)| (i, chunk_slot(g, &slots))).collect())
        .collect();
    Ok(StarForest::new(
        balanced_chunks(total, nranks)?,
        loaded.iter().map(Vec::len).collect(),
        leaves,
    )?)
}

/// Owned values of each rank, in global-vector order.
pub fn local_to_global_vector<T: Clone>(
    sections: &[LocalSection],
    dist: &DistPlex,
    local: &[Vec<T>],
) -> Result<Vec<Vec<T>>, SectionError> {
    (0..dist.nranks())
        .map(|r| {
            if local[r].len() != sections[r].total {
                return Err(SectionError::SizeMismatch {
                    rank: r,
                    expected: sections[r].total,
                    found: local[r].len(),
                });
            }
            Ok(owned_by_offset(&sections[r], dist, r)
                .into_iter()
                .flat_map(|p| local[r][sections[r].range(p)].iter().cloned())
                .collect())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plex::from_cell_vertices;

    #[test]
    fn traversal_offsets() {
        let s = LocalSection::with_traversal(vec![3, 1, 0, 2], &[2, 3, 0, 1]).unwrap();
        assert_eq!(s.off, vec![2, 5, 0, 0]);
        assert_eq!(s.total, 6);
        assert!(LocalSection::with_traversal(vec![1, 1], &[0, 0]).is_err());
    }

    #[test]
    fn dp0_counts_cells() {
        let p = from_cell_vertices(&[vec![0, 1, 2], vec![1, 2, 3]], 4).unwrap();
        let s = build_local_section(&p, &[0, 0, 1]).unwrap();
        assert_eq!(s.total, 2);
        assert_eq!(
            build_local_section(&p, &[1, 0]),
            Err(SectionError::MissingStratum { depth: 2 })
        );
    }

    #[test]
    fn serial_global_section_is_identity() {
        let p = from_cell_vertices(&[vec![0, 1, 2]], 3).unwrap();
        let s = build_local_section(&p, &[1, 2, 0]).unwrap();
        let dist = DistPlex::serial(p);
        let gs = local_to_global_section(&SimComm::sequential(1), std::slice::from_ref(&s), &dist).unwrap();
        assert_eq!(gs.g, (0..7).collect::<Vec<_>>());
        assert_eq!(gs.off, s.off);
        assert!(gs.is_consistent());
    }

    #[test]
    fn one_rank_partition_is_identity() {
        let gs = GlobalSection {
            g: vec![0, 1, 2],
            dof: vec![1, 1, 1],
            off: vec![0, 1, 2],
            owned_points: vec![3],
            owned_dofs: vec![3],
        };
        let (chunks, sf) = global_section_partition(&gs, 1).unwrap();
        assert_eq!(chunks[0].g, gs.g);
        assert!(sf.is_identity());
    }
}
