use std::collections::HashMap;

use thiserror::Error;

use super::{Plex, PlexError};
use crate::comm::SimComm;
use crate::starforest::{RemotePoint, StarForest};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumberingError {
    #[error("ghost point {point} on rank {rank} points at a ghost")]
    InconsistentSF { rank: usize, point: usize },
    #[error("rank {rank}: expected {expected} points, found {found}")]
    SizeMismatch { rank: usize, expected: usize, found: usize },
    #[error("global point {global} is not present on any rank")]
    MissingPoint { global: usize },
    #[error("ranks disagree on the cone of global point {global}")]
    ConflictingCone { global: usize },
    #[error(transparent)]
    Plex(#[from] PlexError),
}

/// Per-rank map from local point numbers to global numbers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalNumbering {
    pub loc_g: Vec<Vec<usize>>,
    pub num_global: usize,
}

impl GlobalNumbering {
    /// Inverse map `global -> local` for one rank.
    pub fn index(&self, rank: usize) -> HashMap<usize, usize> {
        self.loc_g[rank].iter().enumerate().map(|(l, &g)| (g, l)).collect()
    }
}

/// A mesh distributed over ranks: local plexes, the point SF linking ghosts
/// to owners, and the global numbering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistPlex {
    pub plexes: Vec<Plex>,
    pub point_sf: StarForest,
    pub numbering: GlobalNumbering,
}

impl DistPlex {
    pub fn new(plexes: Vec<Plex>, point_sf: StarForest, numbering: GlobalNumbering) -> Result<Self, NumberingError> {
        for (rank, plex) in plexes.iter().enumerate() {
            for found in [
                point_sf.nroots(rank),
                point_sf.leaf_space(rank),
                numbering.loc_g[rank].len(),
            ] {
                if found != plex.npoints() {
                    return Err(NumberingError::SizeMismatch {
                        rank,
                        expected: plex.npoints(),
                        found,
                    });
                }
            }
        }
        Ok(Self {
            plexes,
            point_sf,
            numbering,
        })
    }

    /// A single-rank distribution with identity numbering.
    pub fn serial(plex: Plex) -> Self {
        let n = plex.npoints();
        Self {
            plexes: vec![plex],
            point_sf: StarForest::new(vec![n], vec![n], vec![Vec::new()]).expect("empty SF"),
            numbering: GlobalNumbering {
                loc_g: vec![(0..n).collect()],
                num_global: n,
            },
        }
    }

    pub fn nranks(&self) -> usize {
        self.plexes.len()
    }

    pub fn is_owned(&self, rank: usize, point: usize) -> bool {
        self.point_sf.target(rank, point).is_none()
    }

    /// Owned points of `rank` in local order.
    pub fn owned_points(&self, rank: usize) -> Vec<usize> {
        let ghosts = self.point_sf.leaf_table(rank);
        (0..self.plexes[rank].npoints())
            .filter(|&p| ghosts[p].is_none())
            .collect()
    }

    /// Owner rank of every global point.
    pub fn owners(&self) -> Vec<usize> {
        let mut owners = vec![usize::MAX; self.numbering.num_global];
        for rank in 0..self.nranks() {
            for p in self.owned_points(rank) {
                owners[self.numbering.loc_g[rank][p]] = rank;
            }
        }
        owners
    }

    /// Cone of a local point translated to global numbers.
    pub fn global_cone(&self, rank: usize, point: usize) -> Vec<usize> {
        let loc_g = &self.numbering.loc_g[rank];
        self.plexes[rank].cone(point).iter().map(|&q| loc_g[q]).collect()
    }
}

/// Numbers owned points rank by rank in local order; ghosts take their
/// owner's number.
pub fn create_point_numbering(
    comm: &SimComm,
    plexes: &[Plex],
    psf: &StarForest,
) -> Result<GlobalNumbering, NumberingError> {
    let owned: Vec<Vec<bool>> = comm.phase(|r| {
        let ghosts = psf.leaf_table(r);
        ghosts.iter().map(Option::is_none).collect()
    });
    let counts: Vec<usize> = owned.iter().map(|o| o.iter().filter(|&&b| b).count()).collect();
    let starts: Vec<usize> = counts
        .iter()
        .scan(0, |acc, &c| {
            let s = *acc;
            *acc += c;
            Some(s)
        })
        .collect();
    let num_global = counts.iter().sum();
    let roots: Vec<Vec<Option<usize>>> = comm.phase(|r| {
        let mut next = starts[r];
        owned[r]
            .iter()
            .map(|&o| {
                o.then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    });
    let from_owner = psf.broadcast(&roots).map_err(|_| NumberingError::SizeMismatch {
        rank: 0,
        expected: plexes.len(),
        found: psf.nranks(),
    })?;
    let loc_g = comm.try_phase(|r| {
        (0..plexes[r].npoints())
            .map(|p| match (roots[r][p], &from_owner[r][p]) {
                (Some(g), _) => Ok(g),
                (None, Some(Some(g))) => Ok(*g),
                _ => Err(NumberingError::InconsistentSF { rank: r, point: p }),
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(GlobalNumbering { loc_g, num_global })
}

/// Reassembles the global cone table from a distribution, checking that all
/// ranks agree on every cone they can see.
pub fn glue(comm: &SimComm, dist: &DistPlex) -> Result<Plex, NumberingError> {
    let n = dist.numbering.num_global;
    let per_rank: Vec<Vec<(usize, usize, Vec<usize>)>> = comm.phase(|r| {
        (0..dist.plexes[r].npoints())
            .map(|p| {
                (
                    dist.numbering.loc_g[r][p],
                    dist.plexes[r].depth(p),
                    dist.global_cone(r, p),
                )
            })
            .collect()
    });
    let mut table: Vec<Option<(usize, Vec<usize>)>> = vec![None; n];
    for (g, depth, cone) in per_rank.into_iter().flatten() {
        match &table[g] {
            None => table[g] = Some((depth, cone)),
            Some(existing) if *existing == (depth, cone.clone()) => {}
            Some(_) => return Err(NumberingError::ConflictingCone { global: g }),
        }
    }
    let mut cones = Vec::with_capacity(n);
    let mut depths = Vec::with_capacity(n);
    for (global, entry) in table.into_iter().enumerate() {
        let (d, c) = entry.ok_or(NumberingError::MissingPoint { global })?;
        depths.push(d);
        cones.push(c);
    }
    Ok(Plex::new(cones, depths)?)
}

/// Builds the point SF from a global owner table: every point whose owner is
/// another rank becomes a leaf pointing at the owner's copy.
pub fn point_sf_from_owners(loc_g: &[Vec<usize>], owners: &[usize]) -> StarForest {
    let index: Vec<HashMap<usize, usize>> = loc_g
        .iter()
        .map(|l| l.iter().enumerate().map(|(i, &g)| (g, i)).collect())
        .collect();
    let leaves = loc_g
        .iter()
        .enumerate()
        .map(|(r, l)| {
            l.iter()
                .enumerate()
                .filter(|&(_, g)| owners[*g] != r)
                .map(|(p, g)| (p, RemotePoint::new(owners[*g], index[owners[*g]][g])))
                .collect()
        })
        .collect();
    let sizes: Vec<usize> = loc_g.iter().map(Vec::len).collect();
    StarForest::new(sizes.clone(), sizes, leaves).expect("owner copies exist")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plex::from_cell_vertices;

    #[test]
    fn serial_numbering_is_identity() {
        let p = from_cell_vertices(&[vec![0, 1, 2]], 3).unwrap();
        let sf = StarForest::new(vec![7], vec![7], vec![vec![]]).unwrap();
        let gn = create_point_numbering(&SimComm::sequential(1), &[p], &sf).unwrap();
        assert_eq!(gn.loc_g, vec![(0..7).collect::<Vec<_>>()]);
    }

    #[test]
    fn ghost_of_ghost_is_rejected() {
        let p = Plex::new(vec![vec![]], vec![0]).unwrap();
        let sf = StarForest::new(
            vec![1, 1],
            vec![1, 1],
            vec![vec![(0, RemotePoint::new(1, 0))], vec![(0, RemotePoint::new(0, 0))]],
        )
        .unwrap();
        let err = create_point_numbering(&SimComm::sequential(2), &[p.clone(), p], &sf).unwrap_err();
        assert!(matches!(err, NumberingError::InconsistentSF { .. }));
    }
}
