//! Star forests: parallel maps from per-rank leaves to (rank, root) pairs.
//!
//! Every map used when reloading a checkpoint (point partitions, migration
//! maps, DoF maps) is a [`StarForest`]. Leaves live in a per-rank leaf space
//! `0..leaf_space(r)`; only the indices that actually carry an edge are
//! stored. Roots live in a per-rank root space `0..nroots(r)`.

use thiserror::Error;

/// A `(rank, index)` address in a root space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RemotePoint {
    pub rank: usize,
    pub index: usize,
}

impl RemotePoint {
    pub fn new(rank: usize, index: usize) -> Self {
        Self { rank, index }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SfError {
    #[error("leaf {leaf} on rank {rank} points to rank {target}, but there are only {nranks} ranks")]
    RankOutOfRange {
        rank: usize,
        leaf: usize,
        target: usize,
        nranks: usize,
    },
    #[error("leaf {leaf} on rank {rank} points to root {root} on rank {target}, which has {nroots} roots")]
    RootOutOfRange {
        rank: usize,
        leaf: usize,
        target: usize,
        root: usize,
        nroots: usize,
    },
    #[error("leaf {leaf} appears more than once on rank {rank}")]
    DuplicateLeaf { rank: usize, leaf: usize },
    #[error("leaf {leaf} on rank {rank} lies outside the leaf space of size {size}")]
    LeafOutOfRange { rank: usize, leaf: usize, size: usize },
    #[error("rank {rank}: expected {expected} items, found {found}")]
    SizeMismatch { rank: usize, expected: usize, found: usize },
    #[error("cannot compose: rank {rank} has {roots} roots but the next map has a leaf space of {leaf_space}")]
    IncompatibleShape {
        rank: usize,
        roots: usize,
        leaf_space: usize,
    },
    #[error("root {root} on rank {rank} has {count} leaves; a bijective star forest needs exactly one")]
    NotBijective { rank: usize, root: usize, count: usize },
}

/// A map from per-rank leaves to remote roots.
///
/// Leaves are kept sorted by leaf index on each rank, so two forests that
/// describe the same map compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StarForest {
    nroots: Vec<usize>,
    leaf_space: Vec<usize>,
    leaves: Vec<Vec<(usize, RemotePoint)>>,
}

/// Result of [`StarForest::compose`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Composition {
    pub sf: StarForest,
    /// Leaves of the first map whose image is not a leaf of the second.
    pub dropped: usize,
}

impl StarForest {
    /// Builds and validates a star forest. Leaves may be given in any order.
    pub fn new(
        nroots: Vec<usize>,
        leaf_space: Vec<usize>,
        mut leaves: Vec<Vec<(usize, RemotePoint)>>,
    ) -> Result<Self, SfError> {
        let nranks = nroots.len();
        if leaf_space.len() != nranks {
            return Err(SfError::SizeMismatch {
                rank: 0,
                expected: nranks,
                found: leaf_space.len(),
            });
        }
        if leaves.len() != nranks {
            return Err(SfError::SizeMismatch {
                rank: 0,
                expected: nranks,
                found: leaves.len(),
            });
        }
        for per_rank in &mut leaves {
            per_rank.sort_unstable_by_key(|&(leaf, _)| leaf);
        }
        let sf = Self {
            nroots,
            leaf_space,
            leaves,
        };
        sf.validate()?;
        Ok(sf)
    }

    /// Builds a forest from a dense per-rank table: `targets[r][i]` is the
    /// root of leaf `i` on rank `r`, or `None` when `i` is not a leaf.
    pub fn from_dense(nroots: Vec<usize>, targets: &[Vec<Option<RemotePoint>>]) -> Result<Self, SfError> {
        let leaf_space = targets.iter().map(Vec::len).collect();
        let leaves = targets
            .iter()
            .map(|t| t.iter().enumerate().filter_map(|(i, r)| r.map(|r| (i, r))).collect())
            .collect();
        Self::new(nroots, leaf_space, leaves)
    }

    /// The identity map on root spaces of the given sizes.
    pub fn identity(sizes: &[usize]) -> Self {
        let leaves = sizes
            .iter()
            .enumerate()
            .map(|(r, &n)| (0..n).map(|i| (i, RemotePoint::new(r, i))).collect())
            .collect();
        Self {
            nroots: sizes.to_vec(),
            leaf_space: sizes.to_vec(),
            leaves,
        }
    }

    /// Checks all structural invariants.
    pub fn validate(&self) -> Result<(), SfError> {
        let nranks = self.nroots.len();
        for (rank, per_rank) in self.leaves.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(leaf, remote) in per_rank {
                if prev == Some(leaf) {
                    return Err(SfError::DuplicateLeaf { rank, leaf });
                }
                prev = Some(leaf);
                if leaf >= self.leaf_space[rank] {
                    return Err(SfError::LeafOutOfRange {
                        rank,
                        leaf,
                        size: self.leaf_space[rank],
                    });
                }
                if remote.rank >= nranks {
                    return Err(SfError::RankOutOfRange {
                        rank,
                        leaf,
                        target: remote.rank,
                        nranks,
                    });
                }
                if remote.index >= self.nroots[remote.rank] {
                    return Err(SfError::RootOutOfRange {
                        rank,
                        leaf,
                        target: remote.rank,
                        root: remote.index,
                        nroots: self.nroots[remote.rank],
                    });
                }
            }
        }
        Ok(())
    }

    pub fn nranks(&self) -> usize {
        self.nroots.len()
    }

    pub fn nroots(&self, rank: usize) -> usize {
        self.nroots[rank]
    }

    pub fn root_sizes(&self) -> &[usize] {
        &self.nroots
    }

    pub fn leaf_space(&self, rank: usize) -> usize {
        self.leaf_space[rank]
    }

    pub fn leaf_sizes(&self) -> &[usize] {
        &self.leaf_space
    }

    /// Leaf edges of `rank`, sorted by leaf index.
    pub fn leaves(&self, rank: usize) -> &[(usize, RemotePoint)] {
        &self.leaves[rank]
    }

    pub fn num_leaves(&self) -> usize {
        self.leaves.iter().map(Vec::len).sum()
    }

    /// Dense view of the leaves of `rank`.
    pub fn leaf_table(&self, rank: usize) -> Vec<Option<RemotePoint>> {
        let mut table = vec![None; self.leaf_space[rank]];
        for &(leaf, remote) in &self.leaves[rank] {
            table[leaf] = Some(remote);
        }
        table
    }

    /// Root of `leaf` on `rank`, if it is a leaf.
    pub fn target(&self, rank: usize, leaf: usize) -> Option<RemotePoint> {
        let per_rank = &self.leaves[rank];
        per_rank
            .binary_search_by_key(&leaf, |&(l, _)| l)
            .ok()
            .map(|pos| per_rank[pos].1)
    }

    pub fn is_identity(&self) -> bool {
        self.nroots == self.leaf_space
            && self.leaves.iter().enumerate().all(|(r, per_rank)| {
                per_rank.len() == self.nroots[r]
                    && per_rank
                        .iter()
                        .enumerate()
                        .all(|(i, &(leaf, remote))| leaf == i && remote == RemotePoint::new(r, i))
            })
    }

    /// Copies root values to leaves: `out[r][i] = root_data[r'][j]` for every
    /// edge `(r, i) -> (r', j)`. Positions that are not leaves stay `None`.
    pub fn broadcast<T: Clone>(&self, root_data: &[Vec<T>]) -> Result<Vec<Vec<Option<T>>>, SfError> {
        self.broadcast_blocks(root_data, 1)
    }

    /// Like [`broadcast`](Self::broadcast), with every root and leaf carrying a
    /// block of `width` consecutive items.
    pub fn broadcast_blocks<T: Clone>(
        &self,
        root_data: &[Vec<T>],
        width: usize,
    ) -> Result<Vec<Vec<Option<T>>>, SfError> {
        self.check_root_data(root_data, width)?;
        Ok(self
            .leaves
            .iter()
            .enumerate()
            .map(|(rank, per_rank)| {
                let mut out = vec![None; self.leaf_space[rank] * width];
                for &(leaf, remote) in per_rank {
                    let src = &root_data[remote.rank][remote.index * width..(remote.index + 1) * width];
                    for (slot, v) in out[leaf * width..(leaf + 1) * width].iter_mut().zip(src) {
                        *slot = Some(v.clone());
                    }
                }
                out
            })
            .collect())
    }

    /// Broadcast into existing leaf buffers, leaving non-leaf positions untouched.
    pub fn broadcast_into<T: Clone>(&self, root_data: &[Vec<T>], leaf_data: &mut [Vec<T>]) -> Result<(), SfError> {
        self.check_root_data(root_data, 1)?;
        for (rank, per_rank) in self.leaves.iter().enumerate() {
            let out = &mut leaf_data[rank];
            if out.len() != self.leaf_space[rank] {
                return Err(SfError::SizeMismatch {
                    rank,
                    expected: self.leaf_space[rank],
                    found: out.len(),
                });
            }
            for &(leaf, remote) in per_rank {
                out[leaf] = root_data[remote.rank][remote.index].clone();
            }
        }
        Ok(())
    }

    fn check_root_data<T>(&self, root_data: &[Vec<T>], width: usize) -> Result<(), SfError> {
        if root_data.len() != self.nranks() {
            return Err(SfError::SizeMismatch {
                rank: 0,
                expected: self.nranks(),
                found: root_data.len(),
            });
        }
        for (rank, data) in root_data.iter().enumerate() {
            if data.len() != self.nroots[rank] * width {
                return Err(SfError::SizeMismatch {
                    rank,
                    expected: self.nroots[rank] * width,
                    found: data.len(),
                });
            }
        }
        Ok(())
    }

    /// Composes `self: A -> B` with `next: B -> C` into `A -> C`.
    ///
    /// Leaves of `self` whose root is not a leaf of `next` are dropped and
    /// counted in [`Composition::dropped`].
    pub fn compose(&self, next: &StarForest) -> Result<Composition, SfError> {
        if self.nranks() != next.nranks() {
            return Err(SfError::SizeMismatch {
                rank: 0,
                expected: self.nranks(),
                found: next.nranks(),
            });
        }
        for rank in 0..self.nranks() {
            if self.nroots[rank] != next.leaf_space[rank] {
                return Err(SfError::IncompatibleShape {
                    rank,
                    roots: self.nroots[rank],
                    leaf_space: next.leaf_space[rank],
                });
            }
        }
        let tables: Vec<Vec<Option<RemotePoint>>> = (0..next.nranks()).map(|r| next.leaf_table(r)).collect();
        let mut dropped = 0;
        let leaves = self
            .leaves
            .iter()
            .map(|per_rank| {
                per_rank
                    .iter()
                    .filter_map(|&(leaf, mid)| match tables[mid.rank][mid.index] {
                        Some(end) => Some((leaf, end)),
                        None => {
                            dropped += 1;
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Composition {
            sf: StarForest {
                nroots: next.nroots.clone(),
                leaf_space: self.leaf_space.clone(),
                leaves,
            },
            dropped,
        })
    }

    /// Inverts a bijective forest: every root must have exactly one leaf.
    /// The result maps each old root to its unique leaf.
    pub fn invert_bijective(&self) -> Result<StarForest, SfError> {
        let mut inverse: Vec<Vec<Option<RemotePoint>>> = self.nroots.iter().map(|&n| vec![None; n]).collect();
        let mut counts: Vec<Vec<usize>> = self.nroots.iter().map(|&n| vec![0; n]).collect();
        for (rank, per_rank) in self.leaves.iter().enumerate() {
            for &(leaf, remote) in per_rank {
                counts[remote.rank][remote.index] += 1;
                inverse[remote.rank][remote.index] = Some(RemotePoint::new(rank, leaf));
            }
        }
        for (rank, per_rank) in counts.iter().enumerate() {
            if let Some((root, &count)) = per_rank.iter().enumerate().find(|(_, &c)| c != 1) {
                return Err(SfError::NotBijective { rank, root, count });
            }
        }
        StarForest::from_dense(self.leaf_space.clone(), &inverse)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(rank: usize, index: usize) -> RemotePoint {
        RemotePoint::new(rank, index)
    }

    #[test]
    fn identity_validates() {
        let sf = StarForest::new(vec![5], vec![5], vec![(0..5).map(|i| (i, rp(0, i))).collect()]).unwrap();
        assert!(sf.is_identity());
        assert_eq!(sf, StarForest::identity(&[5]));
    }

    #[test]
    fn rank_out_of_range() {
        let err = StarForest::new(vec![2, 2], vec![1, 0], vec![vec![(0, rp(3, 0))], vec![]]).unwrap_err();
        assert!(matches!(
            err,
            SfError::RankOutOfRange {
                rank: 0,
                leaf: 0,
                target: 3,
                nranks: 2
            }
        ));
    }

    #[test]
    fn root_out_of_range() {
        let err = StarForest::new(vec![2], vec![1], vec![vec![(0, rp(0, 2))]]).unwrap_err();
        assert!(matches!(err, SfError::RootOutOfRange { root: 2, .. }));
    }

    #[test]
    fn duplicate_leaf() {
        let err = StarForest::new(vec![5], vec![5], vec![vec![(4, rp(0, 0)), (4, rp(0, 1))]]).unwrap_err();
        assert_eq!(err, SfError::DuplicateLeaf { rank: 0, leaf: 4 });
    }

    #[test]
    fn identity_broadcast() {
        let sf = StarForest::identity(&[3]);
        let out = sf.broadcast(&[vec![10, 20, 30]]).unwrap();
        assert_eq!(out, vec![vec![Some(10), Some(20), Some(30)]]);
    }

    #[test]
    fn broadcast_reports_unset_and_size_mismatch() {
        let sf = StarForest::new(vec![1, 0], vec![2, 1], vec![vec![(1, rp(0, 0))], vec![(0, rp(0, 0))]]).unwrap();
        let out = sf.broadcast(&[vec![7.5], vec![]]).unwrap();
        assert_eq!(out, vec![vec![None, Some(7.5)], vec![Some(7.5)]]);
        assert!(matches!(
            sf.broadcast(&[vec![1.0, 2.0], vec![]]),
            Err(SfError::SizeMismatch {
                rank: 0,
                expected: 1,
                found: 2
            })
        ));
    }

    #[test]
    fn broadcast_blocks_moves_whole_blocks() {
        let sf = StarForest::new(vec![2], vec![2], vec![vec![(0, rp(0, 1)), (1, rp(0, 0))]]).unwrap();
        let out = sf.broadcast_blocks(&[vec![1, 2, 3, 4]], 2).unwrap();
        assert_eq!(out[0], vec![Some(3), Some(4), Some(1), Some(2)]);
    }

    #[test]
    fn compose_with_identity_both_sides() {
        let f = StarForest::new(
            vec![2, 3],
            vec![3, 1],
            vec![vec![(0, rp(1, 2)), (2, rp(0, 0))], vec![(0, rp(1, 0))]],
        )
        .unwrap();
        let right = f.compose(&StarForest::identity(&[2, 3])).unwrap();
        assert_eq!(right.sf, f);
        assert_eq!(right.dropped, 0);
        let left = StarForest::identity(&[3, 1]).compose(&f).unwrap();
        assert_eq!(left.sf, f);
        assert_eq!(left.dropped, 1);
    }

    #[test]
    fn compose_shape_mismatch() {
        let f = StarForest::identity(&[2]);
        let g = StarForest::identity(&[3]);
        assert!(matches!(
            f.compose(&g),
            Err(SfError::IncompatibleShape {
                rank: 0,
                roots: 2,
                leaf_space: 3
            })
        ));
    }

    #[test]
    fn invert_identity() {
        let id = StarForest::identity(&[2, 0, 4]);
        assert_eq!(id.invert_bijective().unwrap(), id);
    }

    #[test]
    fn invert_rejects_shared_and_missing_roots() {
        let shared = StarForest::new(vec![2], vec![2], vec![vec![(0, rp(0, 0)), (1, rp(0, 0))]]).unwrap();
        assert!(matches!(
            shared.invert_bijective(),
            Err(SfError::NotBijective { root: 0, count: 2, .. })
        ));
        let missing = StarForest::new(vec![2], vec![1], vec![vec![(0, rp(0, 1))]]).unwrap();
        assert!(matches!(
            missing.invert_bijective(),
            Err(SfError::NotBijective { root: 0, count: 0, .. })
        ));
    }
}
