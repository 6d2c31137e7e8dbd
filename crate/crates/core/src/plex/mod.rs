//! Mesh topology as a directed acyclic graph of points.
//!
//! Every mesh entity (cell, face, edge, vertex) is a point. The cone of a
//! point is the ordered list of entities one dimension lower on its
//! boundary; that order is preserved by every relabelling in this crate.

mod builder;
mod parallel;

pub use builder::from_cell_vertices;
pub use parallel::{create_point_numbering, glue, point_sf_from_owners, DistPlex, GlobalNumbering, NumberingError};

use std::collections::HashSet;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlexError {
    #[error("point {point} breaks the depth rule")]
    BadDepth { point: usize },
    #[error("the cone relation has a cycle through point {point}")]
    CycleDetected { point: usize },
    #[error("the cone of point {point} references {target}, outside 0..{npoints}")]
    ConeOutOfRange {
        point: usize,
        target: usize,
        npoints: usize,
    },
    #[error("point {point} is outside 0..{npoints}")]
    PointOutOfRange { point: usize, npoints: usize },
    #[error("expected {expected} entries, found {found}")]
    SizeMismatch { expected: usize, found: usize },
}

/// One rank's view of a fully interpolated mesh.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Plex {
    cones: Vec<Vec<usize>>,
    depth: Vec<usize>,
    supports: Vec<Vec<usize>>,
    dim: usize,
}

impl Plex {
    /// Builds a plex from cones and depths, checking the depth rule.
    pub fn new(cones: Vec<Vec<usize>>, depth: Vec<usize>) -> Result<Self, PlexError> {
        if cones.len() != depth.len() {
            return Err(PlexError::SizeMismatch {
                expected: cones.len(),
                found: depth.len(),
            });
        }
        let npoints = cones.len();
        for (point, cone) in cones.iter().enumerate() {
            if depth[point] == 0 && !cone.is_empty() {
                return Err(PlexError::BadDepth { point });
            }
            for &target in cone {
                if target >= npoints {
                    return Err(PlexError::ConeOutOfRange { point, target, npoints });
                }
                if depth[target] + 1 != depth[point] {
                    return Err(PlexError::BadDepth { point });
                }
            }
        }
        let mut supports = vec![Vec::new(); npoints];
        for (point, cone) in cones.iter().enumerate() {
            for &q in cone {
                supports[q].push(point);
            }
        }
        for s in &mut supports {
            s.sort_unstable();
            s.dedup();
        }
        let dim = depth.iter().copied().max().unwrap_or(0);
        Ok(Self {
            cones,
            depth,
            supports,
            dim,
        })
    }

    /// Builds a plex from cones alone, inferring depths.
    pub fn from_cones(cones: Vec<Vec<usize>>) -> Result<Self, PlexError> {
        let npoints = cones.len();
        for (point, cone) in cones.iter().enumerate() {
            if let Some(&target) = cone.iter().find(|&&q| q >= npoints) {
                return Err(PlexError::ConeOutOfRange { point, target, npoints });
            }
        }
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; npoints];
        let mut depth = vec![0usize; npoints];
        for start in 0..npoints {
            if state[start] != 0 {
                continue;
            }
            let mut stack = vec![(start, 0usize)];
            state[start] = 1;
            while let Some(&mut (p, ref mut next)) = stack.last_mut() {
                if *next < cones[p].len() {
                    let q = cones[p][*next];
                    *next += 1;
                    match state[q] {
                        0 => {
                            state[q] = 1;
                            stack.push((q, 0));
                        }
                        1 => return Err(PlexError::CycleDetected { point: q }),
                        _ => {}
                    }
                } else {
                    depth[p] = cones[p].first().map_or(0, |&q| depth[q] + 1);
                    state[p] = 2;
                    stack.pop();
                }
            }
        }
        Self::new(cones, depth)
    }

    /// Re-checks every invariant.
    pub fn validate(&self) -> Result<(), PlexError> {
        Self::new(self.cones.clone(), self.depth.clone()).map(|_| ())
    }

    pub fn npoints(&self) -> usize {
        self.cones.len()
    }

    /// Topological dimension: the depth of the cells.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self, point: usize) -> usize {
        self.depth[point]
    }

    pub fn depths(&self) -> &[usize] {
        &self.depth
    }

    pub fn cone(&self, point: usize) -> &[usize] {
        &self.cones[point]
    }

    pub fn cones(&self) -> &[Vec<usize>] {
        &self.cones
    }

    pub fn support(&self, point: usize) -> Result<&[usize], PlexError> {
        self.check(point)?;
        Ok(&self.supports[point])
    }

    /// Cells in ascending local order.
    pub fn cells(&self) -> Vec<usize> {
        self.stratum(self.dim)
    }

    pub fn stratum(&self, depth: usize) -> Vec<usize> {
        (0..self.npoints()).filter(|&p| self.depth[p] == depth).collect()
    }

    /// Transitive cone closure, breadth first, first occurrence kept.
    pub fn closure(&self, point: usize) -> Result<Vec<usize>, PlexError> {
        self.check(point)?;
        let mut out = vec![point];
        let mut seen = HashSet::from([point]);
        let mut start = 0;
        while start < out.len() {
            let end = out.len();
            for i in start..end {
                for &q in &self.cones[out[i]] {
                    if seen.insert(q) {
                        out.push(q);
                    }
                }
            }
            start = end;
        }
        Ok(out)
    }

    /// Vertices in the closure of `point`, in closure order.
    pub fn closure_vertices(&self, point: usize) -> Result<Vec<usize>, PlexError> {
        Ok(self
            .closure(point)?
            .into_iter()
            .filter(|&q| self.depth[q] == 0)
            .collect())
    }

    /// Position of a depth in the stratified traversal: cells, vertices,
    /// then remaining strata by decreasing depth.
    pub fn stratum_rank(dim: usize, depth: usize) -> usize {
        if depth == dim {
            0
        } else if depth == 0 {
            1
        } else {
            1 + dim - depth
        }
    }

    fn check(&self, point: usize) -> Result<(), PlexError> {
        if point < self.npoints() {
            Ok(())
        } else {
            Err(PlexError::PointOutOfRange {
                point,
                npoints: self.npoints(),
            })
        }
    }
}
