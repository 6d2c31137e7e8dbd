//! Load-side distribution of a saved topology onto M ranks.
//!
//! Loading runs in three stages, each producing a star forest from its
//! points to the previous stage's points:
//!
//! 1. [`naive_topology_split`]: contiguous chunks of cells, mapped to the
//!    slots of the saved arrays.
//! 2. [`repartition`]: cells migrate according to a [`PartitionPlan`].
//! 3. [`add_overlap`]: rings of neighbouring cells are added as ghosts.
//!
//! Composing the three forests gives the map from every loaded point to the
//! saved slot of its global number.
//!
//! On every rank points are ordered cells, vertices, faces, edges. Within a
//! stratum they appear in the order first met by the breadth-first closures
//! of the rank's cells, taken in cell order.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::comm::SimComm;
use crate::plex::{glue, point_sf_from_owners, DistPlex, GlobalNumbering, NumberingError, Plex, PlexError};
use crate::starforest::{RemotePoint, SfError, StarForest};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DistributeError {
    #[error("cannot split over zero ranks")]
    ZeroRanks,
    #[error("the cone of global point {point} references {target}, which does not exist")]
    DanglingCone { point: usize, target: usize },
    #[error("partition plan does not match the current cells: {reason}")]
    PlanMismatch { reason: String },
    #[error("cannot partition {cells} cells over {ranks} ranks")]
    TooFewCells { cells: usize, ranks: usize },
    #[error(transparent)]
    Numbering(#[from] NumberingError),
    #[error(transparent)]
    Plex(#[from] PlexError),
    #[error(transparent)]
    Sf(#[from] SfError),
}

/// Sizes of `nranks` contiguous chunks of `total` items. Sizes differ by at
/// most one and the larger chunks come first.
pub fn balanced_chunks(total: usize, nranks: usize) -> Result<Vec<usize>, DistributeError> {
    if nranks == 0 {
        return Err(DistributeError::ZeroRanks);
    }
    let (q, rem) = (total / nranks, total % nranks);
    Ok((0..nranks).map(|r| q + usize::from(r < rem)).collect())
}

/// Exclusive prefix sums of `sizes`.
pub fn chunk_starts(sizes: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    sizes
        .iter()
        .map(|&s| {
            let start = acc;
            acc += s;
            start
        })
        .collect()
}

/// The chunk slot holding item `i`.
pub fn chunk_slot(i: usize, starts: &[usize]) -> RemotePoint {
    let rank = starts.partition_point(|&s| s <= i) - 1;
    RemotePoint::new(rank, i - starts[rank])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanMethod {
    Chunk,
    GreedyBfs,
    Explicit,
}

/// Cells (by global number) assigned to each rank, in the order they will
/// be laid out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionPlan {
    pub parts: Vec<Vec<usize>>,
    pub method: PlanMethod,
}

/// Which cells count as neighbours when growing overlap.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Adjacency {
    /// Cells sharing a facet.
    #[default]
    Facet,
    /// Cells sharing a vertex.
    Vertex,
}

/// One stage of the load pipeline.
#[derive(Clone, Debug)]
pub struct Stage {
    pub dist: DistPlex,
    /// Cells each rank owns, by global number.
    pub partition: Vec<Vec<usize>>,
    /// Map from this stage's points to the previous stage's points.
    pub sf: StarForest,
}

/// Outcome of the full pipeline.
#[derive(Clone, Debug)]
pub struct Distributed {
    pub dist: DistPlex,
    pub partition: Vec<Vec<usize>>,
    /// Map from loaded points to saved slots.
    pub sf: StarForest,
    pub plan: PartitionPlan,
}

/// Splits the saved cone table into contiguous chunks of cells.
pub fn naive_topology_split(comm: &SimComm, cones: &[Vec<usize>], depths: &[usize]) -> Result<Stage, DistributeError> {
    let e = cones.len();
    for (point, cone) in cones.iter().enumerate() {
        if let Some(&target) = cone.iter().find(|&&q| q >= e) {
            return Err(DistributeError::DanglingCone { point, target });
        }
    }
    let global = Plex::new(cones.to_vec(), depths.to_vec())?;
    let cells = global.cells();
    let sizes = balanced_chunks(cells.len(), comm.size())?;
    let starts = chunk_starts(&sizes);
    let parts: Vec<Vec<usize>> = (0..comm.size())
        .map(|r| cells[starts[r]..starts[r] + sizes[r]].to_vec())
        .collect();
    let slots = chunk_starts(&balanced_chunks(e, comm.size())?);
    let dist = build_distribution(comm, &global, &parts, &parts)?;
    let nroots = balanced_chunks(e, comm.size())?;
    let leaves = comm.phase(|r| {
        dist.numbering.loc_g[r]
            .iter()
            .enumerate()
            .map(|(p, &g)| (p, chunk_slot(g, &slots)))
            .collect()
    });
    let sf = StarForest::new(nroots, leaf_sizes(&dist), leaves)?;
    Ok(Stage {
        dist,
        partition: parts,
        sf,
    })
}

/// Migrates cells according to `plan`, carrying their closures along.
pub fn repartition(comm: &SimComm, prev: &Stage, plan: &PartitionPlan) -> Result<Stage, DistributeError> {
    check_plan(prev, plan)?;
    let global = glue(comm, &prev.dist)?;
    let dist = build_distribution(comm, &global, &plan.parts, &plan.parts)?;
    let sf = stage_sf(comm, &dist, &prev.dist)?;
    Ok(Stage {
        dist,
        partition: plan.parts.clone(),
        sf,
    })
}

/// Adds `layers` rings of neighbouring cells, and their closures, as ghosts.
pub fn add_overlap(
    comm: &SimComm,
    prev: &Stage,
    layers: usize,
    adjacency: Adjacency,
) -> Result<Stage, DistributeError> {
    let global = glue(comm, &prev.dist)?;
    let neighbours = cell_neighbours(&global, adjacency);
    let cells: Vec<Vec<usize>> = comm.phase(|r| {
        let mut cells = prev.partition[r].clone();
        let mut seen: HashSet<usize> = cells.iter().copied().collect();
        let mut frontier = cells.clone();
        for _ in 0..layers {
            let ring: BTreeSet<usize> = frontier
                .iter()
                .flat_map(|c| neighbours[c].iter().copied())
                .filter(|c| !seen.contains(c))
                .collect();
            seen.extend(ring.iter().copied());
            frontier = ring.into_iter().collect();
            cells.extend(frontier.iter().copied());
        }
        cells
    });
    let dist = build_distribution(comm, &global, &cells, &prev.partition)?;
    let sf = stage_sf(comm, &dist, &prev.dist)?;
    Ok(Stage {
        dist,
        partition: prev.partition.clone(),
        sf,
    })
}

/// Lays points out on each rank in exactly the given global order, with the
/// given owners. Used to restore a saved distribution.
pub fn explicit_distribution(
    comm: &SimComm,
    prev: &Stage,
    loc_g: Vec<Vec<usize>>,
    owners: &[usize],
) -> Result<Stage, DistributeError> {
    if loc_g.len() != comm.size() {
        return Err(DistributeError::PlanMismatch {
            reason: format!("{} point lists for {} ranks", loc_g.len(), comm.size()),
        });
    }
    let global = glue(comm, &prev.dist)?;
    if owners.len() != global.npoints() {
        return Err(DistributeError::PlanMismatch {
            reason: format!("{} owners for {} points", owners.len(), global.npoints()),
        });
    }
    let plexes = comm.try_phase(|r| local_plex(&global, &loc_g[r]))?;
    for (r, l) in loc_g.iter().enumerate() {
        if let Some(&g) = l
            .iter()
            .find(|&&g| owners[g] >= comm.size() || !loc_g[owners[g]].contains(&g))
        {
            return Err(DistributeError::PlanMismatch {
                reason: format!("rank {r} sees global point {g} but its owner does not"),
            });
        }
    }
    let point_sf = point_sf_from_owners(&loc_g, owners);
    let partition = comm.phase(|r| {
        loc_g[r]
            .iter()
            .copied()
            .filter(|&g| owners[g] == r && global.depth(g) == global.dim())
            .collect()
    });
    let numbering = GlobalNumbering {
        loc_g,
        num_global: global.npoints(),
    };
    let dist = DistPlex::new(plexes, point_sf, numbering)?;
    let sf = stage_sf(comm, &dist, &prev.dist)?;
    Ok(Stage { dist, partition, sf })
}

/// Deterministic breadth-first partition over shared-facet adjacency.
pub fn greedy_bfs_partition(global: &Plex, nparts: usize) -> Result<PartitionPlan, DistributeError> {
    let cells = global.cells();
    let sizes = balanced_chunks(cells.len(), nparts)?;
    if cells.len() < nparts {
        return Err(DistributeError::TooFewCells {
            cells: cells.len(),
            ranks: nparts,
        });
    }
    let neighbours = cell_neighbours(global, Adjacency::Facet);
    let mut assigned: HashSet<usize> = HashSet::new();
    let mut next_seed = 0;
    let mut parts = Vec::with_capacity(nparts);
    for &size in &sizes {
        let mut part = Vec::with_capacity(size);
        // level-synchronous: each level is visited in ascending order
        let mut level: Vec<usize> = Vec::new();
        while part.len() < size {
            if level.is_empty() {
                while assigned.contains(&cells[next_seed]) {
                    next_seed += 1;
                }
                level.push(cells[next_seed]);
            }
            let mut next = BTreeSet::new();
            for &c in &level {
                if part.len() == size {
                    break;
                }
                if assigned.insert(c) {
                    part.push(c);
                    next.extend(neighbours[&c].iter().copied().filter(|n| !assigned.contains(n)));
                }
            }
            level = next.into_iter().filter(|n| !assigned.contains(n)).collect();
        }
        part.sort_unstable();
        parts.push(part);
    }
    Ok(PartitionPlan {
        parts,
        method: PlanMethod::GreedyBfs,
    })
}

/// How the repartition step chooses its plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanChoice {
    /// Keep the naive chunks.
    Chunk,
    GreedyBfs,
    Explicit(PartitionPlan),
}

/// Runs all three stages and composes their maps.
pub fn distribute_topology(
    comm: &SimComm,
    cones: &[Vec<usize>],
    depths: &[usize],
    choice: &PlanChoice,
    layers: usize,
    adjacency: Adjacency,
) -> Result<Distributed, DistributeError> {
    let naive = naive_topology_split(comm, cones, depths)?;
    let plan = match choice {
        PlanChoice::Chunk => PartitionPlan {
            parts: naive.partition.clone(),
            method: PlanMethod::Chunk,
        },
        PlanChoice::GreedyBfs => greedy_bfs_partition(&Plex::new(cones.to_vec(), depths.to_vec())?, comm.size())?,
        PlanChoice::Explicit(plan) => plan.clone(),
    };
    let moved = repartition(comm, &naive, &plan)?;
    let overlapped = add_overlap(comm, &moved, layers, adjacency)?;
    let to_naive = overlapped.sf.compose(&moved.sf)?.sf;
    let sf = to_naive.compose(&naive.sf)?.sf;
    Ok(Distributed {
        dist: overlapped.dist,
        partition: overlapped.partition,
        sf,
        plan,
    })
}

/// Sorted neighbour lists for every cell.
pub fn cell_neighbours(global: &Plex, adjacency: Adjacency) -> HashMap<usize, Vec<usize>> {
    let shared_depth = match adjacency {
        Adjacency::Facet => global.dim().saturating_sub(1),
        Adjacency::Vertex => 0,
    };
    let cells = global.cells();
    let mut touching: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut shared: HashMap<usize, Vec<usize>> = HashMap::new();
    for &c in &cells {
        let pts: Vec<usize> = global
            .closure(c)
            .expect("cell in range")
            .into_iter()
            .filter(|&q| global.depth(q) == shared_depth)
            .collect();
        for &q in &pts {
            touching.entry(q).or_default().push(c);
        }
        shared.insert(c, pts);
    }
    cells
        .iter()
        .map(|&c| {
            let mut n: Vec<usize> = shared[&c]
                .iter()
                .flat_map(|q| touching[q].iter().copied())
                .filter(|&d| d != c)
                .collect();
            n.sort_unstable();
            n.dedup();
            (c, n)
        })
        .collect()
}

fn check_plan(prev: &Stage, plan: &PartitionPlan) -> Result<(), DistributeError> {
    if plan.parts.len() != prev.partition.len() {
        return Err(DistributeError::PlanMismatch {
            reason: format!("{} parts for {} ranks", plan.parts.len(), prev.partition.len()),
        });
    }
    let mut have: Vec<usize> = prev.partition.iter().flatten().copied().collect();
    let mut want: Vec<usize> = plan.parts.iter().flatten().copied().collect();
    have.sort_unstable();
    want.sort_unstable();
    if have != want {
        return Err(DistributeError::PlanMismatch {
            reason: "plan cells differ from the current cells".into(),
        });
    }
    Ok(())
}

/// Points visible from `cells` in stratified first-appearance order.
fn visible_points(global: &Plex, cells: &[usize]) -> Vec<usize> {
    let mut seen = HashSet::new();
    let mut points = Vec::new();
    for &c in cells {
        for q in global.closure(c).expect("cell in range") {
            if seen.insert(q) {
                points.push(q);
            }
        }
    }
    let dim = global.dim();
    points.sort_by_key(|&q| Plex::stratum_rank(dim, global.depth(q)));
    points
}

fn local_plex(global: &Plex, loc_g: &[usize]) -> Result<Plex, DistributeError> {
    let index: HashMap<usize, usize> = loc_g.iter().enumerate().map(|(l, &g)| (g, l)).collect();
    let mut cones = Vec::with_capacity(loc_g.len());
    for &g in loc_g {
        if g >= global.npoints() {
            return Err(DistributeError::PlanMismatch {
                reason: format!("global point {g} does not exist"),
            });
        }
        let cone = global
            .cone(g)
            .iter()
            .map(|q| {
                index.get(q).copied().ok_or_else(|| DistributeError::PlanMismatch {
                    reason: format!("closure of global point {g} is incomplete"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        cones.push(cone);
    }
    let depths = loc_g.iter().map(|&g| global.depth(g)).collect();
    Ok(Plex::new(cones, depths)?)
}

/// Builds the per-rank plexes for the given cell lists. Each point is owned by
/// the lowest rank whose `owned_cells` contain it in their closure.
fn build_distribution(
    comm: &SimComm,
    global: &Plex,
    cells: &[Vec<usize>],
    owned_cells: &[Vec<usize>],
) -> Result<DistPlex, DistributeError> {
    let loc_g: Vec<Vec<usize>> = comm.phase(|r| visible_points(global, &cells[r]));
    let owned_sets: Vec<Vec<usize>> = comm.phase(|r| visible_points(global, &owned_cells[r]));
    let mut owners = vec![usize::MAX; global.npoints()];
    for (r, pts) in owned_sets.iter().enumerate() {
        for &g in pts {
            owners[g] = owners[g].min(r);
        }
    }
    if let Some(&g) = loc_g.iter().flatten().find(|&&g| owners[g] == usize::MAX) {
        return Err(DistributeError::PlanMismatch {
            reason: format!("global point {g} is visible but owned by no rank"),
        });
    }
    let plexes = comm.try_phase(|r| local_plex(global, &loc_g[r]))?;
    let point_sf = point_sf_from_owners(&loc_g, &owners);
    let numbering = GlobalNumbering {
        loc_g,
        num_global: global.npoints(),
    };
    Ok(DistPlex::new(plexes, point_sf, numbering)?)
}

/// Maps each point to the same rank's previous copy when there is one, and
/// to the previous owner's copy otherwise.
fn stage_sf(comm: &SimComm, next: &DistPlex, prev: &DistPlex) -> Result<StarForest, DistributeError> {
    let prev_index: Vec<HashMap<usize, usize>> = comm.phase(|r| prev.numbering.index(r));
    let prev_owners = prev.owners();
    let leaves = comm.phase(|r| {
        next.numbering.loc_g[r]
            .iter()
            .enumerate()
            .map(|(p, g)| match prev_index[r].get(g) {
                Some(&old) => (p, RemotePoint::new(r, old)),
                None => {
                    let owner = prev_owners[*g];
                    (p, RemotePoint::new(owner, prev_index[owner][g]))
                }
            })
            .collect()
    });
    let nroots = (0..prev.nranks()).map(|r| prev.plexes[r].npoints()).collect();
    Ok(StarForest::new(nroots, leaf_sizes(next), leaves)?)
}

fn leaf_sizes(dist: &DistPlex) -> Vec<usize> {
    dist.plexes.iter().map(Plex::npoints).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plex::from_cell_vertices;

    #[test]
    fn chunk_examples() {
        assert_eq!(balanced_chunks(15, 3).unwrap(), vec![5, 5, 5]);
        assert_eq!(balanced_chunks(7, 1).unwrap(), vec![7]);
        assert_eq!(balanced_chunks(35, 3).unwrap(), vec![12, 12, 11]);
        assert_eq!(balanced_chunks(2, 4).unwrap(), vec![1, 1, 0, 0]);
        assert_eq!(balanced_chunks(3, 0), Err(DistributeError::ZeroRanks));
    }

    #[test]
    fn slots() {
        let starts = chunk_starts(&[2, 0, 3]);
        assert_eq!(chunk_slot(1, &starts), RemotePoint::new(0, 1));
        assert_eq!(chunk_slot(2, &starts), RemotePoint::new(2, 0));
        assert_eq!(chunk_slot(4, &starts), RemotePoint::new(2, 2));
    }

    fn square2() -> Plex {
        // 2x2 squares split into 8 triangles
        let mut cells = Vec::new();
        for j in 0..2 {
            for i in 0..2 {
                let v = |a: usize, b: usize| (j + b) * 3 + i + a;
                cells.push(vec![v(0, 0), v(1, 0), v(1, 1)]);
                cells.push(vec![v(0, 0), v(1, 1), v(0, 1)]);
            }
        }
        from_cell_vertices(&cells, 9).unwrap()
    }

    #[test]
    fn single_rank_split_is_a_permutation() {
        let g = square2();
        let comm = SimComm::sequential(1);
        let s = naive_topology_split(&comm, g.cones(), g.depths()).unwrap();
        assert!(s.sf.invert_bijective().is_ok());
        assert_eq!(glue(&comm, &s.dist).unwrap(), g);
    }

    #[test]
    fn dangling_cone() {
        let err = naive_topology_split(&SimComm::sequential(1), &[vec![3]], &[1]).unwrap_err();
        assert_eq!(err, DistributeError::DanglingCone { point: 0, target: 3 });
    }

    #[test]
    fn identity_plan_and_zero_layers() {
        let g = square2();
        let comm = SimComm::sequential(3);
        let s = naive_topology_split(&comm, g.cones(), g.depths()).unwrap();
        let plan = PartitionPlan {
            parts: s.partition.clone(),
            method: PlanMethod::Explicit,
        };
        assert!(repartition(&comm, &s, &plan).unwrap().sf.is_identity());
        assert!(add_overlap(&comm, &s, 0, Adjacency::Facet).unwrap().sf.is_identity());
    }

    #[test]
    fn plan_mismatch() {
        let g = square2();
        let comm = SimComm::sequential(2);
        let s = naive_topology_split(&comm, g.cones(), g.depths()).unwrap();
        let plan = PartitionPlan {
            parts: vec![vec![0], vec![1]],
            method: PlanMethod::Explicit,
        };
        assert!(matches!(
            repartition(&comm, &s, &plan),
            Err(DistributeError::PlanMismatch { .. })
        ));
    }

    #[test]
    fn greedy_halves_are_connected() {
        let g = square2();
        let plan = greedy_bfs_partition(&g, 2).unwrap();
        assert_eq!(plan.parts.iter().map(Vec::len).collect::<Vec<_>>(), vec![4, 4]);
        let nb = cell_neighbours(&g, Adjacency::Facet);
        for part in &plan.parts {
            let mut reached = HashSet::from([part[0]]);
            let mut queue = vec![part[0]];
            while let Some(c) = queue.pop() {
                for &n in &nb[&c] {
                    if part.contains(&n) && reached.insert(n) {
                        queue.push(n);
                    }
                }
            }
            assert_eq!(reached.len(), part.len());
        }
        assert_eq!(
            greedy_bfs_partition(&g, 1).unwrap().parts,
            vec![(0..8).collect::<Vec<_>>()]
        );
        assert!(matches!(
            greedy_bfs_partition(&g, 9),
            Err(DistributeError::TooFewCells { .. })
        ));
    }
}
