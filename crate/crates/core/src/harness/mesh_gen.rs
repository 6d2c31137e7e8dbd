use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::HarnessError;
use crate::checkpoint::{Labels, Mesh};
use crate::comm::SimComm;
use crate::distribute::{distribute_topology, Adjacency, PlanChoice};
use crate::error::Error;
use crate::plex::{from_cell_vertices, Plex};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    Interval,
    UnitSquare,
    UnitCube,
}

/// `shape:resolution[:refinement]`, e.g. `unit-square:8` or `unit-cube:2:1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeshSpec {
    pub shape: Shape,
    pub resolution: usize,
    pub refinement: usize,
}

impl MeshSpec {
    pub fn new(shape: Shape, resolution: usize) -> Self {
        Self {
            shape,
            resolution,
            refinement: 0,
        }
    }

    /// Cells per direction after refinement.
    pub fn divisions(&self) -> usize {
        self.resolution << self.refinement
    }
}

impl fmt::Display for MeshSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shape = match self.shape {
            Shape::Interval => "interval",
            Shape::UnitSquare => "unit-square",
            Shape::UnitCube => "unit-cube",
        };
        write!(f, "{shape}:{}", self.resolution)?;
        if self.refinement > 0 {
            write!(f, ":{}", self.refinement)?;
        }
        Ok(())
    }
}

impl FromStr for MeshSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |reason| HarnessError::BadMeshSpec {
            spec: s.to_owned(),
            reason,
        };
        let mut parts = s.split(':');
        let shape = match parts.next().unwrap_or_default() {
            "interval" => Shape::Interval,
            "unit-square" | "unit-square-tri" => Shape::UnitSquare,
            "unit-cube" | "unit-cube-tet" => Shape::UnitCube,
            other => {
                return Err(HarnessError::UnsupportedShape {
                    shape: other.to_owned(),
                })
            }
        };
        let resolution: usize = parts
            .next()
            .ok_or_else(|| bad("missing resolution"))?
            .parse()
            .map_err(|_| bad("resolution is not an integer"))?;
        let refinement: usize = match parts.next() {
            Some(r) => r.parse().map_err(|_| bad("refinement is not an integer"))?,
            None => 0,
        };
        if parts.next().is_some() {
            return Err(bad("too many fields"));
        }
        if resolution == 0 {
            return Err(bad("resolution must be at least 1"));
        }
        if refinement > 8 {
            return Err(bad("refinement above 8"));
        }
        Ok(Self {
            shape,
            resolution,
            refinement,
        })
    }
}

/// A serial mesh: topology, coordinates indexed by point, and labels.
#[derive(Clone, Debug)]
pub struct SerialMesh {
    pub plex: Plex,
    pub gdim: usize,
    pub coords: Vec<[f64; 3]>,
    pub labels: Labels,
}

/// Builds a structured simplicial mesh of the unit interval, square or cube,
/// with the facets on the boundary labelled `boundary = 1`.
pub fn gen_mesh(spec: &MeshSpec) -> Result<SerialMesh, HarnessError> {
    let n = spec.divisions();
    let h = |i: usize| i as f64 / n as f64;
    let (gdim, cells, verts): (usize, Vec<Vec<usize>>, Vec<[f64; 3]>) = match spec.shape {
        Shape::Interval => (
            1,
            (0..n).map(|i| vec![i, i + 1]).collect(),
            (0..=n).map(|i| [h(i), 0.0, 0.0]).collect(),
        ),
        Shape::UnitSquare => {
            let v = |i: usize, j: usize| j * (n + 1) + i;
            let mut cells = Vec::with_capacity(2 * n * n);
            for j in 0..n {
                for i in 0..n {
                    cells.push(vec![v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
                    cells.push(vec![v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
                }
            }
            let verts = (0..=n).flat_map(|j| (0..=n).map(move |i| [h(i), h(j), 0.0])).collect();
            (2, cells, verts)
        }
        Shape::UnitCube => {
            let v = |p: [usize; 3]| (p[2] * (n + 1) + p[1]) * (n + 1) + p[0];
            const AXES: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let mut cells = Vec::with_capacity(6 * n * n * n);
            for k in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        for axes in AXES {
                            let mut p = [i, j, k];
                            let mut tet = vec![v(p)];
                            for a in axes {
                                p[a] += 1;
                                tet.push(v(p));
                            }
                            cells.push(tet);
                        }
                    }
                }
            }
            let verts = (0..=n)
                .flat_map(|k| (0..=n).flat_map(move |j| (0..=n).map(move |i| [h(i), h(j), h(k)])))
                .collect();
            (3, cells, verts)
        }
    };
    let plex = from_cell_vertices(&cells, verts.len()).expect("generated cells are valid");
    let mut coords = vec![[0.0; 3]; plex.npoints()];
    coords[cells.len()..cells.len() + verts.len()].copy_from_slice(&verts);
    let boundary: Vec<usize> = plex
        .stratum(plex.dim() - 1)
        .into_iter()
        .filter(|&f| plex.support(f).is_ok_and(|s| s.len() == 1))
        .collect();
    let mut labels = Labels::new();
    labels.insert("boundary".into(), BTreeMap::from([(1, boundary)]));
    Ok(SerialMesh {
        plex,
        gdim,
        coords,
        labels,
    })
}

/// Distributes a serial mesh over `comm` with the load pipeline (greedy
/// partition, one facet-adjacent overlap layer), carrying coordinates and
/// labels along. The serial point numbers become the global numbers.
pub fn distribute_serial(comm: &SimComm, serial: &SerialMesh, name: &str, overlap: usize) -> Result<Mesh, Error> {
    let d = distribute_topology(
        comm,
        serial.plex.cones(),
        serial.plex.depths(),
        &PlanChoice::GreedyBfs,
        overlap,
        Adjacency::Facet,
    )?;
    let coords = comm.phase(|r| d.dist.numbering.loc_g[r].iter().map(|&g| serial.coords[g]).collect());
    let labels = comm.phase(|r| {
        let index = d.dist.numbering.index(r);
        serial
            .labels
            .iter()
            .map(|(name, strata)| {
                let strata = strata
                    .iter()
                    .map(|(&v, pts)| {
                        let mut local: Vec<usize> = pts.iter().filter_map(|g| index.get(g).copied()).collect();
                        local.sort_unstable();
                        (v, local)
                    })
                    .collect();
                (name.clone(), strata)
            })
            .collect()
    });
    Ok(Mesh {
        name: name.to_owned(),
        dist: d.dist,
        gdim: serial.gdim,
        coords,
        labels,
        load_sf: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let m = gen_mesh(&"unit-square:1".parse().unwrap()).unwrap();
        assert_eq!(
            (m.plex.cells().len(), m.plex.stratum(1).len(), m.plex.stratum(0).len()),
            (2, 5, 4)
        );
        assert_eq!(m.labels["boundary"][&1].len(), 4);
        let m = gen_mesh(&"unit-square:8".parse().unwrap()).unwrap();
        assert_eq!(m.plex.cells().len(), 128);
        let m = gen_mesh(&"interval:4".parse().unwrap()).unwrap();
        assert_eq!(m.plex.stratum(0).len(), 5);
        let m = gen_mesh(&"unit-cube:1".parse().unwrap()).unwrap();
        assert_eq!(m.plex.cells().len(), 6);
        assert_eq!(m.labels["boundary"][&1].len(), 12);
    }

    #[test]
    fn refinement_doubles() {
        let a = gen_mesh(&"unit-square:2:1".parse().unwrap()).unwrap();
        let b = gen_mesh(&"unit-square:4".parse().unwrap()).unwrap();
        assert_eq!(a.plex, b.plex);
    }

    #[test]
    fn spec_errors() {
        assert!(matches!(
            "torus:3".parse::<MeshSpec>(),
            Err(HarnessError::UnsupportedShape { .. })
        ));
        assert!(matches!(
            "unit-square:0".parse::<MeshSpec>(),
            Err(HarnessError::BadMeshSpec { .. })
        ));
        assert_eq!("unit-cube:2:1".parse::<MeshSpec>().unwrap().divisions(), 4);
    }
}
