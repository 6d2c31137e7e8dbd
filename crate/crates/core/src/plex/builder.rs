use std::collections::BTreeMap;

use super::{Plex, PlexError};

/// Builds a fully interpolated simplicial mesh from cell-vertex lists.
///
/// Points are numbered cells, vertices, faces, edges. Edges are sorted by
/// vertex pair, faces by vertex triple. Each cell (and face) lists in its
/// cone the sub-entities opposite its vertices, in vertex order.
pub fn from_cell_vertices(cells: &[Vec<usize>], nverts: usize) -> Result<Plex, PlexError> {
    let nv = cells.first().map_or(1, Vec::len);
    for (c, cell) in cells.iter().enumerate() {
        if cell.len() != nv {
            return Err(PlexError::SizeMismatch {
                expected: nv,
                found: cell.len(),
            });
        }
        if let Some(&v) = cell.iter().find(|&&v| v >= nverts) {
            return Err(PlexError::ConeOutOfRange {
                point: c,
                target: v,
                npoints: nverts,
            });
        }
    }
    let dim = nv.saturating_sub(1);
    let ncells = cells.len();
    let vertex = |v: usize| ncells + v;

    let mut faces: BTreeMap<[usize; 3], usize> = BTreeMap::new();
    let mut edges: BTreeMap<[usize; 2], usize> = BTreeMap::new();
    for cell in cells {
        if dim == 3 {
            for skip in 0..4 {
                faces.insert(sorted3(opposite(cell, skip)), 0);
            }
        }
        if dim >= 2 {
            for i in 0..nv {
                for j in i + 1..nv {
                    edges.insert(sorted2(cell[i], cell[j]), 0);
                }
            }
        }
    }
    let mut next = ncells + nverts;
    for id in faces.values_mut() {
        *id = next;
        next += 1;
    }
    for id in edges.values_mut() {
        *id = next;
        next += 1;
    }

    let mut cones = vec![Vec::new(); next];
    let mut depth = vec![0; next];
    let edge = |a: usize, b: usize| edges[&sorted2(a, b)];
    let tri_cone = |t: &[usize]| vec![edge(t[1], t[2]), edge(t[0], t[2]), edge(t[0], t[1])];
    for (c, cell) in cells.iter().enumerate() {
        depth[c] = dim;
        cones[c] = match dim {
            0 => Vec::new(),
            1 => vec![vertex(cell[0]), vertex(cell[1])],
            2 => tri_cone(cell),
            _ => (0..4).map(|skip| faces[&sorted3(opposite(cell, skip))]).collect(),
        };
    }
    for (f, &id) in &faces {
        depth[id] = 2;
        cones[id] = tri_cone(f);
    }
    for (e, &id) in &edges {
        depth[id] = 1;
        cones[id] = vec![vertex(e[0]), vertex(e[1])];
    }
    Plex::new(cones, depth)
}

fn opposite(cell: &[usize], skip: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut k = 0;
    for (i, &v) in cell.iter().enumerate() {
        if i != skip {
            out[k] = v;
            k += 1;
        }
    }
    out
}

fn sorted2(a: usize, b: usize) -> [usize; 2] {
    [a.min(b), a.max(b)]
}

fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_triangles() {
        let p = from_cell_vertices(&[vec![0, 1, 3], vec![0, 3, 2]], 4).unwrap();
        assert_eq!(p.cells(), vec![0, 1]);
        assert_eq!(p.stratum(0).len(), 4);
        assert_eq!(p.stratum(1).len(), 5);
        // edges in pair order: 01, 02, 03, 13, 23 -> points 6..10
        assert_eq!(p.cone(6), &[2, 3]);
        assert_eq!(p.cone(0), &[9, 8, 6]);
    }

    #[test]
    fn intervals() {
        let p = from_cell_vertices(&[vec![0, 1], vec![1, 2]], 3).unwrap();
        assert_eq!(p.dim(), 1);
        assert_eq!(p.cone(1), &[3, 4]);
    }

    #[test]
    fn bad_vertex() {
        assert!(from_cell_vertices(&[vec![0, 1, 5]], 3).is_err());
    }
}
