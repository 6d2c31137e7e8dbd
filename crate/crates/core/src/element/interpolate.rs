use std::collections::HashMap;

use super::{dof_permutation, entity_orientation, ElementError, Family, LagrangeElement};
use crate::plex::{from_cell_vertices, Plex};
use crate::section::LocalSection;

/// Cone-ordered vertex list of a point: the point itself for a vertex, the
/// cone for an edge, and otherwise the vertex opposite each cone entry.
pub fn vertex_list(plex: &Plex, point: usize) -> Result<Vec<usize>, ElementError> {
    match plex.depth(point) {
        0 => Ok(vec![point]),
        1 => Ok(plex.cone(point).to_vec()),
        _ => {
            let all = plex.closure_vertices(point)?;
            plex.cone(point)
                .iter()
                .map(|&face| {
                    let sub = plex.closure_vertices(face)?;
                    Ok(*all
                        .iter()
                        .find(|v| !sub.contains(v))
                        .expect("simplex has an opposite vertex"))
                })
                .collect()
        }
    }
}

/// Physical location of lattice node `alpha` of degree `k` on the simplex
/// with vertex coordinates `verts`.
pub fn node_point(verts: &[[f64; 3]], alpha: &[usize], k: usize) -> [f64; 3] {
    if k == 0 {
        let n = verts.len() as f64;
        let mut x = [0.0; 3];
        for v in verts {
            for c in 0..3 {
                x[c] += v[c];
            }
        }
        return x.map(|s| s / n);
    }
    if let Some(i) = alpha.iter().position(|&a| a == k) {
        return verts[i];
    }
    let mut x = [0.0; 3];
    for (v, &a) in verts.iter().zip(alpha) {
        for c in 0..3 {
            x[c] += a as f64 * v[c];
        }
    }
    x.map(|s| s / k as f64)
}

fn check_scalar(el: &LagrangeElement) -> Result<(), ElementError> {
    if el.components != 1 {
        return Err(ElementError::UnsupportedElement {
            element: el.to_string(),
            reason: "interpolation handles scalar elements only",
        });
    }
    Ok(())
}

fn check_layout(plex: &Plex, section: &LocalSection, el: &LagrangeElement, point: usize) -> Result<(), ElementError> {
    let expected = el.nodes_on(plex.depth(point), plex.dim()) * el.components;
    if section.dof[point] != expected {
        return Err(ElementError::LayoutMismatch {
            point,
            expected,
            found: section.dof[point],
        });
    }
    Ok(())
}

fn gather(coords: &[[f64; 3]], verts: &[usize]) -> Vec<[f64; 3]> {
    verts.iter().map(|&v| coords[v]).collect()
}

/// Nodal interpolation of `f` into a local DoF vector.
pub fn interpolate(
    plex: &Plex,
    coords: &[[f64; 3]],
    section: &LocalSection,
    el: &LagrangeElement,
    f: &dyn Fn([f64; 3]) -> f64,
) -> Result<Vec<f64>, ElementError> {
    check_scalar(el)?;
    let mut values = vec![0.0; section.total];
    for p in 0..plex.npoints() {
        check_layout(plex, section, el, p)?;
        if section.dof[p] == 0 {
            continue;
        }
        let verts = vertex_list(plex, p)?;
        let xs = gather(coords, &verts);
        for (j, alpha) in el.entity_lattice(verts.len(), plex.dim()).iter().enumerate() {
            values[section.off[p] + j] = f(node_point(&xs, alpha, el.degree));
        }
    }
    Ok(values)
}

fn barycentric(xs: &[[f64; 3]], x: [f64; 3], cell: usize) -> Result<Vec<f64>, ElementError> {
    let d = xs.len() - 1;
    let mut a = vec![vec![0.0; d + 1]; d];
    for (row, eq) in a.iter_mut().enumerate() {
        for i in 0..d {
            eq[i] = xs[i + 1][row] - xs[0][row];
        }
        eq[d] = x[row] - xs[0][row];
    }
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        if a[piv][col].abs() < 1e-300 {
            return Err(ElementError::DegenerateCell { cell });
        }
        a.swap(col, piv);
        for row in 0..d {
            if row != col {
                let factor = a[row][col] / a[col][col];
                let pivot_row = a[col].clone();
                for (x, p) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                    *x -= factor * p;
                }
            }
        }
    }
    let mut lambda = vec![0.0; d + 1];
    for i in 0..d {
        lambda[i + 1] = a[i][d] / a[i][i];
    }
    lambda[0] = 1.0 - lambda[1..].iter().sum::<f64>();
    Ok(lambda)
}

fn lagrange_basis(beta: &[usize], lambda: &[f64], k: usize) -> f64 {
    let mut v = 1.0;
    for (&b, &l) in beta.iter().zip(lambda) {
        for j in 0..b {
            v *= (k as f64 * l - j as f64) / (b - j) as f64;
        }
    }
    v
}

/// Evaluates a scalar DoF vector at `x` inside `cell`.
pub fn evaluate(
    plex: &Plex,
    coords: &[[f64; 3]],
    section: &LocalSection,
    el: &LagrangeElement,
    values: &[f64],
    cell: usize,
    x: [f64; 3],
) -> Result<f64, ElementError> {
    check_scalar(el)?;
    let cell_verts = vertex_list(plex, cell)?;
    let lambda = barycentric(&gather(coords, &cell_verts), x, cell)?;
    let entities = match el.family {
        Family::P => plex.closure(cell)?,
        Family::DP => vec![cell],
    };
    let mut sum = 0.0;
    for q in entities {
        check_layout(plex, section, el, q)?;
        let verts = vertex_list(plex, q)?;
        for (j, alpha) in el.entity_lattice(verts.len(), plex.dim()).iter().enumerate() {
            let mut beta = vec![0; cell_verts.len()];
            for (v, &a) in verts.iter().zip(alpha) {
                beta[cell_verts.iter().position(|u| u == v).expect("vertex of cell")] = a;
            }
            sum += values[section.off[q] + j] * lagrange_basis(&beta, &lambda, el.degree);
        }
    }
    Ok(sum)
}

/// Interpolates `f` on one cell through its reference cell: nodes are laid
/// out on the reference sub-entities and placed into the mesh chunks through
/// orientation permutations. Returns `(local DoF index, value)` pairs.
///
/// Reference vertex `i` maps to the cell vertex with the `i`-th smallest
/// local number.
pub fn reference_cell_values(
    plex: &Plex,
    coords: &[[f64; 3]],
    section: &LocalSection,
    el: &LagrangeElement,
    cell: usize,
    f: &dyn Fn([f64; 3]) -> f64,
) -> Result<Vec<(usize, f64)>, ElementError> {
    check_scalar(el)?;
    let dim = plex.dim();
    let mut verts = plex.closure_vertices(cell)?;
    verts.sort_unstable();
    let reference = from_cell_vertices(&[(0..=dim).collect()], dim + 1)?;

    let key = |p: &Plex, q: usize, to_mesh: &dyn Fn(usize) -> usize| -> Result<Vec<usize>, ElementError> {
        let mut k: Vec<usize> = p.closure_vertices(q)?.into_iter().map(to_mesh).collect();
        k.sort_unstable();
        Ok(k)
    };
    let mut by_vertices: HashMap<Vec<usize>, usize> = HashMap::new();
    for q in plex.closure(cell)? {
        by_vertices.insert(key(plex, q, &|v| v)?, q);
    }
    // reference vertex i is point 1 + i in the reference plex
    let ref_vertex_to_mesh = |v: usize| verts[v - 1];
    let mut image = vec![0; reference.npoints()];
    for (q, slot) in image.iter_mut().enumerate() {
        *slot = by_vertices[&key(&reference, q, &ref_vertex_to_mesh)?];
    }

    let mut out = Vec::new();
    for q in 0..reference.npoints() {
        let d = reference.depth(q);
        let m = image[q];
        check_layout(plex, section, el, m)?;
        if section.dof[m] == 0 {
            continue;
        }
        let o = if d == 0 {
            0
        } else {
            let ref_image: Vec<usize> = reference.cone(q).iter().map(|&c| image[c]).collect();
            entity_orientation(plex.cone(m), &ref_image)?
        };
        let pi = dof_permutation(el, d, dim, o)?;
        let ref_verts: Vec<usize> = vertex_list(&reference, q)?
            .into_iter()
            .map(ref_vertex_to_mesh)
            .collect();
        let xs = gather(coords, &ref_verts);
        for (j, alpha) in el.entity_lattice(ref_verts.len(), dim).iter().enumerate() {
            out.push((section.off[m] + pi[j], f(node_point(&xs, alpha, el.degree))));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::section::build_local_section;

    fn two_triangles() -> (Plex, Vec<[f64; 3]>) {
        let p = from_cell_vertices(&[vec![0, 1, 3], vec![0, 3, 2]], 4).unwrap();
        let mut coords = vec![[0.0; 3]; p.npoints()];
        for (v, x) in [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]].iter().enumerate() {
            coords[2 + v] = [x[0], x[1], 0.0];
        }
        (p, coords)
    }

    #[test]
    fn vertex_list_follows_cone() {
        let (p, _) = two_triangles();
        // cell 0 has vertices (0, 1, 3) -> points (2, 3, 5)
        assert_eq!(vertex_list(&p, 0).unwrap(), vec![2, 3, 5]);
    }

    #[test]
    fn constant_and_linear() {
        let (p, coords) = two_triangles();
        for k in 1..=4 {
            let el = LagrangeElement::new(Family::P, k).unwrap();
            let s = build_local_section(&p, &el.dofs_per_depth(2)).unwrap();
            let v = interpolate(&p, &coords, &s, &el, &|_| 1.0).unwrap();
            assert!(v.iter().all(|&x| x == 1.0));
        }
        let el = LagrangeElement::new(Family::P, 1).unwrap();
        let s = build_local_section(&p, &el.dofs_per_depth(2)).unwrap();
        let v = interpolate(&p, &coords, &s, &el, &|x| x[0]).unwrap();
        for vtx in p.stratum(0) {
            assert_eq!(v[s.off[vtx]], coords[vtx][0]);
        }
    }

    #[test]
    fn reference_route_agrees() {
        let (p, coords) = two_triangles();
        let f = |x: [f64; 3]| x[0] * x[0] * x[0] - 2.0 * x[1] + x[0] * x[1];
        for (fam, k) in [(Family::P, 4), (Family::P, 3), (Family::DP, 2)] {
            let el = LagrangeElement::new(fam, k).unwrap();
            let s = build_local_section(&p, &el.dofs_per_depth(2)).unwrap();
            let direct = interpolate(&p, &coords, &s, &el, &f).unwrap();
            for cell in p.cells() {
                for (i, v) in reference_cell_values(&p, &coords, &s, &el, cell, &f).unwrap() {
                    assert!((direct[i] - v).abs() <= 1e-12, "{el} cell {cell} dof {i}");
                }
            }
        }
    }

    #[test]
    fn evaluate_reproduces_polynomial() {
        let (p, coords) = two_triangles();
        let f = |x: [f64; 3]| x[0] * x[0] * x[1] + 0.5 * x[1] - 1.0;
        let el = LagrangeElement::new(Family::P, 3).unwrap();
        let s = build_local_section(&p, &el.dofs_per_depth(2)).unwrap();
        let v = interpolate(&p, &coords, &s, &el, &f).unwrap();
        let x = [0.2, 0.7, 0.0];
        let got = evaluate(&p, &coords, &s, &el, &v, 1, x).unwrap();
        assert!((got - f(x)).abs() < 1e-12);
    }
}
