//! Orientations of an entity relative to its reference image.
//!
//! An orientation is the permutation σ with `mesh_cone[i] = ref_image[σ(i)]`.
//! Triangles encode σ as `o = r + 3s` where σ(i) = (ε_s·i + r) mod 3 with
//! ε_0 = 1 and ε_1 = -1. Other entity sizes use the Lehmer code of σ, which
//! for edges gives 0 (same order) and 1 (reversed).

use super::{ElementError, LagrangeElement};

pub type Orientation = usize;

pub fn num_orientations(nverts: usize) -> usize {
    (1..=nverts).product()
}

/// The orientation carrying the reference order to the mesh order.
pub fn entity_orientation(mesh_cone: &[usize], ref_image: &[usize]) -> Result<Orientation, ElementError> {
    let not_perm = || ElementError::NotAPermutation {
        found: mesh_cone.to_vec(),
        reference: ref_image.to_vec(),
    };
    if mesh_cone.len() != ref_image.len() {
        return Err(not_perm());
    }
    let mut sigma = Vec::with_capacity(mesh_cone.len());
    for m in mesh_cone {
        let pos = ref_image.iter().position(|r| r == m).ok_or_else(not_perm)?;
        if sigma.contains(&pos) {
            return Err(not_perm());
        }
        sigma.push(pos);
    }
    Ok(encode(&sigma))
}

/// σ for orientation `o` of an entity with `n` cone points.
pub fn orientation_permutation(n: usize, o: Orientation) -> Result<Vec<usize>, ElementError> {
    if o >= num_orientations(n) {
        return Err(ElementError::BadOrientation { o, nverts: n });
    }
    if n == 3 {
        let (r, s) = (o % 3, o / 3);
        return Ok((0..3)
            .map(|i| if s == 0 { (i + r) % 3 } else { (3 - i + r) % 3 })
            .collect());
    }
    let mut left: Vec<usize> = (0..n).collect();
    let mut code = o;
    let mut sigma = Vec::with_capacity(n);
    for i in 0..n {
        let f = num_orientations(n - 1 - i);
        sigma.push(left.remove(code / f));
        code %= f;
    }
    Ok(sigma)
}

/// The orientation whose permutation is σ2∘σ1, so that
/// `π(o1)∘π(o2) = π(compose(o1, o2))` for DoF permutations.
pub fn compose_orientations(n: usize, o1: Orientation, o2: Orientation) -> Result<Orientation, ElementError> {
    let s1 = orientation_permutation(n, o1)?;
    let s2 = orientation_permutation(n, o2)?;
    Ok(encode(&s1.iter().map(|&i| s2[i]).collect::<Vec<_>>()))
}

/// DoF permutation on an entity: reference slot `i` lands in physical slot
/// `π[i]` of the entity's chunk.
pub fn dof_permutation(
    el: &LagrangeElement,
    entity_dim: usize,
    cell_dim: usize,
    o: Orientation,
) -> Result<Vec<usize>, ElementError> {
    let nodes = el.entity_lattice(entity_dim + 1, cell_dim);
    if nodes.is_empty() {
        return Err(ElementError::NoDofsOnEntity { dim: entity_dim });
    }
    let sigma = orientation_permutation(entity_dim + 1, o)?;
    let c = el.components;
    let mut pi = Vec::with_capacity(nodes.len() * c);
    for alpha in &nodes {
        let moved: Vec<usize> = sigma.iter().map(|&s| alpha[s]).collect();
        let j = nodes
            .iter()
            .position(|b| *b == moved)
            .expect("lattice closed under permutation");
        pi.extend((0..c).map(|k| j * c + k));
    }
    Ok(pi)
}

fn encode(sigma: &[usize]) -> Orientation {
    if sigma.len() == 3 {
        let r = sigma[0];
        let s = usize::from((sigma[1] + 3 - sigma[0]) % 3 != 1);
        return r + 3 * s;
    }
    let n = sigma.len();
    (0..n)
        .map(|i| {
            let smaller = sigma[i + 1..].iter().filter(|&&x| x < sigma[i]).count();
            smaller * num_orientations(n - 1 - i)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Family;

    #[test]
    fn edge_orientations() {
        assert_eq!(entity_orientation(&[7, 9], &[7, 9]).unwrap(), 0);
        assert_eq!(entity_orientation(&[9, 7], &[7, 9]).unwrap(), 1);
        assert!(entity_orientation(&[9, 8], &[7, 9]).is_err());
    }

    #[test]
    fn triangle_encoding_round_trips() {
        for o in 0..6 {
            let sigma = orientation_permutation(3, o).unwrap();
            assert_eq!(encode(&sigma), o);
        }
        for o in 0..24 {
            assert_eq!(encode(&orientation_permutation(4, o).unwrap()), o);
        }
    }

    #[test]
    fn p4_examples() {
        let el = LagrangeElement::new(Family::P, 4).unwrap();
        assert_eq!(dof_permutation(&el, 1, 2, 0).unwrap(), vec![0, 1, 2]);
        assert_eq!(dof_permutation(&el, 1, 2, 1).unwrap(), vec![2, 1, 0]);
        // cone rotated once
        let o = entity_orientation(&[11, 12, 10], &[10, 11, 12]).unwrap();
        assert_eq!(o, 1);
        assert_eq!(dof_permutation(&el, 2, 2, o).unwrap(), vec![2, 0, 1]);
    }

    #[test]
    fn no_dofs() {
        let el = LagrangeElement::new(Family::P, 1).unwrap();
        assert_eq!(
            dof_permutation(&el, 1, 2, 0),
            Err(ElementError::NoDofsOnEntity { dim: 1 })
        );
    }
}
