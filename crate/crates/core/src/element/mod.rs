//! Lagrange elements on simplices: DoF layouts, orientations, and nodal
//! interpolation.
//!
//! Nodes on an entity are equispaced lattice points indexed by barycentric
//! multi-indices relative to the entity's cone-ordered vertex list, in
//! descending lexicographic order. Because the vertex list is read off the
//! cone, every rank that sees an entity lays its nodes out identically.

mod interpolate;
mod orientation;

pub use interpolate::{evaluate, interpolate, node_point, reference_cell_values, vertex_list};
pub use orientation::{
    compose_orientations, dof_permutation, entity_orientation, num_orientations, orientation_permutation, Orientation,
};

use std::fmt;

use thiserror::Error;

use crate::plex::PlexError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElementError {
    #[error("unsupported element {element}: {reason}")]
    UnsupportedElement { element: String, reason: &'static str },
    #[error("{found:?} is not a rearrangement of {reference:?}")]
    NotAPermutation { found: Vec<usize>, reference: Vec<usize> },
    #[error("no DoFs live on entities of dimension {dim}")]
    NoDofsOnEntity { dim: usize },
    #[error("point {point} has {found} DoFs in the section, the element puts {expected} there")]
    LayoutMismatch {
        point: usize,
        expected: usize,
        found: usize,
    },
    #[error("orientation {o} out of range for an entity with {nverts} vertices")]
    BadOrientation { o: usize, nverts: usize },
    #[error("degenerate cell {cell}")]
    DegenerateCell { cell: usize },
    #[error(transparent)]
    Plex(#[from] PlexError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// Continuous Lagrange.
    P,
    /// Discontinuous Lagrange.
    DP,
}

impl Family {
    pub fn code(self) -> i64 {
        match self {
            Family::P => 0,
            Family::DP => 1,
        }
    }

    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            0 => Some(Family::P),
            1 => Some(Family::DP),
            _ => None,
        }
    }
}

impl std::str::FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "P" | "CG" => Ok(Family::P),
            "DP" | "DG" => Ok(Family::DP),
            _ => Err(format!("unknown element family '{s}'")),
        }
    }
}

pub const MAX_DEGREE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LagrangeElement {
    pub family: Family,
    pub degree: usize,
    /// Values per node; 1 for scalars.
    pub components: usize,
}

impl fmt::Display for LagrangeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self.degree)?;
        if self.components != 1 {
            write!(f, "^{}", self.components)?;
        }
        Ok(())
    }
}

impl LagrangeElement {
    pub fn new(family: Family, degree: usize) -> Result<Self, ElementError> {
        Self::vector(family, degree, 1)
    }

    pub fn vector(family: Family, degree: usize, components: usize) -> Result<Self, ElementError> {
        let el = Self {
            family,
            degree,
            components,
        };
        let reason = if degree > MAX_DEGREE {
            Some("degree above 4")
        } else if family == Family::P && degree == 0 {
            Some("continuous elements need degree at least 1")
        } else if components == 0 {
            Some("zero components")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(ElementError::UnsupportedElement {
                element: el.to_string(),
                reason,
            }),
            None => Ok(el),
        }
    }

    /// Nodes on the interior of an entity of dimension `entity_dim` in a
    /// mesh of dimension `cell_dim`, scalar count.
    pub fn nodes_on(&self, entity_dim: usize, cell_dim: usize) -> usize {
        let k = self.degree;
        match self.family {
            Family::P => binomial(k - 1, entity_dim),
            Family::DP if entity_dim == cell_dim => binomial(k + cell_dim, cell_dim),
            Family::DP => 0,
        }
    }

    /// DoF counts indexed by entity dimension.
    pub fn dofs_per_depth(&self, cell_dim: usize) -> Vec<usize> {
        (0..=cell_dim)
            .map(|d| self.nodes_on(d, cell_dim) * self.components)
            .collect()
    }

    /// Multi-indices of the nodes on an entity with `nverts` vertices.
    pub fn entity_lattice(&self, nverts: usize, cell_dim: usize) -> Vec<Vec<usize>> {
        match self.family {
            Family::P => lattice(nverts, self.degree, true),
            Family::DP if nverts == cell_dim + 1 => lattice(nverts, self.degree, false),
            Family::DP => Vec::new(),
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Multi-indices of length `nverts` summing to `k`, in descending
/// lexicographic order. With `interior` every entry is at least one.
pub fn lattice(nverts: usize, k: usize, interior: bool) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, left: usize, slots: usize, min: usize, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            if left >= min {
                prefix.push(left);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        let reserve = min * (slots - 1);
        if left < reserve {
            return;
        }
        for a in (min..=left - reserve).rev() {
            prefix.push(a);
            rec(prefix, left - a, slots - 1, min, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nverts > 0 {
        rec(&mut Vec::new(), k, nverts, usize::from(interior), &mut out);
    }
    out
}
