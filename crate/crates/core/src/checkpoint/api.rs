use std::io::{Read, Seek, Write};

use super::{
    coordinates_load, coordinates_view, distribution_view, dms_name, labels_load, labels_view, local_vector_load,
    local_vector_view, section_load, section_view, topology_load, topology_view, CheckpointError, CheckpointReader,
    CheckpointWriter, Labels, PlanSource,
};
use crate::comm::SimComm;
use crate::distribute::Adjacency;
use crate::element::LagrangeElement;
use crate::plex::DistPlex;
use crate::section::{build_local_section, chunk_map, local_to_global_section, LocalSection};
use crate::starforest::StarForest;

/// A distributed mesh with geometry and labels.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub name: String,
    pub dist: DistPlex,
    pub gdim: usize,
    /// Per rank, coordinates indexed by local point; only vertices are set.
    pub coords: Vec<Vec<[f64; 3]>>,
    pub labels: Vec<Labels>,
    /// For loaded meshes, the composed map from local points to saved slots.
    pub load_sf: Option<StarForest>,
}

impl Mesh {
    pub fn nranks(&self) -> usize {
        self.dist.nranks()
    }

    /// Map from local points to the balanced-chunk slots of their global
    /// numbers.
    pub fn point_to_slot_sf(&self) -> Result<StarForest, CheckpointError> {
        match &self.load_sf {
            Some(sf) => Ok(sf.clone()),
            None => Ok(chunk_map(&self.dist.numbering.loc_g, self.dist.numbering.num_global)?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FunctionSpace {
    pub name: String,
    pub element: LagrangeElement,
    pub sections: Vec<LocalSection>,
}

impl FunctionSpace {
    /// Uniform layout of `element` on every rank of `mesh`.
    pub fn new(comm: &SimComm, name: &str, mesh: &Mesh, element: LagrangeElement) -> Result<Self, CheckpointError> {
        let sections = comm.try_phase(|r| {
            let plex = &mesh.dist.plexes[r];
            build_local_section(plex, &element.dofs_per_depth(plex.dim()))
        })?;
        Ok(Self {
            name: name.to_owned(),
            element,
            sections,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function {
    pub name: String,
    pub space: FunctionSpace,
    /// Local (ghosted) DoF vectors per rank.
    pub values: Vec<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoadOptions {
    pub overlap: usize,
    pub adjacency: Adjacency,
    pub exact_distribution: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            overlap: 1,
            adjacency: Adjacency::Facet,
            exact_distribution: false,
        }
    }
}

/// Saves topology, distribution, labels and coordinates.
pub fn save_mesh<W: Write + Seek>(
    w: &mut CheckpointWriter<W>,
    comm: &SimComm,
    mesh: &Mesh,
) -> Result<(), CheckpointError> {
    topology_view(w, comm, &mesh.name, &mesh.dist)?;
    distribution_view(w, comm, &mesh.name, &mesh.dist)?;
    labels_view(w, comm, &mesh.name, &mesh.dist, &mesh.labels)?;
    coordinates_view(w, comm, &mesh.name, &mesh.dist, mesh.gdim, &mesh.coords)
}

/// Saves a function's section, element tag and values.
pub fn save_function<W: Write + Seek>(
    w: &mut CheckpointWriter<W>,
    comm: &SimComm,
    mesh: &Mesh,
    f: &Function,
) -> Result<(), CheckpointError> {
    let gs = local_to_global_section(comm, &f.space.sections, &mesh.dist)?;
    section_view(w, &f.space.name, &gs, &f.space.element)?;
    local_vector_view(w, &f.space.name, &f.name, &gs, &f.space.sections, &mesh.dist, &f.values)
}

pub fn load_mesh<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    comm: &SimComm,
    name: &str,
    opts: LoadOptions,
) -> Result<Mesh, CheckpointError> {
    let source = if opts.exact_distribution {
        PlanSource::SavedDistribution
    } else {
        PlanSource::GreedyBfs
    };
    let loaded = topology_load(r, comm, name, opts.overlap, opts.adjacency, source)?;
    let labels = labels_load(r, comm, name, &loaded.dist)?;
    let (gdim, coords) = coordinates_load(r, comm, name, &loaded.dist, &loaded.sf)?;
    Ok(Mesh {
        name: name.to_owned(),
        dist: loaded.dist,
        gdim,
        coords,
        labels,
        load_sf: Some(loaded.sf),
    })
}

/// Finds the space holding function `name`.
fn space_of<R: Read + Seek>(r: &CheckpointReader<R>, name: &str) -> Result<String, CheckpointError> {
    let suffix = format!("/vecs/{name}/values");
    let mut spaces = r
        .names_with_prefix("/dms/")
        .filter_map(|n| n.strip_suffix(&suffix))
        .map(|s| s["/dms/".len()..].to_owned())
        .filter(|s| !s.contains('/'));
    let space = spaces.next().ok_or_else(|| CheckpointError::MissingDataset {
        name: dms_name("*", &suffix[1..]),
    })?;
    if spaces.next().is_some() {
        return Err(CheckpointError::MissingDataset {
            name: format!("unique space for function {name}"),
        });
    }
    Ok(space)
}

/// Loads function `name` onto `mesh`, whose global numbering must be the
/// saved one.
pub fn load_function<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    comm: &SimComm,
    mesh: &Mesh,
    name: &str,
) -> Result<Function, CheckpointError> {
    let space = space_of(r, name)?;
    let loaded = section_load(r, comm, &space, &mesh.dist, &mesh.point_to_slot_sf()?)?;
    let values = local_vector_load(r, comm, &space, name, &loaded.dof_sf)?;
    Ok(Function {
        name: name.to_owned(),
        space: FunctionSpace {
            name: space,
            element: loaded.element,
            sections: loaded.sections,
        },
        values,
    })
}
