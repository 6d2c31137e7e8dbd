use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{Cursor, Read, Seek};
use std::time::Instant;

use super::{distribute_serial, gen_mesh, Field, HarnessError, MeshSpec};
use crate::checkpoint::{
    load_mesh, local_vector_load, save_function, save_mesh, section_load, CheckpointReader, CheckpointWriter, Function,
    FunctionSpace, LoadOptions, LoadedSection, Mesh,
};
use crate::comm::{Schedule, SimComm};
use crate::distribute::{balanced_chunks, chunk_starts};
use crate::element::{interpolate, LagrangeElement};
use crate::error::Error;

pub const MESH_NAME: &str = "mesh";
pub const FUNCTION_NAME: &str = "f";

#[derive(Clone, Debug, PartialEq)]
pub struct RoundtripConfig {
    pub mesh: MeshSpec,
    pub element: LagrangeElement,
    pub field: Field,
    pub save_ranks: usize,
    pub load_ranks: usize,
    /// Overlap layers when saving.
    pub overlap: usize,
    /// Overlap layers when loading.
    pub load_overlap: usize,
    pub schedule: Schedule,
    pub exact_distribution: bool,
}

impl RoundtripConfig {
    pub fn new(mesh: MeshSpec, element: LagrangeElement, field: Field, save_ranks: usize, load_ranks: usize) -> Self {
        Self {
            mesh,
            element,
            field,
            save_ranks,
            load_ranks,
            overlap: 1,
            load_overlap: 1,
            schedule: Schedule::Sequential,
            exact_distribution: false,
        }
    }

    pub fn load_options(&self) -> LoadOptions {
        LoadOptions {
            overlap: self.load_overlap,
            exact_distribution: self.exact_distribution,
            ..LoadOptions::default()
        }
    }
}

/// Interpolates `field` into `space` on every rank.
pub fn interpolate_function(
    comm: &SimComm,
    mesh: &Mesh,
    space: FunctionSpace,
    name: &str,
    field: &Field,
) -> Result<Function, Error> {
    let f = |x: [f64; 3]| field.eval(x);
    let values = comm.try_phase(|r| {
        interpolate(
            &mesh.dist.plexes[r],
            &mesh.coords[r],
            &space.sections[r],
            &space.element,
            &f,
        )
    })?;
    Ok(Function {
        name: name.to_owned(),
        space,
        values,
    })
}

/// Generates, distributes over `save_ranks`, interpolates and saves. Returns
/// the file bytes with the saved mesh and function.
pub fn save_state(cfg: &RoundtripConfig) -> Result<(Vec<u8>, Mesh, Function), Error> {
    if cfg.save_ranks == 0 || cfg.load_ranks == 0 {
        return Err(HarnessError::ZeroRanks.into());
    }
    let comm = SimComm::new(cfg.save_ranks, cfg.schedule);
    let serial = gen_mesh(&cfg.mesh)?;
    let mesh = distribute_serial(&comm, &serial, MESH_NAME, cfg.overlap)?;
    let space = FunctionSpace::new(&comm, &cfg.element.to_string(), &mesh, cfg.element)?;
    let func = interpolate_function(&comm, &mesh, space, FUNCTION_NAME, &cfg.field)?;
    let mut w = CheckpointWriter::new(Cursor::new(Vec::new()))?;
    save_mesh(&mut w, &comm, &mesh)?;
    save_function(&mut w, &comm, &mesh, &func)?;
    Ok((w.finish()?.into_inner(), mesh, func))
}

/// Comparison of loaded values against fresh interpolation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verification {
    pub max_abs_deviation: f64,
    /// DoFs whose bits differ.
    pub mismatched: usize,
    pub compared: usize,
}

pub fn verify_function(comm: &SimComm, mesh: &Mesh, func: &Function, field: &Field) -> Result<Verification, Error> {
    let fresh = interpolate_function(comm, mesh, func.space.clone(), &func.name, field)?;
    let per_rank = comm.phase(|r| {
        let mut v = Verification {
            max_abs_deviation: 0.0,
            mismatched: 0,
            compared: 0,
        };
        for (a, b) in func.values[r].iter().zip(&fresh.values[r]) {
            v.compared += 1;
            if a.to_bits() != b.to_bits() {
                v.mismatched += 1;
                let d = (a - b).abs();
                v.max_abs_deviation = v.max_abs_deviation.max(if d.is_nan() { f64::INFINITY } else { d });
            }
        }
        v
    });
    Ok(per_rank.into_iter().fold(
        Verification {
            max_abs_deviation: 0.0,
            mismatched: 0,
            compared: 0,
        },
        |acc, v| Verification {
            max_abs_deviation: acc.max_abs_deviation.max(v.max_abs_deviation),
            mismatched: acc.mismatched + v.mismatched,
            compared: acc.compared + v.compared,
        },
    ))
}

/// Broadcasting saved global numbers through the loaded point map gives
/// every rank's local-to-global array.
pub fn check_point_map(comm: &SimComm, mesh: &Mesh) -> Result<bool, Error> {
    let sf = mesh.point_to_slot_sf()?;
    let e = mesh.dist.numbering.num_global;
    let starts = chunk_starts(sf.root_sizes());
    if sf.root_sizes()
        != balanced_chunks(e, comm.size())
            .map_err(crate::checkpoint::CheckpointError::from)?
            .as_slice()
    {
        return Ok(false);
    }
    let roots: Vec<Vec<usize>> = (0..comm.size())
        .map(|r| (starts[r]..starts[r] + sf.nroots(r)).collect())
        .collect();
    let out = sf.broadcast(&roots)?;
    Ok(comm
        .phase(|r| {
            out[r].len() == mesh.dist.numbering.loc_g[r].len()
                && out[r]
                    .iter()
                    .zip(&mesh.dist.numbering.loc_g[r])
                    .all(|(a, &b)| *a == Some(b))
        })
        .into_iter()
        .all(|ok| ok))
}

/// Broadcasting `0..D` through the DoF map and grouping by global point
/// reproduces the saved offset of every point.
pub fn check_dof_map<R: Read + Seek>(
    r: &mut CheckpointReader<R>,
    comm: &SimComm,
    space: &str,
    mesh: &Mesh,
    loaded: &LoadedSection,
) -> Result<bool, Error> {
    let g = r.read_usize(&format!("/dms/{space}/section/g"))?;
    let off = r.read_usize(&format!("/dms/{space}/section/off"))?;
    let dof = r.read_usize(&format!("/dms/{space}/section/dof"))?;
    let saved: HashMap<usize, (usize, usize)> = g.iter().enumerate().map(|(i, &g)| (g, (off[i], dof[i]))).collect();
    let starts = chunk_starts(loaded.dof_sf.root_sizes());
    let roots: Vec<Vec<usize>> = (0..comm.size())
        .map(|rank| (starts[rank]..starts[rank] + loaded.dof_sf.nroots(rank)).collect())
        .collect();
    let out = loaded.dof_sf.broadcast(&roots)?;
    Ok(comm
        .phase(|rank| {
            let s = &loaded.sections[rank];
            (0..s.npoints()).all(|p| {
                let (o, d) = saved[&mesh.dist.numbering.loc_g[rank][p]];
                d == s.dof[p] && s.range(p).enumerate().all(|(i, j)| out[rank][j] == Some(o + i))
            })
        })
        .into_iter()
        .all(|ok| ok))
}

/// Outcome of one save/load cycle.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub mesh: String,
    pub element: String,
    pub field: String,
    pub save_ranks: usize,
    pub load_ranks: usize,
    pub global_points: usize,
    pub global_dofs: usize,
    pub loaded_points: Vec<usize>,
    pub loaded_dofs: Vec<usize>,
    pub file_bytes: usize,
    pub verification: Verification,
    pub point_map_ok: bool,
    pub dof_map_ok: bool,
    pub timings: Vec<(&'static str, f64)>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verification.mismatched == 0
            && self.verification.max_abs_deviation == 0.0
            && self.point_map_ok
            && self.dof_map_ok
    }

    /// One `key=value` per line.
    pub fn key_values(&self) -> String {
        let list = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let _ = writeln!(s, "mesh={}", self.mesh);
        let _ = writeln!(s, "element={}", self.element);
        let _ = writeln!(s, "field={}", self.field);
        let _ = writeln!(s, "save_ranks={}", self.save_ranks);
        let _ = writeln!(s, "load_ranks={}", self.load_ranks);
        let _ = writeln!(s, "global_points={}", self.global_points);
        let _ = writeln!(s, "global_dofs={}", self.global_dofs);
        let _ = writeln!(s, "loaded_points={}", list(&self.loaded_points));
        let _ = writeln!(s, "loaded_dofs={}", list(&self.loaded_dofs));
        let _ = writeln!(s, "file_bytes={}", self.file_bytes);
        let _ = writeln!(s, "compared_dofs={}", self.verification.compared);
        let _ = writeln!(s, "mismatched_dofs={}", self.verification.mismatched);
        let _ = writeln!(s, "max_abs_deviation={:e}", self.verification.max_abs_deviation);
        let _ = writeln!(s, "point_map_ok={}", self.point_map_ok);
        let _ = writeln!(s, "dof_map_ok={}", self.dof_map_ok);
        for (phase, secs) in &self.timings {
            let _ = writeln!(s, "time_{phase}_s={secs:.6}");
        }
        let _ = writeln!(s, "passed={}", self.passed());
        s
    }
}

/// Loads mesh and function from `bytes` on `cfg.load_ranks` ranks and checks
/// them against fresh interpolation.
pub fn load_and_verify(
    bytes: Vec<u8>,
    cfg: &RoundtripConfig,
    timings: &mut Vec<(&'static str, f64)>,
) -> Result<Report, Error> {
    let file_bytes = bytes.len();
    let comm = SimComm::new(cfg.load_ranks, cfg.schedule);
    let mut r = CheckpointReader::new(Cursor::new(bytes))?;

    let t = Instant::now();
    let mesh = load_mesh(&mut r, &comm, MESH_NAME, cfg.load_options())?;
    timings.push(("load_mesh", t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let space = cfg.element.to_string();
    let loaded = section_load(&mut r, &comm, &space, &mesh.dist, &mesh.point_to_slot_sf()?)?;
    let values = local_vector_load(&mut r, &comm, &space, FUNCTION_NAME, &loaded.dof_sf)?;
    timings.push(("load_function", t.elapsed().as_secs_f64()));

    let t = Instant::now();
    let func = Function {
        name: FUNCTION_NAME.into(),
        space: FunctionSpace {
            name: space.clone(),
            element: loaded.element,
            sections: loaded.sections.clone(),
        },
        values,
    };
    let verification = verify_function(&comm, &mesh, &func, &cfg.field)?;
    let point_map_ok = check_point_map(&comm, &mesh)?;
    let dof_map_ok = check_dof_map(&mut r, &comm, &space, &mesh, &loaded)?;
    timings.push(("verify", t.elapsed().as_secs_f64()));

    Ok(Report {
        mesh: cfg.mesh.to_string(),
        element: cfg.element.to_string(),
        field: cfg.field.to_string(),
        save_ranks: cfg.save_ranks,
        load_ranks: cfg.load_ranks,
        global_points: mesh.dist.numbering.num_global,
        global_dofs: loaded.global_dofs,
        loaded_points: mesh.dist.plexes.iter().map(|p| p.npoints()).collect(),
        loaded_dofs: loaded.sections.iter().map(|s| s.total).collect(),
        file_bytes,
        verification,
        point_map_ok,
        dof_map_ok,
        timings: std::mem::take(timings),
    })
}

/// Saves on `save_ranks`, loads on `load_ranks`, and verifies.
pub fn run_roundtrip(cfg: &RoundtripConfig) -> Result<Report, Error> {
    let t = Instant::now();
    let (bytes, _, _) = save_state(cfg)?;
    let mut timings = vec![("save", t.elapsed().as_secs_f64())];
    load_and_verify(bytes, cfg, &mut timings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::Family;

    #[test]
    fn serial_round_trip() {
        let cfg = RoundtripConfig::new(
            "unit-square:2".parse().unwrap(),
            LagrangeElement::new(Family::P, 2).unwrap(),
            "x^2 + y".parse().unwrap(),
            1,
            1,
        );
        let report = run_roundtrip(&cfg).unwrap();
        assert!(report.passed(), "{}", report.key_values());
    }
}
