mod common;

use std::io::Cursor;

use nmck::checkpoint::{distribution_view, topology_load, topology_view, CheckpointError, PlanSource};
use nmck::distribute::{greedy_bfs_partition, naive_topology_split};
use nmck::element::interpolate;
use nmck::harness::{gen_mesh, run_roundtrip, MeshSpec, RoundtripConfig, Shape};
use nmck::plex::{create_point_numbering, glue};
use nmck::section::{build_local_section, chunk_map, global_section_partition, local_to_global_section};
use nmck::{Adjacency, CheckpointReader, CheckpointWriter, DistPlex, Family, LagrangeElement, Plex, SimComm};

fn saved_fixture(with_distribution: bool) -> Vec<u8> {
    let comm = SimComm::sequential(2);
    let dist = common::two_rank_distribution();
    let mut w = CheckpointWriter::new(Cursor::new(Vec::new())).unwrap();
    topology_view(&mut w, &comm, "example", &dist).unwrap();
    if with_distribution {
        distribution_view(&mut w, &comm, "example", &dist).unwrap();
    }
    w.finish().unwrap().into_inner()
}

#[test]
fn ownership_splits_eight_and_seven() {
    let dist = common::two_rank_distribution();
    assert_eq!(dist.owned_points(0).len(), 8);
    assert_eq!(dist.owned_points(1).len(), 7);
    let comm = SimComm::sequential(2);
    assert_eq!(glue(&comm, &dist).unwrap().cones(), common::global_cones().as_slice());
}

#[test]
fn renumbering_gives_owned_ranges() {
    let comm = SimComm::sequential(2);
    let dist = common::two_rank_distribution();
    let numbering = create_point_numbering(&comm, &dist.plexes, &dist.point_sf).unwrap();
    let mut owned: Vec<usize> = (0..2)
        .flat_map(|r| dist.owned_points(r).into_iter().map(move |p| (r, p)))
        .map(|(r, p)| numbering.loc_g[r][p])
        .collect();
    assert_eq!(owned[..8], [0, 1, 2, 3, 4, 5, 6, 7]);
    owned.sort_unstable();
    assert_eq!(owned, (0..15).collect::<Vec<_>>());
}

#[test]
fn serial_numbering_is_identity() {
    let plex = gen_mesh(&MeshSpec::new(Shape::UnitSquare, 2)).unwrap().plex;
    let n = plex.npoints();
    let dist = DistPlex::serial(plex);
    assert_eq!(dist.numbering.loc_g[0], (0..n).collect::<Vec<_>>());
}

#[test]
fn chunk_map_inverse_is_identity_after_composition() {
    let comm = SimComm::sequential(2);
    let dist = common::two_rank_distribution();
    let gs = local_to_global_section(&comm, &common::p4_sections(&dist), &dist).unwrap();
    let (chunks, sf) = global_section_partition(&gs, 3).unwrap();
    let loaded: Vec<Vec<usize>> = chunks.iter().map(|c| c.g.clone()).collect();
    assert_eq!(loaded.iter().map(Vec::len).collect::<Vec<_>>(), [5, 5, 5]);
    assert_eq!(loaded[0], [1, 0, 4, 3, 12]);
    assert_eq!(sf, chunk_map(&loaded, 15).unwrap());
    let inv = sf.invert_bijective().unwrap();
    assert!(sf.compose(&inv).unwrap().sf.is_identity());
}

#[test]
fn exact_reload_restores_the_two_rank_numbering() {
    let mut r = CheckpointReader::new(Cursor::new(saved_fixture(true))).unwrap();
    let comm = SimComm::sequential(2);
    let d = topology_load(
        &mut r,
        &comm,
        "example",
        1,
        Adjacency::Facet,
        PlanSource::SavedDistribution,
    )
    .unwrap();
    let expect: Vec<Vec<usize>> = common::LOC_G.iter().map(|l| l.to_vec()).collect();
    assert_eq!(d.dist.numbering.loc_g, expect);
    assert_eq!(d.dist.owners(), common::owners());

    let comm3 = SimComm::sequential(3);
    let err = topology_load(
        &mut r,
        &comm3,
        "example",
        1,
        Adjacency::Facet,
        PlanSource::SavedDistribution,
    )
    .unwrap_err();
    assert!(matches!(err, CheckpointError::RankCountMismatch { .. }), "{err:?}");
}

#[test]
fn exact_reload_on_one_rank_is_trivial() {
    let plex = gen_mesh(&MeshSpec::new(Shape::UnitSquare, 2)).unwrap().plex;
    let comm = SimComm::sequential(1);
    let dist = DistPlex::serial(plex);
    let mut w = CheckpointWriter::new(Cursor::new(Vec::new())).unwrap();
    topology_view(&mut w, &comm, "m", &dist).unwrap();
    distribution_view(&mut w, &comm, "m", &dist).unwrap();
    let mut r = CheckpointReader::new(Cursor::new(w.finish().unwrap().into_inner())).unwrap();
    let d = topology_load(&mut r, &comm, "m", 1, Adjacency::Facet, PlanSource::SavedDistribution).unwrap();
    assert_eq!(d.dist.numbering, dist.numbering);
}

#[test]
fn three_rank_load_puts_one_cell_per_rank() {
    let global = Plex::new(common::global_cones(), common::global_depths()).unwrap();
    let plan = greedy_bfs_partition(&global, 3).unwrap();
    assert!(plan.parts.iter().all(|p| p.len() == 1));

    let comm = SimComm::sequential(3);
    let naive = naive_topology_split(&comm, &common::global_cones(), &common::global_depths()).unwrap();
    assert_eq!((0..3).map(|r| naive.dist.owned_points(r).len()).sum::<usize>(), 15);

    let mut r = CheckpointReader::new(Cursor::new(saved_fixture(false))).unwrap();
    let d = topology_load(&mut r, &comm, "example", 1, Adjacency::Facet, PlanSource::GreedyBfs).unwrap();
    // The middle cell sees both neighbours through their shared edges.
    assert_eq!(d.dist.numbering.loc_g[0], [0, 1, 3, 5, 4, 6, 9, 12, 8, 11, 10]);
    assert_eq!(
        d.dist.plexes.iter().map(Plex::npoints).collect::<Vec<_>>(),
        [11, 15, 11]
    );
}

#[test]
fn generated_mesh_counts() {
    let square = gen_mesh(&MeshSpec::new(Shape::UnitSquare, 1)).unwrap().plex;
    assert_eq!(
        (
            square.stratum(2).len(),
            square.stratum(1).len(),
            square.stratum(0).len()
        ),
        (2, 5, 4)
    );
    assert_eq!(
        gen_mesh(&"unit-square:8".parse().unwrap()).unwrap().plex.cells().len(),
        128
    );
    let interval = gen_mesh(&MeshSpec::new(Shape::Interval, 4)).unwrap().plex;
    let p1 = LagrangeElement::new(Family::P, 1).unwrap();
    assert_eq!(build_local_section(&interval, &p1.dofs_per_depth(1)).unwrap().total, 5);
}

#[test]
fn p1_values_are_vertex_coordinates() {
    let serial = gen_mesh(&MeshSpec::new(Shape::UnitSquare, 3)).unwrap();
    let p1 = LagrangeElement::new(Family::P, 1).unwrap();
    let s = build_local_section(&serial.plex, &p1.dofs_per_depth(2)).unwrap();
    let v = interpolate(&serial.plex, &serial.coords, &s, &p1, &|x| x[0]).unwrap();
    for p in serial.plex.stratum(0) {
        assert_eq!(v[s.range(p)], [serial.coords[p][0]]);
    }
    let p3 = LagrangeElement::new(Family::P, 3).unwrap();
    let s3 = build_local_section(&serial.plex, &p3.dofs_per_depth(2)).unwrap();
    let ones = interpolate(&serial.plex, &serial.coords, &s3, &p3, &|_| 1.0).unwrap();
    assert!(ones.iter().all(|&x| x == 1.0));
}

#[test]
fn roundtrip_examples() {
    for (mesh, k, field, n, m) in [
        ("unit-square:8", 4, "x^4 - 3*x^2*y + y^4", 2, 3),
        ("unit-cube:2", 2, "x + 2*y + 3*z", 3, 5),
        ("unit-square:8", 4, "x^4 - 3*x^2*y + y^4", 3, 7),
        ("interval:4", 1, "x", 1, 1),
    ] {
        let el = LagrangeElement::new(Family::P, k).unwrap();
        let cfg = RoundtripConfig::new(mesh.parse().unwrap(), el, field.parse().unwrap(), n, m);
        let report = run_roundtrip(&cfg).unwrap();
        assert!(report.passed(), "{}", report.key_values());
        assert_eq!(report.verification.max_abs_deviation, 0.0);
    }
}
