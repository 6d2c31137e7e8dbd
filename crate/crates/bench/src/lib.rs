//! Fixed workloads shared by the benchmarks.

use nmck::harness::{save_state, RoundtripConfig};
use nmck::{Family, LagrangeElement, RemotePoint, StarForest};

pub const FIELD: &str = "x^4 - 3*x^2*y + y^4";

pub fn config(mesh: &str, degree: usize, save_ranks: usize, load_ranks: usize) -> RoundtripConfig {
    let el = LagrangeElement::new(Family::P, degree).expect("degree in range");
    RoundtripConfig::new(
        mesh.parse().expect("valid mesh spec"),
        el,
        FIELD.parse().expect("valid field"),
        save_ranks,
        load_ranks,
    )
}

/// Checkpoint bytes for `config(mesh, degree, save_ranks, 1)`.
pub fn saved(mesh: &str, degree: usize, save_ranks: usize) -> Vec<u8> {
    save_state(&config(mesh, degree, save_ranks, 1))
        .expect("save succeeds")
        .0
}

/// A forest over `nranks` ranks with `n` leaves each, every leaf pointing at
/// a root on the next rank in a shuffled but deterministic order.
pub fn ring_sf(nranks: usize, n: usize) -> StarForest {
    let leaves = (0..nranks)
        .map(|r| {
            (0..n)
                .map(|i| (i, RemotePoint::new((r + 1) % nranks, (i * 7919 + r) % n)))
                .collect()
        })
        .collect();
    StarForest::new(vec![n; nranks], vec![n; nranks], leaves).expect("valid forest")
}
