//! The three-triangle mesh used throughout the worked example, distributed
//! over two ranks.
#![allow(dead_code)]

use std::collections::HashMap;

use nmck::plex::point_sf_from_owners;
use nmck::section::LocalSection;
use nmck::{DistPlex, GlobalNumbering, Plex};

/// Cones by global number: cells 0..3, vertices 3..8, edges 8..15.
pub fn global_cones() -> Vec<Vec<usize>> {
    let mut cones = vec![Vec::new(); 15];
    cones[0] = vec![9, 12, 8];
    cones[1] = vec![12, 11, 10];
    cones[2] = vec![14, 11, 13];
    for (e, ab) in [
        (8, [3, 4]),
        (9, [3, 5]),
        (10, [4, 6]),
        (11, [5, 6]),
        (12, [4, 5]),
        (13, [7, 5]),
        (14, [6, 7]),
    ] {
        cones[e] = ab.to_vec();
    }
    cones
}

pub fn global_depths() -> Vec<usize> {
    (0..15)
        .map(|g| {
            if g < 3 {
                2
            } else if g < 8 {
                0
            } else {
                1
            }
        })
        .collect()
}

pub const LOC_G: [&[usize]; 2] = [&[1, 0, 4, 5, 6, 3, 12, 11, 10, 9, 8], &[2, 7, 6, 5, 14, 11, 13]];

pub fn owners() -> Vec<usize> {
    (0..15)
        .map(|g| usize::from([2, 5, 6, 7, 11, 13, 14].contains(&g)))
        .collect()
}

pub fn two_rank_distribution() -> DistPlex {
    let cones = global_cones();
    let depths = global_depths();
    let loc_g: Vec<Vec<usize>> = LOC_G.iter().map(|l| l.to_vec()).collect();
    let plexes = loc_g
        .iter()
        .map(|l| {
            let local: HashMap<usize, usize> = l.iter().enumerate().map(|(i, &g)| (g, i)).collect();
            let c = l.iter().map(|g| cones[*g].iter().map(|q| local[q]).collect()).collect();
            Plex::new(c, l.iter().map(|&g| depths[g]).collect()).unwrap()
        })
        .collect();
    let sf = point_sf_from_owners(&loc_g, &owners());
    DistPlex::new(plexes, sf, GlobalNumbering { loc_g, num_global: 15 }).unwrap()
}

/// Local traversal orders of the worked example, listed by global number.
pub const TRAVERSAL_G: [&[usize]; 2] = [&[0, 9, 12, 8, 3, 5, 4, 1, 11, 10, 6], &[2, 14, 13, 7, 11, 6, 5]];

/// P4 sections on the worked example with its traversal orders.
pub fn p4_sections(dist: &DistPlex) -> Vec<LocalSection> {
    (0..2)
        .map(|r| {
            let local = dist.numbering.index(r);
            let order: Vec<usize> = TRAVERSAL_G[r].iter().map(|g| local[g]).collect();
            let dof = dist.plexes[r].depths().iter().map(|&d| [1, 3, 3][d]).collect();
            LocalSection::with_traversal(dof, &order).unwrap()
        })
        .collect()
}

pub const G_P: [usize; 15] = [1, 0, 4, 3, 12, 10, 9, 8, 2, 7, 6, 5, 14, 11, 13];
pub const DOF_P: [usize; 15] = [3, 3, 1, 1, 3, 3, 3, 3, 3, 1, 1, 1, 3, 3, 3];
pub const OFF_P: [usize; 15] = [14, 0, 13, 12, 6, 17, 3, 9, 20, 29, 33, 34, 23, 30, 26];
