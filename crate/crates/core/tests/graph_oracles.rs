//! Exhaustive and property-based oracles for the spatial graph queries.

use geochoice::geometry::{sample_uniform, trial_rng, GeoParams};
use geochoice::spatial_graph::{
    connected_components, find_separated_sets, is_k_connected,
    DynamicGeoGraph, NeighborLists, SimpleGraph,
};
use proptest::prelude::*;

mod common;
use common::random_small_graph;

#[test]
fn k_connectivity_matches_exhaustive_cuts() {
    common::check_k_connectivity().unwrap();
}

#[test]
fn k_connectivity_monotone_and_needs_min_degree() {
    for seed in 100..200u64 {
        let g = random_small_graph(seed);
        for k in 2..=4 {
            if is_k_connected(&g, k) {
                assert!(is_k_connected(&g, k - 1), "seed {seed} k {k}");
                assert!(g.min_degree().unwrap() >= k);
            }
        }
    }
}

#[test]
fn adding_a_well_attached_vertex_keeps_k_connectivity() {
    let mut checked = 0;
    for seed in 200..400u64 {
        let g = random_small_graph(seed);
        let n = g.num_vertices();
        let v = seed as usize % n;
        let rest: Vec<usize> = (0..n).filter(|&u| u != v).collect();
        let minus = SimpleGraph::induced(&g, &rest);
        for k in 1..=3 {
            if is_k_connected(&minus, k) && g.degree(v) >= k {
                assert!(is_k_connected(&g, k), "seed {seed} k {k}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 100, "only {checked} closure instances");
}

fn exhaustive_separated(g: &SimpleGraph, pool: &[usize], kappa: usize, max_size: usize) -> Vec<Vec<usize>> {
    let p = pool.len();
    let mut qualifying: Vec<u32> = Vec::new();
    for mask in 1u32..1 << p {
        if mask.count_ones() as usize > max_size {
            continue;
        }
        let members: Vec<usize> = (0..p).filter(|&i| mask >> i & 1 == 1).map(|i| pool[i]).collect();
        let mut outside: Vec<u32> = members
            .iter()
            .flat_map(|&v| g.neighbors(v).iter().copied())
            .filter(|&u| !members.contains(&(u as usize)))
            .collect();
        outside.sort_unstable();
        outside.dedup();
        if outside.len() <= kappa {
            qualifying.push(mask);
        }
    }
    let mut out: Vec<Vec<usize>> = qualifying
        .iter()
        .filter(|&&m| !qualifying.iter().any(|&o| o != m && o & m == o))
        .map(|&m| (0..p).filter(|&i| m >> i & 1 == 1).map(|i| pool[i]).collect())
        .collect();
    out.sort();
    out
}

#[test]
fn separated_sets_match_exhaustive_enumeration() {
    for seed in 0..60u64 {
        let mut rng = trial_rng(seed, 7);
        let n = 14;
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|_| sample_uniform(&mut rng, 2).coords().iter().map(|x| x * 0.7).collect())
            .collect();
        let g = SimpleGraph::geometric(&pts, 0.18);
        let pool: Vec<usize> = (0..10).collect();
        for kappa in 0..=2 {
            for max_size in [3, 10] {
                let got: Vec<Vec<usize>> = find_separated_sets(&g, &pool, kappa, max_size, None)
                    .unwrap()
                    .into_iter()
                    .map(|s| s.vertices)
                    .collect();
                assert_eq!(
                    got,
                    exhaustive_separated(&g, &pool, kappa, max_size),
                    "seed {seed} kappa {kappa} max {max_size}"
                );
            }
        }
    }
}

#[test]
fn edge_sets_match_quadratic_scan() {
    common::check_edge_sets().unwrap();
}

#[test]
fn components_match_incremental_bfs_count() {
    let mut rng = trial_rng(3, 3);
    let pts: Vec<Vec<f64>> = (0..1500).map(|_| sample_uniform(&mut rng, 2).coords().to_vec()).collect();
    let g = DynamicGeoGraph::from_points(GeoParams::new(2, 0.025).unwrap(), pts.iter().map(|p| p.as_slice()));
    let comps = connected_components(&g);
    let total: usize = comps.iter().map(Vec::len).sum();
    assert_eq!(total, 1500);
    for c in &comps {
        for &v in c {
            for &u in g.neighbors(v) {
                assert!(c.binary_search(&(u as usize)).is_ok());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn triangle_inequality(seed in any::<u64>(), d in 1usize..4) {
        let mut rng = trial_rng(seed, 0);
        let a = sample_uniform(&mut rng, d);
        let b = sample_uniform(&mut rng, d);
        let c = sample_uniform(&mut rng, d);
        let ab = geochoice::geometry::torus_distance(&a, &b).unwrap();
        let bc = geochoice::geometry::torus_distance(&b, &c).unwrap();
        let ac = geochoice::geometry::torus_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert!(ab <= (d as f64).sqrt() / 2.0 + 1e-12);
    }

    #[test]
    fn degree_sum_is_twice_edges(seed in any::<u64>(), n in 1usize..400) {
        let mut rng = trial_rng(seed, 0);
        let mut g = DynamicGeoGraph::new(GeoParams::new(2, 0.07).unwrap());
        for _ in 0..n {
            g.insert_coords(sample_uniform(&mut rng, 2).coords());
        }
        let sum: usize = (0..g.len()).map(|v| g.degree(v)).sum();
        prop_assert_eq!(sum, 2 * g.edge_count());
    }
}
