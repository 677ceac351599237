//! Brute-force oracles shared by the oracle tests and the acceptance suite.
//! Each `check_*` runs a fixed instance family and reports the first
//! disagreement.
#![allow(dead_code)]

use geochoice::geometry::{sample_uniform, torus_dist_sq, trial_rng};
use geochoice::hamilton::exact_hamiltonian;
use geochoice::processes::{HittingTracker, PairStream};
use geochoice::spatial_graph::{is_k_connected, is_k_connected_by_flow, DynamicGeoGraph, NeighborLists, SimpleGraph};
use geochoice::GeoParams;
use rand::Rng;

/// Connectivity of `g` minus the vertices in `removed`, by DFS.
pub fn connected_without(g: &dyn NeighborLists, removed: u32) -> bool {
    let n = g.num_vertices();
    let alive: Vec<usize> = (0..n).filter(|&v| removed >> v & 1 == 0).collect();
    if alive.is_empty() {
        return false;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![alive[0]];
    seen[alive[0]] = true;
    let mut count = 1;
    while let Some(v) = stack.pop() {
        for &u in g.neighbors(v) {
            let u = u as usize;
            if removed >> u & 1 == 0 && !seen[u] {
                seen[u] = true;
                count += 1;
                stack.push(u);
            }
        }
    }
    count == alive.len()
}

/// k-connectivity by trying every vertex subset of size below k.
pub fn k_connected_exhaustive(g: &dyn NeighborLists, k: usize) -> bool {
    let n = g.num_vertices();
    if n <= k {
        return false;
    }
    (0u32..1 << n)
        .filter(|s| (s.count_ones() as usize) < k)
        .all(|s| connected_without(g, s))
}

/// 3 to 12 points squeezed into a corner so that all cut sizes occur.
pub fn random_small_graph(seed: u64) -> SimpleGraph {
    let mut rng = trial_rng(seed, 0);
    let n = 3 + (seed as usize % 10);
    let r = 0.2 + 0.04 * (seed % 5) as f64;
    let pts: Vec<Vec<f64>> = (0..n)
        .map(|_| sample_uniform(&mut rng, 2).coords().iter().map(|x| x * 0.6).collect())
        .collect();
    SimpleGraph::geometric(&pts, r)
}

/// Both k-connectivity routes against exhaustive cuts, 50 graphs, k ≤ 3.
pub fn check_k_connectivity() -> Result<(), String> {
    for seed in 0..50u64 {
        let g = random_small_graph(seed);
        for k in 1..=3 {
            let want = k_connected_exhaustive(&g, k);
            if is_k_connected(&g, k) != want {
                return Err(format!("is_k_connected disagrees, seed {seed} k {k}"));
            }
            if is_k_connected_by_flow(&g, k) != want {
                return Err(format!("flow route disagrees, seed {seed} k {k}"));
            }
        }
    }
    Ok(())
}

/// Grid neighbour lists against an O(n²) scan, 20 instances up to n = 2000.
pub fn check_edge_sets() -> Result<(), String> {
    for seed in 0..20u64 {
        let n = 100 * (seed as usize + 1);
        let r = 0.02 + 0.005 * (seed % 6) as f64;
        let mut rng = trial_rng(seed, 1);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| sample_uniform(&mut rng, 2).coords().to_vec()).collect();
        let g = DynamicGeoGraph::from_points(GeoParams::new(2, r).unwrap(), pts.iter().map(|p| p.as_slice()));
        let brute = SimpleGraph::geometric(&pts, r);
        for v in 0..n {
            let mut a: Vec<u32> = g.neighbors(v).to_vec();
            let mut b: Vec<u32> = brute.neighbors(v).to_vec();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                return Err(format!("neighbours of {v} differ, seed {seed}"));
            }
        }
        if g.edge_count() != brute.edge_count() {
            return Err(format!("edge counts differ, seed {seed}"));
        }
    }
    Ok(())
}

/// Every cyclic order starting at vertex 0, checked edge by edge.
pub fn hamiltonian_by_permutations(g: &DynamicGeoGraph) -> bool {
    let n = g.len();
    if n < 3 {
        return false;
    }
    let adj = |a: usize, b: usize| g.neighbors(a).contains(&(b as u32));
    let mut rest: Vec<usize> = (1..n).collect();
    // Heap's algorithm over the vertices after 0
    let k = rest.len();
    let mut c = vec![0usize; k];
    let closes = |p: &[usize]| adj(0, p[0]) && p.windows(2).all(|w| adj(w[0], w[1])) && adj(p[k - 1], 0);
    if closes(&rest) {
        return true;
    }
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                rest.swap(0, i);
            } else {
                rest.swap(c[i], i);
            }
            if closes(&rest) {
                return true;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    false
}

/// The exact solver against permutations on 100 graphs with n ≤ 12.
/// Returns how many were Hamiltonian.
pub fn check_exact_hamiltonian() -> Result<usize, String> {
    let mut yes = 0;
    for seed in 0..100u64 {
        let mut rng = trial_rng(seed, 1);
        let n = rng.random_range(3..=12);
        let r = rng.random_range(0.15..0.24);
        let params = GeoParams::new(2, r).unwrap();
        // points in a 0.45-wide square so that both outcomes are common
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![0.45 * rng.random::<f64>(), 0.45 * rng.random::<f64>()]).collect();
        let g = DynamicGeoGraph::from_points(params, pts.iter().map(|p| p.as_slice()));
        let truth = hamiltonian_by_permutations(&g);
        match exact_hamiltonian(&g) {
            Ok(h) if h == truth => yes += usize::from(truth),
            other => return Err(format!("seed {seed}, n = {n}: exact gave {other:?}, permutations {truth}")),
        }
    }
    Ok(yes)
}

/// Sorted neighbour indices of every point, by brute force.
pub fn brute_neighbors(pts: &[Vec<f64>], r: f64) -> Vec<Vec<usize>> {
    let n = pts.len();
    let mut out = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if torus_dist_sq(&pts[i], &pts[j]) <= r * r {
                out[i].push(j);
                out[j].push(i);
            }
        }
    }
    for v in &mut out {
        v.sort_unstable();
    }
    out
}

/// Degree of a vertex among the first `t` points.
pub fn degree_at(nbrs: &[usize], t: usize) -> usize {
    nbrs.partition_point(|&u| u < t)
}

/// Incremental low-degree counts and hitting times against a replay from
/// brute-force neighbour lists after every insertion, 20 trials.
pub fn check_hitting_times() -> Result<(), String> {
    let params = GeoParams::new(2, 0.09).unwrap();
    let ks = [1usize, 2, 3];
    for trial in 0..20u64 {
        let n = 1200 + 90 * trial as usize;
        let mut s = PairStream::new(2, 2024, trial);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| s.next_point().coords().to_vec()).collect();
        let nbrs = brute_neighbors(&pts, params.r);

        let mut g = DynamicGeoGraph::new(params);
        let mut h = HittingTracker::new(&ks);
        let mut tau1 = [None; 3];
        let mut tau2 = [None; 3];
        for t in 1..=n {
            g.insert_coords(&pts[t - 1]);
            h.on_insert(&g, t - 1);
            for (j, &k) in ks.iter().enumerate() {
                let low = (0..t).filter(|&v| degree_at(&nbrs[v], t) < k).count();
                if h.low_count(k) != Some(low) {
                    return Err(format!("low count, trial {trial} t {t} k {k}"));
                }
                if tau1[j].is_none() && low == 0 {
                    tau1[j] = Some(t);
                }
                if t % 2 == 0 && tau2[j].is_none() {
                    let bad = (0..t / 2).any(|i| degree_at(&nbrs[2 * i], t) < k && degree_at(&nbrs[2 * i + 1], t) < k);
                    if !bad {
                        tau2[j] = Some(t / 2);
                    }
                }
                if h.tau1(k) != tau1[j] || h.tau2(k) != tau2[j] {
                    return Err(format!("hitting time, trial {trial} t {t} k {k}"));
                }
            }
        }
    }
    Ok(())
}
