//! Hand-built instances that drive every stage-1 case, plus orientation and
//! stage-2 recount oracles.
//!
//! Two-component fixtures live on d = 2, r = 0.05, c = 3.5 (70 cubes per
//! axis, 𝒢̃ reach 1.5 cubes, 2c-blow-up of 7 cubes) with M = 2. Every cube
//! with Chebyshev distance ≤ 4 from (17,17) or (17,52) is left empty; the
//! inner 7×7 of each block is far, the outer layer is close. Sea points left
//! of x = 35 are partnered with points right of it, so no sea pair touches
//! ℬ.

use geochoice::offline_choice::{
    construct_offline, orient_balanced, validate_choice_set, Case, ConflictKind, OfflineConfig,
    OfflineConstruction, Stage,
};
use geochoice::spatial_graph::{DynamicGeoGraph, NeighborLists};
use geochoice::tessellation::Region;
use geochoice::GeoParams;
use proptest::prelude::*;

const M2: usize = 70;

fn in_block(x: usize, y: usize, cx: usize, cy: usize) -> bool {
    x.abs_diff(cx) <= 4 && y.abs_diff(cy) <= 4
}

fn at(cube: (usize, usize), off: (f64, f64)) -> Vec<f64> {
    vec![(cube.0 as f64 + off.0) / M2 as f64, (cube.1 as f64 + off.1) / M2 as f64]
}

/// Sea points of the two-block layout, already paired.
fn sea_pairs(blocks: &[(usize, usize)]) -> Vec<Vec<f64>> {
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for x in 0..M2 {
        for y in 0..M2 {
            if blocks.iter().any(|&(cx, cy)| in_block(x, y, cx, cy)) {
                continue;
            }
            for off in [(0.25, 0.25), (0.75, 0.75)] {
                if x < 35 {
                    left.push(at((x, y), off));
                } else {
                    right.push(at((x, y), off));
                }
            }
        }
    }
    assert!(right.len() >= left.len() && (right.len() - left.len()) % 2 == 0);
    let mut out = Vec::new();
    let extra = right.split_off(left.len());
    for (a, b) in left.into_iter().zip(right) {
        out.push(a);
        out.push(b);
    }
    out.extend(extra);
    out
}

/// Sea spots right of x = 35, away from every blow-up, used as partners.
fn spare(i: usize) -> Vec<f64> {
    at((50, 30 + i), (0.5, 0.5))
}

const A: (usize, usize) = (17, 17);
const B: (usize, usize) = (17, 52);

fn a_sea() -> Vec<f64> {
    at((17, 25), (0.5, 0.5))
}
fn b_sea() -> Vec<f64> {
    at((17, 60), (0.5, 0.5))
}
/// Far point next to the close layer, adjacent to many sea points.
fn far_open(block: (usize, usize)) -> Vec<f64> {
    at((block.0 - 3, block.1 - 3), (0.1, 0.1))
}
/// Two-point clique isolated from everything at the block centre.
fn far_clique(block: (usize, usize)) -> [Vec<f64>; 2] {
    [at(block, (0.4, 0.5)), at(block, (0.6, 0.5))]
}
fn far_lonely(block: (usize, usize)) -> Vec<f64> {
    at(block, (0.5, 0.5))
}

struct Built {
    graph: DynamicGeoGraph,
    cons: OfflineConstruction,
    /// Vertex ids of the special pair, when present.
    special: Option<(usize, usize)>,
}

fn build(blocks: &[(usize, usize)], special: Option<(Vec<f64>, Vec<f64>)>, extras: Vec<Vec<f64>>, k: usize) -> Built {
    let params = GeoParams::new(2, 0.05).unwrap();
    let mut pts = sea_pairs(blocks);
    let special_ids = special.map(|(y, ybar)| {
        let id = pts.len();
        pts.push(y);
        pts.push(ybar);
        (id, id + 1)
    });
    for (i, e) in extras.into_iter().enumerate() {
        pts.push(e);
        pts.push(spare(i));
    }
    let graph = DynamicGeoGraph::from_points(params, pts.iter().map(|p| p.as_slice()));
    let cfg = OfflineConfig { k, c: 3.5, threshold: 2 };
    let cons = construct_offline(&graph, &cfg).unwrap();
    Built {
        graph,
        cons,
        special: special_ids,
    }
}

fn case_of(b: &Built, block: (usize, usize)) -> Option<Case> {
    let lat_cube = block.0 + M2 * block.1;
    b.cons
        .stage1
        .plans
        .iter()
        .find(|p| p.far_cubes.contains(&lat_cube))
        .and_then(|p| p.case)
}

fn assert_valid(b: &Built) {
    let rep = validate_choice_set(&b.cons.table, b.graph.len() / 2);
    assert!(rep.is_valid(), "violations: {:?}", rep.violations);
    assert_eq!(b.cons.stage2.max_imbalance.min(1), b.cons.stage2.max_imbalance);
}

#[test]
fn layout_has_the_expected_regions() {
    let b = build(&[A, B], None, vec![], 1);
    let regions = b.cons.labels.regions.as_ref().unwrap();
    let id = |x: usize, y: usize| x + M2 * y;
    assert_eq!(regions[id(17, 17)], Region::Far);
    assert_eq!(regions[id(14, 14)], Region::Far);
    assert_eq!(regions[id(13, 13)], Region::Close);
    assert_eq!(regions[id(12, 12)], Region::Sea);
    assert_eq!(b.cons.stage1.plans.len(), 2);
    assert!(b.cons.stage1.plans.iter().all(|p| p.far_cubes.len() == 49));
}

#[test]
fn f1_far_points_give_way_to_partners() {
    let [c0, c1] = far_clique(A);
    let b = build(&[A], None, vec![c0, c1], 1);
    assert_eq!(case_of(&b, A), Some(Case::F1));
    let n = b.graph.len();
    // the clique is the last two extras; their partners are kept instead
    for v in [n - 4, n - 2] {
        assert!(!b.cons.table.member[v]);
        assert!(b.cons.table.member[v + 1]);
        assert_eq!(b.cons.table.stage[v + 1], Stage::Cs1(Case::F1));
    }
    assert!(b.cons.stage1.conflicts.is_empty());
    assert_valid(&b);
}

#[test]
fn f3_keeps_y_and_drops_its_partner() {
    let b = build(&[A, B], Some((a_sea(), b_sea())), vec![], 1);
    assert_eq!(case_of(&b, A), Some(Case::F3));
    assert_eq!(case_of(&b, B), None, "B is handled jointly with A");
    let (y, ybar) = b.special.unwrap();
    assert!(b.cons.table.member[y] && !b.cons.table.member[ybar]);
    assert_eq!(b.cons.stage1.plans[0].p_set, vec![y]);
    assert!(b.cons.stage1.conflicts.is_empty());
    assert_valid(&b);
}

#[test]
fn f4_far_partner_gives_way() {
    let b = build(&[A, B], Some((a_sea(), far_open(B))), vec![], 1);
    assert_eq!(case_of(&b, A), Some(Case::F4));
    let (y, ybar) = b.special.unwrap();
    assert!(b.cons.table.member[y] && !b.cons.table.member[ybar]);
    assert_valid(&b);
}

#[test]
fn f5_without_separated_sets() {
    let b = build(&[A, B], Some((far_open(A), far_open(B))), vec![], 1);
    assert_eq!(case_of(&b, A), Some(Case::F5));
    let (y, ybar) = b.special.unwrap();
    assert!(!b.cons.table.member[y] && b.cons.table.member[ybar]);
    assert!(b.cons.stage1.conflicts.is_empty());
    assert_valid(&b);
}

#[test]
fn f6_one_side_separated() {
    let [c0, c1] = far_clique(B);
    let b = build(&[A, B], Some((far_open(A), far_open(B))), vec![c0, c1], 1);
    assert_eq!(case_of(&b, A), Some(Case::F6));
    let (y, ybar) = b.special.unwrap();
    // F(B) holds the separated clique, so B's far points give way
    assert!(b.cons.table.member[y] && !b.cons.table.member[ybar]);
    let n = b.graph.len();
    assert!(!b.cons.table.member[n - 4] && !b.cons.table.member[n - 2]);
    assert!(b.cons.stage1.conflicts.is_empty());
    assert_valid(&b);
}

#[test]
fn f7_typical_instance_deletes_only_the_cliques() {
    let [a0, a1] = far_clique(A);
    let [b0, b1] = far_clique(B);
    let b = build(&[A, B], Some((far_open(A), far_open(B))), vec![a0, a1, b0, b1], 1);
    assert_eq!(case_of(&b, A), Some(Case::F7));
    let (y, ybar) = b.special.unwrap();
    let plan = &b.cons.stage1.plans[0];
    let n = b.graph.len();
    assert_eq!(plan.deleted, vec![n - 8, n - 6, n - 4, n - 2]);
    assert!(!(plan.deleted.contains(&y) && plan.deleted.contains(&ybar)));
    // neither Y nor Ȳ was deleted, so the rule demands both: routed to the fallback
    let conflicts = &b.cons.stage1.conflicts;
    assert_eq!(conflicts.len(), 1);
    assert_eq!(conflicts[0].pair, y / 2);
    assert_eq!(conflicts[0].kind, ConflictKind::DoubleDemand);
    assert_valid(&b);
}

#[test]
fn f7_atypical_instance_routes_to_the_fallback() {
    let b = build(&[A, B], Some((far_lonely(A), far_lonely(B))), vec![], 1);
    assert_eq!(case_of(&b, A), Some(Case::F7));
    let (y, ybar) = b.special.unwrap();
    let plan = &b.cons.stage1.plans[0];
    assert!(plan.deleted.contains(&y) && plan.deleted.contains(&ybar));
    assert_eq!(b.cons.stage1.conflicts.len(), 1);
    assert_eq!(b.cons.table.stage[b.cons.stage1.conflicts[0].kept], Stage::Fallback);
    assert_valid(&b);
}

#[test]
fn multiple_partner_vertices_are_processed_alone() {
    // two special pairs from A into B
    let params = GeoParams::new(2, 0.05).unwrap();
    let mut pts = sea_pairs(&[A, B]);
    pts.push(a_sea());
    pts.push(b_sea());
    pts.push(at((18, 25), (0.5, 0.5)));
    pts.push(at((18, 60), (0.5, 0.5)));
    let graph = DynamicGeoGraph::from_points(params, pts.iter().map(|p| p.as_slice()));
    let cons = construct_offline(&graph, &OfflineConfig { k: 1, c: 3.5, threshold: 2 }).unwrap();
    assert_eq!(cons.stage1.plans[0].p_set.len(), 2);
    assert_eq!(cons.stage1.plans[0].case, Some(Case::F1));
    assert_eq!(cons.stage1.conflicts.len(), 2);
    assert!(cons.stage1.conflicts.iter().all(|c| c.kind == ConflictKind::MultiplePartners));
    assert!(validate_choice_set(&cons.table, graph.len() / 2).is_valid());
    let mut audit = Vec::new();
    cons.write_audit_jsonl(&mut audit).unwrap();
    assert_eq!(String::from_utf8(audit).unwrap().lines().count(), 2 + 2);
}

/// d = 1, r = 0.02, c = 12.5: 625 cubes, 𝒢̃ reach 11.5 cubes. Sea cubes
/// hold one point; cubes 89..=111 are empty apart from the fixture, so cube
/// 100 alone is far and its diameter 0.0016 is below r/10.
fn build_1d(far: &[f64], k: usize) -> (DynamicGeoGraph, OfflineConstruction) {
    let params = GeoParams::new(1, 0.02).unwrap();
    let m = 625usize;
    let sea: Vec<usize> = (0..m).filter(|q| !(89..=111).contains(q)).collect();
    // sea point positions: cube 88 at its left edge and 112 at its right
    // edge so the far point sees exactly those two sea points
    let pos = |q: usize| -> f64 {
        let off = match q {
            88 => 0.01,
            112 => 0.99,
            _ => 0.5,
        };
        (q as f64 + off) / m as f64
    };
    let half = sea.len() / 2;
    let mut pts: Vec<Vec<f64>> = Vec::new();
    for i in 0..half {
        pts.push(vec![pos(sea[i])]);
        pts.push(vec![pos(sea[i + half])]);
    }
    if sea.len() % 2 == 1 {
        pts.push(vec![pos(sea[2 * half])]);
        pts.push(vec![(400.7) / m as f64]);
    }
    for &x in far {
        pts.push(vec![x]);
        pts.push(vec![(430.5) / m as f64]);
    }
    let graph = DynamicGeoGraph::from_points(params, pts.iter().map(|p| p.as_slice()));
    let cons = construct_offline(&graph, &OfflineConfig { k, c: 12.5, threshold: 1 }).unwrap();
    (graph, cons)
}

#[test]
fn f2_without_far_points_keeps_all_of_the_blow_up() {
    let (graph, cons) = build_1d(&[], 1);
    assert_eq!(cons.stage1.plans.len(), 1);
    let plan = &cons.stage1.plans[0];
    assert_eq!(plan.far_cubes, vec![100]);
    assert!(plan.far_diameter.unwrap() < 0.002);
    assert_eq!(plan.case, Some(Case::F2));
    assert!(plan.deleted.is_empty());
    for v in 0..graph.len() {
        if cons.stage1.in_b[v] {
            assert!(cons.table.member[v], "vertex {v} of the blow-up must be kept");
        }
    }
    assert!(validate_choice_set(&cons.table, graph.len() / 2).is_valid());
}

#[test]
fn f2_deletes_a_separated_far_point() {
    let x = 100.5 / 625.0;
    let (graph, cons) = build_1d(&[x], 3);
    let plan = &cons.stage1.plans[0];
    assert_eq!(plan.case, Some(Case::F2));
    let v = graph.len() - 2;
    assert_eq!(graph.degree(v), 2);
    assert_eq!(plan.deleted, vec![v]);
    assert!(!cons.table.member[v] && cons.table.member[v + 1]);
    // with k = 1 the same point is not separated
    let (_, cons1) = build_1d(&[x], 1);
    assert!(cons1.stage1.plans[0].deleted.is_empty());
    assert!(validate_choice_set(&cons.table, graph.len() / 2).is_valid());
}

#[test]
fn stage2_cubes_keep_about_half() {
    use rand::Rng;
    let params = GeoParams::new(2, 0.05).unwrap();
    for seed in 0..3u64 {
        let mut rng = geochoice::geometry::trial_rng(seed, 0);
        let pts: Vec<Vec<f64>> = (0..30_000).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let graph = DynamicGeoGraph::from_points(params, pts.iter().map(|p| p.as_slice()));
        let cons = construct_offline(&graph, &OfflineConfig { k: 1, c: 3.5, threshold: 2 }).unwrap();
        assert!(cons.stage2.max_imbalance <= 1);
        let t = &cons.table;
        let mut count = vec![0usize; cons.tess.cube_count()];
        let mut kept = vec![0usize; cons.tess.cube_count()];
        for v in 0..graph.len() {
            if !cons.stage1.in_b[v] && !cons.stage1.in_b[v ^ 1] {
                count[t.cube[v]] += 1;
                kept[t.cube[v]] += usize::from(t.member[v]);
            }
        }
        for q in 0..count.len() {
            if count[q] > 0 {
                assert!(kept[q] >= (count[q] - 1) / 2, "cube {q}: {} of {}", kept[q], count[q]);
            }
        }
        assert!(validate_choice_set(t, graph.len() / 2).is_valid());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn orientation_is_balanced(n in 1usize..50, raw in prop::collection::vec((0usize..50, 0usize..50), 0..200)) {
        let edges: Vec<(usize, usize)> = raw.into_iter().map(|(a, b)| (a % n, b % n)).collect();
        let o = orient_balanced(n, &edges);
        let (out, inn) = o.degrees(n, &edges);
        for v in 0..n {
            prop_assert!(out[v].abs_diff(inn[v]) <= 1);
            let deg = edges.iter().map(|&(a, b)| usize::from(a == v) + usize::from(b == v)).sum::<usize>();
            prop_assert_eq!(out[v] + inn[v], deg);
        }
        // determinism
        prop_assert_eq!(orient_balanced(n, &edges), o);
    }
}
