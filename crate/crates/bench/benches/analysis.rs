use criterion::{criterion_group, criterion_main, Criterion};
use geochoice::experiments::{run_experiment, ExperimentConfig};
use geochoice::geometry::{union_two_balls_volume, GeoParams};
use geochoice::hamilton::exact_hamiltonian;
use geochoice::processes::{run_one_choice, PairStream, StopRule};
use geochoice::spatial_graph::{is_k_connected, DynamicGeoGraph};

fn graph_at_tau(k: usize) -> DynamicGeoGraph {
    let params = GeoParams::new(2, 0.03).unwrap();
    let mut s = PairStream::new(2, 5, 0);
    run_one_choice(&mut s, params, &[k], StopRule::AfterTau1 { k, factor: 1.0 }).unwrap().graph
}

fn connectivity(c: &mut Criterion) {
    for k in [1, 2, 3] {
        let g = graph_at_tau(k);
        c.bench_function(&format!("is_k_connected_k{k}_n{}", g.len()), |b| b.iter(|| is_k_connected(&g, k)));
    }
}

fn exact(c: &mut Criterion) {
    // 24 points in a small square: dense enough to be Hamiltonian
    let params = GeoParams::new(2, 0.2).unwrap();
    let mut s = PairStream::new(2, 7, 0);
    let pts: Vec<Vec<f64>> = (0..24).map(|_| s.next_point().coords().iter().map(|x| 0.4 * x).collect()).collect();
    let g = DynamicGeoGraph::from_points(params, pts.iter().map(|p| p.as_slice()));
    c.bench_function("exact_hamiltonian_n24", |b| b.iter(|| exact_hamiltonian(&g).unwrap()));
}

fn quadrature(c: &mut Criterion) {
    let params = GeoParams::new(3, 0.05).unwrap();
    c.bench_function("union_two_balls_volume_d3", |b| b.iter(|| union_two_balls_volume(&params, 0.07).unwrap()));
}

fn batch(c: &mut Criterion) {
    let mut group = c.benchmark_group("experiment_batch");
    group.sample_size(10);
    for threads in [1, 8] {
        let cfg = ExperimentConfig {
            trials: 16,
            threads: Some(threads),
            ..ExperimentConfig::default()
        };
        group.bench_function(format!("one_choice_16_trials_{threads}_threads"), |b| {
            b.iter(|| run_experiment(&cfg).unwrap().len())
        });
    }
    group.finish();
}

criterion_group!(benches, connectivity, exact, quadrature, batch);
criterion_main!(benches);
