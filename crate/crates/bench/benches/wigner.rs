use std::hint::black_box;

use chirp_ladder::{LaguerreWigner, PhaseSpaceGrid};
use chirp_ladder_bench::packet;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

// Evaluates the Laguerre sum directly; a 65x65 grid is too coarse for the
// mass guard of `wigner_from_state` at the largest size.
fn laguerre_grid(c: &mut Criterion) {
    let mut group = c.benchmark_group("wigner_65x65");
    group.sample_size(10);
    for size in [10, 40, 150] {
        let state = packet(size, size as f64 / 2.0, size as f64 / 8.0);
        let grid = PhaseSpaceGrid::for_state(&state, 65).unwrap();
        group.bench_function(BenchmarkId::from_parameter(size), |b| {
            b.iter(|| {
                let w = LaguerreWigner::new(&state);
                let sum: f64 = grid
                    .ps()
                    .iter()
                    .flat_map(|&p| grid.xs().into_iter().map(move |x| (x, p)))
                    .map(|(x, p)| w.eval(x, p))
                    .sum();
                black_box(sum)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, laguerre_grid);
criterion_main!(benches);
