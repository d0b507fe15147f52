//! Compares the parallel batch path against the sequential baseline on
//! the two sweep-shaped workloads: eigenvalue shots over a ratio range
//! and short dipole runs over a ratio range.
//!
//! With `--no-default-features` the parallel path degrades to the
//! sequential one and the two groups should coincide.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use seeplab_core::batch::{map_collect, map_collect_seq};
use seeplab_core::dipole::{run_dipole, DipoleConfig};
use seeplab_core::params::PhysicalParams;
use seeplab_core::similarity::shoot_beta;

fn ratios(n: usize) -> Vec<f64> {
    (0..n).map(|i| 0.3 + 0.7 * i as f64 / (n - 1) as f64).collect()
}

fn eigen_case(ratio: f64) -> f64 {
    shoot_beta(ratio, 1e-6).expect("shooting converges").beta
}

fn dipole_case(ratio: f64) -> f64 {
    let mut cfg = DipoleConfig::new(PhysicalParams::from_ratio(ratio).expect("valid ratio"));
    cfg.grid_n = 100;
    cfg.t_end = 1.0;
    cfg.series_len = 10;
    run_dipole(&cfg).expect("run succeeds").final_state.x_r
}

fn bench_sweeps(c: &mut Criterion) {
    let cases = ratios(8);

    let mut group = c.benchmark_group("eigen_sweep");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", cases.len()), &cases, |b, rs| {
        b.iter(|| map_collect(rs, |&r| eigen_case(r)))
    });
    group.bench_with_input(
        BenchmarkId::new("sequential", cases.len()),
        &cases,
        |b, rs| b.iter(|| map_collect_seq(rs, |&r| eigen_case(r))),
    );
    group.finish();

    let mut group = c.benchmark_group("dipole_sweep");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::new("parallel", cases.len()), &cases, |b, rs| {
        b.iter(|| map_collect(rs, |&r| dipole_case(r)))
    });
    group.bench_with_input(
        BenchmarkId::new("sequential", cases.len()),
        &cases,
        |b, rs| b.iter(|| map_collect_seq(rs, |&r| dipole_case(r))),
    );
    group.finish();
}

criterion_group!(benches, bench_sweeps);
criterion_main!(benches);
