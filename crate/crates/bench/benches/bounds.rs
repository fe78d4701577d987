use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use entbound::ascent::{closest_product_state, ub_mixed, AscentConfig};
use entbound::bounds::{lower_bound, BoundOptions, LowerBoundMethod};
use entbound::states::ghz;
use entbound_bench::{horodecki, random_qutrit_pair, xx_ring};

fn lower_bounds(c: &mut Criterion) {
    let mut g = c.benchmark_group("lower_bound_3x3");
    g.sample_size(10).measurement_time(Duration::from_secs(20));
    let rho = random_qutrit_pair(0);
    let opts = BoundOptions::default();
    for m in [
        LowerBoundMethod::PptFidelity,
        LowerBoundMethod::KExtension(2),
        LowerBoundMethod::PurityReduced,
    ] {
        g.bench_function(m.tag(), |b| b.iter(|| lower_bound(&rho, m, &opts).unwrap()));
    }
    g.finish();
}

fn thermal_lb4(c: &mut Criterion) {
    let mut g = c.benchmark_group("lb4");
    g.sample_size(10).measurement_time(Duration::from_secs(40));
    let rho = xx_ring(0.7, -1.0);
    let opts = BoundOptions::default();
    g.bench_function("xx_ring", |b| {
        b.iter(|| lower_bound(&rho, LowerBoundMethod::PurityFull, &opts).unwrap())
    });
    g.finish();
}

fn ascent(c: &mut Criterion) {
    let mut g = c.benchmark_group("ascent");
    g.sample_size(10);
    let rho = horodecki(0.5);
    let cfg = AscentConfig {
        restarts: 1,
        ..AscentConfig::mixed()
    };
    g.bench_function("mixed_horodecki", |b| {
        b.iter(|| ub_mixed(&rho, &cfg).unwrap())
    });
    let psi = ghz(5).unwrap();
    g.bench_function("pure_ghz5", |b| {
        b.iter(|| closest_product_state(&psi, &AscentConfig::pure()).unwrap())
    });
    g.finish();
}

criterion_group!(benches, lower_bounds, thermal_lb4, ascent);
criterion_main!(benches);
