use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dro_bench::{observe, system};
use dro_core::ambiguity::wasserstein_discrete;
use dro_core::fixtures::{random_instance, t1};
use dro_core::forward::{assemble, solve_forward};
use dro_core::inverse::recover;
use dro_core::{DiscreteDistribution, Engine, RecoveryConfig};

fn forward(c: &mut Criterion) {
    let mut g = c.benchmark_group("forward");
    for n in [10, 50, 100] {
        let (m, s) = system("ieee5.json", n);
        g.bench_with_input(BenchmarkId::new("ieee5", n), &n, |b, _| {
            b.iter(|| solve_forward(&assemble(&m, &s, 0.05).unwrap()).unwrap())
        });
    }
    g.finish();
}

fn inverse(c: &mut Criterion) {
    let mut g = c.benchmark_group("inverse");
    g.sample_size(10);
    let (m, s) = t1();
    let x0 = observe(&m, &s, 0.05);
    for engine in [Engine::Bisection, Engine::KktMilp] {
        let cfg = RecoveryConfig { epsilon_bar: 2.0, engine, ..Default::default() };
        g.bench_function(BenchmarkId::new("t1", engine), |b| b.iter(|| recover(&m, &s, &x0, &cfg).unwrap()));
    }
    let (m, s) = random_instance(7);
    let x0 = observe(&m, &s, 0.1);
    for engine in [Engine::Bisection, Engine::KktMilp] {
        let cfg = RecoveryConfig { engine, ..Default::default() };
        g.bench_function(BenchmarkId::new("random7", engine), |b| b.iter(|| recover(&m, &s, &x0, &cfg).unwrap()));
    }
    let (m, s) = system("ieee5.json", 25);
    let x0 = observe(&m, &s, 0.01);
    let cfg = RecoveryConfig::default();
    g.bench_function("ieee5_25/bisection", |b| b.iter(|| recover(&m, &s, &x0, &cfg).unwrap()));
    g.finish();
}

fn transport(c: &mut Criterion) {
    let (_, s) = system("ieee5.json", 40);
    let p = DiscreteDistribution::new(s.samples().iter().map(|x| (x.clone(), 1.0 / 40.0)).collect()).unwrap();
    let q = DiscreteDistribution::new(s.samples()[..20].iter().map(|x| (x.iter().map(|v| v * 0.5).collect(), 0.05)).collect())
        .unwrap();
    c.bench_function("wasserstein/40x20", |b| b.iter(|| wasserstein_discrete(&p, &q).unwrap()));
}

criterion_group!(benches, forward, inverse, transport);
criterion_main!(benches);
