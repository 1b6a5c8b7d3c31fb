use bpc_bench::synthetic_model;
use bpc_core::model::LogDensity;
use bpc_core::sampler::{chain_rng, Nuts, PhasePoint};
use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

fn gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_density_grad");
    for spec in ["bt", "davidson-ordereffect"] {
        for n in [500, 5000] {
            let model = synthetic_model(10, n, spec, 1);
            let theta = vec![0.1; model.dim()];
            let mut grad = vec![0.0; model.dim()];
            group.bench_with_input(BenchmarkId::new(spec, n), &n, |b, _| {
                b.iter(|| model.log_density_grad(black_box(&theta), &mut grad))
            });
        }
    }
    group.finish();
}

fn transitions(c: &mut Criterion) {
    let model = synthetic_model(10, 2000, "bt", 2);
    let nuts = Nuts { density: &model, step_size: 0.2, inv_mass: vec![1.0; model.dim()], max_treedepth: 10 };
    let mut rng = chain_rng(0, 0);
    let mut point = PhasePoint::new(&model, vec![0.0; model.dim()]);
    c.bench_function("nuts_transition/bt_10x2000", |b| b.iter(|| nuts.transition(&mut rng, &mut point)));
}

criterion_group!(benches, gradient, transitions);
criterion_main!(benches);
