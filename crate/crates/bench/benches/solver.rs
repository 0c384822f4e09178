use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tsdirac::grid::{dft_forward, dft_inverse};
use tsdirac::scheme::{build_plan, build_propagator_set, step, SchemeId};
use tsdirac::{build_t_propagator, build_w_propagator, build_what_propagator};
use tsdirac_bench::{setup_1d, setup_2d};

fn bench_transforms(c: &mut Criterion) {
    let mut group = c.benchmark_group("fft_round_trip");
    for m in [256usize, 1024, 4096] {
        let (_, _, field, _) = setup_1d(m);
        group.bench_with_input(BenchmarkId::new("1d", m), &field, |b, f| {
            b.iter(|| dft_inverse(&dft_forward(f)))
        });
    }
    let (_, _, field, _) = setup_2d(128);
    group.bench_with_input(BenchmarkId::new("2d", 128), &field, |b, f| {
        b.iter(|| dft_inverse(&dft_forward(f)))
    });
    group.finish();
}

fn bench_propagator_builds(c: &mut Criterion) {
    let (grid, samples, _, params) = setup_1d(1024);
    let mut group = c.benchmark_group("propagator_build_m1024");
    group.bench_function("w", |b| {
        b.iter(|| build_w_propagator(&samples, &params, 0.05).unwrap())
    });
    group.bench_function("t", |b| b.iter(|| build_t_propagator(&grid, &params, 0.05)));
    group.bench_function("what", |b| {
        b.iter(|| build_what_propagator(&samples, &params, 0.1).unwrap())
    });
    group.finish();
}

fn bench_scheme_steps(c: &mut Criterion) {
    let (_, samples, field, params) = setup_1d(1024);
    let mut group = c.benchmark_group("step_1d_m1024");
    for scheme in SchemeId::ALL {
        let plan = build_plan(scheme, 0.1, 1, true).unwrap();
        let props = build_propagator_set(&plan, &params, &samples).unwrap();
        group.bench_function(scheme.to_string(), |b| {
            let mut f = field.clone();
            b.iter(|| step(&plan, &props, &mut f))
        });
    }
    group.finish();

    let (_, samples2, field2, params2) = setup_2d(128);
    let mut group = c.benchmark_group("step_2d_m128");
    let plan = build_plan(SchemeId::S4c, 0.01, 2, false).unwrap();
    let props = build_propagator_set(&plan, &params2, &samples2).unwrap();
    group.bench_function("S4c", |b| {
        let mut f = field2.clone();
        b.iter(|| step(&plan, &props, &mut f))
    });
    group.finish();
}

fn bench_commutator(c: &mut Criterion) {
    use tsdirac::commutator::{
        apply_commutator, brute_force_commutator_2c, closed_form_commutator_2c,
    };
    let (_, samples, field, params) = setup_1d(128);
    let cf = closed_form_commutator_2c(&samples, &params).unwrap();
    let mut group = c.benchmark_group("commutator_m128");
    group.bench_function("closed_form", |b| {
        b.iter(|| apply_commutator(&cf, &field).unwrap())
    });
    group.bench_function("brute_force", |b| {
        b.iter(|| brute_force_commutator_2c(&samples, &params, &field).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_transforms,
    bench_propagator_builds,
    bench_scheme_steps,
    bench_commutator
);
criterion_main!(benches);
