use criterion::{criterion_group, criterion_main, Criterion};
use hgauge::gauge::{curvatures, gauge_transform};
use hgauge::harness::{run_suites, SuiteConfig};
use hgauge::transgression as tg;
use hgauge_bench::workload;
use std::hint::black_box;

fn primitives(c: &mut Criterion) {
    let w = workload("adjoint:gl2", 1, 5, 7);
    let a = w.c0.a();
    c.bench_function("wedge A∧A", |b| b.iter(|| w.fa.wedge(black_box(a), black_box(a)).unwrap()));
    c.bench_function("d A", |b| b.iter(|| w.fa.d(black_box(a))));
    c.bench_function("curvature", |b| b.iter(|| curvatures(&w.fa, black_box(&w.c0)).unwrap()));
    c.bench_function("gauge transform", |b| b.iter(|| gauge_transform(&w.fa, black_box(&w.c0), &w.gauge).unwrap()));
}

fn transgression(c: &mut Criterion) {
    for n in [1, 2] {
        let w = workload("adjoint:gl3", n, 5, 11);
        let mut g = c.benchmark_group(format!("gl3 n={n}"));
        g.sample_size(10);
        g.bench_function("cs form", |b| b.iter(|| tg::cs_form(&w.fa, black_box(&w.c0), &w.pairing).unwrap()));
        g.bench_function("transgression", |b| {
            b.iter(|| tg::transgression_form(&w.fa, black_box(&w.c0), &w.c1, &w.pairing).unwrap())
        });
        g.bench_function("transgression via k01", |b| {
            b.iter(|| tg::transgression_form_k01(&w.fa, black_box(&w.c0), &w.c1, &w.pairing).unwrap())
        });
        g.bench_function("wzw term", |b| b.iter(|| tg::wzw_term(&w.fa, black_box(&w.gauge), &w.pairing).unwrap()));
        g.finish();
    }
}

fn suites(c: &mut Criterion) {
    let mut g = c.benchmark_group("suites");
    g.sample_size(10);
    let cfg = SuiteConfig { instances: 10, ..SuiteConfig::default() };
    g.bench_function("all suites sl2 n=1", |b| b.iter(|| run_suites(black_box(&cfg)).unwrap()));
    g.finish();
}

criterion_group!(benches, primitives, transgression, suites);
criterion_main!(benches);
