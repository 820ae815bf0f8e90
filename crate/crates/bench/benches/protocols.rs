use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use qmac_bench::{random_stream, rng};
use qmac_core::channel::run_two_sum;
use qmac_core::protocols::{qsk_prod_stream, qsk_sum};
use qmac_core::verify::{verify_exhaustive, Prod, Sum, DEFAULT_LIMIT};
use qmac_core::{build_field, Session, SimMode};

fn two_sum(c: &mut Criterion) {
    let mut g = c.benchmark_group("two_sum");
    for d in [2u32, 5, 9] {
        g.bench_with_input(BenchmarkId::new("quantum", d), &d, |b, &d| {
            b.iter(|| run_two_sum(d, SimMode::QuantumVerified, black_box((1, d - 1)), black_box((d - 1, 1))).unwrap())
        });
    }
    g.finish();
}

fn streams(c: &mut Criterion) {
    let mut g = c.benchmark_group("stream_1024");
    let w = random_stream(1, 5, 1024, 7);
    for (name, mode) in [("sum_abstract", SimMode::Abstract), ("sum_quantum", SimMode::QuantumVerified)] {
        g.bench_function(name, |b| {
            b.iter(|| {
                let mut s = Session::new(mode);
                qsk_sum(&mut s, 7, 5, &w, &mut rng(2), false).unwrap()
            })
        });
    }
    let field = build_field(3, 2).unwrap();
    let w = random_stream(3, 4, 1024, 9);
    g.bench_function("prod_gf9", |b| {
        b.iter(|| qsk_prod_stream(&mut Session::default(), &field, 4, &w, &mut rng(4)).unwrap())
    });
    g.finish();
}

fn exhaustive(c: &mut Criterion) {
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    g.bench_function("sum_d3_k4", |b| b.iter(|| verify_exhaustive(&Sum::new(3, 4), DEFAULT_LIMIT).unwrap()));
    g.bench_function("sum_d3_k5", |b| b.iter(|| verify_exhaustive(&Sum::new(3, 5), DEFAULT_LIMIT).unwrap()));
    let gf4 = build_field(2, 2).unwrap();
    g.bench_function("prod_gf4_k3", |b| b.iter(|| verify_exhaustive(&Prod::new(gf4.clone(), 3), DEFAULT_LIMIT).unwrap()));
    g.finish();
}

criterion_group!(benches, two_sum, streams, exhaustive);
criterion_main!(benches);
