use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use jqq::gen::{generate_instance, InstanceSpec, Shape};
use jqq::{quantile, Aggregate, ExecMode, Fraction, QuantileRequest};

fn modes(c: &mut Criterion) {
    let cases = [
        ("path-3 min", InstanceSpec::new(Shape::Path(3), 1 << 14, 1).agg(Aggregate::Min), Fraction::new(0, 1)),
        (
            "path-3 sum endpoints",
            InstanceSpec::new(Shape::Path(3), 2000, 2).domain(200).weighted(&["x0", "x3"]),
            Fraction::new(1, 10),
        ),
        ("product-3 sum", InstanceSpec::new(Shape::Product(3), 200, 3), Fraction::new(1, 10)),
    ];
    let mut group = c.benchmark_group("quantile");
    group.sample_size(10);
    for (name, spec, eps) in cases {
        let (q, d, rs) = generate_instance(&spec);
        for exec in [ExecMode::Sequential, ExecMode::Parallel] {
            let req = QuantileRequest::new(Fraction::new(1, 2)).epsilon(eps).exec(exec);
            group.bench_with_input(BenchmarkId::new(name, format!("{exec:?}")), &req, |b, req| {
                b.iter(|| quantile(&q, &d, &rs, req).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, modes);
criterion_main!(benches);
