use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use subdioph::angles::PrecisionContext;
use subdioph::enumeration::{enumerate_candidates, EnumSpec, Strategy};
use subdioph::estimation::{scan_records, ScanOptions, Target};
use subdioph::exec::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn golden_scan(c: &mut Criterion) {
    let ctx = PrecisionContext::default();
    let target = Target::golden_line(200, &ctx).expect("target");
    let mut group = c.benchmark_group("golden-line records");
    group.sample_size(10);
    for h in [1_000_000u64, 10_000_000] {
        let spec = EnumSpec::new(2, 1, h, Strategy::ExactLines).expect("spec");
        for (name, exec) in MODES {
            let opts = ScanOptions { ctx, exec };
            group.bench_with_input(BenchmarkId::new(name, h), &spec, |b, spec| {
                b.iter(|| scan_records(&target, spec, 1, &opts).expect("scan").records.len())
            });
        }
    }
    group.finish();
}

fn plane_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("planes in R^4");
    group.sample_size(10);
    let spec = EnumSpec::new(4, 2, 400, Strategy::ExactPluecker).expect("spec");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| enumerate_candidates(&spec, exec).expect("enumerate").len()));
    }
    group.finish();
}

criterion_group!(benches, golden_scan, plane_enumeration);
criterion_main!(benches);
