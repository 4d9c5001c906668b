use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bfpdcch_core::link::{decode_dci, encode_dci, qpsk_soft_demod, RateMatcher};
use bfpdcch_core::AggregationLevel;

fn chain(c: &mut Criterion) {
    let matcher = RateMatcher::default();
    let payload: Vec<u8> = (0..31).map(|i| (i * 7 % 3 == 0) as u8).collect();
    let mut g = c.benchmark_group("dci_chain");
    for al in AggregationLevel::ALL {
        let symbols = encode_dci(&matcher, &payload, al).unwrap();
        let llr = qpsk_soft_demod(&symbols, 1.0);
        g.bench_with_input(BenchmarkId::new("encode", al.cces()), &al, |b, &al| {
            b.iter(|| encode_dci(&matcher, &payload, al).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("decode", al.cces()), &llr, |b, llr| {
            b.iter(|| decode_dci(&matcher, llr))
        });
    }
    g.finish();
}

criterion_group!(benches, chain);
criterion_main!(benches);
