use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use eventb_alloy::alloy::print_module;
use eventb_alloy::checker::{check, Scope, DEFAULT_NODE_BUDGET};
use eventb_alloy::corpus;
use eventb_alloy::encoder::{encode, EncodeOptions};
use eventb_alloy::frontend::parse_machine;
use eventb_alloy_bench::typed;

fn pipeline(c: &mut Criterion) {
    let src = corpus::source("mutex").unwrap();
    let ann = corpus::annotation(src);
    c.bench_function("parse mutex", |b| b.iter(|| parse_machine(black_box(src)).unwrap()));

    let tm = typed("mutex");
    let opts = EncodeOptions::new(6, ann.scopes.clone());
    c.bench_function("encode and print mutex", |b| {
        b.iter(|| print_module(&encode(black_box(&tm), &opts).unwrap().module))
    });

    let scope = Scope::new(ann.scopes.clone(), 6);
    c.bench_function("check mutex depth 6", |b| {
        b.iter(|| check(black_box(&tm), &scope, DEFAULT_NODE_BUDGET).unwrap())
    });

    let mut group = c.benchmark_group("check corpus");
    group.sample_size(10);
    for (name, src) in corpus::SOURCES {
        let ann = corpus::annotation(src);
        let Some(depth) = ann.depth else { continue };
        let tm = typed(name);
        let scope = Scope::new(ann.scopes.clone(), depth);
        group.bench_function(*name, |b| b.iter(|| check(&tm, &scope, DEFAULT_NODE_BUDGET)));
    }
    group.finish();
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
