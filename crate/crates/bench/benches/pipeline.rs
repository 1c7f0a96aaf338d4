use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;
use visdsl_bench::{generated, teaser, Workload};
use visdsl_core::emit::HtmlOptions;
use visdsl_core::{emit_html, emit_ir_json, parse, realize, verify, RealizeOptions};

fn stages(c: &mut Criterion, label: &str, work: &[Workload]) {
    let programs: Vec<_> = work.iter().map(|w| parse(&w.text).unwrap()).collect();
    let specs: Vec<_> = programs
        .iter()
        .zip(work)
        .map(|(p, w)| verify(p, &w.metas).unwrap())
        .collect();
    let irs: Vec<_> = specs
        .iter()
        .map(|s| realize(s, &RealizeOptions::default()))
        .collect();

    let mut group = c.benchmark_group(label);
    group.bench_function("parse", |b| {
        b.iter(|| {
            work.iter()
                .map(|w| parse(black_box(&w.text)).unwrap())
                .collect::<Vec<_>>()
        })
    });
    group.bench_function("verify", |b| {
        b.iter(|| {
            programs
                .iter()
                .zip(work)
                .map(|(p, w)| verify(black_box(p), &w.metas).unwrap())
                .collect::<Vec<_>>()
        })
    });
    group.bench_function("realize", |b| {
        b.iter(|| {
            specs
                .iter()
                .map(|s| realize(black_box(s), &RealizeOptions::default()))
                .collect::<Vec<_>>()
        })
    });
    group.bench_function("emit_ir_json", |b| {
        b.iter(|| {
            irs.iter()
                .map(|ir| emit_ir_json(black_box(ir)).len())
                .sum::<usize>()
        })
    });
    group.bench_function("emit_html", |b| {
        b.iter_batched(
            HtmlOptions::default,
            |options| {
                irs.iter()
                    .zip(work)
                    .map(|(ir, w)| {
                        emit_html(black_box(ir), &w.payloads, &options)
                            .unwrap()
                            .html
                            .len()
                    })
                    .sum::<usize>()
            },
            BatchSize::SmallInput,
        )
    });
    group.finish();
}

fn generated_programs(c: &mut Criterion) {
    stages(c, "generated_x100", &generated(100));
}

fn teaser_program(c: &mut Criterion) {
    stages(c, "teaser_33", &[teaser(33)]);
}

criterion_group!(benches, generated_programs, teaser_program);
criterion_main!(benches);
