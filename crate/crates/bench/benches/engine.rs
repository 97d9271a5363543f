use criterion::{criterion_group, criterion_main, Criterion};
use morphounify_bench::{generation_specs, RAT_WORD, WORDS};
use morphounify_core::Engine;
use std::hint::black_box;

fn analysis(c: &mut Criterion) {
    let engine = Engine::demo();
    c.bench_function("analyze demo words", |b| {
        b.iter(|| {
            for w in WORDS {
                black_box(engine.analyze_word(w).unwrap());
            }
        })
    });
}

fn generation(c: &mut Criterion) {
    let engine = Engine::demo();
    let specs = generation_specs();
    c.bench_function("generate from stems", |b| {
        b.iter(|| {
            for s in &specs {
                black_box(engine.generate_word(s).unwrap());
            }
        })
    });
}

fn unification(c: &mut Criterion) {
    let engine = Engine::demo();
    c.bench_function("build and unify word", |b| {
        b.iter(|| {
            let mut s = engine.store();
            let x = s.build_str(RAT_WORD).unwrap();
            let y = s.build_str(RAT_WORD).unwrap();
            black_box(s.unify(x, y).unwrap());
        })
    });
}

criterion_group!(benches, analysis, generation, unification);
criterion_main!(benches);
