// SPDX-License-Identifier: Apache-2.0

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skelfuzz::fuzzloop::{mutate_once, MutationParams};
use skelfuzz::skeleton::skeletonize;
use skelfuzz::smtlib::{check_script, parse_script};
use skelfuzz::termgen::{builtin_grammars, generate};

const SEED: &str = "(set-logic ALL)
(declare-fun s () (Seq Int))
(declare-fun x () Int)
(declare-fun str0 () String)
(assert (exists ((f Int)) (distinct (seq.len (seq.rev s)) (seq.nth (as seq.empty (Seq Int)) (div 0 0)))))
(assert (or (= x 0) (< x 1) (and (> (str.len str0) x) (str.prefixof \"ab\" str0))))
(assert (let ((y (+ x 2))) (=> (> y 3) (= (mod y 3) 1))))
(check-sat)";

fn parse(c: &mut Criterion) {
    c.bench_function("parse_script", |b| b.iter(|| parse_script(black_box(SEED)).unwrap()));
    let s = parse_script(SEED).unwrap();
    c.bench_function("check_script", |b| b.iter(|| check_script(black_box(&s)).unwrap()));
}

fn termgen(c: &mut Criterion) {
    let gens = builtin_grammars();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for name in ["Ints", "Strings"] {
        let g = gens.get(name).unwrap();
        c.bench_function(&format!("generate/{name}"), |b| b.iter(|| generate(g, &mut rng)));
    }
}

fn mutation(c: &mut Criterion) {
    let gens = builtin_grammars();
    let s = parse_script(SEED).unwrap();
    let params = MutationParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    c.bench_function("skeletonize", |b| b.iter(|| skeletonize(&s, &mut rng, 0.5).unwrap()));
    c.bench_function("mutate_once", |b| b.iter(|| mutate_once(&s, &gens, &mut rng, &params)));
}

criterion_group!(benches, parse, termgen, mutation);
criterion_main!(benches);
