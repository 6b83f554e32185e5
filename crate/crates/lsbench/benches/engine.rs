//! Benchmarks over the four hot paths: the symmetric recurrence profile
//! (GMP-backed bulk arithmetic), the exact simplex behind the polyhedral
//! operators, the interior-point path behind the semidefinite operator,
//! and integral-hull construction.

use criterion::{criterion_group, criterion_main, Criterion};

use liftproj::cone::{gen_cross, gen_majority, gen_matching, integral_hull};
use liftproj::lifted::{n_optimize, OpKind};
use liftproj::nplus::nplus_optimize;
use liftproj::rational::Rational;
use liftproj::recurrence::level_profile;

fn ones(d: usize) -> Vec<Rational> {
    let mut c = vec![Rational::zero()];
    c.extend((0..d).map(|_| Rational::one()));
    c
}

fn bench_recurrence(c: &mut Criterion) {
    c.bench_function("recurrence/level_profile_d100", |b| {
        b.iter(|| level_profile(100).unwrap())
    });
}

fn bench_simplex(c: &mut Criterion) {
    let k = gen_majority(6).unwrap();
    let obj = ones(6);
    c.bench_function("simplex/majority_d6_level2", |b| {
        b.iter(|| n_optimize(&k, 2, OpKind::N, &obj).unwrap())
    });
}

fn bench_sdp(c: &mut Criterion) {
    let k = gen_majority(4).unwrap();
    let obj = ones(4);
    c.bench_function("sdp/majority_d4_level1", |b| {
        b.iter(|| nplus_optimize(&k, 1, &obj).unwrap())
    });
}

fn bench_hull(c: &mut Criterion) {
    let m = gen_matching(4).unwrap();
    let x = gen_cross(4, 2).unwrap();
    c.bench_function("hull/matching_n4", |b| b.iter(|| integral_hull(&m).unwrap()));
    c.bench_function("hull/cross_d4_p2", |b| b.iter(|| integral_hull(&x).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_recurrence, bench_simplex, bench_sdp, bench_hull
}
criterion_main!(benches);
