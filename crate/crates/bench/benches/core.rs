use std::hint::black_box;

use charconst::fuzz::{run_fuzz, FuzzConfig, Lemma};
use charconst::group::{sample_nilpotent, t_perp_decompose, ApartmentPoint, Depth, GroupKind};
use charconst::kirillov::{
    check_cor36_exhaustive, enumerate_characters, Intertwiner, DEFAULT_ENUMERATION_CAP, DEFAULT_SEARCH_BOUND,
};
use charconst::regular::{constancy_radius, torus_of};
use charconst::{LocalField, Matrix, Q};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn half() -> ApartmentPoint {
    ApartmentPoint::new(vec![Q::new(1, 2), Q::from_integer(0)])
}

fn torus(c: &mut Criterion) {
    let f = LocalField::qp(5, 24).unwrap();
    let split = Matrix::from_i64(&f, &[&[6, 0], &[0, 1]]);
    let ramified = Matrix::from_i64(&f, &[&[1, 1], &[5, 1]]);
    let cubic = Matrix::from_i64(&f, &[&[0, 0, 1], &[1, 0, 0], &[0, 1, 3]]);
    c.bench_function("torus_of/split", |b| b.iter(|| torus_of(black_box(&split), None).unwrap()));
    c.bench_function("torus_of/ramified", |b| b.iter(|| torus_of(black_box(&ramified), None).unwrap()));
    c.bench_function("torus_of/unramified_cubic", |b| b.iter(|| torus_of(black_box(&cubic), None).unwrap()));
    let t = torus_of(&ramified, None).unwrap();
    c.bench_function("constancy_radius", |b| b.iter(|| constancy_radius(&t, Q::from_integer(1), GroupKind::GL).unwrap()));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = sample_nilpotent(&f, &half(), Depth::at(Q::new(1, 2)), &mut rng).unwrap();
    c.bench_function("t_perp_decompose/ramified", |b| b.iter(|| t_perp_decompose(black_box(&x), &t).unwrap()));
}

fn kirillov(c: &mut Criterion) {
    let f = LocalField::qp(5, 24).unwrap();
    let gamma = Matrix::from_i64(&f, &[&[1, 1], &[5, 1]]);
    let it = Intertwiner::new(&gamma, &half(), GroupKind::GL).unwrap();
    let en = enumerate_characters(&f, &half(), Q::from_integer(1), Q::from_integer(2), DEFAULT_ENUMERATION_CAP).unwrap();
    let mut g = c.benchmark_group("kirillov");
    g.sample_size(10);
    g.bench_function("cor36_exhaustive_625", |b| b.iter(|| check_cor36_exhaustive(&it, &en, DEFAULT_SEARCH_BOUND)));
    g.finish();
}

fn fuzz(c: &mut Criterion) {
    let rows = |r: &[[&str; 2]; 2]| r.iter().map(|row| row.iter().map(|s| s.to_string()).collect()).collect();
    let cfg = FuzzConfig {
        group: GroupKind::GL,
        p: 5,
        precision: 24,
        x: vec!["1/2".into(), "0".into()],
        gammas: vec![rows(&[["6", "0"], ["0", "1"]]), rows(&[["1", "1"], ["5", "1"]])],
        depths: vec!["-1/2".into(), "1/2".into(), "3/2".into()],
        trials: 200,
        seed: 5,
    };
    let mut g = c.benchmark_group("fuzz");
    g.sample_size(10);
    g.bench_function("lemma32_200", |b| b.iter(|| run_fuzz(&cfg, Lemma::Lemma32).unwrap()));
    g.finish();
}

criterion_group!(benches, torus, kirillov, fuzz);
criterion_main!(benches);
