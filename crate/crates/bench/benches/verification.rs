use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use pairspec::{
    compute_g, compute_template, default_grid, generate_finger, match_with_rotation, perturb, score, BaselineGrid,
    Family, Matcher, NoiseModel, RadialProfile, Variant,
};

const WIDTH: u32 = 326;
const HEIGHT: u32 = 357;

fn templates(c: &mut Criterion) {
    let s = generate_finger(1, 35, WIDTH, HEIGHT).unwrap();
    let mut g = c.benchmark_group("template");
    for family in [Family::L, Family::M] {
        let grid = default_grid(family, Variant::LocationOrientation, WIDTH);
        g.bench_function(format!("compute_{family}_xtheta_z35"), |b| {
            b.iter(|| compute_template(black_box(&s), Variant::LocationOrientation, &grid).unwrap())
        });
    }
    let bgrid = BaselineGrid::default();
    g.sample_size(10);
    g.bench_function("compute_G_x_z35", |b| {
        b.iter(|| compute_g(black_box(&s), &bgrid, Variant::Location).unwrap())
    });
    g.finish();
}

fn scoring(c: &mut Criterion) {
    let a = generate_finger(2, 35, WIDTH, HEIGHT).unwrap();
    let p = perturb(&a, &NoiseModel::desk(), 3).unwrap();
    let grid = default_grid(Family::M, Variant::LocationOrientation, WIDTH);
    let (ta, tp) = (
        compute_template(&a, Variant::LocationOrientation, &grid).unwrap(),
        compute_template(&p, Variant::LocationOrientation, &grid).unwrap(),
    );
    c.bench_function("score_M_xtheta", |b| b.iter(|| score(black_box(&ta), black_box(&tp)).unwrap()));

    let m = Matcher::new(Family::M, RadialProfile::Verifinger);
    let (ea, ep) = (m.enroll(&a).unwrap(), m.enroll(&p).unwrap());
    let angles = pairspec::RotationPreset::Wide.angles();
    c.bench_function("match_M_wide_rotation", |b| {
        b.iter(|| match_with_rotation(black_box(&ea), black_box(&ep), &angles).unwrap())
    });
    c.bench_function("verify_M_from_minutiae", |b| {
        b.iter_batched(|| p.clone(), |probe| m.compare(&ea, &m.enroll(&probe).unwrap()).unwrap(), BatchSize::SmallInput)
    });
}

criterion_group!(benches, templates, scoring);
criterion_main!(benches);
