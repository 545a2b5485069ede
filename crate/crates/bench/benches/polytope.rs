use criterion::{black_box, criterion_group, criterion_main, Criterion};
use hbl_core::datum::named::{loomis_whitney_2d, loomis_whitney_3d, matmul};
use hbl_core::{enumerate_subspaces, is_member, ExponentTuple, Solver};

fn polytopes(c: &mut Criterion) {
    let data = [
        ("matmul", matmul()),
        ("lw2d", loomis_whitney_2d()),
        ("lw3d", loomis_whitney_3d()),
    ];
    for (name, d) in data {
        // a fresh solver each time, otherwise the memo answers
        c.bench_function(&format!("polytope/{name}"), |b| {
            b.iter(|| Solver::new().compute_polytope(black_box(&d)).unwrap())
        });
    }
}

fn membership(c: &mut Criterion) {
    let d = matmul();
    let inside = ExponentTuple::parse("1/2,1/2,1/2").unwrap();
    let outside = ExponentTuple::parse("1/2,1/2,1/4").unwrap();
    c.bench_function("member/matmul/inside", |b| {
        b.iter(|| is_member(black_box(&d), black_box(&inside)).unwrap())
    });
    c.bench_function("member/matmul/outside", |b| {
        b.iter(|| is_member(black_box(&d), black_box(&outside)).unwrap())
    });
}

fn enumeration(c: &mut Criterion) {
    // cached after the first call, so this measures lookup and cloning
    c.bench_function("enumerate/d3/200", |b| {
        b.iter(|| enumerate_subspaces(black_box(3), black_box(200)))
    });
}

criterion_group!(benches, polytopes, membership, enumeration);
criterion_main!(benches);
