use criterion::{black_box, criterion_group, criterion_main, Criterion};

use dglr_bench::{third_layer_instance, two_cycle_l1, PAPER};
use dglr_core::dgl::{build_tower, cycle_space_basis, homology_ranks, CycleOptions, Scale, TowerOptions};
use dglr_core::digraph::realize_group;
use dglr_core::lie::{lie_dimension, lie_multidegree_basis};
use dglr_core::tensor::Alphabet;
use dglr_core::{Digraph, GeneratorName, GroupTable, LocalPrime, MultiDegree};

fn frobenius(c: &mut Criterion) {
    let inst = third_layer_instance();
    c.bench_function("frobenius/2339-with-x", |b| b.iter(|| black_box(inst.solve())));
}

fn free_lie(c: &mut Criterion) {
    let mut a = Alphabet::new();
    for (i, d) in [1u32, 2, 3].into_iter().enumerate() {
        a.push(GeneratorName::Named(format!("g{i}")), d).expect("fresh name");
    }
    let md = MultiDegree::from_pairs([(0, 4), (1, 3), (2, 2)]);
    c.bench_function("lie/dimension", |b| b.iter(|| black_box(lie_dimension(&a, &md))));
    c.bench_function("lie/lyndon-basis", |b| b.iter(|| black_box(lie_multidegree_basis(&a, &md))));
}

fn first_level(c: &mut Criterion) {
    c.bench_function("dgl/build-l1", |b| b.iter(|| black_box(two_cycle_l1(PAPER))));
    let pres = two_cycle_l1(PAPER);
    let options = CycleOptions::default();
    let synthetic = two_cycle_l1(Scale::Synthetic);
    let mut g = c.benchmark_group("dgl");
    g.sample_size(10);
    g.bench_function("homology-690", |b| b.iter(|| black_box(homology_ranks(&pres, 690, &options).expect("ranks"))));
    g.bench_function("synthetic-cycles-323", |b| b.iter(|| black_box(cycle_space_basis(&synthetic, 323, &options).expect("basis"))));
    g.finish();
}

fn tower(c: &mut Criterion) {
    let mut g = c.benchmark_group("tower");
    g.sample_size(10);
    let prime = LocalPrime::new(7).expect("prime");
    g.bench_function("synthetic-two-cycle", |b| {
        b.iter(|| black_box(build_tower(&Digraph::two_cycle(), Scale::Synthetic, prime, &TowerOptions::default()).expect("tower")))
    });
    g.bench_function("synthetic-three-cycle", |b| {
        b.iter(|| black_box(build_tower(&Digraph::directed_cycle(3), Scale::Synthetic, prime, &TowerOptions::default()).expect("tower")))
    });
    g.finish();
}

fn symmetry(c: &mut Criterion) {
    let r = realize_group(&GroupTable::cyclic(5), None).expect("realizes");
    c.bench_function("digraph/realize-cyclic-5", |b| b.iter(|| black_box(realize_group(&GroupTable::cyclic(5), None).expect("realizes"))));
    c.bench_function("digraph/automorphisms", |b| b.iter(|| black_box(r.digraph.automorphism_group_bounded(usize::MAX).expect("group"))));
}

criterion_group!(benches, frobenius, free_lie, first_level, tower, symmetry);
criterion_main!(benches);
