use colmod_core::crdt::{GraphOp, LwwGraph, VertexId};
use colmod_core::{LwwMap, LwwSet, ReplicaId, Stamp};
use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

fn stamp(n: u64) -> Stamp {
    Stamp::new(n, ReplicaId::from_u128(1))
}

fn vertex(n: u64) -> VertexId {
    VertexId(stamp(n).derive_id())
}

fn sets(c: &mut Criterion) {
    c.bench_function("set/add_remove_1k", |b| {
        b.iter(|| {
            let mut s = LwwSet::new();
            for i in 0..1000u64 {
                s.add(i, stamp(i));
                if i % 3 == 0 {
                    s.remove(i, stamp(i + 1));
                }
            }
            black_box(s)
        })
    });
}

fn maps(c: &mut Criterion) {
    let keys: Vec<String> = (0..32).map(|i| format!("k{i}")).collect();
    c.bench_function("map/update_1k", |b| {
        b.iter(|| {
            let mut m = LwwMap::new();
            for i in 0..1000u64 {
                m.update(&keys[i as usize % keys.len()], "v", stamp(i + 1));
            }
            black_box(m)
        })
    });
}

fn graphs(c: &mut Criterion) {
    let mut base = LwwGraph::new();
    for i in 0..4000 {
        base.apply(&GraphOp::AddVertex { vertex: vertex(i) }, stamp(i));
    }
    let mut n = 4000u64;
    c.bench_function("graph/add_edge_4k", |b| {
        b.iter_batched(
            || base.clone(),
            |mut g| {
                n += 1;
                let s = stamp(n);
                g.apply(
                    &GraphOp::AddEdge {
                        edge: colmod_core::crdt::EdgeId(s.derive_id()),
                        source: vertex(n % 4000),
                        target: vertex((n * 7) % 4000),
                    },
                    s,
                );
                g
            },
            BatchSize::LargeInput,
        )
    });
    c.bench_function("graph/observe_4k", |b| b.iter(|| black_box(base.observe())));
}

criterion_group!(benches, sets, maps, graphs);
criterion_main!(benches);
