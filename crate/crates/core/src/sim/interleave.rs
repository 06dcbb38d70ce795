//! Exhaustive delivery-order checks for small operation sets.

use itertools::Itertools;
use uuid::Uuid;

use crate::command::Command;
use crate::crdt::{EdgeId, GraphOp, LwwGraph, MapOp, VertexId};
use crate::physical::ModelView;
use crate::replica::Replica;
use crate::stamp::{ReplicaId, Stamp};

/// Two delivery orders (indices into the checked ops) that disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub ops: Vec<(GraphOp, Stamp)>,
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

fn v(n: u128) -> VertexId {
    VertexId(Uuid::from_u128(n))
}

fn e(n: u128) -> EdgeId {
    EdgeId(Uuid::from_u128(0x100 + n))
}

fn put(key: &str, value: &str) -> MapOp {
    MapOp::Add {
        key: key.into(),
        value: value.into(),
    }
}

fn set(key: &str, value: &str) -> MapOp {
    MapOp::Update {
        key: key.into(),
        value: value.into(),
    }
}

fn unset(key: &str) -> MapOp {
    MapOp::Remove { key: key.into() }
}

/// Operation shapes over two vertices `a`, `b` and the edges `a→b`, `b→a`,
/// covering every [`crate::crdt::GraphOpKind`].
pub fn graph_op_universe() -> Vec<GraphOp> {
    let (a, b) = (v(1), v(2));
    let (ab, ba) = (e(1), e(2));
    vec![
        GraphOp::AddVertex { vertex: a },
        GraphOp::AddVertex { vertex: b },
        GraphOp::RemoveVertex { vertex: a },
        GraphOp::RemoveVertex { vertex: b },
        GraphOp::CascadeRemoveVertex { vertex: a },
        GraphOp::CascadeRemoveVertex { vertex: b },
        GraphOp::AddEdge {
            edge: ab,
            source: a,
            target: b,
        },
        GraphOp::AddEdge {
            edge: ba,
            source: b,
            target: a,
        },
        GraphOp::RemoveEdge { edge: ab },
        GraphOp::RemoveEdge { edge: ba },
        GraphOp::VertexAttr {
            vertex: a,
            op: put("k", "1"),
        },
        GraphOp::VertexAttr {
            vertex: a,
            op: put("k", "2"),
        },
        GraphOp::VertexAttr {
            vertex: a,
            op: unset("k"),
        },
        GraphOp::VertexAttr {
            vertex: a,
            op: set("k", "3"),
        },
        GraphOp::VertexAttr {
            vertex: b,
            op: set("k", "4"),
        },
        GraphOp::EdgeAttr {
            edge: ab,
            op: put("k", "5"),
        },
        GraphOp::EdgeAttr {
            edge: ab,
            op: unset("k"),
        },
        GraphOp::EdgeAttr {
            edge: ba,
            op: set("k", "6"),
        },
        GraphOp::GraphAttr { op: put("k", "7") },
        GraphOp::GraphAttr { op: unset("k") },
        GraphOp::GraphAttr { op: set("k", "8") },
    ]
}

/// Runs `n` items in every order; the first order whose result differs
/// from the identity order is returned alongside it.
pub fn first_disagreement<T: PartialEq>(
    n: usize,
    mut run: impl FnMut(&[usize]) -> T,
) -> Result<T, (Vec<usize>, Vec<usize>)> {
    let identity: Vec<usize> = (0..n).collect();
    let reference = run(&identity);
    for order in (0..n).permutations(n) {
        if run(&order) != reference {
            return Err((identity, order));
        }
    }
    Ok(reference)
}

/// Applies `ops` in every order and compares observable states.
pub fn check_interleavings(ops: &[(GraphOp, Stamp)]) -> Result<(), Counterexample> {
    first_disagreement(ops.len(), |order| {
        let mut g = LwwGraph::new();
        for &i in order {
            g.apply(&ops[i].0, ops[i].1);
        }
        g.observe()
    })
    .map(|_| ())
    .map_err(|(first, second)| Counterexample {
        ops: ops.to_vec(),
        first,
        second,
    })
}

/// Every sequence of up to `max_len` universe ops, stamped 1, 2, … in
/// sequence order by two alternating replicas, checked in every delivery
/// order. Returns the number of sequences checked.
pub fn exhaustive_interleavings(max_len: usize) -> Result<usize, Counterexample> {
    let universe = graph_op_universe();
    let replicas = [ReplicaId::from_u128(0xa), ReplicaId::from_u128(0xb)];
    let mut checked = 0;
    for len in 1..=max_len {
        for combo in (0..len)
            .map(|_| 0..universe.len())
            .multi_cartesian_product()
        {
            let ops: Vec<(GraphOp, Stamp)> = combo
                .iter()
                .enumerate()
                .map(|(i, &u)| {
                    (
                        universe[u].clone(),
                        Stamp::new(i as u64 + 1, replicas[i % 2]),
                    )
                })
                .collect();
            check_interleavings(&ops)?;
            checked += 1;
        }
    }
    Ok(checked)
}

/// Delivers stamped wire commands to fresh replicas in every order and
/// returns the common final view, or the first pair of orders that differ.
pub fn physical_interleavings(
    ops: &[(Command, Stamp)],
) -> Result<ModelView, (Vec<usize>, Vec<usize>)> {
    first_disagreement(ops.len(), |order| {
        let mut r = Replica::new(ReplicaId::from_u128(u128::MAX));
        for &i in order {
            let _ = r.remote(&ops[i].0, ops[i].1);
        }
        r.model().read_model()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crdt::GraphOpKind;
    use std::collections::BTreeSet;

    #[test]
    fn universe_covers_every_kind() {
        let kinds: BTreeSet<GraphOpKind> = graph_op_universe().iter().map(GraphOp::kind).collect();
        assert_eq!(kinds.len(), GraphOpKind::ALL.len());
    }

    #[test]
    fn all_pairs_and_triples_commute() {
        assert_eq!(exhaustive_interleavings(3), Ok(21 + 21 * 21 + 21 * 21 * 21));
    }

    #[test]
    fn order_dependence_is_reported() {
        let steps = [|x: i64| x - 3, |x: i64| x * 2, |x: i64| x + 1];
        let (a, b) = first_disagreement(3, |order| order.iter().fold(1, |acc, &i| steps[i](acc)))
            .unwrap_err();
        assert_eq!(a, vec![0, 1, 2]);
        assert_ne!(a, b);
        assert_eq!(first_disagreement(3, |_| 5), Ok(5));
    }
}
