use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::{CrdtError, LwwMap, LwwSet, Outcome};
use crate::stamp::Stamp;

/// Edge map key holding the source vertex id.
pub const SOURCE_KEY: &str = "$source";
/// Edge map key holding the target vertex id.
pub const TARGET_KEY: &str = "$target";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub Uuid);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub Uuid);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.hyphenated().fmt(f)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.hyphenated().fmt(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LwwVertex {
    pub id: VertexId,
    pub map: LwwMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LwwEdge {
    pub id: EdgeId,
    pub map: LwwMap,
    /// Parsed `$source`/`$target` entries.
    endpoints: Option<(VertexId, VertexId)>,
}

impl LwwEdge {
    pub fn source(&self) -> Option<VertexId> {
        self.endpoints.map(|(s, _)| s)
    }

    pub fn target(&self) -> Option<VertexId> {
        self.endpoints.map(|(_, t)| t)
    }

    fn refresh_endpoints(&mut self) {
        self.endpoints = self.endpoint(SOURCE_KEY).zip(self.endpoint(TARGET_KEY));
    }

    fn endpoint(&self, key: &str) -> Option<VertexId> {
        self.map
            .query(key)
            .and_then(|s| Uuid::parse_str(s).ok())
            .map(VertexId)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    In,
    Out,
    Both,
}

/// Attribute-map operation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapOp {
    Add { key: String, value: String },
    Remove { key: String },
    Update { key: String, value: String },
}

impl MapOp {
    fn apply(&self, map: &mut LwwMap, stamp: Stamp) {
        match self {
            MapOp::Add { key, value } => map.add(key, value, stamp),
            MapOp::Remove { key } => map.remove(key, stamp),
            MapOp::Update { key, value } => map.update(key, value, stamp),
        }
    }
}

/// One replicated graph operation. [`LwwGraph::apply`] accepts any of these
/// in any order; the checked methods on [`LwwGraph`] additionally enforce the
/// local preconditions before producing them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphOp {
    AddVertex {
        vertex: VertexId,
    },
    RemoveVertex {
        vertex: VertexId,
    },
    CascadeRemoveVertex {
        vertex: VertexId,
    },
    AddEdge {
        edge: EdgeId,
        source: VertexId,
        target: VertexId,
    },
    RemoveEdge {
        edge: EdgeId,
    },
    VertexAttr {
        vertex: VertexId,
        op: MapOp,
    },
    EdgeAttr {
        edge: EdgeId,
        op: MapOp,
    },
    GraphAttr {
        op: MapOp,
    },
}

/// Coarse classification of [`GraphOp`]s used by generators and reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GraphOpKind {
    AddVertex,
    RemoveVertex,
    CascadeRemoveVertex,
    AddEdge,
    RemoveEdge,
    VertexPut,
    VertexRemoveKey,
    VertexUpdate,
    EdgeAttr,
    GraphAttr,
}

impl GraphOpKind {
    pub const ALL: [GraphOpKind; 10] = [
        GraphOpKind::AddVertex,
        GraphOpKind::RemoveVertex,
        GraphOpKind::CascadeRemoveVertex,
        GraphOpKind::AddEdge,
        GraphOpKind::RemoveEdge,
        GraphOpKind::VertexPut,
        GraphOpKind::VertexRemoveKey,
        GraphOpKind::VertexUpdate,
        GraphOpKind::EdgeAttr,
        GraphOpKind::GraphAttr,
    ];
}

impl GraphOp {
    pub fn kind(&self) -> GraphOpKind {
        match self {
            GraphOp::AddVertex { .. } => GraphOpKind::AddVertex,
            GraphOp::RemoveVertex { .. } => GraphOpKind::RemoveVertex,
            GraphOp::CascadeRemoveVertex { .. } => GraphOpKind::CascadeRemoveVertex,
            GraphOp::AddEdge { .. } => GraphOpKind::AddEdge,
            GraphOp::RemoveEdge { .. } => GraphOpKind::RemoveEdge,
            GraphOp::VertexAttr { op, .. } => match op {
                MapOp::Add { .. } => GraphOpKind::VertexPut,
                MapOp::Remove { .. } => GraphOpKind::VertexRemoveKey,
                MapOp::Update { .. } => GraphOpKind::VertexUpdate,
            },
            GraphOp::EdgeAttr { .. } => GraphOpKind::EdgeAttr,
            GraphOp::GraphAttr { .. } => GraphOpKind::GraphAttr,
        }
    }
}

/// Directed multigraph of [`LwwVertex`] and [`LwwEdge`], each carrying an
/// attribute map, plus an attribute map for the graph itself.
///
/// Liveness:
/// * a vertex is live iff it is LWW-present in the vertex set. Adding an edge
///   also re-adds both endpoints at the edge's stamp, so an edge newer than a
///   vertex removal revives the vertex.
/// * an edge is live iff it is LWW-present in the edge set and neither
///   endpoint has a removal stamp newer than the edge. Consequently a live
///   edge never has a dead endpoint, and removing a vertex takes every older
///   incident edge down with it.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LwwGraph {
    attributes: LwwMap,
    vertices: LwwSet<VertexId>,
    edges: LwwSet<EdgeId>,
    vertex_data: BTreeMap<VertexId, LwwVertex>,
    edge_data: BTreeMap<EdgeId, LwwEdge>,
    /// Every edge ever recorded against a vertex, live or not.
    incidence: BTreeMap<VertexId, BTreeSet<EdgeId>>,
}

/// Live `(key, value)` entries of an attribute map.
pub type Entries = Vec<(String, String)>;

/// Everything a reader can observe: live vertices and edges with their live
/// attributes, and the graph's own attributes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphObservation {
    pub attributes: Entries,
    pub vertices: Vec<(VertexId, Entries)>,
    pub edges: Vec<(EdgeId, VertexId, VertexId, Entries)>,
}

fn entries(map: &LwwMap) -> Entries {
    map.iter()
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect()
}

impl LwwGraph {
    pub fn new() -> Self {
        Self::default()
    }

    // ---- replicated application -------------------------------------------------

    /// Apply an operation unconditionally. Total, idempotent and commutative
    /// with every other operation carrying a distinct stamp.
    pub fn apply(&mut self, op: &GraphOp, stamp: Stamp) {
        match op {
            GraphOp::AddVertex { vertex } => {
                self.vertices.add(*vertex, stamp);
                self.vertex_entry(*vertex);
            }
            GraphOp::RemoveVertex { vertex } | GraphOp::CascadeRemoveVertex { vertex } => {
                self.vertices.remove(*vertex, stamp);
            }
            GraphOp::AddEdge {
                edge,
                source,
                target,
            } => {
                self.edges.add(*edge, stamp);
                let data = self.edge_entry(*edge);
                data.map.add(SOURCE_KEY, &source.to_string(), stamp);
                data.map.add(TARGET_KEY, &target.to_string(), stamp);
                data.refresh_endpoints();
                // endpoint revival
                for v in [*source, *target] {
                    self.vertices.add(v, stamp);
                    self.vertex_entry(v);
                    self.incidence.entry(v).or_default().insert(*edge);
                }
            }
            GraphOp::RemoveEdge { edge } => {
                self.edges.remove(*edge, stamp);
            }
            GraphOp::VertexAttr { vertex, op } => {
                op.apply(&mut self.vertex_entry(*vertex).map, stamp);
            }
            GraphOp::EdgeAttr { edge, op } => {
                let data = self.edge_entry(*edge);
                op.apply(&mut data.map, stamp);
                data.refresh_endpoints();
            }
            GraphOp::GraphAttr { op } => op.apply(&mut self.attributes, stamp),
        }
    }

    fn vertex_entry(&mut self, id: VertexId) -> &mut LwwVertex {
        self.vertex_data.entry(id).or_insert_with(|| LwwVertex {
            id,
            map: LwwMap::new(),
        })
    }

    fn edge_entry(&mut self, id: EdgeId) -> &mut LwwEdge {
        self.edge_data.entry(id).or_insert_with(|| LwwEdge {
            id,
            map: LwwMap::new(),
            endpoints: None,
        })
    }

    // ---- checked local operations ----------------------------------------------

    pub fn add_vertex(&mut self, vertex: VertexId, stamp: Stamp) {
        self.apply(&GraphOp::AddVertex { vertex }, stamp);
    }

    /// Add an edge; both endpoints must have been added at some point.
    pub fn add_edge(
        &mut self,
        edge: EdgeId,
        source: VertexId,
        target: VertexId,
        stamp: Stamp,
    ) -> Result<(), CrdtError> {
        for v in [source, target] {
            if !self.vertices.was_added(&v) {
                return Err(CrdtError::UnknownVertex(v));
            }
        }
        self.apply(
            &GraphOp::AddEdge {
                edge,
                source,
                target,
            },
            stamp,
        );
        Ok(())
    }

    /// Remove a vertex that has no live incident edges. With live incident
    /// edges the call is rejected and nothing is recorded.
    pub fn remove_vertex(&mut self, vertex: VertexId, stamp: Stamp) -> Result<Outcome, CrdtError> {
        self.require_vertex(vertex)?;
        if self
            .incident_raw(vertex, Direction::Both)
            .any(|e| self.edge_live(e))
        {
            return Ok(Outcome::Nop);
        }
        self.apply(&GraphOp::RemoveVertex { vertex }, stamp);
        Ok(Outcome::Applied)
    }

    /// Remove a vertex and, with it, every incident edge older than `stamp`.
    pub fn cascade_remove_vertex(
        &mut self,
        vertex: VertexId,
        stamp: Stamp,
    ) -> Result<(), CrdtError> {
        self.require_vertex(vertex)?;
        self.apply(&GraphOp::CascadeRemoveVertex { vertex }, stamp);
        Ok(())
    }

    pub fn remove_edge(&mut self, edge: EdgeId, stamp: Stamp) -> Result<(), CrdtError> {
        self.require_edge(edge)?;
        self.apply(&GraphOp::RemoveEdge { edge }, stamp);
        Ok(())
    }

    pub fn vertex_attr(
        &mut self,
        vertex: VertexId,
        op: MapOp,
        stamp: Stamp,
    ) -> Result<(), CrdtError> {
        self.require_vertex(vertex)?;
        self.apply(&GraphOp::VertexAttr { vertex, op }, stamp);
        Ok(())
    }

    pub fn edge_attr(&mut self, edge: EdgeId, op: MapOp, stamp: Stamp) -> Result<(), CrdtError> {
        self.require_edge(edge)?;
        self.apply(&GraphOp::EdgeAttr { edge, op }, stamp);
        Ok(())
    }

    pub fn graph_attr(&mut self, op: MapOp, stamp: Stamp) {
        self.apply(&GraphOp::GraphAttr { op }, stamp);
    }

    fn require_vertex(&self, v: VertexId) -> Result<(), CrdtError> {
        if self.vertices.was_added(&v) {
            Ok(())
        } else {
            Err(CrdtError::UnknownVertex(v))
        }
    }

    fn require_edge(&self, e: EdgeId) -> Result<(), CrdtError> {
        if self.edges.was_added(&e) {
            Ok(())
        } else {
            Err(CrdtError::UnknownEdge(e))
        }
    }

    // ---- queries ------------------------------------------------------------------

    pub fn attributes(&self) -> &LwwMap {
        &self.attributes
    }

    pub fn vertex_set(&self) -> &LwwSet<VertexId> {
        &self.vertices
    }

    pub fn edge_set(&self) -> &LwwSet<EdgeId> {
        &self.edges
    }

    pub fn vertex(&self, v: VertexId) -> Option<&LwwVertex> {
        self.vertex_data.get(&v)
    }

    pub fn edge(&self, e: EdgeId) -> Option<&LwwEdge> {
        self.edge_data.get(&e)
    }

    /// Whether the id was ever added as a vertex.
    pub fn knows_vertex(&self, v: VertexId) -> bool {
        self.vertices.was_added(&v)
    }

    /// Whether the id was ever added as an edge.
    pub fn knows_edge(&self, e: EdgeId) -> bool {
        self.edges.was_added(&e)
    }

    pub fn vertex_live(&self, v: VertexId) -> bool {
        self.vertices.lookup(&v)
    }

    pub fn edge_live(&self, e: EdgeId) -> bool {
        let Some(added) = self.edges.add_stamp(&e) else {
            return false;
        };
        if !self.edges.lookup(&e) {
            return false;
        }
        let Some(data) = self.edge_data.get(&e) else {
            return false;
        };
        match (data.source(), data.target()) {
            (Some(s), Some(t)) => [s, t].iter().all(|v| {
                self.vertices.lookup(v) && self.vertices.remove_stamp(v).is_none_or(|r| r <= added)
            }),
            _ => false,
        }
    }

    pub fn live_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn live_edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        self.edges
            .add_set()
            .keys()
            .copied()
            .filter(move |e| self.edge_live(*e))
    }

    fn incident_raw(&self, v: VertexId, dir: Direction) -> impl Iterator<Item = EdgeId> + '_ {
        self.incidence
            .get(&v)
            .into_iter()
            .flatten()
            .copied()
            .filter(move |e| {
                let Some(data) = self.edge_data.get(e) else {
                    return false;
                };
                match dir {
                    Direction::Out => data.source() == Some(v),
                    Direction::In => data.target() == Some(v),
                    Direction::Both => true,
                }
            })
    }

    /// Live edges touching `v` in the given direction. A self-loop appears
    /// once for every direction.
    pub fn incident_edges(&self, v: VertexId, dir: Direction) -> Result<Vec<EdgeId>, CrdtError> {
        self.require_vertex(v)?;
        Ok(self
            .incident_raw(v, dir)
            .filter(|e| self.edge_live(*e))
            .collect())
    }

    /// Every edge ever recorded against `v`, regardless of liveness.
    pub fn all_incident_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeId> + '_ {
        self.incidence.get(&v).into_iter().flatten().copied()
    }

    pub fn edge_endpoints(&self, e: EdgeId) -> Result<(VertexId, VertexId), CrdtError> {
        let data = self.edge_data.get(&e).ok_or(CrdtError::UnknownEdge(e))?;
        match (data.source(), data.target()) {
            (Some(s), Some(t)) => Ok((s, t)),
            _ => Err(CrdtError::UnknownEdge(e)),
        }
    }

    /// First live edge with a dead endpoint, if any. `None` is the invariant.
    pub fn find_dangling_edge(&self) -> Option<EdgeId> {
        self.live_edges().find(|e| {
            let (s, t) = self.edge_endpoints(*e).expect("live edge has endpoints");
            !self.vertex_live(s) || !self.vertex_live(t)
        })
    }

    pub fn observe(&self) -> GraphObservation {
        GraphObservation {
            attributes: entries(&self.attributes),
            vertices: self
                .live_vertices()
                .map(|v| {
                    let attrs = self.vertex_data.get(&v).map(|d| entries(&d.map));
                    (v, attrs.unwrap_or_default())
                })
                .collect(),
            edges: self
                .live_edges()
                .map(|e| {
                    let (s, t) = self.edge_endpoints(e).expect("live edge has endpoints");
                    (e, s, t, entries(&self.edge_data[&e].map))
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;

    fn v(n: u128) -> VertexId {
        VertexId(Uuid::from_u128(n))
    }
    fn e(n: u128) -> EdgeId {
        EdgeId(Uuid::from_u128(0x1000 + n))
    }
    fn t(n: u64) -> Stamp {
        Stamp::at(n)
    }

    /// Liveness of every vertex and edge evaluated straight from the
    /// definitions, without the incidence index.
    fn brute_force_dangling(g: &LwwGraph) -> bool {
        g.edges.add_set().keys().any(|id| {
            g.edge_live(*id) && {
                let d = &g.edge_data[id];
                !g.vertices.lookup(&d.source().unwrap()) || !g.vertices.lookup(&d.target().unwrap())
            }
        })
    }

    #[test]
    fn empty_graph_has_nothing_live() {
        let g = LwwGraph::new();
        assert_eq!(g.live_vertices().count(), 0);
        assert_eq!(g.live_edges().count(), 0);
    }

    #[test]
    fn add_edge_between_live_vertices() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        g.add_vertex(v(2), t(2));
        g.add_edge(e(1), v(1), v(2), t(5)).unwrap();
        assert!(g.edge_live(e(1)));
        assert_eq!(g.incident_edges(v(2), Direction::In).unwrap(), vec![e(1)]);
        assert_eq!(g.incident_edges(v(2), Direction::Out).unwrap(), vec![]);
        assert_eq!(g.edge_endpoints(e(1)).unwrap(), (v(1), v(2)));
    }

    #[test]
    fn add_edge_with_unknown_endpoint_fails() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        assert_eq!(
            g.add_edge(e(1), v(1), v(9), t(2)),
            Err(CrdtError::UnknownVertex(v(9)))
        );
        assert!(!g.knows_edge(e(1)));
    }

    #[test]
    fn newer_edge_revives_removed_vertex() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        g.add_vertex(v(2), t(1));
        g.remove_vertex(v(1), t(3)).unwrap();
        assert!(!g.vertex_live(v(1)));
        g.add_edge(e(1), v(1), v(2), t(7)).unwrap();
        assert!(g.vertex_live(v(1)));
        assert!(g.edge_live(e(1)));
        assert_eq!(g.vertex_set().add_stamp(&v(1)), Some(t(7)));
    }

    #[test]
    fn older_edge_does_not_revive_and_does_not_dangle() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        g.add_vertex(v(2), t(1));
        g.remove_vertex(v(1), t(9)).unwrap();
        g.apply(
            &GraphOp::AddEdge {
                edge: e(1),
                source: v(1),
                target: v(2),
            },
            t(7),
        );
        assert!(g.knows_edge(e(1)));
        assert!(!g.edge_live(e(1)));
        assert!(!g.vertex_live(v(1)));
        assert!(!brute_force_dangling(&g));
    }

    #[test]
    fn remove_isolated_vertex() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        assert_eq!(g.remove_vertex(v(1), t(4)), Ok(Outcome::Applied));
        assert!(!g.vertex_live(v(1)));
    }

    #[test]
    fn remove_vertex_with_live_edge_is_rejected() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        g.add_vertex(v(2), t(1));
        g.add_edge(e(1), v(1), v(2), t(2)).unwrap();
        let before = g.clone();
        assert_eq!(g.remove_vertex(v(2), t(3)), Ok(Outcome::Nop));
        assert_eq!(g, before);
        assert!(!brute_force_dangling(&g));
        assert!(g.vertex_live(v(2)));
    }

    #[test]
    fn remove_unknown_vertex_errors() {
        let mut g = LwwGraph::new();
        assert_eq!(
            g.remove_vertex(v(3), t(1)),
            Err(CrdtError::UnknownVertex(v(3)))
        );
        assert_eq!(
            g.cascade_remove_vertex(v(3), t(1)),
            Err(CrdtError::UnknownVertex(v(3)))
        );
        assert_eq!(g.remove_edge(e(3), t(1)), Err(CrdtError::UnknownEdge(e(3))));
    }

    #[test]
    fn cascade_kills_incident_edges() {
        let mut g = LwwGraph::new();
        for i in 1..=3 {
            g.add_vertex(v(i), t(1));
        }
        g.add_edge(e(1), v(1), v(2), t(2)).unwrap();
        g.add_edge(e(2), v(3), v(1), t(3)).unwrap();
        g.cascade_remove_vertex(v(1), t(6)).unwrap();
        assert!(!g.vertex_live(v(1)));
        assert!(!g.edge_live(e(1)));
        assert!(!g.edge_live(e(2)));
        assert!(g.vertex_live(v(2)) && g.vertex_live(v(3)));
    }

    #[test]
    fn cascade_then_newer_concurrent_edge_in_both_orders() {
        let base = {
            let mut g = LwwGraph::new();
            g.add_vertex(v(1), t(1));
            g.add_vertex(v(2), t(1));
            g.add_edge(e(1), v(2), v(1), t(2)).unwrap();
            g
        };
        let ops = [
            (GraphOp::CascadeRemoveVertex { vertex: v(1) }, t(6)),
            (
                GraphOp::AddEdge {
                    edge: e(2),
                    source: v(2),
                    target: v(1),
                },
                t(7),
            ),
        ];
        let mut results = Vec::new();
        for order in ops.iter().permutations(2) {
            let mut g = base.clone();
            for (op, s) in order {
                g.apply(op, *s);
            }
            results.push(g);
        }
        assert_eq!(results[0], results[1]);
        let g = &results[0];
        assert!(g.edge_live(e(2)));
        assert!(!g.edge_live(e(1)));
        assert!(g.vertex_live(v(1)));
        assert_eq!(g.vertex_set().add_stamp(&v(1)), Some(t(7)));
    }

    #[test]
    fn cascade_on_isolated_vertex_equals_remove() {
        let mut a = LwwGraph::new();
        a.add_vertex(v(1), t(1));
        let mut b = a.clone();
        a.cascade_remove_vertex(v(1), t(2)).unwrap();
        b.remove_vertex(v(1), t(2)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn remove_edge_is_lww() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        g.add_vertex(v(2), t(1));
        g.add_edge(e(1), v(1), v(2), t(3)).unwrap();
        g.remove_edge(e(1), t(2)).unwrap();
        assert!(g.edge_live(e(1)));
        g.remove_edge(e(1), t(4)).unwrap();
        assert!(!g.edge_live(e(1)));
        assert!(g.vertex_live(v(1)) && g.vertex_live(v(2)));
    }

    #[test]
    fn multigraph_keeps_parallel_edges() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        g.add_vertex(v(2), t(1));
        g.add_edge(e(1), v(1), v(2), t(2)).unwrap();
        g.add_edge(e(2), v(1), v(2), t(3)).unwrap();
        let out = g.incident_edges(v(1), Direction::Out).unwrap();
        let brute: Vec<_> = g
            .live_edges()
            .filter(|x| g.edge_endpoints(*x).unwrap().0 == v(1))
            .collect();
        assert_eq!(out.len(), 2);
        assert_eq!(out, brute);
    }

    #[test]
    fn disconnected_graphs_are_fine() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        g.add_vertex(v(2), t(2));
        assert_eq!(g.live_vertices().count(), 2);
        assert!(g.find_dangling_edge().is_none());
    }

    #[test]
    fn attribute_ops_on_vertices_edges_and_graph() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        g.vertex_attr(
            v(1),
            MapOp::Add {
                key: "title".into(),
                value: "mindmap_0".into(),
            },
            t(1),
        )
        .unwrap();
        g.vertex_attr(
            v(1),
            MapOp::Update {
                key: "title".into(),
                value: "todolist".into(),
            },
            t(8),
        )
        .unwrap();
        assert_eq!(g.vertex(v(1)).unwrap().map.query("title"), Some("todolist"));
        g.graph_attr(
            MapOp::Add {
                key: "name".into(),
                value: "g".into(),
            },
            t(2),
        );
        assert_eq!(g.attributes().query("name"), Some("g"));
        assert!(g
            .edge_attr(e(5), MapOp::Remove { key: "x".into() }, t(3))
            .is_err());
    }

    #[test]
    fn history_of_remove_set_never_shrinks() {
        let mut g = LwwGraph::new();
        g.add_vertex(v(1), t(1));
        g.add_vertex(v(2), t(1));
        let mut last = 0;
        for (i, op) in [
            GraphOp::RemoveVertex { vertex: v(1) },
            GraphOp::AddEdge {
                edge: e(1),
                source: v(1),
                target: v(2),
            },
            GraphOp::RemoveEdge { edge: e(1) },
            GraphOp::CascadeRemoveVertex { vertex: v(2) },
        ]
        .iter()
        .enumerate()
        {
            g.apply(op, t(10 + i as u64));
            let n = g.vertex_set().remove_set().len() + g.edge_set().remove_set().len();
            assert!(n >= last);
            last = n;
        }
    }
}
