use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use uuid::Uuid;

use super::view::{Association, ModelView};
use super::{
    keys, looks_like_uuid, split_attrs, Backing, Clabject, PhysicalError, PhysicalKind, Potency,
    Selector, SplitAttrs,
};
use crate::crdt::{Direction, EdgeId, GraphOp, LwwGraph, LwwMap, MapOp, Outcome, VertexId};
use crate::linguistic::ConformanceMode;
use crate::stamp::Stamp;

/// A fully resolved physical operation. Every reference is an id, so merging
/// one never depends on replica-local name lookups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhysicalOp {
    Create {
        name: String,
        typed_by: Option<String>,
        kind: Option<PhysicalKind>,
        potency: Option<Potency>,
        attrs: Vec<(String, String)>,
    },
    Link {
        name: String,
        typed_by: Option<String>,
        kind: Option<PhysicalKind>,
        port: String,
        source: Uuid,
        target: Uuid,
        attrs: Vec<(String, String)>,
    },
    Update {
        id: Uuid,
        typed_by: Option<String>,
        kind: Option<PhysicalKind>,
        potency: Option<Potency>,
        attrs: Vec<(String, String)>,
    },
    Delete {
        id: Uuid,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MergeOutcome {
    Applied,
    /// References an element this replica has not seen yet.
    Deferred,
}

/// What a `typedBy` value points at.
#[derive(Clone, Debug)]
pub(crate) enum TypeRef {
    Physical(PhysicalKind),
    Element(Clabject),
    Ambiguous,
    Unresolved,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct NameIndex {
    by_name: BTreeMap<String, BTreeSet<Uuid>>,
    by_id: HashMap<Uuid, String>,
}

impl NameIndex {
    fn set(&mut self, id: Uuid, name: Option<String>) {
        if self.by_id.get(&id) == name.as_ref() {
            return;
        }
        if let Some(old) = self.by_id.remove(&id) {
            if let Some(ids) = self.by_name.get_mut(&old) {
                ids.remove(&id);
                if ids.is_empty() {
                    self.by_name.remove(&old);
                }
            }
        }
        if let Some(name) = name {
            self.by_name.entry(name.clone()).or_default().insert(id);
            self.by_id.insert(id, name);
        }
    }
}

/// The physical model: a single [`LwwGraph`] plus a derived name index.
#[derive(Clone, Debug, Default)]
pub struct PhysicalModel {
    graph: LwwGraph,
    names: NameIndex,
    mode: ConformanceMode,
    /// Next suffix to probe per auto-name prefix. Local only.
    counters: HashMap<String, u64>,
}

fn check_name(name: &str) -> Result<(), PhysicalError> {
    if name.is_empty() {
        return Err(PhysicalError::EmptyName);
    }
    if looks_like_uuid(name) || name.contains(['\t', '\n', '\r']) || name.starts_with('$') {
        return Err(PhysicalError::InvalidName(name.to_owned()));
    }
    Ok(())
}

fn read_clabject(id: Uuid, map: &LwwMap, backing: Backing) -> Option<Clabject> {
    let name = map.query(keys::NAME)?.to_owned();
    let default_kind = match backing {
        Backing::Vertex(_) => PhysicalKind::Clabject,
        Backing::Edge(_) => PhysicalKind::Association,
    };
    let kind = map
        .query(keys::KIND)
        .and_then(PhysicalKind::from_name)
        .unwrap_or(default_kind);
    let potency = map
        .query(keys::POTENCY)
        .and_then(|p| p.parse().ok())
        .unwrap_or(Potency::Infinite);
    let attributes = map
        .iter()
        .filter(|(k, _)| !k.starts_with('$'))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect();
    Some(Clabject {
        id,
        name,
        kind,
        typed_by: map.query(keys::TYPE).map(str::to_owned),
        potency,
        attributes,
        backing,
    })
}

impl PhysicalModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn graph(&self) -> &LwwGraph {
        &self.graph
    }

    pub fn conformance_mode(&self) -> ConformanceMode {
        self.mode
    }

    pub fn set_conformance_mode(&mut self, mode: ConformanceMode) {
        self.mode = mode;
    }

    // ---- lookup -----------------------------------------------------------------

    fn backing(&self, id: Uuid) -> Option<Backing> {
        if self.graph.knows_vertex(VertexId(id)) {
            Some(Backing::Vertex(VertexId(id)))
        } else if self.graph.knows_edge(EdgeId(id)) {
            Some(Backing::Edge(EdgeId(id)))
        } else {
            None
        }
    }

    fn is_live(&self, id: Uuid) -> bool {
        match self.backing(id) {
            Some(Backing::Vertex(v)) => self.graph.vertex_live(v),
            Some(Backing::Edge(e)) => self.graph.edge_live(e),
            None => false,
        }
    }

    /// Whether the id was ever created here, live or not.
    pub fn knows(&self, id: Uuid) -> bool {
        self.backing(id).is_some()
    }

    /// Reads an element regardless of liveness.
    pub fn clabject_any(&self, id: Uuid) -> Option<Clabject> {
        let backing = self.backing(id)?;
        let map = match backing {
            Backing::Vertex(v) => &self.graph.vertex(v)?.map,
            Backing::Edge(e) => &self.graph.edge(e)?.map,
        };
        read_clabject(id, map, backing)
    }

    /// Reads a live element.
    pub fn clabject(&self, id: Uuid) -> Option<Clabject> {
        if self.is_live(id) {
            self.clabject_any(id)
        } else {
            None
        }
    }

    /// Ids of live elements carrying `name`.
    pub fn live_by_name(&self, name: &str) -> Vec<Uuid> {
        self.names
            .by_name
            .get(name)
            .map(|ids| ids.iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn name_taken(&self, name: &str) -> bool {
        self.names.by_name.contains_key(name)
    }

    /// Every live name with the number of live elements sharing it.
    pub fn name_counts(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.names
            .by_name
            .iter()
            .map(|(n, ids)| (n.as_str(), ids.len()))
    }

    pub fn resolve(&self, sel: &Selector) -> Result<Uuid, PhysicalError> {
        match sel {
            Selector::ById(id) => {
                if self.is_live(*id) {
                    Ok(*id)
                } else {
                    Err(PhysicalError::UnknownElement(id.to_string()))
                }
            }
            Selector::ByName(name) => match self.names.by_name.get(name) {
                None => Err(PhysicalError::UnknownElement(name.clone())),
                Some(ids) if ids.len() > 1 => Err(PhysicalError::AmbiguousName(name.clone())),
                Some(ids) => Ok(*ids.iter().next().expect("non-empty id set")),
            },
        }
    }

    pub fn element(&self, sel: &Selector) -> Result<Clabject, PhysicalError> {
        let id = self.resolve(sel)?;
        self.clabject(id)
            .ok_or_else(|| PhysicalError::UnknownElement(sel.to_string()))
    }

    /// LINK endpoints: a live vertex by name, or any known vertex by id
    /// (linking to a tombstoned vertex revives it).
    fn resolve_endpoint(&self, sel: &Selector) -> Result<Uuid, PhysicalError> {
        match sel {
            Selector::ById(id) if self.graph.knows_vertex(VertexId(*id)) => Ok(*id),
            Selector::ById(id) => Err(PhysicalError::UnknownVertex(id.to_string())),
            Selector::ByName(name) => {
                let id = self.resolve(sel).map_err(|e| match e {
                    PhysicalError::UnknownElement(_) => PhysicalError::UnknownVertex(name.clone()),
                    other => other,
                })?;
                if self.graph.knows_vertex(VertexId(id)) {
                    Ok(id)
                } else {
                    Err(PhysicalError::UnknownVertex(name.clone()))
                }
            }
        }
    }

    pub(crate) fn resolve_type(&self, name: &str) -> TypeRef {
        match self.names.by_name.get(name) {
            Some(ids) if ids.len() > 1 => TypeRef::Ambiguous,
            Some(ids) => {
                let id = *ids.iter().next().expect("non-empty id set");
                match self.clabject(id) {
                    Some(c) => TypeRef::Element(c),
                    None => TypeRef::Unresolved,
                }
            }
            None => match PhysicalKind::from_name(name) {
                Some(k) => TypeRef::Physical(k),
                None => TypeRef::Unresolved,
            },
        }
    }

    /// The live association declared on `owner` under `port`, if any.
    /// Declarations are associations typed by a physical kind (or untyped).
    pub fn declaration(&self, owner: Uuid, port: &str) -> Option<Clabject> {
        let edges = self
            .graph
            .incident_edges(VertexId(owner), Direction::Out)
            .ok()?;
        edges
            .into_iter()
            .filter_map(|e| {
                let c = self.clabject(e.0)?;
                let is_decl = match c.typed_by.as_deref() {
                    None => true,
                    Some(t) => PhysicalKind::from_name(t).is_some(),
                };
                let p = self.graph.edge(e)?.map.query(keys::PORT)?;
                (is_decl && p == port).then_some(c)
            })
            .min_by(|a, b| (&a.name, a.id).cmp(&(&b.name, b.id)))
    }

    /// Port a link was created through.
    pub fn port_of(&self, id: Uuid) -> Option<String> {
        self.graph
            .edge(EdgeId(id))
            .and_then(|e| e.map.query(keys::PORT))
            .map(str::to_owned)
    }

    /// Live source and target of an edge-backed element.
    pub fn endpoints(&self, id: Uuid) -> Option<(Uuid, Uuid)> {
        if !self.graph.edge_live(EdgeId(id)) {
            return None;
        }
        self.graph
            .edge_endpoints(EdgeId(id))
            .ok()
            .map(|(s, t)| (s.0, t.0))
    }

    fn next_free(&mut self, prefix: &str) -> String {
        let mut n = self.counters.get(prefix).copied().unwrap_or(0);
        loop {
            let candidate = format!("{prefix}{n}");
            n += 1;
            if !self.name_taken(&candidate) {
                self.counters.insert(prefix.to_owned(), n);
                return candidate;
            }
        }
    }

    // ---- planning (local resolution) ----------------------------------------------

    pub fn plan_create(
        &mut self,
        name: &str,
        typed_by: Option<&str>,
        attrs: &[(String, String)],
    ) -> Result<PhysicalOp, PhysicalError> {
        check_name(name)?;
        if self.name_taken(name) {
            return Err(PhysicalError::DuplicateName(name.to_owned()));
        }
        let SplitAttrs {
            potency: explicit_potency,
            kind: explicit_kind,
            user,
        } = split_attrs(attrs)?;
        let mut potency = explicit_potency;
        let mut kind = explicit_kind;
        let mut attrs = user;
        match typed_by.map(|t| self.resolve_type(t)) {
            Some(TypeRef::Physical(k)) => {
                if kind.is_none() && k != PhysicalKind::Clabject {
                    kind = Some(k);
                }
            }
            Some(TypeRef::Element(t)) => {
                let derived = t
                    .potency
                    .instantiate()
                    .ok_or_else(|| PhysicalError::PotencyExhausted(t.name.clone()))?;
                if potency.is_none() && derived != Potency::Infinite {
                    potency = Some(derived);
                }
                // declared attributes become empty slots, in the type's order
                let mut slots: Vec<(String, String)> = t
                    .attributes
                    .keys()
                    .map(|k| {
                        let v = attrs
                            .iter()
                            .rev()
                            .find(|(a, _)| a == k)
                            .map(|(_, v)| v.clone())
                            .unwrap_or_default();
                        (k.clone(), v)
                    })
                    .collect();
                attrs.retain(|(a, _)| !t.attributes.contains_key(a));
                slots.append(&mut attrs);
                attrs = slots;
            }
            Some(TypeRef::Ambiguous) | Some(TypeRef::Unresolved) | None => {}
        }
        if potency == Some(Potency::Infinite) && explicit_potency.is_none() {
            potency = None;
        }
        Ok(PhysicalOp::Create {
            name: name.to_owned(),
            typed_by: typed_by.map(str::to_owned),
            kind,
            potency,
            attrs,
        })
    }

    /// Strict precondition for [`PhysicalModel::instantiate`]: the type must
    /// be a live element.
    pub fn plan_instantiate(
        &mut self,
        type_name: &str,
        instance_name: &str,
    ) -> Result<PhysicalOp, PhysicalError> {
        match self.resolve_type(type_name) {
            TypeRef::Element(_) => self.plan_create(instance_name, Some(type_name), &[]),
            TypeRef::Ambiguous => Err(PhysicalError::AmbiguousName(type_name.to_owned())),
            _ => Err(PhysicalError::UnknownType(type_name.to_owned())),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn plan_link(
        &mut self,
        from: &Selector,
        port: &str,
        to: &Selector,
        name: Option<&str>,
        typed_by: Option<&str>,
        attrs: &[(String, String)],
    ) -> Result<PhysicalOp, PhysicalError> {
        if port.is_empty() || port.contains(['.', ' ', '\t', '\n', '\r']) {
            return Err(PhysicalError::InvalidName(port.to_owned()));
        }
        let source = self.resolve_endpoint(from)?;
        let target = self.resolve_endpoint(to)?;
        let SplitAttrs {
            kind: explicit_kind,
            user,
            ..
        } = split_attrs(attrs)?;
        if let Some(n) = name {
            check_name(n)?;
            if self.name_taken(n) {
                return Err(PhysicalError::DuplicateName(n.to_owned()));
            }
        }
        let source_el = self.clabject_any(source);
        let decl = source_el
            .as_ref()
            .and_then(|s| s.typed_by.as_deref())
            .and_then(|t| match self.resolve_type(t) {
                TypeRef::Element(t) if matches!(t.backing, Backing::Vertex(_)) => {
                    self.declaration(t.id, port)
                }
                _ => None,
            });
        let (name, typed_by, kind) = match decl {
            Some(d) => {
                let kind =
                    explicit_kind.or((d.kind != PhysicalKind::Association).then_some(d.kind));
                let name = match name {
                    Some(n) => n.to_owned(),
                    None => self.next_free(&format!("{port}_")),
                };
                (name, typed_by.map(str::to_owned).or(Some(d.name)), kind)
            }
            None => {
                let k = explicit_kind.unwrap_or(PhysicalKind::Association);
                let name = match name {
                    Some(n) => n.to_owned(),
                    None if !self.name_taken(port) => port.to_owned(),
                    None => {
                        let owner = source_el.map(|s| s.name).unwrap_or_default();
                        let qualified = format!("{owner}_{port}");
                        if self.name_taken(&qualified) {
                            self.next_free(&format!("{qualified}_"))
                        } else {
                            qualified
                        }
                    }
                };
                let typed_by = typed_by.map(str::to_owned).or(Some(k.name().to_owned()));
                (name, typed_by, explicit_kind)
            }
        };
        Ok(PhysicalOp::Link {
            name,
            typed_by,
            kind,
            port: port.to_owned(),
            source,
            target,
            attrs: user,
        })
    }

    pub fn plan_update(
        &mut self,
        sel: &Selector,
        typed_by: Option<&str>,
        attrs: &[(String, String)],
    ) -> Result<PhysicalOp, PhysicalError> {
        let id = self.resolve(sel)?;
        let SplitAttrs {
            potency: explicit_potency,
            kind,
            user,
        } = split_attrs(attrs)?;
        let mut potency = explicit_potency;
        if let Some(t) = typed_by {
            if let TypeRef::Element(t) = self.resolve_type(t) {
                if t.id != id && potency.is_none() {
                    potency = Some(
                        t.potency
                            .instantiate()
                            .ok_or_else(|| PhysicalError::PotencyExhausted(t.name.clone()))?,
                    );
                }
            }
        }
        Ok(PhysicalOp::Update {
            id,
            typed_by: typed_by.map(str::to_owned),
            kind,
            potency,
            attrs: user,
        })
    }

    pub fn plan_delete(&mut self, sel: &Selector) -> Result<PhysicalOp, PhysicalError> {
        Ok(PhysicalOp::Delete {
            id: self.resolve(sel)?,
        })
    }

    /// Applies a locally planned op. A delete that would lose the LWW race
    /// against the element's own add is rejected and records nothing.
    pub fn commit(&mut self, op: &PhysicalOp, stamp: Stamp) -> Outcome {
        if let PhysicalOp::Delete { id } = op {
            let added = match self.backing(*id) {
                Some(Backing::Vertex(v)) => self.graph.vertex_set().add_stamp(&v),
                Some(Backing::Edge(e)) => self.graph.edge_set().add_stamp(&e),
                None => None,
            };
            if added.is_none_or(|a| a >= stamp) {
                return Outcome::Nop;
            }
        }
        match self.merge(op, stamp) {
            MergeOutcome::Applied => Outcome::Applied,
            MergeOutcome::Deferred => Outcome::Nop,
        }
    }

    // ---- replicated merge ---------------------------------------------------------

    /// Applies a resolved op. Total apart from deferral: the result depends
    /// only on the op, its stamp and the set of ops merged before.
    pub fn merge(&mut self, op: &PhysicalOp, stamp: Stamp) -> MergeOutcome {
        match op {
            PhysicalOp::Create {
                name,
                typed_by,
                kind,
                potency,
                attrs,
            } => {
                let v = VertexId(stamp.derive_id());
                self.graph.apply(&GraphOp::AddVertex { vertex: v }, stamp);
                for (key, value) in reserved(name, typed_by, kind, potency).chain(user(attrs)) {
                    let op = MapOp::Add { key, value };
                    self.graph
                        .apply(&GraphOp::VertexAttr { vertex: v, op }, stamp);
                }
                self.refresh(v.0);
            }
            PhysicalOp::Link {
                name,
                typed_by,
                kind,
                port,
                source,
                target,
                attrs,
            } => {
                let (s, t) = (VertexId(*source), VertexId(*target));
                if !self.graph.knows_vertex(s) || !self.graph.knows_vertex(t) {
                    return MergeOutcome::Deferred;
                }
                let e = EdgeId(stamp.derive_id());
                self.graph.apply(
                    &GraphOp::AddEdge {
                        edge: e,
                        source: s,
                        target: t,
                    },
                    stamp,
                );
                let port = std::iter::once((keys::PORT.to_owned(), port.clone()));
                for (key, value) in reserved(name, typed_by, kind, &None)
                    .chain(port)
                    .chain(user(attrs))
                {
                    let op = MapOp::Add { key, value };
                    self.graph.apply(&GraphOp::EdgeAttr { edge: e, op }, stamp);
                }
                for id in [e.0, s.0, t.0] {
                    self.refresh(id);
                }
            }
            PhysicalOp::Update {
                id,
                typed_by,
                kind,
                potency,
                attrs,
            } => {
                let Some(backing) = self.backing(*id) else {
                    return MergeOutcome::Deferred;
                };
                let entries = typed_by
                    .iter()
                    .map(|t| (keys::TYPE.to_owned(), t.clone()))
                    .chain(
                        kind.iter()
                            .map(|k| (keys::KIND.to_owned(), k.name().to_owned())),
                    )
                    .chain(
                        potency
                            .iter()
                            .map(|p| (keys::POTENCY.to_owned(), p.to_string())),
                    )
                    .chain(user(attrs));
                for (key, value) in entries {
                    let op = MapOp::Update { key, value };
                    let g = match backing {
                        Backing::Vertex(vertex) => GraphOp::VertexAttr { vertex, op },
                        Backing::Edge(edge) => GraphOp::EdgeAttr { edge, op },
                    };
                    self.graph.apply(&g, stamp);
                }
                self.refresh(*id);
            }
            PhysicalOp::Delete { id } => match self.backing(*id) {
                None => return MergeOutcome::Deferred,
                Some(Backing::Vertex(v)) => {
                    self.graph
                        .apply(&GraphOp::CascadeRemoveVertex { vertex: v }, stamp);
                    let incident: Vec<_> = self.graph.all_incident_edges(v).collect();
                    self.refresh(v.0);
                    for e in incident {
                        self.refresh(e.0);
                    }
                }
                Some(Backing::Edge(e)) => {
                    self.graph.apply(&GraphOp::RemoveEdge { edge: e }, stamp);
                    self.refresh(e.0);
                }
            },
        }
        MergeOutcome::Applied
    }

    fn live_name(&self, id: Uuid) -> Option<String> {
        let map = match self.backing(id)? {
            Backing::Vertex(v) if self.graph.vertex_live(v) => &self.graph.vertex(v)?.map,
            Backing::Edge(e) if self.graph.edge_live(e) => &self.graph.edge(e)?.map,
            _ => return None,
        };
        map.query(keys::NAME).map(str::to_owned)
    }

    fn refresh(&mut self, id: Uuid) {
        let name = self.live_name(id);
        self.names.set(id, name);
    }

    /// Recomputes the name index from the graph alone.
    pub fn rebuild_index(&mut self) {
        let mut fresh = NameIndex::default();
        let ids: Vec<Uuid> = self
            .graph
            .live_vertices()
            .map(|v| v.0)
            .chain(self.graph.live_edges().map(|e| e.0))
            .collect();
        for id in ids {
            fresh.set(id, self.live_name(id));
        }
        self.names = fresh;
    }

    /// Whether the cached index equals a freshly rebuilt one.
    pub fn index_consistent(&self) -> bool {
        let mut copy = self.clone();
        copy.rebuild_index();
        copy.names == self.names
    }

    // ---- typed operations ----------------------------------------------------------

    pub fn create_element(
        &mut self,
        name: &str,
        typed_by: Option<&str>,
        attrs: &[(String, String)],
        stamp: Stamp,
    ) -> Result<Clabject, PhysicalError> {
        let op = self.plan_create(name, typed_by, attrs)?;
        self.commit(&op, stamp);
        Ok(self
            .clabject(stamp.derive_id())
            .expect("created element is live"))
    }

    pub fn link_elements(
        &mut self,
        from: &str,
        port: &str,
        to: &str,
        attrs: &[(String, String)],
        stamp: Stamp,
    ) -> Result<Clabject, PhysicalError> {
        let op = self.plan_link(
            &Selector::ByName(from.into()),
            port,
            &Selector::ByName(to.into()),
            None,
            None,
            attrs,
        )?;
        self.commit(&op, stamp);
        Ok(self
            .clabject(stamp.derive_id())
            .expect("created link is live"))
    }

    pub fn update_element(
        &mut self,
        sel: &Selector,
        attrs: &[(String, String)],
        stamp: Stamp,
    ) -> Result<(), PhysicalError> {
        let op = self.plan_update(sel, None, attrs)?;
        self.commit(&op, stamp);
        Ok(())
    }

    pub fn delete_element(
        &mut self,
        sel: &Selector,
        stamp: Stamp,
    ) -> Result<Outcome, PhysicalError> {
        let op = self.plan_delete(sel)?;
        Ok(self.commit(&op, stamp))
    }

    pub fn instantiate(
        &mut self,
        type_name: &str,
        instance_name: &str,
        stamp: Stamp,
    ) -> Result<Clabject, PhysicalError> {
        let op = self.plan_instantiate(type_name, instance_name)?;
        self.commit(&op, stamp);
        Ok(self
            .clabject(stamp.derive_id())
            .expect("created element is live"))
    }

    pub fn read_model(&self) -> ModelView {
        let mut elements: Vec<Clabject> = self
            .graph
            .live_vertices()
            .filter_map(|v| self.clabject(v.0))
            .collect();
        elements.sort_by(|a, b| (&a.name, a.id).cmp(&(&b.name, b.id)));
        let mut associations: Vec<Association> = self
            .graph
            .live_edges()
            .filter_map(|e| {
                let clabject = self.clabject(e.0)?;
                let (s, t) = self.graph.edge_endpoints(e).ok()?;
                let name_of = |v: VertexId| self.clabject(v.0).map(|c| c.name).unwrap_or_default();
                Some(Association {
                    port: self.port_of(e.0).unwrap_or_default(),
                    source: s.0,
                    source_name: name_of(s),
                    target: t.0,
                    target_name: name_of(t),
                    clabject,
                })
            })
            .collect();
        associations.sort_by(|a, b| {
            (&a.clabject.name, a.clabject.id).cmp(&(&b.clabject.name, b.clabject.id))
        });
        ModelView {
            elements,
            associations,
        }
    }
}

fn reserved(
    name: &str,
    typed_by: &Option<String>,
    kind: &Option<PhysicalKind>,
    potency: &Option<Potency>,
) -> impl Iterator<Item = (String, String)> {
    let mut out = vec![(keys::NAME.to_owned(), name.to_owned())];
    if let Some(t) = typed_by {
        out.push((keys::TYPE.to_owned(), t.clone()));
    }
    if let Some(k) = kind {
        out.push((keys::KIND.to_owned(), k.name().to_owned()));
    }
    if let Some(p) = potency {
        out.push((keys::POTENCY.to_owned(), p.to_string()));
    }
    out.into_iter()
}

fn user(attrs: &[(String, String)]) -> impl Iterator<Item = (String, String)> + '_ {
    attrs.iter().cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stamp::ReplicaId;

    fn st(n: u64) -> Stamp {
        Stamp::new(n, ReplicaId::from_u128(1))
    }

    fn kv(k: &str, v: &str) -> (String, String) {
        (k.to_owned(), v.to_owned())
    }

    fn by(name: &str) -> Selector {
        Selector::ByName(name.to_owned())
    }

    /// Minimal mindmap metamodel used across tests.
    fn metamodel() -> PhysicalModel {
        let mut m = PhysicalModel::new();
        m.create_element("MindMap", Some("Class"), &[kv("title", "String")], st(1))
            .unwrap();
        m.create_element(
            "CentralTopic",
            Some("Class"),
            &[kv("name", "String")],
            st(2),
        )
        .unwrap();
        m.link_elements(
            "MindMap",
            "topic",
            "CentralTopic",
            &[
                kv("kind", "Composition"),
                kv("lower", "1"),
                kv("upper", "1"),
            ],
            st(3),
        )
        .unwrap();
        m
    }

    #[test]
    fn create_writes_reserved_and_user_entries() {
        let mut m = PhysicalModel::new();
        let c = m
            .create_element(
                "mindmap_0",
                Some("MindMap"),
                &[kv("title", "mindmap_0")],
                st(5),
            )
            .unwrap();
        let map = &m.graph().vertex(VertexId(c.id)).unwrap().map;
        assert_eq!(map.query("$type"), Some("MindMap"));
        assert_eq!(map.query("$name"), Some("mindmap_0"));
        assert_eq!(map.query("title"), Some("mindmap_0"));
        assert_eq!(c.potency, Potency::Infinite);
    }

    #[test]
    fn empty_and_duplicate_names_rejected() {
        let mut m = PhysicalModel::new();
        assert_eq!(
            m.create_element("", None, &[], st(1)),
            Err(PhysicalError::EmptyName)
        );
        m.create_element("a", None, &[], st(2)).unwrap();
        assert_eq!(
            m.create_element("a", None, &[], st(3)),
            Err(PhysicalError::DuplicateName("a".into()))
        );
        assert!(matches!(
            m.create_element("67e55044-10b1-426f-9247-bb680e5fe0c8", None, &[], st(4)),
            Err(PhysicalError::InvalidName(_))
        ));
    }

    #[test]
    fn disconnected_instance_is_legal() {
        let mut m = metamodel();
        m.create_element("tasks", Some("CentralTopic"), &[], st(10))
            .unwrap();
        let view = m.read_model();
        assert_eq!(
            view.element("tasks").unwrap().typed_by.as_deref(),
            Some("CentralTopic")
        );
    }

    #[test]
    fn instance_link_is_named_after_port() {
        let mut m = metamodel();
        m.create_element("mindmap_0", Some("MindMap"), &[], st(10))
            .unwrap();
        m.create_element("tasks", Some("CentralTopic"), &[], st(11))
            .unwrap();
        let link = m
            .link_elements("mindmap_0", "topic", "tasks", &[], st(12))
            .unwrap();
        assert_eq!(link.name, "topic_0");
        assert_eq!(link.typed_by.as_deref(), Some("topic"));
        assert_eq!(link.kind, PhysicalKind::Composition);
        let view = m.read_model();
        let a = view.association("topic_0").unwrap();
        assert_eq!(
            (a.source_name.as_str(), a.target_name.as_str()),
            ("mindmap_0", "tasks")
        );
    }

    #[test]
    fn declaration_names_fall_back_to_owner_prefix() {
        let mut m = metamodel();
        m.create_element("Other", Some("Class"), &[], st(10))
            .unwrap();
        let d = m
            .link_elements("Other", "topic", "CentralTopic", &[], st(11))
            .unwrap();
        assert_eq!(d.name, "Other_topic");
        assert_eq!(d.typed_by.as_deref(), Some("Association"));
    }

    #[test]
    fn link_with_unknown_source() {
        let mut m = metamodel();
        assert_eq!(
            m.link_elements("ghost", "topic", "MindMap", &[], st(9)),
            Err(PhysicalError::UnknownVertex("ghost".into()))
        );
    }

    #[test]
    fn instantiation_copies_slots_and_decrements() {
        let mut m = PhysicalModel::new();
        m.create_element(
            "Marker",
            None,
            &[kv("symbol", "String"), kv("potency", "2")],
            st(1),
        )
        .unwrap();
        let tm = m.instantiate("Marker", "TextMarker", st(2)).unwrap();
        assert_eq!(tm.potency, Potency::Finite(1));
        assert_eq!(tm.attributes.get("symbol").map(String::as_str), Some(""));
        let m0 = m.instantiate("TextMarker", "marker_0", st(3)).unwrap();
        assert_eq!(m0.potency, Potency::Finite(0));
        assert_eq!(
            m.instantiate("marker_0", "nope", st(4)),
            Err(PhysicalError::PotencyExhausted("marker_0".into()))
        );
    }

    #[test]
    fn update_sets_title_and_potency() {
        let mut m = PhysicalModel::new();
        m.create_element("Marker", None, &[kv("potency", "1")], st(1))
            .unwrap();
        m.create_element("mm", None, &[kv("title", "mindmap_0")], st(2))
            .unwrap();
        m.update_element(&by("mm"), &[kv("title", "todolist")], st(3))
            .unwrap();
        m.update_element(&by("Marker"), &[kv("potency", "2")], st(4))
            .unwrap();
        let v = m.read_model();
        assert_eq!(v.element("mm").unwrap().attributes["title"], "todolist");
        assert_eq!(v.element("Marker").unwrap().potency, Potency::Finite(2));
    }

    #[test]
    fn update_tombstoned_by_id_is_unknown() {
        let mut m = PhysicalModel::new();
        let c = m.create_element("a", None, &[], st(1)).unwrap();
        assert_eq!(m.delete_element(&by("a"), st(2)), Ok(Outcome::Applied));
        assert!(matches!(
            m.update_element(&Selector::ById(c.id), &[kv("x", "1")], st(3)),
            Err(PhysicalError::UnknownElement(_))
        ));
        assert!(matches!(
            m.delete_element(&by("a"), st(4)),
            Err(PhysicalError::UnknownElement(_))
        ));
    }

    #[test]
    fn delete_cascades_and_remote_link_revives() {
        let mut m = metamodel();
        m.create_element("mindmap_0", Some("MindMap"), &[], st(10))
            .unwrap();
        m.create_element("tasks", Some("CentralTopic"), &[], st(11))
            .unwrap();
        let link = m
            .plan_link(&by("mindmap_0"), "topic", &by("tasks"), None, None, &[])
            .unwrap();
        // deleted locally at 13, the concurrent link at 14 arrives later
        assert_eq!(m.delete_element(&by("tasks"), st(13)), Ok(Outcome::Applied));
        assert!(m.read_model().element("tasks").is_none());
        assert_eq!(m.merge(&link, st(14)), MergeOutcome::Applied);
        assert!(m.read_model().element("tasks").is_some());
        assert!(m.index_consistent());
    }

    #[test]
    fn delete_losing_the_race_is_rejected() {
        let mut m = PhysicalModel::new();
        m.create_element("a", None, &[], st(10)).unwrap();
        assert_eq!(m.delete_element(&by("a"), st(9)), Ok(Outcome::Nop));
        assert!(m.read_model().element("a").is_some());
        assert!(m.graph().vertex_set().remove_set().is_empty());
    }

    #[test]
    fn remote_ops_on_unknown_ids_are_deferred() {
        let mut m = PhysicalModel::new();
        let ghost = Uuid::from_u128(77);
        assert_eq!(
            m.merge(&PhysicalOp::Delete { id: ghost }, st(1)),
            MergeOutcome::Deferred
        );
        let link = PhysicalOp::Link {
            name: "l".into(),
            typed_by: None,
            kind: None,
            port: "p".into(),
            source: ghost,
            target: ghost,
            attrs: vec![],
        };
        assert_eq!(m.merge(&link, st(2)), MergeOutcome::Deferred);
        assert!(m.read_model().is_empty());
    }

    #[test]
    fn view_is_order_independent() {
        use itertools::Itertools;
        let mut base = PhysicalModel::new();
        let ops = vec![
            (base.plan_create("a", None, &[]).unwrap(), st(1)),
            (base.plan_create("b", None, &[]).unwrap(), st(2)),
        ];
        base.merge(&ops[0].0, ops[0].1);
        base.merge(&ops[1].0, ops[1].1);
        let mut all = ops.clone();
        all.push((
            base.plan_link(&by("a"), "r", &by("b"), None, None, &[])
                .unwrap(),
            st(3),
        ));
        all.push((
            PhysicalOp::Delete {
                id: st(2).derive_id(),
            },
            st(4),
        ));
        all.push((
            PhysicalOp::Update {
                id: st(1).derive_id(),
                typed_by: None,
                kind: None,
                potency: None,
                attrs: vec![kv("x", "1")],
            },
            st(5),
        ));
        let mut views = Vec::new();
        for perm in all.iter().permutations(all.len()) {
            let mut m = PhysicalModel::new();
            // deferred ops retried until no progress, as a replica does
            let mut pending: Vec<_> = perm.into_iter().collect();
            loop {
                let before = pending.len();
                pending.retain(|(op, s)| m.merge(op, *s) == MergeOutcome::Deferred);
                if pending.len() == before {
                    break;
                }
            }
            assert!(pending.is_empty());
            assert!(m.index_consistent());
            views.push(m.read_model());
        }
        assert!(views.windows(2).all(|w| w[0] == w[1]));
        assert!(views[0].element("b").is_none());
    }
}
