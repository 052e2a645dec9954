//! Brute-force reference implementations. They read raw link slots only and
//! never call the engine's containment or dependency helpers.

#![allow(dead_code)]

pub mod checks;

use std::collections::{BTreeMap, BTreeSet};

use facet_core::{EntityId, Model, TypeId};

pub struct Oracle<'m> {
    pub model: &'m Model,
    pub parent: BTreeMap<EntityId, EntityId>,
    /// (source, target, kind), one per association instance.
    pub edges: Vec<(EntityId, EntityId, TypeId)>,
}

impl<'m> Oracle<'m> {
    pub fn new(model: &'m Model) -> Self {
        let mut parent = BTreeMap::new();
        let mut edges = Vec::new();
        for e in model.entity_ids() {
            for (slot, targets) in model.link_slots(e).unwrap() {
                for &t in targets {
                    if slot.container {
                        assert!(parent.insert(t, e).is_none(), "{t} has two containers");
                    }
                    if slot.primary {
                        if let Some(kind) = slot.kind {
                            edges.push((e, t, kind));
                        }
                    }
                }
            }
        }
        Oracle {
            model,
            parent,
            edges,
        }
    }

    pub fn ancestors(&self, e: EntityId) -> Vec<EntityId> {
        let mut out = vec![e];
        let mut cur = e;
        while let Some(&p) = self.parent.get(&cur) {
            assert!(!out.contains(&p), "containment cycle");
            out.push(p);
            cur = p;
        }
        out
    }

    pub fn under(&self, e: EntityId, root: EntityId) -> bool {
        self.ancestors(e).contains(&root)
    }

    pub fn conforms(&self, e: EntityId, ty: TypeId) -> bool {
        let mm = self.model.metamodel();
        mm.conforms(self.model.type_of(e).unwrap(), ty)
    }

    pub fn at_scope(&self, input: &[EntityId], ty: TypeId) -> BTreeSet<EntityId> {
        input
            .iter()
            .filter_map(|&e| {
                self.ancestors(e)
                    .into_iter()
                    .find(|&a| self.conforms(a, ty))
            })
            .collect()
    }

    pub fn to_scope(&self, input: &[EntityId], ty: TypeId) -> BTreeSet<EntityId> {
        self.model
            .entity_ids()
            .filter(|&d| input.iter().any(|&r| self.under(d, r)) && self.conforms(d, ty))
            .collect()
    }

    /// Opposite ends of kind-matching edges crossing each receiver's
    /// subtree border.
    pub fn dependencies(
        &self,
        input: &[EntityId],
        outgoing: bool,
        kind: Option<TypeId>,
    ) -> BTreeSet<EntityId> {
        let mm = self.model.metamodel();
        let mut out = BTreeSet::new();
        for &r in input {
            for &(s, t, k) in &self.edges {
                if kind.is_some_and(|want| !mm.conforms(k, want)) {
                    continue;
                }
                let (inner, other) = if outgoing { (s, t) } else { (t, s) };
                if self.under(inner, r) && !self.under(other, r) {
                    out.insert(other);
                }
            }
        }
        out
    }

    /// Internal and external edge counts for a set seen as one container.
    pub fn counts(&self, members: &BTreeSet<EntityId>) -> (usize, usize) {
        let inside = |e: EntityId| members.iter().any(|&m| self.under(e, m));
        let mut internal = 0;
        let mut external = 0;
        for &(s, t, _) in &self.edges {
            match (inside(s), inside(t)) {
                (true, true) => internal += 1,
                (false, false) => {}
                _ => external += 1,
            }
        }
        (internal, external)
    }
}
