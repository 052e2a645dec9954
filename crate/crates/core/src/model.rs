//! Entity storage.
//!
//! Every entity owns exactly the slots of its type's [`SlotTable`]: property
//! values and link sets are allocated per table entry, and any access to a
//! name outside the table is an error. Links are always stored on both ends;
//! containment links form a forest.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compose::{LinkSlot, SlotTable};
use crate::metamodel::{EndId, MetaModel, Multiplicity, TypeId};
use crate::stdlib::{ANCHOR_END_SLOT, ANCHOR_FILE_SLOT, ANCHOR_START_SLOT};
use crate::tags::Tag;
use crate::value::{Value, ValueKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(pub u64);

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A file region: 1-based character offsets, both ends inclusive.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceAnchor {
    pub file: String,
    pub start: usize,
    pub end: usize,
}

/// One association instance between two entities. `via` is the source-side
/// end, which tells apart two associations of the same kind.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dependency {
    pub source: EntityId,
    pub target: EntityId,
    pub kind: TypeId,
    pub via: EndId,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown type '{0}'")]
    UnknownType(String),
    #[error("type '{0}' cannot be instantiated")]
    NotInstantiable(String),
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("unknown slot '{slot}' on type '{type_name}'")]
    UnknownSlot { slot: String, type_name: String },
    #[error("slot '{slot}' expects {expected}, got {found}")]
    KindMismatch {
        slot: String,
        expected: ValueKind,
        found: ValueKind,
    },
    #[error("entity of type '{found}' cannot be linked through '{slot}' (expects '{expected}')")]
    Conformance {
        slot: String,
        expected: String,
        found: String,
    },
    #[error("linking {parent} -> {child} would make the containment cyclic")]
    ContainmentCycle { parent: EntityId, child: EntityId },
    #[error("entity {child} is already contained by {container}")]
    AlreadyContained {
        child: EntityId,
        container: EntityId,
    },
    #[error("entity id {0} is already in use")]
    IdInUse(EntityId),
    #[error("unknown source file '{0}'")]
    UnknownSourceFile(String),
    #[error("invalid source anchor {start}..{end} for '{file}' ({len} characters)")]
    InvalidAnchor {
        file: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("entity {0} does not belong to this model")]
    ForeignEntity(EntityId),
    #[error("unknown tag '{0}'")]
    UnknownTag(String),
    #[error("duplicate tag '{0}'")]
    DuplicateTag(String),
    #[error("invalid tag color '{0}' (expected 6 hex digits)")]
    InvalidColor(String),
}

#[derive(Clone, Debug)]
struct EntityData {
    ty: TypeId,
    props: Vec<Option<Value>>,
    links: Vec<BTreeSet<EntityId>>,
}

/// A populated model over one generated meta-model.
#[derive(Clone, Debug)]
pub struct Model {
    name: String,
    mm: Arc<MetaModel>,
    entities: BTreeMap<EntityId, EntityData>,
    next_id: u64,
    source_texts: BTreeMap<String, String>,
    pub(crate) tags: BTreeMap<EntityId, Tag>,
}

impl Model {
    pub fn new(name: impl Into<String>, mm: Arc<MetaModel>) -> Self {
        Model {
            name: name.into(),
            mm,
            entities: BTreeMap::new(),
            next_id: 1,
            source_texts: BTreeMap::new(),
            tags: BTreeMap::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn metamodel(&self) -> &Arc<MetaModel> {
        &self.mm
    }

    pub(crate) fn allocate_id(&mut self) -> EntityId {
        let id = EntityId(self.next_id);
        self.next_id += 1;
        id
    }

    fn blank(&self, ty: TypeId) -> EntityData {
        let table = self.mm.table(ty);
        EntityData {
            ty,
            props: vec![None; table.properties.len()],
            links: vec![BTreeSet::new(); table.links.len()],
        }
    }

    fn check_type(&self, ty: TypeId) -> Result<(), ModelError> {
        if !self.mm.owns(ty) {
            return Err(ModelError::UnknownType(format!("{ty:?}")));
        }
        if !self.mm.is_instantiable(ty) {
            return Err(ModelError::NotInstantiable(
                self.mm.type_name(ty).to_owned(),
            ));
        }
        Ok(())
    }

    pub fn create(&mut self, ty: TypeId) -> Result<EntityId, ModelError> {
        self.check_type(ty)?;
        let id = self.allocate_id();
        let data = self.blank(ty);
        self.entities.insert(id, data);
        Ok(id)
    }

    pub fn create_named_type(&mut self, type_name: &str) -> Result<EntityId, ModelError> {
        let ty = self
            .mm
            .lookup(type_name)
            .ok_or_else(|| ModelError::UnknownType(type_name.to_owned()))?;
        self.create(ty)
    }

    /// Creates an entity with a caller-chosen id, as when loading a stored
    /// model. Later allocations continue above the highest id seen.
    pub fn create_with_id(&mut self, id: EntityId, ty: TypeId) -> Result<(), ModelError> {
        self.check_type(ty)?;
        if id.0 == 0 || self.entities.contains_key(&id) || self.tags.contains_key(&id) {
            return Err(ModelError::IdInUse(id));
        }
        let data = self.blank(ty);
        self.entities.insert(id, data);
        self.next_id = self.next_id.max(id.0 + 1);
        Ok(())
    }

    /// Removes an entity and every link to it. Contained entities are not
    /// deleted; they become roots.
    pub fn delete(&mut self, id: EntityId) -> Result<(), ModelError> {
        if self.tags.remove(&id).is_some() {
            return Ok(());
        }
        let data = self.entity(id)?.clone();
        for (slot, targets) in data.links.iter().enumerate() {
            for &t in targets {
                self.unlink_at(id, slot, t);
            }
        }
        self.entities.remove(&id);
        for tag in self.tags.values_mut() {
            tag.members.remove(&id);
        }
        Ok(())
    }

    pub fn contains(&self, id: EntityId) -> bool {
        self.entities.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    /// Entity ids in ascending order (tags excluded).
    pub fn entity_ids(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.entities.keys().copied()
    }

    fn entity(&self, id: EntityId) -> Result<&EntityData, ModelError> {
        self.entities.get(&id).ok_or(ModelError::UnknownEntity(id))
    }

    fn entity_mut(&mut self, id: EntityId) -> Result<&mut EntityData, ModelError> {
        self.entities
            .get_mut(&id)
            .ok_or(ModelError::UnknownEntity(id))
    }

    pub fn type_of(&self, id: EntityId) -> Result<TypeId, ModelError> {
        Ok(self.entity(id)?.ty)
    }

    pub fn type_name(&self, id: EntityId) -> Result<&str, ModelError> {
        Ok(self.mm.type_name(self.type_of(id)?))
    }

    pub fn table_of(&self, id: EntityId) -> Result<&SlotTable, ModelError> {
        Ok(self.mm.table(self.type_of(id)?))
    }

    /// Number of slots the entity can store; always its table size.
    pub fn slot_capacity(&self, id: EntityId) -> Result<usize, ModelError> {
        let data = self.entity(id)?;
        Ok(data.props.len() + data.links.len())
    }

    /// Whether `id` conforms to `ty` (class, superclass, or used trait).
    pub fn is_a(&self, id: EntityId, ty: TypeId) -> bool {
        self.type_of(id)
            .map(|t| self.mm.conforms(t, ty))
            .unwrap_or(false)
    }

    fn unknown_slot(&self, ty: TypeId, slot: &str) -> ModelError {
        ModelError::UnknownSlot {
            slot: slot.to_owned(),
            type_name: self.mm.type_name(ty).to_owned(),
        }
    }

    fn property_index(&self, id: EntityId, slot: &str) -> Result<(usize, ValueKind), ModelError> {
        let ty = self.type_of(id)?;
        let table = self.mm.table(ty);
        table
            .property_index(slot)
            .map(|i| (i, table.properties[i].kind))
            .ok_or_else(|| self.unknown_slot(ty, slot))
    }

    pub fn set_property(
        &mut self,
        id: EntityId,
        slot: &str,
        value: impl Into<Value>,
    ) -> Result<(), ModelError> {
        let value = value.into();
        let (index, kind) = self.property_index(id, slot)?;
        if value.kind() != kind {
            return Err(ModelError::KindMismatch {
                slot: slot.to_owned(),
                expected: kind,
                found: value.kind(),
            });
        }
        self.entity_mut(id)?.props[index] = Some(value);
        Ok(())
    }

    /// `Ok(None)` means the slot exists but holds no value.
    pub fn get_property(&self, id: EntityId, slot: &str) -> Result<Option<&Value>, ModelError> {
        let (index, _) = self.property_index(id, slot)?;
        Ok(self.entity(id)?.props[index].as_ref())
    }

    pub fn unset_property(&mut self, id: EntityId, slot: &str) -> Result<(), ModelError> {
        let (index, _) = self.property_index(id, slot)?;
        self.entity_mut(id)?.props[index] = None;
        Ok(())
    }

    /// Property values by table position, for serializers.
    pub fn property_values(&self, id: EntityId) -> Result<&[Option<Value>], ModelError> {
        Ok(&self.entity(id)?.props)
    }

    /// The `name` property when the type has one.
    pub fn name_of(&self, id: EntityId) -> Option<&str> {
        self.get_property(id, "name")
            .ok()
            .flatten()
            .and_then(Value::as_str)
    }

    fn link_index(&self, id: EntityId, slot: &str) -> Result<(usize, LinkSlot), ModelError> {
        let ty = self.type_of(id)?;
        let table = self.mm.table(ty);
        table
            .link_index(slot)
            .map(|i| (i, table.links[i].clone()))
            .ok_or_else(|| self.unknown_slot(ty, slot))
    }

    pub fn links(&self, id: EntityId, slot: &str) -> Result<&BTreeSet<EntityId>, ModelError> {
        let (index, _) = self.link_index(id, slot)?;
        Ok(&self.entity(id)?.links[index])
    }

    /// Link slots of an entity with their current targets, in table order.
    pub fn link_slots(
        &self,
        id: EntityId,
    ) -> Result<impl Iterator<Item = (&LinkSlot, &BTreeSet<EntityId>)> + '_, ModelError> {
        let data = self.entity(id)?;
        let table = self.mm.table(data.ty);
        Ok(table.links.iter().zip(data.links.iter()))
    }

    /// Links `a` to `b` through `a`'s slot `slot`, storing the inverse on `b`.
    /// A to-one slot already holding another entity is re-pointed and the
    /// previous target unlinked.
    pub fn link(&mut self, a: EntityId, slot: &str, b: EntityId) -> Result<(), ModelError> {
        let (ia, ls) = self.link_index(a, slot)?;
        let tb = self.type_of(b)?;
        let conformance = || ModelError::Conformance {
            slot: slot.to_owned(),
            expected: self.mm.type_name(ls.target).to_owned(),
            found: self.mm.type_name(tb).to_owned(),
        };
        if !self.mm.conforms(tb, ls.target) {
            return Err(conformance());
        }
        let table_b = self.mm.table(tb);
        let ib = table_b
            .link_index_by_end(ls.opposite)
            .ok_or_else(conformance)?;
        let opposite_multiplicity = table_b.links[ib].multiplicity;
        let opposite_container = table_b.links[ib].container;
        if self.entities[&a].links[ia].contains(&b) {
            return Ok(());
        }

        let containment = if ls.container {
            Some((a, b, ib))
        } else if opposite_container {
            Some((b, a, ia))
        } else {
            None
        };
        if let Some((parent, child, child_slot)) = containment {
            if self.ancestors_or_self(parent).contains(&child) {
                return Err(ModelError::ContainmentCycle { parent, child });
            }
            if let Some((slot_index, container)) = self.container_link(child) {
                if slot_index != child_slot {
                    return Err(ModelError::AlreadyContained { child, container });
                }
            }
        }

        if ls.multiplicity == Multiplicity::One {
            let old: Vec<EntityId> = self.entities[&a].links[ia].iter().copied().collect();
            for t in old {
                self.unlink_at(a, ia, t);
            }
        }
        if opposite_multiplicity == Multiplicity::One {
            let old: Vec<EntityId> = self.entities[&b].links[ib].iter().copied().collect();
            for t in old {
                self.unlink_at(b, ib, t);
            }
        }
        self.entity_mut(a)?.links[ia].insert(b);
        self.entity_mut(b)?.links[ib].insert(a);
        Ok(())
    }

    /// Removes the link; a missing link is not an error.
    pub fn unlink(&mut self, a: EntityId, slot: &str, b: EntityId) -> Result<(), ModelError> {
        let (ia, _) = self.link_index(a, slot)?;
        self.entity(b)?;
        self.unlink_at(a, ia, b);
        Ok(())
    }

    fn unlink_at(&mut self, a: EntityId, ia: usize, b: EntityId) {
        let Some(data) = self.entities.get_mut(&a) else {
            return;
        };
        if !data.links[ia].remove(&b) {
            return;
        }
        let opposite = self.mm.table(data.ty).links[ia].opposite;
        if let Some(data_b) = self.entities.get_mut(&b) {
            if let Some(ib) = self.mm.table(data_b.ty).link_index_by_end(opposite) {
                data_b.links[ib].remove(&a);
            }
        }
    }

    /// The slot index (on `child`) and entity of the child's container link.
    fn container_link(&self, child: EntityId) -> Option<(usize, EntityId)> {
        let data = self.entities.get(&child)?;
        let table = self.mm.table(data.ty);
        table.links.iter().enumerate().find_map(|(i, ls)| {
            if ls.container || !self.mm.end(ls.opposite).container {
                return None;
            }
            data.links[i].iter().next().map(|&c| (i, c))
        })
    }

    pub fn container_of(&self, id: EntityId) -> Option<EntityId> {
        self.container_link(id).map(|(_, c)| c)
    }

    /// Entities linked through `id`'s container-end slots.
    pub fn children_of(&self, id: EntityId) -> BTreeSet<EntityId> {
        let Some(data) = self.entities.get(&id) else {
            return BTreeSet::new();
        };
        let table = self.mm.table(data.ty);
        table
            .links
            .iter()
            .zip(&data.links)
            .filter(|(ls, _)| ls.container)
            .flat_map(|(_, set)| set.iter().copied())
            .collect()
    }

    /// `id` followed by its containers up to the root.
    pub fn ancestors_or_self(&self, id: EntityId) -> Vec<EntityId> {
        let mut chain = vec![id];
        let mut current = id;
        while let Some(parent) = self.container_of(current) {
            chain.push(parent);
            current = parent;
        }
        chain
    }

    /// `id` and everything it transitively contains.
    pub fn subtree(&self, id: EntityId) -> BTreeSet<EntityId> {
        let mut out = BTreeSet::new();
        let mut stack = vec![id];
        while let Some(x) = stack.pop() {
            if out.insert(x) {
                stack.extend(self.children_of(x));
            }
        }
        out
    }

    /// Dependencies leaving `id` itself (no aggregation over children).
    pub fn outgoing_dependencies(&self, id: EntityId) -> Vec<Dependency> {
        self.directed_dependencies(id, true)
    }

    /// Dependencies arriving at `id` itself.
    pub fn incoming_dependencies(&self, id: EntityId) -> Vec<Dependency> {
        self.directed_dependencies(id, false)
    }

    fn directed_dependencies(&self, id: EntityId, outgoing: bool) -> Vec<Dependency> {
        let Some(data) = self.entities.get(&id) else {
            return Vec::new();
        };
        let table = self.mm.table(data.ty);
        let mut out = Vec::new();
        for (ls, set) in table.links.iter().zip(&data.links) {
            let Some(kind) = ls.kind else { continue };
            if ls.primary != outgoing {
                continue;
            }
            for &other in set {
                out.push(if outgoing {
                    Dependency {
                        source: id,
                        target: other,
                        kind,
                        via: ls.end,
                    }
                } else {
                    Dependency {
                        source: other,
                        target: id,
                        kind,
                        via: ls.opposite,
                    }
                });
            }
        }
        out
    }

    /// Every association instance of a dependency kind in the model.
    pub fn dependencies(&self) -> Vec<Dependency> {
        self.entity_ids()
            .flat_map(|id| self.outgoing_dependencies(id))
            .collect()
    }

    /// Number of stored links, each pair counted once.
    pub fn link_count(&self) -> usize {
        self.entities
            .values()
            .map(|data| {
                let table = self.mm.table(data.ty);
                table
                    .links
                    .iter()
                    .zip(&data.links)
                    .filter(|(ls, _)| ls.primary)
                    .map(|(_, set)| set.len())
                    .sum::<usize>()
            })
            .sum()
    }

    pub fn add_source_text(&mut self, path: impl Into<String>, text: impl Into<String>) {
        self.source_texts.insert(path.into(), text.into());
    }

    pub fn source_text(&self, path: &str) -> Option<&str> {
        self.source_texts.get(path).map(String::as_str)
    }

    pub fn source_files(&self) -> impl Iterator<Item = (&str, &str)> {
        self.source_texts
            .iter()
            .map(|(p, t)| (p.as_str(), t.as_str()))
    }

    pub fn set_source_anchor(
        &mut self,
        id: EntityId,
        anchor: SourceAnchor,
    ) -> Result<(), ModelError> {
        let text = self
            .source_texts
            .get(&anchor.file)
            .ok_or_else(|| ModelError::UnknownSourceFile(anchor.file.clone()))?;
        let len = text.chars().count();
        if anchor.start < 1 || anchor.start > anchor.end || anchor.end > len {
            return Err(ModelError::InvalidAnchor {
                file: anchor.file,
                start: anchor.start,
                end: anchor.end,
                len,
            });
        }
        // Check all three slots before writing any of them.
        for slot in [ANCHOR_FILE_SLOT, ANCHOR_START_SLOT, ANCHOR_END_SLOT] {
            self.property_index(id, slot)?;
        }
        self.set_property(id, ANCHOR_FILE_SLOT, anchor.file)?;
        self.set_property(id, ANCHOR_START_SLOT, anchor.start as i64)?;
        self.set_property(id, ANCHOR_END_SLOT, anchor.end as i64)?;
        Ok(())
    }

    pub fn source_anchor(&self, id: EntityId) -> Option<SourceAnchor> {
        let file = self.get_property(id, ANCHOR_FILE_SLOT).ok()??.as_str()?;
        let start = self.get_property(id, ANCHOR_START_SLOT).ok()??.as_f64()?;
        let end = self.get_property(id, ANCHOR_END_SLOT).ok()??.as_f64()?;
        Some(SourceAnchor {
            file: file.to_owned(),
            start: start as usize,
            end: end as usize,
        })
    }

    /// The anchored text of an entity, if it has a valid anchor.
    pub fn source_slice(&self, id: EntityId) -> Option<String> {
        let anchor = self.source_anchor(id)?;
        let text = self.source_text(&anchor.file)?;
        if anchor.start < 1 || anchor.start > anchor.end {
            return None;
        }
        let slice: String = text
            .chars()
            .skip(anchor.start - 1)
            .take(anchor.end - anchor.start + 1)
            .collect();
        (slice.chars().count() == anchor.end - anchor.start + 1).then_some(slice)
    }
}
