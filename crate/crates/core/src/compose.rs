//! Flattening of composed types into slot tables.
//!
//! The visible slots of a type are, in order: those of its superclass, those
//! of each used trait, then its own properties and association ends. The
//! type's resolutions are applied last. A slot reached through several paths
//! (a diamond over the same trait) is kept once; two different declarations
//! sharing a visible name are a conflict that generation reports.

use std::collections::BTreeMap;
use std::fmt;

use crate::metamodel::{
    EndId, MetaModel, MetaModelBuilder, MetaModelError, Multiplicity, ResolutionKind, SlotConflict,
    TypeId,
};
use crate::value::ValueKind;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertySlot {
    /// Visible name, after aliasing.
    pub name: String,
    pub kind: ValueKind,
    pub origin: TypeId,
    /// Name in the declaring type.
    pub declared_name: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkSlot {
    pub name: String,
    pub end: EndId,
    pub opposite: EndId,
    pub multiplicity: Multiplicity,
    pub container: bool,
    pub primary: bool,
    pub kind: Option<TypeId>,
    pub target: TypeId,
    pub origin: TypeId,
}

/// The slots an instance of a type may store, and nothing else.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SlotTable {
    pub properties: Vec<PropertySlot>,
    pub links: Vec<LinkSlot>,
}

impl SlotTable {
    pub fn property_index(&self, name: &str) -> Option<usize> {
        self.properties.iter().position(|p| p.name == name)
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.links.iter().position(|l| l.name == name)
    }

    pub fn link_index_by_end(&self, end: EndId) -> Option<usize> {
        self.links.iter().position(|l| l.end == end)
    }

    pub fn len(&self) -> usize {
        self.properties.len() + self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slot_names(&self) -> impl Iterator<Item = &str> {
        self.properties
            .iter()
            .map(|p| p.name.as_str())
            .chain(self.links.iter().map(|l| l.name.as_str()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum SlotRef {
    Property { origin: u32, index: u32 },
    End(EndId),
}

#[derive(Clone, Debug)]
struct Entry {
    name: String,
    slot: SlotRef,
    origin: TypeId,
}

pub(crate) fn compile(def: &MetaModelBuilder) -> Result<Vec<SlotTable>, MetaModelError> {
    let ids: Vec<TypeId> = def.type_ids().collect();
    let mut memo: Vec<Option<Vec<Entry>>> = vec![None; ids.len()];
    let mut conflicts = Vec::new();
    for &id in &ids {
        visible(def, id, &mut memo, &mut conflicts)?;
    }
    if !conflicts.is_empty() {
        return Err(MetaModelError::Conflicts(conflicts));
    }
    Ok(ids
        .iter()
        .map(|id| to_table(def, memo[id.index()].as_ref().expect("computed")))
        .collect())
}

fn visible(
    def: &MetaModelBuilder,
    id: TypeId,
    memo: &mut Vec<Option<Vec<Entry>>>,
    conflicts: &mut Vec<SlotConflict>,
) -> Result<(), MetaModelError> {
    if memo[id.index()].is_some() {
        return Ok(());
    }
    let ty = def.type_def(id);
    let mut entries: Vec<Entry> = Vec::new();
    let push = |entries: &mut Vec<Entry>, e: &Entry| {
        if !entries.iter().any(|x| x.slot == e.slot && x.name == e.name) {
            entries.push(e.clone());
        }
    };
    // The builder rejects cycles, so this recursion terminates.
    for parent in ty
        .superclass()
        .into_iter()
        .chain(ty.used_traits.iter().copied())
    {
        visible(def, parent, memo, conflicts)?;
        for e in memo[parent.index()].as_ref().expect("computed") {
            push(&mut entries, e);
        }
    }
    for (index, p) in ty.properties.iter().enumerate() {
        push(
            &mut entries,
            &Entry {
                name: p.name.clone(),
                slot: SlotRef::Property {
                    origin: id.index() as u32,
                    index: index as u32,
                },
                origin: id,
            },
        );
    }
    for &end in &ty.ends {
        push(
            &mut entries,
            &Entry {
                name: def.end(end).name.clone(),
                slot: SlotRef::End(end),
                origin: id,
            },
        );
    }

    let mut aliases = Vec::new();
    for r in &ty.resolutions {
        let pos = entries
            .iter()
            .position(|e| e.origin == r.source && e.name == r.slot)
            .ok_or_else(|| MetaModelError::InvalidResolution {
                owner: ty.name.clone(),
                source_type: def.type_def(r.source).name.clone(),
                slot: r.slot.clone(),
            })?;
        match &r.kind {
            ResolutionKind::Exclude => {
                entries.remove(pos);
            }
            ResolutionKind::Alias { new_name } => {
                entries[pos].name = new_name.clone();
                aliases.push(new_name);
            }
        }
    }
    for new_name in aliases {
        if entries.iter().filter(|e| &e.name == new_name).count() > 1 {
            return Err(MetaModelError::AliasCollision {
                owner: ty.name.clone(),
                new_name: new_name.clone(),
            });
        }
    }

    let mut by_name: BTreeMap<&str, Vec<&Entry>> = BTreeMap::new();
    for e in &entries {
        by_name.entry(e.name.as_str()).or_default().push(e);
    }
    for (name, group) in by_name {
        if group.len() > 1 {
            conflicts.push(SlotConflict {
                type_name: ty.name.clone(),
                slot: name.to_owned(),
                origins: group
                    .iter()
                    .map(|e| def.type_def(e.origin).name.clone())
                    .collect(),
            });
        }
    }
    memo[id.index()] = Some(entries);
    Ok(())
}

fn to_table(def: &MetaModelBuilder, entries: &[Entry]) -> SlotTable {
    let mut table = SlotTable::default();
    for e in entries {
        match e.slot {
            SlotRef::Property { index, .. } => {
                let p = &def.type_def(e.origin).properties[index as usize];
                table.properties.push(PropertySlot {
                    name: e.name.clone(),
                    kind: p.kind,
                    origin: e.origin,
                    declared_name: p.name.clone(),
                });
            }
            SlotRef::End(end) => {
                let d = def.end(end);
                table.links.push(LinkSlot {
                    name: e.name.clone(),
                    end,
                    opposite: d.opposite,
                    multiplicity: d.multiplicity,
                    container: d.container,
                    primary: d.primary,
                    kind: d.kind,
                    target: d.target,
                    origin: e.origin,
                });
            }
        }
    }
    table
}

/// Name-based rendering of a slot table, comparable across meta-models.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableSummary {
    pub type_name: String,
    pub properties: Vec<PropertySummary>,
    pub links: Vec<LinkSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertySummary {
    pub name: String,
    pub kind: ValueKind,
    pub origin: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinkSummary {
    pub name: String,
    pub multiplicity: Multiplicity,
    pub container: bool,
    pub target: String,
    pub opposite: String,
    pub origin: String,
    pub kind: Option<String>,
}

pub(crate) fn summarize(mm: &MetaModel, id: TypeId) -> TableSummary {
    let table = mm.table(id);
    TableSummary {
        type_name: mm.type_name(id).to_owned(),
        properties: table
            .properties
            .iter()
            .map(|p| PropertySummary {
                name: p.name.clone(),
                kind: p.kind,
                origin: mm.type_name(p.origin).to_owned(),
            })
            .collect(),
        links: table
            .links
            .iter()
            .map(|l| LinkSummary {
                name: l.name.clone(),
                multiplicity: l.multiplicity,
                container: l.container,
                target: mm.type_name(l.target).to_owned(),
                opposite: mm.end(l.opposite).name.clone(),
                origin: mm.type_name(l.origin).to_owned(),
                kind: l.kind.map(|k| mm.type_name(k).to_owned()),
            })
            .collect(),
    }
}

impl fmt::Display for TableSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.type_name)?;
        for p in &self.properties {
            writeln!(f, "  {}: {} [{}]", p.name, p.kind, p.origin)?;
        }
        for l in &self.links {
            write!(
                f,
                "  {} -> {} ({}{}, opposite {}) [{}]",
                l.name,
                l.target,
                l.multiplicity.as_str(),
                if l.container { ", container" } else { "" },
                l.opposite,
                l.origin
            )?;
            if let Some(kind) = &l.kind {
                write!(f, " <{kind}>")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
