//! Trait and class definitions and the builder that assembles them.
//!
//! Builder operations mirror the usual meta-model scripting vocabulary:
//! declare classes, connect them with generalizations (class inheritance and
//! trait usage share one operation), attach typed properties, then
//! associations. [`MetaModelBuilder::generate`] flattens the result into slot
//! tables and returns an immutable [`MetaModel`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use thiserror::Error;

use crate::compose::{self, SlotTable, TableSummary};
use crate::value::ValueKind;

static NEXT_SPACE: AtomicU32 = AtomicU32::new(1);

/// Handle to a class or trait definition.
///
/// Handles are tagged with the builder they came from so that a type from
/// one meta-model is never silently accepted by a model of another.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeId {
    space: u32,
    index: u32,
}

impl TypeId {
    pub fn index(self) -> usize {
        self.index as usize
    }
}

/// Handle to one end of an association.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EndId(pub(crate) u32);

impl EndId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraitCategory {
    /// Source-level relationships such as invocation or access.
    Association,
    /// Tool support: source anchors, metrics.
    Technical,
    /// Composable feature fragments.
    Core,
    /// Directly instantiable language concepts.
    Terminal,
}

impl TraitCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            TraitCategory::Association => "association",
            TraitCategory::Technical => "technical",
            TraitCategory::Core => "core",
            TraitCategory::Terminal => "terminal",
        }
    }

    pub fn parse(s: &str) -> Option<TraitCategory> {
        match s {
            "association" => Some(TraitCategory::Association),
            "technical" => Some(TraitCategory::Technical),
            "core" => Some(TraitCategory::Core),
            "terminal" => Some(TraitCategory::Terminal),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    One,
    Many,
}

impl Multiplicity {
    pub fn as_str(self) -> &'static str {
        match self {
            Multiplicity::One => "one",
            Multiplicity::Many => "many",
        }
    }
}

/// Shape of a binary association, read from the first class to the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AssociationShape {
    ManyToMany,
    ManyToOne,
    OneToMany,
    /// Many instances of the first class are owned by one of the second.
    ContainmentManyToOne,
    /// One instance of the first class owns many of the second.
    ContainmentOneToMany,
}

impl AssociationShape {
    pub fn as_str(self) -> &'static str {
        match self {
            AssociationShape::ManyToMany => "manyToMany",
            AssociationShape::ManyToOne => "manyToOne",
            AssociationShape::OneToMany => "oneToMany",
            AssociationShape::ContainmentManyToOne => "containmentManyToOne",
            AssociationShape::ContainmentOneToMany => "containmentOneToMany",
        }
    }

    pub fn parse(s: &str) -> Option<AssociationShape> {
        [
            AssociationShape::ManyToMany,
            AssociationShape::ManyToOne,
            AssociationShape::OneToMany,
            AssociationShape::ContainmentManyToOne,
            AssociationShape::ContainmentOneToMany,
        ]
        .into_iter()
        .find(|shape| shape.as_str() == s)
    }

    /// (multiplicity, container flag) of the end owned by the first class,
    /// then of the end owned by the second.
    fn ends(self) -> ((Multiplicity, bool), (Multiplicity, bool)) {
        use Multiplicity::*;
        match self {
            AssociationShape::ManyToMany => ((Many, false), (Many, false)),
            AssociationShape::ManyToOne => ((One, false), (Many, false)),
            AssociationShape::OneToMany => ((Many, false), (One, false)),
            AssociationShape::ContainmentManyToOne => ((One, false), (Many, true)),
            AssociationShape::ContainmentOneToMany => ((Many, true), (One, false)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeKind {
    Class { superclass: Option<TypeId> },
    Trait { category: TraitCategory },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyDef {
    pub name: String,
    pub kind: ValueKind,
    pub origin: TypeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssociationEndDef {
    pub name: String,
    /// Type that declares (and therefore stores) this end.
    pub owner: TypeId,
    /// Type the end points to; always the owner of `opposite`.
    pub target: TypeId,
    pub opposite: EndId,
    pub multiplicity: Multiplicity,
    /// Set on the end owned by the container side of a containment.
    pub container: bool,
    /// The end declared first. Dependencies run from the primary end's owner
    /// to its target and links are serialized from this side.
    pub primary: bool,
    /// Association trait this association realizes, if it is a dependency.
    pub kind: Option<TypeId>,
    /// Shape the association was declared with.
    pub shape: AssociationShape,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ResolutionKind {
    Alias { new_name: String },
    Exclude,
}

/// Disambiguates a slot reaching a type through composition. `source` is the
/// type that declares the slot and `slot` its currently visible name.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConflictResolution {
    pub kind: ResolutionKind,
    pub source: TypeId,
    pub slot: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub kind: TypeKind,
    /// Name of the meta-model that declared this type.
    pub namespace: String,
    pub used_traits: Vec<TypeId>,
    pub properties: Vec<PropertyDef>,
    pub ends: Vec<EndId>,
    pub resolutions: Vec<ConflictResolution>,
}

impl TypeDef {
    pub fn is_class(&self) -> bool {
        matches!(self.kind, TypeKind::Class { .. })
    }

    pub fn category(&self) -> Option<TraitCategory> {
        match self.kind {
            TypeKind::Trait { category } => Some(category),
            TypeKind::Class { .. } => None,
        }
    }

    pub fn superclass(&self) -> Option<TypeId> {
        match self.kind {
            TypeKind::Class { superclass } => superclass,
            TypeKind::Trait { .. } => None,
        }
    }
}

/// One unresolved name clash found during generation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotConflict {
    pub type_name: String,
    pub slot: String,
    pub origins: Vec<String>,
}

impl fmt::Display for SlotConflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}.{} declared by {}",
            self.type_name,
            self.slot,
            self.origins.join(", ")
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetaModelError {
    #[error("duplicate name '{0}'")]
    DuplicateName(String),
    #[error("unknown type '{0}'")]
    UnknownType(String),
    #[error("type handle does not belong to meta-model '{0}'")]
    ForeignType(String),
    #[error("generalization {child} --|> {parent} would create a cycle")]
    Cycle { child: String, parent: String },
    #[error("class '{child}' already has superclass '{existing}'")]
    SecondSuperclass { child: String, existing: String },
    #[error("trait '{child}' cannot inherit from class '{parent}'")]
    TraitFromClass { child: String, parent: String },
    #[error("'{owner}' already declares a property named '{name}'")]
    DuplicateProperty { owner: String, name: String },
    #[error("'{owner}' already declares an association end named '{name}'")]
    EndNameCollision { owner: String, name: String },
    #[error("'{name}' is imported from '{namespace}' and cannot be modified")]
    ReadOnly { name: String, namespace: String },
    #[error("'{0}' is not an association trait")]
    NotAssociationKind(String),
    #[error("'{owner}' has no slot '{slot}' contributed by '{source_type}' to resolve")]
    InvalidResolution {
        owner: String,
        source_type: String,
        slot: String,
    },
    #[error("alias '{new_name}' on '{owner}' collides with another visible slot")]
    AliasCollision { owner: String, new_name: String },
    #[error("meta-model '{0}' is not registered")]
    UnknownMetaModel(String),
    #[error("unresolved slot conflicts: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Conflicts(Vec<SlotConflict>),
}

/// Mutable meta-model under construction.
#[derive(Clone, Debug)]
pub struct MetaModelBuilder {
    pub(crate) space: u32,
    pub(crate) name: String,
    pub(crate) imports: Vec<String>,
    pub(crate) types: Vec<TypeDef>,
    pub(crate) ends: Vec<AssociationEndDef>,
    by_name: HashMap<String, u32>,
}

impl MetaModelBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        MetaModelBuilder {
            space: NEXT_SPACE.fetch_add(1, Ordering::Relaxed),
            name: name.into(),
            imports: Vec::new(),
            types: Vec::new(),
            ends: Vec::new(),
            by_name: HashMap::new(),
        }
    }

    /// Starts a meta-model that extends `imports`. Imported definitions are
    /// visible by name and may be composed, but not modified.
    pub fn extending(
        name: impl Into<String>,
        imports: &[&MetaModel],
    ) -> Result<Self, MetaModelError> {
        let mut builder = MetaModelBuilder::new(name);
        for import in imports {
            builder.import(import)?;
        }
        Ok(builder)
    }

    fn import(&mut self, mm: &MetaModel) -> Result<(), MetaModelError> {
        let src = &mm.def;
        for def in &src.types {
            if let Some(&i) = self.by_name.get(&def.name) {
                if self.types[i as usize].namespace != def.namespace {
                    return Err(MetaModelError::DuplicateName(def.name.clone()));
                }
            }
        }
        if !self.imports.contains(&src.name) {
            self.imports.push(src.name.clone());
        }
        // Shared bases (two imports of the same library) are merged by
        // (namespace, name).
        let mut type_map = Vec::with_capacity(src.types.len());
        let mut fresh = Vec::new();
        for def in &src.types {
            let existing = self
                .by_name
                .get(&def.name)
                .copied()
                .filter(|&i| self.types[i as usize].namespace == def.namespace);
            match existing {
                Some(index) => type_map.push(index),
                None => {
                    let index = self.types.len() as u32;
                    self.by_name.insert(def.name.clone(), index);
                    self.types.push(def.clone());
                    type_map.push(index);
                    fresh.push(index);
                }
            }
        }
        let end_base = self.ends.len() as u32;
        let map_ty = |t: TypeId, space: u32| TypeId {
            space,
            index: type_map[t.index()],
        };
        let space = self.space;
        let fresh_set: BTreeSet<u32> = fresh.iter().copied().collect();
        // Ends are copied for fresh types only; merged types keep theirs.
        let mut end_map: HashMap<u32, u32> = HashMap::new();
        let mut next_end = end_base;
        for (i, end) in src.ends.iter().enumerate() {
            if fresh_set.contains(&type_map[end.owner.index()]) {
                end_map.insert(i as u32, next_end);
                next_end += 1;
            } else {
                // Reuse the merged end: same owner, same name.
                let owner = type_map[end.owner.index()];
                let merged = self.types[owner as usize]
                    .ends
                    .iter()
                    .copied()
                    .find(|e| self.ends[e.index()].name == end.name)
                    .expect("merged type carries the same ends");
                end_map.insert(i as u32, merged.0);
            }
        }
        for (i, end) in src.ends.iter().enumerate() {
            if !fresh_set.contains(&type_map[end.owner.index()]) {
                continue;
            }
            debug_assert_eq!(end_map[&(i as u32)] as usize, self.ends.len());
            self.ends.push(AssociationEndDef {
                name: end.name.clone(),
                owner: map_ty(end.owner, space),
                target: map_ty(end.target, space),
                opposite: EndId(end_map[&end.opposite.0]),
                multiplicity: end.multiplicity,
                container: end.container,
                primary: end.primary,
                kind: end.kind.map(|k| map_ty(k, space)),
                shape: end.shape,
            });
        }
        for &index in &fresh {
            let def = &mut self.types[index as usize];
            if let TypeKind::Class {
                superclass: Some(sup),
            } = &mut def.kind
            {
                *sup = map_ty(*sup, space);
            }
            for t in &mut def.used_traits {
                *t = map_ty(*t, space);
            }
            for p in &mut def.properties {
                p.origin = map_ty(p.origin, space);
            }
            for e in &mut def.ends {
                *e = EndId(end_map[&e.0]);
            }
            for r in &mut def.resolutions {
                r.source = map_ty(r.source, space);
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.by_name.get(name).map(|&index| TypeId {
            space: self.space,
            index,
        })
    }

    /// Looks a name up, failing with [`MetaModelError::UnknownType`].
    pub fn require(&self, name: &str) -> Result<TypeId, MetaModelError> {
        self.lookup(name)
            .ok_or_else(|| MetaModelError::UnknownType(name.to_owned()))
    }

    pub fn type_def(&self, id: TypeId) -> &TypeDef {
        &self.types[id.index()]
    }

    pub fn end(&self, id: EndId) -> &AssociationEndDef {
        &self.ends[id.index()]
    }

    pub fn type_ids(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.types.len() as u32).map(|index| TypeId {
            space: self.space,
            index,
        })
    }

    fn check(&self, id: TypeId) -> Result<(), MetaModelError> {
        if id.space != self.space || id.index() >= self.types.len() {
            return Err(MetaModelError::ForeignType(self.name.clone()));
        }
        Ok(())
    }

    fn check_local(&self, id: TypeId) -> Result<(), MetaModelError> {
        self.check(id)?;
        let def = self.type_def(id);
        if def.namespace != self.name {
            return Err(MetaModelError::ReadOnly {
                name: def.name.clone(),
                namespace: def.namespace.clone(),
            });
        }
        Ok(())
    }

    fn register(&mut self, name: &str, kind: TypeKind) -> Result<TypeId, MetaModelError> {
        if self.by_name.contains_key(name) {
            return Err(MetaModelError::DuplicateName(name.to_owned()));
        }
        let index = self.types.len() as u32;
        self.types.push(TypeDef {
            name: name.to_owned(),
            kind,
            namespace: self.name.clone(),
            used_traits: Vec::new(),
            properties: Vec::new(),
            ends: Vec::new(),
            resolutions: Vec::new(),
        });
        self.by_name.insert(name.to_owned(), index);
        Ok(TypeId {
            space: self.space,
            index,
        })
    }

    pub fn new_class(&mut self, name: &str) -> Result<TypeId, MetaModelError> {
        self.register(name, TypeKind::Class { superclass: None })
    }

    pub fn new_trait(
        &mut self,
        name: &str,
        category: TraitCategory,
    ) -> Result<TypeId, MetaModelError> {
        self.register(name, TypeKind::Trait { category })
    }

    /// Whether `to` is reachable from `from` through superclass and trait
    /// usage edges (including `from == to`).
    fn reaches(&self, from: TypeId, to: TypeId) -> bool {
        let mut stack = vec![from];
        let mut seen = BTreeSet::new();
        while let Some(t) = stack.pop() {
            if t == to {
                return true;
            }
            if !seen.insert(t) {
                continue;
            }
            let def = self.type_def(t);
            stack.extend(def.superclass());
            stack.extend(def.used_traits.iter().copied());
        }
        false
    }

    /// `child --|> parent`: class inheritance when `parent` is a class, trait
    /// usage when it is a trait.
    pub fn add_generalization(
        &mut self,
        child: TypeId,
        parent: TypeId,
    ) -> Result<(), MetaModelError> {
        self.check_local(child)?;
        self.check(parent)?;
        let child_name = self.type_def(child).name.clone();
        let parent_name = self.type_def(parent).name.clone();
        if self.reaches(parent, child) {
            return Err(MetaModelError::Cycle {
                child: child_name,
                parent: parent_name,
            });
        }
        let parent_is_class = self.type_def(parent).is_class();
        let def = &mut self.types[child.index()];
        match (&mut def.kind, parent_is_class) {
            (TypeKind::Class { superclass }, true) => match superclass {
                Some(existing) if *existing == parent => {}
                Some(existing) => {
                    let existing = *existing;
                    return Err(MetaModelError::SecondSuperclass {
                        child: child_name,
                        existing: self.types[existing.index()].name.clone(),
                    });
                }
                None => *superclass = Some(parent),
            },
            (TypeKind::Trait { .. }, true) => {
                return Err(MetaModelError::TraitFromClass {
                    child: child_name,
                    parent: parent_name,
                })
            }
            (_, false) => {
                if !def.used_traits.contains(&parent) {
                    def.used_traits.push(parent);
                }
            }
        }
        Ok(())
    }

    pub fn add_property(
        &mut self,
        owner: TypeId,
        name: &str,
        kind: ValueKind,
    ) -> Result<(), MetaModelError> {
        self.check_local(owner)?;
        let def = &mut self.types[owner.index()];
        if def.properties.iter().any(|p| p.name == name) {
            return Err(MetaModelError::DuplicateProperty {
                owner: def.name.clone(),
                name: name.to_owned(),
            });
        }
        def.properties.push(PropertyDef {
            name: name.to_owned(),
            kind,
            origin: owner,
        });
        Ok(())
    }

    /// Declares an association between `a` and `b`. `name_a` is the end
    /// stored on `a` (pointing at `b`), `name_b` the end stored on `b`.
    pub fn add_association(
        &mut self,
        a: TypeId,
        b: TypeId,
        shape: AssociationShape,
        name_a: &str,
        name_b: &str,
    ) -> Result<(EndId, EndId), MetaModelError> {
        self.check_local(a)?;
        self.check_local(b)?;
        let collides = |owner: TypeId, name: &str| {
            self.type_def(owner)
                .ends
                .iter()
                .any(|e| self.end(*e).name == name)
        };
        for (owner, name) in [(a, name_a), (b, name_b)] {
            if collides(owner, name) {
                return Err(MetaModelError::EndNameCollision {
                    owner: self.type_def(owner).name.clone(),
                    name: name.to_owned(),
                });
            }
        }
        if a == b && name_a == name_b {
            return Err(MetaModelError::EndNameCollision {
                owner: self.type_def(a).name.clone(),
                name: name_a.to_owned(),
            });
        }
        let ((mult_a, cont_a), (mult_b, cont_b)) = shape.ends();
        let end_a = EndId(self.ends.len() as u32);
        let end_b = EndId(end_a.0 + 1);
        self.ends.push(AssociationEndDef {
            name: name_a.to_owned(),
            owner: a,
            target: b,
            opposite: end_b,
            multiplicity: mult_a,
            container: cont_a,
            primary: true,
            kind: None,
            shape,
        });
        self.ends.push(AssociationEndDef {
            name: name_b.to_owned(),
            owner: b,
            target: a,
            opposite: end_a,
            multiplicity: mult_b,
            container: cont_b,
            primary: false,
            kind: None,
            shape,
        });
        self.types[a.index()].ends.push(end_a);
        self.types[b.index()].ends.push(end_b);
        Ok((end_a, end_b))
    }

    /// Marks an association as a dependency of the given association trait.
    pub fn set_association_kind(&mut self, end: EndId, kind: TypeId) -> Result<(), MetaModelError> {
        self.check(kind)?;
        let kind_def = self.type_def(kind);
        if kind_def.category() != Some(TraitCategory::Association) {
            return Err(MetaModelError::NotAssociationKind(kind_def.name.clone()));
        }
        let owner = self.end(end).owner;
        self.check_local(owner)?;
        let opposite = self.end(end).opposite;
        self.ends[end.index()].kind = Some(kind);
        self.ends[opposite.index()].kind = Some(kind);
        Ok(())
    }

    pub fn add_resolution(
        &mut self,
        owner: TypeId,
        resolution: ConflictResolution,
    ) -> Result<(), MetaModelError> {
        self.check_local(owner)?;
        self.check(resolution.source)?;
        self.types[owner.index()].resolutions.push(resolution);
        Ok(())
    }

    /// Renames the slot `slot` contributed by `source` to `new_name` on `owner`.
    pub fn alias(
        &mut self,
        owner: TypeId,
        source: TypeId,
        slot: &str,
        new_name: &str,
    ) -> Result<(), MetaModelError> {
        self.add_resolution(
            owner,
            ConflictResolution {
                kind: ResolutionKind::Alias {
                    new_name: new_name.to_owned(),
                },
                source,
                slot: slot.to_owned(),
            },
        )
    }

    /// Drops the slot `slot` contributed by `source` from `owner`.
    pub fn exclude(
        &mut self,
        owner: TypeId,
        source: TypeId,
        slot: &str,
    ) -> Result<(), MetaModelError> {
        self.add_resolution(
            owner,
            ConflictResolution {
                kind: ResolutionKind::Exclude,
                source,
                slot: slot.to_owned(),
            },
        )
    }

    /// Flattens every type into its slot table.
    pub fn generate(&self) -> Result<MetaModel, MetaModelError> {
        let tables = compose::compile(self)?;
        let ancestry = self
            .type_ids()
            .map(|t| {
                let mut set = BTreeSet::new();
                let mut stack = vec![t];
                while let Some(x) = stack.pop() {
                    if set.insert(x.index) {
                        let def = self.type_def(x);
                        stack.extend(def.superclass());
                        stack.extend(def.used_traits.iter().copied());
                    }
                }
                set
            })
            .collect();
        Ok(MetaModel {
            def: self.clone(),
            tables,
            ancestry,
        })
    }
}

/// A generated, immutable meta-model.
#[derive(Clone, Debug)]
pub struct MetaModel {
    def: MetaModelBuilder,
    tables: Vec<SlotTable>,
    ancestry: Vec<BTreeSet<u32>>,
}

impl MetaModel {
    pub fn name(&self) -> &str {
        &self.def.name
    }

    pub fn imports(&self) -> &[String] {
        &self.def.imports
    }

    /// A builder holding the same definitions, for extension in place of
    /// this meta-model or regeneration.
    pub fn to_builder(&self) -> MetaModelBuilder {
        self.def.clone()
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.def.lookup(name)
    }

    pub fn owns(&self, id: TypeId) -> bool {
        id.space == self.def.space && id.index() < self.def.types.len()
    }

    pub fn type_def(&self, id: TypeId) -> &TypeDef {
        self.def.type_def(id)
    }

    pub fn type_name(&self, id: TypeId) -> &str {
        &self.def.type_def(id).name
    }

    pub fn end(&self, id: EndId) -> &AssociationEndDef {
        self.def.end(id)
    }

    pub fn type_ids(&self) -> impl Iterator<Item = TypeId> + '_ {
        self.def.type_ids()
    }

    pub fn ends(&self) -> impl Iterator<Item = (EndId, &AssociationEndDef)> + '_ {
        self.def
            .ends
            .iter()
            .enumerate()
            .map(|(i, e)| (EndId(i as u32), e))
    }

    pub fn table(&self, id: TypeId) -> &SlotTable {
        &self.tables[id.index()]
    }

    /// Class identity, subclassing or (transitive) trait usage.
    pub fn conforms(&self, ty: TypeId, to: TypeId) -> bool {
        self.owns(ty) && self.owns(to) && self.ancestry[ty.index()].contains(&to.index)
    }

    /// Classes and terminal traits may be instantiated.
    pub fn is_instantiable(&self, id: TypeId) -> bool {
        match self.type_def(id).kind {
            TypeKind::Class { .. } => true,
            TypeKind::Trait { category } => category == TraitCategory::Terminal,
        }
    }

    /// Every association trait visible in this meta-model.
    pub fn association_kinds(&self) -> Vec<TypeId> {
        self.type_ids()
            .filter(|t| self.type_def(*t).category() == Some(TraitCategory::Association))
            .collect()
    }

    pub fn table_summary(&self, id: TypeId) -> TableSummary {
        compose::summarize(self, id)
    }

    /// Summaries of every type declared in this meta-model's own namespace.
    pub fn local_summaries(&self) -> Vec<TableSummary> {
        self.type_ids()
            .filter(|t| self.type_def(*t).namespace == self.def.name)
            .map(|t| self.table_summary(t))
            .collect()
    }
}
