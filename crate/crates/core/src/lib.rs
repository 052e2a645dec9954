//! Composable meta-models for source-code analysis.
//!
//! A meta-model is assembled from small trait descriptions (a name, a typed
//! declaration, ownership of methods, ...) that classes compose. Generation
//! flattens every composed type into a [`SlotTable`] and the [`Model`] store
//! only ever allocates the slots a type actually declares.
//!
//! On top of the store sit scope-aware queries ([`query`]), first-class tags
//! with cohesion/coupling metrics ([`tags`]) and a JSON interchange format
//! ([`interchange`]).

pub mod builtin;
pub mod fixtures;
pub mod interchange;
pub mod metamodel;
pub mod model;
pub mod query;
pub mod stdlib;
pub mod tags;
pub mod value;

mod compose;

pub use builtin::MetaModelRegistry;
pub use compose::{LinkSlot, PropertySlot, SlotTable, TableSummary};
pub use metamodel::{
    AssociationEndDef, AssociationShape, ConflictResolution, EndId, MetaModel, MetaModelBuilder,
    MetaModelError, Multiplicity, PropertyDef, ResolutionKind, SlotConflict, TraitCategory,
    TypeDef, TypeId, TypeKind,
};
pub use model::{Dependency, EntityId, Model, ModelError, SourceAnchor};
pub use query::{
    DescribeRow, Direction, Pipeline, Query, QueryError, QueryResult, SlotKind, SlotValue,
};
pub use tags::{Tag, TagMetrics};
pub use value::{Value, ValueKind};
