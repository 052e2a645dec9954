//! Ready-made meta-models and the name registry models are resolved against.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::metamodel::{AssociationShape, MetaModel, MetaModelBuilder, MetaModelError};
use crate::stdlib::standard_library;
use crate::value::ValueKind;

pub const FILE_HISTORY: &str = "file-history";
pub const JAVA_LITE: &str = "java-lite";
pub const SQL_LITE: &str = "sql-lite";

/// The File/Commit/Author version-history meta-model, built with the same
/// steps a script would use: classes, generalizations, properties, then
/// associations.
pub fn file_history() -> Result<MetaModel, MetaModelError> {
    let lib = standard_library();
    let mut builder = MetaModelBuilder::extending(FILE_HISTORY, &[&lib])?;
    let named = builder.require("TNamedEntity")?;

    let entity = builder.new_class("Entity")?;
    let file = builder.new_class("File")?;
    let commit = builder.new_class("Commit")?;
    let author = builder.new_class("Author")?;

    builder.add_generalization(file, entity)?;
    builder.add_generalization(file, named)?;
    builder.add_generalization(commit, entity)?;
    builder.add_generalization(author, entity)?;
    builder.add_generalization(author, named)?;

    builder.add_property(commit, "revision", ValueKind::Number)?;
    builder.add_property(commit, "date", ValueKind::Object)?;
    builder.add_property(commit, "message", ValueKind::String)?;

    builder.add_association(
        file,
        commit,
        AssociationShape::ManyToMany,
        "commits",
        "files",
    )?;
    builder.add_association(
        commit,
        author,
        AssociationShape::ManyToOne,
        "author",
        "commits",
    )?;
    builder.generate()
}

/// Packages, classes, methods and attributes of a Java-like language.
pub fn java_lite() -> Result<MetaModel, MetaModelError> {
    let lib = standard_library();
    let mut b = MetaModelBuilder::extending(JAVA_LITE, &[&lib])?;
    let modifiers = b.require("TWithModifiers")?;
    for (class, terminal) in [
        ("Package", "TPackage"),
        ("Class", "TClass"),
        ("Method", "TMethod"),
        ("Attribute", "TAttribute"),
    ] {
        let id = b.new_class(class)?;
        b.add_generalization(id, b.require(terminal)?)?;
        if class != "Package" {
            b.add_generalization(id, modifiers)?;
        }
    }
    b.generate()
}

/// Tables, columns and stored procedures holding arbitrarily nested queries.
pub fn sql_lite() -> Result<MetaModel, MetaModelError> {
    use AssociationShape::*;
    let lib = standard_library();
    let mut b = MetaModelBuilder::extending(SQL_LITE, &[&lib])?;
    let named = b.require("TNamedEntity")?;
    let referencing = b.require("TWithReferences")?;
    let referenceable = b.require("TReferenceable")?;
    let sourced = b.require("TSourcedEntity")?;

    let table = b.new_class("Table")?;
    let column = b.new_class("Column")?;
    let procedure = b.new_class("StoredProcedure")?;
    let query = b.new_class("Query")?;
    let view = b.new_class("View")?;

    b.add_generalization(table, named)?;
    b.add_generalization(column, named)?;
    b.add_generalization(column, referenceable)?;
    b.add_generalization(procedure, named)?;
    b.add_generalization(procedure, referencing)?;
    b.add_generalization(procedure, sourced)?;
    b.add_generalization(query, referencing)?;
    b.add_generalization(query, sourced)?;
    b.add_generalization(view, named)?;

    b.add_association(
        column,
        table,
        ContainmentManyToOne,
        "parentTable",
        "columns",
    )?;
    b.add_association(
        query,
        procedure,
        ContainmentManyToOne,
        "parentProcedure",
        "queries",
    )?;
    b.add_association(
        query,
        query,
        ContainmentManyToOne,
        "parentQuery",
        "subqueries",
    )?;
    b.add_association(
        query,
        view,
        ContainmentManyToOne,
        "parentView",
        "definition",
    )?;
    b.generate()
}

/// Generated meta-models by name.
#[derive(Clone, Debug, Default)]
pub struct MetaModelRegistry {
    models: BTreeMap<String, Arc<MetaModel>>,
}

impl MetaModelRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// The standard library plus every built-in meta-model.
    pub fn with_builtins() -> Self {
        let mut registry = MetaModelRegistry::new();
        registry.register(standard_library());
        for mm in [file_history(), java_lite(), sql_lite()] {
            registry.register(Arc::new(mm.expect("built-in meta-models are consistent")));
        }
        registry
    }

    pub fn register(&mut self, mm: Arc<MetaModel>) {
        self.models.insert(mm.name().to_owned(), mm);
    }

    pub fn get(&self, name: &str) -> Option<Arc<MetaModel>> {
        self.models.get(name).cloned()
    }

    pub fn require(&self, name: &str) -> Result<Arc<MetaModel>, MetaModelError> {
        self.get(name)
            .ok_or_else(|| MetaModelError::UnknownMetaModel(name.to_owned()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.models.keys().map(String::as_str)
    }
}
