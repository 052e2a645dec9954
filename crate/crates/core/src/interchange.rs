//! JSON documents for models and meta-models, and the VCS-log importer.
//!
//! A model document lists entities (ascending ids, only set properties, in
//! slot-table order), then links (once each, under the name of the end that
//! was declared first), then tags and finally the source texts anchors
//! point into. Exporting is deterministic, so export, import, export again
//! yields the same bytes.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value as Json};
use thiserror::Error;

use crate::builtin::{MetaModelRegistry, FILE_HISTORY};
use crate::metamodel::{
    AssociationShape, MetaModel, MetaModelBuilder, MetaModelError, ResolutionKind, TraitCategory,
    TypeKind,
};
use crate::model::{EntityId, Model, ModelError};
use crate::tags::Tag;
use crate::value::{Value, ValueKind};

pub const FORMAT_VERSION: &str = "1.0";

#[derive(Debug, Error)]
pub enum InterchangeError {
    #[error("invalid document: {0}")]
    Syntax(String),
    #[error("unsupported format version '{0}' (expected {FORMAT_VERSION})")]
    Version(String),
    #[error("{message} ({record} index {index})")]
    Record {
        record: &'static str,
        index: usize,
        message: String,
    },
    #[error(transparent)]
    MetaModel(#[from] MetaModelError),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
}

fn record_error(record: &'static str, index: usize) -> impl Fn(String) -> InterchangeError {
    move |message| InterchangeError::Record {
        record,
        index,
        message,
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct ModelDocument {
    format_version: String,
    metamodel: String,
    entities: Vec<Map<String, Json>>,
    links: Vec<LinkRecord>,
    tags: Vec<TagRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    source_files: Vec<SourceFileRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkRecord {
    slot: String,
    source: u64,
    target: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TagRecord {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    color: Option<String>,
    members: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceFileRecord {
    path: String,
    text: String,
}

/// Serializes a model as a compact JSON document.
pub fn export_model(model: &Model) -> String {
    let mut entities = Vec::with_capacity(model.len());
    let mut links = Vec::new();
    for id in model.entity_ids() {
        let table = model.table_of(id).expect("listed entity");
        let mut record = Map::new();
        record.insert("id".into(), Json::from(id.0));
        record.insert(
            "type".into(),
            Json::from(model.type_name(id).expect("listed entity")),
        );
        let values = model.property_values(id).expect("listed entity");
        for (slot, value) in table.properties.iter().zip(values) {
            if let Some(v) = value {
                record.insert(slot.name.clone(), v.to_json());
            }
        }
        entities.push(record);
        for (slot, targets) in model.link_slots(id).expect("listed entity") {
            if slot.primary {
                links.extend(targets.iter().map(|t| LinkRecord {
                    slot: slot.name.clone(),
                    source: id.0,
                    target: t.0,
                }));
            }
        }
    }
    let doc = ModelDocument {
        format_version: FORMAT_VERSION.into(),
        metamodel: model.metamodel().name().to_owned(),
        entities,
        links,
        tags: model
            .tags()
            .map(|t| TagRecord {
                name: t.name.clone(),
                color: t.color.clone(),
                members: t.members.iter().map(|m| m.0).collect(),
            })
            .collect(),
        source_files: model
            .source_files()
            .map(|(path, text)| SourceFileRecord {
                path: path.to_owned(),
                text: text.to_owned(),
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("documents always serialize")
}

fn check_version(json: &Json) -> Result<(), InterchangeError> {
    match json.get("formatVersion") {
        Some(Json::String(v)) if v == FORMAT_VERSION => Ok(()),
        Some(Json::String(v)) => Err(InterchangeError::Version(v.clone())),
        Some(other) => Err(InterchangeError::Version(other.to_string())),
        None => Err(InterchangeError::Syntax(
            "missing field `formatVersion`".into(),
        )),
    }
}

fn parse_document<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, InterchangeError> {
    let json: Json =
        serde_json::from_str(text).map_err(|e| InterchangeError::Syntax(e.to_string()))?;
    check_version(&json)?;
    serde_json::from_value(json).map_err(|e| InterchangeError::Syntax(e.to_string()))
}

/// Rebuilds a model, validating every record against the slot tables of the
/// named meta-model. `name` becomes the model's name.
pub fn import_model(
    text: &str,
    registry: &MetaModelRegistry,
    name: &str,
) -> Result<Model, InterchangeError> {
    let doc: ModelDocument = parse_document(text)?;
    let mm = registry.require(&doc.metamodel)?;
    let mut model = Model::new(name, mm.clone());
    for file in doc.source_files {
        model.add_source_text(file.path, file.text);
    }

    let mut last_id = 0;
    for (index, record) in doc.entities.into_iter().enumerate() {
        let err = record_error("entity", index);
        let id = match record.get("id") {
            Some(Json::Number(n)) => n.as_u64().filter(|&n| n > 0),
            _ => None,
        }
        .ok_or_else(|| err("missing or invalid 'id'".into()))?;
        if id <= last_id {
            return Err(err(format!(
                "entity ids must increase (got {id} after {last_id})"
            )));
        }
        last_id = id;
        let type_name = match record.get("type") {
            Some(Json::String(s)) => s.as_str(),
            _ => return Err(err("missing or invalid 'type'".into())),
        };
        let ty = mm
            .lookup(type_name)
            .ok_or_else(|| err(ModelError::UnknownType(type_name.to_owned()).to_string()))?;
        let id = EntityId(id);
        model
            .create_with_id(id, ty)
            .map_err(|e| err(e.to_string()))?;
        let table = mm.table(ty);
        for (key, json) in &record {
            if key == "id" || key == "type" {
                continue;
            }
            let Some(slot) = table.property_index(key).map(|i| &table.properties[i]) else {
                return Err(err(ModelError::UnknownSlot {
                    slot: key.clone(),
                    type_name: type_name.to_owned(),
                }
                .to_string()));
            };
            let value = Value::from_json(slot.kind, json)
                .ok_or_else(|| err(format!("slot '{key}' expects {}, got {json}", slot.kind)))?;
            model
                .set_property(id, key, value)
                .map_err(|e| err(e.to_string()))?;
        }
    }

    for (index, link) in doc.links.iter().enumerate() {
        model
            .link(EntityId(link.source), &link.slot, EntityId(link.target))
            .map_err(|e| record_error("link", index)(e.to_string()))?;
    }

    for (index, record) in doc.tags.into_iter().enumerate() {
        model
            .insert_tag(Tag {
                id: EntityId(0),
                name: record.name,
                color: record.color,
                members: record.members.into_iter().map(EntityId).collect(),
            })
            .map_err(|e| record_error("tag", index)(e.to_string()))?;
    }
    Ok(model)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct MetaModelDocument {
    format_version: String,
    name: String,
    #[serde(default)]
    extends: Vec<String>,
    #[serde(default)]
    traits: Vec<TraitRecord>,
    #[serde(default)]
    classes: Vec<ClassRecord>,
    #[serde(default)]
    generalizations: Vec<GeneralizationRecord>,
    #[serde(default)]
    properties: Vec<PropertyRecord>,
    #[serde(default)]
    associations: Vec<AssociationRecord>,
    #[serde(default)]
    resolutions: Vec<ResolutionRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraitRecord {
    name: String,
    category: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassRecord {
    name: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneralizationRecord {
    child: String,
    parent: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PropertyRecord {
    owner: String,
    name: String,
    #[serde(rename = "type")]
    kind: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct AssociationRecord {
    source: String,
    target: String,
    shape: String,
    source_end: String,
    target_end: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
struct ResolutionRecord {
    owner: String,
    source: String,
    slot: String,
    /// `"alias"` or `"exclude"`.
    action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    new_name: Option<String>,
}

/// Describes the types a meta-model declares itself (imports are referenced
/// by name) as the builder operations that recreate them.
pub fn export_metamodel(mm: &MetaModel) -> String {
    let local: Vec<_> = mm
        .type_ids()
        .filter(|&t| mm.type_def(t).namespace == mm.name())
        .collect();
    let name = |t| mm.type_name(t).to_owned();
    let mut doc = MetaModelDocument {
        format_version: FORMAT_VERSION.into(),
        name: mm.name().to_owned(),
        extends: mm.imports().to_vec(),
        traits: Vec::new(),
        classes: Vec::new(),
        generalizations: Vec::new(),
        properties: Vec::new(),
        associations: Vec::new(),
        resolutions: Vec::new(),
    };
    for &t in &local {
        let def = mm.type_def(t);
        match def.kind {
            TypeKind::Class { .. } => doc.classes.push(ClassRecord { name: name(t) }),
            TypeKind::Trait { category } => doc.traits.push(TraitRecord {
                name: name(t),
                category: category.as_str().into(),
            }),
        }
        for parent in def
            .superclass()
            .into_iter()
            .chain(def.used_traits.iter().copied())
        {
            doc.generalizations.push(GeneralizationRecord {
                child: name(t),
                parent: name(parent),
            });
        }
        for p in &def.properties {
            doc.properties.push(PropertyRecord {
                owner: name(t),
                name: p.name.clone(),
                kind: p.kind.as_str().into(),
            });
        }
        for r in &def.resolutions {
            let (action, new_name) = match &r.kind {
                ResolutionKind::Alias { new_name } => ("alias", Some(new_name.clone())),
                ResolutionKind::Exclude => ("exclude", None),
            };
            doc.resolutions.push(ResolutionRecord {
                owner: name(t),
                source: name(r.source),
                slot: r.slot.clone(),
                action: action.into(),
                new_name,
            });
        }
    }
    for (_, end) in mm.ends() {
        if !end.primary || mm.type_def(end.owner).namespace != mm.name() {
            continue;
        }
        let opposite = mm.end(end.opposite);
        doc.associations.push(AssociationRecord {
            source: name(end.owner),
            target: name(end.target),
            shape: end.shape.as_str().into(),
            source_end: end.name.clone(),
            target_end: opposite.name.clone(),
            kind: end.kind.map(name),
        });
    }
    serde_json::to_string(&doc).expect("documents always serialize")
}

/// Replays a meta-model document through the builder and generates it.
/// Extended meta-models are looked up in `registry`.
pub fn import_metamodel(
    text: &str,
    registry: &MetaModelRegistry,
) -> Result<MetaModel, InterchangeError> {
    let doc: MetaModelDocument = parse_document(text)?;
    let imports = doc
        .extends
        .iter()
        .map(|n| registry.require(n))
        .collect::<Result<Vec<Arc<MetaModel>>, _>>()?;
    let import_refs: Vec<&MetaModel> = imports.iter().map(|m| m.as_ref()).collect();
    let mut b = MetaModelBuilder::extending(doc.name.as_str(), &import_refs)?;

    for (i, t) in doc.traits.iter().enumerate() {
        let category = TraitCategory::parse(&t.category).ok_or_else(|| {
            record_error("trait", i)(format!("unknown trait category '{}'", t.category))
        })?;
        b.new_trait(&t.name, category)?;
    }
    for c in &doc.classes {
        b.new_class(&c.name)?;
    }
    for g in &doc.generalizations {
        b.add_generalization(b.require(&g.child)?, b.require(&g.parent)?)?;
    }
    for (i, p) in doc.properties.iter().enumerate() {
        let kind = ValueKind::parse(&p.kind).ok_or_else(|| {
            record_error("property", i)(format!("unknown property type '{}'", p.kind))
        })?;
        b.add_property(b.require(&p.owner)?, &p.name, kind)?;
    }
    for (i, a) in doc.associations.iter().enumerate() {
        let shape = AssociationShape::parse(&a.shape).ok_or_else(|| {
            record_error("association", i)(format!("unknown association shape '{}'", a.shape))
        })?;
        let (end, _) = b.add_association(
            b.require(&a.source)?,
            b.require(&a.target)?,
            shape,
            &a.source_end,
            &a.target_end,
        )?;
        if let Some(kind) = &a.kind {
            b.set_association_kind(end, b.require(kind)?)?;
        }
    }
    for (i, r) in doc.resolutions.iter().enumerate() {
        let owner = b.require(&r.owner)?;
        let source = b.require(&r.source)?;
        match (r.action.as_str(), &r.new_name) {
            ("alias", Some(new_name)) => b.alias(owner, source, &r.slot, new_name)?,
            ("exclude", None) => b.exclude(owner, source, &r.slot)?,
            _ => {
                return Err(record_error("resolution", i)(format!(
                    "bad resolution action '{}'",
                    r.action
                )))
            }
        }
    }
    Ok(b.generate()?)
}

const VCS_COLUMNS: [&str; 5] = ["revision", "date", "author", "message", "files"];

/// Reads a `revision,date,author,message,files` CSV log (files separated by
/// `;`) into a model of the file-history meta-model. Authors and files are
/// shared by name across commits.
pub fn import_vcs_log(
    csv_text: &str,
    registry: &MetaModelRegistry,
    name: &str,
) -> Result<Model, InterchangeError> {
    let mm = registry.require(FILE_HISTORY)?;
    let mut model = Model::new(name, mm);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(csv_text.as_bytes());
    let csv_error = |e: csv::Error| InterchangeError::Csv {
        line: e.position().map_or(1, |p| p.line()),
        message: match e.kind() {
            csv::ErrorKind::UnequalLengths {
                expected_len, len, ..
            } => format!("expected {expected_len} fields, found {len}"),
            _ => e.to_string(),
        },
    };

    let headers = reader.headers().map_err(csv_error)?.clone();
    let mut columns = BTreeMap::new();
    for (i, h) in headers.iter().enumerate() {
        let h = h.trim();
        if !VCS_COLUMNS.contains(&h) {
            return Err(InterchangeError::Csv {
                line: 1,
                message: format!("unknown column '{h}'"),
            });
        }
        if columns.insert(h, i).is_some() {
            return Err(InterchangeError::Csv {
                line: 1,
                message: format!("duplicate column '{h}'"),
            });
        }
    }
    if let Some(missing) = VCS_COLUMNS.iter().find(|c| !columns.contains_key(*c)) {
        // An empty input has no header at all and is simply an empty log.
        if headers.is_empty() {
            return Ok(model);
        }
        return Err(InterchangeError::Csv {
            line: 1,
            message: format!("missing column '{missing}'"),
        });
    }

    let mut authors: BTreeMap<String, EntityId> = BTreeMap::new();
    let mut files: BTreeMap<String, EntityId> = BTreeMap::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |c: &str| row.get(columns[c]).unwrap_or("");
        let fail = |message: String| InterchangeError::Csv { line, message };
        let model_err = |e: ModelError| fail(e.to_string());

        let revision_text = field("revision").trim();
        let revision = revision_text
            .parse::<i64>()
            .ok()
            .map(Value::from)
            .or_else(|| revision_text.parse::<f64>().ok().and_then(Value::number))
            .ok_or_else(|| fail(format!("invalid revision '{revision_text}'")))?;
        let author_name = field("author").trim();
        if author_name.is_empty() {
            return Err(fail("empty author".into()));
        }

        let author = match authors.get(author_name) {
            Some(&a) => a,
            None => {
                let a = model.create_named_type("Author").map_err(model_err)?;
                model
                    .set_property(a, "name", author_name)
                    .map_err(model_err)?;
                authors.insert(author_name.to_owned(), a);
                a
            }
        };
        let commit = model.create_named_type("Commit").map_err(model_err)?;
        model
            .set_property(commit, "revision", revision)
            .map_err(model_err)?;
        let date = field("date").trim();
        if !date.is_empty() {
            model
                .set_property(commit, "date", Value::Object(Json::from(date)))
                .map_err(model_err)?;
        }
        model
            .set_property(commit, "message", field("message"))
            .map_err(model_err)?;
        model.link(commit, "author", author).map_err(model_err)?;

        for path in field("files")
            .split(';')
            .map(str::trim)
            .filter(|p| !p.is_empty())
        {
            let file = match files.get(path) {
                Some(&f) => f,
                None => {
                    let f = model.create_named_type("File").map_err(model_err)?;
                    model.set_property(f, "name", path).map_err(model_err)?;
                    files.insert(path.to_owned(), f);
                    f
                }
            };
            model.link(file, "commits", commit).map_err(model_err)?;
        }
    }
    Ok(model)
}
