//! Scope-aware queries over a [`Model`].
//!
//! Every operation takes a [`QueryResult`] as receiver (an entity converts
//! into a one-item result) and returns a new one, so queries chain. The
//! engine only looks at slot-table metadata: container flags tell it how
//! scopes nest, association kinds tell it which links are dependencies.
//!
//! The textual form used by the CLI and the service is a `|`-separated
//! pipeline:
//!
//! ```text
//! pipeline := stage ( "|" stage )*
//! stage    := selector | verb
//! selector := "type:" NAME | "id:" INT ( "," INT )* | "name:" STRING | "tag:" STRING
//! verb     := "outgoing" NAME | "incoming" NAME | "all-outgoing" | "all-incoming"
//!           | "at-scope" NAME | "to-scope" NAME | "children" | "parent"
//! ```
//!
//! A selector replaces the current group; a pipeline that starts with a verb
//! applies to the group supplied by the caller.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::metamodel::{Multiplicity, TraitCategory, TypeId};
use crate::model::{Dependency, EntityId, Model};
use crate::value::{Value, ValueKind};

/// A duplicate-free group of entities in ascending id order, with the
/// association instances that produced it when it comes from a dependency
/// query.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QueryResult {
    items: BTreeSet<EntityId>,
    provenance: Vec<Dependency>,
}

impl QueryResult {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_provenance(
        items: impl IntoIterator<Item = EntityId>,
        provenance: impl IntoIterator<Item = Dependency>,
    ) -> Self {
        let set: BTreeSet<Dependency> = provenance.into_iter().collect();
        QueryResult {
            items: items.into_iter().collect(),
            provenance: set.into_iter().collect(),
        }
    }

    pub fn items(&self) -> &BTreeSet<EntityId> {
        &self.items
    }

    /// Sorted, one triple per association instance.
    pub fn provenance(&self) -> &[Dependency] {
        &self.provenance
    }

    pub fn iter(&self) -> impl Iterator<Item = EntityId> + '_ {
        self.items.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, id: EntityId) -> bool {
        self.items.contains(&id)
    }

    pub fn to_vec(&self) -> Vec<EntityId> {
        self.iter().collect()
    }
}

impl From<EntityId> for QueryResult {
    fn from(id: EntityId) -> Self {
        QueryResult {
            items: BTreeSet::from([id]),
            provenance: Vec::new(),
        }
    }
}

impl FromIterator<EntityId> for QueryResult {
    fn from_iter<I: IntoIterator<Item = EntityId>>(iter: I) -> Self {
        QueryResult {
            items: iter.into_iter().collect(),
            provenance: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Incoming,
    Outgoing,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Incoming => "incoming",
            Direction::Outgoing => "outgoing",
        }
    }

    pub fn parse(s: &str) -> Option<Direction> {
        match s {
            "incoming" => Some(Direction::Incoming),
            "outgoing" => Some(Direction::Outgoing),
            _ => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueryError {
    #[error("unknown type '{0}'")]
    UnknownType(String),
    #[error("'{0}' is not an association kind")]
    UnknownKind(String),
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("unknown tag '{0}'")]
    UnknownTag(String),
    #[error("empty pipeline")]
    EmptyPipeline,
    #[error("stage {stage}: {message}")]
    Parse { stage: usize, message: String },
}

/// The declared shape of a described slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlotKind {
    Property(ValueKind),
    Link {
        target: String,
        multiplicity: Multiplicity,
    },
}

impl fmt::Display for SlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotKind::Property(kind) => write!(f, "{kind}"),
            SlotKind::Link {
                target,
                multiplicity: Multiplicity::One,
            } => write!(f, "{target}[1]"),
            SlotKind::Link { target, .. } => write!(f, "{target}[*]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SlotValue {
    Absent,
    Value(Value),
    Links(Vec<EntityId>),
    /// Group description where members disagree.
    Mixed,
}

impl fmt::Display for SlotValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlotValue::Absent => f.write_str("-"),
            SlotValue::Value(v) => write!(f, "{v}"),
            SlotValue::Links(ids) => {
                f.write_str("[")?;
                for (i, id) in ids.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{id}")?;
                }
                f.write_str("]")
            }
            SlotValue::Mixed => f.write_str("<mixed>"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DescribeRow {
    pub slot: String,
    pub kind: SlotKind,
    pub value: SlotValue,
}

/// Query operations bound to one model.
#[derive(Clone, Copy)]
pub struct Query<'m> {
    model: &'m Model,
}

impl<'m> Query<'m> {
    pub fn new(model: &'m Model) -> Self {
        Query { model }
    }

    pub fn model(&self) -> &'m Model {
        self.model
    }

    pub fn resolve_type(&self, name: &str) -> Result<TypeId, QueryError> {
        self.model
            .metamodel()
            .lookup(name)
            .ok_or_else(|| QueryError::UnknownType(name.to_owned()))
    }

    pub fn resolve_kind(&self, name: &str) -> Result<TypeId, QueryError> {
        let mm = self.model.metamodel();
        match mm.lookup(name) {
            Some(id) if mm.type_def(id).category() == Some(TraitCategory::Association) => Ok(id),
            _ => Err(QueryError::UnknownKind(name.to_owned())),
        }
    }

    fn check_kind(&self, kind: TypeId) -> Result<(), QueryError> {
        let mm = self.model.metamodel();
        if mm.owns(kind) && mm.type_def(kind).category() == Some(TraitCategory::Association) {
            Ok(())
        } else if mm.owns(kind) {
            Err(QueryError::UnknownKind(mm.type_name(kind).to_owned()))
        } else {
            Err(QueryError::UnknownKind(format!("{kind:?}")))
        }
    }

    /// Nearest container (or the entity itself) conforming to `scope`.
    /// Entities without one are dropped.
    pub fn at_scope(&self, receiver: &QueryResult, scope: TypeId) -> QueryResult {
        let items = receiver.iter().filter_map(|e| {
            self.model
                .ancestors_or_self(e)
                .into_iter()
                .find(|&a| self.model.is_a(a, scope))
        });
        QueryResult::with_provenance(items, receiver.provenance.iter().copied())
    }

    /// Every entity in the receivers' subtrees (receivers included)
    /// conforming to `scope`.
    pub fn to_scope(&self, receiver: &QueryResult, scope: TypeId) -> QueryResult {
        let items = receiver
            .iter()
            .flat_map(|e| self.model.subtree(e))
            .filter(|&d| self.model.is_a(d, scope));
        QueryResult::with_provenance(items, receiver.provenance.iter().copied())
    }

    pub fn children(&self, receiver: &QueryResult) -> QueryResult {
        receiver
            .iter()
            .flat_map(|e| self.model.children_of(e))
            .collect()
    }

    pub fn parent(&self, receiver: &QueryResult) -> QueryResult {
        receiver
            .iter()
            .filter_map(|e| self.model.container_of(e))
            .collect()
    }

    pub fn outgoing(
        &self,
        receiver: &QueryResult,
        kind: TypeId,
    ) -> Result<QueryResult, QueryError> {
        self.check_kind(kind)?;
        Ok(self.dependencies(receiver, Direction::Outgoing, Some(kind)))
    }

    pub fn incoming(
        &self,
        receiver: &QueryResult,
        kind: TypeId,
    ) -> Result<QueryResult, QueryError> {
        self.check_kind(kind)?;
        Ok(self.dependencies(receiver, Direction::Incoming, Some(kind)))
    }

    pub fn all_outgoing(&self, receiver: &QueryResult) -> QueryResult {
        self.dependencies(receiver, Direction::Outgoing, None)
    }

    pub fn all_incoming(&self, receiver: &QueryResult) -> QueryResult {
        self.dependencies(receiver, Direction::Incoming, None)
    }

    /// Dependencies of every receiver aggregated over its subtree, minus the
    /// ones internal to that subtree.
    pub fn dependencies(
        &self,
        receiver: &QueryResult,
        direction: Direction,
        kind: Option<TypeId>,
    ) -> QueryResult {
        let mut items = BTreeSet::new();
        let mut provenance = Vec::new();
        for r in receiver.iter() {
            let scope = self.model.subtree(r);
            self.collect_external(&scope, direction, kind, &mut items, &mut provenance);
        }
        QueryResult::with_provenance(items, provenance)
    }

    /// Treats `scope` as one virtual container and collects the
    /// dependencies crossing its border in `direction`.
    pub fn scope_dependencies(
        &self,
        scope: &BTreeSet<EntityId>,
        direction: Direction,
        kind: Option<TypeId>,
    ) -> QueryResult {
        let mut items = BTreeSet::new();
        let mut provenance = Vec::new();
        self.collect_external(scope, direction, kind, &mut items, &mut provenance);
        QueryResult::with_provenance(items, provenance)
    }

    fn collect_external(
        &self,
        scope: &BTreeSet<EntityId>,
        direction: Direction,
        kind: Option<TypeId>,
        items: &mut BTreeSet<EntityId>,
        provenance: &mut Vec<Dependency>,
    ) {
        let mm = self.model.metamodel();
        for &inner in scope {
            let deps = match direction {
                Direction::Outgoing => self.model.outgoing_dependencies(inner),
                Direction::Incoming => self.model.incoming_dependencies(inner),
            };
            for dep in deps {
                if kind.is_some_and(|k| !mm.conforms(dep.kind, k)) {
                    continue;
                }
                let other = match direction {
                    Direction::Outgoing => dep.target,
                    Direction::Incoming => dep.source,
                };
                if !scope.contains(&other) {
                    items.insert(other);
                    provenance.push(dep);
                }
            }
        }
    }

    /// Every slot of the entity's table with its current content.
    pub fn describe(&self, id: EntityId) -> Result<Vec<DescribeRow>, QueryError> {
        let table = self
            .model
            .table_of(id)
            .map_err(|_| QueryError::UnknownEntity(id))?;
        let mm = self.model.metamodel();
        let values = self
            .model
            .property_values(id)
            .map_err(|_| QueryError::UnknownEntity(id))?;
        let mut rows: Vec<DescribeRow> = table
            .properties
            .iter()
            .zip(values)
            .map(|(p, v)| DescribeRow {
                slot: p.name.clone(),
                kind: SlotKind::Property(p.kind),
                value: v.clone().map_or(SlotValue::Absent, SlotValue::Value),
            })
            .collect();
        let links = self
            .model
            .link_slots(id)
            .map_err(|_| QueryError::UnknownEntity(id))?;
        rows.extend(links.map(|(ls, set)| DescribeRow {
            slot: ls.name.clone(),
            kind: SlotKind::Link {
                target: mm.type_name(ls.target).to_owned(),
                multiplicity: ls.multiplicity,
            },
            value: SlotValue::Links(set.iter().copied().collect()),
        }));
        Ok(rows)
    }

    /// Slots common to every member (same name and kind). A value is shown
    /// when all members agree on it.
    pub fn describe_group(&self, group: &QueryResult) -> Result<Vec<DescribeRow>, QueryError> {
        let mut members = group.iter();
        let Some(first) = members.next() else {
            return Ok(Vec::new());
        };
        let mut rows = self.describe(first)?;
        for id in members {
            let other = self.describe(id)?;
            rows.retain_mut(|row| {
                match other
                    .iter()
                    .find(|o| o.slot == row.slot && o.kind == row.kind)
                {
                    Some(o) => {
                        if o.value != row.value {
                            row.value = SlotValue::Mixed;
                        }
                        true
                    }
                    None => false,
                }
            });
        }
        Ok(rows)
    }

    /// Parses and runs a pipeline. `input` is the group a leading verb
    /// applies to.
    pub fn run(&self, text: &str, input: Option<&QueryResult>) -> Result<QueryResult, QueryError> {
        let pipeline = Pipeline::parse(text)?;
        self.run_pipeline(&pipeline, input)
    }

    pub fn run_pipeline(
        &self,
        pipeline: &Pipeline,
        input: Option<&QueryResult>,
    ) -> Result<QueryResult, QueryError> {
        let mut current = input.cloned().unwrap_or_default();
        for stage in &pipeline.stages {
            current = match stage {
                Stage::Select(selector) => self.select(selector)?,
                Stage::Outgoing(k) => self.outgoing(&current, self.resolve_kind(k)?)?,
                Stage::Incoming(k) => self.incoming(&current, self.resolve_kind(k)?)?,
                Stage::AllOutgoing => self.all_outgoing(&current),
                Stage::AllIncoming => self.all_incoming(&current),
                Stage::AtScope(t) => self.at_scope(&current, self.resolve_type(t)?),
                Stage::ToScope(t) => self.to_scope(&current, self.resolve_type(t)?),
                Stage::Children => self.children(&current),
                Stage::Parent => self.parent(&current),
            };
        }
        Ok(current)
    }

    fn select(&self, selector: &Selector) -> Result<QueryResult, QueryError> {
        let model = self.model;
        Ok(match selector {
            Selector::Type(name) => {
                let ty = self.resolve_type(name)?;
                model.entity_ids().filter(|&e| model.is_a(e, ty)).collect()
            }
            Selector::Ids(ids) => {
                for &id in ids {
                    if !model.contains(id) {
                        return Err(QueryError::UnknownEntity(id));
                    }
                }
                ids.iter().copied().collect()
            }
            Selector::Name(name) => model
                .entity_ids()
                .filter(|&e| model.name_of(e) == Some(name.as_str()))
                .collect(),
            Selector::Tag(name) => {
                let tag = model
                    .tag_by_name(name)
                    .ok_or_else(|| QueryError::UnknownTag(name.clone()))?;
                tag.members.iter().copied().collect()
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selector {
    Type(String),
    Ids(Vec<EntityId>),
    Name(String),
    Tag(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stage {
    Select(Selector),
    Outgoing(String),
    Incoming(String),
    AllOutgoing,
    AllIncoming,
    AtScope(String),
    ToScope(String),
    Children,
    Parent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pipeline {
    pub stages: Vec<Stage>,
}

impl Pipeline {
    pub fn parse(text: &str) -> Result<Pipeline, QueryError> {
        let stages = split_stages(text)?;
        if stages.iter().all(|s| s.trim().is_empty()) {
            return Err(QueryError::EmptyPipeline);
        }
        let stages = stages
            .iter()
            .enumerate()
            .map(|(i, s)| parse_stage(i + 1, s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Pipeline { stages })
    }

    pub fn starts_with_selector(&self) -> bool {
        matches!(self.stages.first(), Some(Stage::Select(_)))
    }
}

fn split_stages(text: &str) -> Result<Vec<String>, QueryError> {
    let mut stages = vec![String::new()];
    let mut in_string = false;
    let mut escaped = false;
    for c in text.chars() {
        let current = stages.last_mut().expect("at least one stage");
        if in_string {
            current.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
        } else if c == '|' {
            stages.push(String::new());
        } else {
            if c == '"' {
                in_string = true;
            }
            current.push(c);
        }
    }
    if in_string {
        return Err(QueryError::Parse {
            stage: stages.len(),
            message: "unterminated string".into(),
        });
    }
    Ok(stages)
}

fn parse_string(stage: usize, raw: &str) -> Result<String, QueryError> {
    let err = |message: &str| QueryError::Parse {
        stage,
        message: message.to_owned(),
    };
    let inner = raw
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .filter(|_| raw.len() >= 2)
        .ok_or_else(|| err("expected a quoted string"))?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some(e @ ('"' | '\\')) => out.push(e),
                _ => return Err(err("bad escape in string")),
            },
            '"' => return Err(err("unescaped quote in string")),
            c => out.push(c),
        }
    }
    Ok(out)
}

fn parse_stage(stage: usize, text: &str) -> Result<Stage, QueryError> {
    let err = |message: String| QueryError::Parse { stage, message };
    let text = text.trim();
    if text.is_empty() {
        return Err(err("empty stage".into()));
    }
    for (prefix, quoted) in [
        ("type:", false),
        ("id:", false),
        ("name:", true),
        ("tag:", true),
    ] {
        let Some(rest) = text.strip_prefix(prefix) else {
            continue;
        };
        let rest = rest.trim();
        let selector = match prefix {
            "type:" if is_identifier(rest) => Selector::Type(rest.to_owned()),
            "type:" => return Err(err(format!("bad type name '{rest}'"))),
            "id:" => {
                let ids = rest
                    .split(',')
                    .map(|n| {
                        n.trim()
                            .parse::<u64>()
                            .ok()
                            .filter(|&n| n > 0)
                            .map(EntityId)
                    })
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| err(format!("bad entity id list '{rest}'")))?;
                Selector::Ids(ids)
            }
            "name:" => Selector::Name(parse_string(stage, rest)?),
            _ => {
                debug_assert!(quoted);
                Selector::Tag(parse_string(stage, rest)?)
            }
        };
        return Ok(Stage::Select(selector));
    }
    let words: Vec<&str> = text.split_whitespace().collect();
    let arg = |verb: &str| -> Result<String, QueryError> {
        match words.as_slice() {
            [_, name] if is_identifier(name) => Ok((*name).to_owned()),
            _ => Err(err(format!("'{verb}' takes one type name"))),
        }
    };
    let bare = |stage: Stage, verb: &str| -> Result<Stage, QueryError> {
        if words.len() == 1 {
            Ok(stage)
        } else {
            Err(err(format!("'{verb}' takes no argument")))
        }
    };
    match words[0] {
        "outgoing" => Ok(Stage::Outgoing(arg("outgoing")?)),
        "incoming" => Ok(Stage::Incoming(arg("incoming")?)),
        "at-scope" => Ok(Stage::AtScope(arg("at-scope")?)),
        "to-scope" => Ok(Stage::ToScope(arg("to-scope")?)),
        "all-outgoing" => bare(Stage::AllOutgoing, "all-outgoing"),
        "all-incoming" => bare(Stage::AllIncoming, "all-incoming"),
        "children" => bare(Stage::Children, "children"),
        "parent" => bare(Stage::Parent, "parent"),
        other => Err(err(format!("unknown verb '{other}'"))),
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '-' || c == '.')
}
