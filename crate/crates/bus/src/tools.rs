//! Headless cores of the tool catalog. Each kind turns its current entities
//! into a payload; only the logger and the query browser keep extra state.

use std::collections::BTreeSet;
use std::fmt;

use facet_core::{EntityId, Model, Query, QueryResult};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};

use crate::dup::{self, DEFAULT_MIN_TOKENS};
use crate::hub::{BusId, EntityLabel, MessageId, ToolId, ToolInstance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ToolKind {
    ModelBrowser,
    EntityInspector,
    QueryBrowser,
    DependencyGraph,
    Duplication,
    SourceCode,
    Logger,
}

impl ToolKind {
    pub const ALL: [ToolKind; 7] = [
        ToolKind::ModelBrowser,
        ToolKind::EntityInspector,
        ToolKind::QueryBrowser,
        ToolKind::DependencyGraph,
        ToolKind::Duplication,
        ToolKind::SourceCode,
        ToolKind::Logger,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ToolKind::ModelBrowser => "modelBrowser",
            ToolKind::EntityInspector => "entityInspector",
            ToolKind::QueryBrowser => "queryBrowser",
            ToolKind::DependencyGraph => "dependencyGraph",
            ToolKind::Duplication => "duplication",
            ToolKind::SourceCode => "sourceCode",
            ToolKind::Logger => "logger",
        }
    }

    pub fn parse(s: &str) -> Option<ToolKind> {
        ToolKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for ToolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct LogEntry {
    pub timestamp: u64,
    pub message: MessageId,
    pub bus: BusId,
    pub producer: ToolId,
    pub entities: BTreeSet<EntityId>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ToolState {
    Plain,
    Logger {
        entries: Vec<LogEntry>,
    },
    QueryBrowser {
        pipeline: Option<String>,
        result: Vec<EntityId>,
    },
    Duplication {
        min_tokens: usize,
    },
}

impl ToolState {
    pub fn new(kind: ToolKind) -> ToolState {
        match kind {
            ToolKind::Logger => ToolState::Logger {
                entries: Vec::new(),
            },
            ToolKind::QueryBrowser => ToolState::QueryBrowser {
                pipeline: None,
                result: Vec::new(),
            },
            ToolKind::Duplication => ToolState::Duplication {
                min_tokens: DEFAULT_MIN_TOKENS,
            },
            _ => ToolState::Plain,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphNode {
    pub id: EntityId,
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub input: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct GraphEdge {
    pub source: EntityId,
    pub target: EntityId,
    pub kind: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GraphDocument {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<GraphEdge>,
}

/// Direct kinded dependencies touching any input, without closure.
pub fn dependency_graph(model: &Model, inputs: &BTreeSet<EntityId>) -> GraphDocument {
    let mm = model.metamodel();
    let mut edges = BTreeSet::new();
    for &e in inputs {
        let deps = model
            .outgoing_dependencies(e)
            .into_iter()
            .chain(model.incoming_dependencies(e));
        for dep in deps {
            edges.insert(GraphEdge {
                source: dep.source,
                target: dep.target,
                kind: mm.type_name(dep.kind).to_owned(),
            });
        }
    }
    let mut ids = inputs.clone();
    for edge in &edges {
        ids.insert(edge.source);
        ids.insert(edge.target);
    }
    let nodes = ids
        .into_iter()
        .map(|id| {
            let label = EntityLabel::of(model, id);
            GraphNode {
                id,
                type_name: label.type_name,
                name: label.name,
                input: inputs.contains(&id),
            }
        })
        .collect();
    GraphDocument {
        nodes,
        edges: edges.into_iter().collect(),
    }
}

/// The source slice of a single anchored input; nothing otherwise.
pub fn source_view(model: &Model, inputs: &BTreeSet<EntityId>) -> Option<String> {
    match inputs.iter().collect::<Vec<_>>().as_slice() {
        [only] => model.source_slice(**only),
        _ => None,
    }
}

pub const LOG_COLUMNS: [&str; 5] = ["timestamp", "producer", "entity", "type", "name"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogFormat {
    Txt,
    Csv,
}

impl LogFormat {
    pub fn parse(s: &str) -> Option<LogFormat> {
        match s {
            "txt" => Some(LogFormat::Txt),
            "csv" => Some(LogFormat::Csv),
            _ => None,
        }
    }
}

/// One row per recorded entity. Text output is tab separated.
pub fn export_log(model: &Model, entries: &[LogEntry], format: LogFormat) -> String {
    let rows = entries.iter().flat_map(|entry| {
        entry.entities.iter().map(move |&id| {
            let label = EntityLabel::of(model, id);
            [
                entry.timestamp.to_string(),
                entry.producer.to_string(),
                id.to_string(),
                label.type_name,
                label.name.unwrap_or_default(),
            ]
        })
    });
    match format {
        LogFormat::Txt => {
            let mut out = LOG_COLUMNS.join("\t");
            out.push('\n');
            for row in rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
            out
        }
        LogFormat::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record(LOG_COLUMNS).expect("in-memory write");
            for row in rows {
                writer.write_record(&row).expect("in-memory write");
            }
            String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 fields")
        }
    }
}

/// The kind-specific part of a tool's state, as sent to clients.
pub fn payload(model: &Model, tool: &ToolInstance) -> Json {
    let current = &tool.current;
    match (&tool.state, tool.kind) {
        (ToolState::Logger { entries }, _) => json!({ "entries": entries }),
        (ToolState::QueryBrowser { pipeline, result }, _) => {
            json!({ "pipeline": pipeline, "result": result })
        }
        (ToolState::Duplication { min_tokens }, _) => {
            let inputs: Vec<EntityId> = current.iter().copied().collect();
            json!(dup::detect(model, &inputs, *min_tokens))
        }
        (_, ToolKind::DependencyGraph) => json!(dependency_graph(model, current)),
        (_, ToolKind::SourceCode) => json!({ "text": source_view(model, current) }),
        (_, ToolKind::EntityInspector) => {
            let group: QueryResult = current.iter().copied().collect();
            let rows = Query::new(model).describe_group(&group).unwrap_or_default();
            let rows: Vec<Json> = rows
                .iter()
                .map(|r| json!({ "slot": r.slot, "kind": r.kind.to_string(), "value": r.value.to_string() }))
                .collect();
            json!({ "rows": rows })
        }
        (_, _) => json!({ "entities": EntityLabel::all(model, current) }),
    }
}
