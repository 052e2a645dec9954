//! The state behind the service: loaded models, the active one, and the hub
//! of buses and tools working on it. Every endpoint is one method here, so
//! the HTTP layer only parses requests and renders results.

use std::collections::{BTreeMap, BTreeSet};

use facet_bus::tools::{export_log, LogFormat};
use facet_bus::{
    payload, BusError, BusId, EntityLabel, Event, Hub, Mode, Publication, ToolId, ToolInstance,
    ToolKind, ToolState,
};
use facet_core::{EntityId, Model, Query, QueryResult};
use serde_json::{json, Value as Json};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub detail: String,
}

impl ApiError {
    pub fn new(status: u16, code: &'static str, detail: impl Into<String>) -> ApiError {
        ApiError {
            status,
            code,
            detail: detail.into(),
        }
    }

    pub fn body(&self) -> Json {
        json!({ "error": self.code, "detail": self.detail })
    }
}

impl From<BusError> for ApiError {
    fn from(e: BusError) -> ApiError {
        let (status, code) = match &e {
            BusError::UnknownBus(_) => (404, "unknown-bus"),
            BusError::UnknownTool(_) => (404, "unknown-tool"),
            BusError::UnknownEntity(_) => (404, "unknown-entity"),
            BusError::Detached { .. } | BusError::NoBus(_) => (409, "detached"),
            BusError::WrongKind { .. } => (400, "wrong-tool-kind"),
            BusError::NoLogEntry(_) => (404, "unknown-log-entry"),
            BusError::Navigation(_) => (400, "bad-slot"),
            BusError::Query(_) => (400, "bad-pipeline"),
        };
        ApiError::new(status, code, e.to_string())
    }
}

pub type ApiResult<T = Json> = Result<T, ApiError>;

pub struct Session {
    models: BTreeMap<String, Model>,
    active: String,
    hub: Hub,
    events: Vec<Json>,
}

impl Session {
    /// A session over `models`, working on the first one until another is
    /// activated.
    pub fn new(models: impl IntoIterator<Item = Model>) -> Session {
        let models: BTreeMap<String, Model> = models
            .into_iter()
            .map(|m| (m.name().to_owned(), m))
            .collect();
        let active = models.keys().next().cloned().unwrap_or_default();
        Session {
            models,
            active,
            hub: Hub::new(),
            events: Vec::new(),
        }
    }

    pub fn with_active(mut self, name: &str) -> Session {
        if self.models.contains_key(name) {
            self.active = name.to_owned();
        }
        self
    }

    pub fn model(&self) -> &Model {
        &self.models[&self.active]
    }

    pub fn hub(&self) -> &Hub {
        &self.hub
    }

    /// Events since `from`, and the index to continue from.
    pub fn events_since(&self, from: usize) -> (&[Json], usize) {
        let from = from.min(self.events.len());
        (&self.events[from..], self.events.len())
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    fn flush(&mut self) {
        for event in self.hub.take_events() {
            self.events.push(render_event(&event));
        }
    }

    /// Runs a hub operation against the active model, then moves its events
    /// to the log.
    fn with_hub<T>(
        &mut self,
        f: impl FnOnce(&mut Hub, &Model) -> Result<T, BusError>,
    ) -> ApiResult<T> {
        let model = &self.models[&self.active];
        let result = f(&mut self.hub, model);
        self.flush();
        Ok(result?)
    }

    pub fn list_models(&self) -> Json {
        let models: Vec<Json> = self
            .models
            .values()
            .map(|m| {
                json!({
                    "name": m.name(),
                    "metamodel": m.metamodel().name(),
                    "entities": m.len(),
                    "links": m.link_count(),
                    "tags": m.tags().map(|t| t.name.clone()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "active": self.active, "models": models })
    }

    /// Switches the active model. Buses and tools refer to entities of the
    /// old model, so the hub starts over.
    pub fn activate(&mut self, name: &str) -> ApiResult {
        if !self.models.contains_key(name) {
            return Err(ApiError::new(
                404,
                "unknown-model",
                format!("unknown model '{name}'"),
            ));
        }
        if self.active != name {
            self.active = name.to_owned();
            self.hub = Hub::new();
        }
        Ok(self.list_models())
    }

    pub fn describe(&self, id: u64) -> ApiResult {
        let model = self.model();
        let id = EntityId(id);
        let rows = Query::new(model)
            .describe(id)
            .map_err(|e| ApiError::new(404, "unknown-entity", e.to_string()))?;
        let rows: Vec<Json> = rows
            .iter()
            .map(|r| json!({ "slot": r.slot, "kind": r.kind.to_string(), "value": r.value.to_string() }))
            .collect();
        Ok(json!({ "entity": EntityLabel::of(model, id), "rows": rows }))
    }

    pub fn query(&self, pipeline: &str, input: Option<&[u64]>) -> ApiResult {
        let model = self.model();
        let input: Option<QueryResult> =
            input.map(|ids| ids.iter().map(|&i| EntityId(i)).collect());
        let result = Query::new(model)
            .run(pipeline, input.as_ref())
            .map_err(|e| ApiError::new(400, "bad-pipeline", e.to_string()))?;
        let mm = model.metamodel();
        let provenance: Vec<Json> = result
            .provenance()
            .iter()
            .map(
                |d| json!({ "source": d.source, "target": d.target, "kind": mm.type_name(d.kind) }),
            )
            .collect();
        Ok(json!({
            "entities": EntityLabel::all(model, result.items()),
            "provenance": provenance,
        }))
    }

    pub fn list_buses(&self) -> Json {
        Json::Array(self.hub.buses().map(render_bus).collect())
    }

    pub fn create_bus(&mut self, name: Option<&str>) -> ApiResult {
        let name = name.map_or_else(
            || format!("bus{}", self.hub.buses().count() + 1),
            str::to_owned,
        );
        let id = self.hub.create_bus(name);
        Ok(render_bus(self.hub.bus(id)?))
    }

    pub fn bus_history(&self, id: u32) -> ApiResult {
        let bus = self.hub.bus(BusId(id))?;
        Ok(json!(bus.history))
    }

    pub fn list_tools(&self) -> Json {
        let model = self.model();
        Json::Array(self.hub.tools().map(|t| render_tool(model, t)).collect())
    }

    pub fn create_tool(&mut self, kind: &str, buses: &[u32]) -> ApiResult {
        let kind = ToolKind::parse(kind).ok_or_else(|| {
            ApiError::new(
                400,
                "unknown-tool-kind",
                format!("unknown tool kind '{kind}'"),
            )
        })?;
        for &b in buses {
            self.hub.bus(BusId(b))?;
        }
        let id = self.hub.create_tool(kind);
        self.with_hub(|hub, model| {
            for &b in buses {
                hub.attach(model, id, BusId(b))?;
            }
            Ok(())
        })?;
        self.tool_summary(id.0)
    }

    pub fn tool_summary(&self, id: u32) -> ApiResult {
        Ok(render_tool(self.model(), self.hub.tool(ToolId(id))?))
    }

    /// Summary plus the kind-specific payload.
    pub fn tool_state(&self, id: u32) -> ApiResult {
        let model = self.model();
        let tool = self.hub.tool(ToolId(id))?;
        let mut state = render_tool(model, tool);
        state["payload"] = payload(model, tool);
        Ok(state)
    }

    pub fn set_mode(&mut self, id: u32, mode: &str) -> ApiResult {
        let mode = Mode::parse(mode)
            .ok_or_else(|| ApiError::new(400, "bad-mode", format!("unknown mode '{mode}'")))?;
        self.with_hub(|hub, model| hub.set_mode(model, ToolId(id), mode))?;
        self.tool_summary(id)
    }

    pub fn set_bridge(&mut self, id: u32, bridge: bool) -> ApiResult {
        self.with_hub(|hub, model| hub.set_bridge(model, ToolId(id), bridge))?;
        self.tool_summary(id)
    }

    pub fn attach(&mut self, id: u32, bus: u32) -> ApiResult {
        self.with_hub(|hub, model| hub.attach(model, ToolId(id), BusId(bus)))?;
        self.tool_summary(id)
    }

    pub fn detach(&mut self, id: u32, bus: u32) -> ApiResult {
        self.with_hub(|hub, model| hub.detach(model, ToolId(id), BusId(bus)))?;
        self.tool_summary(id)
    }

    /// Publishes a user selection made in a tool: on one bus if given,
    /// otherwise on every bus the tool is attached to.
    pub fn select(&mut self, id: u32, entities: &[u64], bus: Option<u32>) -> ApiResult {
        let entities: BTreeSet<EntityId> = entities.iter().map(|&e| EntityId(e)).collect();
        let p = self.with_hub(|hub, model| match bus {
            Some(b) => hub.publish(model, ToolId(id), BusId(b), entities),
            None => hub.select(model, ToolId(id), entities),
        })?;
        Ok(render_publication(&p))
    }

    pub fn run_tool_query(&mut self, id: u32, pipeline: &str) -> ApiResult {
        let (_, p) = self.with_hub(|hub, model| hub.run_query(model, ToolId(id), pipeline))?;
        Ok(render_publication(&p))
    }

    pub fn navigate(&mut self, id: u32, slot: &str) -> ApiResult {
        let p = self.with_hub(|hub, model| hub.inspector_navigate(model, ToolId(id), slot))?;
        Ok(render_publication(&p))
    }

    pub fn replay(&mut self, id: u32, entry: usize) -> ApiResult {
        let p = self.with_hub(|hub, model| hub.logger_replay(model, ToolId(id), entry))?;
        Ok(render_publication(&p))
    }

    pub fn set_min_tokens(&mut self, id: u32, min_tokens: usize) -> ApiResult {
        self.hub.set_min_tokens(ToolId(id), min_tokens)?;
        self.tool_state(id)
    }

    pub fn export_log(&self, id: u32, format: &str) -> ApiResult<String> {
        let format = LogFormat::parse(format).ok_or_else(|| {
            ApiError::new(400, "bad-format", format!("unknown format '{format}'"))
        })?;
        let tool = self.hub.tool(ToolId(id))?;
        let ToolState::Logger { entries } = &tool.state else {
            return Err(BusError::WrongKind {
                tool: tool.id,
                actual: tool.kind,
                expected: ToolKind::Logger,
            }
            .into());
        };
        Ok(export_log(self.model(), entries, format))
    }
}

fn render_bus(bus: &facet_bus::Bus) -> Json {
    json!({ "id": bus.id, "name": bus.name, "tools": bus.tools, "messages": bus.history.len() })
}

fn render_tool(model: &Model, t: &ToolInstance) -> Json {
    json!({
        "id": t.id,
        "kind": t.kind,
        "mode": t.mode,
        "bridge": t.bridge,
        "buses": t.buses,
        "currentEntities": EntityLabel::all(model, &t.current),
        "highlighted": t.highlighted,
    })
}

fn render_publication(p: &Publication) -> Json {
    let deliveries: Vec<Json> = p
        .deliveries
        .iter()
        .map(|(m, t)| json!({ "message": m, "tool": t }))
        .collect();
    json!({ "lineage": p.lineage, "messages": p.messages, "deliveries": deliveries })
}

pub fn render_event(event: &Event) -> Json {
    serde_json::to_value(event).expect("events serialize")
}
