use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use facet_core::{EntityId, Model, Pipeline, Query, QueryError, QueryResult};
use serde::{Deserialize, Serialize};

use crate::tools::{LogEntry, ToolKind, ToolState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BusId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ToolId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MessageId(pub u64);

impl fmt::Display for BusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ToolId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Following,
    Frozen,
    Highlighting,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Following => "following",
            Mode::Frozen => "frozen",
            Mode::Highlighting => "highlighting",
        }
    }

    pub fn parse(s: &str) -> Option<Mode> {
        match s {
            "following" => Some(Mode::Following),
            "frozen" => Some(Mode::Frozen),
            "highlighting" => Some(Mode::Highlighting),
            _ => None,
        }
    }
}

/// One traversal of a bus by an entity group. All messages caused by the same
/// publication (the original and every bridge forward) share a `lineage`,
/// which is the id of the original message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct BusMessage {
    pub id: MessageId,
    pub lineage: MessageId,
    pub bus: BusId,
    pub producer: ToolId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forwarded_by: Option<ToolId>,
    pub entities: BTreeSet<EntityId>,
    pub visited_buses: BTreeSet<BusId>,
    pub timestamp: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bus {
    pub id: BusId,
    pub name: String,
    pub tools: BTreeSet<ToolId>,
    pub history: Vec<BusMessage>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToolInstance {
    pub id: ToolId,
    pub kind: ToolKind,
    pub buses: BTreeSet<BusId>,
    pub mode: Mode,
    pub bridge: bool,
    pub current: BTreeSet<EntityId>,
    pub highlighted: BTreeSet<EntityId>,
    pub state: ToolState,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityLabel {
    pub id: EntityId,
    #[serde(rename = "type")]
    pub type_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl EntityLabel {
    pub fn of(model: &Model, id: EntityId) -> EntityLabel {
        EntityLabel {
            id,
            type_name: model.type_name(id).unwrap_or("?").to_owned(),
            name: model.name_of(id).map(str::to_owned),
        }
    }

    pub fn all(model: &Model, ids: &BTreeSet<EntityId>) -> Vec<EntityLabel> {
        ids.iter().map(|&id| EntityLabel::of(model, id)).collect()
    }
}

/// What clients see on the event stream, in delivery order.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(
    tag = "event",
    rename_all = "camelCase",
    rename_all_fields = "camelCase"
)]
pub enum Event {
    Message {
        message_id: MessageId,
        lineage: MessageId,
        bus: BusId,
        producer: ToolId,
        #[serde(skip_serializing_if = "Option::is_none")]
        forwarded_by: Option<ToolId>,
        entities: Vec<EntityLabel>,
        visited_buses: BTreeSet<BusId>,
        timestamp: u64,
    },
    ToolState {
        tool: ToolId,
        kind: ToolKind,
        mode: Mode,
        buses: BTreeSet<BusId>,
        bridge: bool,
        current_entities: Vec<EntityLabel>,
        highlighted: BTreeSet<EntityId>,
    },
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BusError {
    #[error("unknown bus {0}")]
    UnknownBus(BusId),
    #[error("unknown tool {0}")]
    UnknownTool(ToolId),
    #[error("tool {tool} is not attached to bus {bus}")]
    Detached { tool: ToolId, bus: BusId },
    #[error("tool {0} is not attached to any bus")]
    NoBus(ToolId),
    #[error("unknown entity {0}")]
    UnknownEntity(EntityId),
    #[error("tool {tool} is of kind {actual}, not {expected}")]
    WrongKind {
        tool: ToolId,
        actual: ToolKind,
        expected: ToolKind,
    },
    #[error("no log entry {0}")]
    NoLogEntry(usize),
    #[error("{0}")]
    Navigation(String),
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// Outcome of one publication: every message it caused (the original ones
/// first, then bridge forwards in queue order) and every delivery made, as
/// (message, receiving tool).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Publication {
    pub lineage: Option<MessageId>,
    pub messages: Vec<BusMessage>,
    pub deliveries: Vec<(MessageId, ToolId)>,
}

struct Pending {
    bus: BusId,
    lineage: MessageId,
    producer: ToolId,
    forwarded_by: Option<ToolId>,
    entities: BTreeSet<EntityId>,
    visited: BTreeSet<BusId>,
}

/// Buses and tool instances of one session. The hub never owns the model:
/// every call that resolves entities takes it as an argument, so the model
/// stays the single source of truth.
#[derive(Default)]
pub struct Hub {
    buses: BTreeMap<BusId, Bus>,
    tools: BTreeMap<ToolId, ToolInstance>,
    next_bus: u32,
    next_tool: u32,
    next_message: u64,
    clock: u64,
    events: Vec<Event>,
}

impl Hub {
    pub fn new() -> Hub {
        Hub::default()
    }

    pub fn create_bus(&mut self, name: impl Into<String>) -> BusId {
        self.next_bus += 1;
        let id = BusId(self.next_bus);
        self.buses.insert(
            id,
            Bus {
                id,
                name: name.into(),
                tools: BTreeSet::new(),
                history: Vec::new(),
            },
        );
        id
    }

    pub fn bus(&self, id: BusId) -> Result<&Bus, BusError> {
        self.buses.get(&id).ok_or(BusError::UnknownBus(id))
    }

    pub fn buses(&self) -> impl Iterator<Item = &Bus> {
        self.buses.values()
    }

    pub fn create_tool(&mut self, kind: ToolKind) -> ToolId {
        self.next_tool += 1;
        let id = ToolId(self.next_tool);
        self.tools.insert(
            id,
            ToolInstance {
                id,
                kind,
                buses: BTreeSet::new(),
                mode: Mode::Following,
                bridge: false,
                current: BTreeSet::new(),
                highlighted: BTreeSet::new(),
                state: ToolState::new(kind),
            },
        );
        id
    }

    pub fn tool(&self, id: ToolId) -> Result<&ToolInstance, BusError> {
        self.tools.get(&id).ok_or(BusError::UnknownTool(id))
    }

    pub fn tools(&self) -> impl Iterator<Item = &ToolInstance> {
        self.tools.values()
    }

    fn tool_mut(&mut self, id: ToolId) -> Result<&mut ToolInstance, BusError> {
        self.tools.get_mut(&id).ok_or(BusError::UnknownTool(id))
    }

    /// Drains the events produced since the last call.
    pub fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }

    pub fn attach(&mut self, model: &Model, tool: ToolId, bus: BusId) -> Result<(), BusError> {
        self.bus(bus)?;
        self.tool(tool)?;
        if self.tools[&tool].buses.contains(&bus) {
            return Ok(());
        }
        self.tool_mut(tool)?.buses.insert(bus);
        self.buses
            .get_mut(&bus)
            .expect("checked")
            .tools
            .insert(tool);
        self.emit_tool_state(model, tool);
        Ok(())
    }

    pub fn detach(&mut self, model: &Model, tool: ToolId, bus: BusId) -> Result<(), BusError> {
        self.bus(bus)?;
        if !self.tool_mut(tool)?.buses.remove(&bus) {
            return Ok(());
        }
        self.buses
            .get_mut(&bus)
            .expect("checked")
            .tools
            .remove(&tool);
        self.emit_tool_state(model, tool);
        Ok(())
    }

    pub fn detach_all(&mut self, model: &Model, tool: ToolId) -> Result<(), BusError> {
        let buses: Vec<BusId> = self.tool(tool)?.buses.iter().copied().collect();
        for bus in buses {
            self.detach(model, tool, bus)?;
        }
        Ok(())
    }

    pub fn set_mode(&mut self, model: &Model, tool: ToolId, mode: Mode) -> Result<(), BusError> {
        let t = self.tool_mut(tool)?;
        if t.mode == mode {
            return Ok(());
        }
        t.mode = mode;
        t.highlighted.clear();
        self.emit_tool_state(model, tool);
        Ok(())
    }

    pub fn set_bridge(
        &mut self,
        model: &Model,
        tool: ToolId,
        bridge: bool,
    ) -> Result<(), BusError> {
        let t = self.tool_mut(tool)?;
        if t.bridge != bridge {
            t.bridge = bridge;
            self.emit_tool_state(model, tool);
        }
        Ok(())
    }

    /// Publishes on a single bus the tool is attached to.
    pub fn publish(
        &mut self,
        model: &Model,
        tool: ToolId,
        bus: BusId,
        entities: impl IntoIterator<Item = EntityId>,
    ) -> Result<Publication, BusError> {
        self.publish_on(model, tool, &[bus], entities.into_iter().collect())
    }

    /// Publishes a user selection made in `tool` on every bus it is attached
    /// to, as one lineage.
    pub fn select(
        &mut self,
        model: &Model,
        tool: ToolId,
        entities: impl IntoIterator<Item = EntityId>,
    ) -> Result<Publication, BusError> {
        let buses: Vec<BusId> = self.tool(tool)?.buses.iter().copied().collect();
        if buses.is_empty() {
            return Err(BusError::NoBus(tool));
        }
        self.publish_on(model, tool, &buses, entities.into_iter().collect())
    }

    fn publish_on(
        &mut self,
        model: &Model,
        tool: ToolId,
        buses: &[BusId],
        entities: BTreeSet<EntityId>,
    ) -> Result<Publication, BusError> {
        for &bus in buses {
            self.bus(bus)?;
            if !self.tool(tool)?.buses.contains(&bus) {
                return Err(BusError::Detached { tool, bus });
            }
        }
        if let Some(&missing) = entities.iter().find(|&&e| !model.contains(e)) {
            return Err(BusError::UnknownEntity(missing));
        }

        // A following producer shows what it just published.
        let producer = self.tools.get_mut(&tool).expect("checked");
        if producer.mode == Mode::Following && producer.current != entities {
            producer.current = entities.clone();
            self.emit_tool_state(model, tool);
        }

        let lineage = MessageId(self.next_message + 1);
        let mut visited: BTreeSet<BusId> = buses.iter().copied().collect();
        let mut queue: VecDeque<Pending> = buses
            .iter()
            .map(|&bus| Pending {
                bus,
                lineage,
                producer: tool,
                forwarded_by: None,
                entities: entities.clone(),
                visited: visited.clone(),
            })
            .collect();

        let mut publication = Publication {
            lineage: Some(lineage),
            ..Default::default()
        };
        while let Some(pending) = queue.pop_front() {
            self.next_message += 1;
            self.clock += 1;
            let message = BusMessage {
                id: MessageId(self.next_message),
                lineage: pending.lineage,
                bus: pending.bus,
                producer: pending.producer,
                forwarded_by: pending.forwarded_by,
                entities: pending.entities,
                visited_buses: pending.visited,
                timestamp: self.clock,
            };
            self.events.push(Event::Message {
                message_id: message.id,
                lineage: message.lineage,
                bus: message.bus,
                producer: message.producer,
                forwarded_by: message.forwarded_by,
                entities: EntityLabel::all(model, &message.entities),
                visited_buses: message.visited_buses.clone(),
                timestamp: message.timestamp,
            });
            let bus = self
                .buses
                .get_mut(&message.bus)
                .expect("queued buses exist");
            bus.history.push(message.clone());
            let receivers: Vec<ToolId> = bus
                .tools
                .iter()
                .copied()
                .filter(|&t| t != message.producer && Some(t) != message.forwarded_by)
                .collect();

            for receiver in receivers {
                if self.tools[&receiver].mode == Mode::Frozen {
                    continue;
                }
                self.deliver(model, receiver, &message);
                publication.deliveries.push((message.id, receiver));
                let t = &self.tools[&receiver];
                if !t.bridge {
                    continue;
                }
                for &next in &t.buses {
                    if visited.insert(next) {
                        queue.push_back(Pending {
                            bus: next,
                            lineage,
                            producer: message.producer,
                            forwarded_by: Some(receiver),
                            entities: message.entities.clone(),
                            visited: visited.clone(),
                        });
                    }
                }
            }
            publication.messages.push(message);
        }
        Ok(publication)
    }

    fn deliver(&mut self, model: &Model, receiver: ToolId, message: &BusMessage) {
        let t = self.tools.get_mut(&receiver).expect("attached tools exist");
        let changed = match t.mode {
            Mode::Frozen => false,
            Mode::Following => {
                let mut changed = false;
                if let ToolState::Logger { entries } = &mut t.state {
                    entries.push(LogEntry {
                        timestamp: message.timestamp,
                        message: message.id,
                        bus: message.bus,
                        producer: message.producer,
                        entities: message.entities.clone(),
                    });
                    changed = true;
                }
                if t.current != message.entities {
                    t.current = message.entities.clone();
                    changed = true;
                }
                changed
            }
            Mode::Highlighting => {
                let highlighted: BTreeSet<EntityId> =
                    message.entities.intersection(&t.current).copied().collect();
                let changed = highlighted != t.highlighted;
                t.highlighted = highlighted;
                changed
            }
        };
        if changed {
            self.emit_tool_state(model, receiver);
        }
    }

    fn emit_tool_state(&mut self, model: &Model, tool: ToolId) {
        let t = &self.tools[&tool];
        self.events.push(Event::ToolState {
            tool,
            kind: t.kind,
            mode: t.mode,
            buses: t.buses.clone(),
            bridge: t.bridge,
            current_entities: EntityLabel::all(model, &t.current),
            highlighted: t.highlighted.clone(),
        });
    }

    fn expect_kind(&self, tool: ToolId, expected: ToolKind) -> Result<&ToolInstance, BusError> {
        let t = self.tool(tool)?;
        if t.kind != expected {
            return Err(BusError::WrongKind {
                tool,
                actual: t.kind,
                expected,
            });
        }
        Ok(t)
    }

    /// Republishes the group recorded in log entry `index` from the logger.
    pub fn logger_replay(
        &mut self,
        model: &Model,
        logger: ToolId,
        index: usize,
    ) -> Result<Publication, BusError> {
        let t = self.expect_kind(logger, ToolKind::Logger)?;
        let ToolState::Logger { entries } = &t.state else {
            unreachable!("logger state matches kind")
        };
        let entities = entries
            .get(index)
            .ok_or(BusError::NoLogEntry(index))?
            .entities
            .clone();
        self.select(model, logger, entities)
    }

    /// Runs a pipeline in a query tool and publishes the result. A pipeline
    /// that starts with a verb applies to the tool's current entities.
    pub fn run_query(
        &mut self,
        model: &Model,
        tool: ToolId,
        text: &str,
    ) -> Result<(QueryResult, Publication), BusError> {
        let t = self.expect_kind(tool, ToolKind::QueryBrowser)?;
        let pipeline = Pipeline::parse(text)?;
        let input: QueryResult = t.current.iter().copied().collect();
        let result = Query::new(model).run_pipeline(&pipeline, Some(&input))?;
        let t = self.tool_mut(tool)?;
        t.state = ToolState::QueryBrowser {
            pipeline: Some(text.trim().to_owned()),
            result: result.to_vec(),
        };
        let publication = if t.buses.is_empty() {
            if t.mode == Mode::Following && t.current != *result.items() {
                t.current = result.items().clone();
                self.emit_tool_state(model, tool);
            }
            Publication::default()
        } else {
            self.select(model, tool, result.iter())?
        };
        Ok((result, publication))
    }

    pub fn set_min_tokens(&mut self, tool: ToolId, min_tokens: usize) -> Result<(), BusError> {
        self.expect_kind(tool, ToolKind::Duplication)?;
        self.tool_mut(tool)?.state = ToolState::Duplication {
            min_tokens: min_tokens.max(1),
        };
        Ok(())
    }

    /// Follows `slot` from the inspected entities and publishes the targets.
    pub fn inspector_navigate(
        &mut self,
        model: &Model,
        tool: ToolId,
        slot: &str,
    ) -> Result<Publication, BusError> {
        let t = self.expect_kind(tool, ToolKind::EntityInspector)?;
        let mut targets = BTreeSet::new();
        let nav = |err: facet_core::ModelError| BusError::Navigation(err.to_string());
        for &e in &t.current {
            let table = model.table_of(e).map_err(nav)?;
            if table.link_index(slot).is_none() {
                let ty = model.type_name(e).map_err(nav)?;
                let what = if table.property_index(slot).is_some() {
                    "a property"
                } else {
                    "unknown"
                };
                return Err(BusError::Navigation(format!(
                    "slot '{slot}' on type '{ty}' is {what}, not a link"
                )));
            }
            let linked = model.links(e, slot).map_err(nav)?;
            targets.extend(linked.iter().copied());
        }
        self.select(model, tool, targets)
    }
}
