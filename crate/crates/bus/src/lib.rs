//! Buses connecting analysis tools, the behavior controls that decide how a
//! tool reacts to traffic, and headless cores for the tool catalog.

pub mod dup;
mod hub;
pub mod tools;

pub use hub::{
    Bus, BusError, BusId, BusMessage, EntityLabel, Event, Hub, MessageId, Mode, Publication,
    ToolId, ToolInstance,
};
pub use tools::{payload, LogEntry, LogFormat, ToolKind, ToolState};
