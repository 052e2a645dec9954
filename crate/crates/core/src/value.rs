//! Primitive property values.

use std::fmt;

use serde::{Deserialize, Serialize};

/// The four value kinds a property slot may hold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ValueKind {
    String,
    Number,
    Boolean,
    /// Untyped opaque value, carried as arbitrary JSON.
    Object,
}

impl ValueKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueKind::String => "String",
            ValueKind::Number => "Number",
            ValueKind::Boolean => "Boolean",
            ValueKind::Object => "Object",
        }
    }

    pub fn parse(s: &str) -> Option<ValueKind> {
        match s {
            "String" => Some(ValueKind::String),
            "Number" => Some(ValueKind::Number),
            "Boolean" => Some(ValueKind::Boolean),
            "Object" => Some(ValueKind::Object),
            _ => None,
        }
    }
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A property value. Numbers keep their JSON representation so integers
/// survive an export/import cycle unchanged.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    String(String),
    Number(serde_json::Number),
    Boolean(bool),
    Object(serde_json::Value),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::String(_) => ValueKind::String,
            Value::Number(_) => ValueKind::Number,
            Value::Boolean(_) => ValueKind::Boolean,
            Value::Object(_) => ValueKind::Object,
        }
    }

    /// Builds a number value; `None` for NaN and infinities.
    pub fn number(n: f64) -> Option<Value> {
        serde_json::Number::from_f64(n).map(Value::Number)
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::String(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(n) => n.as_f64(),
            _ => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::String(s) => serde_json::Value::String(s.clone()),
            Value::Number(n) => serde_json::Value::Number(n.clone()),
            Value::Boolean(b) => serde_json::Value::Bool(*b),
            Value::Object(v) => v.clone(),
        }
    }

    /// Interprets a JSON value as a value of the given kind.
    pub fn from_json(kind: ValueKind, json: &serde_json::Value) -> Option<Value> {
        match (kind, json) {
            (ValueKind::String, serde_json::Value::String(s)) => Some(Value::String(s.clone())),
            (ValueKind::Number, serde_json::Value::Number(n)) => Some(Value::Number(n.clone())),
            (ValueKind::Boolean, serde_json::Value::Bool(b)) => Some(Value::Boolean(*b)),
            (ValueKind::Object, v) => Some(Value::Object(v.clone())),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::String(s) => f.write_str(s),
            Value::Number(n) => write!(f, "{n}"),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::Object(v) => write!(f, "{v}"),
        }
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::String(s.to_owned())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::String(s)
    }
}

impl From<i64> for Value {
    fn from(n: i64) -> Self {
        Value::Number(n.into())
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Self {
        Value::Boolean(b)
    }
}
