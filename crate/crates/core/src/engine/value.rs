use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::lang::ast::FunctionDef;

/// Runtime value of the interpreted subset.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Bool(bool),
    None,
    Function(Arc<FunctionDef>),
    Builtin(Builtin),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Builtin {
    Print,
}

impl Builtin {
    pub fn lookup(name: &str) -> Option<Builtin> {
        match name {
            "print" => Some(Builtin::Print),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Print => "print",
        }
    }
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Bool(_) => "bool",
            Value::None => "NoneType",
            Value::Function(_) => "function",
            Value::Builtin(_) => "builtin_function_or_method",
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::Int(v) => *v != 0,
            Value::Bool(b) => *b,
            Value::None => false,
            Value::Function(_) | Value::Builtin(_) => true,
        }
    }

    /// Integer view; bools count as 0/1 like in Python.
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Bool(b) => Some(*b as i64),
            _ => None,
        }
    }

    /// Python `==`: numeric for int/bool, identity otherwise.
    pub fn py_eq(&self, other: &Value) -> bool {
        match (self, other) {
            (Value::None, Value::None) => true,
            (Value::Function(a), Value::Function(b)) => Arc::ptr_eq(a, b),
            (Value::Builtin(a), Value::Builtin(b)) => a == b,
            _ => match (self.as_int(), other.as_int()) {
                (Some(a), Some(b)) => a == b,
                _ => false,
            },
        }
    }

    /// Deep, self-contained copy for trace snapshots.
    pub fn snapshot(&self) -> VarValue {
        match self {
            Value::Int(v) => VarValue::Int { value: *v },
            Value::Bool(b) => VarValue::Bool { value: *b },
            Value::None => VarValue::None,
            Value::Function(def) => VarValue::Function { name: def.name.clone(), line: def.line },
            Value::Builtin(b) => VarValue::Builtin { name: b.name().to_string() },
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.snapshot().fmt(f)
    }
}

/// Recorded value as it appears in trace snapshots and on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum VarValue {
    Int { value: i64 },
    Bool { value: bool },
    None,
    Function { name: String, line: u32 },
    Builtin { name: String },
}

impl VarValue {
    pub fn int(value: i64) -> Self {
        VarValue::Int { value }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            VarValue::Int { value } => Some(*value),
            _ => None,
        }
    }
}

impl fmt::Display for VarValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarValue::Int { value } => write!(f, "{value}"),
            VarValue::Bool { value: true } => f.write_str("True"),
            VarValue::Bool { value: false } => f.write_str("False"),
            VarValue::None => f.write_str("None"),
            VarValue::Function { name, .. } => write!(f, "<function {name}>"),
            VarValue::Builtin { name } => write!(f, "<built-in function {name}>"),
        }
    }
}
