use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::lang::{ClassTable, Expr, Type};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Ref(String),
}

impl Value {
    pub fn to_expr(&self) -> Expr {
        match self {
            Value::Int(n) => Expr::Const(*n),
            Value::Ref(r) => Expr::Var(r.clone()),
        }
    }

    pub fn from_expr(e: &Expr) -> Option<Value> {
        match e {
            Expr::Const(n) => Some(Value::Int(*n)),
            Expr::Var(r) => Some(Value::Ref(r.clone())),
            _ => None,
        }
    }

    pub fn as_ref(&self) -> Option<&str> {
        match self {
            Value::Ref(r) => Some(r),
            Value::Int(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(n) => write!(f, "{n}"),
            Value::Ref(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Object {
    pub class: String,
    pub fields: Vec<Value>,
}

impl Object {
    pub fn new(class: impl Into<String>, fields: Vec<Value>) -> Self {
        Object {
            class: class.into(),
            fields,
        }
    }

    /// References stored in the fields, in field order.
    pub fn refs(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().filter_map(Value::as_ref)
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.fields.iter().map(Value::to_string).collect();
        write!(f, "{}({})", self.class, parts.join(","))
    }
}

/// A heap: references mapped to objects.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Memory(pub BTreeMap<String, Object>);

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, r: &str) -> Option<&Object> {
        self.0.get(r)
    }

    pub fn insert(&mut self, r: impl Into<String>, o: Object) {
        self.0.insert(r.into(), o);
    }

    pub fn contains(&self, r: &str) -> bool {
        self.0.contains_key(r)
    }

    pub fn refs(&self) -> impl Iterator<Item = &String> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Object)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Memory, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("memory serializes")
    }

    /// Check that every object matches its class and every reference
    /// resolves to an object of the declared field class.
    pub fn check(&self, table: &ClassTable) -> Result<(), String> {
        for (r, o) in &self.0 {
            let fields = table
                .fields(&o.class)
                .map_err(|e| format!("{r}: {}", e.msg))?;
            if fields.len() != o.fields.len() {
                return Err(format!(
                    "{r}: class `{}` has {} fields, object has {}",
                    o.class,
                    fields.len(),
                    o.fields.len()
                ));
            }
            for (fd, v) in fields.iter().zip(&o.fields) {
                match (&fd.ty, v) {
                    (Type::Int, Value::Int(_)) => {}
                    (Type::Class(c, _), Value::Ref(t)) => match self.0.get(t) {
                        None => return Err(format!("{r}.{}: dangling reference `{t}`", fd.name)),
                        Some(to) if to.class != *c => {
                            return Err(format!(
                                "{r}.{}: expected a `{c}`, found a `{}`",
                                fd.name, to.class
                            ))
                        }
                        Some(_) => {}
                    },
                    _ => {
                        return Err(format!(
                            "{r}.{}: value `{v}` does not fit type `{}`",
                            fd.name, fd.ty
                        ))
                    }
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(r, o)| format!("{r} -> {o}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}
