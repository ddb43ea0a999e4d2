use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Canonical, Coeffect, CoeffectCtx};
use crate::lang::{LangError, Type};

/// Stable error codes shared by both checkers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ErrorCode {
    #[serde(rename = "E_UNBOUND")]
    Unbound,
    #[serde(rename = "E_LOOKUP")]
    Lookup,
    #[serde(rename = "E_TYPE")]
    Type,
    #[serde(rename = "E_ARITY")]
    Arity,
    #[serde(rename = "E_COHERENCE")]
    Coherence,
    #[serde(rename = "E_RECURSION")]
    Recursion,
    #[serde(rename = "E_MEMORY")]
    Memory,
    #[serde(rename = "E_READ_ASSIGN")]
    ReadAssign,
    #[serde(rename = "E_LINEAR")]
    Linear,
    #[serde(rename = "E_PROMOTE")]
    Promote,
    #[serde(rename = "E_SUBTYPE")]
    Subtype,
    #[serde(rename = "E_COMBINE")]
    Combine,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Unbound => "E_UNBOUND",
            ErrorCode::Lookup => "E_LOOKUP",
            ErrorCode::Type => "E_TYPE",
            ErrorCode::Arity => "E_ARITY",
            ErrorCode::Coherence => "E_COHERENCE",
            ErrorCode::Recursion => "E_RECURSION",
            ErrorCode::Memory => "E_MEMORY",
            ErrorCode::ReadAssign => "E_READ_ASSIGN",
            ErrorCode::Linear => "E_LINEAR",
            ErrorCode::Promote => "E_PROMOTE",
            ErrorCode::Subtype => "E_SUBTYPE",
            ErrorCode::Combine => "E_COMBINE",
        }
    }
}

impl fmt::Display for ErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{code}: {msg}")]
pub struct CheckError {
    pub code: ErrorCode,
    pub msg: String,
}

impl CheckError {
    pub fn new(code: ErrorCode, msg: impl Into<String>) -> Self {
        CheckError {
            code,
            msg: msg.into(),
        }
    }
}

impl From<LangError> for CheckError {
    fn from(e: LangError) -> Self {
        CheckError::new(ErrorCode::Lookup, e.msg)
    }
}

/// A type-and-coeffect context: each variable has a type and a coeffect.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TypeCtx {
    types: BTreeMap<String, Type>,
    coeffs: CoeffectCtx,
}

impl TypeCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(x: impl Into<String>, t: Type, c: Coeffect) -> Self {
        let mut g = TypeCtx::new();
        g.insert(x, t, c);
        g
    }

    pub fn insert(&mut self, x: impl Into<String>, t: Type, c: Coeffect) {
        let x = x.into();
        self.types.insert(x.clone(), t);
        self.coeffs.insert(x, c);
    }

    pub fn remove(&mut self, x: &str) -> Option<(Type, Coeffect)> {
        let t = self.types.remove(x)?;
        let c = self.coeffs.remove(x).unwrap_or_default();
        Some((t, c))
    }

    pub fn contains(&self, x: &str) -> bool {
        self.types.contains_key(x)
    }

    pub fn ty(&self, x: &str) -> Option<&Type> {
        self.types.get(x)
    }

    pub fn set_type(&mut self, x: &str, t: Type) {
        if let Some(slot) = self.types.get_mut(x) {
            *slot = t;
        }
    }

    /// Coeffect of `x`, `∅` if absent.
    pub fn coeff(&self, x: &str) -> Coeffect {
        self.coeffs.coeff(x)
    }

    pub fn coeffs(&self) -> &CoeffectCtx {
        &self.coeffs
    }

    pub fn vars(&self) -> impl Iterator<Item = &String> {
        self.types.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Type, Coeffect)> {
        self.types.iter().map(|(x, t)| (x, t, self.coeffs.coeff(x)))
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    /// `Γ + Δ`. On variables present in both, the left type is kept.
    pub fn sum(&self, other: &TypeCtx) -> TypeCtx {
        let mut types = self.types.clone();
        for (x, t) in &other.types {
            types.entry(x.clone()).or_insert_with(|| t.clone());
        }
        TypeCtx {
            types,
            coeffs: self.coeffs.sum(&other.coeffs),
        }
    }

    /// `X × Γ`.
    pub fn scale(&self, x: &Coeffect) -> TypeCtx {
        TypeCtx {
            types: self.types.clone(),
            coeffs: self.coeffs.scale(x),
        }
    }

    pub fn restrict<'a>(
        &self,
        vars: impl IntoIterator<Item = &'a String>,
        links: &Coeffect,
    ) -> TypeCtx {
        let vars: Vec<&String> = vars
            .into_iter()
            .filter(|v| self.types.contains_key(*v))
            .collect();
        let coeffs = self.coeffs.restrict(vars.iter().copied(), links);
        let types = vars
            .iter()
            .map(|v| ((*v).clone(), self.types[*v].clone()))
            .collect();
        TypeCtx { types, coeffs }
    }

    pub fn links(&self) -> Coeffect {
        self.coeffs.links()
    }

    pub fn is_closed(&self) -> bool {
        self.coeffs.is_closed()
    }

    pub fn canonical(&self) -> Canonical {
        self.coeffs.canonical()
    }

    pub fn erase(&self) -> TypeCtx {
        TypeCtx {
            types: self
                .types
                .iter()
                .map(|(x, t)| (x.clone(), t.erase()))
                .collect(),
            coeffs: self.coeffs.clone(),
        }
    }
}

impl fmt::Display for TypeCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .iter()
            .map(|(x, t, c)| format!("{x}:{t}^{c}"))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}
