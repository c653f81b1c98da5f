//! Attribute values and their type tags.
//!
//! Every device attribute holds an [`AttrValue`]: a scalar (boolean,
//! integer, real, string, null) or a list of scalars. The declared
//! [`TypeTag`] of an attribute is stable; `null` inhabits every type so
//! that e.g. a string attribute can be cleared without changing its tag.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Declared kind of an attribute or parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TypeTag {
    Boolean,
    Integer,
    Real,
    String,
    List,
}

impl fmt::Display for TypeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TypeTag::Boolean => "boolean",
            TypeTag::Integer => "integer",
            TypeTag::Real => "real",
            TypeTag::String => "string",
            TypeTag::List => "list",
        };
        f.write_str(s)
    }
}

/// A runtime attribute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Text(String),
    List(Vec<AttrValue>),
}

impl AttrValue {
    pub fn text(s: impl Into<String>) -> Self {
        AttrValue::Text(s.into())
    }

    pub fn list_of_texts<I: IntoIterator<Item = S>, S: Into<String>>(items: I) -> Self {
        AttrValue::List(items.into_iter().map(|s| AttrValue::Text(s.into())).collect())
    }

    /// Runtime kind, if the value is not null.
    pub fn kind(&self) -> Option<TypeTag> {
        match self {
            AttrValue::Null => None,
            AttrValue::Bool(_) => Some(TypeTag::Boolean),
            AttrValue::Int(_) => Some(TypeTag::Integer),
            AttrValue::Real(_) => Some(TypeTag::Real),
            AttrValue::Text(_) => Some(TypeTag::String),
            AttrValue::List(_) => Some(TypeTag::List),
        }
    }

    /// Whether this value is legal for an attribute declared with `tag`.
    ///
    /// Null matches every tag. List elements must themselves be scalars.
    pub fn matches(&self, tag: TypeTag) -> bool {
        match self {
            AttrValue::Null => true,
            AttrValue::List(items) => {
                tag == TypeTag::List && items.iter().all(|v| !matches!(v, AttrValue::List(_)))
            }
            other => other.kind() == Some(tag),
        }
    }

    /// Numeric view used for trend classification and range checks.
    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttrValue::Int(i) => Some(*i as f64),
            AttrValue::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn is_null(&self) -> bool {
        matches!(self, AttrValue::Null)
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            AttrValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            AttrValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Coerce toward a declared tag where the conversion is lossless:
    /// an integer literal supplied for a real-typed slot becomes a real.
    pub fn coerced_to(self, tag: TypeTag) -> AttrValue {
        match (&self, tag) {
            (AttrValue::Int(i), TypeTag::Real) => AttrValue::Real(*i as f64),
            _ => self,
        }
    }

    /// Canonical single-line rendering (JSON literal syntax).
    pub fn render(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("value serialization cannot fail")
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            AttrValue::Null => serde_json::Value::Null,
            AttrValue::Bool(b) => serde_json::Value::Bool(*b),
            AttrValue::Int(i) => serde_json::Value::Number((*i).into()),
            AttrValue::Real(r) => serde_json::Number::from_f64(*r)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
            AttrValue::Text(s) => serde_json::Value::String(s.clone()),
            AttrValue::List(items) => {
                serde_json::Value::Array(items.iter().map(AttrValue::to_json).collect())
            }
        }
    }

    /// Interpret a JSON value as an attribute value for a slot declared
    /// with `tag`. Integer literals widen for real-tagged slots.
    pub fn from_json(value: &serde_json::Value, tag: TypeTag) -> Option<AttrValue> {
        let parsed = Self::from_json_untyped(value)?;
        let coerced = parsed.coerced_to(tag);
        if coerced.matches(tag) {
            Some(coerced)
        } else {
            None
        }
    }

    /// Interpret a JSON value without a declared tag. Whole numbers parse
    /// as integers; anything with a fractional part parses as a real.
    pub fn from_json_untyped(value: &serde_json::Value) -> Option<AttrValue> {
        match value {
            serde_json::Value::Null => Some(AttrValue::Null),
            serde_json::Value::Bool(b) => Some(AttrValue::Bool(*b)),
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Some(AttrValue::Int(i))
                } else {
                    n.as_f64().map(AttrValue::Real)
                }
            }
            serde_json::Value::String(s) => Some(AttrValue::Text(s.clone())),
            serde_json::Value::Array(items) => {
                let parsed: Option<Vec<AttrValue>> =
                    items.iter().map(Self::from_json_untyped).collect();
                let parsed = parsed?;
                if parsed.iter().any(|v| matches!(v, AttrValue::List(_))) {
                    return None;
                }
                Some(AttrValue::List(parsed))
            }
            serde_json::Value::Object(_) => None,
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl From<bool> for AttrValue {
    fn from(b: bool) -> Self {
        AttrValue::Bool(b)
    }
}

impl From<i64> for AttrValue {
    fn from(i: i64) -> Self {
        AttrValue::Int(i)
    }
}

impl From<f64> for AttrValue {
    fn from(r: f64) -> Self {
        AttrValue::Real(r)
    }
}

impl From<&str> for AttrValue {
    fn from(s: &str) -> Self {
        AttrValue::Text(s.to_string())
    }
}

impl From<String> for AttrValue {
    fn from(s: String) -> Self {
        AttrValue::Text(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_matches_every_tag() {
        for tag in [
            TypeTag::Boolean,
            TypeTag::Integer,
            TypeTag::Real,
            TypeTag::String,
            TypeTag::List,
        ] {
            assert!(AttrValue::Null.matches(tag));
        }
    }

    #[test]
    fn kind_matches_tag() {
        assert!(AttrValue::Bool(true).matches(TypeTag::Boolean));
        assert!(!AttrValue::Text("true".into()).matches(TypeTag::Boolean));
        assert!(AttrValue::Int(5).matches(TypeTag::Integer));
        assert!(!AttrValue::Int(5).matches(TypeTag::Real));
    }

    #[test]
    fn int_widens_to_real() {
        let v = AttrValue::Int(20).coerced_to(TypeTag::Real);
        assert_eq!(v, AttrValue::Real(20.0));
    }

    #[test]
    fn nested_lists_rejected() {
        let nested = AttrValue::List(vec![AttrValue::List(vec![])]);
        assert!(!nested.matches(TypeTag::List));
    }

    #[test]
    fn render_is_json_literal() {
        assert_eq!(AttrValue::Null.render(), "null");
        assert_eq!(AttrValue::Int(80).render(), "80");
        assert_eq!(AttrValue::Real(20.0).render(), "20.0");
        assert_eq!(AttrValue::text("driver's seat").render(), "\"driver's seat\"");
    }
}
