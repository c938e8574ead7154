use std::borrow::Cow;
use std::fmt;
use std::sync::Arc;

use super::text;

/// A real number together with the decimal text it was read from.
///
/// The lexeme is only stored when it differs from the canonical printing of
/// the value, which keeps large graphs compact while still re-emitting the
/// exact source text.
#[derive(Clone, Debug)]
pub struct Real {
    value: f64,
    lexeme: Option<Box<str>>,
}

impl Real {
    pub fn new(value: f64) -> Self {
        Self {
            value,
            lexeme: None,
        }
    }

    pub fn with_lexeme(value: f64, lexeme: &str) -> Self {
        let lexeme = if format_real(value) == lexeme {
            None
        } else {
            Some(lexeme.into())
        };
        Self { value, lexeme }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn lexeme(&self) -> Cow<'_, str> {
        match &self.lexeme {
            Some(text) => Cow::Borrowed(text),
            None => Cow::Owned(format_real(self.value)),
        }
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.lexeme() == other.lexeme()
    }
}

/// Canonical SPF printing of a double: shortest round-trip digits, always a
/// decimal point, upper-case exponent (`2.`, `0.5`, `1.E-05` style without
/// padding: `1.E-5`).
pub fn format_real(value: f64) -> String {
    if !value.is_finite() {
        // Not representable in ISO 10303-21; emit something parseable.
        return "0.".to_string();
    }
    let repr = format!("{value:?}");
    match repr.split_once('e') {
        Some((mantissa, exponent)) => {
            let mantissa = if mantissa.contains('.') {
                mantissa.trim_end_matches('0').to_string()
            } else {
                format!("{mantissa}.")
            };
            format!("{mantissa}E{exponent}")
        }
        None => match repr.strip_suffix(".0") {
            Some(int) => format!("{int}."),
            None => repr,
        },
    }
}

/// String literal as written in the file (escaped form) plus its decoded text.
#[derive(Clone, Debug)]
pub struct SpfText {
    raw: Box<str>,
    decoded: Option<Box<str>>,
}

impl SpfText {
    /// Builds a literal from already-escaped text. Unknown escapes are kept
    /// verbatim in the decoded form and returned for diagnostics.
    pub fn from_raw(raw: &str) -> (Self, Vec<String>) {
        if !raw.contains(['\\', '\'']) {
            let text = Self {
                raw: raw.into(),
                decoded: None,
            };
            return (text, Vec::new());
        }
        let (decoded, unknown) = text::decode(raw);
        let decoded = if decoded == raw {
            None
        } else {
            Some(decoded.into())
        };
        (
            Self {
                raw: raw.into(),
                decoded,
            },
            unknown,
        )
    }

    pub fn from_logical(value: &str) -> Self {
        let raw = text::encode(value);
        let decoded = if raw == value {
            None
        } else {
            Some(value.into())
        };
        Self {
            raw: raw.into(),
            decoded,
        }
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn decoded(&self) -> &str {
        self.decoded.as_deref().unwrap_or(&self.raw)
    }
}

impl PartialEq for SpfText {
    fn eq(&self, other: &Self) -> bool {
        self.raw == other.raw
    }
}

/// `NAME(value)` parameter, used for SELECT-typed attributes.
#[derive(Clone, Debug, PartialEq)]
pub struct TypedValue {
    pub type_name: Arc<str>,
    pub value: AttributeValue,
}

/// One parameter of an entity instance.
#[derive(Clone, Debug, PartialEq)]
pub enum AttributeValue {
    Integer(i64),
    Real(Real),
    Text(Box<SpfText>),
    /// Enumeration or logical token without the surrounding dots.
    Enum(Box<str>),
    Reference(u64),
    List(Vec<AttributeValue>),
    Typed(Box<TypedValue>),
    /// `$`
    Unset,
    /// `*`
    Derived,
    /// Hex digits of a binary literal, without the quotes.
    Binary(Box<str>),
}

impl AttributeValue {
    pub fn real(value: f64) -> Self {
        Self::Real(Real::new(value))
    }

    pub fn text(value: &str) -> Self {
        Self::Text(Box::new(SpfText::from_logical(value)))
    }

    pub fn enumeration(token: &str) -> Self {
        Self::Enum(token.into())
    }

    pub fn boolean(value: bool) -> Self {
        Self::enumeration(if value { "T" } else { "F" })
    }

    pub fn typed(type_name: &str, value: AttributeValue) -> Self {
        Self::Typed(Box::new(TypedValue {
            type_name: Arc::from(type_name),
            value,
        }))
    }

    pub fn reals(values: &[f64]) -> Self {
        Self::List(values.iter().map(|&v| Self::real(v)).collect())
    }

    pub fn refs(ids: &[u64]) -> Self {
        Self::List(ids.iter().map(|&id| Self::Reference(id)).collect())
    }

    pub fn is_unset(&self) -> bool {
        matches!(self, Self::Unset)
    }

    pub fn as_reference(&self) -> Option<u64> {
        match self {
            Self::Reference(id) => Some(*id),
            _ => None,
        }
    }

    /// Numeric value of an integer, real or typed number.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Self::Integer(v) => Some(*v as f64),
            Self::Real(r) => Some(r.value()),
            Self::Typed(t) => t.value.as_f64(),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Self::Integer(v) => Some(*v),
            Self::Typed(t) => t.value.as_i64(),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Self::Text(t) => Some(t.decoded()),
            Self::Typed(t) => t.value.as_text(),
            _ => None,
        }
    }

    pub fn as_enum(&self) -> Option<&str> {
        match self {
            Self::Enum(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[AttributeValue]> {
        match self {
            Self::List(items) => Some(items),
            _ => None,
        }
    }

    pub fn as_typed(&self) -> Option<&TypedValue> {
        match self {
            Self::Typed(t) => Some(t),
            _ => None,
        }
    }

    /// Calls `f` for every instance reference in this value, depth first.
    pub fn for_each_reference(&self, f: &mut impl FnMut(u64)) {
        match self {
            Self::Reference(id) => f(*id),
            Self::List(items) => items.iter().for_each(|v| v.for_each_reference(f)),
            Self::Typed(t) => t.value.for_each_reference(f),
            _ => {}
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Integer(v) => write!(f, "{v}"),
            Self::Real(r) => f.write_str(&r.lexeme()),
            Self::Text(t) => write!(f, "'{}'", t.raw()),
            Self::Enum(e) => write!(f, ".{e}."),
            Self::Reference(id) => write!(f, "#{id}"),
            Self::List(items) => {
                f.write_str("(")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str(")")
            }
            Self::Typed(t) => write!(f, "{}({})", t.type_name, t.value),
            Self::Unset => f.write_str("$"),
            Self::Derived => f.write_str("*"),
            Self::Binary(b) => write!(f, "\"{b}\""),
        }
    }
}
