use std::fmt;
use std::str::FromStr;

use rust_decimal::Decimal;
use serde::{Serialize, Serializer};

/// A typed leaf value.
///
/// Decimals compare numerically (`2.50 == 2.5`) and are rendered without
/// exponent or trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Text(String),
    Integer(i64),
    Decimal(Decimal),
    Boolean(bool),
}

/// The four tags a [`Scalar`] can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalarKind {
    Text,
    Integer,
    Decimal,
    Boolean,
}

impl ScalarKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ScalarKind::Text => "text",
            ScalarKind::Integer => "integer",
            ScalarKind::Decimal => "decimal",
            ScalarKind::Boolean => "boolean",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "text" => Some(ScalarKind::Text),
            "integer" => Some(ScalarKind::Integer),
            "decimal" => Some(ScalarKind::Decimal),
            "boolean" => Some(ScalarKind::Boolean),
            _ => None,
        }
    }
}

impl fmt::Display for ScalarKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Scalar {
    pub fn text(s: impl Into<String>) -> Self {
        Scalar::Text(s.into())
    }

    pub fn kind(&self) -> ScalarKind {
        match self {
            Scalar::Text(_) => ScalarKind::Text,
            Scalar::Integer(_) => ScalarKind::Integer,
            Scalar::Decimal(_) => ScalarKind::Decimal,
            Scalar::Boolean(_) => ScalarKind::Boolean,
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Scalar::Integer(_) | Scalar::Decimal(_))
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            Scalar::Text(s) => Some(s),
            _ => None,
        }
    }

    /// Canonical lexical form, used by every serializer.
    pub fn canonical(&self) -> String {
        match self {
            Scalar::Text(s) => s.clone(),
            Scalar::Integer(i) => i.to_string(),
            Scalar::Decimal(d) => canonical_decimal(d),
            Scalar::Boolean(b) => b.to_string(),
        }
    }

    /// Parses the lexical form of a value of the given kind.
    pub fn parse_as(kind: ScalarKind, text: &str) -> Result<Scalar, String> {
        match kind {
            ScalarKind::Text => Ok(Scalar::Text(text.to_string())),
            ScalarKind::Integer => parse_integer(text).map(Scalar::Integer),
            ScalarKind::Decimal => parse_decimal(text).map(Scalar::Decimal),
            ScalarKind::Boolean => match text {
                "true" | "1" => Ok(Scalar::Boolean(true)),
                "false" | "0" => Ok(Scalar::Boolean(false)),
                _ => Err(format!("`{text}` is not a boolean")),
            },
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.canonical())
    }
}

impl From<&str> for Scalar {
    fn from(s: &str) -> Self {
        Scalar::Text(s.to_string())
    }
}

impl From<String> for Scalar {
    fn from(s: String) -> Self {
        Scalar::Text(s)
    }
}

impl From<i64> for Scalar {
    fn from(i: i64) -> Self {
        Scalar::Integer(i)
    }
}

impl From<i32> for Scalar {
    fn from(i: i32) -> Self {
        Scalar::Integer(i64::from(i))
    }
}

impl From<Decimal> for Scalar {
    fn from(d: Decimal) -> Self {
        Scalar::Decimal(d)
    }
}

impl From<bool> for Scalar {
    fn from(b: bool) -> Self {
        Scalar::Boolean(b)
    }
}

pub(crate) fn canonical_decimal(d: &Decimal) -> String {
    let n = d.normalize();
    if n.is_zero() {
        "0".to_string()
    } else {
        n.to_string()
    }
}

pub(crate) fn parse_integer(text: &str) -> Result<i64, String> {
    let t = text.strip_prefix('+').unwrap_or(text);
    if t.is_empty() || !t.trim_start_matches('-').bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!("`{text}` is not an integer"));
    }
    t.parse::<i64>().map_err(|e| format!("`{text}` is not an integer: {e}"))
}

/// Exact decimal parsing; accepts plain and scientific notation (`1e-05`).
pub(crate) fn parse_decimal(text: &str) -> Result<Decimal, String> {
    let t = text.strip_prefix('+').unwrap_or(text);
    let plain = !t.is_empty()
        && t.bytes()
            .all(|b| b.is_ascii_digit() || b == b'.' || b == b'-');
    if plain {
        if let Ok(d) = Decimal::from_str_exact(t) {
            return Ok(d);
        }
    } else if t.contains(['e', 'E']) && !t.contains(char::is_whitespace) {
        if let Ok(d) = Decimal::from_scientific(t) {
            return Ok(d);
        }
    }
    Err(format!("`{text}` is not a decimal number"))
}

impl FromStr for ScalarKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ScalarKind::from_tag(s).ok_or_else(|| format!("unknown scalar type `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_are_canonical() {
        let d = parse_decimal("300.500").unwrap();
        assert_eq!(Scalar::Decimal(d).canonical(), "300.5");
        assert_eq!(Scalar::Decimal(parse_decimal("1e-05").unwrap()).canonical(), "0.00001");
        assert_eq!(Scalar::Decimal(parse_decimal("-0.0").unwrap()).canonical(), "0");
        assert_eq!(Scalar::Decimal(parse_decimal("1E3").unwrap()).canonical(), "1000");
    }

    #[test]
    fn decimal_equality_is_numeric() {
        assert_eq!(
            Scalar::Decimal(parse_decimal("2.50").unwrap()),
            Scalar::Decimal(parse_decimal("2.5").unwrap())
        );
    }

    #[test]
    fn rejects_non_numbers() {
        assert!(parse_decimal("300 300").is_err());
        assert!(parse_decimal("").is_err());
        assert!(parse_decimal("abc").is_err());
        assert!(parse_integer("12.0").is_err());
        assert!(parse_integer("abc").is_err());
        assert_eq!(parse_integer("+42").unwrap(), 42);
    }
}
