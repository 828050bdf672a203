//! Atomic attribute values.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use thiserror::Error;

use crate::dewey::DeweyCode;

/// An exact decimal, stored as a reduced rational.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Decimal(Rational64);

impl Decimal {
    pub fn from_ratio(numer: i64, denom: i64) -> Option<Self> {
        if denom == 0 {
            None
        } else {
            Some(Self(Rational64::new(numer, denom)))
        }
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid decimal literal `{0}`")]
pub struct DecimalError(pub String);

impl FromStr for Decimal {
    type Err = DecimalError;

    /// Accepts `12`, `-3.25` and `7/4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || DecimalError(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| err())?;
            let d: i64 = d.trim().parse().map_err(|_| err())?;
            return Self::from_ratio(n, d).ok_or_else(err);
        }
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
        if int_part.is_empty() || !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        if !frac_part.bytes().all(|b| b.is_ascii_digit()) || frac_part.len() > 18 {
            return Err(err());
        }
        let digits = format!("{int_part}{frac_part}");
        let mut numer: i64 = digits.parse().map_err(|_| err())?;
        if negative {
            numer = -numer;
        }
        let denom = 10i64.checked_pow(frac_part.len() as u32).ok_or_else(err)?;
        Self::from_ratio(numer, denom).ok_or_else(err)
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (n, d) = (self.numer(), self.denom());
        if d == 1 {
            return write!(f, "{n}.0");
        }
        // Terminating decimals print positionally, everything else as n/d.
        let mut rest = d;
        let mut places = 0u32;
        for p in [2i64, 5] {
            while rest % p == 0 {
                rest /= p;
            }
        }
        if rest == 1 {
            let mut scale = Some(1i64);
            while let Some(s) = scale.filter(|s| s % d != 0) {
                scale = s.checked_mul(10);
                places += 1;
            }
            if let Some(scaled) = scale.and_then(|s| n.checked_mul(s / d)) {
                let sign = if scaled < 0 { "-" } else { "" };
                let abs = scaled.unsigned_abs();
                let unit = 10u64.pow(places);
                return write!(f, "{sign}{}.{:0width$}", abs / unit, abs % unit, width = places as usize);
            }
        }
        write!(f, "{n}/{d}")
    }
}

/// An atomic value stored in an element payload or written as a query constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i64),
    Text(String),
    Bool(bool),
    Decimal(Decimal),
    Dewey(DeweyCode),
}

#[derive(Debug, Error, PartialEq, Eq, Clone)]
#[error("cannot compare {lhs} value with {rhs} value")]
pub struct KindMismatch {
    pub lhs: &'static str,
    pub rhs: &'static str,
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "int",
            Value::Text(_) => "text",
            Value::Bool(_) => "bool",
            Value::Decimal(_) => "decimal",
            Value::Dewey(_) => "dewey",
        }
    }

    /// Orders two values of the same kind. Mixed kinds are an error, even
    /// int against decimal.
    pub fn compare(&self, other: &Value) -> Result<Ordering, KindMismatch> {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => Ok(a.cmp(b)),
            (Value::Text(a), Value::Text(b)) => Ok(a.cmp(b)),
            (Value::Bool(a), Value::Bool(b)) => Ok(a.cmp(b)),
            (Value::Decimal(a), Value::Decimal(b)) => Ok(a.cmp(b)),
            (Value::Dewey(a), Value::Dewey(b)) => Ok(a.cmp(b)),
            _ => Err(KindMismatch {
                lhs: self.kind_name(),
                rhs: other.kind_name(),
            }),
        }
    }

    pub fn as_dewey(&self) -> Option<&DeweyCode> {
        match self {
            Value::Dewey(d) => Some(d),
            _ => None,
        }
    }

    /// Infers a typed value from a bare text cell: int, then decimal, then
    /// bool, otherwise text.
    pub fn infer(cell: &str) -> Value {
        if let Ok(i) = cell.parse::<i64>() {
            return Value::Int(i);
        }
        if cell.contains('.') {
            if let Ok(d) = cell.parse::<Decimal>() {
                return Value::Decimal(d);
            }
        }
        match cell {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => Value::Text(cell.to_string()),
        }
    }
}

impl fmt::Display for Value {
    /// Query-literal syntax: text is quoted, dewey codes use `dewey"1.2"`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Text(s) => {
                f.write_str("\"")?;
                for ch in s.chars() {
                    match ch {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        _ => write!(f, "{ch}")?,
                    }
                }
                f.write_str("\"")
            }
            Value::Bool(b) => write!(f, "{b}"),
            Value::Decimal(d) => {
                let s = d.to_string();
                if s.contains('/') {
                    write!(f, "decimal\"{s}\"")
                } else {
                    f.write_str(&s)
                }
            }
            Value::Dewey(d) => write!(f, "dewey\"{d}\""),
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<DeweyCode> for Value {
    fn from(v: DeweyCode) -> Self {
        Value::Dewey(v)
    }
}
