//! Dewey codes: dotted root-to-node paths used to encode tree positions.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// A node position in an ordered tree, written `1.2.3`.
///
/// Components are 1-based child positions. The derived ordering compares
/// component lists lexicographically, which coincides with document
/// pre-order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeweyCode(Vec<u32>);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DeweyError {
    #[error("empty dewey code")]
    Empty,
    #[error("invalid dewey component `{0}`: components are positive integers")]
    BadComponent(String),
}

impl DeweyCode {
    pub fn new(components: Vec<u32>) -> Result<Self, DeweyError> {
        if components.is_empty() {
            return Err(DeweyError::Empty);
        }
        if components.contains(&0) {
            return Err(DeweyError::BadComponent("0".into()));
        }
        Ok(Self(components))
    }

    pub fn root() -> Self {
        Self(vec![1])
    }

    pub fn components(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    /// The code of the `k`-th child (1-based).
    pub fn child(&self, k: u32) -> Self {
        assert!(k >= 1, "dewey child positions start at 1");
        let mut components = self.0.clone();
        components.push(k);
        Self(components)
    }

    pub fn parent(&self) -> Option<Self> {
        if self.0.len() <= 1 {
            None
        } else {
            Some(Self(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    /// `other` is exactly one level below `self` on the same path.
    pub fn is_parent_of(&self, other: &Self) -> bool {
        other.0.len() == self.0.len() + 1 && other.0.starts_with(&self.0)
    }

    /// Strict prefix test.
    pub fn is_ancestor_of(&self, other: &Self) -> bool {
        other.0.len() > self.0.len() && other.0.starts_with(&self.0)
    }

    /// Same parent, different last component. A node is not its own sibling.
    pub fn is_sibling_of(&self, other: &Self) -> bool {
        let n = self.0.len();
        n >= 2 && other.0.len() == n && self.0[..n - 1] == other.0[..n - 1] && self.0[n - 1] != other.0[n - 1]
    }
}

impl fmt::Display for DeweyCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for DeweyCode {
    type Err = DeweyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(DeweyError::Empty);
        }
        let components = s
            .split('.')
            .map(|part| match part.parse::<u32>() {
                Ok(v) if v >= 1 && !part.starts_with('+') => Ok(v),
                _ => Err(DeweyError::BadComponent(part.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self(components))
    }
}
