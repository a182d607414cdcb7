use std::fmt;

use serde::Serialize;

use crate::graph::ElementId;

/// One broken invariant: which constraint, which elements, and a message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub constraint: String,
    pub elements: Vec<ElementId>,
    pub message: String,
}

/// Result of a validator. Validators never abort; they collect.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Report {
    violations: Vec<Violation>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        constraint: &str,
        elements: impl IntoIterator<Item = ElementId>,
        message: impl Into<String>,
    ) {
        self.violations.push(Violation {
            constraint: constraint.to_owned(),
            elements: elements.into_iter().collect(),
            message: message.into(),
        });
    }

    pub fn extend(&mut self, other: Report) {
        self.violations.extend(other.violations);
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }

    /// Whether some violation of the named constraint was reported.
    pub fn has(&self, constraint: &str) -> bool {
        self.violations.iter().any(|v| v.constraint == constraint)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}: {}", v.constraint, v.message)?;
        }
        Ok(())
    }
}
