//! Check reports shared by the validators.

use serde::Serialize;

use crate::field::Field;

/// Relative tolerance for identities on the numeric backend.
pub const NUMERIC_IDENTITY_TOL: f64 = 1e-25;

/// One failed check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Finding {
    pub check: String,
    pub location: String,
    pub detail: String,
}

/// Outcome of a validator: failures plus informational notes.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub failures: Vec<Finding>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn fail(&mut self, check: &str, location: impl Into<String>, detail: impl Into<String>) {
        self.failures.push(Finding { check: check.into(), location: location.into(), detail: detail.into() });
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn merge(&mut self, o: Report) {
        self.failures.extend(o.failures);
        self.notes.extend(o.notes);
    }
}

/// Zero test: exact on exact fields, relative to `scale` otherwise.
pub fn is_small<F: Field>(v: &F, scale: f64) -> bool {
    v.is_negligible(scale.max(1.0), NUMERIC_IDENTITY_TOL)
}

/// Equality of scalars under the same rule.
pub fn same_point<F: Field>(a: &F, b: &F) -> bool {
    is_small(&(a.clone() - b), a.magnitude().max(b.magnitude()))
}

