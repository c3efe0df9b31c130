//! Machine-checkable records of the identities and bounds a construction
//! verified with exact arithmetic.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;

use num_traits::Zero;

use crate::matrix::Matrix;
use crate::rational::Q;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Relation {
    Le,
    Lt,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Lt => "<",
            Relation::Eq => "==",
            Relation::Ge => ">=",
        }
    }

    pub fn holds(self, value: &Q, bound: &Q) -> bool {
        match self {
            Relation::Le => value <= bound,
            Relation::Lt => value < bound,
            Relation::Eq => value == bound,
            Relation::Ge => value >= bound,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckKind {
    /// `value relation bound`.
    Bound { value: Q, relation: Relation, bound: Q },
    /// A matrix identity; `residual` is the largest absolute entry of the
    /// difference, so the identity holds exactly when it is zero.
    Identity { residual: Q },
    /// A reported constant that is not compared against anything.
    Info { value: Q },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub label: String,
    pub kind: CheckKind,
    pub holds: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Certificate {
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn new() -> Self {
        Certificate::default()
    }

    pub fn bound(&mut self, label: impl Into<String>, value: Q, relation: Relation, bound: Q) -> bool {
        let holds = relation.holds(&value, &bound);
        self.checks.push(Check { label: label.into(), kind: CheckKind::Bound { value, relation, bound }, holds });
        holds
    }

    pub fn le(&mut self, label: impl Into<String>, value: Q, bound: Q) -> bool {
        self.bound(label, value, Relation::Le, bound)
    }

    pub fn equals(&mut self, label: impl Into<String>, value: Q, expected: Q) -> bool {
        self.bound(label, value, Relation::Eq, expected)
    }

    /// Records `lhs = rhs`; a shape mismatch is recorded as a failure.
    pub fn identity(&mut self, label: impl Into<String>, lhs: &Matrix, rhs: &Matrix) -> bool {
        let same_shape = lhs.rows() == rhs.rows() && lhs.cols() == rhs.cols();
        let residual = if same_shape { lhs.sub(rhs).max_abs() } else { Q::from_integer((-1).into()) };
        let holds = same_shape && residual.is_zero();
        self.checks.push(Check { label: label.into(), kind: CheckKind::Identity { residual }, holds });
        holds
    }

    pub fn info(&mut self, label: impl Into<String>, value: Q) {
        self.checks.push(Check { label: label.into(), kind: CheckKind::Info { value }, holds: true });
    }

    pub fn flag(&mut self, label: impl Into<String>, holds: bool) -> bool {
        let value = if holds { Q::from_integer(1.into()) } else { Q::zero() };
        self.bound(label, value, Relation::Eq, Q::from_integer(1.into()))
    }

    /// Appends another certificate's checks under a label prefix.
    pub fn absorb(&mut self, prefix: &str, other: Certificate) {
        for mut c in other.checks {
            c.label = format!("{prefix}.{}", c.label);
            self.checks.push(c);
        }
    }

    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.holds)
    }

    pub fn get(&self, label: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.label == label)
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }
}
