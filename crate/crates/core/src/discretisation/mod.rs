//! Packing numbers `N_r(X)`, covering numbers `N^cov_r(X/Y)` and multi-scale
//! profiles.
//!
//! Both quantities are computed exactly by branch-and-bound under a node
//! budget. When the budget runs out the result is a certified interval
//! rather than a number; callers that need a value use
//! [`Discretisation::exact`], which turns an interval into
//! [`Error::BudgetExceeded`].

mod bits;
mod cover;
mod packing;
mod profile;

pub use cover::{covering_number, min_translate_cover};
pub use packing::{greedy_separated, packing_number};
pub use profile::{scale_profile, profile_csv, ProfileRow, ScaleLadder};

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::fmt;

use crate::error::{Error, Result};
use crate::group::ElementSet;

/// Default number of search nodes per solver call.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Node budget for one branch-and-bound run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget(pub u64);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

/// Exact value, or the certified range left when the budget ran out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Bound {
    Exact(usize),
    Interval { lower: usize, upper: usize },
}

impl Bound {
    pub fn lower(&self) -> usize {
        match *self {
            Bound::Exact(v) => v,
            Bound::Interval { lower, .. } => lower,
        }
    }

    pub fn upper(&self) -> usize {
        match *self {
            Bound::Exact(v) => v,
            Bound::Interval { upper, .. } => upper,
        }
    }

    pub fn value(&self) -> Option<usize> {
        match *self {
            Bound::Exact(v) => Some(v),
            Bound::Interval { .. } => None,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Exact(v) => write!(f, "{v}"),
            Bound::Interval { lower, upper } => write!(f, "{lower}..{upper}"),
        }
    }
}

/// Result of a packing or covering computation.
///
/// For packing the witness is the largest separated set found (size
/// `bound.lower()`); for covering it is the smallest set of centers found
/// (size `bound.upper()`).
#[derive(Clone, Debug)]
pub struct Discretisation {
    pub bound: Bound,
    pub witness: ElementSet,
    pub nodes: u64,
    pub budget: u64,
}

impl Discretisation {
    pub fn is_exact(&self) -> bool {
        matches!(self.bound, Bound::Exact(_))
    }

    pub fn value(&self) -> Option<usize> {
        self.bound.value()
    }

    pub fn exact(&self) -> Result<usize> {
        self.bound.value().ok_or(Error::BudgetExceeded {
            budget: self.budget,
            lower: self.bound.lower(),
            upper: self.bound.upper(),
        })
    }
}

impl Serialize for Discretisation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Discretisation", 5)?;
        st.serialize_field("exact", &self.is_exact())?;
        st.serialize_field("value", &self.bound.value())?;
        st.serialize_field("lower", &self.bound.lower())?;
        st.serialize_field("upper", &self.bound.upper())?;
        st.serialize_field("witness", &self.witness.to_vec())?;
        st.end()
    }
}
