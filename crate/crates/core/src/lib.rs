//! Exact discretisation numbers and metric approximate subgroups in finite
//! metric groups, with numerical neighbourhood ladders for matrix Lie groups.

pub mod approx;
pub mod discretisation;
pub mod error;
pub mod group;
pub mod io;
pub mod lie;
pub mod rational;
pub mod report;
pub mod suites;
pub mod zoo;

pub use error::{Error, Result};
pub use group::{ElementSet, FiniteMetricGroup, GroupTables, SetTerm};
pub use rational::Rational;
