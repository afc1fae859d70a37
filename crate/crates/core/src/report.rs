//! The common JSON shape of lemma checks and certificates:
//! `{claim, hypothesis_gate: {checked, passed, values}, conclusion: {passed, witnesses}, numbers}`.
//!
//! A check whose hypothesis fails has `conclusion.passed = null`: it is
//! vacuous, not evidence either way.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

use crate::rational::{self, Rational};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub checked: bool,
    pub passed: bool,
    pub values: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Conclusion {
    pub passed: Option<bool>,
    pub witnesses: Vec<Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    HypothesisNotMet,
    Passed,
    Violated,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub claim: String,
    pub hypothesis_gate: Gate,
    pub conclusion: Conclusion,
    pub numbers: BTreeMap<String, Value>,
}

impl Report {
    /// A report with no hypothesis to check.
    pub fn new(claim: impl Into<String>) -> Self {
        Report {
            claim: claim.into(),
            hypothesis_gate: Gate { checked: false, passed: true, values: BTreeMap::new() },
            conclusion: Conclusion::default(),
            numbers: BTreeMap::new(),
        }
    }

    pub fn gate_value(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.hypothesis_gate.checked = true;
        self.hypothesis_gate.values.insert(key.to_string(), value.into());
        self
    }

    pub fn set_gate(&mut self, passed: bool) -> &mut Self {
        self.hypothesis_gate.checked = true;
        self.hypothesis_gate.passed = passed;
        self
    }

    pub fn number(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.numbers.insert(key.to_string(), value.into());
        self
    }

    pub fn witness(&mut self, value: impl Into<Value>) -> &mut Self {
        self.conclusion.witnesses.push(value.into());
        self
    }

    /// Records the conclusion; ignored (left `null`) when the gate failed.
    pub fn conclude(&mut self, passed: bool) -> &mut Self {
        if self.hypothesis_gate.passed {
            self.conclusion.passed = Some(passed);
        }
        self
    }

    pub fn status(&self) -> Status {
        match self.conclusion.passed {
            None => Status::HypothesisNotMet,
            Some(true) => Status::Passed,
            Some(false) => Status::Violated,
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

/// Exact rational as a JSON value.
pub fn rat(r: &Rational) -> Value {
    rational::to_json(r)
}
