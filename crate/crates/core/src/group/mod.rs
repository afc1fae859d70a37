//! Finite groups carrying an exact left-invariant metric, and the set algebra
//! built on top of them.
//!
//! Distances are interned: the group keeps the sorted list of distinct
//! distance values and every pair of elements maps to an index into it. Balls
//! and thickenings therefore reduce to integer comparisons against a rank
//! threshold, while every value stays an exact rational.

mod lipschitz;
mod set;
mod term;
mod validate;

pub use lipschitz::{lipschitz_constant, Lipschitz};
pub use set::ElementSet;
pub use term::{env, Env, SetTerm};
pub use validate::{validate_group, Axiom, ValidationReport, Violation};

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest order accepted by the exact machinery.
pub const MAX_ORDER: usize = 4096;

/// Element label used by the zoo constructors (e.g. `[3]` in a cyclic group,
/// a one-line permutation in a symmetric group).
pub type Label = Vec<i64>;

/// Raw tables as read from disk or produced by a constructor, before validation.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupTables {
    pub order: usize,
    pub identity: usize,
    /// Row-major products: `mult[a * order + b] = a * b`.
    pub mult: Vec<u32>,
    /// Sorted distinct distance values.
    pub dist_values: Vec<Rational>,
    /// Row-major indices into `dist_values`.
    pub dist_index: Vec<u32>,
    pub labels: Option<Vec<Label>>,
}

impl GroupTables {
    /// Builds tables from a row-major distance matrix, interning its values.
    pub fn new(order: usize, identity: usize, mult: Vec<u32>, dist: &[Rational]) -> Self {
        let mut values: Vec<Rational> = dist.to_vec();
        values.sort();
        values.dedup();
        let lookup: HashMap<&Rational, u32> =
            values.iter().enumerate().map(|(i, v)| (v, i as u32)).collect();
        let dist_index = dist.iter().map(|v| lookup[v]).collect();
        GroupTables {
            order,
            identity,
            mult,
            dist_values: values,
            dist_index,
            labels: None,
        }
    }

    /// Tables of a group whose metric is `d(x, y) = norm(x^-1 y)`.
    pub fn from_norm(order: usize, mult: Vec<u32>, inv: &[u32], norm: &[Rational]) -> Self {
        let mut values: Vec<Rational> = norm.to_vec();
        values.sort();
        values.dedup();
        let lookup: HashMap<&Rational, u32> =
            values.iter().enumerate().map(|(i, v)| (v, i as u32)).collect();
        let norm_idx: Vec<u32> = norm.iter().map(|v| lookup[v]).collect();
        let mut dist_index = Vec::with_capacity(order * order);
        for x in 0..order {
            let xi = inv[x] as usize;
            for y in 0..order {
                dist_index.push(norm_idx[mult[xi * order + y] as usize]);
            }
        }
        GroupTables {
            order,
            identity: 0,
            mult,
            dist_values: values,
            dist_index,
            labels: None,
        }
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Self {
        self.labels = Some(labels);
        self
    }

    pub fn dist(&self, a: usize, b: usize) -> &Rational {
        &self.dist_values[self.dist_index[a * self.order + b] as usize]
    }

    /// Swaps element indices so that the identity sits at index 0.
    fn renormalized(self) -> Self {
        let e = self.identity;
        if e == 0 {
            return self;
        }
        let n = self.order;
        let p = |i: usize| -> usize {
            if i == 0 {
                e
            } else if i == e {
                0
            } else {
                i
            }
        };
        let mut mult = vec![0u32; n * n];
        let mut dist_index = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                mult[p(a) * n + p(b)] = p(self.mult[a * n + b] as usize) as u32;
                dist_index[p(a) * n + p(b)] = self.dist_index[a * n + b];
            }
        }
        let labels = self.labels.map(|mut l| {
            l.swap(0, e);
            l
        });
        GroupTables {
            order: n,
            identity: 0,
            mult,
            dist_values: self.dist_values,
            dist_index,
            labels,
        }
    }
}

/// A validated finite group with an exact left-invariant metric.
///
/// Index 0 is always the identity. Immutable after construction.
#[derive(Debug)]
pub struct FiniteMetricGroup {
    order: usize,
    mult: Vec<u32>,
    inv: Vec<u32>,
    /// `norm[g]` indexes `distances` with the value `d(1, g)`.
    norm: Vec<u32>,
    distances: Vec<Rational>,
    bi_invariant: bool,
    labels: Option<Vec<Label>>,
    meta: serde_json::Value,
}

impl PartialEq for FiniteMetricGroup {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order
            && self.mult == other.mult
            && self.norm == other.norm
            && self.distances == other.distances
    }
}

impl FiniteMetricGroup {
    /// Validates the tables and builds the group, moving the identity to index 0.
    pub fn new(tables: GroupTables) -> Result<Self> {
        let report = validate_group(&tables)?;
        if !report.is_valid() {
            return Err(Error::InvalidGroup(report.summary()));
        }
        let t = tables.renormalized();
        let n = t.order;
        let mut inv = vec![0u32; n];
        for x in 0..n {
            let row = &t.mult[x * n..(x + 1) * n];
            inv[x] = row.iter().position(|&v| v == 0).expect("validated inverse") as u32;
        }
        // Drop distance values that never occur as a norm (impossible for a
        // left-invariant metric, but keeps the value list minimal).
        let norm_raw: Vec<u32> = t.dist_index[..n].to_vec();
        let mut used: Vec<u32> = norm_raw.clone();
        used.sort_unstable();
        used.dedup();
        let remap: HashMap<u32, u32> = used.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        let distances = used.iter().map(|&v| t.dist_values[v as usize].clone()).collect();
        let norm = norm_raw.iter().map(|v| remap[v]).collect();
        Ok(FiniteMetricGroup {
            order: n,
            mult: t.mult,
            inv,
            norm,
            distances,
            bi_invariant: report.bi_invariant.unwrap_or(false),
            labels: t.labels,
            meta: serde_json::Value::Null,
        })
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = meta;
        self
    }

    pub fn into_shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.order + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    pub fn pow(&self, g: usize, k: i64) -> usize {
        let base = if k < 0 { self.inv(g) } else { g };
        let mut acc = 0;
        for _ in 0..k.unsigned_abs() {
            acc = self.mul(acc, base);
        }
        acc
    }

    /// `y^x = x^-1 y x`.
    pub fn conj(&self, y: usize, x: usize) -> usize {
        self.mul(self.mul(self.inv(x), y), x)
    }

    /// `[x, y] = x^-1 y^-1 x y`.
    pub fn commutator(&self, x: usize, y: usize) -> usize {
        let xy = self.mul(x, y);
        self.mul(self.mul(self.inv(x), self.inv(y)), xy)
    }

    /// Rank of `d(x, y)` in [`distances`](Self::distances).
    #[inline]
    pub fn dist_rank(&self, x: usize, y: usize) -> u32 {
        self.norm[self.mul(self.inv(x), y)]
    }

    #[inline]
    pub fn norm_rank(&self, g: usize) -> u32 {
        self.norm[g]
    }

    pub fn dist(&self, x: usize, y: usize) -> &Rational {
        &self.distances[self.dist_rank(x, y) as usize]
    }

    /// Sorted distinct distance values; `distances()[0] == 0`.
    pub fn distances(&self) -> &[Rational] {
        &self.distances
    }

    /// Number of distance values `<= r`: `d(x, y) <= r` iff `dist_rank(x, y) < ball_rank(r)`.
    pub fn ball_rank(&self, r: &Rational) -> u32 {
        self.distances.partition_point(|d| d <= r) as u32
    }

    pub fn diameter(&self) -> &Rational {
        self.distances.last().expect("nonempty")
    }

    pub fn is_bi_invariant(&self) -> bool {
        self.bi_invariant
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn label_of(&self, g: usize) -> Option<&Label> {
        self.labels.as_ref().map(|l| &l[g])
    }

    pub fn index_of(&self, label: &[i64]) -> Option<usize> {
        self.labels.as_ref()?.iter().position(|l| l.as_slice() == label)
    }

    pub fn meta(&self) -> &serde_json::Value {
        &self.meta
    }

    /// Full tables (identity at 0), suitable for persistence.
    pub fn tables(&self) -> GroupTables {
        let n = self.order;
        let mut dist_index = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                dist_index.push(self.dist_rank(x, y));
            }
        }
        GroupTables {
            order: n,
            identity: 0,
            mult: self.mult.clone(),
            dist_values: self.distances.clone(),
            dist_index,
            labels: self.labels.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn cyclic_tables(n: usize) -> GroupTables {
        let mult = (0..n * n).map(|i| ((i / n + i % n) % n) as u32).collect();
        let dist: Vec<Rational> = (0..n * n)
            .map(|i| {
                let diff = (i / n).abs_diff(i % n);
                int(diff.min(n - diff) as i64)
            })
            .collect();
        GroupTables::new(n, 0, mult, &dist)
    }

    #[test]
    fn z8_lee_is_valid_and_bi_invariant() {
        let report = validate_group(&cyclic_tables(8)).unwrap();
        assert!(report.is_valid(), "{}", report.summary());
        assert_eq!(report.bi_invariant, Some(true));
    }

    #[test]
    fn negative_distance_is_reported() {
        let t = cyclic_tables(8);
        let mut dist: Vec<Rational> = (0..64).map(|i| t.dist(i / 8, i % 8).clone()).collect();
        dist[1] = int(-1);
        let broken = GroupTables::new(8, 0, t.mult.clone(), &dist);
        let report = validate_group(&broken).unwrap();
        assert!(report.violates(Axiom::Nonnegative));
        assert!(report.summary().contains("nonnegative"));
        assert_eq!(report.bi_invariant, None);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let mut t = cyclic_tables(4);
        t.mult.pop();
        assert!(matches!(validate_group(&t), Err(Error::Structural(_))));
    }

    #[test]
    fn non_associative_table_is_caught() {
        // A Latin square with identity 0 that is not a group (order 5 loop).
        let rows: [[u32; 5]; 5] = [
            [0, 1, 2, 3, 4],
            [1, 0, 3, 4, 2],
            [2, 4, 0, 1, 3],
            [3, 2, 4, 0, 1],
            [4, 3, 1, 2, 0],
        ];
        let mult = rows.iter().flatten().copied().collect();
        let dist: Vec<Rational> = (0..25).map(|i| if i / 5 == i % 5 { int(0) } else { int(1) }).collect();
        let report = validate_group(&GroupTables::new(5, 0, mult, &dist)).unwrap();
        assert!(report.violates(Axiom::Associativity));
    }

    #[test]
    fn broken_triangle_has_witness() {
        let t = cyclic_tables(6);
        // Stretch the norm of 3 beyond 1 + 2 while staying symmetric and invariant.
        let dist: Vec<Rational> = (0..36)
            .map(|i| {
                let g = (6 + i % 6 - i / 6) % 6;
                if g == 3 { int(7) } else { t.dist(0, g).clone() }
            })
            .collect();
        let report = validate_group(&GroupTables::new(6, 0, t.mult.clone(), &dist)).unwrap();
        let v = report.violations.iter().find(|v| v.axiom == Axiom::Triangle).unwrap();
        let [x, y, z] = [v.witness[0], v.witness[1], v.witness[2]];
        let tables = GroupTables::new(6, 0, t.mult.clone(), &dist);
        assert!(tables.dist(x, z) > &(tables.dist(x, y) + tables.dist(y, z)));
    }

    #[test]
    fn identity_is_renormalized_to_zero() {
        // Z3 with the identity stored at index 2.
        let mult = vec![1, 2, 0, 2, 0, 1, 0, 1, 2];
        let dist: Vec<Rational> = (0..9).map(|i| if i / 3 == i % 3 { int(0) } else { ratio(1, 2) }).collect();
        let g = FiniteMetricGroup::new(GroupTables::new(3, 2, mult, &dist)).unwrap();
        for x in 0..3 {
            assert_eq!(g.mul(0, x), x);
            assert_eq!(g.mul(x, g.inv(x)), 0);
        }
        assert_eq!(g.dist(1, 2), &ratio(1, 2));
    }
}
