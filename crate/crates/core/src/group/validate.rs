//! Full-table validation of group axioms and metric axioms.
//!
//! The scan is quadratic in the order for every check except associativity,
//! which uses Light's test against a generating set: if `(xy)g = x(yg)` holds
//! for every generator `g`, the set of such "good" elements is closed under
//! products and therefore covers the whole table.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use super::GroupTables;
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Orders above this are not scanned cubically when the quadratic shortcut is unavailable.
const CUBIC_SCAN_LIMIT: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Identity,
    Inverse,
    Associativity,
    Nonnegative,
    Separation,
    Symmetry,
    Triangle,
    LeftInvariance,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Axiom::Identity => "identity",
            Axiom::Inverse => "inverse",
            Axiom::Associativity => "associativity",
            Axiom::Nonnegative => "nonnegative",
            Axiom::Separation => "separation",
            Axiom::Symmetry => "symmetry",
            Axiom::Triangle => "triangle",
            Axiom::LeftInvariance => "left_invariance",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    /// Number of failing instances found (a lower bound when the scan stops early).
    pub count: usize,
    pub witness: Vec<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub order: usize,
    pub violations: Vec<Violation>,
    /// Set only when the table is a valid left-invariant metric group.
    pub bi_invariant: Option<bool>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }

    pub fn summary(&self) -> String {
        self.violations
            .iter()
            .map(|v| format!("{} violated at {:?}: {}", v.axiom, v.witness, v.detail))
            .collect::<Vec<_>>()
            .join("; ")
    }
}

struct Collector {
    violations: Vec<Violation>,
}

impl Collector {
    fn add(&mut self, axiom: Axiom, count: usize, witness: &[usize], detail: String) {
        self.violations.push(Violation { axiom, count, witness: witness.to_vec(), detail });
    }

    fn record(&mut self, axiom: Axiom, witness: &[usize], detail: impl FnOnce() -> String) {
        if let Some(v) = self.violations.iter_mut().find(|v| v.axiom == axiom) {
            v.count += 1;
        } else {
            self.violations.push(Violation {
                axiom,
                count: 1,
                witness: witness.to_vec(),
                detail: detail(),
            });
        }
    }
}

/// Checks dimensions and index ranges; anything failing here gets no report.
pub(crate) fn check_structure(t: &GroupTables) -> Result<()> {
    let n = t.order;
    if n == 0 {
        return Err(Error::Structural("group order must be positive".into()));
    }
    if n > super::MAX_ORDER {
        return Err(Error::OrderTooLarge(n));
    }
    if t.mult.len() != n * n {
        return Err(Error::Structural(format!(
            "multiplication table has {} entries, expected {}",
            t.mult.len(),
            n * n
        )));
    }
    if t.dist_index.len() != n * n {
        return Err(Error::Structural(format!(
            "distance matrix has {} entries, expected {}",
            t.dist_index.len(),
            n * n
        )));
    }
    if t.identity >= n {
        return Err(Error::Structural(format!("identity index {} out of range", t.identity)));
    }
    if let Some(bad) = t.mult.iter().position(|&v| v as usize >= n) {
        return Err(Error::Structural(format!(
            "product ({}, {}) = {} is out of range",
            bad / n,
            bad % n,
            t.mult[bad]
        )));
    }
    if t.dist_index.iter().any(|&i| i as usize >= t.dist_values.len()) {
        return Err(Error::Structural("distance index out of range".into()));
    }
    if let Some(labels) = &t.labels {
        if labels.len() != n {
            return Err(Error::Structural("label count differs from order".into()));
        }
    }
    Ok(())
}

/// Common-denominator integers for the distance values, when they fit in `i128`.
fn integer_values(values: &[Rational]) -> Option<Vec<i128>> {
    let lcm = values.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    values
        .iter()
        .map(|v| (v.numer() * (&lcm / v.denom())).to_i128())
        .collect()
}

/// Scans rows `0..n` in parallel. Each row reports its number of failures and
/// its first failing witness; the result keeps the first witness in row order.
fn scan<W: Send>(n: usize, row: impl Fn(usize) -> (usize, Option<W>) + Sync + Send) -> (usize, Option<W>) {
    (0..n)
        .into_par_iter()
        .map(row)
        .reduce(|| (0, None), |a, b| (a.0 + b.0, a.1.or(b.1)))
}

/// Row helper: counts `bad(y)` over `y` in `0..n`, keeping the first hit.
fn row_hits<W>(n: usize, mut bad: impl FnMut(usize) -> Option<W>) -> (usize, Option<W>) {
    let mut count = 0;
    let mut first = None;
    for y in 0..n {
        if let Some(w) = bad(y) {
            count += 1;
            if first.is_none() {
                first = Some(w);
            }
        }
    }
    (count, first)
}

pub fn validate_group(t: &GroupTables) -> Result<ValidationReport> {
    check_structure(t)?;
    let n = t.order;
    let e = t.identity;
    let m = |a: usize, b: usize| t.mult[a * n + b] as usize;
    let d = |a: usize, b: usize| t.dist_index[a * n + b];
    let mut c = Collector { violations: Vec::new() };
    let mut notes = Vec::new();

    let mut identity_ok = true;
    for x in 0..n {
        if m(e, x) != x || m(x, e) != x {
            identity_ok = false;
            c.record(Axiom::Identity, &[x], || {
                format!("1*x = {}, x*1 = {} for x = {x}", m(e, x), m(x, e))
            });
        }
    }

    let mut inv = vec![usize::MAX; n];
    for x in 0..n {
        match (0..n).find(|&y| m(x, y) == e) {
            Some(y) if m(y, x) == e => inv[x] = y,
            Some(y) => c.record(Axiom::Inverse, &[x, y], || {
                format!("x*y = 1 but y*x = {} for x = {x}, y = {y}", m(y, x))
            }),
            None => c.record(Axiom::Inverse, &[x], || format!("{x} has no right inverse")),
        }
    }
    let inverses_ok = inv.iter().all(|&i| i != usize::MAX);

    let mut gens_for_bi: Vec<usize> = (0..n).collect();
    if identity_ok {
        // Light's associativity test over a greedily chosen generating set.
        let mut gens: Vec<usize> = Vec::new();
        let mut reached = vec![false; n];
        reached[e] = true;
        let mut members = vec![e];
        for cand in 0..n {
            if reached[cand] {
                continue;
            }
            gens.push(cand);
            let mut queue = members.clone();
            while let Some(u) = queue.pop() {
                for &g in &gens {
                    let v = m(u, g);
                    if !reached[v] {
                        reached[v] = true;
                        members.push(v);
                        queue.push(v);
                    }
                }
            }
        }
        for &g in &gens {
            let col: Vec<usize> = (0..n).map(|y| m(y, g)).collect();
            let (count, w) = scan(n, |x| {
                let row = &t.mult[x * n..(x + 1) * n];
                row_hits(n, |y| (col[row[y] as usize] != row[col[y]] as usize).then_some([x, y, g]))
            });
            if let Some(w) = w {
                c.add(Axiom::Associativity, count, &w, format!("(xy)z != x(yz) for ({}, {}, {})", w[0], w[1], w[2]));
                break;
            }
        }
        gens_for_bi = gens;
    } else if n <= CUBIC_SCAN_LIMIT {
        'cubic: for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if m(m(x, y), z) != m(x, m(y, z)) {
                        c.record(Axiom::Associativity, &[x, y, z], || {
                            format!("(xy)z != x(yz) for ({x}, {y}, {z})")
                        });
                        break 'cubic;
                    }
                }
            }
        }
    } else {
        notes.push("associativity not checked: no identity and order too large".into());
    }

    if let Some(neg) = t.dist_values.iter().position(|v| v.is_negative()) {
        let (count, w) = scan(n, |x| row_hits(n, |y| t.dist_values[d(x, y) as usize].is_negative().then_some([x, y])));
        if let Some(w) = w {
            c.add(Axiom::Nonnegative, count, &w, format!("d({}, {}) = {} < 0", w[0], w[1], t.dist_values[neg]));
        }
    }
    let mut left_ok = true;
    if inverses_ok {
        let (count, w) = scan(n, |x| row_hits(n, |y| (d(x, y) != d(e, m(inv[x], y))).then_some([inv[x], x, y])));
        if let Some([g, x, y]) = w {
            left_ok = false;
            c.add(
                Axiom::LeftInvariance,
                count,
                &[g, x, y],
                format!("d(gx, gy) != d(x, y) for (g, x, y) = ({g}, {x}, {y})"),
            );
        }
    } else if n <= CUBIC_SCAN_LIMIT {
        'left: for g in 0..n {
            for x in 0..n {
                for y in 0..n {
                    if d(m(g, x), m(g, y)) != d(x, y) {
                        left_ok = false;
                        c.record(Axiom::LeftInvariance, &[g, x, y], || {
                            format!("d(gx, gy) != d(x, y) for (g, x, y) = ({g}, {x}, {y})")
                        });
                        break 'left;
                    }
                }
            }
        }
    } else {
        left_ok = false;
        notes.push("left invariance not checked: inverses missing and order too large".into());
    }

    let zero_idx = t.dist_values.iter().position(|v| v.is_zero());
    if left_ok && inverses_ok {
        // d(x, y) = |x^-1 y|, so both axioms reduce to the norm row.
        let norm = |g: usize| d(e, g);
        let bad_sep: Vec<usize> = (0..n).filter(|&g| (Some(norm(g) as usize) == zero_idx) != (g == e)).collect();
        if let Some(&g) = bad_sep.first() {
            let detail = format!("d({e}, {g}) = {} but x {} y", t.dist_values[norm(g) as usize], if g == e { "=" } else { "!=" });
            c.add(Axiom::Separation, bad_sep.len(), &[e, g], detail);
        }
        let bad_sym: Vec<usize> = (0..n).filter(|&g| norm(g) != norm(inv[g])).collect();
        if let Some(&g) = bad_sym.first() {
            // d(e, g) = |g| and d(g, e) = |g^-1|.
            c.add(Axiom::Symmetry, bad_sym.len(), &[e, g], format!("d({e}, {g}) != d({g}, {e})"));
        }
    } else {
        let (count, w) = scan(n, |x| row_hits(n, |y| ((Some(d(x, y) as usize) == zero_idx) != (x == y)).then_some([x, y])));
        if let Some([x, y]) = w {
            let detail = format!(
                "d({x}, {y}) = {} but x {} y",
                t.dist_values[d(x, y) as usize],
                if x == y { "=" } else { "!=" }
            );
            c.add(Axiom::Separation, count, &[x, y], detail);
        }
        let (count, w) = scan(n, |x| row_hits(n, |y| (d(x, y) != d(y, x)).then_some([x, y])));
        if let Some([x, y]) = w {
            c.add(Axiom::Symmetry, count, &[x, y], format!("d({x}, {y}) != d({y}, {x})"));
        }
    }

    let ints = integer_values(&t.dist_values);
    let le_sum = |a: u32, b: u32, c: u32| -> bool {
        // values[c] <= values[a] + values[b]
        match &ints {
            Some(v) => v[c as usize] <= v[a as usize] + v[b as usize],
            None => {
                t.dist_values[c as usize] <= &t.dist_values[a as usize] + &t.dist_values[b as usize]
            }
        }
    };
    if left_ok && inverses_ok {
        // With left invariance the triangle inequality reduces to |ab| <= |a| + |b|.
        let (count, w) = scan(n, |a| row_hits(n, |b| (!le_sum(d(e, a), d(e, b), d(e, m(a, b)))).then_some([e, a, m(a, b)])));
        if let Some([x, y, z]) = w {
            c.add(
                Axiom::Triangle,
                count,
                &[x, y, z],
                format!("d(x, z) > d(x, y) + d(y, z) for (x, y, z) = ({x}, {y}, {z})"),
            );
        }
    } else if n <= CUBIC_SCAN_LIMIT {
        'tri: for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if !le_sum(d(x, y), d(y, z), d(x, z)) {
                        c.record(Axiom::Triangle, &[x, y, z], || {
                            format!("d(x, z) > d(x, y) + d(y, z) for (x, y, z) = ({x}, {y}, {z})")
                        });
                        break 'tri;
                    }
                }
            }
        }
    } else {
        notes.push("triangle inequality not checked cubically: order too large".into());
    }

    let bi_invariant = if c.violations.is_empty() {
        // Conjugation by a generating set preserving the norm implies
        // conjugation by every element does.
        let norm: Vec<u32> = (0..n).map(|g| d(e, g)).collect();
        Some(gens_for_bi.iter().all(|&g| {
            let (count, _) = scan(n, |a| ((norm[m(m(inv[g], a), g)] != norm[a]) as usize, None::<()>));
            count == 0
        }))
    } else {
        None
    };

    Ok(ValidationReport {
        order: n,
        violations: c.violations,
        bi_invariant,
        notes,
    })
}
