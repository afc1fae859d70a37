use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::FiniteMetricGroup;
use crate::rational::Rational;

/// A subset of a [`FiniteMetricGroup`], stored as a bitset over element indices.
///
/// Binary operations assert that both operands belong to the same group
/// (pointer equality of the shared group); use [`ElementSet::same_group`]
/// beforehand when that is not already known.
#[derive(Clone)]
pub struct ElementSet {
    group: Arc<FiniteMetricGroup>,
    bits: Vec<u64>,
}

impl PartialEq for ElementSet {
    fn eq(&self, other: &Self) -> bool {
        self.same_group(other) && self.bits == other.bits
    }
}

impl Eq for ElementSet {}

impl Hash for ElementSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.bits.hash(state);
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl ElementSet {
    pub fn empty(group: &Arc<FiniteMetricGroup>) -> Self {
        ElementSet {
            group: Arc::clone(group),
            bits: vec![0; words(group.order())],
        }
    }

    pub fn full(group: &Arc<FiniteMetricGroup>) -> Self {
        let mut s = Self::empty(group);
        for g in 0..group.order() {
            s.insert(g);
        }
        s
    }

    /// `{1}`.
    pub fn identity(group: &Arc<FiniteMetricGroup>) -> Self {
        Self::from_indices(group, [0])
    }

    pub fn from_indices(group: &Arc<FiniteMetricGroup>, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(group);
        for g in items {
            s.insert(g);
        }
        s
    }

    /// Closed ball `D_r(1)`.
    pub fn ball(group: &Arc<FiniteMetricGroup>, r: &Rational) -> Self {
        let rank = group.ball_rank(r);
        Self::from_indices(group, (0..group.order()).filter(|&g| group.norm_rank(g) < rank))
    }

    /// Closed ball `D_r(center)`.
    pub fn ball_around(group: &Arc<FiniteMetricGroup>, center: usize, r: &Rational) -> Self {
        Self::ball(group, r).left_translate(center)
    }

    pub fn group(&self) -> &Arc<FiniteMetricGroup> {
        &self.group
    }

    pub fn same_group(&self, other: &ElementSet) -> bool {
        Arc::ptr_eq(&self.group, &other.group)
    }

    fn check(&self, other: &ElementSet) {
        assert!(self.same_group(other), "set operation across different groups");
    }

    pub fn contains(&self, g: usize) -> bool {
        g < self.group.order() && self.bits[g / 64] >> (g % 64) & 1 == 1
    }

    pub fn insert(&mut self, g: usize) -> bool {
        assert!(g < self.group.order(), "element {g} out of range");
        let fresh = !self.contains(g);
        self.bits[g / 64] |= 1 << (g % 64);
        fresh
    }

    pub fn remove(&mut self, g: usize) -> bool {
        let present = self.contains(g);
        if present {
            self.bits[g / 64] &= !(1 << (g % 64));
        }
        present
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    /// Members in ascending index order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn union(&self, other: &ElementSet) -> ElementSet {
        self.check(other);
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a | b).collect();
        ElementSet { group: Arc::clone(&self.group), bits }
    }

    pub fn intersection(&self, other: &ElementSet) -> ElementSet {
        self.check(other);
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a & b).collect();
        ElementSet { group: Arc::clone(&self.group), bits }
    }

    pub fn difference(&self, other: &ElementSet) -> ElementSet {
        self.check(other);
        let bits = self.bits.iter().zip(&other.bits).map(|(a, b)| a & !b).collect();
        ElementSet { group: Arc::clone(&self.group), bits }
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.check(other);
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    /// First member of `self` outside `other`.
    pub fn first_outside(&self, other: &ElementSet) -> Option<usize> {
        self.difference(other).first()
    }

    /// `XY = {xy : x in X, y in Y}`.
    pub fn product(&self, other: &ElementSet) -> ElementSet {
        self.check(other);
        let g = &self.group;
        let mut out = ElementSet::empty(g);
        let ys: Vec<usize> = other.iter().collect();
        for x in self.iter() {
            for &y in &ys {
                let p = g.mul(x, y);
                out.bits[p / 64] |= 1 << (p % 64);
            }
        }
        out
    }

    /// `X^-1`.
    pub fn inverse(&self) -> ElementSet {
        ElementSet::from_indices(&self.group, self.iter().map(|x| self.group.inv(x)))
    }

    /// `X^n` for `n >= 0` (with `X^0 = {1}`) and `(X^-1)^|n|` for `n < 0`.
    pub fn power(&self, n: i64) -> ElementSet {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut acc = ElementSet::identity(&self.group);
        for _ in 0..n.unsigned_abs() {
            acc = acc.product(&base);
        }
        acc
    }

    /// `D_r(X) = {y : d(x, y) <= r for some x in X} = X D_r(1)`.
    pub fn thicken(&self, r: &Rational) -> ElementSet {
        self.product(&ElementSet::ball(&self.group, r))
    }

    /// `gX`.
    pub fn left_translate(&self, g: usize) -> ElementSet {
        ElementSet::from_indices(&self.group, self.iter().map(|x| self.group.mul(g, x)))
    }

    /// `Xg`.
    pub fn right_translate(&self, g: usize) -> ElementSet {
        ElementSet::from_indices(&self.group, self.iter().map(|x| self.group.mul(x, g)))
    }

    /// `[X, Y] = {[x, y] : x in X, y in Y}`.
    pub fn commutator_set(&self, other: &ElementSet) -> ElementSet {
        self.check(other);
        let g = &self.group;
        let ys: Vec<usize> = other.iter().collect();
        let mut out = ElementSet::empty(g);
        for x in self.iter() {
            for &y in &ys {
                out.insert(g.commutator(x, y));
            }
        }
        out
    }

    /// `Y^X = {x^-1 y x : x in X, y in Y}` where `self` is `Y`.
    pub fn conjugate_by(&self, by: &ElementSet) -> ElementSet {
        self.check(by);
        let g = &self.group;
        let xs: Vec<usize> = by.iter().collect();
        let mut out = ElementSet::empty(g);
        for y in self.iter() {
            for &x in &xs {
                out.insert(g.conj(y, x));
            }
        }
        out
    }

    /// `1 in X` and `X = X^-1`.
    pub fn is_symmetric(&self) -> bool {
        self.contains(0) && self.inverse() == *self
    }

    pub fn is_subgroup(&self) -> bool {
        self.contains(0) && self.product(self).is_subset(self) && self.inverse().is_subset(self)
    }

    /// Subgroup generated by the members.
    pub fn generated_subgroup(&self) -> ElementSet {
        let g = &self.group;
        let gens: Vec<usize> = self.iter().collect();
        let mut out = ElementSet::identity(g);
        let mut queue = vec![0usize];
        while let Some(u) = queue.pop() {
            for &s in &gens {
                let v = g.mul(u, s);
                if out.insert(v) {
                    queue.push(v);
                }
            }
        }
        out
    }

    /// Raw bitset words, for solver code that works on local indices.
    pub fn words(&self) -> &[u64] {
        &self.bits
    }
}
