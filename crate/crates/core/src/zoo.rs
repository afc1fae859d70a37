//! Constructors for the finite metric groups and subsets used as instances.
//!
//! Elements carry labels: `[a]` in a cyclic group, `[k, f]` for `r^k s^f` in a
//! dihedral group, a 0-based one-line permutation in a symmetric group,
//! `[sign, unit]` in the quaternion group (unit 0..4 for 1, i, j, k), and
//! the concatenation of factor labels in a direct product.

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::group::{ElementSet, FiniteMetricGroup, GroupTables, Label, MAX_ORDER};
use crate::rational::{self, int, Rational};

/// Abstract group families, without a metric.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Cyclic { n: usize },
    Dihedral { n: usize },
    Symmetric { m: usize },
    Quaternion,
    Product { factors: Vec<Family> },
}

impl Family {
    pub fn order(&self) -> Option<usize> {
        match self {
            Family::Cyclic { n } => Some(*n),
            Family::Dihedral { n } => n.checked_mul(2),
            Family::Symmetric { m } => (1..=*m).try_fold(1usize, |acc, k| acc.checked_mul(k)),
            Family::Quaternion => Some(8),
            Family::Product { factors } => factors
                .iter()
                .try_fold(1usize, |acc, f| f.order().and_then(|o| acc.checked_mul(o))),
        }
    }

    fn label_len(&self) -> usize {
        match self {
            Family::Cyclic { .. } => 1,
            Family::Dihedral { .. } | Family::Quaternion => 2,
            Family::Symmetric { m } => *m,
            Family::Product { factors } => factors.iter().map(Family::label_len).sum(),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            Family::Cyclic { n } | Family::Dihedral { n } if *n == 0 => {
                Err(Error::Spec("family parameter n must be positive".into()))
            }
            Family::Symmetric { m } if *m == 0 => Err(Error::Spec("symmetric degree must be positive".into())),
            Family::Product { factors } => {
                if factors.is_empty() {
                    return Err(Error::Spec("product needs at least one factor".into()));
                }
                factors.iter().try_for_each(Family::check)
            }
            _ => Ok(()),
        }
    }

    fn elements(&self) -> Vec<Label> {
        match self {
            Family::Cyclic { n } => (0..*n as i64).map(|a| vec![a]).collect(),
            Family::Dihedral { n } => (0..*n as i64)
                .flat_map(|k| [vec![k, 0], vec![k, 1]])
                .collect(),
            Family::Symmetric { m } => permutations(*m),
            Family::Quaternion => (0..2).flat_map(|s| (0..4).map(move |u| vec![s, u])).collect(),
            Family::Product { factors } => {
                let mut out: Vec<Label> = vec![Vec::new()];
                for f in factors {
                    let elems = f.elements();
                    out = out
                        .iter()
                        .flat_map(|prefix| {
                            elems.iter().map(move |e| {
                                let mut l = prefix.clone();
                                l.extend_from_slice(e);
                                l
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    fn mul(&self, a: &[i64], b: &[i64]) -> Label {
        match self {
            Family::Cyclic { n } => vec![(a[0] + b[0]).rem_euclid(*n as i64)],
            Family::Dihedral { n } => {
                let sign = if a[1] == 0 { 1 } else { -1 };
                vec![(a[0] + sign * b[0]).rem_euclid(*n as i64), (a[1] + b[1]) % 2]
            }
            // (a b)(i) = a(b(i))
            Family::Symmetric { .. } => b.iter().map(|&i| a[i as usize]).collect(),
            Family::Quaternion => {
                let (sign, unit) = quaternion_unit_product(a[1], b[1]);
                vec![(a[0] + b[0] + sign) % 2, unit]
            }
            Family::Product { factors } => {
                let mut out = Vec::with_capacity(a.len());
                let mut off = 0;
                for f in factors {
                    let len = f.label_len();
                    out.extend(f.mul(&a[off..off + len], &b[off..off + len]));
                    off += len;
                }
                out
            }
        }
    }
}

/// Product of quaternion units (0 = 1, 1 = i, 2 = j, 3 = k) as (sign bit, unit).
fn quaternion_unit_product(u: i64, v: i64) -> (i64, i64) {
    match (u, v) {
        (0, v) => (0, v),
        (u, 0) => (0, u),
        (u, v) if u == v => (1, 0),
        (1, 2) => (0, 3),
        (2, 3) => (0, 1),
        (3, 1) => (0, 2),
        (2, 1) => (1, 3),
        (3, 2) => (1, 1),
        (1, 3) => (1, 2),
        _ => unreachable!("quaternion units are 0..4"),
    }
}

fn permutations(m: usize) -> Vec<Label> {
    fn rec(prefix: &mut Vec<i64>, used: &mut Vec<bool>, out: &mut Vec<Label>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i as i64);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combine {
    Max,
    Sum,
}

/// A finite group together with a left-invariant metric.
///
/// `scale` divides the raw metric; defaults are 1 except for the Hamming
/// metric on `S_m`, which is divided by `m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupSpec {
    CyclicLee {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::json_opt")]
        scale: Option<Rational>,
    },
    /// Word metric on the dihedral group of order `2n`; generators default to `{r, r^-1, s}`.
    Dihedral {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generators: Option<Vec<Label>>,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::json_opt")]
        scale: Option<Rational>,
    },
    SymmetricHamming {
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::json_opt")]
        scale: Option<Rational>,
    },
    WordMetric {
        family: Family,
        generators: Vec<Label>,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::json_opt")]
        scale: Option<Rational>,
    },
    Product {
        factors: Vec<GroupSpec>,
        combine: Combine,
        #[serde(default, skip_serializing_if = "Option::is_none", with = "rational::json_opt")]
        scale: Option<Rational>,
    },
}

impl GroupSpec {
    pub fn cyclic_lee(n: usize) -> Self {
        GroupSpec::CyclicLee { n, scale: None }
    }

    pub fn cyclic_lee_scaled(n: usize, scale: Rational) -> Self {
        GroupSpec::CyclicLee { n, scale: Some(scale) }
    }

    pub fn dihedral(n: usize) -> Self {
        GroupSpec::Dihedral { n, generators: None, scale: None }
    }

    pub fn symmetric_hamming(m: usize) -> Self {
        GroupSpec::SymmetricHamming { m, scale: None }
    }

    pub fn word_metric(family: Family, generators: Vec<Label>) -> Self {
        GroupSpec::WordMetric { family, generators, scale: None }
    }

    pub fn product(factors: Vec<GroupSpec>, combine: Combine) -> Self {
        GroupSpec::Product { factors, combine, scale: None }
    }

    pub fn family(&self) -> Family {
        match self {
            GroupSpec::CyclicLee { n, .. } => Family::Cyclic { n: *n },
            GroupSpec::Dihedral { n, .. } => Family::Dihedral { n: *n },
            GroupSpec::SymmetricHamming { m, .. } => Family::Symmetric { m: *m },
            GroupSpec::WordMetric { family, .. } => family.clone(),
            GroupSpec::Product { factors, .. } => Family::Product {
                factors: factors.iter().map(GroupSpec::family).collect(),
            },
        }
    }

    fn scale(&self) -> Rational {
        let explicit = match self {
            GroupSpec::CyclicLee { scale, .. }
            | GroupSpec::Dihedral { scale, .. }
            | GroupSpec::SymmetricHamming { scale, .. }
            | GroupSpec::WordMetric { scale, .. }
            | GroupSpec::Product { scale, .. } => scale.clone(),
        };
        explicit.unwrap_or_else(|| match self {
            GroupSpec::SymmetricHamming { m, .. } => int(*m as i64),
            _ => int(1),
        })
    }

    fn word_generators(&self) -> Option<Vec<Label>> {
        match self {
            GroupSpec::Dihedral { n, generators, .. } => Some(generators.clone().unwrap_or_else(|| {
                let n = *n as i64;
                vec![vec![1 % n, 0], vec![(n - 1) % n, 0], vec![0, 1]]
            })),
            GroupSpec::WordMetric { generators, .. } => Some(generators.clone()),
            _ => None,
        }
    }
}

/// Labelled multiplication structure shared by the metric builders.
struct Labelled {
    family: Family,
    labels: Vec<Label>,
    index: HashMap<Label, usize>,
}

impl Labelled {
    fn new(family: Family, labels: Vec<Label>) -> Self {
        let index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        Labelled { family, labels, index }
    }

    fn lexicographic(family: Family) -> Self {
        let mut labels = family.elements();
        labels.sort();
        Labelled::new(family, labels)
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.index[&self.family.mul(&self.labels[a], &self.labels[b])]
    }

    fn lookup(&self, label: &[i64]) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::Spec(format!("label {label:?} is not an element of {:?}", self.family)))
    }

    fn table(&self) -> Vec<u32> {
        let n = self.labels.len();
        let mut mult = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mult.push(self.mul(a, b) as u32);
            }
        }
        mult
    }
}

/// Norm `|g| = d(1, g)` of a spec's metric on its family's elements, by label.
fn norm_by_label(spec: &GroupSpec) -> Result<HashMap<Label, Rational>> {
    let scale = spec.scale();
    if !scale.is_positive() {
        return Err(Error::Spec("metric scale must be positive".into()));
    }
    let raw: HashMap<Label, Rational> = match spec {
        GroupSpec::CyclicLee { n, .. } => (0..*n as i64)
            .map(|a| (vec![a], int(a.min(*n as i64 - a))))
            .collect(),
        GroupSpec::SymmetricHamming { m, .. } => permutations(*m)
            .into_iter()
            .map(|p| {
                let moved = p.iter().enumerate().filter(|(i, &v)| *i as i64 != v).count();
                (p, int(moved as i64))
            })
            .collect(),
        GroupSpec::Dihedral { .. } | GroupSpec::WordMetric { .. } => {
            let lab = Labelled::lexicographic(spec.family());
            let gens = spec.word_generators().unwrap();
            let (lengths, _) = word_lengths(&lab, &gens)?;
            lab.labels.iter().cloned().zip(lengths.into_iter().map(|l| int(l as i64))).collect()
        }
        GroupSpec::Product { factors, combine, .. } => {
            let factor_norms = factors.iter().map(norm_by_label).collect::<Result<Vec<_>>>()?;
            let family = spec.family();
            let lens: Vec<usize> = factors.iter().map(|f| f.family().label_len()).collect();
            family
                .elements()
                .into_iter()
                .map(|label| {
                    let mut off = 0;
                    let mut acc = Rational::zero();
                    for (fi, len) in lens.iter().enumerate() {
                        let v = &factor_norms[fi][&label[off..off + len].to_vec()];
                        acc = match combine {
                            Combine::Max => acc.max(v.clone()),
                            Combine::Sum => acc + v,
                        };
                        off += len;
                    }
                    (label, acc)
                })
                .collect()
        }
    };
    Ok(raw.into_iter().map(|(k, v)| (k, v / &scale)).collect())
}

/// BFS word lengths under right multiplication by `gens`, plus the BFS visiting order.
fn word_lengths(lab: &Labelled, gens: &[Label]) -> Result<(Vec<usize>, Vec<usize>)> {
    let gen_idx = gens.iter().map(|g| lab.lookup(g)).collect::<Result<Vec<_>>>()?;
    let n = lab.labels.len();
    let e = lab.lookup(&identity_label(&lab.family))?;
    for &g in &gen_idx {
        let has_inverse = gen_idx.iter().any(|&h| lab.mul(g, h) == e);
        if !has_inverse {
            return Err(Error::Spec(format!(
                "generating set is not symmetric: {:?} has no inverse in it",
                lab.labels[g]
            )));
        }
    }
    let mut dist = vec![usize::MAX; n];
    let mut order = vec![e];
    dist[e] = 0;
    let mut queue = VecDeque::from([e]);
    while let Some(u) = queue.pop_front() {
        for &g in &gen_idx {
            let v = lab.mul(u, g);
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                order.push(v);
                queue.push_back(v);
            }
        }
    }
    if order.len() != n {
        return Err(Error::Spec(format!(
            "generators reach only {} of {n} elements",
            order.len()
        )));
    }
    Ok((dist, order))
}

fn identity_label(family: &Family) -> Label {
    match family {
        Family::Cyclic { .. } => vec![0],
        Family::Dihedral { .. } | Family::Quaternion => vec![0, 0],
        Family::Symmetric { m } => (0..*m as i64).collect(),
        Family::Product { factors } => factors.iter().flat_map(identity_label).collect(),
    }
}

/// Builds and validates the group described by `spec`.
///
/// Indexing: identity first, then BFS order for word metrics and
/// lexicographic label order otherwise.
pub fn make_group(spec: &GroupSpec) -> Result<Arc<FiniteMetricGroup>> {
    let family = spec.family();
    family.check()?;
    let order = family.order().ok_or(Error::OrderTooLarge(usize::MAX))?;
    if order > MAX_ORDER {
        return Err(Error::OrderTooLarge(order));
    }
    let norms = norm_by_label(spec)?;
    let lab = match spec.word_generators() {
        Some(gens) => {
            let lex = Labelled::lexicographic(family.clone());
            let (_, bfs) = word_lengths(&lex, &gens)?;
            Labelled::new(family, bfs.into_iter().map(|i| lex.labels[i].clone()).collect())
        }
        None => Labelled::lexicographic(family),
    };
    let mult = lab.table();
    let n = lab.labels.len();
    let mut inv = vec![0u32; n];
    for a in 0..n {
        inv[a] = (0..n).find(|&b| mult[a * n + b] == 0).unwrap_or(0) as u32;
    }
    let norm: Vec<Rational> = lab.labels.iter().map(|l| norms[l].clone()).collect();
    let tables = GroupTables::from_norm(n, mult, &inv, &norm).with_labels(lab.labels.clone());
    let group = FiniteMetricGroup::new(tables)?;
    let mut meta = serde_json::json!({
        "spec": spec,
        "bi_invariant": group.is_bi_invariant(),
    });
    if let Some(gens) = spec.word_generators() {
        let gen_idx: Vec<usize> = gens.iter().map(|g| lab.lookup(g)).collect::<Result<_>>()?;
        let closed = gen_idx.iter().all(|&s| {
            (0..n).all(|x| gen_idx.contains(&group.conj(s, x)))
        });
        meta["generators_conjugation_closed"] = serde_json::Value::Bool(closed);
    }
    Ok(group.with_meta(meta).into_shared())
}

/// How the subset `X` of an instance is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SetSpec {
    /// `D_r(1)`.
    Ball {
        #[serde(with = "rational::json")]
        radius: Rational,
    },
    /// The subgroup generated by the listed elements.
    Subgroup { generators: Vec<Label> },
    /// `H` together with the cosets `tH`, symmetrized.
    CosetUnion { subgroup: Vec<Label>, translates: Vec<Label> },
    /// `D_r(H u gH u g^-1 H)`, symmetrized.
    PlantedProgression {
        subgroup: Vec<Label>,
        step: Label,
        #[serde(default = "rational::zero", with = "rational::json")]
        radius: Rational,
    },
    /// `{1}` plus seeded random elements and their inverses, until `size` is reached.
    RandomSymmetric { size: usize },
    /// Explicit element indices.
    Indices { elements: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub group: GroupSpec,
    pub set: SetSpec,
    #[serde(default)]
    pub seed: u64,
}

fn lookup(group: &Arc<FiniteMetricGroup>, label: &[i64]) -> Result<usize> {
    group
        .index_of(label)
        .ok_or_else(|| Error::Spec(format!("label {label:?} is not an element of the group")))
}

fn symmetrize(x: &ElementSet) -> ElementSet {
    let mut s = x.union(&x.inverse());
    s.insert(0);
    s
}

/// Builds the subset described by `set` inside an existing group.
pub fn make_set(group: &Arc<FiniteMetricGroup>, set: &SetSpec, seed: u64) -> Result<ElementSet> {
    let subgroup = |gens: &[Label]| -> Result<ElementSet> {
        let idx = gens.iter().map(|l| lookup(group, l)).collect::<Result<Vec<_>>>()?;
        Ok(ElementSet::from_indices(group, idx).generated_subgroup())
    };
    Ok(match set {
        SetSpec::Ball { radius } => {
            if radius.is_negative() {
                return Err(Error::Spec("ball radius must be nonnegative".into()));
            }
            ElementSet::ball(group, radius)
        }
        SetSpec::Subgroup { generators } => subgroup(generators)?,
        SetSpec::CosetUnion { subgroup: gens, translates } => {
            let h = subgroup(gens)?;
            let mut u = h.clone();
            for t in translates {
                u = u.union(&h.left_translate(lookup(group, t)?));
            }
            symmetrize(&u)
        }
        SetSpec::PlantedProgression { subgroup: gens, step, radius } => {
            let h = subgroup(gens)?;
            let g = lookup(group, step)?;
            let u = h
                .union(&h.left_translate(g))
                .union(&h.left_translate(group.inv(g)));
            symmetrize(&symmetrize(&u).thicken(radius))
        }
        SetSpec::RandomSymmetric { size } => {
            if *size > group.order() {
                return Err(Error::Spec("random set larger than the group".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = ElementSet::identity(group);
            while s.len() < *size {
                let g = rng.random_range(0..group.order());
                s.insert(g);
                s.insert(group.inv(g));
            }
            s
        }
        SetSpec::Indices { elements } => {
            if let Some(&bad) = elements.iter().find(|&&e| e >= group.order()) {
                return Err(Error::Spec(format!("element index {bad} out of range")));
            }
            ElementSet::from_indices(group, elements.iter().copied())
        }
    })
}

/// Builds the group and subset of an instance; a pure function of the spec.
pub fn make_instance(spec: &InstanceSpec) -> Result<(Arc<FiniteMetricGroup>, ElementSet)> {
    let group = make_group(&spec.group)?;
    let set = make_set(&group, &spec.set, spec.seed)?;
    Ok((group, set))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn cyclic_lee_eight() {
        let g = make_group(&GroupSpec::cyclic_lee(8)).unwrap();
        assert_eq!(g.order(), 8);
        assert!(g.is_bi_invariant());
        assert_eq!(g.dist(1, 6), &int(3));
        assert_eq!(g.label_of(5), Some(&vec![5]));
    }

    #[test]
    fn symmetric_hamming_three_is_bi_invariant() {
        let g = make_group(&GroupSpec::symmetric_hamming(3)).unwrap();
        assert_eq!(g.order(), 6);
        assert!(g.is_bi_invariant());
        let swap = g.index_of(&[1, 0, 2]).unwrap();
        assert_eq!(g.dist(0, swap), &ratio(2, 3));
        assert_eq!(g.diameter(), &int(1));
    }

    #[test]
    fn quaternion_word_metric() {
        let spec = GroupSpec::word_metric(
            Family::Quaternion,
            vec![vec![0, 1], vec![1, 1], vec![0, 2], vec![1, 2]],
        );
        let g = make_group(&spec).unwrap();
        assert_eq!(g.order(), 8);
        // -1 = i^2 has length 2; k = ij has length 2.
        let minus_one = g.index_of(&[1, 0]).unwrap();
        let k = g.index_of(&[0, 3]).unwrap();
        assert_eq!(g.dist(0, minus_one), &int(2));
        assert_eq!(g.dist(0, k), &int(2));
        assert_eq!(g.meta()["generators_conjugation_closed"], serde_json::json!(true));
        assert!(g.is_bi_invariant());
    }

    #[test]
    fn rejects_bad_generators_and_large_orders() {
        let one_way = GroupSpec::word_metric(Family::Cyclic { n: 5 }, vec![vec![1]]);
        assert!(matches!(make_group(&one_way), Err(Error::Spec(_))));
        let too_small = GroupSpec::word_metric(Family::Cyclic { n: 6 }, vec![vec![2], vec![4]]);
        assert!(matches!(make_group(&too_small), Err(Error::Spec(_))));
        assert!(matches!(
            make_group(&GroupSpec::symmetric_hamming(8)),
            Err(Error::OrderTooLarge(40320))
        ));
    }

    #[test]
    fn word_metric_indices_follow_bfs() {
        let g = make_group(&GroupSpec::dihedral(4)).unwrap();
        let norms: Vec<&Rational> = (0..g.order()).map(|x| g.dist(0, x)).collect();
        assert!(norms.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn planted_progression_is_symmetric() {
        let spec = InstanceSpec {
            group: GroupSpec::product(
                vec![GroupSpec::cyclic_lee(3), GroupSpec::cyclic_lee(16)],
                Combine::Max,
            ),
            set: SetSpec::PlantedProgression {
                subgroup: vec![vec![0, 4]],
                step: vec![1, 1],
                radius: int(0),
            },
            seed: 0,
        };
        let (_, x) = make_instance(&spec).unwrap();
        assert!(x.is_symmetric());
        assert_eq!(x.len(), 12);
    }

    #[test]
    fn random_symmetric_is_seed_determined() {
        let spec = |seed| InstanceSpec {
            group: GroupSpec::dihedral(6),
            set: SetSpec::RandomSymmetric { size: 5 },
            seed,
        };
        let (_, a) = make_instance(&spec(3)).unwrap();
        let (_, b) = make_instance(&spec(3)).unwrap();
        assert_eq!(a.to_vec(), b.to_vec());
        assert!(a.is_symmetric());
        assert!(a.len() >= 5);
    }
}
