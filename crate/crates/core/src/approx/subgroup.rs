//! Best-effort search for a subgroup `S ⊆ X^4` commensurable with `X`.

use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;

use super::cover::{commensurable, Commensurability};
use crate::discretisation::Budget;
use crate::error::{Error, Result};
use crate::group::ElementSet;
use crate::rational::Rational;

/// Generator sets of up to this many elements are tried.
pub const MAX_GENERATORS: usize = 3;
/// Distinct subgroups examined before the search stops early.
pub const MAX_SUBGROUPS: usize = 2048;

#[derive(Clone, Debug, Serialize)]
pub struct SubgroupCandidate {
    #[serde(serialize_with = "serialize_set")]
    pub subgroup: ElementSet,
    pub generators: Vec<usize>,
    /// Certified commensurability constant: the larger minimal cover count.
    pub constant: usize,
    pub commensurability: Commensurability,
}

fn serialize_set<S: serde::Serializer>(s: &ElementSet, ser: S) -> std::result::Result<S::Ok, S::Error> {
    s.to_vec().serialize(ser)
}

#[derive(Clone, Debug, Serialize)]
pub struct SubgroupSearch {
    pub best: Option<SubgroupCandidate>,
    /// Distinct subgroups inside `X^4` that were found.
    pub subgroups_found: usize,
    /// Whether [`MAX_SUBGROUPS`] cut the enumeration short.
    pub truncated: bool,
}

/// Closure of `gens` if it stays inside `bound`, built by right
/// multiplication; `None` as soon as an element escapes.
fn closure_within(bound: &ElementSet, gens: &[usize]) -> Option<ElementSet> {
    let g = bound.group();
    let mut s = ElementSet::identity(g);
    let mut queue = vec![g.identity()];
    while let Some(h) = queue.pop() {
        for &t in gens {
            let p = g.mul(h, t);
            if !s.contains(p) {
                if !bound.contains(p) {
                    return None;
                }
                s.insert(p);
                queue.push(p);
            }
        }
    }
    Some(s)
}

/// Searches subgroups generated by at most three elements of `X^4` that lie
/// inside `X^4`, returning the one with the smallest certified constant
/// `c <= c_max` for `(c, r)`-commensurability with `X` (larger subgroups
/// win ties).
///
/// The commensurability check is exact; the subgroup enumeration is not
/// exhaustive, so `best = None` does not mean no such subgroup exists.
pub fn find_commensurable_subgroup(x: &ElementSet, c_max: usize, r: &Rational, budget: Budget) -> Result<SubgroupSearch> {
    let g = x.group();
    if !x.contains(g.identity()) || !x.is_symmetric() {
        return Err(Error::Spec("subgroup search needs a symmetric set containing the identity".into()));
    }
    let x4 = x.power(4);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    let mut found: Vec<(ElementSet, Vec<usize>)> = Vec::new();
    let trivial = ElementSet::identity(g);
    seen.insert(trivial.to_vec());
    found.push((trivial, Vec::new()));
    let mut frontier = vec![0usize];
    let mut truncated = false;
    'levels: for _ in 0..MAX_GENERATORS {
        let mut next = Vec::new();
        for &i in &frontier {
            let (h, gens) = found[i].clone();
            for t in x4.difference(&h).iter() {
                let mut gs = gens.clone();
                gs.push(t);
                let Some(s) = closure_within(&x4, &gs) else { continue };
                if seen.insert(s.to_vec()) {
                    if found.len() == MAX_SUBGROUPS {
                        truncated = true;
                        break 'levels;
                    }
                    next.push(found.len());
                    found.push((s, gs));
                }
            }
        }
        frontier = next;
    }

    let xd = x.thicken(r);
    let results: Vec<Option<SubgroupCandidate>> = found
        .par_iter()
        .map(|(s, gens)| {
            // Each translate covers at most as many points as the body has.
            let lb = x.len().div_ceil(s.thicken(r).len()).max(s.len().div_ceil(xd.len()));
            if lb > c_max {
                return Ok(None);
            }
            match commensurable(x, s, c_max, r, budget) {
                Ok(c) if c.holds => Ok(Some(SubgroupCandidate {
                    subgroup: s.clone(),
                    generators: gens.clone(),
                    constant: c.constant(),
                    commensurability: c,
                })),
                Ok(_) | Err(Error::BudgetExceeded { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let best = results
        .into_iter()
        .flatten()
        .min_by_key(|c| (c.constant, std::cmp::Reverse(c.subgroup.len())));
    Ok(SubgroupSearch { best, subgroups_found: found.len(), truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::zoo::{make_group, Combine, GroupSpec};

    #[test]
    fn subgroup_finds_itself() {
        let g = make_group(&GroupSpec::cyclic_lee(12)).unwrap();
        let h = ElementSet::from_indices(&g, [0, 3, 6, 9]);
        let out = find_commensurable_subgroup(&h, 2, &int(0), Budget::default()).unwrap();
        let best = out.best.unwrap();
        assert_eq!(best.subgroup, h);
        assert_eq!(best.constant, 1);
    }

    #[test]
    fn union_of_cosets_in_z3_z8() {
        let g = make_group(&GroupSpec::product(
            vec![GroupSpec::cyclic_lee(3), GroupSpec::cyclic_lee(8)],
            Combine::Max,
        ))
        .unwrap();
        let at = |a, b| g.index_of(&[a, b]).unwrap();
        // H = <(0,4)>, X = H ∪ gH ∪ g^-1 H with g = (1,2).
        let x = ElementSet::from_indices(&g, [at(0, 0), at(0, 4), at(1, 2), at(1, 6), at(2, 6), at(2, 2)]);
        assert!(x.is_symmetric());
        let out = find_commensurable_subgroup(&x, 3, &int(0), Budget::default()).unwrap();
        let best = out.best.expect("a subgroup inside X^4");
        assert!(best.subgroup.is_subgroup());
        assert!(best.subgroup.is_subset(&x.power(4)));
        assert!(best.constant <= 2);
        // Exhaustive over one and two translates; the constant is at most 2.
        let n = g.order();
        let need = |a: &ElementSet, b: &ElementSet| {
            if (0..n).any(|t| a.is_subset(&b.left_translate(t))) {
                1
            } else if (0..n).any(|t| (0..n).any(|u| a.is_subset(&b.left_translate(t).union(&b.left_translate(u))))) {
                2
            } else {
                3
            }
        };
        assert_eq!(best.constant, need(&x, &best.subgroup).max(need(&best.subgroup, &x)));
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let g = make_group(&GroupSpec::cyclic_lee(8)).unwrap();
        let x = ElementSet::from_indices(&g, [0, 1]);
        assert!(find_commensurable_subgroup(&x, 2, &int(0), Budget::default()).is_err());
    }
}
