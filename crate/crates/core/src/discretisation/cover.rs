//! Minimum set cover by branch-and-bound, specialised to covers of a set by
//! balls or translates.

use super::bits::Bits;
use super::{Bound, Budget, Discretisation};
use crate::error::{Error, Result};
use crate::group::ElementSet;
use crate::rational::Rational;

/// A set-cover instance over the members of `universe`.
///
/// Each candidate is `(center, covered)`; only `covered ∩ universe` matters.
/// Candidates should be listed in ascending center order so that ties
/// resolve towards small indices.
pub(crate) struct CoverInput<'a> {
    pub universe: &'a ElementSet,
    pub candidates: Vec<(usize, ElementSet)>,
}

/// Exact covering number `N^cov_r(X/Y)`: the fewest closed `r`-balls with
/// centers in `Y` whose union contains `X`.
///
/// Returns [`Error::NoCover`] when some point of `X` is farther than `r`
/// from all of `Y`.
pub fn covering_number(x: &ElementSet, y: &ElementSet, r: &Rational, budget: Budget) -> Result<Discretisation> {
    let g = x.group();
    let rank = g.ball_rank(r);
    let xs = x.to_vec();
    let candidates = y
        .iter()
        .map(|c| {
            let covered = ElementSet::from_indices(g, xs.iter().copied().filter(|&p| g.dist_rank(c, p) < rank));
            (c, covered)
        })
        .collect();
    solve_cover(CoverInput { universe: x, candidates }, budget)
}

/// Fewest left translates `g·body` (with `g` drawn from `pool`) covering `x`.
pub fn min_translate_cover(
    x: &ElementSet,
    body: &ElementSet,
    pool: &ElementSet,
    budget: Budget,
) -> Result<Discretisation> {
    let candidates = pool.iter().map(|c| (c, body.left_translate(c))).collect();
    solve_cover(CoverInput { universe: x, candidates }, budget)
}

pub(crate) fn solve_cover(input: CoverInput<'_>, budget: Budget) -> Result<Discretisation> {
    let universe = input.universe;
    let g = universe.group();
    let elems = universe.to_vec();
    let m = elems.len();
    if m == 0 {
        return Ok(Discretisation {
            bound: Bound::Exact(0),
            witness: ElementSet::empty(g),
            nodes: 0,
            budget: budget.0,
        });
    }
    let local = |s: &ElementSet| {
        let mut b = Bits::new(m);
        for (i, &e) in elems.iter().enumerate() {
            if s.contains(e) {
                b.set(i);
            }
        }
        b
    };

    // Drop empty and duplicate candidates, keeping the first center of each.
    let mut sets: Vec<(usize, Bits)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (c, s) in &input.candidates {
        let b = local(s);
        if !b.is_empty() && seen.insert(b.clone()) {
            sets.push((*c, b));
        }
    }
    // Drop candidates strictly contained in another; skipped on very large
    // instances where the quadratic scan would dominate.
    if sets.len() * sets.len() * m.div_ceil(64) <= 50_000_000 {
        let dominated: Vec<bool> = (0..sets.len())
            .map(|i| (0..sets.len()).any(|j| j != i && sets[i].1.is_subset(&sets[j].1)))
            .collect();
        sets = sets.into_iter().zip(dominated).filter(|(_, d)| !d).map(|(s, _)| s).collect();
    }

    let mut elem_sets: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, (_, b)) in sets.iter().enumerate() {
        for e in b.iter() {
            elem_sets[e].push(i);
        }
    }
    if let Some(e) = elem_sets.iter().position(Vec::is_empty) {
        return Err(Error::NoCover { element: elems[e] });
    }
    let mut by_frequency: Vec<usize> = (0..m).collect();
    by_frequency.sort_by_key(|&e| (elem_sets[e].len(), e));

    let mut search = CoverSearch {
        sets: &sets,
        elem_sets: &elem_sets,
        by_frequency: &by_frequency,
        forbidden: vec![false; sets.len()],
        best: Vec::new(),
        nodes: 0,
        budget: budget.0,
        aborted: false,
    };
    let full = Bits::full(m);
    search.best = search.greedy(&full);
    let root_lower = search.lower_bound(&full).unwrap_or(0);
    if root_lower < search.best.len() {
        search.search(&full, &mut Vec::new());
    }
    let witness = ElementSet::from_indices(g, search.best.iter().map(|&i| sets[i].0));
    let bound = if search.aborted {
        Bound::Interval { lower: root_lower, upper: search.best.len() }
    } else {
        Bound::Exact(search.best.len())
    };
    Ok(Discretisation { bound, witness, nodes: search.nodes, budget: budget.0 })
}

struct CoverSearch<'a> {
    sets: &'a [(usize, Bits)],
    elem_sets: &'a [Vec<usize>],
    by_frequency: &'a [usize],
    forbidden: Vec<bool>,
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl CoverSearch<'_> {
    fn greedy(&self, uncovered: &Bits) -> Vec<usize> {
        let mut u = uncovered.clone();
        let mut chosen = Vec::new();
        while !u.is_empty() {
            let mut best = (0, 0);
            for (i, (_, b)) in self.sets.iter().enumerate() {
                let gain = b.and_count(&u);
                if gain > best.1 {
                    best = (i, gain);
                }
            }
            u.and_not_assign(&self.sets[best.0].1);
            chosen.push(best.0);
        }
        chosen
    }

    /// Lower bound on the sets still needed for `u` using allowed sets only,
    /// or `None` if some element can no longer be covered.
    ///
    /// Combines the counting bound `ceil(|u| / max gain)` with a greedy dual
    /// packing: elements no two of which share an allowed set each need
    /// their own set.
    fn lower_bound(&self, u: &Bits) -> Option<usize> {
        let size = u.count();
        let mut max_gain = 0;
        for (i, (_, b)) in self.sets.iter().enumerate() {
            if !self.forbidden[i] {
                max_gain = max_gain.max(b.and_count(u));
            }
        }
        if max_gain == 0 {
            return None;
        }
        let counting = size.div_ceil(max_gain);
        let mut used = vec![false; self.sets.len()];
        let mut packed = 0;
        for &e in self.by_frequency {
            if !u.get(e) {
                continue;
            }
            let allowed = self.elem_sets[e].iter().filter(|&&s| !self.forbidden[s]);
            let mut any = false;
            let mut free = true;
            for &s in allowed.clone() {
                any = true;
                if used[s] {
                    free = false;
                    break;
                }
            }
            if !any {
                return None;
            }
            if free {
                packed += 1;
                for &s in allowed {
                    used[s] = true;
                }
            }
        }
        Some(counting.max(packed))
    }

    fn search(&mut self, u: &Bits, chosen: &mut Vec<usize>) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        if u.is_empty() {
            if chosen.len() < self.best.len() {
                self.best = chosen.clone();
            }
            return;
        }
        match self.lower_bound(u) {
            Some(lb) if chosen.len() + lb < self.best.len() => {}
            _ => return,
        }
        // Branch on the uncovered element with the fewest allowed sets.
        let e = u
            .iter()
            .min_by_key(|&e| (self.elem_sets[e].iter().filter(|&&s| !self.forbidden[s]).count(), e))
            .expect("nonempty");
        let mut options: Vec<(usize, usize)> = self.elem_sets[e]
            .iter()
            .filter(|&&s| !self.forbidden[s])
            .map(|&s| (s, self.sets[s].1.and_count(u)))
            .collect();
        options.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut banned = Vec::new();
        for (s, _) in options {
            let mut next = u.clone();
            next.and_not_assign(&self.sets[s].1);
            chosen.push(s);
            self.search(&next, chosen);
            chosen.pop();
            if self.aborted {
                break;
            }
            // Later siblings need not use `s`: covers containing it were
            // just explored.
            self.forbidden[s] = true;
            banned.push(s);
        }
        for s in banned {
            self.forbidden[s] = false;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::zoo::{make_group, GroupSpec};

    #[test]
    fn z8_lee_covering_numbers() {
        let g = make_group(&GroupSpec::cyclic_lee(8)).unwrap();
        let x = ElementSet::full(&g);
        let expect = [(0, 8), (1, 3), (2, 2), (3, 2), (4, 1)];
        for (r, n) in expect {
            let d = covering_number(&x, &x, &int(r), Budget::default()).unwrap();
            assert_eq!(d.bound, Bound::Exact(n), "r = {r}");
            assert!(x.is_subset(&d.witness.thicken(&int(r))));
        }
    }

    #[test]
    fn missing_centers_mean_no_cover() {
        let g = make_group(&GroupSpec::cyclic_lee(8)).unwrap();
        let x = ElementSet::from_indices(&g, [0, 4]);
        let y = ElementSet::from_indices(&g, [0]);
        assert!(matches!(
            covering_number(&x, &y, &int(1), Budget::default()),
            Err(Error::NoCover { element: 4 })
        ));
        let d = covering_number(&ElementSet::empty(&g), &ElementSet::empty(&g), &int(1), Budget::default()).unwrap();
        assert_eq!(d.bound, Bound::Exact(0));
    }

    #[test]
    fn long_cycle_cover_is_settled_by_counting() {
        let g = make_group(&GroupSpec::cyclic_lee(256)).unwrap();
        let x = ElementSet::full(&g);
        let d = covering_number(&x, &x, &int(1), Budget(10_000)).unwrap();
        assert_eq!(d.bound, Bound::Exact(86));
    }
}
