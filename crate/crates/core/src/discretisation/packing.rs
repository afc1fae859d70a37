//! Maximum `r`-separated subsets as maximum cliques of the compatibility
//! graph (edges between points at distance `> r`).

use super::bits::Bits;
use super::{Bound, Budget, Discretisation};
use crate::group::{ElementSet, FiniteMetricGroup};
use crate::rational::Rational;

/// Inclusion-maximal `r`-separated subset of `X`, scanning `X` in ascending
/// index order and keeping every point at distance `> r` from those kept.
pub fn greedy_separated(x: &ElementSet, r: &Rational) -> ElementSet {
    let g = x.group();
    let rank = g.ball_rank(r);
    let mut kept: Vec<usize> = Vec::new();
    for p in x.iter() {
        if kept.iter().all(|&q| g.dist_rank(q, p) >= rank) {
            kept.push(p);
        }
    }
    ElementSet::from_indices(g, kept)
}

/// Exact packing number `N_r(X)` with a maximum separated witness.
pub fn packing_number(x: &ElementSet, r: &Rational, budget: Budget) -> Discretisation {
    let g = x.group();
    let rank = g.ball_rank(r);
    let greedy = greedy_separated(x, r);
    let elems = x.to_vec();
    let m = elems.len();
    if m == 0 || greedy.len() == m {
        return Discretisation {
            bound: Bound::Exact(greedy.len()),
            witness: greedy,
            nodes: 0,
            budget: budget.0,
        };
    }

    // Relabel vertices by descending degree (ties by index) so the greedy
    // colouring inside the search sees high-degree vertices first.
    let compatible = |a: usize, b: usize| a != b && g.dist_rank(elems[a], elems[b]) >= rank;
    let degree: Vec<usize> = (0..m).map(|a| (0..m).filter(|&b| compatible(a, b)).count()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));
    let mut position = vec![0; m];
    for (v, &a) in order.iter().enumerate() {
        position[a] = v;
    }
    let mut adj = vec![Bits::new(m); m];
    for (v, &a) in order.iter().enumerate() {
        for (w, &b) in order.iter().enumerate() {
            if compatible(a, b) {
                adj[v].set(w);
            }
        }
    }
    let vertex_elems: Vec<usize> = order.iter().map(|&a| elems[a]).collect();
    let initial: Vec<usize> = greedy.iter().map(|p| position[elems.binary_search(&p).unwrap()]).collect();

    let clique = conflict_clique(g, r);
    let mut search = CliqueSearch {
        adj: &adj,
        group: g,
        vertex_elems: &vertex_elems,
        clique: &clique,
        best: initial,
        nodes: 0,
        budget: budget.0,
        aborted: false,
    };
    let full = Bits::full(m);
    let root_upper = search.coloring(&full).1.last().copied().unwrap_or(0).min(search.translate_bound(&full));
    if search.best.len() < root_upper {
        search.expand(&mut Vec::new(), full);
    }
    let witness = ElementSet::from_indices(g, search.best.iter().map(|&v| vertex_elems[v]));
    let bound = if search.aborted {
        Bound::Interval { lower: search.best.len(), upper: root_upper }
    } else {
        Bound::Exact(search.best.len())
    };
    Discretisation { bound, witness, nodes: search.nodes, budget: budget.0 }
}

/// A set `C` containing the identity with pairwise distances `<= r`.
///
/// Every left translate `gC` is again such a set, so an `r`-separated set
/// meets each translate at most once; counting incidences bounds its size by
/// `|P C^-1| / |C|` for any candidate pool `P`.
fn conflict_clique(g: &FiniteMetricGroup, r: &Rational) -> Vec<usize> {
    let rank = g.ball_rank(r);
    let ball: Vec<usize> = (0..g.order()).filter(|&x| g.norm_rank(x) < rank).collect();
    if ball.len() <= 1 || ball.len() > 512 {
        return vec![0];
    }
    // Maximum clique in the conflict graph restricted to the ball, by the
    // same search on the complement relation.
    let n = ball.len();
    let mut adj = vec![Bits::new(n); n];
    for a in 0..n {
        for b in 0..n {
            if a != b && g.dist_rank(ball[a], ball[b]) < rank {
                adj[a].set(b);
            }
        }
    }
    let mut search = CliqueSearch {
        adj: &adj,
        group: g,
        vertex_elems: &ball,
        clique: &[],
        best: vec![0],
        nodes: 0,
        budget: 20_000,
        aborted: false,
    };
    // Restrict to cliques through the identity (index 0 of the ball).
    let mut cur = vec![0];
    search.expand(&mut cur, adj[0].clone());
    search.best.iter().map(|&v| ball[v]).collect()
}

struct CliqueSearch<'a> {
    adj: &'a [Bits],
    group: &'a FiniteMetricGroup,
    vertex_elems: &'a [usize],
    clique: &'a [usize],
    best: Vec<usize>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl CliqueSearch<'_> {
    /// Greedy sequential colouring of `p`; returns vertices ordered by colour
    /// and the colour number of each.
    fn coloring(&self, p: &Bits) -> (Vec<usize>, Vec<usize>) {
        let mut uncolored = p.clone();
        let mut order = Vec::new();
        let mut colors = Vec::new();
        let mut color = 0;
        while !uncolored.is_empty() {
            color += 1;
            let mut q = uncolored.clone();
            while let Some(v) = q.first() {
                q.clear(v);
                q.and_not_assign(&self.adj[v]);
                uncolored.clear(v);
                order.push(v);
                colors.push(color);
            }
        }
        (order, colors)
    }

    fn translate_bound(&self, p: &Bits) -> usize {
        let size = p.count();
        if self.clique.len() < 2 {
            return size;
        }
        let g = self.group;
        let inv: Vec<usize> = self.clique.iter().map(|&c| g.inv(c)).collect();
        let mut hit = Bits::new(g.order());
        for v in p.iter() {
            let e = self.vertex_elems[v];
            for &c in &inv {
                hit.set(g.mul(e, c));
            }
        }
        (hit.count() / self.clique.len()).min(size)
    }

    fn expand(&mut self, cur: &mut Vec<usize>, mut p: Bits) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.aborted = true;
            return;
        }
        if cur.len() + self.translate_bound(&p) <= self.best.len() {
            return;
        }
        let (order, colors) = self.coloring(&p);
        for idx in (0..order.len()).rev() {
            if cur.len() + colors[idx] <= self.best.len() {
                return;
            }
            let v = order[idx];
            cur.push(v);
            let next = p.and(&self.adj[v]);
            if next.is_empty() {
                if cur.len() > self.best.len() {
                    self.best = cur.clone();
                }
            } else {
                self.expand(cur, next);
                if self.aborted {
                    return;
                }
            }
            cur.pop();
            p.clear(v);
        }
    }
}
