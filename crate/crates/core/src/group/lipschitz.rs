use serde::Serialize;

use super::ElementSet;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Smallest `l` such that right translation by every `x` in `X` is
/// `l`-Lipschitz on the ball `D_r(1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Lipschitz {
    #[serde(with = "rational::json")]
    pub value: Rational,
    /// `(x, a, b)` attaining the maximum of `d(ax, bx) / d(a, b)`; absent when
    /// the ball has fewer than two points.
    pub witness: Option<(usize, usize, usize)>,
}

/// Exact Lipschitz constant of right translations by members of `x` on `D_r(1)`.
///
/// Uses `d(ax, bx) = |x^-1 (a^-1 b) x|` and `d(a, b) = |a^-1 b|`, so the
/// maximum runs over `c` in `B^-1 B \ {1}` rather than over pairs. Returns
/// zero when `D_r(1)` is a single point.
pub fn lipschitz_constant(x: &ElementSet, r: &Rational) -> Result<Lipschitz> {
    if x.is_empty() {
        return Err(Error::EmptyLipschitz);
    }
    let g = x.group();
    let ball = ElementSet::ball(g, r);
    if ball.len() < 2 {
        return Ok(Lipschitz { value: rational::zero(), witness: None });
    }
    let diffs = ball.inverse().product(&ball);
    let dists = g.distances();
    let mut best: Option<(Rational, usize, usize)> = None;
    for c in diffs.iter().filter(|&c| c != 0) {
        let denom = &dists[g.norm_rank(c) as usize];
        for xi in x.iter() {
            let num = &dists[g.norm_rank(g.conj(c, xi)) as usize];
            let q = num / denom;
            if best.as_ref().is_none_or(|(b, _, _)| &q > b) {
                best = Some((q, xi, c));
            }
        }
    }
    let (value, xi, c) = best.expect("ball has a non-identity difference");
    // Recover a pair a, b in the ball with a^-1 b = c.
    let a = ball
        .iter()
        .find(|&a| ball.contains(g.mul(a, c)))
        .expect("c lies in B^-1 B");
    Ok(Lipschitz { value, witness: Some((xi, a, g.mul(a, c))) })
}
