//! Executable forms of the quantitative lemmas on discretisation numbers in
//! metric groups. Each check evaluates its hypothesis first and only then
//! the conclusion.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::cover::{at_most, rough_cover, CenterPool};
use crate::discretisation::{covering_number, packing_number, Budget, ScaleLadder};
use crate::error::{Error, Result};
use crate::group::{env, lipschitz_constant, ElementSet, SetTerm};
use crate::rational::{self, int, Rational};
use crate::report::{rat, Report};

fn packing(x: &ElementSet, r: &Rational, budget: Budget) -> Result<usize> {
    packing_number(x, r, budget).exact()
}

fn covering(x: &ElementSet, y: &ElementSet, r: &Rational, budget: Budget) -> Result<usize> {
    covering_number(x, y, r, budget)?.exact()
}

/// `X X^-1 X`.
fn xxinvx(x: &ElementSet) -> ElementSet {
    x.product(&x.inverse()).product(x)
}

/// Output of [`disjoint_translate_family`].
#[derive(Clone, Debug)]
pub struct TranslateFamily {
    pub delta: ElementSet,
    pub lipschitz: Rational,
    pub report: Report,
}

/// Greedy maximal `Δ ⊆ X^4` (ascending index order) whose translates
/// `a D_r(X)` are pairwise disjoint, with the check
/// `X^4 ⊆ Δ X^2 D_{2lr}(1)` for `l` the Lipschitz constant of `X` on
/// `D_{2r}(1)`.
///
/// The inclusion needs `X` symmetric. When `k` is given and
/// `N_r(X^5) <= k N_r(X)`, the check also asserts `|Δ| <= k`.
pub fn disjoint_translate_family(x: &ElementSet, r: &Rational, k: Option<usize>, budget: Budget) -> Result<TranslateFamily> {
    let g = x.group();
    let x2 = x.power(2);
    let x4 = x2.power(2);
    let thick = x.thicken(r);
    let spread = thick.product(&thick.inverse());
    let mut delta = ElementSet::empty(g);
    let mut blocked = ElementSet::empty(g);
    for a in x4.iter() {
        if !blocked.contains(a) {
            delta.insert(a);
            blocked = blocked.union(&spread.left_translate(a));
        }
    }

    let mut rep = Report::new("X^2 is a (k, 2lr)-metric approximate subgroup");
    let symmetric = x.is_symmetric();
    rep.gate_value("symmetric", symmetric);
    let mut gate = symmetric;
    let mut k_gate = false;
    if let Some(k) = k {
        let n5 = packing(&x4.product(x), r, budget)?;
        let n1 = packing(x, r, budget)?;
        k_gate = n5 <= k * n1;
        rep.gate_value("packing_x5", n5)
            .gate_value("packing_x", n1)
            .gate_value("k", k);
        gate &= k_gate;
    }
    rep.set_gate(gate);

    let l = if x.is_empty() { Rational::zero() } else { lipschitz_constant(x, &(r * int(2)))?.value };
    let reach = int(2) * &l * r;
    rep.number("delta", delta.to_vec())
        .number("delta_size", delta.len())
        .number("lipschitz", rat(&l))
        .number("thickening", rat(&reach));
    let covered = delta.product(&x2).thicken(&reach);
    let mut ok = true;
    if let Some(miss) = x4.first_outside(&covered) {
        ok = false;
        rep.witness(json!({"uncovered": miss}));
    }
    if let Some(k) = k {
        if k_gate && delta.len() > k {
            ok = false;
            rep.witness(json!({"delta_size": delta.len(), "k": k}));
        }
    }
    rep.conclude(ok);
    Ok(TranslateFamily { delta, lipschitz: l, report: rep })
}

/// Local packing and covering bounds under
/// `N_r(X X^-1 X) <= k N_{(2m+1)r}(X)`:
/// (1) `N_r(X ∩ D_{mr}(b)) <= k` for every `b ∈ X`;
/// (2) `N^cov_r(Y/X) <= k N^cov_{mr}(Y/X)` for every `Y` in the family
/// (default: 32 random subsets drawn from `seed`).
pub fn local_packing_check(
    x: &ElementSet,
    r: &Rational,
    m: u32,
    k: &Rational,
    family: Option<Vec<ElementSet>>,
    seed: u64,
    budget: Budget,
) -> Result<Report> {
    if m < 2 {
        return Err(Error::Spec("local packing check needs m >= 2".into()));
    }
    let g = x.group();
    let mut rep = Report::new("N_r(X ∩ D_mr(b)) <= k and N^cov_r(Y/X) <= k N^cov_mr(Y/X)");
    let lhs = packing(&xxinvx(x), r, budget)?;
    let rhs = packing(x, &(r * int(2 * m as i64 + 1)), budget)?;
    rep.gate_value("packing_xxinvx", lhs)
        .gate_value("packing_x_wide", rhs)
        .gate_value("k", rat(k))
        .set_gate(int(lhs as i64) <= k * int(rhs as i64));
    rep.number("m", m).number("r", rat(r));
    if !rep.hypothesis_gate.passed {
        return Ok(rep);
    }

    let mr = r * int(m as i64);
    let mut ok = true;
    let mut worst_local = 0;
    for b in x.iter() {
        let local = x.intersection(&ElementSet::ball_around(g, b, &mr));
        let n = packing(&local, r, budget)?;
        worst_local = worst_local.max(n);
        if &int(n as i64) > k {
            ok = false;
            rep.witness(json!({"conclusion": 1, "b": b, "packing": n}));
        }
    }
    let family = family.unwrap_or_else(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let members = x.to_vec();
        (0..32)
            .map(|_| ElementSet::from_indices(g, members.iter().copied().filter(|_| rng.random_bool(0.5))))
            .collect()
    });
    for (i, y) in family.iter().enumerate() {
        if !y.is_subset(x) {
            return Err(Error::Spec(format!("family member {i} is not a subset of X")));
        }
        let fine = covering(y, x, r, budget)?;
        let coarse = covering(y, x, &mr, budget)?;
        if int(fine as i64) > k * int(coarse as i64) {
            ok = false;
            rep.witness(json!({"conclusion": 2, "subset": y.to_vec(), "cover_r": fine, "cover_mr": coarse}));
        }
    }
    rep.number("max_local_packing", worst_local).number("family_size", family.len());
    rep.conclude(ok);
    Ok(rep)
}

/// The sandwich `N^cov_2r(Y/X) <= |Z ∩ D_2r(Y)| <= k N^cov_2r(Y/X)` for an
/// exact `2r`-discretisation `Z` of `X`, under
/// `N_r(X X^-1 X) <= k N_9r(X)`.
pub fn discretisation_counting_check(x: &ElementSet, y: &ElementSet, r: &Rational, k: &Rational, budget: Budget) -> Result<Report> {
    if !y.is_subset(x) {
        return Err(Error::Spec("Y must be a subset of X".into()));
    }
    let mut rep = Report::new("N^cov_2r(Y/X) <= |Z ∩ D_2r(Y)| <= k N^cov_2r(Y/X)");
    let lhs = packing(&xxinvx(x), r, budget)?;
    let rhs = packing(x, &(r * int(9)), budget)?;
    rep.gate_value("packing_xxinvx", lhs)
        .gate_value("packing_x_9r", rhs)
        .gate_value("k", rat(k))
        .set_gate(int(lhs as i64) <= k * int(rhs as i64));
    if !rep.hypothesis_gate.passed {
        return Ok(rep);
    }
    let two_r = r * int(2);
    let z = packing_number(x, &two_r, budget);
    z.exact()?;
    let cover = covering(y, x, &two_r, budget)?;
    let middle = z.witness.intersection(&y.thicken(&two_r)).len();
    rep.number("cover", cover)
        .number("middle", middle)
        .number("upper", rat(&(k * int(cover as i64))))
        .number("discretisation", z.witness.to_vec());
    let ok = cover <= middle && int(middle as i64) <= k * int(cover as i64);
    if !ok {
        rep.witness(json!({"cover": cover, "middle": middle}));
    }
    rep.conclude(ok);
    Ok(rep)
}

/// Thickening radii `s_2 = δ`, `s_{n+1} = δ + l s_n` for `n = 2..=m`
/// (index 0 holds `s_2`); `s_n = l^{[n-1]} δ`.
pub fn thickening_radii(l: &Rational, delta: &Rational, m: u32) -> Vec<Rational> {
    let mut out = Vec::new();
    let mut s = delta.clone();
    for _ in 2..=m {
        out.push(s.clone());
        s = delta + l * &s;
    }
    out
}

/// `X^n ⊆ Δ^{n-1} D_{s_n}(X)` for `n = 2..=m`, where `Δ` is a minimal
/// cover witnessing that `X` is a `(k, δ)`-metric approximate subgroup and
/// `l` is the Lipschitz constant of `X` on `D_r(1)`.
///
/// Gate: `X` symmetric with 1, `|Δ| <= k`, and `l^{[m-2]} δ < r`, which is
/// what the induction step up to `X^m` uses (`s_{m-1} < r`).
pub fn product_thickening_chain(x: &ElementSet, k: usize, delta: &Rational, m: u32, r: &Rational, budget: Budget) -> Result<Report> {
    if m < 2 {
        return Err(Error::Spec("product thickening chain needs m >= 2".into()));
    }
    let g = x.group();
    let mut rep = Report::new("X^n ⊆ Δ^(n-1) D_(s_n)(X) for n <= m, s_2 = δ, s_(n+1) = δ + l s_n");
    rep.number("recurrence", "s_2 = delta, s_(n+1) = delta + l * s_n, i.e. s_n = l^[n-1] delta");
    let symmetric = x.is_symmetric();
    rep.gate_value("symmetric", symmetric);
    if !symmetric {
        rep.set_gate(false);
        return Ok(rep);
    }
    let e = env([("X", x.clone())]);
    let vx = SetTerm::var("X");
    let cert = rough_cover(g, &e, &vx.clone().pow(2), &vx, delta, &CenterPool::Intersecting, budget)?;
    let approx = at_most(cert.count, k, budget)?;
    let l = lipschitz_constant(x, r)?.value;
    let reach = rational::geometric_partial_sum(&l, m - 2) * delta;
    let in_range = &reach < r;
    rep.gate_value("translates", cert.count.upper())
        .gate_value("k", k)
        .gate_value("lipschitz", rat(&l))
        .gate_value("lipschitz_radius", rat(r))
        .gate_value("max_inner_thickening", rat(&reach))
        .set_gate(approx && in_range);
    rep.number("delta", cert.translates.to_vec());
    if !rep.hypothesis_gate.passed {
        return Ok(rep);
    }

    let radii = thickening_radii(&l, delta, m);
    rep.number("thickenings", radii.iter().map(rat).collect::<Vec<_>>());
    let mut power = x.clone();
    let mut translates = ElementSet::identity(g);
    let mut first_failure = None;
    for (n, s) in (2..=m).zip(&radii) {
        power = power.product(x);
        translates = translates.product(&cert.translates);
        let rhs = translates.product(&x.thicken(s));
        if let Some(miss) = power.first_outside(&rhs) {
            first_failure.get_or_insert(n);
            rep.witness(json!({"n": n, "uncovered": miss}));
        }
    }
    rep.number("first_failure", first_failure);
    rep.conclude(first_failure.is_none());
    Ok(rep)
}

/// For a ladder `r_0, ..., r_m` and `X` that is `(l, r_0)`-Lipschitz:
/// `D_{r_{i+1}}(1) D_{r_{i+1}}(1)^-1 ⊆ D_{r_i}(1)` for `i < m`, and
/// `x^-1 D_{r_{i+k}}(1) x ⊆ D_{r_i}(1)` for `x ∈ X`, `i <= m - k`, with
/// `k = max(0, ceil(log2 l))`.
pub fn infinitesimal_chain_check(ladder: &ScaleLadder, x: &ElementSet, l: &Rational) -> Result<Report> {
    let g = x.group();
    let radii = ladder.radii();
    let mut rep = Report::new("D_(r_(i+1)) D_(r_(i+1))^-1 ⊆ D_(r_i) and x^-1 D_(r_(i+k)) x ⊆ D_(r_i)");
    let actual = if x.is_empty() { Rational::zero() } else { lipschitz_constant(x, &radii[0])?.value };
    rep.gate_value("lipschitz", rat(&actual)).gate_value("l", rat(l)).set_gate(&actual <= l);
    let k = rational::ceil_log2(l) as usize;
    rep.number("k", k).number("ladder", radii.iter().map(rat).collect::<Vec<_>>());
    if !rep.hypothesis_gate.passed {
        return Ok(rep);
    }
    let balls: Vec<ElementSet> = radii.iter().map(|r| ElementSet::ball(g, r)).collect();
    let mut ok = true;
    for i in 0..radii.len() - 1 {
        let b = &balls[i + 1];
        if let Some(miss) = b.product(&b.inverse()).first_outside(&balls[i]) {
            ok = false;
            rep.witness(json!({"inclusion": "ball_product", "i": i, "element": miss}));
        }
    }
    for i in 0..radii.len().saturating_sub(k) {
        let small = &balls[i + k];
        for xi in x.iter() {
            let conj = small.conjugate_by(&ElementSet::from_indices(g, [xi]));
            if let Some(miss) = conj.first_outside(&balls[i]) {
                ok = false;
                rep.witness(json!({"inclusion": "conjugation", "i": i, "x": xi, "element": miss}));
            }
        }
    }
    rep.conclude(ok);
    Ok(rep)
}
