//! Growth in doubling scales: the per-scale predicate
//! `N_{r_i}(X^9) <= k_i N_{9 r_i}(X)` and the constructive scale selection.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Pow};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::cover::is_metric_approx_subgroup;
use crate::discretisation::{packing_number, Budget, ScaleLadder};
use crate::error::{Error, Result};
use crate::group::{lipschitz_constant, ElementSet};
use crate::rational::{self, int, Rational};
use crate::report::{rat, Report};

/// Target `factor · root_of^(1/root)` for one scale.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthTarget {
    #[serde(with = "rational::json")]
    pub factor: Rational,
    #[serde(with = "rational::json")]
    pub root_of: Rational,
    pub root: u32,
}

impl GrowthTarget {
    pub fn plain(k: Rational) -> Self {
        GrowthTarget { factor: k, root_of: rational::one(), root: 1 }
    }

    /// Exact test of `lhs <= target · rhs`, comparing `root`-th powers.
    pub fn admits(&self, lhs: usize, rhs: usize) -> bool {
        let n = self.root;
        let l = int(lhs as i64).pow(n);
        let r = Pow::pow(&self.factor * int(rhs as i64), n) * &self.root_of;
        l <= r
    }
}

/// Per-scale evaluation of `N_{r_i}(X^9) <= target_i · N_{9 r_i}(X)`.
#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    #[serde(with = "rational::json_vec")]
    pub radii: Vec<Rational>,
    pub packing_x9: Vec<usize>,
    pub packing_x_9r: Vec<usize>,
    /// `N_{r_i}(X^9) / N_{9 r_i}(X)`; absent when `X` is empty.
    pub k_bounds: Vec<Option<serde_json::Value>>,
    pub targets: Vec<GrowthTarget>,
    pub passed: Vec<bool>,
}

impl GrowthReport {
    pub fn all_passed(&self) -> bool {
        self.passed.iter().all(|&p| p)
    }
}

fn evaluate(x: &ElementSet, radii: &[Rational], targets: Vec<GrowthTarget>, budget: Budget) -> Result<GrowthReport> {
    let x9 = x.power(9);
    let counts: Vec<(usize, usize)> = radii
        .par_iter()
        .map(|r| {
            let a = packing_number(&x9, r, budget).exact()?;
            let b = packing_number(x, &(r * int(9)), budget).exact()?;
            Ok((a, b))
        })
        .collect::<Result<_>>()?;
    let k_bounds = counts
        .iter()
        .map(|&(a, b)| (b > 0).then(|| rat(&rational::ratio(a as i64, b as i64))))
        .collect();
    let passed = counts.iter().zip(&targets).map(|(&(a, b), t)| t.admits(a, b)).collect();
    Ok(GrowthReport {
        radii: radii.to_vec(),
        packing_x9: counts.iter().map(|c| c.0).collect(),
        packing_x_9r: counts.iter().map(|c| c.1).collect(),
        k_bounds,
        targets,
        passed,
    })
}

/// Exact growth predicate on every scale of `ladder`; `k_seq` holds one
/// bound per scale, or a single bound used for all of them.
pub fn growth_condition(x: &ElementSet, ladder: &ScaleLadder, k_seq: &[Rational], budget: Budget) -> Result<GrowthReport> {
    let targets: Vec<GrowthTarget> = match k_seq.len() {
        1 => vec![GrowthTarget::plain(k_seq[0].clone()); ladder.len()],
        n if n == ladder.len() => k_seq.iter().cloned().map(GrowthTarget::plain).collect(),
        n => {
            return Err(Error::Spec(format!(
                "{n} growth bounds given for a ladder of {} scales",
                ladder.len()
            )))
        }
    };
    evaluate(x, ladder.radii(), targets, budget)
}

/// Largest dyadic `p / 2^prec <= 2^(-num/den)`.
pub fn dyadic_power_floor(num: u64, den: u32, prec: u32) -> Rational {
    if num.is_multiple_of(den as u64) {
        return rational::dyadic((num / den as u64) as u32);
    }
    // floor(2^(prec - num/den)) = floor((2^(den*prec - num))^(1/den)).
    let exponent = den as u64 * prec as u64 - num;
    let radicand = BigUint::one() << exponent;
    let root = radicand.nth_root(den);
    Rational::new(BigInt::from(root), BigInt::one() << prec)
}

/// Output of [`select_scales`].
#[derive(Clone, Debug, Serialize)]
pub struct ScaleSelection {
    #[serde(with = "rational::json_vec")]
    pub scales: Vec<Rational>,
    pub growth: GrowthReport,
    pub report: Report,
}

/// Extra bits of precision (beyond `2^-m`) for irrational powers of `α`.
const GUARD_BITS: u32 = 40;

/// Finds `n` doubling scales with `N_{r_i}(X^9) <= k^8 C^(1/n) N_{9 r_i}(X)`.
///
/// Gates: `X` symmetric with 1; with `l = max(1, Lip(X, 1))` and
/// `s = l^{[8]}`, `2^m >= (18 (1 + s))^(2n)`; `X` is a `(k, 2^-m)`-metric
/// approximate subgroup; `N_{2^-m}(X) <= C N_1(X)`.
///
/// With `α = 2^(m/2n)` the radii `ρ_i = α^-i` (`i = 0..=2n`) are exact
/// when `2n | im` and dyadic lower approximants with `m + 40` bits
/// otherwise, used consistently on both sides of every comparison. The
/// first `n` indices `i` with `N_{ρ_i}^n <= C N_{ρ_{i-1}}^n` give
/// `r_j = 2 (s 2^-m + ρ_{i_j})`.
pub fn select_scales(x: &ElementSet, m: u32, n: u32, k: usize, c: &Rational, budget: Budget) -> Result<ScaleSelection> {
    if n == 0 || k == 0 || m == 0 {
        return Err(Error::Spec("select_scales needs m, n, k >= 1".into()));
    }
    let mut rep = Report::new("N_(r_i)(X^9) <= k^8 C^(1/n) N_(9 r_i)(X) with 2 r_(i+1) <= r_i <= 1");
    let empty = |rep: Report| ScaleSelection {
        scales: Vec::new(),
        growth: GrowthReport {
            radii: Vec::new(),
            packing_x9: Vec::new(),
            packing_x_9r: Vec::new(),
            k_bounds: Vec::new(),
            targets: Vec::new(),
            passed: Vec::new(),
        },
        report: rep,
    };

    let symmetric = x.is_symmetric();
    rep.gate_value("symmetric", symmetric);
    if !symmetric {
        rep.set_gate(false);
        return Ok(empty(rep));
    }
    let one = rational::one();
    let lip = lipschitz_constant(x, &one)?.value;
    let l = if lip < one { one.clone() } else { lip };
    let s = rational::geometric_partial_sum(&l, 8);
    let needed = Pow::pow(int(18) * (&s + &one), 2 * n);
    let m_ok = Rational::from_integer(BigInt::one() << m) >= needed;
    rep.gate_value("l", rat(&l)).gate_value("l8", rat(&s)).gate_value("m_bound", m_ok);

    let delta = rational::dyadic(m);
    let approx = is_metric_approx_subgroup(x, k, &delta, budget)?;
    let fine = packing_number(x, &delta, budget).exact()?;
    let coarse = packing_number(x, &one, budget).exact()?;
    let ratio_ok = int(fine as i64) <= c * int(coarse as i64);
    rep.gate_value("approximate_subgroup", approx.holds)
        .gate_value("packing_fine", fine)
        .gate_value("packing_unit", coarse)
        .gate_value("C", rat(c))
        .set_gate(m_ok && approx.holds && ratio_ok);
    if !rep.hypothesis_gate.passed {
        return Ok(empty(rep));
    }

    let prec = m + GUARD_BITS;
    let rho: Vec<Rational> = (0..=2 * n).map(|i| dyadic_power_floor(i as u64 * m as u64, 2 * n, prec)).collect();
    let counts: Vec<usize> = rho
        .par_iter()
        .map(|r| packing_number(x, r, budget).exact())
        .collect::<Result<_>>()?;
    let in_i: Vec<usize> = (1..=2 * n as usize)
        .filter(|&i| {
            let num = int(counts[i] as i64).pow(n);
            let den = c * int(counts[i - 1] as i64).pow(n);
            num <= den
        })
        .collect();
    rep.number("alpha_powers", rho.iter().map(rat).collect::<Vec<_>>())
        .number("packing_at_alpha_powers", counts.clone())
        .number("good_indices", in_i.clone());
    if in_i.len() < n as usize {
        return Err(Error::Internal(format!(
            "only {} of {} ratio indices pass although the gates hold",
            in_i.len(),
            n
        )));
    }
    let offset = &s * &delta;
    let scales: Vec<Rational> = in_i[..n as usize].iter().map(|&i| int(2) * (&offset + &rho[i])).collect();
    let target = GrowthTarget { factor: int(k as i64).pow(8u32), root_of: c.clone(), root: n };
    let growth = evaluate(x, &scales, vec![target; scales.len()], budget)?;

    let mut ok = growth.all_passed();
    for (j, p) in growth.passed.iter().enumerate() {
        if !p {
            rep.witness(json!({"scale": j, "packing_x9": growth.packing_x9[j], "packing_x_9r": growth.packing_x_9r[j]}));
        }
    }
    if scales[0] > one {
        ok = false;
        rep.witness(json!({"scale": 0, "exceeds_one": true}));
    }
    for j in 1..scales.len() {
        if &scales[j] * int(2) > scales[j - 1] {
            ok = false;
            rep.witness(json!({"scale": j, "doubling": false}));
        }
    }
    rep.number("scales", scales.iter().map(rat).collect::<Vec<_>>());
    rep.conclude(ok);
    Ok(ScaleSelection { scales, growth, report: rep })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::report::Status;
    use crate::zoo::{make_group, GroupSpec};

    #[test]
    fn dyadic_floor() {
        assert_eq!(dyadic_power_floor(6, 2, 10), ratio(1, 8));
        // 2^-1/2 = 0.7071..., floor at 4 bits is 11/16.
        assert_eq!(dyadic_power_floor(1, 2, 4), ratio(11, 16));
        let r = dyadic_power_floor(5, 3, 60);
        let f = rational::to_f64(&r);
        assert!((f - 2f64.powf(-5.0 / 3.0)).abs() < 1e-15 && r < Rational::from_float(2f64.powf(-5.0 / 3.0) + 1e-12).unwrap());
    }

    #[test]
    fn targets_compare_roots_exactly() {
        let t = GrowthTarget { factor: int(1), root_of: int(8), root: 3 };
        assert!(t.admits(2, 1));
        assert!(!t.admits(3, 1));
    }

    #[test]
    fn identity_growth() {
        let g = make_group(&GroupSpec::cyclic_lee(8)).unwrap();
        let ladder = ScaleLadder::parse("1,1/2").unwrap();
        let rep = growth_condition(&ElementSet::identity(&g), &ladder, &[int(1)], Budget::default()).unwrap();
        assert!(rep.all_passed());
        assert_eq!(rep.packing_x9, vec![1, 1]);
    }

    #[test]
    fn subgroup_scale_selection() {
        let g = make_group(&GroupSpec::cyclic_lee_scaled(12, int(12))).unwrap();
        let h = ElementSet::from_indices(&g, [0, 4, 8]);
        let sel = select_scales(&h, 15, 1, 1, &int(3), Budget::default()).unwrap();
        assert_eq!(sel.report.status(), Status::Passed, "{:?}", sel.report);
        assert_eq!(sel.scales.len(), 1);
    }
}
