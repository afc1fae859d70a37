use serde::Serialize;
use std::sync::Arc;

use crate::discretisation::{min_translate_cover, Bound, Budget};
use crate::error::{Error, Result};
use crate::group::{env, ElementSet, Env, FiniteMetricGroup, SetTerm};
use crate::rational::{self, Rational};
use crate::report::{rat, Report};

/// Where the translates of a rough cover may be taken from.
#[derive(Clone, Debug)]
pub enum CenterPool {
    WholeGroup,
    Subset(ElementSet),
    /// Translates `g` with `g B ∩ A` nonempty, i.e. `g ∈ A B^-1` for covered
    /// set `A` and thickened body `B`; these are the only useful ones.
    Intersecting,
}

/// A translate set `Δ` with `base ⊆ Δ · core · D_radius(1)`.
#[derive(Clone, Debug, Serialize)]
pub struct CoverCertificate {
    pub base: SetTerm,
    pub core: SetTerm,
    #[serde(with = "rational::json")]
    pub radius: Rational,
    #[serde(serialize_with = "serialize_set")]
    pub translates: ElementSet,
    /// Minimal number of translates (an interval if the search budget ran out).
    pub count: Bound,
}

fn serialize_set<S: serde::Serializer>(s: &ElementSet, ser: S) -> std::result::Result<S::Ok, S::Error> {
    s.to_vec().serialize(ser)
}

impl CoverCertificate {
    /// Re-evaluates `base ⊆ translates · core · D_radius(1)`.
    pub fn verify(&self, group: &Arc<FiniteMetricGroup>, env: &Env) -> Result<bool> {
        let base = self.base.eval(group, env)?;
        let body = self.core.eval(group, env)?.thicken(&self.radius);
        Ok(base.is_subset(&self.translates.product(&body)))
    }
}

/// Fewest translates of `body · D_radius(1)` covering `base`.
pub fn rough_cover(
    group: &Arc<FiniteMetricGroup>,
    env: &Env,
    base: &SetTerm,
    body: &SetTerm,
    radius: &Rational,
    pool: &CenterPool,
    budget: Budget,
) -> Result<CoverCertificate> {
    let covered = base.eval(group, env)?;
    let core = body.eval(group, env)?;
    if core.is_empty() {
        return Err(Error::Spec(format!("cover body `{body}` is empty")));
    }
    let thick = core.thicken(radius);
    let centers = match pool {
        CenterPool::WholeGroup => ElementSet::full(group),
        CenterPool::Subset(s) => {
            if !s.same_group(&covered) {
                return Err(Error::MixedGroups);
            }
            s.clone()
        }
        CenterPool::Intersecting => covered.product(&thick.inverse()),
    };
    let d = min_translate_cover(&covered, &thick, &centers, budget)?;
    let cert = CoverCertificate {
        base: base.clone(),
        core: body.clone(),
        radius: radius.clone(),
        translates: d.witness,
        count: d.bound,
    };
    if !cert.verify(group, env)? {
        return Err(Error::Internal(format!("cover of `{base}` by `{body}` failed re-verification")));
    }
    Ok(cert)
}

/// Decides `count <= k` from a possibly inexact count.
pub(crate) fn at_most(count: Bound, k: usize, budget: Budget) -> Result<bool> {
    if count.upper() <= k {
        Ok(true)
    } else if count.lower() > k {
        Ok(false)
    } else {
        Err(Error::BudgetExceeded { budget: budget.0, lower: count.lower(), upper: count.upper() })
    }
}

/// Outcome of [`is_metric_approx_subgroup`].
#[derive(Clone, Debug, Serialize)]
pub struct ApproxSubgroupCheck {
    pub holds: bool,
    /// Why the definition fails before any covering is attempted.
    pub reason: Option<String>,
    /// Minimal cover of `X^2` by translates of `X D_r(1)`; also the
    /// counter-evidence when it needs more than `k` translates.
    pub certificate: Option<CoverCertificate>,
    pub k: usize,
    #[serde(with = "rational::json")]
    pub r: Rational,
}

impl ApproxSubgroupCheck {
    pub fn report(&self) -> Report {
        let mut rep = Report::new(format!(
            "X is a ({}, {})-metric approximate subgroup",
            self.k,
            rational::display(&self.r)
        ));
        rep.number("k", self.k).number("r", rat(&self.r));
        if let Some(reason) = &self.reason {
            rep.number("reason", reason.as_str());
        }
        if let Some(cert) = &self.certificate {
            rep.number("translates", serde_json::to_value(cert.count).unwrap());
            rep.witness(serde_json::to_value(cert).unwrap());
        }
        rep.conclude(self.holds);
        rep
    }
}

/// Whether `X` is symmetric, contains 1, and `X^2` is covered by at most `k`
/// left translates of `X D_r(1)`.
pub fn is_metric_approx_subgroup(x: &ElementSet, k: usize, r: &Rational, budget: Budget) -> Result<ApproxSubgroupCheck> {
    let mut check = ApproxSubgroupCheck { holds: false, reason: None, certificate: None, k, r: r.clone() };
    if !x.contains(0) {
        check.reason = Some("identity missing".into());
        return Ok(check);
    }
    if !x.is_symmetric() {
        check.reason = Some("not symmetric".into());
        return Ok(check);
    }
    let g = x.group();
    let e = env([("X", x.clone())]);
    let cert = rough_cover(
        g,
        &e,
        &SetTerm::var("X").pow(2),
        &SetTerm::var("X"),
        r,
        &CenterPool::Intersecting,
        budget,
    )?;
    check.holds = at_most(cert.count, k, budget)?;
    if !check.holds {
        check.reason = Some(format!("needs {} translates", cert.count));
    }
    check.certificate = Some(cert);
    Ok(check)
}

/// Covers in both directions between `X` and `Y` at thickening `r`.
#[derive(Clone, Debug, Serialize)]
pub struct Commensurability {
    /// `X` by translates of `Y D_r(1)`.
    pub x_by_y: CoverCertificate,
    /// `Y` by translates of `X D_r(1)`.
    pub y_by_x: CoverCertificate,
    pub holds: bool,
}

impl Commensurability {
    /// Certified constant: the larger of the two translate counts found.
    pub fn constant(&self) -> usize {
        self.x_by_y.count.upper().max(self.y_by_x.count.upper())
    }
}

/// `(k, r)`-commensurability: each set is covered by at most `k` translates
/// of the other thickened by `r`.
pub fn commensurable(x: &ElementSet, y: &ElementSet, k: usize, r: &Rational, budget: Budget) -> Result<Commensurability> {
    if !x.same_group(y) {
        return Err(Error::MixedGroups);
    }
    let g = x.group();
    let e = env([("X", x.clone()), ("Y", y.clone())]);
    let (vx, vy) = (SetTerm::var("X"), SetTerm::var("Y"));
    let x_by_y = rough_cover(g, &e, &vx, &vy, r, &CenterPool::Intersecting, budget)?;
    let y_by_x = rough_cover(g, &e, &vy, &vx, r, &CenterPool::Intersecting, budget)?;
    let holds = at_most(x_by_y.count, k, budget)? && at_most(y_by_x.count, k, budget)?;
    Ok(Commensurability { x_by_y, y_by_x, holds })
}
