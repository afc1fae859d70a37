//! Seeded instance suites that run every quantitative lemma check on random
//! finite metric groups.
//!
//! Suites are addressed by number (`"1.1"` to `"1.9"`) or by name. Instance
//! `i` of a run is a pure function of `(seed, suite, i)`, so a run does not
//! depend on the thread count and repeats byte for byte.

use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::sync::Arc;

use crate::approx::{
    disjoint_translate_family, discretisation_counting_check, infinitesimal_chain_check, is_metric_approx_subgroup,
    local_packing_check, product_thickening_chain, select_scales,
};
use crate::discretisation::{covering_number, packing_number, Budget, ScaleLadder};
use crate::error::{Error, Result};
use crate::group::{lipschitz_constant, ElementSet, FiniteMetricGroup};
use crate::rational::{self, int, Rational};
use crate::report::{rat, Report, Status};
use crate::zoo::{make_group, Combine, Family, GroupSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Subadditivity,
    Continuity,
    Sandwich,
    LocalPacking,
    Counting,
    Infinitesimals,
    Thickening,
    TranslateFamily,
    ScaleSelection,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::Subadditivity,
        Suite::Continuity,
        Suite::Sandwich,
        Suite::LocalPacking,
        Suite::Counting,
        Suite::Infinitesimals,
        Suite::Thickening,
        Suite::TranslateFamily,
        Suite::ScaleSelection,
    ];

    fn position(self) -> usize {
        Suite::ALL.iter().position(|&s| s == self).expect("listed")
    }

    pub fn id(self) -> String {
        format!("1.{}", self.position() + 1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Subadditivity => "subadditivity",
            Suite::Continuity => "continuity",
            Suite::Sandwich => "sandwich",
            Suite::LocalPacking => "local-packing",
            Suite::Counting => "counting",
            Suite::Infinitesimals => "infinitesimals",
            Suite::Thickening => "thickening",
            Suite::TranslateFamily => "translate-family",
            Suite::ScaleSelection => "scale-selection",
        }
    }

    /// `"all"`, a number such as `"1.8"`, or a name such as `"sandwich"`.
    pub fn parse(s: &str) -> Result<Vec<Suite>> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Suite::ALL
            .iter()
            .find(|x| x.id() == s || x.name() == s)
            .map(|&x| vec![x])
            .ok_or_else(|| Error::Spec(format!("unknown suite `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InstanceResult {
    pub index: usize,
    /// Group spec, sets (as element indices) and parameters.
    pub instance: Value,
    pub status: Option<Status>,
    pub report: Option<Report>,
    /// Budget exhaustion or another error; the instance then has no status.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub instances: usize,
    pub gate_passed: usize,
    pub passed: usize,
    pub violated: usize,
    pub hypothesis_not_met: usize,
    /// Instances abandoned because the search budget ran out.
    pub inconclusive: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRun {
    pub suite: String,
    pub name: &'static str,
    pub seed: u64,
    pub summary: Summary,
    pub results: Vec<InstanceResult>,
}

impl SuiteRun {
    /// No conclusion violated among gate-passing instances and no errors.
    pub fn ok(&self) -> bool {
        self.summary.violated == 0 && self.summary.errors == 0
    }
}

fn instance_rng(seed: u64, suite: Suite, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((suite.position() as u64) << 40) | index as u64);
    rng
}

/// Runs `count` instances of `suite`.
pub fn run_suite(suite: Suite, seed: u64, count: usize, budget: Budget) -> SuiteRun {
    let results: Vec<InstanceResult> = (0..count)
        .into_par_iter()
        .map(|index| {
            let mut rng = instance_rng(seed, suite, index);
            let mut instance = json!({});
            let out = run_instance(suite, &mut rng, &mut instance, budget);
            let (report, error) = match out {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e)),
            };
            InstanceResult {
                index,
                instance,
                status: report.as_ref().map(Report::status),
                report,
                error: error.map(|e| e.to_string()),
            }
        })
        .collect();
    let mut summary = Summary { instances: count, ..Summary::default() };
    for r in &results {
        match (&r.report, &r.error) {
            (Some(rep), _) => {
                if rep.hypothesis_gate.passed {
                    summary.gate_passed += 1;
                }
                match rep.status() {
                    Status::Passed => summary.passed += 1,
                    Status::Violated => summary.violated += 1,
                    Status::HypothesisNotMet => summary.hypothesis_not_met += 1,
                }
            }
            (None, Some(e)) if e.starts_with("search budget") => summary.inconclusive += 1,
            _ => summary.errors += 1,
        }
    }
    SuiteRun { suite: suite.id(), name: suite.name(), seed, summary, results }
}

fn run_instance(suite: Suite, rng: &mut ChaCha8Rng, desc: &mut Value, budget: Budget) -> Result<Report> {
    match suite {
        Suite::Subadditivity => subadditivity(rng, desc, budget),
        Suite::Continuity => continuity(rng, desc, budget),
        Suite::Sandwich => sandwich(rng, desc, budget),
        Suite::LocalPacking => local_packing(rng, desc, budget),
        Suite::Counting => counting(rng, desc, budget),
        Suite::Infinitesimals => infinitesimals(rng, desc),
        Suite::Thickening => thickening(rng, desc, budget),
        Suite::TranslateFamily => translate_family(rng, desc, budget),
        Suite::ScaleSelection => scale_selection(rng, desc, budget),
    }
}

// Instance generators.

fn random_group_spec(rng: &mut impl Rng) -> GroupSpec {
    match rng.random_range(0..6) {
        0 => GroupSpec::cyclic_lee(rng.random_range(5..=24)),
        1 => GroupSpec::dihedral(rng.random_range(3..=8)),
        2 => GroupSpec::symmetric_hamming(rng.random_range(3..=4)),
        3 => GroupSpec::word_metric(Family::Quaternion, vec![vec![0, 1], vec![1, 1], vec![0, 2], vec![1, 2]]),
        4 => {
            let combine = if rng.random_bool(0.5) { Combine::Max } else { Combine::Sum };
            GroupSpec::product(
                vec![GroupSpec::cyclic_lee(rng.random_range(2..=6)), GroupSpec::cyclic_lee(rng.random_range(2..=6))],
                combine,
            )
        }
        _ => {
            let n = rng.random_range(6..=16);
            GroupSpec::cyclic_lee_scaled(n, int(n as i64 / 2))
        }
    }
}

fn group(spec: &GroupSpec, desc: &mut Value) -> Result<Arc<FiniteMetricGroup>> {
    desc["group"] = serde_json::to_value(spec)?;
    make_group(spec)
}

fn random_subset(g: &Arc<FiniteMetricGroup>, rng: &mut impl Rng, max: usize) -> ElementSet {
    let size = rng.random_range(0..=max.min(g.order()));
    let picks = rand::seq::index::sample(rng, g.order(), size);
    ElementSet::from_indices(g, picks)
}

fn nonempty_subset(g: &Arc<FiniteMetricGroup>, rng: &mut impl Rng, max: usize) -> ElementSet {
    let mut x = random_subset(g, rng, max);
    if x.is_empty() {
        x.insert(rng.random_range(0..g.order()));
    }
    x
}

fn symmetrized(x: &ElementSet) -> ElementSet {
    let mut s = x.union(&x.inverse());
    s.insert(x.group().identity());
    s
}

/// A symmetric set containing 1: a ball, a subgroup, a planted progression
/// `D_r(H u gH u g^-1 H)` or a small random set.
fn structured_set(g: &Arc<FiniteMetricGroup>, rng: &mut impl Rng) -> ElementSet {
    let n = g.order();
    match rng.random_range(0..4) {
        0 => ElementSet::ball(g, &random_radius(g, rng)),
        1 => {
            let gens = (0..rng.random_range(1..=2)).map(|_| rng.random_range(0..n));
            ElementSet::from_indices(g, gens).generated_subgroup()
        }
        2 => {
            let h = ElementSet::from_indices(g, [rng.random_range(0..n)]).generated_subgroup();
            let t = rng.random_range(0..n);
            let u = h.union(&h.left_translate(t)).union(&h.left_translate(g.inv(t)));
            let small = g.distances().get(1).cloned().unwrap_or_else(rational::zero);
            let r = if rng.random_bool(0.5) { small } else { rational::zero() };
            symmetrized(&symmetrized(&u).thicken(&r))
        }
        _ => symmetrized(&random_subset(g, rng, 6)),
    }
}

/// A distance value of the group, or the midpoint between two consecutive ones.
fn random_radius(g: &FiniteMetricGroup, rng: &mut impl Rng) -> Rational {
    let d = g.distances();
    let j = rng.random_range(0..d.len());
    if j + 1 < d.len() && rng.random_bool(0.3) {
        (&d[j] + &d[j + 1]) / int(2)
    } else {
        d[j].clone()
    }
}

fn positive_radius(g: &FiniteMetricGroup, rng: &mut impl Rng) -> Rational {
    let r = random_radius(g, rng);
    if r.is_zero() {
        g.distances().get(1).cloned().unwrap_or_else(rational::one)
    } else {
        r
    }
}

fn packing(x: &ElementSet, r: &Rational, budget: Budget) -> Result<usize> {
    packing_number(x, r, budget).exact()
}

fn covering(x: &ElementSet, y: &ElementSet, r: &Rational, budget: Budget) -> Result<usize> {
    covering_number(x, y, r, budget)?.exact()
}

/// Named comparisons collected into one report.
struct Checks {
    rep: Report,
    ok: bool,
}

impl Checks {
    fn new(claim: &str) -> Self {
        Checks { rep: Report::new(claim), ok: true }
    }

    fn le(&mut self, name: &str, lhs: usize, rhs: usize) {
        self.record(name, lhs, rhs, lhs <= rhs);
    }

    fn eq(&mut self, name: &str, lhs: usize, rhs: usize) {
        self.record(name, lhs, rhs, lhs == rhs);
    }

    fn record(&mut self, name: &str, lhs: usize, rhs: usize, holds: bool) {
        self.rep.number(name, json!([lhs, rhs]));
        if !holds {
            self.ok = false;
            self.rep.witness(json!({"check": name, "lhs": lhs, "rhs": rhs}));
        }
    }

    fn finish(mut self) -> Report {
        self.rep.conclude(self.ok);
        self.rep
    }
}

// Suites.

fn subadditivity(rng: &mut ChaCha8Rng, desc: &mut Value, budget: Budget) -> Result<Report> {
    let g = group(&random_group_spec(rng), desc)?;
    let x1 = random_subset(&g, rng, 10);
    let x2 = random_subset(&g, rng, 10);
    let u = x1.union(&x2);
    let y = u.union(&random_subset(&g, rng, 6));
    let y2 = y.union(&random_subset(&g, rng, 6));
    let r = random_radius(&g, rng);
    let r2 = (&r).max(&random_radius(&g, rng)).clone();
    desc["X1"] = json!(x1.to_vec());
    desc["X2"] = json!(x2.to_vec());
    desc["Y"] = json!(y.to_vec());
    desc["Y2"] = json!(y2.to_vec());
    desc["r"] = rat(&r);
    desc["r2"] = rat(&r2);

    let mut c = Checks::new("N_r and N^cov_r(./Y) are subadditive and monotone");
    let (p1, p2, pu) = (packing(&x1, &r, budget)?, packing(&x2, &r, budget)?, packing(&u, &r, budget)?);
    let (c1, c2, cu) = (covering(&x1, &y, &r, budget)?, covering(&x2, &y, &r, budget)?, covering(&u, &y, &r, budget)?);
    c.le("packing_subadditive", pu, p1 + p2);
    c.le("covering_subadditive", cu, c1 + c2);
    c.le("packing_increasing_in_x", p1, pu);
    c.le("covering_increasing_in_x", c1, cu);
    c.le("packing_decreasing_in_r", packing(&u, &r2, budget)?, pu);
    c.le("covering_decreasing_in_r", covering(&u, &y, &r2, budget)?, cu);
    c.le("covering_decreasing_in_y", covering(&u, &y2, &r, budget)?, cu);
    let empty = x1.is_empty() as usize;
    c.eq("packing_zero_iff_empty", (p1 == 0) as usize, empty);
    c.eq("covering_zero_iff_empty", (c1 == 0) as usize, empty);
    Ok(c.finish())
}

fn continuity(rng: &mut ChaCha8Rng, desc: &mut Value, budget: Budget) -> Result<Report> {
    let g = group(&random_group_spec(rng), desc)?;
    let d = g.distances();
    let j = rng.random_range(0..d.len());
    let r = d[j].clone();
    // Nothing changes strictly between consecutive distance values.
    let eps = if j + 1 < d.len() { (&d[j + 1] - &r) / int(2) } else { rational::one() };
    let x = random_subset(&g, rng, 12);
    let parts: Vec<ElementSet> = (0..4).map(|_| random_subset(&g, rng, 5)).collect();
    let full = ElementSet::full(&g);
    desc["X"] = json!(x.to_vec());
    desc["parts"] = json!(parts.iter().map(ElementSet::to_vec).collect::<Vec<_>>());
    desc["r"] = rat(&r);
    desc["eps"] = rat(&eps);

    let mut c = Checks::new("N_r(X) = sup_(eps>0) N_(r+eps)(X) and N_r(u X_n) = sup_m N_r(u^m X_n)");
    let above = &r + &eps;
    c.eq("packing_right_continuous", packing(&x, &above, budget)?, packing(&x, &r, budget)?);
    c.eq("covering_right_continuous", covering(&x, &full, &above, budget)?, covering(&x, &full, &r, budget)?);
    let mut union = ElementSet::empty(&g);
    let mut sup_p = 0;
    let mut sup_c = 0;
    for p in &parts {
        union = union.union(p);
        let (np, nc) = (packing(&union, &r, budget)?, covering(&union, &full, &r, budget)?);
        c.le("packing_partial_unions_increase", sup_p, np);
        c.le("covering_partial_unions_increase", sup_c, nc);
        sup_p = np;
        sup_c = nc;
    }
    c.eq("packing_union_is_sup", packing(&union, &r, budget)?, sup_p);
    c.eq("covering_union_is_sup", covering(&union, &full, &r, budget)?, sup_c);
    Ok(c.finish())
}

fn sandwich(rng: &mut ChaCha8Rng, desc: &mut Value, budget: Budget) -> Result<Report> {
    let g = group(&random_group_spec(rng), desc)?;
    let y = if rng.random_bool(0.3) { ElementSet::full(&g) } else { nonempty_subset(&g, rng, 16) };
    let members = y.to_vec();
    let size = rng.random_range(0..=members.len().min(14));
    let x = ElementSet::from_indices(&g, members.choose_multiple(rng, size).copied());
    let r = positive_radius(&g, rng);
    desc["X"] = json!(x.to_vec());
    desc["Y"] = json!(y.to_vec());
    desc["r"] = rat(&r);

    let mut c = Checks::new("N_2r(X) <= N^cov_r(X/Y) <= N_r(X) for X ⊆ Y");
    let cov = covering(&x, &y, &r, budget)?;
    c.le("lower", packing(&x, &(&r * int(2)), budget)?, cov);
    c.le("upper", cov, packing(&x, &r, budget)?);
    Ok(c.finish())
}

/// The exact ratio `lhs / rhs` most of the time, so the gate holds with
/// equality; otherwise a random fraction of it, so it may fail.
fn tuned_k(rng: &mut impl Rng, lhs: usize, rhs: usize) -> Rational {
    let exact = Rational::new(BigInt::from(lhs), BigInt::from(rhs.max(1)));
    if rng.random_bool(0.8) {
        exact
    } else {
        exact * Rational::new(BigInt::from(rng.random_range(1..=3)), BigInt::from(4))
    }
}

fn local_packing(rng: &mut ChaCha8Rng, desc: &mut Value, budget: Budget) -> Result<Report> {
    let g = group(&random_group_spec(rng), desc)?;
    let x = if rng.random_bool(0.5) { structured_set(&g, rng) } else { nonempty_subset(&g, rng, 10) };
    let r = random_radius(&g, rng);
    let m = rng.random_range(2..=4u32);
    let lhs = packing(&x.product(&x.inverse()).product(&x), &r, budget)?;
    let rhs = packing(&x, &(&r * int(2 * m as i64 + 1)), budget)?;
    let k = tuned_k(rng, lhs, rhs);
    let family_seed = rng.random();
    desc["X"] = json!(x.to_vec());
    desc["r"] = rat(&r);
    desc["m"] = json!(m);
    desc["k"] = rat(&k);
    desc["family_seed"] = json!(family_seed);
    local_packing_check(&x, &r, m, &k, None, family_seed, budget)
}

fn counting(rng: &mut ChaCha8Rng, desc: &mut Value, budget: Budget) -> Result<Report> {
    let g = group(&random_group_spec(rng), desc)?;
    let x = if rng.random_bool(0.5) { structured_set(&g, rng) } else { nonempty_subset(&g, rng, 10) };
    let members = x.to_vec();
    let size = rng.random_range(0..=members.len());
    let y = ElementSet::from_indices(&g, members.choose_multiple(rng, size).copied());
    let r = positive_radius(&g, rng);
    let lhs = packing(&x.product(&x.inverse()).product(&x), &r, budget)?;
    let rhs = packing(&x, &(&r * int(9)), budget)?;
    let k = tuned_k(rng, lhs, rhs);
    desc["X"] = json!(x.to_vec());
    desc["Y"] = json!(y.to_vec());
    desc["r"] = rat(&r);
    desc["k"] = rat(&k);
    discretisation_counting_check(&x, &y, &r, &k, budget)
}

fn infinitesimals(rng: &mut ChaCha8Rng, desc: &mut Value) -> Result<Report> {
    let g = group(&random_group_spec(rng), desc)?;
    let x = if rng.random_bool(0.5) { structured_set(&g, rng) } else { nonempty_subset(&g, rng, 10) };
    let len = rng.random_range(4..=6);
    let mut radii = vec![g.diameter() * Rational::new(BigInt::from(rng.random_range(1..=4)), BigInt::from(2))];
    while radii.len() < len {
        let q = rng.random_range(2..=4);
        radii.push(radii.last().expect("nonempty") / int(q));
    }
    let ladder = ScaleLadder::new(radii)?;
    let actual = lipschitz_constant(&x, &ladder.radii()[0])?.value;
    let l = match rng.random_range(0..10) {
        0 => &actual / int(2),
        1 => rational::one().max(actual.ceil()),
        _ => actual,
    };
    desc["X"] = json!(x.to_vec());
    desc["ladder"] = json!(ladder.radii().iter().map(rat).collect::<Vec<_>>());
    desc["l"] = rat(&l);
    infinitesimal_chain_check(&ladder, &x, &l)
}

/// Fewest translates of `X D_delta(1)` covering `X^2`.
fn approx_constant(x: &ElementSet, delta: &Rational, budget: Budget) -> Result<usize> {
    let check = is_metric_approx_subgroup(x, usize::MAX, delta, budget)?;
    let cert = check.certificate.ok_or_else(|| Error::Internal("missing cover certificate".into()))?;
    Ok(cert.count.upper())
}

fn thickening(rng: &mut ChaCha8Rng, desc: &mut Value, budget: Budget) -> Result<Report> {
    let g = group(&random_group_spec(rng), desc)?;
    let x = structured_set(&g, rng);
    let delta = random_radius(&g, rng);
    let mut k = approx_constant(&x, &delta, budget)?;
    if k > 1 && rng.random_bool(0.15) {
        k -= 1;
    }
    let r = g.diameter() * int(rng.random_range(1..=4));
    let m = rng.random_range(2..=6u32);
    desc["X"] = json!(x.to_vec());
    desc["delta"] = rat(&delta);
    desc["k"] = json!(k);
    desc["r"] = rat(&r);
    desc["m"] = json!(m);
    product_thickening_chain(&x, k, &delta, m, &r, budget)
}

fn translate_family(rng: &mut ChaCha8Rng, desc: &mut Value, budget: Budget) -> Result<Report> {
    let g = group(&random_group_spec(rng), desc)?;
    let x = structured_set(&g, rng);
    let r = random_radius(&g, rng);
    let n5 = packing(&x.power(5), &r, budget)?;
    let n1 = packing(&x, &r, budget)?;
    let k = n5.div_ceil(n1);
    desc["X"] = json!(x.to_vec());
    desc["r"] = rat(&r);
    desc["k"] = json!(k);
    Ok(disjoint_translate_family(&x, &r, Some(k), budget)?.report)
}

/// Smallest `m` with `2^m >= (18 (1 + l^[8]))^(2n)`.
pub fn minimal_m(l: &Rational, n: u32) -> u32 {
    let s = rational::geometric_partial_sum(l, 8);
    let needed: Rational = Pow::pow(int(18) * (s + rational::one()), 2 * n);
    let mut m = 0u32;
    while Rational::from_integer(BigInt::one() << m) < needed {
        m += 1;
    }
    m
}

/// A group of diameter 1 for the scale selection suite.
fn unit_group(rng: &mut impl Rng, desc: &mut Value) -> Result<Arc<FiniteMetricGroup>> {
    let spec = random_group_spec(rng);
    let raw = make_group(&spec)?;
    let d = raw.diameter().clone();
    let times = |s: Option<Rational>, default: i64| Some(s.unwrap_or_else(|| int(default)) * &d);
    let scaled = match spec {
        GroupSpec::CyclicLee { n, scale } => GroupSpec::CyclicLee { n, scale: times(scale, 1) },
        GroupSpec::Dihedral { n, generators, scale } => GroupSpec::Dihedral { n, generators, scale: times(scale, 1) },
        GroupSpec::SymmetricHamming { m, scale } => GroupSpec::SymmetricHamming { m, scale: times(scale, m as i64) },
        GroupSpec::WordMetric { family, generators, scale } => {
            GroupSpec::WordMetric { family, generators, scale: times(scale, 1) }
        }
        GroupSpec::Product { factors, combine, scale } => GroupSpec::Product { factors, combine, scale: times(scale, 1) },
    };
    let g = group(&scaled, desc)?;
    if g.diameter() != &rational::one() {
        return Err(Error::Internal("rescaled group does not have diameter 1".into()));
    }
    Ok(g)
}

fn scale_selection(rng: &mut ChaCha8Rng, desc: &mut Value, budget: Budget) -> Result<Report> {
    let g = unit_group(rng, desc)?;
    let x = structured_set(&g, rng);
    let n = if rng.random_bool(0.8) { rng.random_range(1..=2u32) } else { 3 };
    let lip = lipschitz_constant(&x, &rational::one())?.value;
    let m = minimal_m(&rational::one().max(lip), n);
    let delta = rational::dyadic(m);
    let k = approx_constant(&x, &delta, budget)?;
    let c = Rational::new(
        BigInt::from(packing(&x, &delta, budget)?),
        BigInt::from(packing(&x, &rational::one(), budget)?),
    );
    desc["X"] = json!(x.to_vec());
    desc["m"] = json!(m);
    desc["n"] = json!(n);
    desc["k"] = json!(k);
    desc["C"] = rat(&c);
    let sel = select_scales(&x, m, n, k, &c, budget)?;
    let mut rep = sel.report;
    if rep.hypothesis_gate.passed && sel.scales.len() != n as usize {
        rep.conclusion.passed = Some(false);
        rep.witness(json!({"scales": sel.scales.len(), "n": n}));
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_and_names() {
        assert_eq!(Suite::parse("1.8").unwrap(), vec![Suite::TranslateFamily]);
        assert_eq!(Suite::parse("sandwich").unwrap(), vec![Suite::Sandwich]);
        assert_eq!(Suite::parse("all").unwrap().len(), 9);
        assert!(Suite::parse("1.10").is_err());
        assert_eq!(Suite::ScaleSelection.id(), "1.9");
    }

    #[test]
    fn minimal_m_matches_log_bound() {
        // l = 1: l^[8] = 8 and 18 * 9 = 162, so m >= 2n log2(162) = 14.68 n.
        assert_eq!(minimal_m(&int(1), 1), 15);
        assert_eq!(minimal_m(&int(1), 2), 30);
    }

    #[test]
    fn every_suite_runs_clean_on_a_few_instances() {
        for s in Suite::ALL {
            let run = run_suite(s, 3, 6, Budget::default());
            assert!(run.ok(), "{} {:?}", s.name(), run.summary);
            assert_eq!(run.summary.errors, 0);
        }
    }

    #[test]
    fn runs_repeat_exactly() {
        let a = serde_json::to_string(&run_suite(Suite::Counting, 9, 5, Budget::default())).unwrap();
        let b = serde_json::to_string(&run_suite(Suite::Counting, 9, 5, Budget::default())).unwrap();
        assert_eq!(a, b);
    }
}
