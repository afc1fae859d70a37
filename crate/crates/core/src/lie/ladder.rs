//! The ball ladder `B_n = D(0, 17^(-(n+1)/4) eps)`, `U_n = exp(B_n)`, and
//! sampled verification of its six properties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::chart::{Constants, Element, LieChart};
use super::linalg::{expm, logm, powm};
use crate::report::Report;

/// Relative tolerance on every radius comparison.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Counterexamples kept in a report (all are counted).
const MAX_WITNESSES: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallLadder {
    pub eps: f64,
    /// `ρ_n` for `n = 0..=n_max`.
    pub radii: Vec<f64>,
}

impl BallLadder {
    pub fn n_max(&self) -> usize {
        self.radii.len() - 1
    }

    /// `ρ_n = 17^(-(n+1)/4) eps` for any `n`, not only those stored.
    pub fn radius(&self, n: usize) -> f64 {
        self.eps * 17f64.powf(-((n + 1) as f64) / 4.0)
    }
}

pub fn build_ladder(constants: &Constants, n_max: usize) -> BallLadder {
    let mut ladder = BallLadder { eps: constants.eps, radii: Vec::new() };
    ladder.radii = (0..=n_max).map(|n| ladder.radius(n)).collect();
    ladder
}

fn coords(rng: &mut impl Rng, d: usize, r: f64, sphere: bool) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if n > 1e-12 {
            let t = if sphere { r } else { r * rng.random::<f64>().powf(1.0 / d as f64) };
            return v.iter().map(|a| a * t / n).collect();
        }
    }
}

/// Half of the points on the sphere, where the properties are tightest.
fn point(chart: &LieChart, rng: &mut impl Rng, r: f64, i: usize) -> Element {
    chart.element(&coords(rng, chart.dim(), r, i.is_multiple_of(2)))
}

/// Outcome of one sampled case: relative margin `(bound - value) / bound`,
/// or a domain failure.
struct Case {
    margin: f64,
    detail: Value,
}

fn with(mut ctx: Value, key: &str, value: impl Serialize) -> Value {
    ctx[key] = json!(value);
    ctx
}

fn margin(value: f64, bound: f64) -> f64 {
    (bound - value) / bound
}

fn summarize(rep: &mut Report, cases: Vec<Option<Case>>, samples: usize) {
    let mut worst = f64::INFINITY;
    let mut bad = 0usize;
    let mut skipped = 0usize;
    for c in cases {
        let Some(c) = c else {
            skipped += 1;
            continue;
        };
        worst = worst.min(c.margin);
        if !(c.margin >= -MEMBERSHIP_TOL) {
            bad += 1;
            if rep.conclusion.witnesses.len() < MAX_WITNESSES {
                rep.witness(c.detail);
            }
        }
    }
    rep.number("samples", samples)
        .number("counterexamples", bad)
        .number("boundary_skipped", skipped)
        .number("tolerance", MEMBERSHIP_TOL)
        .number("min_margin", if worst.is_finite() { json!(worst) } else { Value::Null });
    rep.conclude(bad == 0);
}

fn norm_of_log(g: &nalgebra::DMatrix<f64>) -> Result<f64, String> {
    logm(g).map(|z| z.norm()).map_err(|e| e.to_string())
}

/// Case for `‖log(g)‖ <= bound`; a domain failure counts as a violation.
fn within(g: &nalgebra::DMatrix<f64>, bound: f64, ctx: Value) -> Case {
    match norm_of_log(g) {
        Ok(v) => Case { margin: margin(v, bound), detail: with(with(ctx, "value", v), "bound", bound) },
        Err(e) => Case { margin: f64::NEG_INFINITY, detail: with(ctx, "error", e) },
    }
}

fn claim(property: u8) -> &'static str {
    match property {
        1 => "U_n is covered by 17^d translates of U_(n+1)",
        2 => "U_(n+1)^2 ⊆ U_n",
        3 => "x^-1 U_(n+1) x ⊆ U_n for x in U_0",
        4 => "[U_n1, U_n2] ⊆ U_n for n <= n1 + n2",
        5 => "x^2 = y^2 with x, y in U_0 implies x = y",
        6 => "U_(n+4) = {x in U_0 : x^17 in U_n}",
        _ => "unknown property",
    }
}

/// Samples property `property` (1 to 6) of the ladder.
///
/// Cases cycle through `n = 0..=n_max` (pairs `(n1, n2)` for property 4).
/// Memberships compare the norm of the principal logarithm with the radius
/// up to the relative tolerance [`MEMBERSHIP_TOL`]. Property 1 builds a
/// maximal `ρ_(n+2)`-separated set `Z` of `B_n` on a grid and checks
/// `|Z| <= 17^d` and `‖(−z)∗x‖ <= ρ_(n+1)` for sampled `x`, which is a
/// probabilistic check of the cover, not a proof.
pub fn verify_property(chart: &LieChart, ladder: &BallLadder, property: u8, samples: usize, seed: u64) -> Report {
    let mut rep = Report::new(claim(property));
    rep.gate_value("eps", ladder.eps).gate_value("n_max", ladder.n_max()).set_gate(true);
    rep.number("property", property);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(property as u64 + 1)));
    let levels = ladder.n_max() + 1;

    match property {
        1 => verify_cover(chart, ladder, samples, &mut rng, &mut rep),
        2 => {
            let pts: Vec<_> = (0..samples)
                .map(|i| {
                    let n = i % levels;
                    let r = ladder.radius(n + 1);
                    (n, point(chart, &mut rng, r, i), point(chart, &mut rng, r, i / 2))
                })
                .collect();
            let cases = pts
                .par_iter()
                .map(|(n, x, y)| Some(within(&(expm(x) * expm(y)), ladder.radius(*n), json!({"n": n}))))
                .collect();
            summarize(&mut rep, cases, samples);
        }
        3 => {
            let pts: Vec<_> = (0..samples)
                .map(|i| {
                    let n = i % levels;
                    (n, point(chart, &mut rng, ladder.radius(0), i), point(chart, &mut rng, ladder.radius(n + 1), i / 2))
                })
                .collect();
            let cases = pts
                .par_iter()
                .map(|(n, x, y)| {
                    let g = expm(&-x) * expm(y) * expm(x);
                    Some(within(&g, ladder.radius(*n), json!({"n": n})))
                })
                .collect();
            summarize(&mut rep, cases, samples);
        }
        4 => {
            let pts: Vec<_> = (0..samples)
                .map(|i| {
                    let k = i % (levels * levels);
                    let (n1, n2) = (k / levels, k % levels);
                    let x = point(chart, &mut rng, ladder.radius(n1), i);
                    let y = point(chart, &mut rng, ladder.radius(n2), i / 2);
                    (n1, n2, x, y)
                })
                .collect();
            let cases = pts
                .par_iter()
                .map(|(n1, n2, x, y)| {
                    let g = expm(x) * expm(y) * expm(&-x) * expm(&-y);
                    Some(within(&g, ladder.radius(n1 + n2), json!({"n1": n1, "n2": n2, "n": n1 + n2})))
                })
                .collect();
            summarize(&mut rep, cases, samples);
        }
        5 => {
            let r0 = ladder.radius(0);
            let pts: Vec<_> = (0..samples).map(|i| point(chart, &mut rng, r0, i)).collect();
            let cases = pts
                .par_iter()
                .map(|x| {
                    // log is injective, so x^2 = y^2 forces x = y once
                    // log(exp(x)^2) = 2x and log(exp(x)) = x on B_0.
                    let g = expm(x);
                    let err = match (logm(&(&g * &g)), logm(&g)) {
                        (Ok(sq), Ok(l)) => ((sq - x * 2.0).norm() / 2.0).max((l - x).norm()),
                        _ => f64::INFINITY,
                    };
                    // Relative to the radius, so it fails once err > tol * ρ_0.
                    Some(Case { margin: -err / r0, detail: json!({"norm": x.norm(), "error": err}) })
                })
                .collect();
            summarize(&mut rep, cases, samples);
        }
        6 => {
            let pts: Vec<_> = (0..samples)
                .map(|i| {
                    let n = i % levels;
                    let r = if i % 2 == 0 {
                        ladder.radius(0)
                    } else {
                        ladder.radius(n + 4) * (0.5 + rng.random::<f64>())
                    };
                    let sphere = i % 4 == 1;
                    let x = chart.element(&coords(&mut rng, chart.dim(), r, sphere || i % 2 == 1));
                    (n, x)
                })
                .collect();
            let cases = pts
                .par_iter()
                .map(|(n, x)| {
                    let small = ladder.radius(n + 4);
                    let nx = x.norm();
                    if (nx - small).abs() <= MEMBERSHIP_TOL * small {
                        return None;
                    }
                    let inside = nx < small;
                    let g17 = powm(&expm(x), 17);
                    let bound = ladder.radius(*n);
                    let ctx = json!({"n": n, "norm": nx, "in_small_ball": inside});
                    Some(match norm_of_log(&g17) {
                        Ok(v) if inside => Case { margin: margin(v, bound), detail: with(ctx, "value", v) },
                        // Outside B_(n+4) the power must leave U_n.
                        Ok(v) => Case { margin: (v - bound) / bound, detail: with(ctx, "value", v) },
                        Err(e) if inside => Case { margin: f64::NEG_INFINITY, detail: with(ctx, "error", e.to_string()) },
                        // An undefined logarithm means the power is not in U_n.
                        Err(_) => Case { margin: f64::INFINITY, detail: ctx },
                    })
                })
                .collect();
            summarize(&mut rep, cases, samples);
        }
        _ => {
            rep.set_gate(false).gate_value("error", format!("no property {property}"));
        }
    }
    rep
}

/// Points of a grid over the unit ball of `R^d`; random points when the
/// grid would be too large.
fn candidates(d: usize, h: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    const LIMIT: usize = 200_000;
    let per_axis = (2.0 / h).ceil() as usize + 1;
    let total = (per_axis as f64).powi(d as i32);
    if total <= LIMIT as f64 {
        let mut out = Vec::new();
        let mut idx = vec![0usize; d];
        loop {
            let p: Vec<f64> = idx.iter().map(|&k| -1.0 + k as f64 * h).collect();
            if p.iter().map(|a| a * a).sum::<f64>() <= 1.0 {
                out.push(p);
            }
            let mut j = 0;
            loop {
                if j == d {
                    return out;
                }
                idx[j] += 1;
                if idx[j] < per_axis {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }
    (0..LIMIT).map(|_| coords(rng, d, 1.0, false)).collect()
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn verify_cover(chart: &LieChart, ladder: &BallLadder, samples: usize, rng: &mut ChaCha8Rng, rep: &mut Report) {
    let d = chart.dim();
    // In units of ρ_n the net is the same for every n.
    let sep = 17f64.powf(-0.5);
    let h = sep / 4.0;
    let mut net: Vec<Vec<f64>> = Vec::new();
    for p in candidates(d, h, rng) {
        if net.iter().all(|z| dist2(z, &p) > sep * sep) {
            net.push(p);
        }
    }
    let bound = 17f64.powi(d as i32);
    rep.number("cover_count", net.len())
        .number("cover_bound", bound)
        .number("net_separation", sep)
        .number("grid_spacing", h);
    let levels = ladder.n_max() + 1;
    let pts: Vec<(usize, Vec<f64>)> = (0..samples).map(|i| (i % levels, coords(rng, d, 1.0, i.is_multiple_of(2)))).collect();
    let cases: Vec<Option<Case>> = pts
        .par_iter()
        .map(|(n, u)| {
            let rho = ladder.radius(*n);
            let x = chart.element(&u.iter().map(|a| a * rho).collect::<Vec<_>>());
            let mut near: Vec<(f64, usize)> = net.iter().enumerate().map(|(i, z)| (dist2(z, u), i)).collect();
            near.sort_by(|a, b| a.0.total_cmp(&b.0));
            let target = ladder.radius(n + 1);
            let mut best: Option<Case> = None;
            for &(_, i) in near.iter().take(4) {
                let z = chart.element(&net[i].iter().map(|a| a * rho).collect::<Vec<_>>());
                let c = within(&(expm(&-z) * expm(&x)), target, json!({"n": n, "center": i}));
                if best.as_ref().is_none_or(|b| c.margin > b.margin) {
                    best = Some(c);
                }
            }
            best
        })
        .collect();
    summarize(rep, cases, samples);
    if (net.len() as f64) > bound {
        rep.conclusion.passed = Some(false);
        rep.witness(json!({"cover_count": net.len(), "cover_bound": bound}));
    }
}
