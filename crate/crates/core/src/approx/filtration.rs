//! Exact checker for the seven properties of a filtration
//! `X_N ⊆ ... ⊆ X_0 ⊆ X^8`.

use serde::Serialize;
use serde_json::{json, Value};

use super::cover::{at_most, commensurable, rough_cover, CenterPool};
use crate::discretisation::Budget;
use crate::error::{Error, Result};
use crate::group::{env, ElementSet, SetTerm};
use crate::rational::{self, Rational};

/// A nested chain `X_0 ⊇ X_1 ⊇ ... ⊇ X_N` of symmetric sets containing 1,
/// with `X_0 ⊆ X^8` for the base set `X`.
#[derive(Clone, Debug)]
pub struct Filtration {
    base: ElementSet,
    chain: Vec<ElementSet>,
    r_s: Rational,
    c: usize,
}

impl Filtration {
    pub fn new(base: ElementSet, chain: Vec<ElementSet>, r_s: Rational, c: usize) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidFiltration(m));
        if chain.is_empty() {
            return bad("empty chain".into());
        }
        if r_s < rational::zero() {
            return bad("negative radius".into());
        }
        for (n, x) in chain.iter().enumerate() {
            if !x.same_group(&base) {
                return Err(Error::MixedGroups);
            }
            if !x.contains(x.group().identity()) {
                return bad(format!("X_{n} does not contain the identity"));
            }
            if !x.is_symmetric() {
                return bad(format!("X_{n} is not symmetric"));
            }
            if n > 0 && !x.is_subset(&chain[n - 1]) {
                return bad(format!("X_{n} is not contained in X_{}", n - 1));
            }
        }
        if !chain[0].is_subset(&base.power(8)) {
            return bad("X_0 is not contained in X^8".into());
        }
        Ok(Filtration { base, chain, r_s, c })
    }

    pub fn base(&self) -> &ElementSet {
        &self.base
    }

    pub fn chain(&self) -> &[ElementSet] {
        &self.chain
    }

    pub fn r_s(&self) -> &Rational {
        &self.r_s
    }

    pub fn c(&self) -> usize {
        self.c
    }

    /// Index `N` of the smallest member.
    pub fn depth(&self) -> usize {
        self.chain.len() - 1
    }
}

/// One instance of a property, e.g. property (2) at `n = 3`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyCase {
    /// Chain indices the case refers to.
    pub indices: Vec<usize>,
    pub passed: bool,
    /// A violating element or pair, or the cover counts for (1) and (3).
    pub witness: Option<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyResult {
    /// `"1_x1"`, `"1_x0"`, `"2"`, ..., `"7"`.
    pub property: String,
    pub description: String,
    /// False only if some case fails; a property with no cases passes.
    pub passed: bool,
    pub cases: Vec<PropertyCase>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiltrationReport {
    pub depth: usize,
    #[serde(with = "rational::json")]
    pub r_s: Rational,
    pub c: usize,
    pub properties: Vec<PropertyResult>,
    pub passed: bool,
}

impl FiltrationReport {
    pub fn property(&self, id: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.property == id)
    }
}

fn property(id: &str, description: &str, cases: Vec<PropertyCase>) -> PropertyResult {
    PropertyResult {
        property: id.to_string(),
        description: description.to_string(),
        passed: cases.iter().all(|c| c.passed),
        cases,
    }
}

/// First element of `a` outside `b`, as a witness.
fn inclusion(indices: Vec<usize>, a: &ElementSet, b: &ElementSet) -> PropertyCase {
    let w = a.first_outside(b);
    PropertyCase { indices, passed: w.is_none(), witness: w.map(|e| json!({ "element": e })) }
}

/// Evaluates all seven properties exactly.
///
/// Property (1) is checked twice, against `X_1` and against `X_0`, since
/// both readings occur; it is skipped for `X_1` when `N = 0`.
pub fn filtration_check(f: &Filtration, budget: Budget) -> Result<FiltrationReport> {
    let g = f.base.group();
    let x = &f.chain;
    let nn = f.depth();
    let r = &f.r_s;
    let thick: Vec<ElementSet> = x.iter().map(|s| s.thicken(r)).collect();
    let mut props = Vec::new();

    let x2 = f.base.power(2);
    for (id, j) in [("1_x1", 1usize), ("1_x0", 0)] {
        let mut cases = Vec::new();
        if j <= nn {
            let cm = commensurable(&x2, &x[j], f.c, r, budget)?;
            cases.push(PropertyCase {
                indices: vec![j],
                passed: cm.holds,
                witness: Some(json!({
                    "x2_by_chain": cm.x_by_y.count.to_string(),
                    "chain_by_x2": cm.y_by_x.count.to_string(),
                })),
            });
        }
        let desc = format!("X^2 and X_{j} are (c, r_s)-commensurable");
        props.push(property(id, &desc, cases));
    }

    let cases = (0..nn).map(|n| inclusion(vec![n], &x[n + 1].product(&x[n + 1]), &thick[n])).collect();
    props.push(property("2", "X_(n+1) X_(n+1) ⊆ D_(r_s)(X_n)", cases));

    let mut cases = Vec::new();
    for n in 0..nn {
        let e = env([("A", x[n].clone()), ("B", x[n + 1].clone())]);
        let cert = rough_cover(g, &e, &SetTerm::var("A"), &SetTerm::var("B"), r, &CenterPool::Intersecting, budget)?;
        cases.push(PropertyCase {
            indices: vec![n],
            passed: at_most(cert.count, f.c, budget)?,
            witness: Some(json!({ "translates": cert.count.to_string() })),
        });
    }
    props.push(property("3", "X_n is covered by c translates of D_(r_s)(X_(n+1))", cases));

    let x1 = x.get(1).cloned().unwrap_or_else(|| ElementSet::empty(g));
    let mut cases = Vec::new();
    for n in 0..nn {
        let mut case = PropertyCase { indices: vec![n], passed: true, witness: None };
        'outer: for a in x1.iter() {
            for y in x[n + 1].iter() {
                let z = g.conj(y, a);
                if !thick[n].contains(z) {
                    case.passed = false;
                    case.witness = Some(json!({ "x": a, "y": y, "conjugate": z }));
                    break 'outer;
                }
            }
        }
        cases.push(case);
    }
    props.push(property("4", "x^-1 X_(n+1) x ⊆ D_(r_s)(X_n) for x in X_1", cases));

    let mut cases = Vec::new();
    for n in 0..=nn {
        for n1 in 0..=nn {
            for n2 in 0..=nn {
                if n < n1 + n2 {
                    cases.push(inclusion(vec![n, n1, n2], &x[n1].commutator_set(&x[n2]), &thick[n]));
                }
            }
        }
    }
    props.push(property("5", "[X_n1, X_n2] ⊆ D_(r_s)(X_n) when n < n1 + n2", cases));

    let p17: Vec<usize> = x[0].iter().map(|a| g.pow(a, 17)).collect();
    let mut cases = Vec::new();
    for n in 0..nn {
        let roots = ElementSet::from_indices(g, x[0].iter().zip(&p17).filter(|(_, &p)| x[n].contains(p)).map(|(a, _)| a));
        cases.push(inclusion(vec![n], &roots, &x[n + 1]));
    }
    props.push(property("6", "{x in X_0 : x^17 in X_n} ⊆ X_(n+1)", cases));

    let mut case = PropertyCase { indices: vec![nn], passed: true, witness: None };
    let x0: Vec<usize> = x[0].to_vec();
    'pairs: for &a in &x0 {
        let a2 = g.mul(a, a);
        for &b in &x0 {
            if g.mul(b, b) == a2 {
                let q = g.mul(g.inv(b), a);
                if !thick[nn].contains(q) {
                    case.passed = false;
                    case.witness = Some(json!({ "x": a, "y": b, "quotient": q }));
                    break 'pairs;
                }
            }
        }
    }
    props.push(property("7", "x, y in X_0 with x^2 = y^2 give y^-1 x in D_(r_s)(X_N)", vec![case]));

    let passed = props.iter().all(|p| p.passed);
    Ok(FiltrationReport { depth: nn, r_s: r.clone(), c: f.c, properties: props, passed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use crate::zoo::{make_group, Combine, GroupSpec};

    fn z2_4_z8() -> std::sync::Arc<crate::FiniteMetricGroup> {
        let mut factors = vec![GroupSpec::cyclic_lee(2); 4];
        factors.push(GroupSpec::cyclic_lee(8));
        make_group(&GroupSpec::product(factors, Combine::Sum)).unwrap()
    }

    #[test]
    fn normal_subgroup_passes_everything() {
        let g = make_group(&GroupSpec::symmetric_hamming(3)).unwrap();
        let a3 = ElementSet::from_indices(&g, g.labels().unwrap().iter().enumerate().filter_map(|(i, p)| {
            let inversions = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            (inversions % 2 == 0).then_some(i)
        }));
        assert!(a3.is_subgroup() && a3.len() == 3);
        let f = Filtration::new(a3.clone(), vec![a3.clone(); 3], int(0), 1).unwrap();
        let rep = filtration_check(&f, Budget::default()).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.properties.len(), 8);
    }

    #[test]
    fn corrupted_chain_fails_expected_properties() {
        let g = z2_4_z8();
        let s = ElementSet::from_indices(&g, (0..g.order()).filter(|&i| g.label_of(i).unwrap()[4] == 0));
        let t = g.index_of(&[0, 0, 0, 0, 4]).unwrap();
        let mut sg = s.clone();
        sg.insert(t);
        let f = Filtration::new(sg.clone(), vec![sg.clone(), sg, s], int(0), 1).unwrap();
        let rep = filtration_check(&f, Budget::default()).unwrap();
        let failed: Vec<&str> = rep.properties.iter().filter(|p| !p.passed).map(|p| p.property.as_str()).collect();
        assert_eq!(failed, ["1_x1", "1_x0", "2", "3", "6", "7"]);
    }

    #[test]
    fn invalid_chains_are_rejected() {
        let g = make_group(&GroupSpec::cyclic_lee(8)).unwrap();
        let small = ElementSet::from_indices(&g, [0, 4]);
        let big = ElementSet::from_indices(&g, [0, 2, 4, 6]);
        let err = Filtration::new(big.clone(), vec![small.clone(), big.clone()], int(0), 1);
        assert!(matches!(err, Err(Error::InvalidFiltration(_))));
        let asym = ElementSet::from_indices(&g, [0, 1]);
        assert!(Filtration::new(big.clone(), vec![asym], int(0), 1).is_err());
        assert!(Filtration::new(small.clone(), vec![big], int(0), 1).is_err());
    }
}
