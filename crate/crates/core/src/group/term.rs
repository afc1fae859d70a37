//! Set expressions such as `X^9`, `X*inv(X)*X`, `D[1/2](X)` or `[X_1, X_2]`.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! term   := factor ('*' factor)*
//! factor := atom ('^' '-'? digits)?
//! atom   := name | '1' | '(' term ')' | 'inv(' term ')'
//!         | 'D[' rational '](' term ')' | '[' term ',' term ']'
//!         | 'conj(' term ',' term ')'
//! ```
//!
//! `conj(Y, X)` denotes `Y^X = {x^-1 y x}` and `[X, Y]` the commutator set.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::{ElementSet, FiniteMetricGroup};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use num_traits::Signed;

pub type Env = BTreeMap<String, ElementSet>;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SetTerm {
    Var(String),
    /// `{1}`.
    Identity,
    Product(Box<SetTerm>, Box<SetTerm>),
    Inverse(Box<SetTerm>),
    Power(Box<SetTerm>, i64),
    Thicken(Box<SetTerm>, Rational),
    Commutator(Box<SetTerm>, Box<SetTerm>),
    /// `Y^X` with `set = Y`, `by = X`.
    Conjugate { set: Box<SetTerm>, by: Box<SetTerm> },
}

impl SetTerm {
    pub fn var(name: &str) -> SetTerm {
        SetTerm::Var(name.to_string())
    }

    pub fn times(self, rhs: SetTerm) -> SetTerm {
        SetTerm::Product(Box::new(self), Box::new(rhs))
    }

    pub fn pow(self, n: i64) -> SetTerm {
        SetTerm::Power(Box::new(self), n)
    }

    pub fn inv(self) -> SetTerm {
        SetTerm::Inverse(Box::new(self))
    }

    pub fn thicken(self, r: Rational) -> SetTerm {
        SetTerm::Thicken(Box::new(self), r)
    }

    pub fn commutator(self, rhs: SetTerm) -> SetTerm {
        SetTerm::Commutator(Box::new(self), Box::new(rhs))
    }

    pub fn conjugate(self, by: SetTerm) -> SetTerm {
        SetTerm::Conjugate { set: Box::new(self), by: Box::new(by) }
    }

    pub fn parse(src: &str) -> Result<SetTerm> {
        let mut p = Parser { src: src.as_bytes(), pos: 0 };
        let t = p.term()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing input"));
        }
        Ok(t)
    }

    /// Variables referenced by the term, sorted.
    pub fn variables(&self) -> Vec<String> {
        fn walk(t: &SetTerm, out: &mut Vec<String>) {
            match t {
                SetTerm::Var(v) => out.push(v.clone()),
                SetTerm::Identity => {}
                SetTerm::Inverse(a) | SetTerm::Power(a, _) | SetTerm::Thicken(a, _) => walk(a, out),
                SetTerm::Product(a, b) | SetTerm::Commutator(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                SetTerm::Conjugate { set, by } => {
                    walk(set, out);
                    walk(by, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }

    /// Evaluates the term over `group`; every variable must be bound in `env`
    /// to a set of that same group.
    pub fn eval(&self, group: &Arc<FiniteMetricGroup>, env: &Env) -> Result<ElementSet> {
        for v in self.variables() {
            let set = env.get(&v).ok_or_else(|| Error::UnboundVariable(v.clone()))?;
            if !Arc::ptr_eq(set.group(), group) {
                return Err(Error::MixedGroups);
            }
        }
        Ok(self.eval_unchecked(group, env))
    }

    fn eval_unchecked(&self, group: &Arc<FiniteMetricGroup>, env: &Env) -> ElementSet {
        match self {
            SetTerm::Var(v) => env[v].clone(),
            SetTerm::Identity => ElementSet::identity(group),
            SetTerm::Product(a, b) => a.eval_unchecked(group, env).product(&b.eval_unchecked(group, env)),
            SetTerm::Inverse(a) => a.eval_unchecked(group, env).inverse(),
            SetTerm::Power(a, n) => a.eval_unchecked(group, env).power(*n),
            SetTerm::Thicken(a, r) => a.eval_unchecked(group, env).thicken(r),
            SetTerm::Commutator(a, b) => a
                .eval_unchecked(group, env)
                .commutator_set(&b.eval_unchecked(group, env)),
            SetTerm::Conjugate { set, by } => set
                .eval_unchecked(group, env)
                .conjugate_by(&by.eval_unchecked(group, env)),
        }
    }
}

/// Builds an environment from `(name, set)` pairs.
pub fn env<'a>(pairs: impl IntoIterator<Item = (&'a str, ElementSet)>) -> Env {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

impl fmt::Display for SetTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetTerm::Var(v) => f.write_str(v),
            SetTerm::Identity => f.write_str("1"),
            SetTerm::Product(a, b) => {
                write!(f, "{a}*")?;
                if matches!(**b, SetTerm::Product(..)) {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            SetTerm::Inverse(a) => write!(f, "inv({a})"),
            SetTerm::Power(a, n) => {
                if matches!(**a, SetTerm::Product(..) | SetTerm::Power(..)) {
                    write!(f, "({a})^{n}")
                } else {
                    write!(f, "{a}^{n}")
                }
            }
            SetTerm::Thicken(a, r) => write!(f, "D[{}]({a})", rational::display(r)),
            SetTerm::Commutator(a, b) => write!(f, "[{a},{b}]"),
            SetTerm::Conjugate { set, by } => write!(f, "conj({set},{by})"),
        }
    }
}

impl Serialize for SetTerm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SetTerm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        SetTerm::parse(&s).map_err(serde::de::Error::custom)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!(
            "{what} at offset {} in set term `{}`",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn term(&mut self) -> Result<SetTerm> {
        let mut t = self.factor()?;
        while self.eat(b'*') {
            t = t.times(self.factor()?);
        }
        Ok(t)
    }

    fn factor(&mut self) -> Result<SetTerm> {
        let a = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            if self.src.get(self.pos) == Some(&b'-') {
                self.pos += 1;
            }
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let n: i64 = std::str::from_utf8(&self.src[start..self.pos])
                .ok()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| self.error("expected integer exponent"))?;
            return Ok(a.pow(n));
        }
        Ok(a)
    }

    fn ident(&mut self) -> String {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<SetTerm> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let t = self.term()?;
                self.expect(b')')?;
                Ok(t)
            }
            Some(b'[') => {
                self.pos += 1;
                let a = self.term()?;
                self.expect(b',')?;
                let b = self.term()?;
                self.expect(b']')?;
                Ok(a.commutator(b))
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(SetTerm::Identity)
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let name = self.ident();
                match name.as_str() {
                    "inv" if self.peek() == Some(b'(') => {
                        self.pos += 1;
                        let a = self.term()?;
                        self.expect(b')')?;
                        Ok(a.inv())
                    }
                    "conj" if self.peek() == Some(b'(') => {
                        self.pos += 1;
                        let a = self.term()?;
                        self.expect(b',')?;
                        let b = self.term()?;
                        self.expect(b')')?;
                        Ok(a.conjugate(b))
                    }
                    "D" if self.peek() == Some(b'[') => {
                        self.pos += 1;
                        let start = self.pos;
                        while self.pos < self.src.len() && self.src[self.pos] != b']' {
                            self.pos += 1;
                        }
                        let r = rational::parse(&String::from_utf8_lossy(&self.src[start..self.pos]))?;
                        if r.is_negative() {
                            return Err(self.error("negative thickening radius"));
                        }
                        self.expect(b']')?;
                        self.expect(b'(')?;
                        let a = self.term()?;
                        self.expect(b')')?;
                        Ok(a.thicken(r))
                    }
                    _ => Ok(SetTerm::Var(name)),
                }
            }
            _ => Err(self.error("expected a set term")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use crate::zoo::{make_group, GroupSpec};
    use proptest::prelude::*;

    #[test]
    fn parses_common_shapes() {
        let x = SetTerm::var("X");
        assert_eq!(SetTerm::parse("X^9").unwrap(), x.clone().pow(9));
        assert_eq!(
            SetTerm::parse("X * inv(X) * X").unwrap(),
            x.clone().times(x.clone().inv()).times(x.clone())
        );
        assert_eq!(
            SetTerm::parse("D[1/2](X)").unwrap(),
            x.clone().thicken(ratio(1, 2))
        );
        assert_eq!(
            SetTerm::parse("[X_1, X_2]").unwrap(),
            SetTerm::var("X_1").commutator(SetTerm::var("X_2"))
        );
        assert!(SetTerm::parse("X^").is_err());
        assert!(SetTerm::parse("D[-1](X)").is_err());
    }

    #[test]
    fn evaluation_errors() {
        let g = make_group(&GroupSpec::cyclic_lee(8)).unwrap();
        let other = make_group(&GroupSpec::cyclic_lee(8)).unwrap();
        let t = SetTerm::parse("X*Y").unwrap();
        let e = env([("X", ElementSet::full(&g))]);
        assert!(matches!(t.eval(&g, &e), Err(Error::UnboundVariable(v)) if v == "Y"));
        let e = env([("X", ElementSet::full(&g)), ("Y", ElementSet::full(&other))]);
        assert!(matches!(t.eval(&g, &e), Err(Error::MixedGroups)));
    }

    #[test]
    fn identity_is_idempotent_and_power_zero_is_identity() {
        let g = make_group(&GroupSpec::cyclic_lee(8)).unwrap();
        let e = env([("X", ElementSet::identity(&g)), ("Y", ElementSet::from_indices(&g, [1, 3]))]);
        let xx = SetTerm::parse("X*X").unwrap().eval(&g, &e).unwrap();
        assert_eq!(xx, ElementSet::identity(&g));
        let y0 = SetTerm::parse("Y^0").unwrap().eval(&g, &e).unwrap();
        assert_eq!(y0, ElementSet::identity(&g));
    }

    fn arb_term() -> impl Strategy<Value = SetTerm> {
        let leaf = prop_oneof![
            Just(SetTerm::Identity),
            "[XYZ](_[0-9])?".prop_map(SetTerm::Var),
        ];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.times(b)),
                inner.clone().prop_map(SetTerm::inv),
                (inner.clone(), -3i64..10).prop_map(|(a, n)| a.pow(n)),
                (inner.clone(), 0i64..5, 1i64..5).prop_map(|(a, p, q)| a.thicken(ratio(p, q))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.commutator(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.conjugate(b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(t in arb_term()) {
            prop_assert_eq!(SetTerm::parse(&t.to_string()).unwrap(), t);
        }
    }
}
