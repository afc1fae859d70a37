use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt::Write;

use super::{covering_number, packing_number, Budget, Discretisation};
use crate::error::{Error, Result};
use crate::group::ElementSet;
use crate::rational::{self, Rational};

/// Positive radii `r_0 >= r_1 >= ...` with `2 r_i <= r_{i-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleLadder {
    radii: Vec<Rational>,
}

impl ScaleLadder {
    pub fn new(radii: Vec<Rational>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidLadder("no radii".into()));
        }
        if let Some(r) = radii.iter().find(|r| **r <= rational::zero()) {
            return Err(Error::InvalidLadder(format!("radius {} is not positive", rational::display(r))));
        }
        for (i, w) in radii.windows(2).enumerate() {
            if &w[1] * rational::int(2) > w[0] {
                return Err(Error::InvalidLadder(format!(
                    "2 * r_{} = {} exceeds r_{} = {}",
                    i + 1,
                    rational::display(&(&w[1] * rational::int(2))),
                    i,
                    rational::display(&w[0])
                )));
            }
        }
        Ok(ScaleLadder { radii })
    }

    /// Parses a comma-separated list such as `1,1/2,0.25`.
    pub fn parse(s: &str) -> Result<Self> {
        let radii = s.split(',').map(rational::parse).collect::<Result<Vec<_>>>()?;
        Self::new(radii)
    }

    pub fn radii(&self) -> &[Rational] {
        &self.radii
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }
}

impl Serialize for ScaleLadder {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational::json_vec::serialize(&self.radii, s)
    }
}

impl<'de> Deserialize<'de> for ScaleLadder {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let radii = rational::json_vec::deserialize(d)?;
        ScaleLadder::new(radii).map_err(serde::de::Error::custom)
    }
}

/// One radius of a [`scale_profile`].
#[derive(Clone, Debug, Serialize)]
pub struct ProfileRow {
    #[serde(with = "rational::json")]
    pub radius: Rational,
    pub packing: Discretisation,
    pub covering: Discretisation,
    /// `ln N_r(X) / ln(1/r)`; absent when `r >= 1`, `N_r(X) = 0` or the
    /// packing number is not exact.
    pub mb_approx: Option<f64>,
}

/// Packing number `N_r(X)`, covering number `N^cov_r(X/Y)` and the
/// Minkowski–Bouligand approximation at every radius of the ladder.
pub fn scale_profile(x: &ElementSet, y: &ElementSet, ladder: &ScaleLadder, budget: Budget) -> Result<Vec<ProfileRow>> {
    ladder
        .radii()
        .iter()
        .map(|r| {
            let packing = packing_number(x, r, budget);
            let covering = covering_number(x, y, r, budget)?;
            let mb_approx = match packing.value() {
                Some(n) if n > 0 && *r < rational::one() => {
                    Some((n as f64).ln() / (1.0 / rational::to_f64(r)).ln())
                }
                _ => None,
            };
            Ok(ProfileRow { radius: r.clone(), packing, covering, mb_approx })
        })
        .collect()
}

/// CSV with header `radius_num,radius_den,packing,covering,mb_approx`.
///
/// Interval results print as `lower..upper`; an undefined `mb_approx` is empty.
pub fn profile_csv(rows: &[ProfileRow]) -> String {
    let mut out = String::from("radius_num,radius_den,packing,covering,mb_approx\n");
    for row in rows {
        let mb = row.mb_approx.map(|v| format!("{v:.6}")).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{}",
            row.radius.numer(),
            row.radius.denom(),
            row.packing.bound,
            row.covering.bound,
            mb
        )
        .unwrap();
    }
    out
}
