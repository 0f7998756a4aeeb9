//! Root data for GL_n / SL_n, Moy–Prasad lattices at points of the diagonal
//! apartment, torus filtrations and nilpotent sampling.
//!
//! Sign convention: at `x = (x_1..x_n)` the entry `(i, j)` of an element of
//! `g_{x,r}` satisfies `ν(X_ij) + (x_i − x_j) ≥ r`.

mod chevalley;
mod lattice;
mod nilpotent;
mod torus;

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_traits::Zero;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{parse_rational, LocalField, Q};

pub use chevalley::{ad_action, chevalley_ad, chevalley_direct, CartanOrRoot, ChevalleyElement, Root};
pub use lattice::{
    break_set_contains, element_lattice_depth, group_membership, lattice_generators, lattice_membership,
    nilpotent_break, parahoric_membership,
};
pub use nilpotent::{sample_g_x0, sample_nilpotent};
pub use torus::{
    point_in_torus_apartment, stabilizes_filtration, t_perp_decompose, torus_membership, TorusData, TorusSummary,
};

/// Parses a rational literal into the small-rational type used for depths.
pub fn parse_q(text: &str) -> Result<Q> {
    let r = parse_rational(text)?;
    let n: i64 = r.numer().try_into().map_err(|_| Error::Parse { pos: 0, msg: "numerator too large".into() })?;
    let d: i64 = r.denom().try_into().map_err(|_| Error::Parse { pos: 0, msg: "denominator too large".into() })?;
    Ok(Q::new(n, d))
}

pub fn render_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Filtration index `r` or `r+`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Depth {
    pub value: Q,
    pub plus: bool,
}

impl Depth {
    pub fn at(value: Q) -> Self {
        Depth { value, plus: false }
    }

    pub fn plus(value: Q) -> Self {
        Depth { value, plus: true }
    }

    pub fn int(n: i64) -> Self {
        Self::at(Q::from_integer(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Self::at(Q::new(n, d))
    }

    /// Same value with the `+` flag set.
    pub fn to_plus(self) -> Self {
        Depth { plus: true, ..self }
    }

    /// Whether a valuation-type quantity `v` meets this depth.
    pub fn admits(&self, v: Q) -> bool {
        if self.plus {
            v > self.value
        } else {
            v >= self.value
        }
    }
}

impl PartialOrd for Depth {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Depth {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.cmp(&other.value).then(self.plus.cmp(&other.plus))
    }
}

impl fmt::Display for Depth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", render_q(&self.value), if self.plus { "+" } else { "" })
    }
}

#[derive(Serialize, Deserialize)]
struct DepthRepr {
    value: String,
    #[serde(default)]
    plus: bool,
}

impl Serialize for Depth {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DepthRepr { value: render_q(&self.value), plus: self.plus }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Depth {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = DepthRepr::deserialize(d)?;
        let value = parse_q(&r.value).map_err(serde::de::Error::custom)?;
        Ok(Depth { value, plus: r.plus })
    }
}

/// A point of the standard apartment of the diagonal torus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ApartmentPoint {
    coords: Vec<Q>,
}

impl ApartmentPoint {
    pub fn new(coords: Vec<Q>) -> Self {
        ApartmentPoint { coords }
    }

    pub fn origin(n: usize) -> Self {
        ApartmentPoint { coords: vec![Q::zero(); n] }
    }

    pub fn parse(items: &[String]) -> Result<Self> {
        Ok(ApartmentPoint { coords: items.iter().map(|s| parse_q(s)).collect::<Result<Vec<_>>>()? })
    }

    pub fn coords(&self) -> &[Q] {
        &self.coords
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    /// `x_i − x_j`.
    pub fn diff(&self, i: usize, j: usize) -> Q {
        self.coords[i] - self.coords[j]
    }

    /// Translates every coordinate by `c`.
    pub fn translate(&self, c: Q) -> Self {
        ApartmentPoint { coords: self.coords.iter().map(|x| *x + c).collect() }
    }

    pub fn render(&self) -> Vec<String> {
        self.coords.iter().map(render_q).collect()
    }
}

impl Serialize for ApartmentPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.render().serialize(s)
    }
}

impl<'de> Deserialize<'de> for ApartmentPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        ApartmentPoint::parse(&items).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    GL,
    SL,
}

impl std::str::FromStr for GroupKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GL" => Ok(GroupKind::GL),
            "SL" => Ok(GroupKind::SL),
            other => Err(Error::Config(format!("unknown group kind {other}"))),
        }
    }
}

/// `GL_n` or `SL_n` over a local field `k`.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub n: usize,
    pub field: Arc<LocalField>,
}

impl GroupSpec {
    pub fn new(kind: GroupKind, n: usize, field: Arc<LocalField>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGroup(format!("rank parameter n = {n} must be at least 2")));
        }
        if kind == GroupKind::SL && field.p() <= n as u64 {
            return Err(Error::InvalidGroup(format!(
                "SL_{n} needs p > n for a nondegenerate trace form, got p = {}",
                field.p()
            )));
        }
        Ok(GroupSpec { kind, n, field })
    }

    pub fn gl(n: usize, field: Arc<LocalField>) -> Result<Self> {
        Self::new(GroupKind::GL, n, field)
    }
}

pub(crate) fn floor_q(q: Q) -> i64 {
    q.floor().to_integer()
}

pub(crate) fn ceil_q(q: Q) -> i64 {
    q.ceil().to_integer()
}

/// Smallest integer `m` with `m + c` meeting `d` (i.e. `≥ d.value`, or `>` when plus).
pub(crate) fn min_exponent(d: Depth, c: Q) -> i64 {
    let t = d.value - c;
    if d.plus {
        floor_q(t) + 1
    } else {
        ceil_q(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_order() {
        let a = Depth::int(1);
        assert!(a < a.to_plus());
        assert!(a.to_plus() < Depth::ratio(3, 2));
        assert!(Depth::plus(Q::new(-1, 2)) > Depth::ratio(-1, 2));
        assert_eq!(a.to_plus().to_string(), "1+");
    }

    #[test]
    fn depth_json() {
        let d: Depth = serde_json::from_str(r#"{"value":"-1/2","plus":true}"#).unwrap();
        assert_eq!(d, Depth::plus(Q::new(-1, 2)));
        assert_eq!(serde_json::to_string(&d).unwrap(), r#"{"value":"-1/2","plus":true}"#);
    }

    #[test]
    fn exponents() {
        assert_eq!(min_exponent(Depth::int(0), Q::new(1, 2)), 0);
        assert_eq!(min_exponent(Depth::int(0), Q::new(-1, 2)), 1);
        assert_eq!(min_exponent(Depth::plus(Q::from_integer(1)), Q::zero()), 2);
    }

    #[test]
    fn sl_needs_large_p() {
        let f = LocalField::qp(3, 20).unwrap();
        assert!(GroupSpec::new(GroupKind::SL, 3, f.clone()).is_err());
        assert!(GroupSpec::new(GroupKind::GL, 3, f).is_ok());
    }
}
