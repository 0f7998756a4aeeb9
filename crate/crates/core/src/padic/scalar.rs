use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use super::field::LocalField;
use super::qp::{Ctx, Qp};
use super::Q;
use crate::error::{Error, Result};

/// Valuation of a [`Scalar`] under the normalized `ν` with `ν(p) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Val {
    Finite(Q),
    /// Every carried digit vanishes; the true valuation is at least `bound`.
    ApproxZero { bound: Q },
    /// Exact zero.
    Zero,
}

impl Val {
    pub fn finite(self) -> Option<Q> {
        match self {
            Val::Finite(q) => Some(q),
            _ => None,
        }
    }

    /// Smallest value the true valuation can take.
    pub fn lower_bound(self) -> Option<Q> {
        match self {
            Val::Finite(q) => Some(q),
            Val::ApproxZero { bound } => Some(bound),
            Val::Zero => None,
        }
    }

    /// The valuation, or `InsufficientPrecision` when it is not determined.
    pub fn require(self, what: &str) -> Result<Q> {
        match self {
            Val::Finite(q) => Ok(q),
            Val::ApproxZero { bound } => Err(Error::InsufficientPrecision(format!(
                "{what} vanishes to precision {bound}"
            ))),
            Val::Zero => Err(Error::InsufficientPrecision(format!("{what} is exactly zero"))),
        }
    }

    /// Decides `ν ≥ r` (or `ν > r` when `strict`).
    pub fn at_least(self, r: Q, strict: bool) -> Result<bool> {
        match self {
            Val::Zero => Ok(true),
            Val::Finite(v) => Ok(if strict { v > r } else { v >= r }),
            Val::ApproxZero { bound } => {
                if bound > r || (!strict && bound == r) {
                    Ok(true)
                } else {
                    Err(Error::InsufficientPrecision(format!(
                        "valuation known only to be >= {bound}, compared against {r}"
                    )))
                }
            }
        }
    }
}

/// An element of a [`LocalField`], carried to finite absolute precision.
#[derive(Clone)]
pub struct Scalar {
    field: Arc<LocalField>,
    /// Coordinates on `π^i ζ^j`, index `i*f + j`.
    pub(crate) c: Vec<Qp>,
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

/// Product in the unramified step: `a·b` reduced modulo the ζ-modulus.
fn k_mul(field: &LocalField, a: &[Qp], b: &[Qp]) -> Vec<Qp> {
    let ctx = &field.ctx;
    let f = a.len();
    if f == 1 {
        return vec![a[0].mul(&b[0], ctx)];
    }
    let mut t = vec![Qp::zero(); 2 * f - 1];
    for (i, ai) in a.iter().enumerate() {
        if ai.is_exact_zero() {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            t[i + j] = t[i + j].add(&ai.mul(bj, ctx), ctx);
        }
    }
    for d in (f..2 * f - 1).rev() {
        let lead = std::mem::replace(&mut t[d], Qp::zero());
        if lead.is_exact_zero() {
            continue;
        }
        for j in 0..f {
            let m = &field.modulus_qp[j];
            if !m.is_exact_zero() {
                t[d - f + j] = t[d - f + j].sub(&lead.mul(m, ctx), ctx);
            }
        }
    }
    t.truncate(f);
    t
}

fn k_add(ctx: &Ctx, a: &[Qp], b: &[Qp]) -> Vec<Qp> {
    a.iter().zip(b).map(|(x, y)| x.add(y, ctx)).collect()
}

fn k_sub(ctx: &Ctx, a: &[Qp], b: &[Qp]) -> Vec<Qp> {
    a.iter().zip(b).map(|(x, y)| x.sub(y, ctx)).collect()
}

/// Solves `m x = rhs` over Q_p by elimination with minimal-valuation pivots.
pub(crate) fn qp_solve(ctx: &Ctx, mut m: Vec<Vec<Qp>>, mut rhs: Vec<Qp>) -> Result<Vec<Qp>> {
    let n = rhs.len();
    let mut col_order: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut best: Option<(usize, usize, i64)> = None;
        for i in k..n {
            for j in k..n {
                if let Some(v) = m[i][col_order[j]].val() {
                    if best.is_none_or(|(_, _, bv)| v < bv) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let (pi, pj, _) = best.ok_or(Error::DivisionByApproxZero)?;
        m.swap(k, pi);
        rhs.swap(k, pi);
        col_order.swap(k, pj);
        let pc = col_order[k];
        let pivot_inv = m[k][pc].inv(ctx)?;
        for i in k + 1..n {
            if m[i][pc].is_exact_zero() {
                continue;
            }
            let factor = m[i][pc].mul(&pivot_inv, ctx);
            for j in k..n {
                let cj = col_order[j];
                let t = factor.mul(&m[k][cj], ctx);
                m[i][cj] = m[i][cj].sub(&t, ctx);
            }
            let t = factor.mul(&rhs[k], ctx);
            rhs[i] = rhs[i].sub(&t, ctx);
        }
    }
    let mut x = vec![Qp::zero(); n];
    for k in (0..n).rev() {
        let pc = col_order[k];
        let mut acc = rhs[k].clone();
        for j in k + 1..n {
            let cj = col_order[j];
            acc = acc.sub(&m[k][cj].mul(&x[cj], ctx), ctx);
        }
        x[pc] = acc.div(&m[k][pc], ctx)?;
    }
    Ok(x)
}

impl Scalar {
    pub fn zero(field: &Arc<LocalField>) -> Self {
        Scalar { field: field.clone(), c: vec![Qp::zero(); field.degree()] }
    }

    pub fn one(field: &Arc<LocalField>) -> Self {
        Self::from_int(field, 1)
    }

    pub fn from_int(field: &Arc<LocalField>, n: i64) -> Self {
        let mut s = Self::zero(field);
        s.c[0] = Qp::from_i64(&field.ctx, n);
        s
    }

    pub fn from_bigint(field: &Arc<LocalField>, n: BigInt) -> Self {
        let mut s = Self::zero(field);
        s.c[0] = Qp::from_int(&field.ctx, n);
        s
    }

    /// A rational number; exact when its denominator is a power of p.
    pub fn from_rational(field: &Arc<LocalField>, q: &BigRational) -> Result<Self> {
        let mut s = Self::zero(field);
        s.c[0] = Qp::from_rational(&field.ctx, q.numer(), q.denom())?;
        Ok(s)
    }

    /// `num/den` for small integers.
    pub fn from_ratio(field: &Arc<LocalField>, num: i64, den: i64) -> Result<Self> {
        Self::from_rational(field, &BigRational::new(num.into(), den.into()))
    }

    /// From rational coordinates on the tower basis `π^i ζ^j` (index `i*f + j`).
    pub fn from_coords(field: &Arc<LocalField>, coords: &[BigRational]) -> Result<Self> {
        if coords.len() > field.degree() {
            return Err(Error::Dimension(format!(
                "{} coordinates for a field of degree {}",
                coords.len(),
                field.degree()
            )));
        }
        let mut s = Self::zero(field);
        for (k, q) in coords.iter().enumerate() {
            s.c[k] = Qp::from_rational(&field.ctx, q.numer(), q.denom())?;
        }
        Ok(s)
    }

    /// The uniformizer: `π` for a ramified field, `p` otherwise.
    pub fn uniformizer(field: &Arc<LocalField>) -> Self {
        if field.e() == 1 {
            return Self::from_int(field, field.p() as i64);
        }
        let mut s = Self::zero(field);
        s.c[field.f() as usize] = Qp::from_i64(&field.ctx, 1);
        s
    }

    /// The generator `ζ` of the unramified step.
    pub fn zeta(field: &Arc<LocalField>) -> Self {
        if field.f() == 1 {
            return Self::zero(field);
        }
        let mut s = Self::zero(field);
        s.c[1] = Qp::from_i64(&field.ctx, 1);
        s
    }

    pub(crate) fn from_qp(field: &Arc<LocalField>, q: Qp) -> Self {
        let mut s = Self::zero(field);
        s.c[0] = q;
        s
    }

    pub fn field(&self) -> &Arc<LocalField> {
        &self.field
    }

    pub(crate) fn ctx(&self) -> &Ctx {
        &self.field.ctx
    }

    /// Embeds into `target`, which must be this field or contain it over Q_p.
    pub fn coerce_to(&self, target: &Arc<LocalField>) -> Result<Self> {
        if Arc::ptr_eq(&self.field, target) || *self.field == **target {
            return Ok(Scalar { field: target.clone(), c: self.c.clone() });
        }
        if self.field.is_qp() && self.field.same_tower(target) {
            let mut s = Self::zero(target);
            s.c[0] = self.c[0].clone();
            return Ok(s);
        }
        Err(Error::FieldMismatch(format!("cannot coerce {:?} into {:?}", self.field, target)))
    }

    /// Descends to `Q_p`, failing when a non-base coordinate is nonzero.
    pub fn to_base(&self) -> Result<Self> {
        let base = self.field.base_field();
        for (k, c) in self.c.iter().enumerate().skip(1) {
            if !c.is_zero() {
                return Err(Error::PreconditionViolated(format!(
                    "element {} is not Q_p-rational (coordinate {k} nonzero)",
                    self.render()
                )));
            }
        }
        let mut s = Self::zero(&base);
        s.c[0] = self.c[0].clone();
        Ok(s)
    }

    fn unify(&self, other: &Self) -> (Self, Self) {
        if Arc::ptr_eq(&self.field, &other.field) {
            return (self.clone(), other.clone());
        }
        if let Ok(o) = other.coerce_to(&self.field) {
            return (self.clone(), o);
        }
        if let Ok(s) = self.coerce_to(&other.field) {
            return (s, other.clone());
        }
        panic!("arithmetic between incompatible fields {:?} and {:?}", self.field, other.field)
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.field, &other.field)
            || *self.field == *other.field
            || (self.field.is_qp() && self.field.same_tower(&other.field))
            || (other.field.is_qp() && other.field.same_tower(&self.field))
        {
            Ok(())
        } else {
            Err(Error::FieldMismatch(format!("{:?} vs {:?}", self.field, other.field)))
        }
    }

    fn add_impl(&self, other: &Self) -> Self {
        let (a, b) = self.unify(other);
        let ctx = &a.field.ctx;
        let c = a.c.iter().zip(&b.c).map(|(x, y)| x.add(y, ctx)).collect();
        Scalar { field: a.field, c }
    }

    fn neg_impl(&self) -> Self {
        let ctx = &self.field.ctx;
        Scalar { field: self.field.clone(), c: self.c.iter().map(|x| x.neg(ctx)).collect() }
    }

    fn mul_impl(&self, other: &Self) -> Self {
        let (a, b) = self.unify(other);
        let field = a.field.clone();
        let ctx = &field.ctx;
        let (e, f) = (field.e() as usize, field.f() as usize);
        if e == 1 && f == 1 {
            return Scalar { field: field.clone(), c: vec![a.c[0].mul(&b.c[0], ctx)] };
        }
        if b.is_base_rational() {
            let s = &b.c[0];
            return Scalar { field: field.clone(), c: a.c.iter().map(|x| x.mul(s, ctx)).collect() };
        }
        if a.is_base_rational() {
            let s = &a.c[0];
            return Scalar { field: field.clone(), c: b.c.iter().map(|x| x.mul(s, ctx)).collect() };
        }
        let blk = |s: &Scalar, i: usize| s.c[i * f..(i + 1) * f].to_vec();
        let mut prod: Vec<Vec<Qp>> = vec![vec![Qp::zero(); f]; 2 * e - 1];
        for i in 0..e {
            let ai = blk(&a, i);
            if ai.iter().all(Qp::is_exact_zero) {
                continue;
            }
            for j in 0..e {
                let bj = blk(&b, j);
                if bj.iter().all(Qp::is_exact_zero) {
                    continue;
                }
                let t = k_mul(&field, &ai, &bj);
                prod[i + j] = k_add(ctx, &prod[i + j], &t);
            }
        }
        for d in (e..2 * e - 1).rev() {
            let lead = std::mem::replace(&mut prod[d], vec![Qp::zero(); f]);
            if lead.iter().all(Qp::is_exact_zero) {
                continue;
            }
            for k in 0..e {
                let t = k_mul(&field, &lead, &field.eisenstein[k]);
                prod[d - e + k] = k_sub(ctx, &prod[d - e + k], &t);
            }
        }
        prod.truncate(e);
        Scalar { field: field.clone(), c: prod.into_iter().flatten().collect() }
    }

    fn is_base_rational(&self) -> bool {
        self.c.iter().skip(1).all(Qp::is_exact_zero)
    }

    pub fn inv(&self) -> Result<Self> {
        let field = self.field.clone();
        let ctx = &field.ctx;
        if let Val::Zero | Val::ApproxZero { .. } = self.val() {
            return Err(Error::DivisionByApproxZero);
        }
        if self.is_base_rational() {
            return Ok(Self::from_qp(&field, self.c[0].inv(ctx)?));
        }
        // Column k of the multiplication matrix is self * basis_k.
        let d = field.degree();
        let mut cols = Vec::with_capacity(d);
        for k in 0..d {
            let mut basis = Self::zero(&field);
            basis.c[k] = Qp::from_i64(ctx, 1);
            cols.push(self.mul_impl(&basis).c);
        }
        let m: Vec<Vec<Qp>> = (0..d).map(|i| (0..d).map(|k| cols[k][i].clone()).collect()).collect();
        let mut rhs = vec![Qp::zero(); d];
        rhs[0] = Qp::from_i64(ctx, 1);
        let x = qp_solve(ctx, m, rhs)?;
        Ok(Scalar { field, c: x })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let (a, b) = self.unify(other);
        if b.is_base_rational() {
            let ctx = &a.field.ctx;
            if b.c[0].is_zero() {
                return Err(Error::DivisionByApproxZero);
            }
            if a.field.is_qp() {
                return Ok(Scalar { field: a.field.clone(), c: vec![a.c[0].div(&b.c[0], ctx)?] });
            }
            let inv = b.c[0].inv(ctx)?;
            return Ok(Scalar { field: a.field.clone(), c: a.c.iter().map(|x| x.mul(&inv, ctx)).collect() });
        }
        Ok(a.mul_impl(&b.inv()?))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.field);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplies by `p^k` (k may be negative); exact.
    pub fn shift(&self, k: i64) -> Self {
        let c = self
            .c
            .iter()
            .map(|q| {
                if q.is_exact_zero() {
                    q.clone()
                } else if q.u.is_zero() {
                    Qp::approx_zero(q.prec.unwrap() + k)
                } else {
                    Qp { v: q.v + k, u: q.u.clone(), prec: q.prec.map(|p| p + k) }
                }
            })
            .collect();
        Scalar { field: self.field.clone(), c }
    }

    /// `ν(self)`.
    pub fn val(&self) -> Val {
        let f = self.field.f() as i64;
        let e = self.field.e() as i64;
        let mut known: Option<Q> = None;
        let mut bound: Option<Q> = None;
        for (k, q) in self.c.iter().enumerate() {
            let i = k as i64 / f;
            let offset = Q::new(i, e);
            if let Some(v) = q.val() {
                let w = Q::from_integer(v) + offset;
                known = Some(known.map_or(w, |m: Q| m.min(w)));
            }
            if let Some(pr) = q.prec {
                let b = Q::from_integer(pr) + offset;
                bound = Some(bound.map_or(b, |m: Q| m.min(b)));
            }
        }
        match (known, bound) {
            (None, None) => Val::Zero,
            (None, Some(b)) => Val::ApproxZero { bound: b },
            (Some(k), None) => Val::Finite(k),
            (Some(k), Some(b)) => {
                if k < b {
                    Val::Finite(k)
                } else {
                    Val::ApproxZero { bound: b }
                }
            }
        }
    }

    /// Absolute precision; `None` when exact.
    pub fn precision(&self) -> Option<Q> {
        let f = self.field.f() as i64;
        let e = self.field.e() as i64;
        self.c
            .iter()
            .enumerate()
            .filter_map(|(k, q)| q.prec.map(|pr| Q::from_integer(pr) + Q::new(k as i64 / f, e)))
            .min()
    }

    pub fn is_exact(&self) -> bool {
        self.c.iter().all(Qp::is_exact)
    }

    /// Zero exactly or to the carried precision.
    pub fn is_zero(&self) -> bool {
        !matches!(self.val(), Val::Finite(_))
    }

    pub fn is_exact_zero(&self) -> bool {
        self.val() == Val::Zero
    }

    /// Agreement to precision.
    pub fn eq_at_precision(&self, other: &Self) -> bool {
        (self - other).is_zero()
    }

    /// Residue modulo π of an integral element, as its ζ-coordinates modulo p.
    pub fn residue(&self) -> Result<Vec<u64>> {
        match self.val() {
            Val::Finite(v) if v < Q::zero() => {
                return Err(Error::PreconditionViolated(format!(
                    "residue of non-integral {}",
                    self.render()
                )))
            }
            Val::ApproxZero { bound } if bound <= Q::zero() => {
                return Err(Error::InsufficientPrecision("residue needs precision > 0".into()))
            }
            _ => {}
        }
        let f = self.field.f() as usize;
        self.c[..f].iter().map(|q| q.residue(self.ctx())).collect()
    }

    /// Representatives `Σ d_j ζ^j`, `0 <= d_j < p`, of the residue field.
    pub fn residue_representatives(field: &Arc<LocalField>) -> Vec<Scalar> {
        let f = field.f() as usize;
        let p = field.p();
        (0..field.residue_size())
            .map(|mut idx| {
                let mut s = Self::zero(field);
                for j in 0..f {
                    s.c[j] = Qp::from_i64(&field.ctx, (idx % p) as i64);
                    idx /= p;
                }
                s
            })
            .collect()
    }

    /// Exact rational value of a Q_p-rational exact element.
    pub fn to_rational(&self) -> Option<BigRational> {
        if !self.is_base_rational() {
            return None;
        }
        self.c[0].to_rational(self.ctx())
    }

    /// Representative of `self` modulo `p^m R`, coordinatewise with digits in `[0, p)`.
    pub fn truncate_below(&self, m: i64) -> Result<Self> {
        let ctx = &self.field.ctx;
        let c = self.c.iter().map(|q| q.truncate_below(m, ctx)).collect::<Result<Vec<_>>>()?;
        Ok(Scalar { field: self.field.clone(), c })
    }

    /// Canonical literal. Q_p elements render as `a`, `a/b` or `a/b+O(p^k)`;
    /// extension elements as `[c_0, c_1, …]` on the tower basis.
    pub fn render(&self) -> String {
        let ctx = self.ctx();
        if self.field.is_qp() {
            return self.c[0].render(ctx);
        }
        let parts: Vec<String> = self.c.iter().map(|q| q.render(ctx)).collect();
        format!("[{}]", parts.join(", "))
    }

    /// Coordinates rendered as literals.
    pub fn coordinate_literals(&self) -> Vec<String> {
        self.c.iter().map(|q| q.render(self.ctx())).collect()
    }

    /// Checked arithmetic, reporting incompatible fields as errors.
    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(self.add_impl(other))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(self.add_impl(&other.neg_impl()))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        Ok(self.mul_impl(other))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        self.div(other)
    }

    /// Whether the element lies in `Q_p` (all non-base coordinates exactly zero).
    pub fn is_in_base(&self) -> bool {
        self.is_base_rational()
    }

    /// Q_p coordinate access, for callers that need raw digits.
    pub fn base_coordinate_rational(&self) -> BigRational {
        self.c[0].rational_rep(self.ctx())
    }

    pub fn is_one(&self) -> bool {
        (self - &Self::one(&self.field)).is_exact_zero()
    }
}

impl<'a> Add<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn add(self, rhs: &'a Scalar) -> Scalar {
        self.add_impl(rhs)
    }
}

impl<'a> Sub<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &'a Scalar) -> Scalar {
        self.add_impl(&rhs.neg_impl())
    }
}

impl<'a> Mul<&'a Scalar> for &'a Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &'a Scalar) -> Scalar {
        self.mul_impl(rhs)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_impl()
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        self.add_impl(&rhs)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self.add_impl(&rhs.neg_impl())
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        self.mul_impl(&rhs)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.neg_impl()
    }
}

/// `n/d` as a BigRational.
pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
