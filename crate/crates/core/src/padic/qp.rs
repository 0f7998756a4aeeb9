//! Coordinates in Q_p with absolute precision tracking.
//!
//! A coordinate is `p^v * u`. Exact coordinates carry an arbitrary integer
//! unit; approximate ones carry `u` reduced modulo `p^(prec - v)`, meaning the
//! value is only known modulo `p^prec`. An approximate coordinate whose
//! digits all vanish is stored with `u = 0, v = prec`.

use std::borrow::Cow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exact integers larger than this many bits are rounded to the working
/// precision so repeated products cannot grow without bound.
const EXACT_BIT_CAP: u64 = 4096;

/// Arithmetic context: the prime, cached powers and the working precision.
#[derive(Debug, Clone)]
pub(crate) struct Ctx {
    pub p: u64,
    pub n: i64,
    p_big: BigInt,
    pows: Vec<BigInt>,
}

impl Ctx {
    pub fn new(p: u64, n: i64) -> Self {
        let p_big = BigInt::from(p);
        let cap = (8 * n.max(1) + 64) as usize;
        let mut pows = Vec::with_capacity(cap);
        let mut acc = BigInt::one();
        for _ in 0..cap {
            pows.push(acc.clone());
            acc *= &p_big;
        }
        Ctx { p, n, p_big, pows }
    }

    pub fn p_big(&self) -> &BigInt {
        &self.p_big
    }

    /// `p^k` for `k >= 0`.
    pub fn pow(&self, k: i64) -> Cow<'_, BigInt> {
        debug_assert!(k >= 0);
        match self.pows.get(k as usize) {
            Some(b) => Cow::Borrowed(b),
            None => Cow::Owned(self.p_big.pow(k as u32)),
        }
    }

    /// Splits off the exact power of p dividing a nonzero integer.
    pub fn strip(&self, mut w: BigInt) -> (i64, BigInt) {
        debug_assert!(!w.is_zero());
        let mut k = 0;
        loop {
            let (q, r) = w.div_rem(&self.p_big);
            if !r.is_zero() {
                return (k, w);
            }
            w = q;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Qp {
    pub v: i64,
    pub u: BigInt,
    /// Absolute precision; `None` for exact values.
    pub prec: Option<i64>,
}

fn min_prec(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => Some(x.min(y)),
    }
}

impl Qp {
    pub fn zero() -> Self {
        Qp { v: 0, u: BigInt::zero(), prec: None }
    }

    pub fn approx_zero(prec: i64) -> Self {
        Qp { v: prec, u: BigInt::zero(), prec: Some(prec) }
    }

    pub fn from_int(ctx: &Ctx, w: BigInt) -> Self {
        Self::normalize_exact(ctx, 0, w)
    }

    pub fn from_i64(ctx: &Ctx, w: i64) -> Self {
        Self::from_int(ctx, BigInt::from(w))
    }

    /// Converts `num/den`; exact when the denominator is a power of p up to sign.
    pub fn from_rational(ctx: &Ctx, num: &BigInt, den: &BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Parse { pos: 0, msg: "zero denominator".into() });
        }
        if num.is_zero() {
            return Ok(Self::zero());
        }
        let (vn, un) = ctx.strip(num.clone());
        let (vd, ud) = ctx.strip(den.clone());
        let v = vn - vd;
        if ud.abs().is_one() {
            let u = if ud.is_negative() { -un } else { un };
            return Ok(Self::normalize_exact(ctx, v, u));
        }
        Ok(Self::divide_units(ctx, v, &un, &ud))
    }

    /// `p^v * num / den` for p-adic units `num`, `den`, rounded to the working precision.
    fn divide_units(ctx: &Ctx, v: i64, num: &BigInt, den: &BigInt) -> Self {
        let prec = ctx.n + v.max(0);
        let modulus = ctx.pow(prec - v);
        let inv = den.mod_floor(&modulus).modinv(&modulus).expect("unit is invertible");
        let w = (num * inv).mod_floor(&modulus);
        Self::normalize_approx(ctx, v, w, prec)
    }

    pub fn normalize_exact(ctx: &Ctx, v: i64, w: BigInt) -> Self {
        if w.is_zero() {
            return Self::zero();
        }
        let (k, u) = ctx.strip(w);
        let v = v + k;
        if u.bits() > EXACT_BIT_CAP {
            let prec = ctx.n + v.max(0);
            return Self::normalize_approx(ctx, v, u, prec);
        }
        Qp { v, u, prec: None }
    }

    pub fn normalize_approx(ctx: &Ctx, v: i64, w: BigInt, prec: i64) -> Self {
        if v >= prec {
            return Self::approx_zero(prec);
        }
        let modulus = ctx.pow(prec - v);
        let mut w = w.mod_floor(&modulus);
        if w.is_zero() {
            return Self::approx_zero(prec);
        }
        // Balanced representative, so that e.g. -1 renders as -1+O(p^k).
        if &w + &w > *modulus {
            w -= modulus.as_ref();
        }
        let (k, u) = ctx.strip(w);
        Qp { v: v + k, u, prec: Some(prec) }
    }

    fn normalize(ctx: &Ctx, v: i64, w: BigInt, prec: Option<i64>) -> Self {
        match prec {
            None => Self::normalize_exact(ctx, v, w),
            Some(pr) => Self::normalize_approx(ctx, v, w, pr),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    /// Zero exactly or to the carried precision.
    pub fn is_zero(&self) -> bool {
        self.u.is_zero()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.u.is_zero() && self.prec.is_none()
    }

    /// Valuation when the coordinate is nonzero at its precision.
    pub fn val(&self) -> Option<i64> {
        if self.u.is_zero() {
            None
        } else {
            Some(self.v)
        }
    }

    pub fn neg(&self, ctx: &Ctx) -> Self {
        if self.u.is_zero() {
            return self.clone();
        }
        Self::normalize(ctx, self.v, -self.u.clone(), self.prec)
    }

    pub fn add(&self, other: &Self, ctx: &Ctx) -> Self {
        if self.is_exact_zero() {
            return other.clone();
        }
        if other.is_exact_zero() {
            return self.clone();
        }
        let prec = min_prec(self.prec, other.prec);
        let cutoff = prec.unwrap_or(i64::MAX);
        let live = |q: &Qp| !q.u.is_zero() && q.v < cutoff;
        let (la, lb) = (live(self), live(other));
        if !la && !lb {
            return match prec {
                Some(pr) => Self::approx_zero(pr),
                None => Self::zero(),
            };
        }
        let m = match (la, lb) {
            (true, true) => self.v.min(other.v),
            (true, false) => self.v,
            _ => other.v,
        };
        let mut w = BigInt::zero();
        if la {
            w += &self.u * ctx.pow(self.v - m).as_ref();
        }
        if lb {
            w += &other.u * ctx.pow(other.v - m).as_ref();
        }
        Self::normalize(ctx, m, w, prec)
    }

    pub fn sub(&self, other: &Self, ctx: &Ctx) -> Self {
        self.add(&other.neg(ctx), ctx)
    }

    pub fn mul(&self, other: &Self, ctx: &Ctx) -> Self {
        if self.is_exact_zero() || other.is_exact_zero() {
            return Self::zero();
        }
        let prec = match (self.prec, other.prec) {
            (None, None) => None,
            (Some(pa), None) => Some(pa + other.v),
            (None, Some(pb)) => Some(pb + self.v),
            (Some(pa), Some(pb)) => Some((pa + other.v).min(pb + self.v)),
        };
        if self.u.is_zero() || other.u.is_zero() {
            return Self::approx_zero(prec.expect("approximate zero has a precision"));
        }
        Self::normalize(ctx, self.v + other.v, &self.u * &other.u, prec)
    }

    pub fn inv(&self, ctx: &Ctx) -> Result<Self> {
        if self.u.is_zero() {
            return Err(Error::DivisionByApproxZero);
        }
        let v = -self.v;
        match self.prec {
            None => {
                if self.u.abs().is_one() {
                    Ok(Qp { v, u: self.u.clone(), prec: None })
                } else {
                    Ok(Self::divide_units(ctx, v, &BigInt::one(), &self.u))
                }
            }
            Some(pa) => {
                let rel = pa - self.v;
                let modulus = ctx.pow(rel);
                let inv = self.u.mod_floor(&modulus).modinv(&modulus).expect("unit");
                Ok(Self::normalize_approx(ctx, v, inv, v + rel))
            }
        }
    }

    pub fn div(&self, other: &Self, ctx: &Ctx) -> Result<Self> {
        if other.u.is_zero() {
            return Err(Error::DivisionByApproxZero);
        }
        if self.is_exact() && other.is_exact() {
            if self.u.is_zero() {
                return Ok(Self::zero());
            }
            let (q, r) = self.u.div_rem(&other.u);
            if r.is_zero() {
                return Ok(Self::normalize_exact(ctx, self.v - other.v, q));
            }
            return Ok(Self::divide_units(ctx, self.v - other.v, &self.u, &other.u));
        }
        Ok(self.mul(&other.inv(ctx)?, ctx))
    }

    /// Representative of `self mod p^m Z_p` with digits in `[0, p)`, as an exact value.
    pub fn truncate_below(&self, m: i64, ctx: &Ctx) -> Result<Self> {
        if let Some(pr) = self.prec {
            if pr < m {
                return Err(Error::InsufficientPrecision(format!(
                    "value known modulo p^{pr}, needed modulo p^{m}"
                )));
            }
        }
        if self.u.is_zero() || self.v >= m {
            return Ok(Self::zero());
        }
        let w = self.u.mod_floor(&ctx.pow(m - self.v));
        Ok(Self::normalize_exact(ctx, self.v, w))
    }

    /// The exact rational value, when the coordinate is exact.
    pub fn to_rational(&self, ctx: &Ctx) -> Option<BigRational> {
        if self.prec.is_some() {
            return None;
        }
        Some(self.rational_rep(ctx))
    }

    /// The stored representative as a rational, ignoring precision.
    pub fn rational_rep(&self, ctx: &Ctx) -> BigRational {
        if self.v >= 0 {
            BigRational::from_integer(&self.u * ctx.pow(self.v).as_ref())
        } else {
            BigRational::new(self.u.clone(), ctx.pow(-self.v).into_owned())
        }
    }

    /// Residue modulo p of an integral coordinate.
    pub fn residue(&self, ctx: &Ctx) -> Result<u64> {
        if let Some(pr) = self.prec {
            if pr < 1 {
                return Err(Error::InsufficientPrecision("residue needs precision >= 1".into()));
            }
        }
        if self.u.is_zero() || self.v >= 1 {
            return Ok(0);
        }
        if self.v < 0 {
            return Err(Error::PreconditionViolated("residue of a non-integral value".into()));
        }
        let r = self.u.mod_floor(ctx.p_big());
        Ok(r.to_u64_digits().1.first().copied().unwrap_or(0))
    }

    /// Canonical literal: `a`, `a/b`, with `+O(p^k)` when approximate.
    pub fn render(&self, ctx: &Ctx) -> String {
        let r = self.rational_rep(ctx);
        let body = if r.is_integer() {
            r.numer().to_string()
        } else {
            format!("{}/{}", r.numer(), r.denom())
        };
        match self.prec {
            None => body,
            Some(pr) => format!("{body}+O({}^{pr})", ctx.p),
        }
    }
}
