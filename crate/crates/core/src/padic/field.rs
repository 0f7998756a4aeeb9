use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::qp::{Ctx, Qp};
use super::Q;
use crate::error::{Error, Result};

/// Default absolute working precision, in valuation units.
pub const DEFAULT_PRECISION: i64 = 24;

/// A tame two-step tower `Q_p ⊂ K ⊂ E`: `K` unramified of degree `f`,
/// `E = K(π)` with `π` a root of an Eisenstein polynomial of degree `e`.
///
/// Elements of `E` are stored on the basis `π^i ζ^j` (`i < e`, `j < f`) where
/// `ζ` is a root of [`LocalField::modulus`], the lexicographically smallest
/// monic polynomial of degree `f` irreducible modulo p. The valuation is
/// normalized so that `ν(p) = 1`, giving value group `(1/e)Z`.
pub struct LocalField {
    pub(crate) ctx: Ctx,
    f: u32,
    e: u32,
    /// `m_0, …, m_{f-1}, 1`
    modulus: Vec<i64>,
    pub(crate) modulus_qp: Vec<Qp>,
    /// Eisenstein coefficients `c_0, …, c_{e-1}` (monic leading term implied), each in `K`.
    pub(crate) eisenstein: Vec<Vec<Qp>>,
    eisenstein_literals: Vec<Vec<String>>,
    base: Option<Arc<LocalField>>,
}

impl fmt::Debug for LocalField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalField(p={}, f={}, e={}, N={})", self.ctx.p, self.f, self.e, self.ctx.n)
    }
}

impl PartialEq for LocalField {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.p == other.ctx.p
            && self.ctx.n == other.ctx.n
            && self.f == other.f
            && self.e == other.e
            && self.modulus == other.modulus
            && self.eisenstein == other.eisenstein
    }
}

/// Serializable description of a field, used in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FieldSummary {
    pub p: u64,
    pub f: u32,
    pub e: u32,
    pub precision: i64,
    pub unramified_modulus: Vec<i64>,
    pub eisenstein: Vec<Vec<String>>,
    pub tame: bool,
}

pub(crate) fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Remainder of `a` modulo monic `b` over F_p; coefficients low to high.
fn fp_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (k, &bk) in b.iter().enumerate() {
                r[shift + k] = (r[shift + k] + p - (lead * bk) % p) % p;
            }
        }
        r.pop();
    }
    r
}

fn monic_polys(p: u64, deg: u32) -> impl Iterator<Item = Vec<u64>> {
    let count = p.pow(deg);
    (0..count).map(move |mut idx| {
        let mut c = Vec::with_capacity(deg as usize + 1);
        for _ in 0..deg {
            c.push(idx % p);
            idx /= p;
        }
        c.push(1);
        c
    })
}

/// Smallest monic irreducible polynomial of degree `f` over F_p, in the
/// order where the constant coefficient varies fastest.
pub(crate) fn conway_like_modulus(p: u64, f: u32) -> Vec<u64> {
    if f == 1 {
        return vec![0, 1];
    }
    'candidates: for cand in monic_polys(p, f) {
        if cand[0] == 0 {
            continue;
        }
        for d in 1..=f / 2 {
            for div in monic_polys(p, d) {
                if fp_rem(&cand, &div, p).iter().all(|&c| c == 0) {
                    continue 'candidates;
                }
            }
        }
        return cand;
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl LocalField {
    /// `Q_p` with absolute working precision `precision`.
    pub fn qp(p: u64, precision: i64) -> Result<Arc<Self>> {
        if !is_prime(p) {
            return Err(Error::Config(format!("{p} is not prime")));
        }
        if precision < 2 {
            return Err(Error::Config(format!("precision {precision} is below 2")));
        }
        let ctx = Ctx::new(p, precision);
        let modulus_qp = vec![Qp::zero(), Qp::from_i64(&ctx, 1)];
        Ok(Arc::new(LocalField {
            ctx,
            f: 1,
            e: 1,
            modulus: vec![0, 1],
            modulus_qp,
            eisenstein: Vec::new(),
            eisenstein_literals: Vec::new(),
            base: None,
        }))
    }

    /// Builds the tower over `base = Q_p`: unramified of degree `f`, then
    /// the Eisenstein step given by `eisenstein_coeffs = [c_0, …, c_e]`
    /// (low to high, `c_e = 1`), each coefficient a vector of rational
    /// coordinates over `1, ζ, …, ζ^{f-1}`. An empty list means `e = 1`.
    pub fn make_extension(
        base: &Arc<LocalField>,
        f: u32,
        eisenstein_coeffs: &[Vec<BigRational>],
    ) -> Result<Arc<Self>> {
        if !base.is_qp() {
            return Err(Error::FieldMismatch("extensions are built over Q_p".into()));
        }
        if f == 0 {
            return Err(Error::Config("inertia degree must be >= 1".into()));
        }
        let p = base.p();
        let ctx = Ctx::new(p, base.precision());
        let modulus: Vec<i64> = conway_like_modulus(p, f).into_iter().map(|c| c as i64).collect();
        let modulus_qp: Vec<Qp> = modulus.iter().map(|&m| Qp::from_i64(&ctx, m)).collect();

        let e = if eisenstein_coeffs.len() <= 2 { 1 } else { eisenstein_coeffs.len() as u32 - 1 };
        if eisenstein_coeffs.len() == 1 {
            return Err(Error::NotEisenstein("a constant is not a polynomial of degree >= 1".into()));
        }
        if gcd(e as u64, p) != 1 {
            return Err(Error::WildExtension { p, e });
        }

        let mut eisenstein = Vec::new();
        let mut eisenstein_literals = Vec::new();
        if !eisenstein_coeffs.is_empty() {
            let lead = eisenstein_coeffs.last().unwrap();
            let lead_is_one = lead.first().is_some_and(|c| c.is_one())
                && lead.iter().skip(1).all(|c| c.is_zero());
            if !lead_is_one {
                return Err(Error::NotEisenstein("leading coefficient must be 1".into()));
            }
            for (k, coeff) in eisenstein_coeffs.iter().enumerate().take(eisenstein_coeffs.len() - 1) {
                if coeff.len() > f as usize {
                    return Err(Error::NotEisenstein(format!(
                        "coefficient {k} has more than f = {f} coordinates"
                    )));
                }
                let mut coords = Vec::with_capacity(f as usize);
                for j in 0..f as usize {
                    let q = coeff.get(j).cloned().unwrap_or_else(BigRational::zero);
                    coords.push(Qp::from_rational(&ctx, q.numer(), q.denom())?);
                }
                let v = coords.iter().filter_map(|c| c.val()).min();
                let ok = match (k, v) {
                    (0, Some(v)) => v == 1,
                    (0, None) => false,
                    (_, Some(v)) => v >= 1,
                    (_, None) => true,
                };
                if !ok {
                    return Err(Error::NotEisenstein(format!(
                        "coefficient of t^{k} has the wrong valuation"
                    )));
                }
                eisenstein_literals.push(coords.iter().map(|c| c.render(&ctx)).collect());
                eisenstein.push(coords);
            }
            if e == 1 {
                eisenstein.clear();
                eisenstein_literals.clear();
            }
        }
        Ok(Arc::new(LocalField {
            ctx,
            f,
            e,
            modulus,
            modulus_qp,
            eisenstein,
            eisenstein_literals,
            base: Some(base.clone()),
        }))
    }

    /// Convenience constructor for `t^e - p·u` with `u` an element of `K`
    /// given by its ζ-coordinates.
    pub fn tame_radical(base: &Arc<LocalField>, f: u32, e: u32, unit: &[BigRational]) -> Result<Arc<Self>> {
        if e <= 1 {
            return Self::make_extension(base, f, &[]);
        }
        let p = BigRational::from_integer(BigInt::from(base.p()));
        let mut coeffs = vec![unit.iter().map(|c| -(c * &p)).collect::<Vec<_>>()];
        for _ in 1..e {
            coeffs.push(Vec::new());
        }
        coeffs.push(vec![BigRational::one()]);
        Self::make_extension(base, f, &coeffs)
    }

    pub fn p(&self) -> u64 {
        self.ctx.p
    }

    pub fn precision(&self) -> i64 {
        self.ctx.n
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    /// Degree over Q_p.
    pub fn degree(&self) -> usize {
        (self.e * self.f) as usize
    }

    pub fn is_qp(&self) -> bool {
        self.e == 1 && self.f == 1
    }

    pub fn modulus(&self) -> &[i64] {
        &self.modulus
    }

    /// Residue field size `p^f`.
    pub fn residue_size(&self) -> u64 {
        self.ctx.p.pow(self.f)
    }

    /// The value group generator `1/e`.
    pub fn value_step(&self) -> Q {
        Q::new(1, self.e as i64)
    }

    /// The prime field `Q_p` under this tower.
    pub fn base_field(self: &Arc<Self>) -> Arc<LocalField> {
        match &self.base {
            Some(b) => b.clone(),
            None => self.clone(),
        }
    }

    /// Same prime and precision: elements of one coerce into the other
    /// through `Q_p`.
    pub fn same_tower(&self, other: &LocalField) -> bool {
        self.ctx.p == other.ctx.p && self.ctx.n == other.ctx.n
    }

    pub fn summary(&self) -> FieldSummary {
        FieldSummary {
            p: self.ctx.p,
            f: self.f,
            e: self.e,
            precision: self.ctx.n,
            unramified_modulus: self.modulus.clone(),
            eisenstein: self.eisenstein_literals.clone(),
            tame: gcd(self.e as u64, self.ctx.p) == 1,
        }
    }

    /// Same field with a different working precision.
    pub fn with_precision(self: &Arc<Self>, precision: i64) -> Result<Arc<Self>> {
        let base = LocalField::qp(self.p(), precision)?;
        if self.is_qp() {
            return Ok(base);
        }
        let mut coeffs: Vec<Vec<BigRational>> = self
            .eisenstein
            .iter()
            .map(|c| c.iter().map(|q| q.rational_rep(&self.ctx)).collect())
            .collect();
        if !coeffs.is_empty() {
            coeffs.push(vec![BigRational::one()]);
        }
        Self::make_extension(&base, self.f, &coeffs)
    }
}
