//! Polynomials over a local field and root finding by Hensel lifting.

use std::sync::Arc;

use num_traits::{Signed, Zero};

use super::field::LocalField;
use super::scalar::{Scalar, Val};
use super::Q;
use crate::error::{Error, Result};
use crate::matrix::det_subsets;

/// Coefficients low to high.
#[derive(Clone, Debug)]
pub struct Poly {
    c: Vec<Scalar>,
}

impl Poly {
    pub fn new(c: Vec<Scalar>) -> Self {
        assert!(!c.is_empty(), "a polynomial needs at least one coefficient");
        let mut p = Poly { c };
        p.trim();
        p
    }

    fn trim(&mut self) {
        while self.c.len() > 1 && self.c.last().unwrap().is_exact_zero() {
            self.c.pop();
        }
    }

    pub fn coeffs(&self) -> &[Scalar] {
        &self.c
    }

    pub fn degree(&self) -> usize {
        self.c.len() - 1
    }

    pub fn leading(&self) -> &Scalar {
        self.c.last().unwrap()
    }

    pub fn field(&self) -> &Arc<LocalField> {
        self.c[0].field()
    }

    pub fn coerce_to(&self, target: &Arc<LocalField>) -> Result<Self> {
        Ok(Poly { c: self.c.iter().map(|s| s.coerce_to(target)).collect::<Result<Vec<_>>>()? })
    }

    pub fn eval(&self, x: &Scalar) -> Scalar {
        let mut acc = self.leading().clone();
        for a in self.c.iter().rev().skip(1) {
            acc = &(&acc * x) + a;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() == 1 {
            return Poly::new(vec![Scalar::zero(self.field())]);
        }
        let f = self.field().clone();
        Poly::new(self.c.iter().enumerate().skip(1).map(|(i, a)| a * &Scalar::from_int(&f, i as i64)).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.c.len().max(other.c.len());
        let f = if self.field().degree() >= other.field().degree() { self.field() } else { other.field() };
        let z = Scalar::zero(f);
        Poly::new((0..n).map(|i| self.c.get(i).unwrap_or(&z) + other.c.get(i).unwrap_or(&z)).collect())
    }

    pub fn neg(&self) -> Self {
        Poly { c: self.c.iter().map(|a| -a).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let f = if self.field().degree() >= other.field().degree() { self.field() } else { other.field() };
        let mut out = vec![Scalar::zero(f); self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_exact_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(out)
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        Poly { c: self.c.iter().map(|a| a * s).collect() }
    }

    /// `self(a + b·s)` as a polynomial in `s`.
    pub fn compose_affine(&self, a: &Scalar, b: &Scalar) -> Self {
        let lin = Poly::new(vec![a.clone(), b.clone()]);
        let mut acc = Poly::new(vec![self.leading().clone()]);
        for coef in self.c.iter().rev().skip(1) {
            acc = acc.mul(&lin).add(&Poly::new(vec![coef.clone()]));
        }
        acc
    }

    /// Quotient by `t − r` (synthetic division); the remainder is dropped.
    pub fn deflate(&self, r: &Scalar) -> Self {
        let d = self.degree();
        if d == 0 {
            return self.clone();
        }
        let mut q = vec![Scalar::zero(r.field()); d];
        let mut carry = self.leading().clone();
        for i in (0..d).rev() {
            q[i] = carry.clone();
            carry = &self.c[i] + &(&carry * r);
        }
        Poly::new(q)
    }

    /// Minimum coefficient valuation.
    fn min_val(&self) -> Val {
        let mut best: Option<Q> = None;
        let mut bound: Option<Q> = None;
        for a in &self.c {
            match a.val() {
                Val::Finite(v) => best = Some(best.map_or(v, |b| b.min(v))),
                Val::ApproxZero { bound: b } => bound = Some(bound.map_or(b, |c| c.min(b))),
                Val::Zero => {}
            }
        }
        match (best, bound) {
            (Some(v), Some(b)) if b <= v => Val::ApproxZero { bound: b },
            (Some(v), _) => Val::Finite(v),
            (None, Some(b)) => Val::ApproxZero { bound: b },
            (None, None) => Val::Zero,
        }
    }

    pub fn render(&self) -> Vec<String> {
        self.c.iter().map(Scalar::render).collect()
    }
}

/// Resultant `Res(f, g)` from the Sylvester determinant.
pub fn resultant(f: &Poly, g: &Poly) -> Scalar {
    let (m, n) = (f.degree(), g.degree());
    let size = m + n;
    let field = if f.field().degree() >= g.field().degree() { f.field().clone() } else { g.field().clone() };
    if size == 0 {
        return Scalar::one(&field);
    }
    let z = Scalar::zero(&field);
    let entry = |i: usize, j: usize| -> Scalar {
        // Rows 0..n: shifts of f (high to low); rows n..n+m: shifts of g.
        if i < n {
            let k = j as isize - i as isize;
            if k < 0 || k as usize > m {
                z.clone()
            } else {
                f.c[m - k as usize].clone()
            }
        } else {
            let r = i - n;
            let k = j as isize - r as isize;
            if k < 0 || k as usize > n {
                z.clone()
            } else {
                g.c[n - k as usize].clone()
            }
        }
    };
    det_subsets(size, entry, z.clone(), Scalar::one(&field), |a, b| a + b, |a, b| a * b, |a| -a)
}

/// `(−1)^{n(n−1)/2} Res(f, f′) / lc(f)`.
pub fn discriminant(f: &Poly) -> Result<Scalar> {
    let n = f.degree();
    let r = resultant(f, &f.derivative());
    let r = if (n * (n.saturating_sub(1)) / 2) % 2 == 1 { -r } else { r };
    r.div(f.leading())
}

/// Roots found in the field, plus the cofactor without roots there.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub leading: Scalar,
    pub roots: Vec<Scalar>,
    /// Monic factor of degree `deg − #roots` with no root in the field.
    pub residual: Option<Poly>,
}

impl Factorization {
    /// `leading · Π(t − root) · residual`.
    pub fn product(&self) -> Poly {
        let f = self.leading.field().clone();
        let mut acc = Poly::new(vec![self.leading.clone()]);
        for r in &self.roots {
            acc = acc.mul(&Poly::new(vec![-r, Scalar::one(&f)]));
        }
        if let Some(res) = &self.residual {
            acc = acc.mul(res);
        }
        acc
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    let q = num_integer::Integer::div_floor(&a, &b);
    if q * b == a {
        q
    } else {
        q + 1
    }
}

/// Finds every root of `poly` lying in `field` and the residual factor.
pub fn hensel_factor(poly: &Poly, field: &Arc<LocalField>) -> Result<Factorization> {
    let g = poly.coerce_to(field)?;
    let n = g.degree();
    let lead = g.leading().clone();
    if lead.is_zero() {
        return Err(Error::InsufficientPrecision("leading coefficient vanishes".into()));
    }
    if n == 0 {
        return Ok(Factorization { leading: lead, roots: vec![], residual: None });
    }
    let disc = discriminant(&g)?;
    if disc.is_zero() {
        return Err(Error::Inseparable);
    }
    let monic = g.scale(&lead.inv()?);

    // Roots have ν >= min_i ν(a_i)/(n−i); substitute t = π^{-k} u to make them integral.
    let e = field.e() as i64;
    let mut lowest: Option<Q> = None;
    for (i, a) in monic.c.iter().enumerate().take(n) {
        if let Val::Finite(v) = a.val() {
            let s = v / Q::from_integer((n - i) as i64);
            lowest = Some(lowest.map_or(s, |m: Q| m.min(s)));
        }
    }
    let k = match lowest {
        Some(m) if m.is_negative() => ceil_div(-m.numer() * e, *m.denom()),
        _ => 0,
    };
    let pi = Scalar::uniformizer(field);
    let scaled = if k == 0 {
        monic.clone()
    } else {
        let pk = pi.pow(k as u32);
        let mut c = Vec::with_capacity(n + 1);
        for (i, a) in monic.c.iter().enumerate() {
            c.push(a * &pk.pow((n - i) as u32));
        }
        Poly::new(c)
    };

    let reps = Scalar::residue_representatives(field);
    let max_depth = (field.precision() * e + 2) as usize;
    let mut found = Vec::new();
    search(&scaled, &Scalar::zero(field), &Scalar::one(field), &pi, &reps, 0, max_depth, &mut found)?;

    let mut roots = Vec::with_capacity(found.len());
    for u in found {
        let mut r = if k == 0 { u } else { u.div(&pi.pow(k as u32))? };
        r = polish(&monic, r);
        roots.push(r);
    }
    for i in 0..roots.len() {
        for j in 0..i {
            if roots[i].eq_at_precision(&roots[j]) {
                return Err(Error::PrecisionTooLowToSeparateRoots(format!(
                    "roots {} and {} agree to precision",
                    roots[i].render(),
                    roots[j].render()
                )));
            }
        }
    }
    if roots.len() > n {
        return Err(Error::PrecisionTooLowToSeparateRoots("more roots than the degree".into()));
    }
    let residual = if roots.len() == n {
        None
    } else {
        let mut q = monic.clone();
        for r in &roots {
            q = q.deflate(r);
        }
        Some(q)
    };
    Ok(Factorization { leading: lead, roots, residual })
}

/// Newton refinement against the original polynomial while it helps.
fn polish(g: &Poly, mut x: Scalar) -> Scalar {
    let dg = g.derivative();
    for _ in 0..8 {
        let gx = g.eval(&x);
        let Val::Finite(v) = gx.val() else { break };
        let d = dg.eval(&x);
        let Ok(step) = gx.div(&d) else { break };
        let next = &x - &step;
        match g.eval(&next).val() {
            Val::Finite(w) if w <= v => break,
            _ => x = next,
        }
    }
    x
}

/// Roots `u = base + scale·s` of the integral polynomial `h(s)`.
#[allow(clippy::too_many_arguments)]
fn search(
    h: &Poly,
    base: &Scalar,
    scale: &Scalar,
    pi: &Scalar,
    reps: &[Scalar],
    depth: usize,
    max_depth: usize,
    out: &mut Vec<Scalar>,
) -> Result<()> {
    if depth > max_depth {
        return Err(Error::PrecisionTooLowToSeparateRoots("lifting exceeded the working precision".into()));
    }
    let zero = Q::zero();
    let dh = h.derivative();
    for a in reps {
        let ha = h.eval(a);
        if !ha.val().at_least(zero, true).unwrap_or(true) {
            continue;
        }
        if let Val::Finite(v) = dh.eval(a).val() {
            if v.is_zero() {
                let s = newton(h, &dh, a.clone())?;
                out.push(base + &(scale * &s));
                continue;
            }
        }
        let shifted = h.compose_affine(a, pi);
        let m = match shifted.min_val() {
            Val::Finite(m) => m,
            _ => {
                return Err(Error::PrecisionTooLowToSeparateRoots(
                    "lifted polynomial vanishes to precision".into(),
                ))
            }
        };
        let e = a.field().e() as i64;
        let steps = (m * Q::from_integer(e)).to_integer();
        let reduced = if steps == 0 {
            shifted
        } else {
            let inv = pi.pow(steps as u32).inv()?;
            shifted.scale(&inv)
        };
        if reduced.degree() == 0 || reduced.c[1..].iter().all(Scalar::is_zero) {
            continue;
        }
        let nb = base + &(scale * a);
        let ns = scale * pi;
        search(&reduced, &nb, &ns, pi, reps, depth + 1, max_depth, out)?;
    }
    Ok(())
}

/// Newton iteration from a simple residue root.
fn newton(h: &Poly, dh: &Poly, mut x: Scalar) -> Result<Scalar> {
    for _ in 0..64 {
        let hx = h.eval(&x);
        if hx.is_zero() {
            return Ok(x);
        }
        let step = hx.div(&dh.eval(&x))?;
        if step.is_zero() {
            return Ok(x);
        }
        x = &x - &step;
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn q5() -> Arc<LocalField> {
        LocalField::qp(5, 24).unwrap()
    }

    fn sqrt5(base: &Arc<LocalField>) -> Arc<LocalField> {
        let c = |n: i64| vec![BigRational::from_integer(n.into())];
        LocalField::make_extension(base, 1, &[c(-5), vec![], c(1)]).unwrap()
    }

    fn poly(f: &Arc<LocalField>, c: &[i64]) -> Poly {
        Poly::new(c.iter().map(|&x| Scalar::from_int(f, x)).collect())
    }

    #[test]
    fn irreducible_over_qp() {
        let f = q5();
        let g = poly(&f, &[-4, -2, 1]);
        let fac = hensel_factor(&g, &f).unwrap();
        assert!(fac.roots.is_empty());
        assert_eq!(fac.residual.unwrap().degree(), 2);
        assert_eq!(discriminant(&g).unwrap().render(), "20");
    }

    #[test]
    fn splits_over_ramified_quadratic() {
        let base = q5();
        let e = sqrt5(&base);
        let g = poly(&base, &[-4, -2, 1]);
        let fac = hensel_factor(&g, &e).unwrap();
        let mut lits: Vec<String> = fac.roots.iter().map(Scalar::render).collect();
        lits.sort();
        assert_eq!(lits, vec!["[1, -1+O(5^25)]", "[1, 1]"]);
    }

    #[test]
    fn square_roots_of_minus_one() {
        let f = q5();
        let g = poly(&f, &[1, 0, 1]);
        let fac = hensel_factor(&g, &f).unwrap();
        assert_eq!(fac.roots.len(), 2);
        let mut res: Vec<u64> = fac.roots.iter().map(|r| r.residue().unwrap()[0]).collect();
        res.sort();
        assert_eq!(res, vec![2, 3]);
        for r in &fac.roots {
            assert!(g.eval(r).is_zero());
        }
    }

    #[test]
    fn repeated_root_is_inseparable() {
        let f = q5();
        let g = poly(&f, &[4, -4, 1]);
        assert_eq!(hensel_factor(&g, &f).unwrap_err(), Error::Inseparable);
    }

    #[test]
    fn close_roots_and_non_integral_roots() {
        let f = q5();
        // (t − 1)(t − 1 − 5^3) and (5t − 1)(t − 2)
        let g = poly(&f, &[126, -127, 1]);
        assert_eq!(hensel_factor(&g, &f).unwrap().roots.len(), 2);
        let h = poly(&f, &[2, -11, 5]);
        let fac = hensel_factor(&h, &f).unwrap();
        let mut lits: Vec<String> = fac.roots.iter().map(Scalar::render).collect();
        lits.sort();
        assert_eq!(lits, vec!["1/5", "2+O(5^24)"]);
    }

    #[test]
    fn product_reproduces_input() {
        let f = q5();
        let g = poly(&f, &[6, 11, 6, 1]);
        let fac = hensel_factor(&g, &f).unwrap();
        let prod = fac.product();
        for (a, b) in prod.coeffs().iter().zip(g.coeffs()) {
            assert!(a.eq_at_precision(b));
        }
    }
}
