//! Characters of `G_{x,r}/G_{x,t}` (`r ≤ t ≤ 2r`) as cosets
//! `X + g_{x,(−r)+}` with `X ∈ g_{x,(−t)+}`, via `d_X(g) = ψ(tr(X(g − 1)))`
//! and `ψ(z) = frac_principal(z/p)`.
//!
//! With this conductor (`ψ` trivial on `℘`, not on `R`) the dual of `g_{x,r}`
//! is `g_{x,(−r)+}`.

use std::sync::Arc;

use num_traits::{Signed, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{
    element_lattice_depth, group_membership, lattice_generators, lattice_membership, min_exponent,
    point_in_torus_apartment, render_q, ApartmentPoint, Depth, GroupKind, TorusData,
};
use crate::matrix::Matrix;
use crate::padic::{frac_principal, hensel_factor, LocalField, Poly, QmodZ, Scalar, Val, Q};
use crate::regular::{certify, s_gamma, torus_of};

pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;
pub const DEFAULT_SEARCH_BOUND: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BilinearForm {
    /// `tr(XY)` on `gl_n`.
    Trace,
    /// `tr(XY)` restricted to `sl_n` (`p > n`).
    TraceRestricted,
}

/// Smallest exponent allowed in entry `(i, j)` of `g_{x,(−r)+}`.
fn plus_exponent(x: &ApartmentPoint, r: Q, i: usize, j: usize) -> i64 {
    min_exponent(Depth::plus(-r), x.diff(i, j))
}

/// `X + g_{x,(−r)+}` with `X ∈ g_{x,(−t)+}`, stored by its canonical representative.
#[derive(Debug, Clone)]
pub struct CharacterCoset {
    pub x: ApartmentPoint,
    pub r: Q,
    pub t: Q,
    pub form: BilinearForm,
    rep: Matrix,
}

fn check_range(r: Q, t: Q) -> Result<()> {
    if !r.is_positive() {
        return Err(Error::NonPositiveDepth(render_q(&r)));
    }
    if t < r {
        return Err(Error::PreconditionViolated(format!("t = {} is below r = {}", render_q(&t), render_q(&r))));
    }
    if t > r * Q::from_integer(2) {
        return Err(Error::OutOfAbelianRange(format!(
            "t = {} exceeds 2r = {}",
            render_q(&t),
            render_q(&(r * Q::from_integer(2)))
        )));
    }
    Ok(())
}

/// Entrywise digit truncation against `g_{x,(−r)+}`.
pub fn canonical_representative(m: &Matrix, x: &ApartmentPoint, r: Q) -> Result<Matrix> {
    let mut out = Matrix::zeros(m.field(), m.n());
    for (i, j, s) in m.entries() {
        out.set(i, j, s.truncate_below(plus_exponent(x, r, i, j))?);
    }
    Ok(out)
}

impl CharacterCoset {
    pub fn new(x: ApartmentPoint, r: Q, t: Q, m: &Matrix) -> Result<Self> {
        Self::with_form(x, r, t, m, BilinearForm::Trace)
    }

    pub fn with_form(x: ApartmentPoint, r: Q, t: Q, m: &Matrix, form: BilinearForm) -> Result<Self> {
        check_range(r, t)?;
        if !m.field().is_qp() {
            return Err(Error::FieldMismatch("cosets live in g(k) with k = Q_p".into()));
        }
        if m.n() != x.n() {
            return Err(Error::Dimension("matrix and point have different rank".into()));
        }
        if !lattice_membership(m, &x, Depth::plus(-t))? {
            return Err(Error::PreconditionViolated(format!("X is not in g_{{x,{}}}", Depth::plus(-t))));
        }
        let rep = canonical_representative(m, &x, r)?;
        Ok(CharacterCoset { x, r, t, form, rep })
    }

    pub fn representative(&self) -> &Matrix {
        &self.rep
    }

    pub fn field(&self) -> &Arc<LocalField> {
        self.rep.field()
    }

    pub fn n(&self) -> usize {
        self.rep.n()
    }

    pub fn is_zero_coset(&self) -> bool {
        self.rep.is_exact_zero()
    }
}

/// `d_X` as a function on `G_{x,r}`, valued in `Q/Z`.
#[derive(Debug, Clone)]
pub struct CosetCharacter {
    coset: CharacterCoset,
}

pub fn coset_character(c: &CharacterCoset) -> Result<CosetCharacter> {
    check_range(c.r, c.t)?;
    Ok(CosetCharacter { coset: c.clone() })
}

/// `ψ(z) = frac_principal(z/p)`.
pub fn psi(z: &Scalar) -> Result<QmodZ> {
    frac_principal(&z.shift(-1))
}

impl CosetCharacter {
    pub fn coset(&self) -> &CharacterCoset {
        &self.coset
    }

    /// `ψ(B(X, Y))` for `Y` in the Lie algebra.
    pub fn on_lie(&self, y: &Matrix) -> Result<QmodZ> {
        if self.coset.form == BilinearForm::TraceRestricted && !y.trace().is_zero() {
            return Err(Error::PreconditionViolated("restricted form needs trace-zero arguments".into()));
        }
        psi(&self.coset.rep.mul(y).trace())
    }

    /// `d_X(g)` for `g ∈ G_{x,r}`.
    pub fn eval(&self, g: &Matrix) -> Result<QmodZ> {
        let c = &self.coset;
        if !group_membership(g, &c.x, Depth::at(c.r))? {
            return Err(Error::PreconditionViolated(format!("g is not in G_{{x,{}}}", render_q(&c.r))));
        }
        let y = g.sub(&Matrix::identity(g.field(), g.n()));
        psi(&c.rep.mul(&y).trace())
    }

    /// Triviality on `G_{x,s}`, checked on the generators `1 + Y` of `g_{x,s}`.
    pub fn trivial_on(&self, s: Depth) -> Result<bool> {
        let c = &self.coset;
        for y in lattice_generators(c.field(), &c.x, s) {
            if !psi(&c.rep.mul(&y).trace())?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value")]
pub enum TrivialityDepth {
    /// The coset is zero; the character is trivial on `G_{x,r}`.
    BelowR,
    /// Smallest `t'` with the character trivial on `G_{x,t'+}`.
    At(Depth),
}

pub fn triviality_depth(c: &CharacterCoset) -> Result<TrivialityDepth> {
    if c.is_zero_coset() {
        return Ok(TrivialityDepth::BelowR);
    }
    let d = element_lattice_depth(&c.rep, &c.x)?;
    Ok(TrivialityDepth::At(Depth::at(-d.value)))
}

#[derive(Debug, Clone)]
pub enum Degeneracy {
    /// A nilpotent member of the coset.
    Degenerate(Matrix),
    NotDegenerate,
    UnknownWithinBound,
}

impl Degeneracy {
    pub fn label(&self) -> &'static str {
        match self {
            Degeneracy::Degenerate(_) => "true",
            Degeneracy::NotDegenerate => "false",
            Degeneracy::UnknownWithinBound => "UNKNOWN_WITHIN_BOUND",
        }
    }

    pub fn is_degenerate(&self) -> bool {
        matches!(self, Degeneracy::Degenerate(_))
    }
}

/// `M^n = 0` at working precision (exact when `M` is exact and `p`-adically
/// exact rational).
fn is_nilpotent(m: &Matrix) -> bool {
    m.pow(m.n() as u32).is_zero()
}

fn in_coset(w: &Matrix, c: &CharacterCoset) -> Result<bool> {
    lattice_membership(&w.sub(&c.rep), &c.x, Depth::plus(-c.r))
}

fn is_origin_class(x: &ApartmentPoint) -> bool {
    x.coords().iter().all(|v| *v == x.coords()[0])
}

fn int_val(s: &Scalar) -> Option<i64> {
    match s.val() {
        Val::Finite(v) => Some(v.to_integer()),
        _ => None,
    }
}

/// Whether the coset contains a nilpotent, with a witness when it does.
pub fn is_degenerate(c: &CharacterCoset, search_bound: usize) -> Result<Degeneracy> {
    if c.is_zero_coset() {
        return Ok(Degeneracy::Degenerate(c.rep.clone()));
    }
    if is_nilpotent(&c.rep) {
        return Ok(Degeneracy::Degenerate(c.rep.clone()));
    }
    let n = c.n();
    let m0 = plus_exponent(&c.x, c.r, 0, 0);
    // Nilpotents have trace zero; the coset's traces fill tr(X) + p^{m0} Z_p.
    if !c.rep.trace().val().at_least(Q::from_integer(m0), false)? {
        return Ok(Degeneracy::NotDegenerate);
    }
    if is_origin_class(&c.x) && c.t - c.r <= Q::from_integer(1) {
        return residue_criterion(c, m0);
    }
    if n == 2 && c.field().p() != 2 {
        return gl2_balls(c);
    }
    bounded_search(c, search_bound)
}

/// Small dense linear algebra over `F_p`.
mod fp {
    pub type Mat = Vec<Vec<u64>>;

    pub fn mul(a: &Mat, b: &Mat, p: u64) -> Mat {
        let n = a.len();
        let mut out = vec![vec![0; n]; n];
        for i in 0..n {
            for k in 0..n {
                if a[i][k] == 0 {
                    continue;
                }
                for j in 0..n {
                    out[i][j] = (out[i][j] + a[i][k] * b[k][j]) % p;
                }
            }
        }
        out
    }

    fn inv(a: u64, p: u64) -> u64 {
        let mut r = 1;
        let mut b = a % p;
        let mut e = p - 2;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    /// Reduced row echelon form; returns pivot columns.
    fn rref(m: &mut Mat, p: u64) -> Vec<usize> {
        let rows = m.len();
        let cols = if rows == 0 { 0 } else { m[0].len() };
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..cols {
            let Some(piv) = (r..rows).find(|&i| m[i][col] != 0) else { continue };
            m.swap(r, piv);
            let s = inv(m[r][col], p);
            for v in m[r].iter_mut() {
                *v = *v * s % p;
            }
            for i in 0..rows {
                if i != r && m[i][col] != 0 {
                    let f = m[i][col];
                    for j in 0..cols {
                        m[i][j] = (m[i][j] + p * p - f * m[r][j] % p) % p;
                    }
                }
            }
            pivots.push(col);
            r += 1;
        }
        pivots
    }

    pub fn kernel(a: &Mat, p: u64) -> Vec<Vec<u64>> {
        let n = a[0].len();
        let mut m = a.clone();
        let pivots = rref(&mut m, p);
        let mut basis = Vec::new();
        for free in (0..n).filter(|c| !pivots.contains(c)) {
            let mut v = vec![0; n];
            v[free] = 1;
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - m[row][free]) % p;
            }
            basis.push(v);
        }
        basis
    }

    pub fn rank(vs: &[Vec<u64>], p: u64) -> usize {
        if vs.is_empty() {
            return 0;
        }
        let mut m = vs.to_vec();
        rref(&mut m, p).len()
    }
}

/// One-step case at `x₀`: scale into `g_{x,0}` and test the residue for nilpotency.
/// A nilpotent residue is conjugated to strictly upper triangular form over
/// `F_p`; the lifted conjugator gives an exact nilpotent witness.
fn residue_criterion(c: &CharacterCoset, m0: i64) -> Result<Degeneracy> {
    let n = c.n();
    let p = c.field().p();
    let field = c.field().clone();
    let y = c.rep.shift(1 - m0);
    let mut bar: fp::Mat = vec![vec![0; n]; n];
    for (i, j, s) in y.entries() {
        bar[i][j] = if s.is_exact_zero() { 0 } else { s.residue()?[0] };
    }
    let mut power = bar.clone();
    for _ in 1..n {
        power = fp::mul(&power, &bar, p);
    }
    if power.iter().flatten().any(|&v| v != 0) {
        return Ok(Degeneracy::NotDegenerate);
    }
    // Basis adapted to ker Ȳ ⊂ ker Ȳ² ⊂ …
    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut pw = bar.clone();
    for _ in 0..n {
        for v in fp::kernel(&pw, p) {
            let mut trial = basis.clone();
            trial.push(v.clone());
            if fp::rank(&trial, p) > basis.len() {
                basis.push(v);
            }
        }
        if basis.len() == n {
            break;
        }
        pw = fp::mul(&pw, &bar, p);
    }
    let b = Matrix::from_fn(&field, n, |i, j| Scalar::from_int(&field, basis[j][i] as i64));
    let b_inv = b.inverse()?;
    let upper = b_inv.mul(&y).mul(&b).map(|i, j, s| if i < j { s.clone() } else { Scalar::zero(&field) });
    let w = b.mul(&upper).mul(&b_inv).shift(m0 - 1);
    debug_assert!(is_nilpotent(&w));
    if !in_coset(&w, c)? {
        return Err(Error::InsufficientPrecision("residue witness left the coset".into()));
    }
    Ok(Degeneracy::Degenerate(w))
}

fn sqrt_near(target: &Scalar, near: Option<&Scalar>) -> Result<Option<Scalar>> {
    let field = target.field().clone();
    let poly = Poly::new(vec![-target, Scalar::zero(&field), Scalar::one(&field)]);
    let fac = hensel_factor(&poly, &field)?;
    if fac.roots.is_empty() {
        return Ok(None);
    }
    let root = match near {
        Some(a0) => fac
            .roots
            .iter()
            .max_by_key(|r| match (*r - a0).val() {
                Val::Finite(v) => v,
                _ => Q::from_integer(i64::MAX / 4),
            })
            .cloned()
            .expect("nonempty"),
        None => fac.roots[0].clone(),
    };
    let keep = root.precision().map(|q| q.floor().to_integer()).unwrap_or(field.precision()) - 2;
    Ok(Some(root.truncate_below(keep)?))
}

/// `a / b`, kept exact when both are exact rationals.
fn exact_div(a: &Scalar, b: &Scalar) -> Result<Scalar> {
    match (a.to_rational(), b.to_rational()) {
        (Some(x), Some(y)) if !y.is_zero() => Scalar::from_rational(a.field(), &(x / y)),
        _ => a.div(b),
    }
}

fn nilpotent_2x2(field: &Arc<LocalField>, a: Scalar, b: Scalar, cc: Scalar) -> Matrix {
    let mut w = Matrix::zeros(field, 2);
    w.set(0, 0, a.clone());
    w.set(1, 1, -&a);
    w.set(0, 1, b);
    w.set(1, 0, cc);
    w
}

/// Exact analysis for `gl_2`, `p` odd: a nilpotent `[[a, b], [c, −a]]` needs
/// `a ∈ A`, `b ∈ B`, `c ∈ C` (balls around the representative entries) with
/// `a² + bc = 0`. Each ball either contains 0 or has constant valuation and
/// unit part in a fixed coset of `1 + p^k Z_p`.
fn gl2_balls(c: &CharacterCoset) -> Result<Degeneracy> {
    let field = c.field().clone();
    let x = &c.x;
    let (m0, m12, m21) = (plus_exponent(x, c.r, 0, 0), plus_exponent(x, c.r, 0, 1), plus_exponent(x, c.r, 1, 0));
    let a0 = c.rep.get(0, 0).clone();
    let b0 = c.rep.get(0, 1).clone();
    let c0 = c.rep.get(1, 0).clone();
    let zero = Scalar::zero(&field);
    let (za, zb, zc) = (a0.is_exact_zero(), b0.is_exact_zero(), c0.is_exact_zero());
    let mut candidates: Vec<(Scalar, Scalar, Scalar)> = Vec::new();
    if za {
        if zb || zc {
            candidates.push((zero.clone(), if zc { b0.clone() } else { zero.clone() }, if zc { zero.clone() } else { c0.clone() }));
        } else {
            let (beta, gamma) = (int_val(&b0).unwrap(), int_val(&c0).unwrap());
            if (beta + gamma) % 2 != 0 || (beta + gamma) / 2 < m0 {
                return Ok(Degeneracy::NotDegenerate);
            }
            let Some(a) = sqrt_near(&-(&b0 * &c0), None)? else {
                return Ok(Degeneracy::NotDegenerate);
            };
            let cc = exact_div(&-(&a * &a), &b0)?;
            candidates.push((a, b0.clone(), cc));
        }
    } else {
        let alpha = int_val(&a0).unwrap();
        let sq = &a0 * &a0;
        match (zb, zc) {
            (true, true) => {
                if 2 * alpha < m12 + m21 {
                    return Ok(Degeneracy::NotDegenerate);
                }
                let b = Scalar::one(&field).shift(m12);
                candidates.push((a0.clone(), b.clone(), exact_div(&-&sq, &b)?));
            }
            (true, false) => {
                if 2 * alpha - int_val(&c0).unwrap() < m12 {
                    return Ok(Degeneracy::NotDegenerate);
                }
                candidates.push((a0.clone(), exact_div(&-&sq, &c0)?, c0.clone()));
            }
            (false, true) => {
                if 2 * alpha - int_val(&b0).unwrap() < m21 {
                    return Ok(Degeneracy::NotDegenerate);
                }
                candidates.push((a0.clone(), b0.clone(), exact_div(&-&sq, &b0)?));
            }
            (false, false) => {
                let (beta, gamma) = (int_val(&b0).unwrap(), int_val(&c0).unwrap());
                let k = (m0 - alpha).min(m12 - beta).min(m21 - gamma);
                let lhs = &sq + &(&b0 * &c0);
                let ok = match lhs.val() {
                    Val::Zero => true,
                    Val::Finite(v) => v.to_integer() - beta - gamma >= k,
                    Val::ApproxZero { .. } => {
                        return Err(Error::InsufficientPrecision("a^2 + bc vanishes to precision".into()))
                    }
                };
                if !ok {
                    return Ok(Degeneracy::NotDegenerate);
                }
                candidates.push((a0.clone(), b0.clone(), exact_div(&-&sq, &b0)?));
                candidates.push((a0.clone(), exact_div(&-&sq, &c0)?, c0.clone()));
                if let Some(a) = sqrt_near(&-(&b0 * &c0), Some(&a0))? {
                    let cc = exact_div(&-(&a * &a), &b0)?;
                    candidates.push((a, b0.clone(), cc));
                }
            }
        }
    }
    for (a, b, cc) in candidates {
        let w = nilpotent_2x2(&field, a, b, cc);
        if in_coset(&w, c)? {
            return Ok(Degeneracy::Degenerate(w));
        }
    }
    Err(Error::InsufficientPrecision("no witness found for a degenerate 2x2 coset".into()))
}

/// Tries representatives `X + Σ d_ij p^{m_ij} E_ij` with small digits.
fn bounded_search(c: &CharacterCoset, bound: usize) -> Result<Degeneracy> {
    let n = c.n();
    let field = c.field().clone();
    let p = field.p() as i64;
    let half = (p - 1) / 2;
    let digits: Vec<i64> = (-half..=p - 1 - half).collect();
    let slots: Vec<(usize, usize, i64)> =
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (i, j, plus_exponent(&c.x, c.r, i, j))).collect();
    let base = digits.len() as u128;
    let total = base.checked_pow(slots.len() as u32).unwrap_or(u128::MAX);
    let limit = (bound as u128).min(total);
    for idx in 0..limit {
        let mut rem = idx;
        let mut w = c.rep.clone();
        for &(i, j, m) in &slots {
            let d = digits[(rem % base) as usize];
            rem /= base;
            if d != 0 {
                let s = w.get(i, j) + &Scalar::from_int(&field, d).shift(m);
                w.set(i, j, s);
            }
        }
        if is_nilpotent(&w) {
            return Ok(Degeneracy::Degenerate(w));
        }
    }
    Ok(Degeneracy::UnknownWithinBound)
}

/// Intertwining data for a fixed `γ` and point `x`.
#[derive(Debug, Clone)]
pub struct Intertwiner {
    gamma: Matrix,
    gamma_inv: Matrix,
    x: ApartmentPoint,
    torus: Option<TorusData>,
}

impl Intertwiner {
    /// Central `γ` fixes every point; otherwise `x` must lie in the apartment of `γ`'s torus.
    pub fn new(gamma: &Matrix, x: &ApartmentPoint, kind: GroupKind) -> Result<Self> {
        let central = gamma.is_diagonal() && gamma.diagonal().iter().all(|d| d.eq_at_precision(gamma.get(0, 0)));
        if central {
            if !certify(gamma, kind)?.compact {
                return Err(Error::NotCompact("gamma is not compact".into()));
            }
            let gamma_inv = gamma.inverse()?;
            return Ok(Intertwiner { gamma: gamma.clone(), gamma_inv, x: x.clone(), torus: None });
        }
        Self::from_torus(&torus_of(gamma, None)?, x, kind)
    }

    pub fn from_torus(torus: &TorusData, x: &ApartmentPoint, kind: GroupKind) -> Result<Self> {
        if !certify(&torus.gamma, kind)?.compact {
            return Err(Error::NotCompact("gamma is not compact".into()));
        }
        if !point_in_torus_apartment(torus, x)? {
            return Err(Error::PointNotFixed(format!("x = {:?} is not in the apartment of gamma", x.render())));
        }
        Ok(Intertwiner { gamma: torus.gamma.clone(), gamma_inv: torus.gamma.inverse()?, x: x.clone(), torus: Some(torus.clone()) })
    }

    pub fn s(&self) -> Result<Q> {
        match &self.torus {
            Some(t) => s_gamma(t),
            None => Err(Error::NotRegular("central gamma has no regular depth".into())),
        }
    }

    /// `ᵞX − X ∈ g_{x,(−r)+}`.
    pub fn intertwines(&self, c: &CharacterCoset) -> Result<bool> {
        if c.x != self.x {
            return Err(Error::PointNotFixed("coset lives at a different point".into()));
        }
        let conj = self.gamma.mul(&c.rep).mul(&self.gamma_inv);
        lattice_membership(&conj.sub(&c.rep), &c.x, Depth::plus(-c.r))
    }
}

pub fn gamma_intertwines(gamma: &Matrix, c: &CharacterCoset, kind: GroupKind) -> Result<bool> {
    Intertwiner::new(gamma, &c.x, kind)?.intertwines(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Cor36Verdict {
    Holds,
    Fails,
    /// Not degenerate or not intertwined.
    Vacuous,
    /// Degeneracy undecided within the search bound.
    Undecided,
}

/// For degenerate, intertwined cosets: `X ∈ g_{x,(−r−s(γ))+}`.
pub fn cor36_conclusion_holds(it: &Intertwiner, c: &CharacterCoset, search_bound: usize) -> Result<Cor36Verdict> {
    if !it.intertwines(c)? {
        return Ok(Cor36Verdict::Vacuous);
    }
    match is_degenerate(c, search_bound)? {
        Degeneracy::NotDegenerate => return Ok(Cor36Verdict::Vacuous),
        Degeneracy::UnknownWithinBound => return Ok(Cor36Verdict::Undecided),
        Degeneracy::Degenerate(_) => {}
    }
    let s = it.s()?;
    Ok(if lattice_membership(&c.rep, &c.x, Depth::plus(-c.r - s))? { Cor36Verdict::Holds } else { Cor36Verdict::Fails })
}

/// Exhaustive list of `g_{x,(−t)+}/g_{x,(−r)+}` by mixed-radix index.
#[derive(Debug, Clone)]
pub struct CosetEnumeration {
    field: Arc<LocalField>,
    x: ApartmentPoint,
    r: Q,
    t: Q,
    /// `(i, j, lowest exponent, number of digits)`.
    slots: Vec<(usize, usize, i64, u32)>,
    count: u64,
}

pub fn enumerate_characters(field: &Arc<LocalField>, x: &ApartmentPoint, r: Q, t: Q, cap: u64) -> Result<CosetEnumeration> {
    check_range(r, t)?;
    if !field.is_qp() {
        return Err(Error::FieldMismatch("enumeration runs over Q_p".into()));
    }
    let n = x.n();
    let p = field.p();
    let mut slots = Vec::new();
    let mut count: u128 = 1;
    for i in 0..n {
        for j in 0..n {
            let lo = plus_exponent(x, t, i, j);
            let hi = plus_exponent(x, r, i, j);
            let len = (hi - lo).max(0) as u32;
            if len > 0 {
                slots.push((i, j, lo, len));
                count = count.saturating_mul((p as u128).saturating_pow(len));
            }
        }
    }
    if count > cap as u128 {
        return Err(Error::EnumerationTooLarge { count: count.to_string(), cap });
    }
    Ok(CosetEnumeration { field: field.clone(), x: x.clone(), r, t, slots, count: count as u64 })
}

impl CosetEnumeration {
    pub fn len(&self) -> u64 {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// The coset with index `idx` (digits in `[0, p)`, already canonical).
    pub fn get(&self, idx: u64) -> CharacterCoset {
        assert!(idx < self.count, "coset index out of range");
        let p = self.field.p();
        let n = self.x.n();
        let mut rep = Matrix::zeros(&self.field, n);
        let mut rem = idx;
        for &(i, j, lo, len) in &self.slots {
            let mut entry = Scalar::zero(&self.field);
            for k in 0..len {
                let d = rem % p;
                rem /= p;
                if d != 0 {
                    entry = &entry + &Scalar::from_int(&self.field, d as i64).shift(lo + k as i64);
                }
            }
            rep.set(i, j, entry);
        }
        CharacterCoset { x: self.x.clone(), r: self.r, t: self.t, form: BilinearForm::Trace, rep }
    }

    pub fn iter(&self) -> impl Iterator<Item = CharacterCoset> + '_ {
        (0..self.count).map(move |i| self.get(i))
    }

    pub fn par_map<T: Send>(&self, f: impl Fn(CharacterCoset) -> T + Sync + Send) -> Vec<T> {
        (0..self.count).into_par_iter().map(|i| f(self.get(i))).collect()
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Cor36Summary {
    pub cosets: u64,
    pub degenerate: u64,
    pub intertwined: u64,
    pub holds: u64,
    pub fails: u64,
    pub vacuous: u64,
    pub undecided: u64,
    pub precision_aborts: u64,
    /// Representatives of failing cosets.
    pub violations: Vec<Vec<Vec<String>>>,
}

/// Classifies every coset of an enumeration.
pub fn check_cor36_exhaustive(it: &Intertwiner, cosets: &CosetEnumeration, search_bound: usize) -> Cor36Summary {
    let rows = cosets.par_map(|c| {
        let inter = it.intertwines(&c);
        let degen = is_degenerate(&c, search_bound);
        let verdict = cor36_conclusion_holds(it, &c, search_bound);
        (c, inter, degen, verdict)
    });
    let mut out = Cor36Summary { cosets: cosets.len(), ..Default::default() };
    for (c, inter, degen, verdict) in rows {
        if matches!(inter, Ok(true)) {
            out.intertwined += 1;
        }
        if matches!(degen, Ok(Degeneracy::Degenerate(_))) {
            out.degenerate += 1;
        }
        match verdict {
            Ok(Cor36Verdict::Holds) => out.holds += 1,
            Ok(Cor36Verdict::Fails) => {
                out.fails += 1;
                out.violations.push(c.representative().render());
            }
            Ok(Cor36Verdict::Vacuous) => out.vacuous += 1,
            Ok(Cor36Verdict::Undecided) => out.undecided += 1,
            Err(_) => out.precision_aborts += 1,
        }
    }
    out
}

/// `{X : ψ(B(X, g_{x,r})) = 0} = g_{x,(−r)+}`, checked on generators: every
/// generator of `g_{x,(−r)+}` pairs trivially, and each `p^{m−1}E_ij` just
/// outside it pairs nontrivially with some generator of `g_{x,r}`.
pub fn verify_duality(field: &Arc<LocalField>, x: &ApartmentPoint, r: Q) -> Result<bool> {
    let n = x.n();
    let gens = lattice_generators(field, x, Depth::at(r));
    let pairs_trivially = |m: &Matrix| -> Result<bool> {
        for y in &gens {
            if !psi(&m.mul(y).trace())?.is_zero() {
                return Ok(false);
            }
        }
        Ok(true)
    };
    for d in lattice_generators(field, x, Depth::plus(-r)) {
        if !pairs_trivially(&d)? {
            return Ok(false);
        }
    }
    for i in 0..n {
        for j in 0..n {
            let outside = Matrix::unit(field, n, i, j).shift(plus_exponent(x, r, i, j) - 1);
            if pairs_trivially(&outside)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A random element `1 + Y` of `G_{x,r}` (`r > 0`), with `Y` drawn from a few
/// digit levels above each entry's threshold.
pub fn sample_g_xr<R: Rng + ?Sized>(field: &Arc<LocalField>, x: &ApartmentPoint, r: Depth, rng: &mut R) -> Matrix {
    let n = x.n();
    let p = field.p() as i64;
    let mut g = Matrix::identity(field, n);
    for i in 0..n {
        for j in 0..n {
            let m = min_exponent(r, x.diff(i, j));
            let mut s = g.get(i, j).clone();
            for k in 0..3 {
                let d = rng.random_range(0..p);
                if d != 0 {
                    s = &s + &Scalar::from_int(field, d).shift(m + k);
                }
            }
            g.set(i, j, s);
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp() -> Arc<LocalField> {
        LocalField::qp(5, 24).unwrap()
    }

    fn one() -> Q {
        Q::from_integer(1)
    }

    fn two() -> Q {
        Q::from_integer(2)
    }

    fn e(i: usize, j: usize) -> Matrix {
        Matrix::unit(&qp(), 2, i, j)
    }

    #[test]
    fn character_values() {
        let f = qp();
        let x = ApartmentPoint::origin(2);
        let c = CharacterCoset::new(x, one(), two(), &e(0, 1).shift(-1)).unwrap();
        let d = coset_character(&c).unwrap();
        let id = Matrix::identity(&f, 2);
        assert_eq!(d.eval(&id.add(&e(1, 0).shift(1))).unwrap().to_string(), "1/5");
        assert!(d.eval(&id.add(&e(0, 0).shift(1))).unwrap().is_zero());
        let integral = CharacterCoset::new(ApartmentPoint::origin(2), one(), two(), &e(0, 1)).unwrap();
        assert!(integral.is_zero_coset());
        assert!(coset_character(&integral).unwrap().trivial_on(Depth::at(one())).unwrap());
    }

    #[test]
    fn abelian_range() {
        let x = ApartmentPoint::origin(2);
        let err = CharacterCoset::new(x, one(), Q::from_integer(3), &e(0, 1)).unwrap_err();
        assert_eq!(err.kind(), "OutOfAbelianRange");
    }

    #[test]
    fn triviality_depths() {
        let x = ApartmentPoint::origin(2);
        let c = CharacterCoset::new(x.clone(), one(), two(), &e(0, 1).shift(-1)).unwrap();
        assert_eq!(triviality_depth(&c).unwrap(), TrivialityDepth::At(Depth::int(1)));
        let c2 = CharacterCoset::new(x.clone(), one(), two(), &e(0, 1).add(&e(0, 0)).shift(-1)).unwrap();
        assert_eq!(triviality_depth(&c2).unwrap(), TrivialityDepth::At(Depth::int(1)));
        let z = CharacterCoset::new(x, one(), two(), &Matrix::zeros(&qp(), 2)).unwrap();
        assert_eq!(triviality_depth(&z).unwrap(), TrivialityDepth::BelowR);
    }

    #[test]
    fn degeneracy_examples() {
        let x = ApartmentPoint::origin(2);
        let c = CharacterCoset::new(x.clone(), one(), two(), &e(0, 1).shift(-1)).unwrap();
        assert!(is_degenerate(&c, 10).unwrap().is_degenerate());
        let scalar = Matrix::identity(&qp(), 2).shift(-1);
        let c2 = CharacterCoset::new(x.clone(), one(), two(), &scalar).unwrap();
        assert_eq!(is_degenerate(&c2, 10).unwrap().label(), "false");
        let z = CharacterCoset::new(x, one(), two(), &Matrix::zeros(&qp(), 2)).unwrap();
        assert!(is_degenerate(&z, 10).unwrap().is_degenerate());
    }

    #[test]
    fn residue_witness_for_conjugated_nilpotent() {
        // Residue [[1, 1], [-1, -1]] is nilpotent but not triangular.
        let f = qp();
        let x = ApartmentPoint::origin(2);
        let m = Matrix::from_i64(&f, &[&[1, 1], &[-1, -1]]).shift(-1).add(&e(0, 0).shift(3));
        let c = CharacterCoset::new(x, one(), two(), &m).unwrap();
        let Degeneracy::Degenerate(w) = is_degenerate(&c, 10).unwrap() else { panic!("expected degenerate") };
        assert!(is_nilpotent(&w));
        assert!(in_coset(&w, &c).unwrap());
    }

    #[test]
    fn gl2_balls_agree_with_search() {
        let f = qp();
        let half = ApartmentPoint::new(vec![Q::new(1, 2), Q::zero()]);
        let en = enumerate_characters(&f, &half, one(), two(), DEFAULT_ENUMERATION_CAP).unwrap();
        let mut degenerate = 0;
        for c in en.iter() {
            let exact = is_degenerate(&c, 0).unwrap();
            if let Degeneracy::Degenerate(w) = &exact {
                assert!(is_nilpotent(w) && in_coset(w, &c).unwrap(), "{:?} {:?} {}", c.representative().render(), w.render(), is_nilpotent(w));
                degenerate += 1;
            }
            if let Degeneracy::Degenerate(_) = bounded_search(&c, 60).unwrap() {
                assert!(exact.is_degenerate());
            }
        }
        assert!(degenerate > 1);
    }

    #[test]
    fn intertwining_examples() {
        let f = qp();
        let x = ApartmentPoint::origin(2);
        let c = CharacterCoset::new(x, one(), two(), &e(0, 1).shift(-1)).unwrap();
        let g6 = Matrix::from_i64(&f, &[&[6, 0], &[0, 1]]);
        let g2 = Matrix::from_i64(&f, &[&[2, 0], &[0, 1]]);
        assert!(gamma_intertwines(&g6, &c, GroupKind::GL).unwrap());
        assert!(!gamma_intertwines(&g2, &c, GroupKind::GL).unwrap());
        assert!(gamma_intertwines(&Matrix::identity(&f, 2), &c, GroupKind::GL).unwrap());
    }

    #[test]
    fn point_must_be_fixed() {
        let f = qp();
        let half = ApartmentPoint::new(vec![Q::new(1, 2), Q::zero()]);
        let c = CharacterCoset::new(half, one(), two(), &Matrix::zeros(&f, 2)).unwrap();
        let rot = Matrix::from_i64(&f, &[&[0, 1], &[-1, 0]]);
        assert_eq!(gamma_intertwines(&rot, &c, GroupKind::GL).unwrap_err().kind(), "PointNotFixed");
    }

    #[test]
    fn cor36_examples() {
        let f = qp();
        let x = ApartmentPoint::origin(2);
        let c = CharacterCoset::new(x.clone(), one(), two(), &e(0, 1).shift(-1)).unwrap();
        let it2 = Intertwiner::new(&Matrix::from_i64(&f, &[&[2, 0], &[0, 1]]), &x, GroupKind::GL).unwrap();
        assert_eq!(cor36_conclusion_holds(&it2, &c, 10).unwrap(), Cor36Verdict::Vacuous);
        let it6 = Intertwiner::new(&Matrix::from_i64(&f, &[&[6, 0], &[0, 1]]), &x, GroupKind::GL).unwrap();
        assert_eq!(cor36_conclusion_holds(&it6, &c, 10).unwrap(), Cor36Verdict::Holds);
        let z = CharacterCoset::new(x, one(), two(), &Matrix::zeros(&f, 2)).unwrap();
        assert_eq!(cor36_conclusion_holds(&it2, &z, 10).unwrap(), Cor36Verdict::Holds);
    }

    #[test]
    fn enumeration_counts() {
        let f = qp();
        let x0 = ApartmentPoint::origin(2);
        assert_eq!(enumerate_characters(&f, &x0, one(), two(), DEFAULT_ENUMERATION_CAP).unwrap().len(), 625);
        assert_eq!(enumerate_characters(&f, &x0, one(), one(), DEFAULT_ENUMERATION_CAP).unwrap().len(), 1);
        let half = ApartmentPoint::new(vec![Q::new(1, 2), Q::zero()]);
        assert_eq!(enumerate_characters(&f, &half, one(), two(), DEFAULT_ENUMERATION_CAP).unwrap().len(), 625);
        let err = enumerate_characters(&f, &ApartmentPoint::origin(4), one(), two(), 1000).unwrap_err();
        assert_eq!(err.kind(), "EnumerationTooLarge");
    }

    #[test]
    fn duality() {
        let f = qp();
        assert!(verify_duality(&f, &ApartmentPoint::origin(2), one()).unwrap());
        assert!(verify_duality(&f, &ApartmentPoint::new(vec![Q::new(1, 2), Q::zero()]), Q::new(1, 2)).unwrap());
    }

    #[test]
    fn cor36_exhaustive_instances() {
        let f = qp();
        let half = ApartmentPoint::new(vec![Q::new(1, 2), Q::zero()]);
        let it = Intertwiner::new(&Matrix::from_i64(&f, &[&[1, 1], &[5, 1]]), &half, GroupKind::GL).unwrap();
        let en = enumerate_characters(&f, &half, one(), two(), DEFAULT_ENUMERATION_CAP).unwrap();
        let sum = check_cor36_exhaustive(&it, &en, DEFAULT_SEARCH_BOUND);
        assert_eq!((sum.fails, sum.undecided, sum.precision_aborts), (0, 0, 0));
        assert!(sum.holds >= 1 && sum.degenerate > 1 && sum.intertwined > 1, "{sum:?}");

        let x0 = ApartmentPoint::origin(2);
        let it2 = Intertwiner::new(&Matrix::from_i64(&f, &[&[2, 0], &[0, 1]]), &x0, GroupKind::GL).unwrap();
        let en0 = enumerate_characters(&f, &x0, one(), two(), DEFAULT_ENUMERATION_CAP).unwrap();
        let sum2 = check_cor36_exhaustive(&it2, &en0, DEFAULT_SEARCH_BOUND);
        assert_eq!(sum2.holds, 1, "{sum2:?}");
        assert_eq!(sum2.fails, 0);
    }
}
