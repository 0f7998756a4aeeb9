//! Regular depth `s(γ)`, the Weyl discriminant, certificates and the
//! constancy radius `max{s(γ), ρ} + s(γ)`.
//!
//! `s(γ)` is not the depth of `γ` in the sense of Adler–DeBacker; the two
//! agree for good elements only.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{render_q, torus_membership, Depth, GroupKind, TorusData};
use crate::matrix::Matrix;
use crate::padic::{discriminant, hensel_factor, FieldSummary, LocalField, Scalar, Val, Q};

/// Largest splitting-field degree tried by the automatic search.
pub const AUTO_SPLITTING_DEGREE_CAP: usize = 8;

pub(crate) fn ser_q<S: serde::Serializer>(q: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&render_q(q))
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Residue of a unit of `K`, used to walk the multiplicative group of `F_q`.
fn residue_mul(a: &Scalar, b: &Scalar) -> Scalar {
    (a * b).truncate_below(1).expect("exact residues")
}

fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

fn residue_pow(a: &Scalar, mut k: u64) -> Scalar {
    let mut base = a.clone();
    let mut acc = Scalar::one(a.field());
    while k > 0 {
        if k & 1 == 1 {
            acc = residue_mul(&acc, &base);
        }
        base = residue_mul(&base, &base);
        k >>= 1;
    }
    acc
}

/// A generator of `F_q^×`, as a residue representative in `K`.
fn residue_generator(k: &Arc<LocalField>) -> Scalar {
    let q = k.residue_size();
    let primes = prime_factors(q - 1);
    for a in Scalar::residue_representatives(k).into_iter().skip(1) {
        if primes.iter().all(|&l| !residue_pow(&a, (q - 1) / l).is_one()) {
            return a;
        }
    }
    unreachable!("F_q^× is cyclic")
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Tame candidates `K(ζ)((p·u)^{1/e})` with `e·f ≤ cap`, by increasing degree.
pub fn tame_candidates(base: &Arc<LocalField>, cap: usize) -> Result<Vec<Arc<LocalField>>> {
    let p = base.p();
    let mut shapes: Vec<(usize, u32, u32)> = Vec::new();
    for f in 1..=cap as u32 {
        for e in 1..=cap as u32 {
            if (e * f) as usize <= cap && !(e as u64).is_multiple_of(p) {
                shapes.push(((e * f) as usize, e, f));
            }
        }
    }
    shapes.sort();
    let mut out = Vec::new();
    for (_, e, f) in shapes {
        if e == 1 {
            out.push(if f == 1 { base.clone() } else { LocalField::make_extension(base, f, &[])? });
            continue;
        }
        let k = LocalField::make_extension(base, f, &[])?;
        let q = k.residue_size();
        let g = residue_generator(&k);
        let classes = gcd(e as u64, q - 1);
        for c in 0..classes {
            let u = residue_pow(&g, c);
            let coords: Vec<BigRational> = u
                .coordinate_literals()
                .iter()
                .map(|s| BigRational::from_integer(s.parse::<BigInt>().expect("residue digits are integers")))
                .collect();
            out.push(LocalField::tame_radical(base, f, e, &coords)?);
        }
    }
    Ok(out)
}

/// The eigenvector of `γ` for `λ`: the best-conditioned column of `adj(γ − λI)`,
/// scaled so that its dominant entry is 1.
fn eigenvector(gamma_e: &Matrix, lambda: &Scalar) -> Result<Vec<Scalar>> {
    let n = gamma_e.n();
    let shifted = gamma_e.sub(&Matrix::identity(gamma_e.field(), n).scale(lambda));
    let adj = shifted.adjugate();
    let mut best: Option<(Q, usize, usize)> = None;
    for (i, j, s) in adj.entries() {
        if let Val::Finite(v) = s.val() {
            if best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, i, j));
            }
        }
    }
    let Some((_, i, j)) = best else {
        return Err(Error::PrecisionTooLowToSeparateRoots("eigenspace is not one-dimensional at precision".into()));
    };
    let pivot = adj.get(i, j).clone();
    adj.column(j).iter().map(|s| s.div(&pivot)).collect()
}

/// Eigen-data of `γ` over a tame splitting field.
pub fn torus_of(gamma: &Matrix, hint: Option<&Arc<LocalField>>) -> Result<TorusData> {
    let k = gamma.field().clone();
    if !k.is_qp() {
        return Err(Error::FieldMismatch("gamma must have entries in Q_p".into()));
    }
    if gamma.det().is_zero() {
        return Err(Error::PreconditionViolated("gamma is not invertible at precision".into()));
    }
    let chi = gamma.charpoly();
    let disc = discriminant(&chi)?;
    if disc.is_zero() {
        return Err(Error::NotRegular("characteristic polynomial has a repeated root at precision".into()));
    }
    let n = gamma.n();
    let candidates = match hint {
        Some(h) => {
            if !h.same_tower(&k) {
                return Err(Error::FieldMismatch("extension hint is not over the base field".into()));
            }
            vec![h.clone()]
        }
        None => tame_candidates(&k, factorial(n).min(AUTO_SPLITTING_DEGREE_CAP))?,
    };
    let mut last_err = None;
    for field in candidates {
        match hensel_factor(&chi, &field) {
            Ok(fac) if fac.roots.len() == n => {
                let gamma_e = gamma.coerce_to(&field)?;
                let mut cols = Vec::with_capacity(n);
                for l in &fac.roots {
                    cols.push(eigenvector(&gamma_e, l)?);
                }
                let p = Matrix::from_columns(&field, &cols);
                return TorusData::new(gamma.clone(), field, fac.roots, p);
            }
            Ok(_) => {}
            Err(e) if e.is_precision() => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    if let Some(e) = last_err {
        return Err(e);
    }
    Err(match hint {
        Some(_) => Error::WildTorus("the hinted field does not split the characteristic polynomial".into()),
        None => Error::WildTorus(format!(
            "no tame extension of degree <= {} splits the characteristic polynomial",
            factorial(n).min(AUTO_SPLITTING_DEGREE_CAP)
        )),
    })
}

fn ratio_valuation(a: &Scalar, b: &Scalar) -> Result<Q> {
    let va = (a - b).val().require("eigenvalue difference")?;
    let vb = b.val().require("eigenvalue")?;
    Ok(va - vb)
}

/// `s_α(γ) = ν(λ_i/λ_j − 1)`.
pub fn s_alpha(torus: &TorusData, i: usize, j: usize) -> Result<Q> {
    if i == j {
        return Err(Error::PreconditionViolated("a root needs i != j".into()));
    }
    ratio_valuation(&torus.eigenvalues[i], &torus.eigenvalues[j])
}

/// `s(γ) = max_α s_α(γ)`.
pub fn s_gamma(torus: &TorusData) -> Result<Q> {
    let n = torus.n();
    let mut best: Option<Q> = None;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let s = s_alpha(torus, i, j)?;
                best = Some(best.map_or(s, |b| b.max(s)));
            }
        }
    }
    best.ok_or_else(|| Error::NotRegular("no roots".into()))
}

/// `ν(D_{G/T}(t)) = ν(Π_{i≠j}(μ_i/μ_j − 1))` for `t ∈ T` (default `t = γ`).
pub fn weyl_discriminant(torus: &TorusData, t: Option<&Matrix>) -> Result<Q> {
    let mu = match t {
        Some(t) => torus.eigenvalues_of(t)?,
        None => torus.eigenvalues.clone(),
    };
    let field = &torus.splitting;
    let one = Scalar::one(field);
    let mut prod = Scalar::one(field);
    for i in 0..mu.len() {
        for j in 0..mu.len() {
            if i != j {
                prod = &prod * &(&mu[i].div(&mu[j])? - &one);
            }
        }
    }
    match prod.val() {
        Val::Finite(v) => Ok(v),
        Val::Zero => Err(Error::NotRegular("some root value equals 1".into())),
        Val::ApproxZero { bound } => {
            Err(Error::NotRegular(format!("discriminant vanishes to precision (valuation >= {bound})")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub regular: bool,
    pub compact: bool,
}

/// Regularity (distinct eigenvalues) and compactness (integral characteristic
/// polynomial, plus unit determinant for GL).
pub fn certify(gamma: &Matrix, kind: GroupKind) -> Result<Certificate> {
    let chi = gamma.charpoly();
    let regular = match discriminant(&chi)?.val() {
        Val::Finite(_) => true,
        Val::Zero => false,
        Val::ApproxZero { bound } => {
            return Err(Error::AmbiguousAtPrecision(format!("discriminant vanishes to precision {bound}")))
        }
    };
    let mut compact = true;
    for c in chi.coeffs() {
        match c.val().at_least(Q::zero(), false) {
            Ok(true) => {}
            Ok(false) => compact = false,
            Err(_) => return Err(Error::AmbiguousAtPrecision("characteristic polynomial coefficient".into())),
        }
    }
    if compact && kind == GroupKind::GL {
        match gamma.det().val() {
            Val::Finite(v) => compact = v.is_zero(),
            _ => return Err(Error::AmbiguousAtPrecision("determinant vanishes to precision".into())),
        }
    }
    Ok(Certificate { regular, compact })
}

#[derive(Debug, Clone, Serialize)]
pub struct RootValue {
    pub i: usize,
    pub j: usize,
    #[serde(serialize_with = "ser_q")]
    pub value: Q,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularDepthReport {
    pub s_alpha: Vec<RootValue>,
    #[serde(serialize_with = "ser_q")]
    pub s_gamma: Q,
    pub regular: bool,
    pub compact: bool,
    pub splitting: FieldSummary,
    #[serde(serialize_with = "ser_q")]
    pub disc_valuation: Q,
}

/// Full report for a regular `γ` with known eigen-data.
pub fn regular_depth_report(torus: &TorusData, kind: GroupKind) -> Result<RegularDepthReport> {
    let cert = certify(&torus.gamma, kind)?;
    let n = torus.n();
    let mut s_alpha_v = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s_alpha_v.push(RootValue { i, j, value: s_alpha(torus, i, j)? });
            }
        }
    }
    Ok(RegularDepthReport {
        s_gamma: s_gamma(torus)?,
        s_alpha: s_alpha_v,
        regular: cert.regular,
        compact: cert.compact,
        splitting: torus.splitting.summary(),
        disc_valuation: weyl_discriminant(torus, None)?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstancyRadius {
    #[serde(serialize_with = "ser_q")]
    pub rho_pi: Q,
    #[serde(serialize_with = "ser_q")]
    pub s: Q,
    pub radius: Depth,
}

fn require_compact_regular(torus: &TorusData, kind: GroupKind) -> Result<()> {
    let cert = certify(&torus.gamma, kind)?;
    if !cert.regular {
        return Err(Error::NotRegular("gamma has a repeated eigenvalue".into()));
    }
    if !cert.compact {
        return Err(Error::NotCompact("characteristic polynomial is not integral with unit determinant".into()));
    }
    Ok(())
}

/// `r = max{s(γ), ρ(π)} + s(γ)`, with the `+` flag.
pub fn constancy_radius(torus: &TorusData, rho_pi: Q, kind: GroupKind) -> Result<ConstancyRadius> {
    if rho_pi.is_negative() {
        return Err(Error::PreconditionViolated(format!("depth {} is negative", render_q(&rho_pi))));
    }
    require_compact_regular(torus, kind)?;
    let s = s_gamma(torus)?;
    Ok(ConstancyRadius { rho_pi, s, radius: Depth::plus(s.max(rho_pi) + s) })
}

/// Membership predicate for `γ T_{r+}`.
#[derive(Debug, Clone)]
pub struct NeighborhoodDescriptor {
    pub torus: TorusData,
    pub radius: Depth,
    gamma_inv: Matrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct DescriptorSummary {
    pub radius: Depth,
    pub congruences: Vec<String>,
    pub orbit: String,
}

impl NeighborhoodDescriptor {
    /// Whether `candidate ∈ γ T_{radius}`; only the torus coset is certified.
    pub fn accepts(&self, candidate: &Matrix) -> Result<bool> {
        let t = candidate.mul(&self.gamma_inv);
        if !t.commutes_with(&self.torus.gamma) {
            return Ok(false);
        }
        torus_membership(&self.torus, &t, self.radius)
    }

    pub fn congruences(&self) -> Vec<String> {
        let op = if self.radius.plus { ">" } else { ">=" };
        self.torus
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(i, l)| format!("v(mu_{}/({}) - 1) {op} {}", i + 1, l.render(), render_q(&self.radius.value)))
            .collect()
    }

    pub fn summary(&self) -> DescriptorSummary {
        DescriptorSummary {
            radius: self.radius,
            congruences: self.congruences(),
            orbit: format!("G-conjugates of gamma * T_{}", self.radius),
        }
    }
}

pub fn neighborhood_descriptor(torus: &TorusData, rho_pi: Q, kind: GroupKind) -> Result<NeighborhoodDescriptor> {
    let radius = constancy_radius(torus, rho_pi, kind)?.radius;
    let gamma_inv = torus.gamma.inverse()?;
    Ok(NeighborhoodDescriptor { torus: torus.clone(), radius, gamma_inv })
}

#[derive(Debug, Clone, Serialize)]
pub struct RootComparison {
    pub i: usize,
    pub j: usize,
    #[serde(serialize_with = "ser_q")]
    pub before: Q,
    #[serde(serialize_with = "ser_q")]
    pub after: Q,
    pub equal: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeepnessReport {
    pub roots: Vec<RootComparison>,
    #[serde(serialize_with = "ser_q")]
    pub s_before: Q,
    #[serde(serialize_with = "ser_q")]
    pub s_after: Q,
    #[serde(serialize_with = "ser_q")]
    pub s_recomputed: Q,
    pub compact_after: bool,
    pub regular_after: bool,
    #[serde(serialize_with = "ser_q")]
    pub disc_before: Q,
    #[serde(serialize_with = "ser_q")]
    pub disc_after: Q,
    pub passed: bool,
}

/// Compares `γ` and `γγ′` for `γ′ ∈ T_{s(γ)+}`.
pub fn check_deepness(torus: &TorusData, gamma_prime: &Matrix, kind: GroupKind) -> Result<DeepnessReport> {
    require_compact_regular(torus, kind)?;
    let s = s_gamma(torus)?;
    if !torus_membership(torus, gamma_prime, Depth::plus(s))? {
        return Err(Error::PreconditionViolated(format!("gamma' is not in T_{}", Depth::plus(s))));
    }
    let product = torus.gamma.mul(gamma_prime);
    let mu = torus.eigenvalues_of(&product)?;
    let n = torus.n();
    let mut roots = Vec::new();
    let mut s_after: Option<Q> = None;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let before = s_alpha(torus, i, j)?;
            let after = ratio_valuation(&mu[i], &mu[j])?;
            s_after = Some(s_after.map_or(after, |m| m.max(after)));
            roots.push(RootComparison { i, j, before, after, equal: before == after });
        }
    }
    let s_after = s_after.expect("n >= 2");
    let fresh = torus_of(&product, Some(&torus.splitting))?;
    let s_recomputed = s_gamma(&fresh)?;
    let cert = certify(&product, kind)?;
    let disc_before = weyl_discriminant(torus, None)?;
    let disc_after = weyl_discriminant(torus, Some(&product))?;
    let passed = roots.iter().all(|r| r.equal)
        && s_after == s
        && s_recomputed == s
        && cert.compact
        && cert.regular
        && disc_before == disc_after;
    Ok(DeepnessReport {
        roots,
        s_before: s,
        s_after,
        s_recomputed,
        compact_after: cert.compact,
        regular_after: cert.regular,
        disc_before,
        disc_after,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qp() -> Arc<LocalField> {
        LocalField::qp(5, 24).unwrap()
    }

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_i64(&qp(), rows)
    }

    #[test]
    fn split_diagonal() {
        let t = torus_of(&m(&[&[6, 0], &[0, 1]]), None).unwrap();
        assert!(t.is_split_over_k);
        assert_eq!(s_gamma(&t).unwrap(), Q::from_integer(1));
        assert_eq!(weyl_discriminant(&t, None).unwrap(), Q::from_integer(2));
    }

    #[test]
    fn ramified_torus() {
        let t = torus_of(&m(&[&[1, 1], &[5, 1]]), None).unwrap();
        assert_eq!(t.splitting.e(), 2);
        assert_eq!(s_gamma(&t).unwrap(), Q::new(1, 2));
        assert_eq!(weyl_discriminant(&t, None).unwrap(), Q::from_integer(1));
    }

    #[test]
    fn elliptic_unit() {
        let t = torus_of(&m(&[&[0, 1], &[-1, 0]]), None).unwrap();
        assert_eq!(s_gamma(&t).unwrap(), Q::zero());
        assert_eq!(weyl_discriminant(&t, None).unwrap(), Q::zero());
    }

    #[test]
    fn unramified_quadratic() {
        // t^2 - t + 2 is irreducible mod 5? disc = 1 - 8 = -7 = 3, a non-square.
        let t = torus_of(&m(&[&[0, -2], &[1, 1]]), None).unwrap();
        assert_eq!(t.splitting.f(), 2);
        assert_eq!(t.splitting.e(), 1);
        assert!(!t.is_split_over_k);
        assert_eq!(s_gamma(&t).unwrap(), Q::zero());
    }

    #[test]
    fn scalar_is_not_regular() {
        assert_eq!(torus_of(&m(&[&[2, 0], &[0, 2]]), None).unwrap_err().kind(), "NotRegular");
        let c = certify(&m(&[&[2, 0], &[0, 2]]), GroupKind::GL).unwrap();
        assert_eq!(c, Certificate { regular: false, compact: true });
    }

    #[test]
    fn noncompact_certificate() {
        let c = certify(&m(&[&[0, 1], &[5, 0]]), GroupKind::GL).unwrap();
        assert_eq!(c, Certificate { regular: true, compact: false });
    }

    #[test]
    fn radius_table() {
        let cases = [
            (&[&[6i64, 0][..], &[0, 1]][..], Q::zero(), Q::from_integer(2)),
            (&[&[1, 1], &[5, 1]], Q::new(3, 2), Q::from_integer(2)),
            (&[&[0, 1], &[-1, 0]], Q::zero(), Q::zero()),
        ];
        for (rows, rho, want) in cases {
            let t = torus_of(&m(rows), None).unwrap();
            let r = constancy_radius(&t, rho, GroupKind::GL).unwrap();
            assert_eq!(r.radius, Depth::plus(want));
        }
    }

    #[test]
    fn neighborhood_membership() {
        let t = torus_of(&m(&[&[6, 0], &[0, 1]]), None).unwrap();
        let d = neighborhood_descriptor(&t, Q::zero(), GroupKind::GL).unwrap();
        assert!(d.accepts(&m(&[&[6, 0], &[0, 1]])).unwrap());
        assert!(d.accepts(&m(&[&[6 * 126, 0], &[0, 1]])).unwrap());
        assert!(!d.accepts(&m(&[&[6 * 26, 0], &[0, 1]])).unwrap());
        assert!(!d.accepts(&m(&[&[6, 1], &[0, 1]])).unwrap());
    }

    #[test]
    fn deepness_holds() {
        let t = torus_of(&m(&[&[6, 0], &[0, 1]]), None).unwrap();
        let r = check_deepness(&t, &m(&[&[26, 0], &[0, 1]]), GroupKind::GL).unwrap();
        assert!(r.passed);
        let err = check_deepness(&t, &m(&[&[6, 0], &[0, 1]]), GroupKind::GL).unwrap_err();
        assert_eq!(err.kind(), "PreconditionViolated");
    }
}
