use std::sync::Arc;

use num_traits::Zero;

use super::{floor_q, ApartmentPoint, Depth, GroupKind, GroupSpec};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::padic::{LocalField, Scalar, Val, Q};

fn check_dim(m: &Matrix, x: &ApartmentPoint) -> Result<()> {
    if m.n() != x.n() {
        return Err(Error::Dimension(format!("{}x{} matrix at a point with {} coordinates", m.n(), m.n(), x.n())));
    }
    Ok(())
}

/// Runs `test` on every entry; a decisive `false` wins over precision failures.
fn all_entries(m: &Matrix, mut test: impl FnMut(usize, usize, &Scalar) -> Result<bool>) -> Result<bool> {
    let mut pending = None;
    for (i, j, s) in m.entries() {
        match test(i, j, s) {
            Ok(true) => {}
            Ok(false) => return Ok(false),
            Err(e) if e.is_precision() => pending = pending.or(Some(e)),
            Err(e) => return Err(e),
        }
    }
    match pending {
        Some(e) => Err(e),
        None => Ok(true),
    }
}

/// `X ∈ g_{x,r}` (over the field of `X`).
pub fn lattice_membership(m: &Matrix, x: &ApartmentPoint, r: Depth) -> Result<bool> {
    check_dim(m, x)?;
    all_entries(m, |i, j, s| s.val().at_least(r.value - x.diff(i, j), r.plus))
}

/// Element depth: the `r` with `X ∈ g_{x,r} ∖ g_{x,r+}`.
pub fn element_lattice_depth(m: &Matrix, x: &ApartmentPoint) -> Result<Depth> {
    check_dim(m, x)?;
    let mut best: Option<Q> = None;
    let mut approx_bound: Option<Q> = None;
    for (i, j, s) in m.entries() {
        match s.val() {
            Val::Finite(v) => {
                let d = v + x.diff(i, j);
                best = Some(best.map_or(d, |b| b.min(d)));
            }
            Val::ApproxZero { bound } => {
                let d = bound + x.diff(i, j);
                approx_bound = Some(approx_bound.map_or(d, |b| b.min(d)));
            }
            Val::Zero => {}
        }
    }
    match (best, approx_bound) {
        (None, None) => Err(Error::ZeroAtPrecision),
        (None, Some(b)) => Err(Error::InsufficientPrecision(format!(
            "every entry vanishes to precision; depth is at least {b}"
        ))),
        (Some(d), Some(b)) if b <= d => Err(Error::InsufficientPrecision(format!(
            "depth {d} is not separated from an entry known only beyond {b}"
        ))),
        (Some(d), _) => Ok(Depth::at(d)),
    }
}

/// `g ∈ G_{x,r}` for `r > 0` (`0+` allowed).
pub fn group_membership(g: &Matrix, x: &ApartmentPoint, r: Depth) -> Result<bool> {
    check_dim(g, x)?;
    if r <= Depth::at(Q::zero()) {
        return Err(Error::NonPositiveDepth(r.to_string()));
    }
    let one = Scalar::one(g.field());
    all_entries(g, |i, j, s| {
        let d = if i == j { s - &one } else { s.clone() };
        d.val().at_least(r.value - x.diff(i, j), r.plus)
    })
}

/// `g ∈ G_{x,0}`: integral at `x` with unit determinant.
pub fn parahoric_membership(g: &Matrix, x: &ApartmentPoint) -> Result<bool> {
    if !lattice_membership(g, x, Depth::at(Q::zero()))? {
        return Ok(false);
    }
    match g.det().val() {
        Val::Finite(v) => Ok(v.is_zero()),
        _ => Err(Error::InsufficientPrecision("determinant vanishes to precision".into())),
    }
}

impl GroupSpec {
    /// Lattice membership in `g_{x,r}`; for SL the element must also be traceless.
    pub fn lattice_membership(&self, m: &Matrix, x: &ApartmentPoint, r: Depth) -> Result<bool> {
        if self.kind == GroupKind::SL && !m.trace().is_zero() {
            return Ok(false);
        }
        lattice_membership(m, x, r)
    }

    /// Subgroup membership in `G_{x,r}`; for SL the determinant must be 1.
    pub fn group_membership(&self, g: &Matrix, x: &ApartmentPoint, r: Depth) -> Result<bool> {
        if self.kind == GroupKind::SL && !(&g.det() - &Scalar::one(g.field())).is_zero() {
            return Ok(false);
        }
        group_membership(g, x, r)
    }
}

fn is_integer(q: Q) -> bool {
    q.is_integer()
}

/// Whether `r` is a break of the lattice filtration at `x` for value step `1/e`.
pub fn break_set_contains(x: &ApartmentPoint, r: Q, e: u32) -> bool {
    let e = Q::from_integer(e as i64);
    (0..x.n()).any(|i| (0..x.n()).any(|j| is_integer((r - x.diff(i, j)) * e)))
}

/// Off-diagonal positions `(i, j, m)` with `m + x_i − x_j = r`, `m ∈ Z`: the
/// depths a nilpotent element over `Q_p` can have at `x`.
pub fn nilpotent_break(x: &ApartmentPoint, r: Q) -> Vec<(usize, usize, i64)> {
    let mut out = Vec::new();
    for i in 0..x.n() {
        for j in 0..x.n() {
            let m = r - x.diff(i, j);
            if i != j && is_integer(m) {
                out.push((i, j, m.to_integer()));
            }
        }
    }
    out
}

/// Smallest `m` with `m/e + c` meeting `d`.
pub(crate) fn min_steps(d: Depth, c: Q, e: u32) -> i64 {
    let t = (d.value - c) * Q::from_integer(e as i64);
    if d.plus {
        floor_q(t) + 1
    } else {
        t.ceil().to_integer()
    }
}

/// `ϖ^m` for a possibly negative `m`.
pub(crate) fn uniformizer_power(field: &Arc<LocalField>, m: i64) -> Scalar {
    let pi = Scalar::uniformizer(field);
    if m >= 0 {
        pi.pow(m as u32)
    } else if field.e() == 1 {
        Scalar::one(field).shift(m)
    } else {
        pi.pow((-m) as u32).inv().expect("uniformizer is invertible")
    }
}

/// Generators `ϖ^{m_ij} E_ij` of `g_{x,r}` as a module over the integers of
/// `field` (together with `ζ`-multiples when the field is unramified over Q_p).
pub fn lattice_generators(field: &Arc<LocalField>, x: &ApartmentPoint, r: Depth) -> Vec<Matrix> {
    let n = x.n();
    let e = field.e();
    let zeta = Scalar::zeta(field);
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let m = min_steps(r, x.diff(i, j), e);
            let c = uniformizer_power(field, m);
            let mut unit = Scalar::one(field);
            for _ in 0..field.f() {
                let mut g = Matrix::zeros(field, n);
                g.set(i, j, &c * &unit);
                out.push(g);
                unit = &unit * &zeta;
            }
        }
    }
    out
}
