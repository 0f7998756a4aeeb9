use std::sync::Arc;

use num_traits::Zero;
use serde::Serialize;

use super::lattice::{lattice_generators, lattice_membership};
use super::{floor_q, ApartmentPoint, Depth};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::padic::{FieldSummary, LocalField, Scalar, Val, Q};

/// Eigen-data of a regular semisimple `γ`: `P⁻¹ γ P = diag(λ_1..λ_n)` over `E`.
#[derive(Debug, Clone)]
pub struct TorusData {
    pub gamma: Matrix,
    pub splitting: Arc<LocalField>,
    pub eigenvalues: Vec<Scalar>,
    /// Columns are eigenvectors.
    pub eigenbasis: Matrix,
    pub eigenbasis_inv: Matrix,
    pub is_split_over_k: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TorusSummary {
    pub splitting: FieldSummary,
    pub eigenvalues: Vec<String>,
    pub eigenbasis: Vec<Vec<String>>,
    pub is_split_over_k: bool,
}

impl TorusData {
    /// Assembles and checks eigen-data.
    pub fn new(gamma: Matrix, splitting: Arc<LocalField>, eigenvalues: Vec<Scalar>, eigenbasis: Matrix) -> Result<Self> {
        let n = gamma.n();
        if eigenvalues.len() != n || eigenbasis.n() != n {
            return Err(Error::Dimension("eigen-data does not match the matrix size".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if eigenvalues[i].eq_at_precision(&eigenvalues[j]) {
                    return Err(Error::NotRegular(format!(
                        "eigenvalues {} and {} coincide",
                        eigenvalues[i].render(),
                        eigenvalues[j].render()
                    )));
                }
            }
        }
        let eigenbasis = eigenbasis.coerce_to(&splitting)?;
        let eigenbasis_inv = eigenbasis.inverse().map_err(|_| {
            Error::PrecisionTooLowToSeparateRoots("eigenbasis is singular at precision".into())
        })?;
        let ge = gamma.coerce_to(&splitting)?;
        let d = eigenbasis_inv.mul(&ge).mul(&eigenbasis);
        for (i, j, s) in d.entries() {
            let target = if i == j { s - &eigenvalues[i] } else { s.clone() };
            if !target.is_zero() {
                return Err(Error::PrecisionTooLowToSeparateRoots(format!(
                    "eigenbasis fails to diagonalize at entry ({i}, {j})"
                )));
            }
        }
        let is_split_over_k = eigenvalues.iter().all(Scalar::is_in_base)
            && eigenbasis.entries().all(|(_, _, s)| s.is_in_base());
        Ok(TorusData { gamma, splitting, eigenvalues, eigenbasis, eigenbasis_inv, is_split_over_k })
    }

    pub fn n(&self) -> usize {
        self.gamma.n()
    }

    pub fn base_field(&self) -> &Arc<LocalField> {
        self.gamma.field()
    }

    /// `P⁻¹ M P`.
    pub fn to_eigen(&self, m: &Matrix) -> Result<Matrix> {
        let me = m.coerce_to(&self.splitting)?;
        Ok(self.eigenbasis_inv.mul(&me).mul(&self.eigenbasis))
    }

    /// `P D P⁻¹`.
    pub fn from_eigen(&self, d: &Matrix) -> Matrix {
        self.eigenbasis.mul(d).mul(&self.eigenbasis_inv)
    }

    /// Eigenvalues of an element of the torus, in the same order as those of `γ`.
    pub fn eigenvalues_of(&self, t: &Matrix) -> Result<Vec<Scalar>> {
        if !t.commutes_with(&self.gamma) {
            return Err(Error::NotInTorus("element does not commute with gamma".into()));
        }
        let d = self.to_eigen(t)?;
        if !d.is_diagonal() {
            return Err(Error::NotInTorus("element is not diagonal in the eigenbasis".into()));
        }
        Ok(d.diagonal())
    }

    pub fn summary(&self) -> TorusSummary {
        TorusSummary {
            splitting: self.splitting.summary(),
            eigenvalues: self.eigenvalues.iter().map(Scalar::render).collect(),
            eigenbasis: self.eigenbasis.render(),
            is_split_over_k: self.is_split_over_k,
        }
    }
}

/// `t ∈ T_r`: `ν(λ_i(t) − 1) ≥ r` for `r > 0`, units for `r = 0`.
pub fn torus_membership(torus: &TorusData, t: &Matrix, r: Depth) -> Result<bool> {
    if r.value < Q::zero() {
        return Err(Error::PreconditionViolated(format!("torus filtration index {r} is negative")));
    }
    let mu = torus.eigenvalues_of(t)?;
    let one = Scalar::one(&torus.splitting);
    let mut pending = None;
    for m in &mu {
        let verdict = if r == Depth::at(Q::zero()) {
            match m.val() {
                Val::Finite(v) => Ok(v.is_zero()),
                _ => Err(Error::InsufficientPrecision("eigenvalue vanishes to precision".into())),
            }
        } else {
            (m - &one).val().at_least(r.value, r.plus)
        };
        match verdict {
            Ok(true) => {}
            Ok(false) => return Ok(false),
            Err(e) => pending = pending.or(Some(e)),
        }
    }
    match pending {
        Some(e) => Err(e),
        None => Ok(true),
    }
}

/// `X = Y + Z` with `Y ∈ t` and `Z ∈ t^⊥`, computed through the eigenbasis.
pub fn t_perp_decompose(x: &Matrix, torus: &TorusData) -> Result<(Matrix, Matrix)> {
    let d = torus.to_eigen(x)?;
    let y_e = torus.from_eigen(&d.diagonal_part());
    let y = if x.field().degree() < torus.splitting.degree() {
        y_e.to_base().map_err(|_| {
            Error::PrecisionTooLowToSeparateRoots("torus component does not descend at precision".into())
        })?
    } else {
        y_e
    };
    let z = x.sub(&y);
    Ok((y, z))
}

/// Breaks of the filtration at `x` with value step `1/e`, inside `[0, 1)`.
pub(crate) fn breaks_in_unit_interval(x: &ApartmentPoint, e: u32) -> Vec<Q> {
    let step = Q::new(1, e as i64);
    let mut out = Vec::new();
    for i in 0..x.n() {
        for j in 0..x.n() {
            let c = x.diff(i, j);
            // Smallest c + m/e that is >= 0.
            let m = floor_q(-c / step);
            let mut v = c + step * Q::from_integer(m);
            while v < Q::zero() {
                v += step;
            }
            while v < Q::from_integer(1) {
                if !out.contains(&v) {
                    out.push(v);
                }
                v += step;
            }
        }
    }
    out.sort();
    out
}

/// Whether `x` lies in the apartment of the torus over `E`: every lattice
/// `g(E)_{x,r}` must split along the eigen-root-space decomposition.
pub fn point_in_torus_apartment(torus: &TorusData, x: &ApartmentPoint) -> Result<bool> {
    if x.n() != torus.n() {
        return Err(Error::Dimension("point and torus have different rank".into()));
    }
    let field = &torus.splitting;
    let n = torus.n();
    for r in breaks_in_unit_interval(x, field.e()) {
        let depth = Depth::at(r);
        for g in lattice_generators(field, x, depth) {
            let q = torus.eigenbasis_inv.mul(&g).mul(&torus.eigenbasis);
            for a in 0..n {
                for b in 0..n {
                    let c = q.get(a, b);
                    if c.is_exact_zero() {
                        continue;
                    }
                    let comp = Matrix::from_fn(field, n, |i, j| {
                        &(c * torus.eigenbasis.get(i, a)) * torus.eigenbasis_inv.get(b, j)
                    });
                    if !lattice_membership(&comp, x, depth)? {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// `Ad(γ) g_{x,r} = g_{x,r}` for every break, checked on generators.
pub fn stabilizes_filtration(gamma: &Matrix, x: &ApartmentPoint) -> Result<bool> {
    let field = gamma.field();
    let inv = gamma.inverse()?;
    for r in breaks_in_unit_interval(x, field.e()) {
        let depth = Depth::at(r);
        for g in lattice_generators(field, x, depth) {
            let fwd = gamma.mul(&g).mul(&inv);
            let back = inv.mul(&g).mul(gamma);
            if !lattice_membership(&fwd, x, depth)? || !lattice_membership(&back, x, depth)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
