//! Type-A Chevalley formulas for the adjoint action.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::padic::{LocalField, Scalar};

/// The root `ε_i − ε_j` of `gl_n`; `E_b = E_ij`, `H_b = E_ii − E_jj`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Root {
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn new(i: usize, j: usize) -> Self {
        assert_ne!(i, j, "a root needs i != j");
        Root { i, j }
    }

    pub fn neg(self) -> Self {
        Root { i: self.j, j: self.i }
    }

    /// All roots of `gl_n`.
    pub fn all(n: usize) -> Vec<Root> {
        let mut v = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    v.push(Root { i, j });
                }
            }
        }
        v
    }

    pub fn e(self, field: &Arc<LocalField>, n: usize) -> Matrix {
        Matrix::unit(field, n, self.i, self.j)
    }

    pub fn h(self, field: &Arc<LocalField>, n: usize) -> Matrix {
        Matrix::unit(field, n, self.i, self.i).sub(&Matrix::unit(field, n, self.j, self.j))
    }
}

/// The acting group element.
#[derive(Debug, Clone)]
pub enum ChevalleyElement {
    /// `e_b(λ) = I + λ E_b`.
    Unipotent(Root, Scalar),
    /// `t = diag(t_1..t_n)`.
    Torus(Vec<Scalar>),
}

/// The Lie algebra element acted on.
#[derive(Debug, Clone)]
pub enum CartanOrRoot {
    Root(Root),
    /// Diagonal `H = diag(h_1..h_n)`.
    Cartan(Vec<Scalar>),
}

/// `g X g⁻¹`.
pub fn ad_action(g: &Matrix, x: &Matrix) -> Result<Matrix> {
    x.conjugate_by(g)
}

impl ChevalleyElement {
    pub fn matrix(&self, field: &Arc<LocalField>, n: usize) -> Matrix {
        match self {
            ChevalleyElement::Unipotent(b, l) => Matrix::identity(field, n).add(&b.e(field, n).scale(l)),
            ChevalleyElement::Torus(t) => Matrix::diag(field, t),
        }
    }
}

impl CartanOrRoot {
    pub fn matrix(&self, field: &Arc<LocalField>, n: usize) -> Matrix {
        match self {
            CartanOrRoot::Root(c) => c.e(field, n),
            CartanOrRoot::Cartan(h) => Matrix::diag(field, h),
        }
    }
}

/// Closed forms:
/// `Ad(e_b(λ))E_b = E_b`,
/// `Ad(e_b(λ))E_{−b} = E_{−b} + λH_b − λ²E_b`,
/// `Ad(e_b(λ))E_c = Σ_i M_{b,c;i} λ^i E_{ib+c}` otherwise (only `i ≤ 1` occurs in type A),
/// `Ad(t)E_c = c(t)E_c`, `Ad(e_b(λ))H = H − db(H)λE_b`, `Ad(t)H = H`.
pub fn chevalley_ad(field: &Arc<LocalField>, n: usize, g: &ChevalleyElement, c: &CartanOrRoot) -> Result<Matrix> {
    match (g, c) {
        (ChevalleyElement::Unipotent(b, l), CartanOrRoot::Root(c)) => {
            let eb = b.e(field, n);
            if c == b {
                return Ok(eb);
            }
            if *c == b.neg() {
                let hb = b.h(field, n);
                return Ok(c.e(field, n).add(&hb.scale(l)).sub(&eb.scale(&(l * l))));
            }
            let mut out = c.e(field, n);
            // b + c is a root when the indices chain: (i,j)+(j,l) = (i,l) with M = 1,
            // (k,i)+(i,j) = (k,j) with M = −1.
            if b.j == c.i {
                out = out.add(&Root::new(b.i, c.j).e(field, n).scale(l));
            }
            if c.j == b.i {
                out = out.sub(&Root::new(c.i, b.j).e(field, n).scale(l));
            }
            Ok(out)
        }
        (ChevalleyElement::Torus(t), CartanOrRoot::Root(c)) => {
            let ratio = t[c.i].div(&t[c.j])?;
            Ok(c.e(field, n).scale(&ratio))
        }
        (ChevalleyElement::Unipotent(b, l), CartanOrRoot::Cartan(h)) => {
            let db = &h[b.i] - &h[b.j];
            Ok(Matrix::diag(field, h).sub(&b.e(field, n).scale(&(&db * l))))
        }
        (ChevalleyElement::Torus(_), CartanOrRoot::Cartan(h)) => Ok(Matrix::diag(field, h)),
    }
}

/// The same action by explicit conjugation.
pub fn chevalley_direct(field: &Arc<LocalField>, n: usize, g: &ChevalleyElement, c: &CartanOrRoot) -> Result<Matrix> {
    if let ChevalleyElement::Torus(t) = g {
        if t.len() != n {
            return Err(Error::Dimension("torus element has the wrong size".into()));
        }
    }
    ad_action(&g.matrix(field, n), &c.matrix(field, n))
}
