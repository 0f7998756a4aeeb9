use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use super::lattice::nilpotent_break;
use super::{ceil_q, ApartmentPoint, Depth};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::padic::{LocalField, Scalar};

fn random_unit<R: Rng + ?Sized>(rng: &mut R, p: i64) -> i64 {
    rng.random_range(1..p) + p * rng.random_range(-2..3)
}

/// `I + λ E_ab` with `ν(λ) + x_a − x_b ≥ 0`, so that it lies in `G_{x,0}`.
fn random_elementary<R: Rng + ?Sized>(
    rng: &mut R,
    field: &Arc<LocalField>,
    x: &ApartmentPoint,
) -> (usize, usize, Scalar) {
    let n = x.n();
    let a = rng.random_range(0..n);
    let mut b = rng.random_range(0..n - 1);
    if b >= a {
        b += 1;
    }
    let p = field.p() as i64;
    let c = ceil_q(-x.diff(a, b)) + rng.random_range(0..2);
    let lambda = Scalar::from_int(field, rng.random_range(-p..p + 1)).shift(c);
    (a, b, lambda)
}

fn conjugate_elementary(m: &Matrix, a: usize, b: usize, lambda: &Scalar) -> Matrix {
    let field = m.field().clone();
    let mut e = Matrix::identity(&field, m.n());
    e.set(a, b, lambda.clone());
    let mut e_inv = Matrix::identity(&field, m.n());
    e_inv.set(a, b, -lambda);
    e.mul(m).mul(&e_inv)
}

/// A nilpotent `X` over `Q_p` with `element_lattice_depth(X, x) = r`, drawn as a
/// conjugate of a scaled partial Jordan pattern by a product of elementary
/// unipotents in `G_{x,0}`. Exact: `X^n = 0` holds with no rounding.
pub fn sample_nilpotent<R: Rng + ?Sized>(
    field: &Arc<LocalField>,
    x: &ApartmentPoint,
    r: Depth,
    rng: &mut R,
) -> Result<Matrix> {
    if r.plus {
        return Err(Error::NotABreak(format!("{r} (depths of elements are attained, never `+`)")));
    }
    let links = nilpotent_break(x, r.value);
    if links.is_empty() {
        return Err(Error::NotABreak(format!("{r} at x = {:?}", x.render())));
    }
    let n = x.n();
    let p = field.p() as i64;
    let (i, j, m_ij) = links[rng.random_range(0..links.len())];

    let mut others: Vec<usize> = (0..n).filter(|&k| k != i && k != j).collect();
    others.shuffle(rng);
    let pos = rng.random_range(0..=others.len());
    let mut seq = others[..pos].to_vec();
    seq.push(i);
    seq.push(j);
    seq.extend_from_slice(&others[pos..]);

    let mut m = Matrix::zeros(field, n);
    for w in seq.windows(2) {
        let (a, b) = (w[0], w[1]);
        let forced = a == i && b == j;
        if !forced && rng.random_bool(0.3) {
            continue;
        }
        let exp = if forced {
            m_ij
        } else {
            let extra = match rng.random_range(0..4) {
                0 | 1 => 0,
                2 => 1,
                _ => 2,
            };
            ceil_q(r.value - x.diff(a, b)) + extra
        };
        m.set(a, b, Scalar::from_int(field, random_unit(rng, p)).shift(exp));
    }

    let rounds = rng.random_range(2..2 * n + 3);
    for _ in 0..rounds {
        let (a, b, lambda) = random_elementary(rng, field, x);
        m = conjugate_elementary(&m, a, b, &lambda);
    }
    Ok(m)
}

/// A random element of `G_{x,0}` together with its inverse, both exact.
pub fn sample_g_x0<R: Rng + ?Sized>(field: &Arc<LocalField>, x: &ApartmentPoint, rng: &mut R) -> (Matrix, Matrix) {
    let n = x.n();
    let mut g = Matrix::identity(field, n);
    let mut g_inv = Matrix::identity(field, n);
    for _ in 0..rng.random_range(1..2 * n + 3) {
        let (a, b, lambda) = random_elementary(rng, field, x);
        let mut e = Matrix::identity(field, n);
        e.set(a, b, lambda.clone());
        let mut e_inv = Matrix::identity(field, n);
        e_inv.set(a, b, -&lambda);
        g = e.mul(&g);
        g_inv = g_inv.mul(&e_inv);
    }
    // Signs keep the inverse exact.
    let signs: Vec<Scalar> = (0..n).map(|_| Scalar::from_int(field, if rng.random_bool(0.5) { 1 } else { -1 })).collect();
    let s = Matrix::diag(field, &signs);
    (s.mul(&g), g_inv.mul(&s))
}
