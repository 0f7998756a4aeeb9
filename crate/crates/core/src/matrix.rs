//! Square matrices over a [`LocalField`].

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::padic::{parse_scalar, LocalField, Poly, Scalar, Val, Q};

#[derive(Clone)]
pub struct Matrix {
    field: Arc<LocalField>,
    n: usize,
    a: Vec<Scalar>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.render())
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.render().serialize(s)
    }
}

/// Determinant by expansion over column subsets; division free, `O(2^n n)`.
pub(crate) fn det_subsets<T: Clone>(
    n: usize,
    entry: impl Fn(usize, usize) -> T,
    zero: T,
    one: T,
    add: impl Fn(&T, &T) -> T,
    mul: impl Fn(&T, &T) -> T,
    neg: impl Fn(&T) -> T,
) -> T {
    if n == 0 {
        return one;
    }
    // dp[mask] = signed sum over assignments of rows 0..popcount(mask) to the columns in mask.
    let mut dp: Vec<Option<T>> = vec![None; 1 << n];
    dp[0] = Some(one);
    for mask in 0usize..(1 << n) {
        let Some(cur) = dp[mask].clone() else { continue };
        let row = mask.count_ones() as usize;
        if row == n {
            continue;
        }
        for col in 0..n {
            if mask & (1 << col) != 0 {
                continue;
            }
            // Sign of inserting `col`: parity of chosen columns greater than it.
            let above = (mask >> (col + 1)).count_ones();
            let term = mul(&cur, &entry(row, col));
            let term = if above % 2 == 1 { neg(&term) } else { term };
            let next = mask | (1 << col);
            dp[next] = Some(match &dp[next] {
                Some(v) => add(v, &term),
                None => term,
            });
        }
    }
    dp[(1 << n) - 1].clone().unwrap_or(zero)
}

impl Matrix {
    pub fn from_fn(field: &Arc<LocalField>, n: usize, f: impl Fn(usize, usize) -> Scalar) -> Self {
        let mut a = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                a.push(f(i, j).coerce_to(field).expect("entry outside the matrix field"));
            }
        }
        Matrix { field: field.clone(), n, a }
    }

    pub fn from_rows(field: &Arc<LocalField>, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("matrix must be square and non-empty".into()));
        }
        let mut a = Vec::with_capacity(n * n);
        for r in rows {
            for s in r {
                a.push(s.coerce_to(field)?);
            }
        }
        Ok(Matrix { field: field.clone(), n, a })
    }

    pub fn from_i64(field: &Arc<LocalField>, rows: &[&[i64]]) -> Self {
        let n = rows.len();
        Self::from_fn(field, n, |i, j| Scalar::from_int(field, rows[i][j]))
    }

    /// Parses rows of scalar literals.
    pub fn parse_rows(field: &Arc<LocalField>, rows: &[Vec<String>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| r.iter().map(|s| parse_scalar(field, s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(field, parsed)
    }

    /// Parses a JSON array of arrays of scalar literals.
    pub fn parse_json(field: &Arc<LocalField>, text: &str) -> Result<Self> {
        let rows: Vec<Vec<String>> = serde_json::from_str(text)
            .map_err(|e| Error::Parse { pos: e.column().saturating_sub(1), msg: e.to_string() })?;
        Self::parse_rows(field, &rows)
    }

    pub fn zeros(field: &Arc<LocalField>, n: usize) -> Self {
        Matrix { field: field.clone(), n, a: vec![Scalar::zero(field); n * n] }
    }

    pub fn identity(field: &Arc<LocalField>, n: usize) -> Self {
        let mut m = Self::zeros(field, n);
        for i in 0..n {
            m.a[i * n + i] = Scalar::one(field);
        }
        m
    }

    /// The elementary matrix `E_ij`.
    pub fn unit(field: &Arc<LocalField>, n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(field, n);
        m.a[i * n + j] = Scalar::one(field);
        m
    }

    pub fn diag(field: &Arc<LocalField>, d: &[Scalar]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(field, n);
        for (i, s) in d.iter().enumerate() {
            m.a[i * n + i] = s.coerce_to(field).expect("entry outside the matrix field");
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Arc<LocalField> {
        &self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Scalar) {
        self.a[i * self.n + j] = s.coerce_to(&self.field).expect("entry outside the matrix field");
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        let n = self.n;
        self.a.iter().enumerate().map(move |(k, s)| (k / n, k % n, s))
    }

    pub fn map(&self, f: impl Fn(usize, usize, &Scalar) -> Scalar) -> Self {
        Self::from_fn(&self.field, self.n, |i, j| f(i, j, self.get(i, j)))
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.n, other.n, "matrix size mismatch");
    }

    /// Result field when combining with `other` (the larger of the two).
    fn join(&self, other: &Self) -> Arc<LocalField> {
        if self.field.degree() >= other.field.degree() {
            self.field.clone()
        } else {
            other.field.clone()
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        Self::from_fn(&self.join(other), self.n, |i, j| self.get(i, j) + other.get(i, j))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        Self::from_fn(&self.join(other), self.n, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn neg(&self) -> Self {
        self.map(|_, _, s| -s)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let field = self.join(other);
        let n = self.n;
        Self::from_fn(&field, n, |i, j| {
            let mut acc = Scalar::zero(&field);
            for k in 0..n {
                let (x, y) = (self.get(i, k), other.get(k, j));
                if x.is_exact_zero() || y.is_exact_zero() {
                    continue;
                }
                acc = &acc + &(x * y);
            }
            acc
        })
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        if s.field().degree() > self.field.degree() {
            let m = self.coerce_to(s.field()).expect("scalar outside the matrix tower");
            return m.scale(s);
        }
        self.map(|_, _, x| x * s)
    }

    /// Multiplies every entry by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        self.map(|_, _, x| x.shift(k))
    }

    pub fn trace(&self) -> Scalar {
        let mut acc = Scalar::zero(&self.field);
        for i in 0..self.n {
            acc = &acc + self.get(i, i);
        }
        acc
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.n, |i, j| self.get(j, i).clone())
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::identity(&self.field, self.n);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn det(&self) -> Scalar {
        let z = Scalar::zero(&self.field);
        let one = Scalar::one(&self.field);
        det_subsets(self.n, |i, j| self.get(i, j).clone(), z, one, |a, b| a + b, |a, b| a * b, |a| -a)
    }

    fn minor(&self, skip_r: usize, skip_c: usize) -> Scalar {
        let rows: Vec<usize> = (0..self.n).filter(|&i| i != skip_r).collect();
        let cols: Vec<usize> = (0..self.n).filter(|&j| j != skip_c).collect();
        let z = Scalar::zero(&self.field);
        let one = Scalar::one(&self.field);
        det_subsets(
            self.n - 1,
            |i, j| self.get(rows[i], cols[j]).clone(),
            z,
            one,
            |a, b| a + b,
            |a, b| a * b,
            |a| -a,
        )
    }

    pub fn adjugate(&self) -> Self {
        Self::from_fn(&self.field, self.n, |i, j| {
            let m = self.minor(j, i);
            if (i + j) % 2 == 1 {
                -m
            } else {
                m
            }
        })
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.is_zero() {
            return Err(Error::DivisionByApproxZero);
        }
        let dinv = d.inv()?;
        Ok(self.adjugate().scale(&dinv))
    }

    /// `g X g⁻¹`.
    pub fn conjugate_by(&self, g: &Self) -> Result<Self> {
        Ok(g.mul(self).mul(&g.inverse()?))
    }

    /// `det(t·I − self)`, low to high.
    pub fn charpoly(&self) -> Poly {
        let n = self.n;
        let field = &self.field;
        let entry = |i: usize, j: usize| {
            let c = -self.get(i, j);
            if i == j {
                Poly::new(vec![c, Scalar::one(field)])
            } else {
                Poly::new(vec![c])
            }
        };
        det_subsets(
            n,
            entry,
            Poly::new(vec![Scalar::zero(field)]),
            Poly::new(vec![Scalar::one(field)]),
            |a, b| a.add(b),
            |a, b| a.mul(b),
            |a| a.neg(),
        )
    }

    pub fn coerce_to(&self, target: &Arc<LocalField>) -> Result<Self> {
        let a = self.a.iter().map(|s| s.coerce_to(target)).collect::<Result<Vec<_>>>()?;
        Ok(Matrix { field: target.clone(), n: self.n, a })
    }

    /// Descends every entry to `Q_p`.
    pub fn to_base(&self) -> Result<Self> {
        let base = self.field.base_field();
        let a = self.a.iter().map(Scalar::to_base).collect::<Result<Vec<_>>>()?;
        Ok(Matrix { field: base, n: self.n, a })
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(Scalar::is_zero)
    }

    pub fn is_exact_zero(&self) -> bool {
        self.a.iter().all(Scalar::is_exact_zero)
    }

    pub fn eq_at_precision(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.mul(other).eq_at_precision(&other.mul(self))
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(i, j, s)| i == j || s.is_zero())
    }

    pub fn diagonal(&self) -> Vec<Scalar> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    /// Diagonal part as a matrix.
    pub fn diagonal_part(&self) -> Self {
        self.map(|i, j, s| if i == j { s.clone() } else { Scalar::zero(&self.field) })
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.n).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(field: &Arc<LocalField>, cols: &[Vec<Scalar>]) -> Self {
        Self::from_fn(field, cols.len(), |i, j| cols[j][i].clone())
    }

    /// Minimum entry valuation; `None` when every entry is zero exactly.
    pub fn min_val(&self) -> Val {
        let mut best: Option<Q> = None;
        let mut bound: Option<Q> = None;
        for s in &self.a {
            match s.val() {
                Val::Finite(v) => best = Some(best.map_or(v, |b| b.min(v))),
                Val::ApproxZero { bound: b } => {
                    bound = Some(bound.map_or(b, |c| c.min(b)));
                }
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

    pub fn render(&self) -> Vec<Vec<String>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j).render()).collect()).collect()
    }
}
