//! Scalar literal grammar.
//!
//! ```text
//! literal   := base_lit | '[' base_lit (',' base_lit)* ']'
//! base_lit  := sign? int ('/' int)? ('*' int '^' sign? int)? ('+O(' int '^' sign? int ')')?
//! ```
//!
//! `-` and `−` are both accepted as the minus sign. A bracketed list gives
//! coordinates on the tower basis `π^i ζ^j` (index `i*f + j`). The `+O(p^k)`
//! suffix marks a value known only modulo `p^k`; its base must be the prime.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::field::LocalField;
use super::qp::Qp;
use super::scalar::Scalar;
use crate::error::{Error, Result};

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        Cursor { chars: src.chars().collect(), pos: 0, _src: src }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn sign(&mut self) -> bool {
        self.eat('-') || self.eat('−')
    }

    fn digits(&mut self) -> Result<BigInt> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Ok(s.parse().expect("ascii digits"))
    }

    fn signed_int(&mut self) -> Result<BigInt> {
        let neg = self.sign();
        let d = self.digits()?;
        Ok(if neg { -d } else { d })
    }

    fn small_int(&mut self) -> Result<i64> {
        let at = self.pos;
        let v = self.signed_int()?;
        i64::try_from(v).map_err(|_| Error::Parse { pos: at, msg: "exponent out of range".into() })
    }
}

/// A parsed base literal: its rational value and optional `O(p^k)` precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalLiteral {
    pub value: BigRational,
    pub big_o: Option<(BigInt, i64)>,
}

fn base_literal(cur: &mut Cursor<'_>) -> Result<RationalLiteral> {
    cur.skip_ws();
    let neg = cur.sign();
    let num = cur.digits()?;
    let mut value = BigRational::from_integer(if neg { -num } else { num });
    if cur.eat('/') {
        let at = cur.pos;
        let den = cur.digits()?;
        if den.is_zero() {
            return Err(Error::Parse { pos: at, msg: "zero denominator".into() });
        }
        value /= BigRational::from_integer(den);
    }
    if cur.eat('*') {
        let at = cur.pos;
        let base = cur.digits()?;
        if base.is_zero() {
            return Err(Error::Parse { pos: at, msg: "zero base".into() });
        }
        cur.expect('^')?;
        let k = cur.small_int()?;
        let b = BigRational::from_integer(base);
        let factor = if k >= 0 { pow_rat(&b, k as u32) } else { pow_rat(&b, (-k) as u32).recip() };
        value *= factor;
    }
    let mut big_o = None;
    cur.skip_ws();
    if cur.eat('+') {
        cur.skip_ws();
        cur.expect('O')?;
        cur.expect('(')?;
        let base = cur.digits()?;
        cur.expect('^')?;
        let k = cur.small_int()?;
        cur.expect(')')?;
        big_o = Some((base, k));
    }
    cur.skip_ws();
    Ok(RationalLiteral { value, big_o })
}

fn pow_rat(b: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= b;
    }
    acc
}

/// Parses a base literal into a rational (with its optional precision suffix).
pub fn parse_rational_literal(text: &str) -> Result<RationalLiteral> {
    let mut cur = Cursor::new(text);
    let lit = base_literal(&mut cur)?;
    if cur.pos != cur.chars.len() {
        return cur.err("unexpected trailing input");
    }
    Ok(lit)
}

/// Parses a plain rational `a`, `a/b` or `a*b^k` (no precision suffix).
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let lit = parse_rational_literal(text)?;
    if lit.big_o.is_some() {
        return Err(Error::Parse { pos: 0, msg: "precision suffix not allowed here".into() });
    }
    Ok(lit.value)
}

fn qp_from_literal(field: &Arc<LocalField>, lit: &RationalLiteral) -> Result<Qp> {
    let ctx = &field.ctx;
    let q = Qp::from_rational(ctx, lit.value.numer(), lit.value.denom())?;
    match &lit.big_o {
        None => Ok(q),
        Some((base, k)) => {
            if *base != BigInt::from(field.p()) {
                return Err(Error::Parse { pos: 0, msg: format!("O-term base {base} is not p") });
            }
            let cap = match q.prec {
                Some(pr) => pr.min(*k),
                None => *k,
            };
            if q.is_zero() {
                return Ok(Qp::approx_zero(cap));
            }
            Ok(Qp::normalize_approx(ctx, q.v, q.u.clone(), cap))
        }
    }
}

/// Parses a literal into an element of `field`.
pub fn parse_scalar(field: &Arc<LocalField>, text: &str) -> Result<Scalar> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    if cur.eat('[') {
        let mut coords = Vec::new();
        loop {
            let lit = base_literal(&mut cur)?;
            coords.push(qp_from_literal(field, &lit)?);
            if cur.eat(',') {
                continue;
            }
            cur.expect(']')?;
            break;
        }
        cur.skip_ws();
        if cur.pos != cur.chars.len() {
            return cur.err("unexpected trailing input");
        }
        if coords.len() > field.degree() {
            return Err(Error::Parse {
                pos: 0,
                msg: format!("{} coordinates for a field of degree {}", coords.len(), field.degree()),
            });
        }
        let mut s = Scalar::zero(field);
        for (k, c) in coords.into_iter().enumerate() {
            s.c[k] = c;
        }
        return Ok(s);
    }
    let lit = base_literal(&mut cur)?;
    if cur.pos != cur.chars.len() {
        return cur.err("unexpected trailing input");
    }
    Ok(Scalar::from_qp(field, qp_from_literal(field, &lit)?))
}

/// Renders a rational as `a` or `a/b`.
pub fn render_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else if q.denom().is_negative() {
        format!("{}/{}", -q.numer(), -q.denom())
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
