use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Serialize, Serializer};

use super::literal::render_rational;
use super::scalar::Scalar;
use crate::error::{Error, Result};

/// A rational modulo 1, stored in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QmodZ(BigRational);

impl QmodZ {
    pub fn new(q: BigRational) -> Self {
        let fl = q.floor();
        QmodZ(q - fl)
    }

    pub fn zero() -> Self {
        QmodZ(BigRational::zero())
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Order in Q/Z: the reduced denominator.
    pub fn order(&self) -> BigInt {
        self.0.denom().clone()
    }
}

impl fmt::Debug for QmodZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_rational(&self.0))
    }
}

impl fmt::Display for QmodZ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", render_rational(&self.0))
    }
}

impl Serialize for QmodZ {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&render_rational(&self.0))
    }
}

impl Add for &QmodZ {
    type Output = QmodZ;
    fn add(self, o: &QmodZ) -> QmodZ {
        QmodZ::new(&self.0 + &o.0)
    }
}

impl Sub for &QmodZ {
    type Output = QmodZ;
    fn sub(self, o: &QmodZ) -> QmodZ {
        QmodZ::new(&self.0 - &o.0)
    }
}

impl Neg for &QmodZ {
    type Output = QmodZ;
    fn neg(self) -> QmodZ {
        QmodZ::new(-&self.0)
    }
}

/// Class of `Σ_{i<0} a_i p^i` in Q/Z for `z` in Q_p.
pub fn frac_principal(z: &Scalar) -> Result<QmodZ> {
    let z = z.to_base()?;
    let q = &z.c[0];
    if let Some(pr) = q.prec {
        if pr < 0 {
            return Err(Error::InsufficientPrecision(format!(
                "principal part needs precision >= 0, value known modulo p^{pr}"
            )));
        }
    }
    if q.u.is_zero() || q.v >= 0 {
        return Ok(QmodZ::zero());
    }
    let den = z.ctx().pow(-q.v).into_owned();
    let num = q.u.mod_floor(&den);
    Ok(QmodZ::new(BigRational::new(num, den)))
}
