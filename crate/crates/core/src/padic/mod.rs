//! Arithmetic in `Q_p` and in tame towers `Q_p ⊂ K ⊂ E`.

mod field;
mod literal;
mod poly;
mod qmodz;
mod qp;
mod scalar;

pub use field::{FieldSummary, LocalField, DEFAULT_PRECISION};
pub use literal::{parse_rational, parse_rational_literal, parse_scalar, render_rational, RationalLiteral};
pub use poly::{discriminant, hensel_factor, resultant, Factorization, Poly};
pub use qmodz::{frac_principal, QmodZ};
pub use scalar::{rational, Scalar, Val};

/// Exact rational depths and valuations.
pub type Q = num_rational::Ratio<i64>;
