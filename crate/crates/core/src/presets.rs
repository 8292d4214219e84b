//! Two standard families of admissible systems.
//!
//! * `lebesgue(p)`: `A0 = ((p, 0), (0, 1))`, `A1 = ((1-p, p), (0, 1))`. The
//!   solution is the distribution function of a `p`-biased binary expansion.
//! * `walk(u)`: with `x = 2 / (1 + sqrt(1 + 8u^2))`,
//!   `A0 = ((x, 0), (-u^2 x^2, 1))`, `A1 = ((0, x), (-u^2 x^2, 1 - u^2 x^2))`,
//!   admissible for `0 < u < sqrt(3)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::numerics::{MoebiusMatrix, Scalar};
use crate::system::DeRhamSystem;

pub fn lebesgue_matrices(p: &Scalar) -> (MoebiusMatrix, MoebiusMatrix) {
    let m = p.mode();
    let zero = Scalar::zero(m);
    let one = Scalar::one(m);
    (
        MoebiusMatrix::new(p.clone(), zero.clone(), zero.clone(), one.clone()),
        MoebiusMatrix::new(&one - p, p.clone(), zero, one),
    )
}

pub fn lebesgue(p: Scalar) -> Result<DeRhamSystem> {
    let (a0, a1) = lebesgue_matrices(&p);
    DeRhamSystem::validate(a0, a1)
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let exact_root = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    Some(BigRational::new(
        exact_root(q.numer())?,
        exact_root(q.denom())?,
    ))
}

/// `2 / (1 + sqrt(1 + 8u^2))`; exact when `1 + 8u^2` is a rational square.
pub fn walk_x(u: &Scalar) -> Scalar {
    let one = BigRational::from_integer(1.into());
    let exact = u.as_rational().and_then(|q| {
        let disc = &one + BigRational::from_integer(8.into()) * q * q;
        rational_sqrt(&disc)
    });
    match exact {
        Some(root) => Scalar::Exact(BigRational::from_integer(2.into()) / (one + root)),
        None => {
            let u = u.to_f64();
            Scalar::Approx(2.0 / (1.0 + (1.0 + 8.0 * u * u).sqrt()))
        }
    }
}

pub fn walk_matrices(u: &Scalar) -> (MoebiusMatrix, MoebiusMatrix) {
    let x = walk_x(u);
    let m = x.mode();
    let u = u.to_mode(m);
    let zero = Scalar::zero(m);
    let one = Scalar::one(m);
    let ux2 = &(&u * &u) * &(&x * &x);
    (
        MoebiusMatrix::new(x.clone(), zero.clone(), -&ux2, one.clone()),
        MoebiusMatrix::new(zero, x, -&ux2, one - ux2),
    )
}

pub fn walk(u: Scalar) -> Result<DeRhamSystem> {
    if !u.is_positive() {
        return Err(Error::Domain(format!("walk preset needs u > 0, got {u}")));
    }
    let (a0, a1) = walk_matrices(&u);
    DeRhamSystem::validate(a0, a1)
}

/// Parses `lebesgue:P` or `walk:U`.
pub fn from_spec(spec: &str) -> Result<DeRhamSystem> {
    let (name, param) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parse(format!("preset must be NAME:PARAM, got {spec:?}")))?;
    let param = Scalar::parse(param)?;
    match name.trim() {
        "lebesgue" => lebesgue(param),
        "walk" => walk(param),
        other => Err(Error::Parse(format!("unknown preset {other:?}"))),
    }
}
