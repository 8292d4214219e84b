use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::scalar::{Mode, Scalar};
use crate::error::{Error, Result};

/// Relative pole tolerance for approximate evaluation.
pub const POLE_TOL: f64 = 1e-15;

/// In approximate mode, word products are rescaled after this many factors.
pub const RENORMALIZE_EVERY: usize = 16;

/// A real 2x2 matrix `((a, b), (c, d))` acting on the line by
/// `z -> (a z + b) / (c z + d)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MoebiusMatrix {
    pub a: Scalar,
    pub b: Scalar,
    pub c: Scalar,
    pub d: Scalar,
}

impl MoebiusMatrix {
    pub fn new(a: Scalar, b: Scalar, c: Scalar, d: Scalar) -> Self {
        MoebiusMatrix { a, b, c, d }
    }

    /// Exact matrix from `(num, den)` pairs.
    pub fn from_ratios(e: [(i64, i64); 4]) -> Self {
        let [a, b, c, d] = e.map(|(n, d)| Scalar::ratio(n, d));
        MoebiusMatrix { a, b, c, d }
    }

    pub fn from_f64(e: [f64; 4]) -> Self {
        let [a, b, c, d] = e.map(Scalar::approx);
        MoebiusMatrix { a, b, c, d }
    }

    pub fn identity(mode: Mode) -> Self {
        MoebiusMatrix {
            a: Scalar::one(mode),
            b: Scalar::zero(mode),
            c: Scalar::zero(mode),
            d: Scalar::one(mode),
        }
    }

    pub fn entries(&self) -> [&Scalar; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    /// `Exact` only if all four entries are exact.
    pub fn mode(&self) -> Mode {
        self.entries()
            .iter()
            .fold(Mode::Exact, |m, s| m.join(s.mode()))
    }

    pub fn to_mode(&self, mode: Mode) -> Self {
        MoebiusMatrix {
            a: self.a.to_mode(mode),
            b: self.b.to_mode(mode),
            c: self.c.to_mode(mode),
            d: self.d.to_mode(mode),
        }
    }

    pub fn det(&self) -> Scalar {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn scale(&self, k: &Scalar) -> Self {
        MoebiusMatrix {
            a: &self.a * k,
            b: &self.b * k,
            c: &self.c * k,
            d: &self.d * k,
        }
    }

    /// Swaps the off-diagonal entries.
    pub fn transpose(&self) -> Self {
        MoebiusMatrix {
            a: self.a.clone(),
            b: self.c.clone(),
            c: self.b.clone(),
            d: self.d.clone(),
        }
    }

    fn denominator_at(&self, z: &Scalar) -> Result<Scalar> {
        let den = &self.c * z + &self.d;
        let vanishes = match &den {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Approx(x) => {
                let scale = self.c.to_f64().abs().max(self.d.to_f64().abs()).max(1.0);
                x.abs() <= POLE_TOL * scale
            }
        };
        if vanishes {
            Err(Error::Pole { z: z.to_string() })
        } else {
            Ok(den)
        }
    }

    /// `(a z + b) / (c z + d)`.
    pub fn phi(&self, z: &Scalar) -> Result<Scalar> {
        let den = self.denominator_at(z)?;
        let num = &self.a * z + &self.b;
        Ok(num / den)
    }

    /// `(ad - bc) / (c z + d)^2`.
    pub fn phi_derivative(&self, z: &Scalar) -> Result<Scalar> {
        let den = self.denominator_at(z)?;
        Ok(self.det() / (&den * &den))
    }

    pub fn mul(&self, rhs: &MoebiusMatrix) -> MoebiusMatrix {
        MoebiusMatrix {
            a: &self.a * &rhs.a + &self.b * &rhs.c,
            b: &self.a * &rhs.b + &self.b * &rhs.d,
            c: &self.c * &rhs.a + &self.d * &rhs.c,
            d: &self.c * &rhs.b + &self.d * &rhs.d,
        }
    }

    /// A positive multiple of `self` with tame entries. Approximate matrices
    /// are scaled so the largest absolute entry is 1; exact matrices become
    /// the primitive integer quadruple on the same ray.
    pub fn renormalize(&self) -> Result<MoebiusMatrix> {
        match self.mode() {
            Mode::Approx => {
                let m = self
                    .entries()
                    .iter()
                    .map(|s| s.to_f64().abs())
                    .fold(0.0f64, f64::max);
                if m == 0.0 || !m.is_finite() {
                    return Err(Error::ZeroMatrix);
                }
                Ok(self.to_mode(Mode::Approx).scale(&Scalar::Approx(1.0 / m)))
            }
            Mode::Exact => {
                let qs: Vec<&BigRational> = self
                    .entries()
                    .iter()
                    .map(|s| s.as_rational().unwrap())
                    .collect();
                if qs.iter().all(|q| q.is_zero()) {
                    return Err(Error::ZeroMatrix);
                }
                let lcm = qs.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
                let ints: Vec<BigInt> = qs.iter().map(|q| q.numer() * (&lcm / q.denom())).collect();
                let g = ints.iter().fold(BigInt::zero(), |acc, n| acc.gcd(n)).abs();
                let [a, b, c, d]: [Scalar; 4] = ints
                    .into_iter()
                    .map(|n| Scalar::Exact(BigRational::from_integer(n / &g)))
                    .collect::<Vec<_>>()
                    .try_into()
                    .unwrap();
                Ok(MoebiusMatrix { a, b, c, d })
            }
        }
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries()
            .iter()
            .map(|s| s.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for MoebiusMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(({}, {}), ({}, {}))", self.a, self.b, self.c, self.d)
    }
}

/// Left-to-right product of matrix factors, renormalized every
/// [`RENORMALIZE_EVERY`] factors in approximate mode.
#[derive(Clone, Debug)]
pub struct WordProduct {
    word: MoebiusMatrix,
    len: usize,
    /// Natural log of the positive factor discarded by renormalization, so
    /// that the true product equals `exp(log_scale) * word`.
    log_scale: f64,
}

impl WordProduct {
    pub fn new(mode: Mode) -> Self {
        WordProduct {
            word: MoebiusMatrix::identity(mode),
            len: 0,
            log_scale: 0.0,
        }
    }

    pub fn push(&mut self, factor: &MoebiusMatrix) {
        self.word = self.word.mul(factor);
        self.len += 1;
        if self.word.mode() == Mode::Approx && self.len.is_multiple_of(RENORMALIZE_EVERY) {
            self.rescale();
        }
    }

    pub fn pushed(&self, factor: &MoebiusMatrix) -> Self {
        let mut next = self.clone();
        next.push(factor);
        next
    }

    fn rescale(&mut self) {
        let m = self.word.max_abs_entry();
        if m > 0.0 && m.is_finite() {
            self.word = self.word.scale(&Scalar::Approx(1.0 / m));
            self.log_scale += m.ln();
        }
    }

    pub fn word(&self) -> &MoebiusMatrix {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }
}
