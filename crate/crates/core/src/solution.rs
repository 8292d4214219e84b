//! Evaluation of the solution `f` on dyadic intervals and points, of its
//! inverse `g`, and of the closed form in the absolutely continuous case.

use std::fmt;

use crate::analysis::{self, Verdict};
use crate::error::{Error, Result};
use crate::numerics::{Mode, MoebiusMatrix, Scalar, WordProduct};
use crate::system::DeRhamSystem;

/// Default depth cap for [`eval`] and [`inverse_eval`].
pub const DEFAULT_DEPTH_CAP: usize = 4096;

/// A finite binary word `(i_1, ..., i_n)` naming the half-open interval
/// `[sum i_j 2^-j, sum i_j 2^-j + 2^-n)` and the matrix word `A_{i_1}...A_{i_n}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicAddress {
    bits: Vec<u8>,
}

impl DyadicAddress {
    pub fn root() -> Self {
        DyadicAddress { bits: Vec::new() }
    }

    /// Panics on digits other than 0 and 1.
    pub fn from_bits(bits: impl IntoIterator<Item = u8>) -> Self {
        let bits: Vec<u8> = bits.into_iter().collect();
        assert!(bits.iter().all(|&b| b <= 1), "binary digits only");
        DyadicAddress { bits }
    }

    /// The `k`-th interval `[k/2^n, (k+1)/2^n)` at depth `n`.
    pub fn from_index(k: u64, n: u32) -> Self {
        assert!(n <= 63 && k < (1u64 << n), "index out of range");
        DyadicAddress {
            bits: (0..n).rev().map(|j| ((k >> j) & 1) as u8).collect(),
        }
    }

    /// First `n` digits of `x` in `[0, 1)`, using `X_j(x) = [2^j x] - 2[2^(j-1) x]`.
    pub fn of_point(x: f64, n: u32) -> Self {
        assert!((0.0..1.0).contains(&x), "x must lie in [0, 1)");
        let mut bits = Vec::with_capacity(n as usize);
        let mut r = x;
        for _ in 0..n {
            r *= 2.0;
            let d = (r >= 1.0) as u8;
            r -= d as f64;
            bits.push(d);
        }
        DyadicAddress { bits }
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn depth(&self) -> usize {
        self.bits.len()
    }

    pub fn child(&self, digit: u8) -> Self {
        let mut bits = self.bits.clone();
        bits.push(digit.min(1));
        DyadicAddress { bits }
    }

    pub fn parent(&self) -> Option<Self> {
        let mut bits = self.bits.clone();
        bits.pop().map(|_| DyadicAddress { bits })
    }

    /// Address of the image under the doubling map (first digit dropped).
    pub fn shift(&self) -> Option<Self> {
        (!self.bits.is_empty()).then(|| DyadicAddress {
            bits: self.bits[1..].to_vec(),
        })
    }

    /// Prepends a digit: the two preimages under the doubling map.
    pub fn prepend(&self, digit: u8) -> Self {
        let mut bits = Vec::with_capacity(self.bits.len() + 1);
        bits.push(digit.min(1));
        bits.extend_from_slice(&self.bits);
        DyadicAddress { bits }
    }

    /// Numerator `k` with the interval being `[k/2^n, (k+1)/2^n)`; `None`
    /// beyond 64 digits.
    pub fn index(&self) -> Option<u64> {
        (self.bits.len() <= 64)
            .then(|| self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    /// Left endpoint as an exact dyadic rational.
    pub fn left(&self) -> Scalar {
        let mut x = Scalar::zero(Mode::Exact);
        let mut w = Scalar::ratio(1, 2);
        let half = Scalar::ratio(1, 2);
        for &b in &self.bits {
            if b == 1 {
                x = x + &w;
            }
            w = w * &half;
        }
        x
    }

    pub fn width(&self) -> f64 {
        0.5f64.powi(self.bits.len() as i32)
    }

    /// All addresses of depth `n` in increasing order.
    pub fn level(n: u32) -> impl Iterator<Item = DyadicAddress> {
        (0..(1u64 << n)).map(move |k| DyadicAddress::from_index(k, n))
    }
}

impl fmt::Display for DyadicAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}

/// `[f(left), f(right)]` for a dyadic interval: `f` maps the interval onto
/// `[lower, upper)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ValueEnclosure {
    pub lower: Scalar,
    pub upper: Scalar,
}

impl ValueEnclosure {
    pub fn width(&self) -> Scalar {
        &self.upper - &self.lower
    }

    pub fn midpoint(&self) -> Scalar {
        (&self.lower + &self.upper) * Scalar::ratio_in(1, 2, self.lower.mode())
    }
}

/// `Φ(W; 0) = q/s` and `Φ(W; 1) = (p+q)/(r+s)` for a word `W`.
/// Float results are clamped to `[0, 1]`, which holds exactly.
pub(crate) fn enclosure_of_word(word: &MoebiusMatrix) -> ValueEnclosure {
    let lower = &word.b / &word.d;
    let upper = (&word.a + &word.b) / (&word.c + &word.d);
    match word.mode() {
        Mode::Exact => ValueEnclosure { lower, upper },
        Mode::Approx => ValueEnclosure {
            lower: Scalar::approx(lower.to_f64().clamp(0.0, 1.0)),
            upper: Scalar::approx(upper.to_f64().clamp(0.0, 1.0)),
        },
    }
}

/// Word product `A_{i_1} ... A_{i_n}` for an address.
pub fn word_of(sys: &DeRhamSystem, addr: &DyadicAddress) -> WordProduct {
    let mut w = WordProduct::new(sys.mode());
    for &b in addr.bits() {
        w.push(sys.matrix(b));
    }
    w
}

/// Values of `f` at both ends of the address's interval.
pub fn eval_dyadic(sys: &DeRhamSystem, addr: &DyadicAddress) -> ValueEnclosure {
    enclosure_of_word(word_of(sys, addr).word())
}

/// `f(k / 2^n)` for `0 <= k <= 2^n`.
pub fn f_at_dyadic(sys: &DeRhamSystem, k: u64, n: u32) -> Scalar {
    if k == 1u64 << n {
        return Scalar::one(sys.mode());
    }
    eval_dyadic(sys, &DyadicAddress::from_index(k, n)).lower
}

fn check_unit(x: &Scalar, what: &str) -> Result<()> {
    let zero = Scalar::zero(Mode::Exact);
    let one = Scalar::one(Mode::Exact);
    if *x < zero || *x > one || !x.to_f64().is_finite() {
        return Err(Error::Domain(format!("{what} must lie in [0, 1], got {x}")));
    }
    Ok(())
}

/// `f(x)` to within `tol`, see [`eval_with_cap`].
pub fn eval(sys: &DeRhamSystem, x: &Scalar, tol: f64) -> Result<Scalar> {
    eval_with_cap(sys, x, tol, DEFAULT_DEPTH_CAP)
}

/// Deepens the binary expansion of `x` until the enclosure of `f` is at most
/// `2 tol` wide and returns its midpoint. A terminating expansion gives the
/// value of `f` at a dyadic point directly (exactly, in exact mode).
pub fn eval_with_cap(sys: &DeRhamSystem, x: &Scalar, tol: f64, cap: usize) -> Result<Scalar> {
    check_unit(x, "x")?;
    let mode = sys.mode();
    let one = Scalar::one(x.mode());
    if *x == one || (x.mode() == Mode::Approx && x.to_f64() == 1.0) {
        return Ok(Scalar::one(mode));
    }
    let two = Scalar::from_int(2, x.mode());
    let mut rest = x.clone();
    let mut word = WordProduct::new(mode);
    loop {
        let enc = enclosure_of_word(word.word());
        if rest.is_zero() {
            return Ok(enc.lower);
        }
        if enc.width().to_f64() <= 2.0 * tol {
            return Ok(enc.midpoint());
        }
        if word.len() >= cap {
            return Err(Error::NonConvergence { cap });
        }
        rest = &rest * &two;
        let digit = if rest >= one {
            rest = &rest - &one;
            1
        } else {
            0
        };
        word.push(sys.matrix(digit));
    }
}

/// `|f(x) - Φ(A0; f(2x))|` for `x <= 1/2` and `|f(x) - Φ(A1; f(2x-1))|` for
/// `x >= 1/2`, at `x = k / 2^n`. At `x = 1/2` the larger of both is returned.
pub fn functional_equation_residual(sys: &DeRhamSystem, k: u64, n: u32) -> Result<Scalar> {
    if n > 62 || k > (1u64 << n) {
        return Err(Error::Domain(format!("{k}/2^{n} is not a point of [0, 1]")));
    }
    let fx = f_at_dyadic(sys, k, n);
    let mut worst: Option<Scalar> = None;
    let half = 1u64 << n.saturating_sub(1);
    let mut record = |r: Scalar| {
        worst = Some(match worst.take() {
            Some(w) => w.max(r),
            None => r,
        });
    };
    if n == 0 {
        // x in {0, 1}: f(0) = Φ(A0; f(0)), f(1) = Φ(A1; f(1)).
        let branch = if k == 0 { 0 } else { 1 };
        let rhs = sys.matrix(branch).phi(&fx)?;
        return Ok((&fx - &rhs).abs());
    }
    // f(2x) with 2x = k / 2^(n-1), f(2x - 1) = (k - 2^(n-1)) / 2^(n-1)
    if k <= half {
        let inner = f_at_dyadic(sys, k, n - 1);
        record((&fx - sys.a0().phi(&inner)?).abs());
    }
    if k >= half {
        let inner = f_at_dyadic(sys, k - half, n - 1);
        record((&fx - sys.a1().phi(&inner)?).abs());
    }
    Ok(worst.expect("at least one branch applies"))
}

/// `g(y) = f^{-1}(y)` to within `tol`, see [`inverse_eval_with_cap`].
pub fn inverse_eval(sys: &DeRhamSystem, y: &Scalar, tol: f64) -> Result<Scalar> {
    inverse_eval_with_cap(sys, y, tol, DEFAULT_DEPTH_CAP)
}

/// Descends the dyadic tree choosing at each node the child whose value
/// range contains `y`, until both the node (in `x`) and its value range are
/// at most `2 tol` wide; the result `x` then also satisfies
/// `|f(x) - y| <= 2 tol`. Stops early with an exact dyadic answer when `y`
/// hits the lower end of a node's range.
pub fn inverse_eval_with_cap(
    sys: &DeRhamSystem,
    y: &Scalar,
    tol: f64,
    cap: usize,
) -> Result<Scalar> {
    check_unit(y, "y")?;
    let mode = sys.mode();
    let y = y.to_mode(mode.join(y.mode()));
    let out_mode = y.mode();
    if y == Scalar::one(out_mode) {
        return Ok(Scalar::one(out_mode));
    }
    // f at the midpoint of a node with word W is Φ(W; Φ(A0; 1)).
    let split_point = sys.a0().phi(&Scalar::one(mode))?;
    let mut word = WordProduct::new(mode);
    let mut left = Scalar::zero(Mode::Exact);
    let mut width = Scalar::one(Mode::Exact);
    let half = Scalar::ratio(1, 2);
    loop {
        let enc = enclosure_of_word(word.word());
        if y == enc.lower {
            return Ok(left.to_mode(out_mode));
        }
        if width.to_f64() <= 2.0 * tol && enc.width().to_f64() <= 2.0 * tol {
            return Ok((&left + &width * &half).to_mode(out_mode));
        }
        if word.len() >= cap {
            return Err(Error::NonConvergence { cap });
        }
        let split = word.word().phi(&split_point)?;
        width = &width * &half;
        let digit = if y < split {
            0
        } else {
            left = &left + &width;
            1
        };
        word.push(sys.matrix(digit));
    }
}

/// The closed form `f(x) = x / (-2 c0 x + 1 + 2 c0)` available when the
/// measure is absolutely continuous; `c0` is taken after scaling `d0` to 1.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ClosedForm {
    pub c0: Scalar,
}

impl ClosedForm {
    pub fn cdf(&self, x: &Scalar) -> Scalar {
        let m = self.c0.mode().join(x.mode());
        let one = Scalar::one(m);
        let two = Scalar::from_int(2, m);
        let tc = &two * &self.c0;
        x / (&one + &tc - &tc * x)
    }

    /// `(1 + 2 c0) / (-2 c0 x + 1 + 2 c0)^2`.
    pub fn density(&self, x: &Scalar) -> Scalar {
        let m = self.c0.mode().join(x.mode());
        let one = Scalar::one(m);
        let two = Scalar::from_int(2, m);
        let tc = &two * &self.c0;
        let den = &one + &tc - &tc * x;
        (&one + &tc) / (&den * &den)
    }

    /// Inverse of [`ClosedForm::cdf`]: `(2 c0 + 1) y / (2 c0 y + 1)`.
    pub fn inverse_cdf(&self, y: &Scalar) -> Scalar {
        let m = self.c0.mode().join(y.mode());
        let one = Scalar::one(m);
        let tc = Scalar::from_int(2, m) * &self.c0;
        (&tc + &one) * y / (&tc * y + &one)
    }
}

/// Closed-form solution for an absolutely continuous system.
pub fn closed_form_solution(sys: &DeRhamSystem) -> Result<ClosedForm> {
    let report = analysis::classify(sys);
    match report.verdict {
        Verdict::AbsolutelyContinuous { c0 } => {
            analysis::verify_normal_form(sys)?;
            Ok(ClosedForm { c0 })
        }
        Verdict::Singular { .. } => Err(Error::NotAbsolutelyContinuous),
    }
}
