//! Dimension bounds, the absolutely-continuous/singular classification, and
//! the entropy-defect bound for singular systems.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::numerics::{Mode, MoebiusMatrix, Scalar};
use crate::system::{entropy_f64, DeRhamSystem};

/// Relative tolerance for the algebraic conditions when inputs are floats.
pub const CONDITION_TOL: f64 = 1e-9;

/// Shrink factor `1 - 2^-20` keeping the defect radius strictly inside its
/// admissible range.
fn shrink(mode: Mode) -> Scalar {
    Scalar::one(mode) - Scalar::ratio_in(1, 1 << 20, mode)
}

/// Range of the local entropy `s(p0(t))` over `t in [alpha, beta]`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DimensionBounds {
    /// Maximum, in nats.
    pub theta1: f64,
    /// Minimum, in nats.
    pub theta2: f64,
    pub dim_upper: f64,
    pub dim_lower: f64,
    /// Where the maximum is attained.
    pub argmax_location: Scalar,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    /// Density `(1 + 2c0) / (-2 c0 x + 1 + 2 c0)^2`, `c0` after scaling `d0` to 1.
    AbsolutelyContinuous { c0: Scalar },
    Singular {
        bounds: DimensionBounds,
        /// Upper bound `< 1` on the dimension of a full-measure set; present
        /// only when condition (i) fails.
        defect_bound: Option<f64>,
    },
}

impl Verdict {
    pub fn is_singular(&self) -> bool {
        matches!(self, Verdict::Singular { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Verdict::AbsolutelyContinuous { .. } => "AbsolutelyContinuous",
            Verdict::Singular { .. } => "Singular",
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ClassificationReport {
    pub condition_i: bool,
    pub condition_ii: bool,
    pub verdict: Verdict,
    pub exactness: Mode,
}

fn local_entropy(sys: &DeRhamSystem, t: &Scalar) -> f64 {
    entropy_f64(sys.p0(t).expect("t > -gamma on [alpha, beta]").to_f64())
}

/// Extremes of `s(p0(·))` on `[alpha, beta]`.
///
/// `p0` increases with `p0(γ-2) = 1/2` and `s` peaks at 1/2, so the maximum
/// is `ln 2` when `γ-2` lies in the interval and otherwise sits at the
/// endpoint nearest to `γ-2`; the minimum is at one of the endpoints.
pub fn dimension_bounds(sys: &DeRhamSystem) -> DimensionBounds {
    let (alpha, beta) = (sys.alpha(), sys.beta());
    let g = sys.balance_point();
    let (theta1, argmax_location) = if g < *alpha {
        (local_entropy(sys, alpha), alpha.clone())
    } else if g > *beta {
        (local_entropy(sys, beta), beta.clone())
    } else {
        (LN_2, g)
    };
    let theta2 = local_entropy(sys, alpha).min(local_entropy(sys, beta));
    DimensionBounds {
        theta1,
        theta2,
        dim_upper: theta1 / LN_2,
        dim_lower: theta2 / LN_2,
        argmax_location,
    }
}

/// Relative equality for a homogeneous degree-two identity in the entries of `m`.
fn identity_holds(lhs: &Scalar, rhs: &Scalar, m: &MoebiusMatrix) -> bool {
    match (lhs, rhs) {
        (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
        _ => {
            let (l, r) = (lhs.to_f64(), rhs.to_f64());
            let scale = l.abs().max(r.abs()).max(m.max_abs_entry().powi(2));
            (l - r).abs() <= CONDITION_TOL * scale
        }
    }
}

/// `(c0 + d0 - 2 a0)(d0 - a0) = a0 c0`.
pub fn condition_i(sys: &DeRhamSystem) -> bool {
    let m = sys.a0();
    let two = Scalar::from_int(2, sys.mode());
    let lhs = (&m.c + &m.d - &two * &m.a) * (&m.d - &m.a);
    let rhs = &m.a * &m.c;
    identity_holds(&lhs, &rhs, m)
}

/// `(a1 - 2 c1)(d1 - 2 b1) = b1 c1`.
pub fn condition_ii(sys: &DeRhamSystem) -> bool {
    let m = sys.a1();
    let two = Scalar::from_int(2, sys.mode());
    let lhs = (&m.a - &two * &m.c) * (&m.d - &two * &m.b);
    let rhs = &m.b * &m.c;
    identity_holds(&lhs, &rhs, m)
}

pub fn classify(sys: &DeRhamSystem) -> ClassificationReport {
    let ci = condition_i(sys);
    let cii = condition_ii(sys);
    let verdict = if ci && cii {
        Verdict::AbsolutelyContinuous {
            c0: &sys.a0().c / &sys.a0().d,
        }
    } else {
        Verdict::Singular {
            bounds: dimension_bounds(sys),
            defect_bound: if ci {
                None
            } else {
                singular_dim_upper_bound(sys).ok()
            },
        }
    };
    ClassificationReport {
        condition_i: ci,
        condition_ii: cii,
        verdict,
        exactness: sys.mode(),
    }
}

/// A radius `ε0 < 2(γ-1)` such that `Φ(ᵗA0; ·)` maps the closed
/// `ε0`-neighbourhood of `γ-2` strictly outside itself.
///
/// `Φ(ᵗA0; z) = (a0 z + c0) / d0` is affine with slope `λ = a0/d0 < 1`, so
/// with `δ = |Φ(ᵗA0; γ-2) - (γ-2)|` any radius below `δ / (1 + λ)` works.
pub fn epsilon0(sys: &DeRhamSystem) -> Result<Scalar> {
    if condition_i(sys) {
        return Err(Error::ConditionHolds);
    }
    let mode = sys.mode();
    let g = sys.balance_point();
    let t0 = sys.a0().transpose();
    let delta = (t0.phi(&g)? - &g).abs();
    let slope = &sys.a0().a / &sys.a0().d;
    let k = shrink(mode);
    let cap = Scalar::from_int(2, mode) * (sys.gamma() - Scalar::one(mode)) * &k;
    let eps = (delta / (Scalar::one(mode) + slope)).min(cap) * k;
    if !eps.is_positive() {
        return Err(Error::ConditionHolds);
    }
    verify_epsilon0(sys, &eps)?;
    Ok(eps)
}

/// Checks `|Φ(ᵗA0; z) - (γ-2)| > ε` on the whole of `[γ-2-ε, γ-2+ε]`. The map
/// is affine, so it is enough that both endpoint images lie strictly on the
/// same side beyond `ε`.
pub fn verify_epsilon0(sys: &DeRhamSystem, eps: &Scalar) -> Result<()> {
    let g = sys.balance_point();
    let t0 = sys.a0().transpose();
    let lo = t0.phi(&(&g - eps))? - &g;
    let hi = t0.phi(&(&g + eps))? - &g;
    let above = lo > *eps && hi > *eps;
    let below = lo < -eps && hi < -eps;
    let two_gamma_minus_one =
        Scalar::from_int(2, sys.mode()) * (sys.gamma() - Scalar::one(sys.mode()));
    if (above || below) && eps.is_positive() && *eps < two_gamma_minus_one {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "epsilon0 = {eps} fails its defining inequality"
        )))
    }
}

/// Quantitative dimension bound `< 1` for singular systems where condition
/// (i) fails: `(ln 2 - (ln 2 - e0) p0(α) / 2) / ln 2` with
/// `e0 = max s(p0(γ-2 ± ε0))`.
pub fn singular_dim_upper_bound(sys: &DeRhamSystem) -> Result<f64> {
    let eps = epsilon0(sys)?;
    singular_dim_upper_bound_with(sys, &eps)
}

/// As [`singular_dim_upper_bound`] for a given certified radius.
pub fn singular_dim_upper_bound_with(sys: &DeRhamSystem, eps: &Scalar) -> Result<f64> {
    verify_epsilon0(sys, eps)?;
    let g = sys.balance_point();
    let lo = &g - eps;
    if !(&lo + sys.gamma()).is_positive() {
        return Err(Error::Domain(format!("γ-2-ε0 = {lo} is not above -γ")));
    }
    let e0 = local_entropy(sys, &(&g + eps)).max(local_entropy(sys, &lo));
    let p_alpha = sys.p0(sys.alpha())?.to_f64();
    Ok((LN_2 - (LN_2 - e0) * p_alpha / 2.0) / LN_2)
}

/// `(A0 / d0, A1 / b1)`, checked against the one-parameter family
/// `((1/2, 0), (c0, 1))`, `((4c0 + 1, 1), (2c0, 2(1 + c0)))` forced by
/// conditions (i) and (ii).
pub fn verify_normal_form(sys: &DeRhamSystem) -> Result<(MoebiusMatrix, MoebiusMatrix)> {
    let report = classify(sys);
    if report.verdict.is_singular() {
        return Err(Error::NotAbsolutelyContinuous);
    }
    let mode = sys.mode();
    let n0 = sys.a0().scale(&sys.a0().d.recip().expect("d0 > 0"));
    let n1 = sys.a1().scale(&sys.a1().b.recip().expect("b1 > 0"));
    let c0 = n0.c.clone();
    let one = Scalar::one(mode);
    let two = Scalar::from_int(2, mode);
    let expected0 = MoebiusMatrix::new(
        Scalar::ratio_in(1, 2, mode),
        Scalar::zero(mode),
        c0.clone(),
        one.clone(),
    );
    let expected1 = MoebiusMatrix::new(
        Scalar::from_int(4, mode) * &c0 + &one,
        one.clone(),
        &two * &c0,
        &two * (&one + &c0),
    );
    for (got, want, name) in [(&n0, &expected0, "A0/d0"), (&n1, &expected1, "A1/b1")] {
        let ok = got
            .entries()
            .iter()
            .zip(want.entries())
            .all(|(x, y)| x.approx_eq(y, CONDITION_TOL));
        if !ok {
            return Err(Error::FormMismatch(format!(
                "{name} = {got}, expected {want}"
            )));
        }
    }
    Ok((n0, n1))
}
