//! Admissible matrix pairs and the constants derived from them.

use crate::error::{Condition, Error, Result, Violation};
use crate::numerics::{Mode, MoebiusMatrix, Scalar};

/// Absolute tolerance for the equalities in (A1) when inputs are floats.
pub const APPROX_EQ_TOL: f64 = 1e-9;

/// A validated pair `(A0, A1)` with its cached constants `alpha <= 0 <= beta`
/// and `gamma = 1 / Φ(A0; 1) > 1`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct DeRhamSystem {
    a0: MoebiusMatrix,
    a1: MoebiusMatrix,
    alpha: Scalar,
    beta: Scalar,
    gamma: Scalar,
    mode: Mode,
}

/// Fixed points of the transposed maps: `Φ(ᵗA0; ·)` has exactly one, and
/// `Φ(ᵗA1; ·)` has `-1` and `c1/b1`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct FixedPoints {
    pub transposed_a0: Scalar,
    pub transposed_a1: (Scalar, Scalar),
    /// Largest back-substitution residual `|Φ(ᵗA; z) - z|`.
    pub max_residual: f64,
}

fn eq_check(lhs: &Scalar, rhs: &Scalar) -> bool {
    lhs.approx_eq(rhs, APPROX_EQ_TOL)
}

fn violation(out: &mut Vec<Violation>, condition: Condition, detail: String) {
    out.push(Violation { condition, detail });
}

impl DeRhamSystem {
    /// Checks (A1)-(A3) and the inequalities they imply, then computes
    /// `alpha`, `beta` and `gamma`. Matrices are stored as given. If either
    /// matrix has a float entry the whole system is approximate.
    pub fn validate(a0: MoebiusMatrix, a1: MoebiusMatrix) -> Result<DeRhamSystem> {
        let mode = a0.mode().join(a1.mode());
        let (a0, a1) = (a0.to_mode(mode), a1.to_mode(mode));
        for s in a0.entries().into_iter().chain(a1.entries()) {
            if !s.to_f64().is_finite() {
                return Err(Error::Domain(format!("non-finite matrix entry {s}")));
            }
        }
        let zero = Scalar::zero(mode);
        let one = Scalar::one(mode);
        let mut bad = Vec::new();

        // (A1)
        if !eq_check(&a0.b, &zero) {
            violation(
                &mut bad,
                Condition::A1,
                format!("b0 = {} but must be 0", a0.b),
            );
        }
        let f0_at_1 = a0.phi(&one).ok();
        let f1_at_0 = a1.phi(&zero).ok();
        let f1_at_1 = a1.phi(&one).ok();
        match (&f0_at_1, &f1_at_0, &f1_at_1) {
            (Some(m), Some(m1), Some(top)) => {
                if !m.is_positive() {
                    violation(
                        &mut bad,
                        Condition::A1,
                        format!("Φ(A0;1) = {m} but must be > 0"),
                    );
                }
                if !eq_check(m, m1) {
                    violation(
                        &mut bad,
                        Condition::A1,
                        format!("Φ(A0;1) = {m} differs from b1/d1 = {m1}"),
                    );
                }
                if !eq_check(top, &one) {
                    violation(
                        &mut bad,
                        Condition::A1,
                        format!("Φ(A1;1) = {top} but must be 1"),
                    );
                }
                if !(*m < one) {
                    violation(
                        &mut bad,
                        Condition::A1,
                        format!("Φ(A0;1) = {m} but must be < 1"),
                    );
                }
            }
            _ => violation(
                &mut bad,
                Condition::A1,
                "Φ(A0;1), Φ(A1;0) or Φ(A1;1) is undefined (zero denominator)".into(),
            ),
        }

        // (A2), (A3)
        for (i, m) in [(0, &a0), (1, &a1)] {
            let det = m.det();
            if !det.is_positive() {
                violation(
                    &mut bad,
                    Condition::A2,
                    format!("det A{i} = {det} but must be > 0"),
                );
            }
            let cd = &m.c + &m.d;
            let lo = m.d.clone().min(cd);
            if !lo.is_positive() {
                violation(
                    &mut bad,
                    Condition::A3,
                    format!("min{{d{i}, c{i}+d{i}}} = {lo} but must be > 0"),
                );
            } else if !(det < &lo * &lo) {
                violation(
                    &mut bad,
                    Condition::A3,
                    format!(
                        "det A{i} = {det} must be < min{{d{i}, c{i}+d{i}}}^2 = {}",
                        &lo * &lo
                    ),
                );
            }
        }
        if !bad.is_empty() {
            return Err(Error::Validation(bad));
        }

        // Consequences of (A1)-(A3); they must hold, but floats can break them.
        if !(a0.d > a0.a && a0.a.is_positive()) {
            violation(
                &mut bad,
                Condition::Derived,
                format!("need d0 > a0 > 0, got a0 = {}, d0 = {}", a0.a, a0.d),
            );
        }
        let b1c1 = &a1.b + &a1.c;
        if !b1c1.is_positive() || !a1.b.is_positive() {
            violation(
                &mut bad,
                Condition::Derived,
                format!(
                    "need b1 > 0 and b1 + c1 > 0, got b1 = {}, c1 = {}",
                    a1.b, a1.c
                ),
            );
        }
        if !bad.is_empty() {
            return Err(Error::Validation(bad));
        }

        let fp0 = &a0.c / (&a0.d - &a0.a);
        let fp1 = &a1.c / &a1.b;
        let alpha = zero.clone().min(fp0.clone()).min(fp1.clone());
        let beta = zero.max(fp0).max(fp1);
        let gamma = f0_at_1.expect("checked above").recip().expect("positive");
        if !(alpha > Scalar::from_int(-1, mode)) || !(gamma > one) {
            violation(
                &mut bad,
                Condition::Derived,
                format!("need alpha > -1 and gamma > 1, got alpha = {alpha}, gamma = {gamma}"),
            );
            return Err(Error::Validation(bad));
        }
        Ok(DeRhamSystem {
            a0,
            a1,
            alpha,
            beta,
            gamma,
            mode,
        })
    }

    pub fn a0(&self) -> &MoebiusMatrix {
        &self.a0
    }

    pub fn a1(&self) -> &MoebiusMatrix {
        &self.a1
    }

    pub fn matrix(&self, digit: u8) -> &MoebiusMatrix {
        if digit == 0 {
            &self.a0
        } else {
            &self.a1
        }
    }

    pub fn alpha(&self) -> &Scalar {
        &self.alpha
    }

    pub fn beta(&self) -> &Scalar {
        &self.beta
    }

    pub fn gamma(&self) -> &Scalar {
        &self.gamma
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// The same system re-validated in another arithmetic mode.
    pub fn to_mode(&self, mode: Mode) -> Result<DeRhamSystem> {
        if mode == self.mode {
            return Ok(self.clone());
        }
        DeRhamSystem::validate(self.a0.to_mode(mode), self.a1.to_mode(mode))
    }

    /// `γ - 2`, the state at which the next digit is a fair coin.
    pub fn balance_point(&self) -> Scalar {
        &self.gamma - Scalar::from_int(2, self.mode)
    }

    /// Probability that the next binary digit is 0 given ratio state `x`:
    /// `(x + 1) / (x + γ)`.
    pub fn p0(&self, x: &Scalar) -> Result<Scalar> {
        let den = x + &self.gamma;
        if !den.is_positive() {
            return Err(Error::Domain(format!("p0 needs x > -gamma, got x = {x}")));
        }
        Ok((x + Scalar::one(x.mode())) / den)
    }

    pub fn p1(&self, x: &Scalar) -> Result<Scalar> {
        Ok(Scalar::one(x.mode()) - self.p0(x)?)
    }

    /// `Φ(ᵗA_digit; t)`, the one-step update of the ratio state.
    pub fn transposed_step(&self, digit: u8, t: &Scalar) -> Result<Scalar> {
        let m = self.matrix(digit);
        // Φ(ᵗA; t) = (a t + c) / (b t + d)
        let den = &m.b * t + &m.d;
        if den.is_zero() {
            return Err(Error::Pole { z: t.to_string() });
        }
        Ok((&m.a * t + &m.c) / den)
    }

    pub fn fixed_points(&self) -> FixedPoints {
        let fp0 = &self.a0.c / (&self.a0.d - &self.a0.a);
        let minus_one = Scalar::from_int(-1, self.mode);
        let fp1 = &self.a1.c / &self.a1.b;
        let t0 = self.a0.transpose();
        let t1 = self.a1.transpose();
        let mut max_residual = 0.0f64;
        for (m, z) in [(&t0, &fp0), (&t1, &minus_one), (&t1, &fp1)] {
            let r = m
                .phi(z)
                .map(|w| (w - z).abs().to_f64())
                .unwrap_or(f64::INFINITY);
            max_residual = max_residual.max(r);
        }
        FixedPoints {
            transposed_a0: fp0,
            transposed_a1: (minus_one, fp1),
            max_residual,
        }
    }
}

/// Binary entropy `-p ln p - (1-p) ln(1-p)` in nats, with `s(0) = s(1) = 0`.
pub fn entropy(p: &Scalar) -> Result<f64> {
    let x = p.to_f64();
    let in_range = match p {
        Scalar::Exact(_) => !p.is_negative() && *p <= Scalar::one(Mode::Exact),
        Scalar::Approx(_) => (0.0..=1.0).contains(&x),
    };
    if !in_range {
        return Err(Error::Domain(format!("entropy needs 0 <= p <= 1, got {p}")));
    }
    Ok(entropy_f64(x))
}

pub(crate) fn entropy_f64(x: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.ln() };
    term(x) + term(1.0 - x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn lebesgue_third_constants() {
        let sys = presets::lebesgue(Scalar::ratio(1, 3)).unwrap();
        assert_eq!(sys.alpha(), &Scalar::ratio(0, 1));
        assert_eq!(sys.beta(), &Scalar::ratio(0, 1));
        assert_eq!(sys.gamma(), &Scalar::ratio(3, 1));
        assert_eq!(sys.mode(), Mode::Exact);
    }

    #[test]
    fn walk_one_accepted() {
        let a0 = MoebiusMatrix::from_ratios([(1, 2), (0, 1), (-1, 4), (1, 1)]);
        let a1 = MoebiusMatrix::from_ratios([(0, 1), (1, 2), (-1, 4), (3, 4)]);
        let sys = DeRhamSystem::validate(a0, a1).unwrap();
        assert_eq!(sys.gamma(), &Scalar::ratio(3, 2));
        assert_eq!(sys.alpha(), &Scalar::ratio(-1, 2));
        assert_eq!(sys.beta(), &Scalar::ratio(0, 1));
    }

    #[test]
    fn identity_pair_rejected() {
        let id = MoebiusMatrix::identity(Mode::Exact);
        let err = DeRhamSystem::validate(id.clone(), id).unwrap_err();
        let Error::Validation(v) = err else {
            panic!("expected validation error")
        };
        assert!(v
            .iter()
            .any(|x| x.condition == Condition::A1 && x.detail.contains("< 1")));
    }

    #[test]
    fn nonzero_b0_rejected() {
        let a0 = MoebiusMatrix::from_ratios([(1, 3), (1, 100), (0, 1), (1, 1)]);
        let a1 = MoebiusMatrix::from_ratios([(2, 3), (1, 3), (0, 1), (1, 1)]);
        let Err(Error::Validation(v)) = DeRhamSystem::validate(a0, a1) else {
            panic!()
        };
        assert!(v.iter().any(|x| x.detail.starts_with("b0")));
    }

    #[test]
    fn a3_violation_reported() {
        // (A1), (A2) hold, but A1 is not a contraction: det = 9/4 > d1^2.
        let a0 = MoebiusMatrix::from_ratios([(1, 3), (0, 1), (0, 1), (1, 1)]);
        let a1 = MoebiusMatrix::from_ratios([(5, 3), (1, 3), (1, 1), (1, 1)]);
        let Err(Error::Validation(v)) = DeRhamSystem::validate(a0, a1) else {
            panic!()
        };
        assert!(v.iter().any(|x| x.condition == Condition::A3));
    }

    #[test]
    fn p0_examples() {
        let sys = presets::lebesgue(Scalar::ratio(1, 3)).unwrap();
        assert_eq!(sys.p0(&sys.balance_point()).unwrap(), Scalar::ratio(1, 2));
        assert_eq!(sys.p0(&Scalar::ratio(0, 1)).unwrap(), Scalar::ratio(1, 3));
        assert_eq!(sys.p0(&Scalar::ratio(-1, 1)).unwrap(), Scalar::ratio(0, 1));
        assert!(matches!(
            sys.p0(&Scalar::ratio(-3, 1)),
            Err(Error::Domain(_))
        ));
        let walk = presets::walk(Scalar::ratio(1, 1)).unwrap();
        assert_eq!(walk.gamma(), &Scalar::ratio(3, 2));
        assert_eq!(walk.p0(&Scalar::ratio(-1, 2)).unwrap(), Scalar::ratio(1, 2));
        assert_eq!(
            &walk.p0(&Scalar::ratio(1, 5)).unwrap() + &walk.p1(&Scalar::ratio(1, 5)).unwrap(),
            Scalar::ratio(1, 1)
        );
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&Scalar::ratio(1, 2)).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&Scalar::ratio(0, 1)).unwrap(), 0.0);
        assert_eq!(entropy(&Scalar::ratio(1, 1)).unwrap(), 0.0);
        assert!((entropy(&Scalar::ratio(1, 4)).unwrap() - 0.562335).abs() < 1e-6);
        assert!(entropy(&Scalar::approx(1.2)).is_err());
        assert!(entropy(&Scalar::ratio(-1, 9)).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        let sys = presets::lebesgue(Scalar::ratio(1, 3)).unwrap();
        let fp = sys.fixed_points();
        assert_eq!(fp.transposed_a0, Scalar::ratio(0, 1));
        assert_eq!(
            fp.transposed_a1,
            (Scalar::ratio(-1, 1), Scalar::ratio(0, 1))
        );
        assert_eq!(fp.max_residual, 0.0);

        let walk = presets::walk(Scalar::ratio(1, 1)).unwrap();
        let fp = walk.fixed_points();
        assert_eq!(fp.transposed_a0, Scalar::ratio(-1, 2));
        assert_eq!(
            fp.transposed_a1,
            (Scalar::ratio(-1, 1), Scalar::ratio(-1, 2))
        );
        assert_eq!(fp.max_residual, 0.0);

        let approx = presets::walk(Scalar::ratio(1, 2)).unwrap();
        assert_eq!(approx.mode(), Mode::Approx);
        assert!(approx.fixed_points().max_residual < 1e-10);
    }

    #[test]
    fn approx_mode_validation() {
        let sys = presets::lebesgue(Scalar::ratio(1, 3))
            .unwrap()
            .to_mode(Mode::Approx)
            .unwrap();
        assert_eq!(sys.mode(), Mode::Approx);
        assert!((sys.gamma().to_f64() - 3.0).abs() < 1e-15);
    }
}
