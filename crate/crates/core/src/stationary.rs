//! Checks on the stationary measure `ν = μ_g` of the random action that
//! applies `A0` or `A1` with probability 1/2 each, and on the behaviour of
//! `μ_f` under the doubling map.

use crate::analysis::classify;
use crate::error::{Error, Result};
use crate::measure::{level, MeasureNode};
use crate::numerics::{Mode, Scalar};
use crate::solution::{enclosure_of_word, inverse_eval, DyadicAddress};
use crate::system::DeRhamSystem;

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct StationarityReport {
    pub depth: u32,
    /// Largest `|ν(f(I_k(x))) - ν(f(I_{k-1}(T x))) / 2|` over all addresses.
    pub max_residual_recursion: f64,
    /// Largest `|ν(f(I_k)) - 2^-k|`.
    pub max_residual_mass: f64,
    /// Whether the regularity of `ν` (singular iff (i) or (ii) fails) agrees
    /// with the classification of `μ_f`.
    pub verdict_transfer: bool,
    pub exactness: Mode,
}

/// `μ_g([a, b)) = g(b) - g(a)` with each endpoint inverted to within `tol / 2`.
pub fn mu_g_interval(sys: &DeRhamSystem, a: &Scalar, b: &Scalar, tol: f64) -> Result<Scalar> {
    if a > b {
        return Err(Error::Domain(format!("need a <= b, got [{a}, {b})")));
    }
    let ga = inverse_eval(sys, a, tol / 2.0)?;
    let gb = inverse_eval(sys, b, tol / 2.0)?;
    Ok(gb - ga)
}

/// For every address of depth `1..=depth`, compares `ν(f(I))` with `2^-k` and
/// with half the `ν`-mass of the image of the shifted address.
pub fn stationarity_check(sys: &DeRhamSystem, depth: u32, tol: f64) -> Result<StationarityReport> {
    if !(1..=20).contains(&depth) {
        return Err(Error::Domain(format!(
            "depth must be in 1..=20, got {depth}"
        )));
    }
    // ν-masses of f-images, level by level; level 0 is ν([0, 1)) = 1.
    let mut previous: Vec<Scalar> = vec![mu_g_interval(
        sys,
        &Scalar::zero(sys.mode()),
        &Scalar::one(sys.mode()),
        tol,
    )?];
    let mut max_mass = (&previous[0] - Scalar::one(sys.mode())).abs().to_f64();
    let mut max_rec = 0.0f64;
    let half = Scalar::ratio_in(1, 2, sys.mode());
    for k in 1..=depth {
        let nodes = level(sys, k);
        let expected = Scalar::dyadic(1, k).to_mode(sys.mode());
        let mut current = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let enc = enclosure_of_word(node.word.word());
            let nu = mu_g_interval(sys, &enc.lower, &enc.upper, tol)?;
            max_mass = max_mass.max((&nu - &expected).abs().to_f64());
            // I_{k-1}(Tx) is the address without its first digit; its index
            // at depth k-1 is the low k-1 bits.
            let shifted = node.addr.shift().expect("depth >= 1");
            let idx = shifted.index().expect("depth <= 20") as usize;
            let rhs = &previous[idx] * &half;
            max_rec = max_rec.max((&nu - &rhs).abs().to_f64());
            current.push(nu);
        }
        previous = current;
    }
    let report = classify(sys);
    let nu_singular = !(report.condition_i && report.condition_ii);
    Ok(StationarityReport {
        depth,
        max_residual_recursion: max_rec,
        max_residual_mass: max_mass,
        verdict_transfer: nu_singular == report.verdict.is_singular(),
        exactness: sys.mode(),
    })
}

/// Compares `μ_f(T^-1 A)` with `∫_A (Φ'(A0; f(y)) + Φ'(A1; f(y))) μ_f(dy)` for
/// every dyadic `A` of the given depth, `T` the doubling map. The integral is
/// a sum over cells of depth `quad_depth` with exact cell masses and the
/// integrand taken at the cell midpoint. Returns the largest discrepancy.
pub fn shift_change_of_measure_check(
    sys: &DeRhamSystem,
    depth: u32,
    quad_depth: u32,
) -> Result<f64> {
    if quad_depth <= depth || quad_depth > 24 {
        return Err(Error::Domain(format!(
            "need depth < quad_depth <= 24, got {depth} and {quad_depth}"
        )));
    }
    let mode = sys.mode();
    // f at a cell midpoint is Φ(W; Φ(A0; 1)).
    let mid_arg = sys.a0().phi(&Scalar::one(mode))?;
    let cells = level(sys, quad_depth);
    let per_block = 1usize << (quad_depth - depth);
    let mut worst = 0.0f64;
    for (k, block) in cells.chunks(per_block).enumerate() {
        let mut integral = Scalar::zero(mode);
        for cell in block {
            let fm = cell.word.word().phi(&mid_arg)?;
            let h = sys.a0().phi_derivative(&fm)? + sys.a1().phi_derivative(&fm)?;
            integral = integral + h * &cell.mass;
        }
        let a = DyadicAddress::from_index(k as u64, depth);
        let preimage =
            MeasureNode::at(sys, &a.prepend(0)).mass + MeasureNode::at(sys, &a.prepend(1)).mass;
        worst = worst.max((preimage - integral).abs().to_f64());
    }
    Ok(worst)
}
