//! The measure `μ_f` on dyadic intervals, the ratio-state chain, sampling
//! of `μ_f`, and the entropy-rate estimator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::{Mode, MoebiusMatrix, Scalar, WordProduct};
use crate::solution::{enclosure_of_word, DyadicAddress};
use crate::system::{entropy_f64, DeRhamSystem};

/// Tolerance on `alpha <= t <= beta` for approximate ratio states.
pub const STATE_TOL: f64 = 1e-10;

/// Default seed used when callers do not supply one.
pub const DEFAULT_SEED: u64 = 0x5EED_DE12_4A11_0001;

/// State attached to one dyadic interval.
#[derive(Clone, Debug)]
pub struct MeasureNode {
    pub addr: DyadicAddress,
    /// `μ_f` of the interval.
    pub mass: Scalar,
    /// Ratio `r/s` of the bottom row of the word, tracked through the
    /// transposed maps from 0.
    pub ratio: Scalar,
    pub word: WordProduct,
}

/// `(p s - q r) / (s (r + s))` for a word `((p, q), (r, s))`.
pub fn mass_of_word(word: &MoebiusMatrix) -> Scalar {
    let num = &word.a * &word.d - &word.b * &word.c;
    let den = &word.d * (&word.c + &word.d);
    num / den
}

impl MeasureNode {
    pub fn root(sys: &DeRhamSystem) -> Self {
        MeasureNode {
            addr: DyadicAddress::root(),
            mass: Scalar::one(sys.mode()),
            ratio: Scalar::zero(sys.mode()),
            word: WordProduct::new(sys.mode()),
        }
    }

    pub fn child(&self, sys: &DeRhamSystem, digit: u8) -> Self {
        let word = self.word.pushed(sys.matrix(digit));
        let ratio = sys
            .transposed_step(digit, &self.ratio)
            .expect("transposed maps have no pole on [alpha, beta]");
        MeasureNode {
            addr: self.addr.child(digit),
            mass: mass_of_word(word.word()),
            ratio,
            word,
        }
    }

    pub fn children(&self, sys: &DeRhamSystem) -> [MeasureNode; 2] {
        [self.child(sys, 0), self.child(sys, 1)]
    }

    pub fn at(sys: &DeRhamSystem, addr: &DyadicAddress) -> Self {
        addr.bits()
            .iter()
            .fold(MeasureNode::root(sys), |node, &b| node.child(sys, b))
    }
}

/// All nodes of depth `n`, in increasing order of address.
pub fn level(sys: &DeRhamSystem, n: u32) -> Vec<MeasureNode> {
    let mut nodes = vec![MeasureNode::root(sys)];
    for _ in 0..n {
        nodes = nodes.iter().flat_map(|node| node.children(sys)).collect();
    }
    nodes
}

/// Visits every node of depth `0..=n` in depth-first order.
pub fn walk_tree(sys: &DeRhamSystem, n: u32, mut visit: impl FnMut(&MeasureNode)) {
    fn go(sys: &DeRhamSystem, node: &MeasureNode, left: u32, visit: &mut impl FnMut(&MeasureNode)) {
        visit(node);
        if left > 0 {
            for c in node.children(sys) {
                go(sys, &c, left - 1, visit);
            }
        }
    }
    go(sys, &MeasureNode::root(sys), n, &mut visit);
}

pub fn interval_measure(sys: &DeRhamSystem, addr: &DyadicAddress) -> Scalar {
    MeasureNode::at(sys, addr).mass
}

/// `Φ(ᵗA_{i_n} ... ᵗA_{i_1}; 0)`, computed one digit at a time.
pub fn ratio_state(sys: &DeRhamSystem, addr: &DyadicAddress) -> Scalar {
    addr.bits().iter().fold(Scalar::zero(sys.mode()), |t, &b| {
        sys.transposed_step(b, &t)
            .expect("no pole on [alpha, beta]")
    })
}

pub fn in_state_range(sys: &DeRhamSystem, t: &Scalar) -> bool {
    match t {
        Scalar::Exact(_) if sys.mode() == Mode::Exact => sys.alpha() <= t && t <= sys.beta(),
        _ => {
            let x = t.to_f64();
            x >= sys.alpha().to_f64() - STATE_TOL && x <= sys.beta().to_f64() + STATE_TOL
        }
    }
}

/// Conditional probability of the next digit given the ratio state.
pub fn digit_probability(sys: &DeRhamSystem, t: &Scalar, digit: u8) -> Result<Scalar> {
    if !in_state_range(sys, t) {
        return Err(Error::Domain(format!(
            "ratio state {t} outside [{}, {}]",
            sys.alpha(),
            sys.beta()
        )));
    }
    if digit == 0 {
        sys.p0(t)
    } else {
        sys.p1(t)
    }
}

/// `-ln μ_f(I)` from the word formula, stable for very deep intervals.
///
/// Uses `μ_f(I) = det W / (s (r + s))` with `det W = prod det A_i` summed in
/// log space, so no quantity underflows.
pub fn neg_log_interval_measure(sys: &DeRhamSystem, digits: &[u8]) -> f64 {
    let approx = sys.to_mode(Mode::Approx).expect("valid system stays valid");
    let log_det = [
        approx.a0().det().to_f64().ln(),
        approx.a1().det().to_f64().ln(),
    ];
    let mut w = WordProduct::new(Mode::Approx);
    let mut sum_log_det = 0.0;
    for &d in digits {
        w.push(approx.matrix(d));
        sum_log_det += log_det[d as usize];
    }
    let word = w.word();
    let s = word.d.to_f64();
    let rs = word.c.to_f64() + s;
    // s and r+s carry the discarded scale once each.
    -(sum_log_det - 2.0 * w.log_scale() - s.ln() - rs.ln())
}

/// A sampled digit sequence with the ratio states that generated it.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SamplePath {
    pub seed: u64,
    pub digits: Vec<u8>,
    /// `states[n]` is the state before digit `n + 1` was drawn; `states[0] = 0`.
    pub states: Vec<Scalar>,
}

impl SamplePath {
    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The sampled point `sum digit_j 2^-j` (to `f64` precision).
    pub fn point(&self) -> f64 {
        self.digits
            .iter()
            .take(64)
            .enumerate()
            .map(|(j, &d)| d as f64 * 0.5f64.powi(j as i32 + 1))
            .sum()
    }

    pub fn digit0_frequency(&self) -> f64 {
        let zeros = self.digits.iter().filter(|&&d| d == 0).count();
        zeros as f64 / self.digits.len().max(1) as f64
    }
}

/// Draws `n` digits of a `μ_f`-distributed point. Digit `n + 1` is 0 with
/// probability `p0(t_n)`; the comparison is done in `f64` while the states
/// keep the system's arithmetic mode.
pub fn sample_path(sys: &DeRhamSystem, n: usize, seed: u64) -> SamplePath {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut digits = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    let mut t = Scalar::zero(sys.mode());
    for _ in 0..n {
        let p = sys.p0(&t).expect("state in [alpha, beta]").to_f64();
        let u: f64 = rng.gen();
        let d = if u < p { 0 } else { 1 };
        let next = sys
            .transposed_step(d, &t)
            .expect("no pole on [alpha, beta]");
        states.push(t);
        digits.push(d);
        t = next;
    }
    SamplePath {
        seed,
        digits,
        states,
    }
}

/// Mean of `s(p0(t_n))` along a path, in nats per digit.
pub fn entropy_rate_of_path(sys: &DeRhamSystem, path: &SamplePath, n: usize) -> f64 {
    let n = n.min(path.len());
    if n == 0 {
        return 0.0;
    }
    let total: f64 = path.states[..n]
        .iter()
        .map(|t| entropy_f64(sys.p0(t).expect("state in range").to_f64()))
        .sum();
    total / n as f64
}

/// Estimator of `lim -ln μ_f(I_N(x)) / N` along a freshly sampled path.
pub fn entropy_rate_estimate(sys: &DeRhamSystem, n: usize, seed: u64) -> f64 {
    let path = sample_path(sys, n, seed);
    entropy_rate_of_path(sys, &path, n)
}

/// `μ_f(I)` is also `Φ(W;1) - Φ(W;0)`: used by tests to cross-check
/// [`mass_of_word`].
pub fn mass_from_enclosure(word: &MoebiusMatrix) -> Scalar {
    enclosure_of_word(word).width()
}
