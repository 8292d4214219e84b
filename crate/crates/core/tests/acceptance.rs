//! End-to-end acceptance checks. Runs every criterion, prints one PASS/FAIL
//! line per criterion and exits non-zero if any of them fails.

use std::f64::consts::LN_2;
use std::time::{Duration, Instant};

use derham_core::analysis::{condition_i, singular_dim_upper_bound, verify_epsilon0};
use derham_core::measure::{entropy_rate_of_path, neg_log_interval_measure, DEFAULT_SEED};
use derham_core::presets::{lebesgue, walk, walk_matrices, walk_x};
use derham_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Binary entropy in nats, computed independently of the library.
fn s(p: f64) -> f64 {
    -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn note(&mut self, what: impl Into<String>) {
        self.notes.push(what.into());
    }
}

fn functional_equation() -> Outcome {
    let mut out = Outcome::new();
    let exact = [
        ("lebesgue:1/3", lebesgue(q(1, 3)).unwrap()),
        ("lebesgue:1/2", lebesgue(q(1, 2)).unwrap()),
        ("lebesgue:2/3", lebesgue(q(2, 3)).unwrap()),
        ("walk:1", walk(q(1, 1)).unwrap()),
    ];
    for (name, sys) in &exact {
        out.check(sys.mode() == Mode::Exact, format!("{name} is not exact"));
        let mut worst = Scalar::zero(Mode::Exact);
        for n in 0..=10u32 {
            for k in 0..=(1u64 << n) {
                worst = worst.max(functional_equation_residual(sys, k, n).unwrap());
            }
        }
        out.check(worst.is_zero(), format!("{name}: exact residual {worst}"));
    }
    let mut approx: Vec<(String, DeRhamSystem)> = exact
        .iter()
        .map(|(n, s)| (format!("{n} (approx)"), s.to_mode(Mode::Approx).unwrap()))
        .collect();
    approx.push(("walk:1/2".into(), walk(q(1, 2)).unwrap()));
    for (name, sys) in &approx {
        out.check(
            sys.mode() == Mode::Approx,
            format!("{name} is not approximate"),
        );
        let mut worst = 0.0f64;
        for n in 0..=10u32 {
            for k in 0..=(1u64 << n) {
                worst = worst.max(functional_equation_residual(sys, k, n).unwrap().to_f64());
            }
        }
        out.check(worst < 1e-12, format!("{name}: residual {worst:e}"));
        out.note(format!("{name}: {worst:.1e}"));
    }
    out
}

fn measure_consistency() -> Outcome {
    let mut out = Outcome::new();
    let sys = lebesgue(q(1, 3)).unwrap();
    let mut leaf_sum = Scalar::zero(Mode::Exact);
    let mut nodes = 0usize;
    let mut stack = vec![MeasureNode::root(&sys)];
    while let Some(node) = stack.pop() {
        nodes += 1;
        out.check(
            measure::in_state_range(&sys, &node.ratio)
                && sys.alpha() <= &node.ratio
                && &node.ratio <= sys.beta(),
            format!(
                "state {} of {} outside [alpha, beta]",
                node.ratio, node.addr
            ),
        );
        if node.addr.depth() == 12 {
            leaf_sum = leaf_sum + &node.mass;
            continue;
        }
        let [c0, c1] = node.children(&sys);
        out.check(
            &c0.mass + &c1.mass == node.mass,
            format!("additivity fails at {}", node.addr),
        );
        let p0 = digit_probability(&sys, &node.ratio, 0).unwrap();
        out.check(
            c0.mass == &node.mass * &p0,
            format!("ratio identity fails at {}", node.addr),
        );
        stack.push(c1);
        stack.push(c0);
    }
    out.check(nodes == (1 << 13) - 1, format!("visited {nodes} nodes"));
    out.check(
        leaf_sum == Scalar::one(Mode::Exact),
        format!("leaf sum {leaf_sum}"),
    );
    out.note(format!("{nodes} nodes"));
    out
}

fn classification() -> Outcome {
    let mut out = Outcome::new();
    for (p, singular) in [
        ((1, 3), true),
        ((1, 4), true),
        ((2, 3), true),
        ((1, 2), false),
    ] {
        let r = classify(&lebesgue(q(p.0, p.1)).unwrap());
        out.check(
            r.verdict.is_singular() == singular && r.exactness == Mode::Exact,
            format!(
                "lebesgue:{}/{} -> {} ({})",
                p.0,
                p.1,
                r.verdict.name(),
                r.exactness
            ),
        );
    }
    let w1 = walk(q(1, 1)).unwrap();
    let r = classify(&w1);
    out.check(
        r.verdict == Verdict::AbsolutelyContinuous { c0: q(-1, 4) } && r.exactness == Mode::Exact,
        format!("walk:1 -> {:?}", r.verdict),
    );
    for u in [(1, 2), (3, 2)] {
        let r = classify(&walk(q(u.0, u.1)).unwrap());
        out.check(
            r.verdict.is_singular(),
            format!("walk:{}/{} -> {}", u.0, u.1, r.verdict.name()),
        );
        out.note(format!(
            "walk:{}/{} {} ({})",
            u.0,
            u.1,
            r.verdict.name(),
            r.exactness
        ));
    }

    let cf = closed_form_solution(&w1).unwrap();
    let w1a = w1.to_mode(Mode::Approx).unwrap();
    let mut worst = 0.0f64;
    for j in 0..1000i64 {
        let x = q(2 * j + 1, 2000);
        let one = Scalar::one(Mode::Exact);
        let density = Scalar::from_int(2, Mode::Exact) / ((&x + &one) * (&x + &one));
        out.check(cf.density(&x) == density, format!("density at {x}"));
        // The closed-form distribution function integrates 2/(x+1)^2.
        let integral = Scalar::from_int(2, Mode::Exact) * &x / (&x + &one);
        out.check(cf.cdf(&x) == integral, format!("cdf at {x}"));
        let v = eval(&w1a, &x.to_mode(Mode::Approx), 1e-12)
            .unwrap()
            .to_f64();
        worst = worst.max((v - integral.to_f64()).abs());
    }
    out.check(worst <= 1e-10, format!("eval vs closed form: {worst:e}"));
    out.note(format!("eval vs closed form {worst:.1e}"));
    out
}

fn dimension() -> Outcome {
    let mut out = Outcome::new();
    for p in [(1, 4), (1, 3)] {
        let b = dimension_bounds(&lebesgue(q(p.0, p.1)).unwrap());
        let want = s(p.0 as f64 / p.1 as f64) / LN_2;
        out.check(
            (b.dim_upper - want).abs() <= 1e-10 && (b.dim_lower - want).abs() <= 1e-10,
            format!(
                "lebesgue:{}/{}: ({}, {}) vs {want}",
                p.0, p.1, b.dim_lower, b.dim_upper
            ),
        );
    }

    let sys = walk(Scalar::approx(0.5)).unwrap();
    let b = dimension_bounds(&sys);
    let x = 2.0 / (1.0 + 3.0f64.sqrt());
    let e1 = s(x) / LN_2;
    let e2 = s(2.0 * x / (1.0 + x)) / LN_2;
    let (lo, hi) = (e1.min(e2), e1.max(e2));
    out.check(
        (b.dim_lower - lo).abs() <= 1e-8 && (b.dim_upper - hi).abs() <= 1e-8,
        format!(
            "walk:0.5: ({}, {}) vs ({lo}, {hi})",
            b.dim_lower, b.dim_upper
        ),
    );
    out.note(format!(
        "walk:0.5 dims [{:.6}, {:.6}]",
        b.dim_lower, b.dim_upper
    ));

    for (name, sys) in [
        ("lebesgue:1/3", lebesgue(q(1, 3)).unwrap()),
        ("walk:1/2", walk(q(1, 2)).unwrap()),
        ("walk:1", walk(q(1, 1)).unwrap()),
        ("walk:3/2", walk(q(3, 2)).unwrap()),
    ] {
        let b = dimension_bounds(&sys);
        let (a, bt) = (sys.alpha().to_f64(), sys.beta().to_f64());
        let gamma = sys.gamma().to_f64();
        let local = |t: f64| s((t + 1.0) / (t + gamma));
        let n = 1_000_000;
        let (mut max, mut min) = (f64::MIN, f64::MAX);
        for i in 0..=n {
            let v = local(a + (bt - a) * i as f64 / n as f64);
            max = max.max(v);
            min = min.min(v);
        }
        out.check(
            (b.theta1 - max).abs() <= 1e-8 && (b.theta2 - min).abs() <= 1e-8,
            format!(
                "{name}: ({}, {}) vs grid ({min}, {max})",
                b.theta2, b.theta1
            ),
        );
    }
    out
}

fn entropy_rate() -> Outcome {
    let mut out = Outcome::new();
    let sys = lebesgue(q(1, 4)).unwrap();
    let path = sample_path(&sys, 10_000, DEFAULT_SEED);
    let s14 = entropy(&q(1, 4)).unwrap();
    out.check((s14 - s(0.25)).abs() <= 1e-15, format!("s(1/4) = {s14}"));
    let all_equal = path
        .states
        .iter()
        .all(|t| entropy(&sys.p0(t).unwrap()).unwrap() == s14);
    out.check(all_equal, "lebesgue:1/4 summands differ from s(1/4)");

    let sys = walk(Scalar::approx(0.5)).unwrap();
    let b = dimension_bounds(&sys);
    let path = sample_path(&sys, 1_000_000, DEFAULT_SEED);
    let est = entropy_rate_of_path(&sys, &path, path.len());
    out.check(
        b.theta2 <= est && est <= b.theta1,
        format!("estimate {est} outside [{}, {}]", b.theta2, b.theta1),
    );
    let n = 10_000;
    let short = entropy_rate_of_path(&sys, &path, n);
    let direct = neg_log_interval_measure(&sys, &path.digits[..n]) / n as f64;
    out.check(
        (short - direct).abs() < 1e-2,
        format!("N = {n}: estimate {short} vs -ln R_N / N = {direct}"),
    );
    out.note(format!(
        "walk:0.5 rate {est:.6} in [{:.6}, {:.6}]; N=1e4 gap {:.1e}",
        b.theta2,
        b.theta1,
        (short - direct).abs()
    ));
    out
}

/// Random admissible rational system: `A0 = k0 ((a0, 0), (c0, 1))`,
/// `A1 = k1 ((c1 + 1 - m, m), (c1, 1))` with `m = a0 / (1 + c0)` and
/// `c1 in (-m, m / (1 - m))`.
fn random_system(rng: &mut ChaCha8Rng) -> Option<DeRhamSystem> {
    let a0 = q(rng.gen_range(1..64), 64);
    let c0 = q(rng.gen_range(-63..=96), 64);
    let one = Scalar::one(Mode::Exact);
    let m = (&a0 / (&c0 + &one)).clone();
    if !m.is_positive() || m >= one {
        return None;
    }
    let lo = -&m;
    let hi = &m / (&one - &m);
    let t = q(rng.gen_range(1..1000), 1000);
    let c1 = &lo + (&hi - &lo) * t;
    let k0 = q(rng.gen_range(1..50), 7);
    let k1 = q(rng.gen_range(1..50), 7);
    let z = Scalar::zero(Mode::Exact);
    let m0 = MoebiusMatrix::new(a0, z, c0, one.clone()).scale(&k0);
    let m1 = MoebiusMatrix::new(&c1 + &one - &m, m, c1, one).scale(&k1);
    DeRhamSystem::validate(m0, m1).ok()
}

fn defect_bound() -> Outcome {
    let mut out = Outcome::new();
    let mut systems: Vec<(String, DeRhamSystem)> = vec![
        ("lebesgue:1/3".into(), lebesgue(q(1, 3)).unwrap()),
        ("lebesgue:1/4".into(), lebesgue(q(1, 4)).unwrap()),
        ("lebesgue:2/3".into(), lebesgue(q(2, 3)).unwrap()),
        ("walk:1/2".into(), walk(q(1, 2)).unwrap()),
        ("walk:3/2".into(), walk(q(3, 2)).unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut random = 0;
    while random < 200 {
        if let Some(sys) = random_system(&mut rng) {
            random += 1;
            systems.push((format!("random #{random}"), sys));
        }
    }
    let (mut tested, mut below_dim, mut below_proper, mut not_below_one) = (0, 0, 0, 0);
    let (mut proper_gap, mut proper_min_dim) = (0.0f64, 1.0f64);
    let mut examples = Vec::new();
    for (name, sys) in &systems {
        if condition_i(sys) {
            continue;
        }
        tested += 1;
        let r = classify(sys);
        out.check(
            r.verdict.is_singular(),
            format!("{name}: (i) fails but verdict AC"),
        );
        let eps = match epsilon0(sys) {
            Ok(e) => e,
            Err(e) => {
                out.check(false, format!("{name}: epsilon0 failed: {e}"));
                continue;
            }
        };
        out.check(
            verify_epsilon0(sys, &eps).is_ok(),
            format!("{name}: epsilon0 post-verification"),
        );
        let bound = singular_dim_upper_bound(sys).unwrap();
        let dim_upper = dimension_bounds(sys).dim_upper;
        if bound >= 1.0 {
            not_below_one += 1;
        }
        if bound < dim_upper - 1e-12 {
            below_dim += 1;
            if dim_upper < 1.0 {
                below_proper += 1;
                proper_gap = proper_gap.max(dim_upper - bound);
                proper_min_dim = proper_min_dim.min(dim_upper);
            }
            if examples.len() < 3 {
                examples.push(format!(
                    "{name}: bound {bound:.6} < dim_upper {dim_upper:.6}"
                ));
            }
        }
    }
    out.check(
        not_below_one == 0,
        format!("{not_below_one} bounds not below 1"),
    );
    out.check(
        below_dim == 0,
        format!(
            "{below_dim}/{tested} bounds below dim_upper - 1e-12, e.g. {}",
            examples.join("; ")
        ),
    );
    out.note(format!(
        "{tested} systems with (i) failing; {below_proper} of the bounds below dim_upper have \
         dim_upper < 1 (smallest such dim_upper {proper_min_dim:.6}, largest gap {proper_gap:.2e})"
    ));
    out
}

fn stationarity() -> Outcome {
    let mut out = Outcome::new();
    for (name, sys) in [
        ("walk:1", walk(q(1, 1)).unwrap()),
        (
            "walk:1 (approx)",
            walk(q(1, 1)).unwrap().to_mode(Mode::Approx).unwrap(),
        ),
    ] {
        let r = stationarity_check(&sys, 8, 1e-11).unwrap();
        out.check(
            r.max_residual_mass < 1e-9 && r.max_residual_recursion < 1e-9 && r.verdict_transfer,
            format!("{name}: {r:?}"),
        );
        out.note(format!(
            "{name}: {:.1e}/{:.1e}",
            r.max_residual_mass, r.max_residual_recursion
        ));
    }
    for p in [(1, 3), (1, 4), (1, 2), (2, 3)] {
        let r = stationarity_check(&lebesgue(q(p.0, p.1)).unwrap(), 8, 1e-11).unwrap();
        out.check(
            r.max_residual_mass == 0.0 && r.max_residual_recursion == 0.0 && r.verdict_transfer,
            format!("lebesgue:{}/{}: {r:?}", p.0, p.1),
        );
    }
    for u in [(1, 2), (3, 2)] {
        let r = stationarity_check(&walk(q(u.0, u.1)).unwrap(), 8, 1e-11).unwrap();
        out.check(
            r.verdict_transfer,
            format!("walk:{}/{}: verdict transfer", u.0, u.1),
        );
    }
    out
}

fn shift_change_of_measure() -> Outcome {
    let mut out = Outcome::new();
    let sys = lebesgue(q(1, 3)).unwrap();
    let r14 = shift_change_of_measure_check(&sys, 4, 14).unwrap();
    let r16 = shift_change_of_measure_check(&sys, 4, 16).unwrap();
    out.check(r14 < 1e-3, format!("lebesgue:1/3 residual {r14:e}"));
    out.check(r16 * 1.5 <= r14, format!("lebesgue:1/3 {r14:e} -> {r16:e}"));
    out.note(format!("lebesgue:1/3 {r14:.1e} -> {r16:.1e}"));

    let curved = walk(q(1, 2)).unwrap();
    let c12 = shift_change_of_measure_check(&curved, 4, 12).unwrap();
    let c14 = shift_change_of_measure_check(&curved, 4, 14).unwrap();
    out.check(c14 < 1e-3, format!("walk:1/2 residual {c14:e}"));
    out.check(c14 * 1.5 <= c12, format!("walk:1/2 {c12:e} -> {c14:e}"));
    out.note(format!("walk:1/2 {c12:.1e} -> {c14:.1e}"));
    out
}

/// Perturbs one entry of the `walk:1` matrices by `delta` and restores the
/// gluing conditions through a single dependent entry.
fn perturbed_walk(entry: usize, delta: &Scalar) -> Option<DeRhamSystem> {
    let (mut m0, mut m1) = walk_matrices(&q(1, 1));
    let mid = walk_x(&q(1, 1)); // Φ(A0; 1), kept fixed
    match entry {
        0 => {
            m0.a = &m0.a + delta;
            m0.c = &m0.a / &mid - &m0.d;
        }
        1 => {
            m0.c = &m0.c + delta;
            m0.a = &mid * (&m0.c + &m0.d);
        }
        2 => {
            m0.d = &m0.d + delta;
            m0.a = &mid * (&m0.c + &m0.d);
        }
        3 => {
            m1.a = &m1.a + delta;
            m1.c = &m1.a + &m1.b - &m1.d;
        }
        4 => {
            m1.c = &m1.c + delta;
            m1.a = &m1.c + &m1.d - &m1.b;
        }
        _ => {
            m1.d = &m1.d + delta;
            m1.a = &m1.c + &m1.d - &m1.b;
        }
    }
    DeRhamSystem::validate(m0, m1).ok()
}

fn robustness() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let (mut trials, mut singular, mut rejected) = (0, 0, 0);
    while trials < 100 {
        let delta = q(rng.gen_range(1_000..=1_000_000), 1_000_000_000);
        let entry = rng.gen_range(0..6);
        match perturbed_walk(entry, &delta) {
            Some(sys) => {
                assert_eq!(sys.mode(), Mode::Exact);
                trials += 1;
                if classify(&sys).verdict.is_singular() {
                    singular += 1;
                }
            }
            None => rejected += 1,
        }
    }
    out.check(singular >= 99, format!("only {singular}/100 singular"));
    out.note(format!(
        "{singular}/100 singular, {rejected} inadmissible draws redrawn"
    ));
    out
}

fn main() {
    type Criterion = (u32, &'static str, fn() -> Outcome, u64);
    let criteria: [Criterion; 9] = [
        (1, "functional equation", functional_equation, 5),
        (2, "measure consistency", measure_consistency, 10),
        (3, "classification", classification, 1),
        (4, "dimension bounds", dimension, 5),
        (5, "entropy rate", entropy_rate, 10),
        (6, "singular defect bound", defect_bound, 30),
        (7, "stationarity", stationarity, 30),
        (8, "shift change of measure", shift_change_of_measure, 30),
        (9, "robustness of singularity", robustness, 30),
    ];
    let mut failed = 0;
    for (n, name, run, limit) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if elapsed > Duration::from_secs(limit) {
            outcome
                .failures
                .push(format!("took {elapsed:.2?}, limit {limit} s"));
        }
        let status = if outcome.failures.is_empty() {
            "PASS"
        } else {
            "FAIL"
        };
        println!(
            "[criterion {n}] {status} {name} ({elapsed:.2?}) {}",
            outcome.notes.join("; ")
        );
        for f in &outcome.failures {
            println!("    {f}");
        }
        if !outcome.failures.is_empty() {
            failed += 1;
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
