//! Benchmark fixtures shared by the criterion targets.

use derham_core::{presets, DeRhamSystem, Mode, Scalar};

/// The systems benchmarked, in both arithmetic modes where available.
pub fn fixtures() -> Vec<(&'static str, DeRhamSystem)> {
    let third = presets::lebesgue(Scalar::ratio(1, 3)).expect("admissible");
    let walk1 = presets::walk(Scalar::ratio(1, 1)).expect("admissible");
    let walk_half = presets::walk(Scalar::ratio(1, 2)).expect("admissible");
    vec![
        ("lebesgue_1_3_exact", third.clone()),
        (
            "lebesgue_1_3_approx",
            third.to_mode(Mode::Approx).expect("admissible"),
        ),
        ("walk_1_exact", walk1),
        ("walk_1_2_approx", walk_half),
    ]
}
