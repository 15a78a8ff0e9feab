//! Equation specs bundled with the binary.

use liesym::rod::RodEquation;

use crate::spec::{self, Model};

pub const PRESETS: &[(&str, &str)] = &[
    ("beam", include_str!("../presets/beam.toml")),
    ("beam-nonuniform", include_str!("../presets/beam-nonuniform.toml")),
    ("beam-winkler-invsq", include_str!("../presets/beam-winkler-invsq.toml")),
    ("biharmonic", include_str!("../presets/biharmonic.toml")),
    ("follower-beam", include_str!("../presets/follower-beam.toml")),
    ("pipe", include_str!("../presets/pipe.toml")),
    ("plate-e-omega", include_str!("../presets/plate-e-omega.toml")),
    ("plate-winkler", include_str!("../presets/plate-winkler.toml")),
    ("plate-constant-8", include_str!("../presets/plate-constant-8.toml")),
    ("rod-row01", include_str!("../presets/rod-row01.toml")),
    ("rod-row02", include_str!("../presets/rod-row02.toml")),
    ("rod-row03", include_str!("../presets/rod-row03.toml")),
    ("rod-row04", include_str!("../presets/rod-row04.toml")),
    ("rod-row05", include_str!("../presets/rod-row05.toml")),
    ("rod-row06", include_str!("../presets/rod-row06.toml")),
    ("rod-row07", include_str!("../presets/rod-row07.toml")),
    ("rod-row08", include_str!("../presets/rod-row08.toml")),
    ("rod-row09", include_str!("../presets/rod-row09.toml")),
    ("rod-row10", include_str!("../presets/rod-row10.toml")),
    ("rod-row11", include_str!("../presets/rod-row11.toml")),
];

pub fn get(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

/// One rod per classification row, in row order.
pub fn table_rows() -> Vec<RodEquation> {
    (1..=11)
        .map(|i| {
            let text = get(&format!("rod-row{i:02}")).expect("row preset");
            match spec::from_str(text, None).expect("row preset parses").model {
                Model::Rod(eq) => eq,
                _ => unreachable!("row presets are rods"),
            }
        })
        .collect()
}
