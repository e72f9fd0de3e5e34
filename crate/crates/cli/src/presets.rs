//! Shipped experiment configs, one per acceptance check.

use crate::{Command, ExperimentConfig, RunError};

/// `(name, toml)` for every shipped preset, in run order.
pub const PRESETS: &[(&str, &str)] = &[
    ("c1-disc-kernel", include_str!("../presets/c1-disc-kernel.toml")),
    ("c2-annulus-full", include_str!("../presets/c2-annulus-full.toml")),
    ("c2-annulus-reduced", include_str!("../presets/c2-annulus-reduced.toml")),
    ("c3-square-map", include_str!("../presets/c3-square-map.toml")),
    ("c4-annulus-square-map", include_str!("../presets/c4-annulus-square-map.toml")),
    ("c5-correspondence-sign", include_str!("../presets/c5-correspondence-sign.toml")),
    ("c5-correspondence-sqrt", include_str!("../presets/c5-correspondence-sqrt.toml")),
    ("c6-weighted-kernel-source", include_str!("../presets/c6-weighted-kernel-source.toml")),
    ("c6-weighted-kernel-target", include_str!("../presets/c6-weighted-kernel-target.toml")),
    ("c6-weighted-square-map", include_str!("../presets/c6-weighted-square-map.toml")),
    ("c7-adjoint-correspondence", include_str!("../presets/c7-adjoint-correspondence.toml")),
    ("c7-adjoint-weighted", include_str!("../presets/c7-adjoint-weighted.toml")),
    ("c8-recover-blaschke", include_str!("../presets/c8-recover-blaschke.toml")),
    ("c8-recover-identity", include_str!("../presets/c8-recover-identity.toml")),
    ("c9-structural-annulus", include_str!("../presets/c9-structural-annulus.toml")),
    ("c9-structural-disc", include_str!("../presets/c9-structural-disc.toml")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// Parses a preset with overrides; presets always carry a `command`.
pub fn load(name: &str, overrides: &[String]) -> Result<(Command, ExperimentConfig), RunError> {
    let text = source(name).ok_or_else(|| RunError::Config(format!("unknown preset `{name}`")))?;
    let config = ExperimentConfig::from_toml_str(text, overrides)?;
    let command = config
        .command
        .ok_or_else(|| RunError::Config(format!("preset `{name}` has no `command`")))?;
    Ok((command, config))
}
