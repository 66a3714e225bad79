//! Figure presets bundled from `presets/`.

use anyhow::{anyhow, Result};

pub const NAMES: [&str; 5] = ["fig1", "fig2", "fig3", "fig4", "fig5"];

pub fn preset_text(name: &str) -> Result<&'static str> {
    Ok(match name {
        "fig1" => include_str!("../../../presets/fig1.toml"),
        "fig2" => include_str!("../../../presets/fig2.toml"),
        "fig3" => include_str!("../../../presets/fig3.toml"),
        "fig4" => include_str!("../../../presets/fig4.toml"),
        "fig5" => include_str!("../../../presets/fig5.toml"),
        other => return Err(anyhow!("unknown preset '{other}' (expected one of {})", NAMES.join(", "))),
    })
}
