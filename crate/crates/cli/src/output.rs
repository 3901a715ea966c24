//! Artifact writers: metadata headers, medians, graymap rendering.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use npsp_core::maze::{DistanceField, MazeMap, Position};

use crate::config::Settings;

/// Comment header carried by every text artifact: the master seed and a
/// hash of the result-affecting configuration.
pub fn metadata_header(settings: &Settings) -> String {
    format!(
        "# seed = {}\n# config_hash = {}\n",
        settings.seed,
        settings.config_hash()
    )
}

pub fn write_artifact(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Lower median: the order statistic at index (n - 1) / 2.
pub fn lower_median(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite metric"));
    sorted[(sorted.len() - 1) / 2]
}

const WALL_SHADE: u32 = 255;
const MAX_CELL_SHADE: u32 = 230;

/// Distance field as a plain-text portable graymap: darker means closer to
/// the goal, walls and unreachable cells render as a distinct light shade.
pub fn distance_field_pgm(map: &MazeMap, field: &DistanceField, header: &str) -> String {
    let mut out = format!("P2\n{}", header);
    out.push_str(&format!(
        "{} {}\n{}\n",
        map.width(),
        map.height(),
        WALL_SHADE
    ));
    for y in 0..map.height() {
        let mut row = Vec::with_capacity(map.width());
        for x in 0..map.width() {
            let d = field.at(Position::new(x, y));
            let shade = if d < 0 {
                WALL_SHADE
            } else {
                (d as u32 * MAX_CELL_SHADE) / (field.max_dist.max(1) as u32)
            };
            row.push(shade.to_string());
        }
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
