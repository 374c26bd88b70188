//! Absorption and cascaded-gain sweep over the model window.

use std::path::Path;

use crate::channel::{ABSORPTION_MODEL_MAX_HZ, ABSORPTION_MODEL_MIN_HZ};
use crate::error::Result;

use super::config::ExperimentConfig;

pub const SWEEP_STEP_HZ: f64 = 0.5e9;

/// Writes `f_hz, K_per_m, gain_db_d1, …` with one gain column per
/// configured distance, in configuration order.
pub fn absorption_sweep(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let medium = config.medium()?;
    let mut w = csv::Writer::from_path(out)?;
    let mut header = vec!["f_hz".to_string(), "K_per_m".to_string()];
    header.extend((1..=config.sweep_distances_m.len()).map(|k| format!("gain_db_d{k}")));
    w.write_record(&header)?;
    let n = ((ABSORPTION_MODEL_MAX_HZ - ABSORPTION_MODEL_MIN_HZ) / SWEEP_STEP_HZ).round() as usize;
    for k in 0..=n {
        let f = ABSORPTION_MODEL_MIN_HZ + k as f64 * SWEEP_STEP_HZ;
        let mut row = vec![f.to_string(), medium.absorption(f)?.to_string()];
        for &d in &config.sweep_distances_m {
            let g = medium.cascaded_gain(f, d)?.norm_sqr();
            row.push((10.0 * g.log10()).to_string());
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
