//! Automatic sub-band plan.
//!
//! Bands form a contiguous comb of the requested width. If a band center
//! would sit within [`PEAK_GUARD_HZ`] of an absorption peak, the whole comb
//! is shifted by up to half a band (in 0.5 GHz steps, centers kept inside
//! the range) to the offset with the smallest summed absorption at the
//! centers, preferring offsets that clear every peak.

use crate::channel::{SubBand, ABSORPTION_MODEL_MAX_HZ, ABSORPTION_MODEL_MIN_HZ};
use crate::channel::Medium;
use crate::error::{Error, Result};

pub const PEAK_GUARD_HZ: f64 = 10e9;
pub const PEAK_SCAN_STEP_HZ: f64 = 0.1e9;
const SHIFT_STEP_HZ: f64 = 0.5e9;

/// Interior local maxima of `K(f)` sampled every `step_hz` over `[lo, hi]`.
pub fn absorption_peaks(medium: &Medium, lo: f64, hi: f64, step_hz: f64) -> Result<Vec<f64>> {
    let n = ((hi - lo) / step_hz).round() as usize;
    let f: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step_hz).collect();
    let k: Vec<f64> = f.iter().map(|&x| medium.absorption(x)).collect::<Result<_>>()?;
    Ok((1..n)
        .filter(|&j| k[j] > k[j - 1] && k[j] > k[j + 1])
        .map(|j| f[j])
        .collect())
}

pub fn auto_band_plan(range_hz: [f64; 2], width_hz: f64, medium: &Medium, noise_figure_db: f64) -> Result<Vec<SubBand>> {
    let [lo, hi] = range_hz;
    if !(lo < hi && lo >= ABSORPTION_MODEL_MIN_HZ && hi <= ABSORPTION_MODEL_MAX_HZ) {
        return Err(Error::Config(format!("band range [{lo}, {hi}] must lie inside [2e11, 4e11]")));
    }
    if !(width_hz > 0.0) {
        return Err(Error::Config(format!("band width must be positive, got {width_hz}")));
    }
    let span = hi - lo;
    let count = ((span / width_hz) * (1.0 + 1e-12)).floor() as usize;
    if count == 0 {
        return Err(Error::Config(format!(
            "range of {span} Hz is too narrow for a {width_hz} Hz band"
        )));
    }
    let slack = span - count as f64 * width_hz;
    let base: Vec<f64> = (0..count)
        .map(|k| lo + 0.5 * slack + (k as f64 + 0.5) * width_hz)
        .collect();

    let peaks = absorption_peaks(medium, lo, hi, PEAK_SCAN_STEP_HZ)?;
    let clear = |centers: &[f64]| {
        centers
            .iter()
            .all(|c| peaks.iter().all(|p| (c - p).abs() > PEAK_GUARD_HZ))
    };

    let mut centers = base.clone();
    if !clear(&base) {
        let steps = (0.5 * width_hz / SHIFT_STEP_HZ).floor() as i64;
        let mut best: Option<(bool, f64, f64)> = None;
        for j in -steps..=steps {
            let s = j as f64 * SHIFT_STEP_HZ;
            let shifted: Vec<f64> = base.iter().map(|c| c + s).collect();
            if shifted.iter().any(|c| *c < lo || *c > hi) {
                continue;
            }
            let ok = clear(&shifted);
            let cost: f64 = shifted.iter().map(|&c| medium.absorption(c)).sum::<Result<f64>>()?;
            let better = match best {
                None => true,
                Some((bok, bcost, bs)) => {
                    (ok && !bok) || (ok == bok && (cost < bcost || (cost == bcost && s.abs() < bs.abs())))
                }
            };
            if better {
                best = Some((ok, cost, s));
            }
        }
        if let Some((_, _, s)) = best {
            centers = base.iter().map(|c| c + s).collect();
        }
    }
    centers
        .into_iter()
        .map(|c| SubBand::with_noise_figure(c, width_hz, noise_figure_db))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn centers(bands: &[SubBand]) -> Vec<f64> {
        bands.iter().map(|b| b.center_hz).collect()
    }

    #[test]
    fn default_atmosphere_avoids_peaks() {
        let m = Medium::default();
        let peaks = absorption_peaks(&m, 200e9, 400e9, PEAK_SCAN_STEP_HZ).unwrap();
        assert_eq!(peaks.len(), 2);
        let bands = auto_band_plan([200e9, 400e9], 50e9, &m, 10.0).unwrap();
        assert_eq!(bands.len(), 4);
        for c in centers(&bands) {
            assert!((c - 325e9).abs() > 10e9 && (c - 380e9).abs() > 10e9, "{c}");
        }
        let c = centers(&bands);
        assert!(c.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dry_air_tiles_contiguously() {
        let bands = auto_band_plan([200e9, 400e9], 50e9, &Medium::dry(), 10.0).unwrap();
        assert_eq!(centers(&bands), vec![225e9, 275e9, 325e9, 375e9]);
    }

    #[test]
    fn full_width_gives_one_band() {
        let bands = auto_band_plan([200e9, 400e9], 200e9, &Medium::default(), 10.0).unwrap();
        assert_eq!(bands.len(), 1);
        assert_eq!(bands[0].bandwidth_hz, 200e9);
    }

    #[test]
    fn too_narrow_range_errors() {
        assert!(auto_band_plan([200e9, 230e9], 50e9, &Medium::default(), 10.0).is_err());
        assert!(auto_band_plan([150e9, 230e9], 50e9, &Medium::default(), 10.0).is_err());
    }
}
