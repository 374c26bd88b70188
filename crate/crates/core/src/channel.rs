//! Terahertz propagation: water-vapour absorption, the cascaded AP → IRS → UE
//! gain, the IRS-reflected channel and the per-sub-band Shannon rate.
//!
//! All quantities are SI: Hz, m, W, and absorption in m⁻¹.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::geometry::{combined_steering_phases, path_length, IrsPlacement, PhaseVector, Scene};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Thermal noise floor, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Frequency window over which the absorption fit holds.
pub const ABSORPTION_MODEL_MIN_HZ: f64 = 200e9;
pub const ABSORPTION_MODEL_MAX_HZ: f64 = 400e9;

pub type ComplexGain = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atmosphere {
    pub temperature_c: f64,
    pub pressure_hpa: f64,
    pub relative_humidity_pct: f64,
}

impl Default for Atmosphere {
    /// 23 °C, 1013.25 hPa, 50 % relative humidity.
    fn default() -> Self {
        Self {
            temperature_c: 23.0,
            pressure_hpa: 1013.25,
            relative_humidity_pct: 50.0,
        }
    }
}

impl Atmosphere {
    pub fn new(temperature_c: f64, pressure_hpa: f64, relative_humidity_pct: f64) -> Result<Self> {
        let atm = Self {
            temperature_c,
            pressure_hpa,
            relative_humidity_pct,
        };
        atm.validate()?;
        Ok(atm)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("temperature", self.temperature_c)?;
        ensure_finite("pressure", self.pressure_hpa)?;
        ensure_finite("relative humidity", self.relative_humidity_pct)?;
        if self.pressure_hpa <= 0.0 {
            return Err(Error::Domain(format!("pressure must be positive, got {} hPa", self.pressure_hpa)));
        }
        if !(0.0..=100.0).contains(&self.relative_humidity_pct) {
            return Err(Error::Domain(format!(
                "relative humidity must be within [0, 100] %, got {}",
                self.relative_humidity_pct
            )));
        }
        if self.temperature_c <= -100.0 {
            return Err(Error::Domain(format!("temperature {} °C is below -100 °C", self.temperature_c)));
        }
        Ok(())
    }

    pub fn mixing_ratio(&self) -> Result<f64> {
        water_vapor_mixing_ratio(self)
    }
}

/// Saturated water-vapour pressure (hPa) from the Buck equation, with the
/// enhancement factor for moist air at pressure `pressure_hpa`.
pub fn saturated_vapor_pressure(temperature_c: f64, pressure_hpa: f64) -> Result<f64> {
    ensure_finite("temperature", temperature_c)?;
    ensure_finite("pressure", pressure_hpa)?;
    if pressure_hpa < 0.0 {
        return Err(Error::Domain(format!("pressure must be non-negative, got {pressure_hpa}")));
    }
    let enhancement = 1.0007 + 3.46e-8 * pressure_hpa;
    Ok(6.1121 * enhancement * (17.502 * temperature_c / (240.97 + temperature_c)).exp())
}

/// Volume mixing ratio of water vapour.
pub fn water_vapor_mixing_ratio(atmosphere: &Atmosphere) -> Result<f64> {
    if atmosphere.pressure_hpa == 0.0 {
        return Err(Error::Domain("mixing ratio undefined at zero pressure".into()));
    }
    atmosphere.validate()?;
    let saturated = saturated_vapor_pressure(atmosphere.temperature_c, atmosphere.pressure_hpa)?;
    Ok(atmosphere.relative_humidity_pct / 100.0 * saturated / atmosphere.pressure_hpa)
}

/// How the two resonance detuning terms enter the absorption fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detuning {
    /// Lorentzian denominators `B + (ν - ν₀)²`, which produce the two
    /// absorption lines near 325 and 380 GHz.
    #[default]
    Squared,
    /// Linear `B + (ν - ν₀)`. Has sign-changing poles; kept for comparison.
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absorption {
    pub per_m: f64,
    /// Set when the frequency lies outside 200–400 GHz.
    pub outside_validity_window: bool,
}

const POLY: [f64; 4] = [5.54e-37, -3.94e-25, 9.06e-14, -6.36e-3];
const LINE_1_WAVENUMBER: f64 = 10.835;
const LINE_2_WAVENUMBER: f64 = 12.664;

/// Molecular absorption coefficient `K(f)` in m⁻¹.
pub fn absorption_coefficient(frequency_hz: f64, mixing_ratio: f64) -> Result<Absorption> {
    absorption_coefficient_with(frequency_hz, mixing_ratio, Detuning::Squared)
}

pub fn absorption_coefficient_with(frequency_hz: f64, mixing_ratio: f64, detuning: Detuning) -> Result<Absorption> {
    ensure_finite("frequency", frequency_hz)?;
    ensure_finite("mixing ratio", mixing_ratio)?;
    if mixing_ratio < 0.0 {
        return Err(Error::Domain(format!("mixing ratio must be non-negative, got {mixing_ratio}")));
    }
    let mu = mixing_ratio;
    let a = 0.2205 * mu * (0.1303 * mu + 0.0294);
    let b = (0.4093 * mu + 0.0925).powi(2);
    let c = 2.014 * mu * (0.1702 * mu + 0.0303);
    let d = (0.537 * mu + 0.0956).powi(2);

    // Wavenumber in cm⁻¹.
    let nu = frequency_hz / (100.0 * SPEED_OF_LIGHT);
    let (x1, x2) = match detuning {
        Detuning::Squared => ((nu - LINE_1_WAVENUMBER).powi(2), (nu - LINE_2_WAVENUMBER).powi(2)),
        Detuning::AsPrinted => (nu - LINE_1_WAVENUMBER, nu - LINE_2_WAVENUMBER),
    };
    let f = frequency_hz;
    let poly = ((POLY[0] * f + POLY[1]) * f + POLY[2]) * f + POLY[3];
    let per_m = a / (b + x1) + c / (d + x2) + poly;
    if !per_m.is_finite() {
        return Err(Error::Numeric(format!("absorption coefficient not finite at {f} Hz")));
    }
    Ok(Absorption {
        per_m,
        outside_validity_window: !(ABSORPTION_MODEL_MIN_HZ..=ABSORPTION_MODEL_MAX_HZ).contains(&f),
    })
}

/// AP → IRS → UE amplitude gain over a total path of `path_length_m`:
/// spreading loss, carrier phase rotation and half the absorption exponent.
pub fn cascaded_gain(frequency_hz: f64, path_length_m: f64, absorption_per_m: f64) -> Result<ComplexGain> {
    ensure_finite("frequency", frequency_hz)?;
    ensure_finite("path length", path_length_m)?;
    ensure_finite("absorption", absorption_per_m)?;
    if frequency_hz <= 0.0 {
        return Err(Error::Domain(format!("frequency must be positive, got {frequency_hz}")));
    }
    if path_length_m <= 0.0 {
        return Err(Error::Domain(format!("path length must be positive, got {path_length_m}")));
    }
    let spreading = SPEED_OF_LIGHT / (4.0 * PI * frequency_hz * path_length_m);
    let attenuation = (-0.5 * absorption_per_m * path_length_m).exp();
    let phase = -2.0 * PI * frequency_hz * path_length_m / SPEED_OF_LIGHT;
    Ok(Complex64::from_polar(spreading * attenuation, phase))
}

/// Propagation medium: a fixed water-vapour mixing ratio and detuning form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub mixing_ratio: f64,
    pub detuning: Detuning,
}

impl Default for Medium {
    fn default() -> Self {
        Self::from_atmosphere(&Atmosphere::default(), Detuning::Squared)
            .expect("default atmosphere is valid")
    }
}

impl Medium {
    pub fn from_atmosphere(atmosphere: &Atmosphere, detuning: Detuning) -> Result<Self> {
        Ok(Self {
            mixing_ratio: atmosphere.mixing_ratio()?,
            detuning,
        })
    }

    pub fn dry() -> Self {
        Self {
            mixing_ratio: 0.0,
            detuning: Detuning::Squared,
        }
    }

    pub fn absorption(&self, frequency_hz: f64) -> Result<f64> {
        Ok(absorption_coefficient_with(frequency_hz, self.mixing_ratio, self.detuning)?.per_m)
    }

    pub fn cascaded_gain(&self, frequency_hz: f64, path_length_m: f64) -> Result<ComplexGain> {
        cascaded_gain(frequency_hz, path_length_m, self.absorption(frequency_hz)?)
    }
}

/// One flat slice of spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubBand {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_psd_w_per_hz: f64,
}

impl SubBand {
    pub fn new(center_hz: f64, bandwidth_hz: f64, noise_psd_w_per_hz: f64) -> Result<Self> {
        let band = Self {
            center_hz,
            bandwidth_hz,
            noise_psd_w_per_hz,
        };
        band.validate()?;
        Ok(band)
    }

    /// Band with a flat `-174 dBm/Hz + noise_figure_db` noise floor.
    pub fn with_noise_figure(center_hz: f64, bandwidth_hz: f64, noise_figure_db: f64) -> Result<Self> {
        Self::new(center_hz, bandwidth_hz, noise_psd_from_figure(noise_figure_db))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("center frequency", self.center_hz),
            ("bandwidth", self.bandwidth_hz),
            ("noise PSD", self.noise_psd_w_per_hz),
        ] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let delta = self.delta();
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Domain(format!("inverse noise power {delta} is not finite and positive")));
        }
        Ok(())
    }

    /// Inverse in-band noise power `1 / (S_N · B)`, 1/W.
    pub fn delta(&self) -> f64 {
        1.0 / (self.noise_psd_w_per_hz * self.bandwidth_hz)
    }
}

pub fn noise_psd_from_figure(noise_figure_db: f64) -> f64 {
    10f64.powf((THERMAL_NOISE_DBM_PER_HZ + noise_figure_db - 30.0) / 10.0)
}

/// IRS-reflected channel `g · Σₙ e^{-jθₙ} Γₙ e^{-jϑₙ}` to UE `ue` at the
/// band's center frequency.
pub fn reflected_channel(
    medium: &Medium,
    band: &SubBand,
    placement: &IrsPlacement,
    phases: &PhaseVector,
    scene: &Scene,
    ue: usize,
) -> Result<ComplexGain> {
    if phases.len() != placement.element_count {
        return Err(Error::Domain(format!(
            "phase vector has {} entries for {} elements",
            phases.len(),
            placement.element_count
        )));
    }
    let d = path_length(placement, scene, ue)?;
    let g = medium.cascaded_gain(band.center_hz, d)?;
    let steering = combined_steering_phases(band.center_hz, placement, scene, ue)?;
    let array: Complex64 = steering
        .iter()
        .zip(phases.angles())
        .map(|(s, phi)| Complex64::from_polar(1.0, phi - s))
        .sum();
    Ok(g * array)
}

/// Achievable rate in bits/s: `B · log₂(1 + p |h|² δ)`.
pub fn subband_rate(band: &SubBand, power_w: f64, channel_power_gain: f64) -> Result<f64> {
    ensure_finite("power", power_w)?;
    ensure_finite("channel gain", channel_power_gain)?;
    if power_w < 0.0 || channel_power_gain < 0.0 {
        return Err(Error::Domain(format!(
            "power ({power_w}) and channel gain ({channel_power_gain}) must be non-negative"
        )));
    }
    Ok(rate(band.bandwidth_hz, power_w * channel_power_gain * band.delta()))
}

/// `B · log₂(1 + snr)` without validation, for inner loops.
#[inline]
pub(crate) fn rate(bandwidth_hz: f64, snr: f64) -> f64 {
    bandwidth_hz * snr.ln_1p() / std::f64::consts::LN_2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point3;
    use crate::rng::SplitMix64;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    // Values below were produced by a standalone script that evaluates the
    // closed forms directly.
    const MIXING_RATIO_FIG3: f64 = 0.013869106058060476;
    const K_DEFAULT_300GHZ: f64 = 0.0005842722826881691;

    #[test]
    fn buck_reference_points() {
        assert_relative_eq!(saturated_vapor_pressure(23.0, 1013.25).unwrap(), 28.105743426659554, max_relative = 1e-12);
        let at_zero = 6.1121 * (1.0007 + 3.46e-8 * 1013.25);
        assert_relative_eq!(saturated_vapor_pressure(0.0, 1013.25).unwrap(), at_zero, max_relative = 1e-15);
        assert_relative_eq!(at_zero, 6.1166, epsilon = 1e-4);
        let no_pressure = 6.1121 * 1.0007 * (17.502f64 * 23.0 / 263.97).exp();
        assert_relative_eq!(saturated_vapor_pressure(23.0, 0.0).unwrap(), no_pressure, max_relative = 1e-15);
        assert!(saturated_vapor_pressure(f64::NAN, 1013.25).is_err());
    }

    #[test]
    fn mixing_ratio_reference_points() {
        let atm = Atmosphere::new(23.0, 1013.25, 50.0).unwrap();
        assert_relative_eq!(atm.mixing_ratio().unwrap(), MIXING_RATIO_FIG3, max_relative = 1e-12);

        let dry = Atmosphere::new(23.0, 1013.25, 0.0).unwrap();
        assert_eq!(dry.mixing_ratio().unwrap(), 0.0);

        let saturated = Atmosphere::new(23.0, 1013.25, 100.0).unwrap();
        assert_relative_eq!(saturated.mixing_ratio().unwrap(), 2.0 * MIXING_RATIO_FIG3, max_relative = 1e-14);

        let zero_pressure = Atmosphere {
            pressure_hpa: 0.0,
            ..Atmosphere::default()
        };
        assert!(matches!(water_vapor_mixing_ratio(&zero_pressure), Err(Error::Domain(_))));
    }

    #[test]
    fn atmosphere_validation() {
        assert!(Atmosphere::new(23.0, -1.0, 50.0).is_err());
        assert!(Atmosphere::new(23.0, 1013.0, 101.0).is_err());
        assert!(Atmosphere::new(-120.0, 1013.0, 50.0).is_err());
    }

    #[test]
    fn dry_air_leaves_polynomial_only() {
        let k = absorption_coefficient(300e9, 0.0).unwrap();
        assert_relative_eq!(k.per_m, 3.18e-4, max_relative = 1e-9);
        assert!(!k.outside_validity_window);
    }

    #[test]
    fn humid_air_at_300ghz() {
        let k = absorption_coefficient(300e9, MIXING_RATIO_FIG3).unwrap();
        assert_relative_eq!(k.per_m, K_DEFAULT_300GHZ, max_relative = 1e-12);
    }

    #[test]
    fn out_of_window_is_flagged_but_computed() {
        let k = absorption_coefficient(150e9, MIXING_RATIO_FIG3).unwrap();
        assert!(k.outside_validity_window && k.per_m.is_finite());
    }

    #[test]
    fn absorption_peaks_sit_near_325_and_380() {
        let medium = Medium::default();
        let ks: Vec<f64> = (2000..=4000).map(|i| medium.absorption(i as f64 * 1e8).unwrap()).collect();
        let peaks: Vec<f64> = (1..ks.len() - 1)
            .filter(|&i| ks[i] > ks[i - 1] && ks[i] > ks[i + 1])
            .map(|i| 200.0 + i as f64 * 0.1)
            .collect();
        assert_eq!(peaks.len(), 2, "{peaks:?}");
        assert!((315.0..=335.0).contains(&peaks[0]));
        assert!((370.0..=390.0).contains(&peaks[1]));
    }

    #[test]
    fn humidity_raises_absorption_at_the_lines() {
        for f in [324.8e9, 379.7e9] {
            let wet = absorption_coefficient(f, MIXING_RATIO_FIG3).unwrap().per_m;
            let dry = absorption_coefficient(f, 0.0).unwrap().per_m;
            assert!(wet > dry);
        }
    }

    #[test]
    fn as_printed_detuning_differs() {
        let sq = absorption_coefficient_with(300e9, MIXING_RATIO_FIG3, Detuning::Squared).unwrap();
        let lin = absorption_coefficient_with(300e9, MIXING_RATIO_FIG3, Detuning::AsPrinted).unwrap();
        assert!((sq.per_m - lin.per_m).abs() > 1e-6);
    }

    #[test]
    fn cascaded_gain_reference() {
        let g = cascaded_gain(3e11, 5.0, 5.9e-4).unwrap();
        assert_relative_eq!(g.norm_sqr(), 2.522074963720633e-10, max_relative = 1e-9);
        let expected_phase = (-2.0 * PI * 3e11 * 5.0 / SPEED_OF_LIGHT).rem_euclid(2.0 * PI);
        let got = g.arg().rem_euclid(2.0 * PI);
        let diff = (got - expected_phase).abs();
        assert!(diff < 1e-6 || (2.0 * PI - diff) < 1e-6);
    }

    #[test]
    fn cascaded_gain_inverse_square_without_absorption() {
        let near = cascaded_gain(3e11, 3.0, 0.0).unwrap().norm_sqr();
        let far = cascaded_gain(3e11, 6.0, 0.0).unwrap().norm_sqr();
        assert_relative_eq!(far, near / 4.0, max_relative = 1e-14);
        assert!(cascaded_gain(3e11, 0.0, 0.0).is_err());
    }

    #[test]
    fn absorption_dips_deepen_with_distance() {
        let m = Medium::default();
        let ratio = |d: f64| {
            m.cascaded_gain(325e9, d).unwrap().norm_sqr() / m.cascaded_gain(300e9, d).unwrap().norm_sqr()
        };
        assert!(ratio(5.0) < ratio(1.0));
    }

    #[test]
    fn single_element_ignores_phase() {
        let scene = Scene::new(8.0, 5.0, 3.0, Point3::new(0.0, 0.0, 2.0), vec![Point3::new(3.0, 4.0, 1.0)]).unwrap();
        let irs = IrsPlacement::new(1, 0.005, 1.0, 2.0).unwrap();
        let band = SubBand::with_noise_figure(3e11, 5e10, 10.0).unwrap();
        let m = Medium::default();
        let g = m.cascaded_gain(3e11, path_length(&irs, &scene, 0).unwrap()).unwrap();
        for phi in [0.0, 1.0, 4.0] {
            let h = reflected_channel(&m, &band, &irs, &PhaseVector::from_angles([phi]), &scene, 0).unwrap();
            assert_relative_eq!(h.norm(), g.norm(), max_relative = 1e-14);
        }
    }

    #[test]
    fn reflected_channel_matches_brute_force_sum() {
        let scene = Scene::new(8.0, 5.0, 3.0, Point3::new(0.0, 0.0, 2.0), vec![Point3::new(3.5, 6.0, 1.0)]).unwrap();
        let irs = IrsPlacement::new(4, 0.005, 2.0, 3.0).unwrap();
        let band = SubBand::with_noise_figure(2.75e11, 5e10, 10.0).unwrap();
        let m = Medium::default();
        let mut rng = SplitMix64::new(1);
        let phases = PhaseVector::from_angles((0..4).map(|_| rng.uniform(0.0, 2.0 * PI)));
        let h = reflected_channel(&m, &band, &irs, &phases, &scene, 0).unwrap();

        let k = 2.0 * PI * band.center_hz / SPEED_OF_LIGHT;
        let anchor = irs.anchor(&scene);
        let r0 = anchor.distance(&scene.ap);
        let ru = scene.ues[0].distance(&anchor);
        let mut sum = Complex64::new(0.0, 0.0);
        for n in 0..4 {
            let theta = k * (anchor.y - scene.ap.y) * n as f64 * 0.005 / r0;
            let vartheta = k * (scene.ues[0].y - anchor.y) * n as f64 * 0.005 / ru;
            sum += Complex64::from_polar(1.0, -theta) * Complex64::from_polar(1.0, phases.angles()[n])
                * Complex64::from_polar(1.0, -vartheta);
        }
        let g = m.cascaded_gain(band.center_hz, r0 + ru).unwrap();
        assert_relative_eq!(h.norm_sqr() / g.norm_sqr(), sum.norm_sqr(), max_relative = 1e-12);
    }

    #[test]
    fn subband_rate_reference_points() {
        let band = SubBand::new(3e11, 5e10, 1e-20).unwrap();
        assert_eq!(subband_rate(&band, 0.0, 1e-9).unwrap(), 0.0);
        let unit_snr_gain = 1.0 / band.delta();
        assert_relative_eq!(subband_rate(&band, 1.0, unit_snr_gain).unwrap(), 5e10, max_relative = 1e-14);

        let band = SubBand::new(3e11, 5e10, 10f64.powf(-20.4)).unwrap();
        let expected = 5e10 * (1.0 + 2.53e-8 / (10f64.powf(-20.4) * 5e10)).log2();
        assert_relative_eq!(subband_rate(&band, 1.0, 2.53e-8).unwrap(), expected, max_relative = 1e-12);
        assert!(subband_rate(&band, f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn noise_figure_floor() {
        assert_relative_eq!(noise_psd_from_figure(0.0), 10f64.powf(-20.4), max_relative = 1e-12);
        assert_relative_eq!(noise_psd_from_figure(10.0), 10f64.powf(-19.4), max_relative = 1e-12);
        assert!(SubBand::new(3e11, 0.0, 1e-20).is_err());
    }

    proptest! {
        #[test]
        fn gain_strictly_decreases_with_distance(f in 2e11f64..4e11, d in 0.5f64..20.0, extra in 0.01f64..5.0) {
            let m = Medium::default();
            let near = m.cascaded_gain(f, d).unwrap().norm_sqr();
            let far = m.cascaded_gain(f, d + extra).unwrap().norm_sqr();
            prop_assert!(far < near);
            prop_assert!(near <= 1.0 || d < 1.0);
        }

        #[test]
        fn array_gain_bound(seed in any::<u64>(), n in 1usize..12) {
            let mut rng = SplitMix64::new(seed);
            let scene = Scene::new(8.0, 5.0, 3.0, Point3::new(0.0, 0.0, 2.0),
                vec![Point3::new(rng.uniform(0.0, 5.0), rng.uniform(0.0, 8.0), 1.0)]).unwrap();
            let irs = IrsPlacement::new(n, 0.005, rng.uniform(0.1, 4.9), rng.uniform(0.1, 7.0)).unwrap();
            let band = SubBand::with_noise_figure(rng.uniform(2e11, 4e11), 5e10, 10.0).unwrap();
            let m = Medium::default();
            let phases = PhaseVector::from_angles((0..n).map(|_| rng.uniform(0.0, 6.3)));
            let h = reflected_channel(&m, &band, &irs, &phases, &scene, 0).unwrap();
            let g = m.cascaded_gain(band.center_hz, path_length(&irs, &scene, 0).unwrap()).unwrap();
            prop_assert!(h.norm() <= n as f64 * g.norm() * (1.0 + 1e-12));
        }

        #[test]
        fn rate_monotone(p in 0.0f64..2.0, dp in 0.0f64..1.0, gain in 0.0f64..1e-8) {
            let band = SubBand::with_noise_figure(3e11, 5e10, 10.0).unwrap();
            let r = subband_rate(&band, p, gain).unwrap();
            prop_assert!(r >= 0.0);
            prop_assert!(subband_rate(&band, p + dp, gain).unwrap() >= r);
            prop_assert!(subband_rate(&band, p, gain * 1.5).unwrap() >= r);
        }
    }
}
