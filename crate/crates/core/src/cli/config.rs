//! JSON experiment configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bcs::{GridSpec, InnerConfig, Instance};
use crate::channel::{Atmosphere, Detuning, Medium, SubBand, ABSORPTION_MODEL_MAX_HZ, ABSORPTION_MODEL_MIN_HZ};
use crate::error::{Error, Result};
use crate::geometry::{Point3, Scene};

use super::band_plan::auto_band_plan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Bcs,
    MiniDis,
    RanLoc,
    RanPhi,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Bcs, Algorithm::MiniDis, Algorithm::RanLoc, Algorithm::RanPhi];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Bcs => "bcs",
            Algorithm::MiniDis => "minidis",
            Algorithm::RanLoc => "ranloc",
            Algorithm::RanPhi => "ranphi",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    pub center_hz: f64,
    pub bandwidth_hz: f64,
}

/// Inclusive seed range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub first: u64,
    pub last: u64,
}

impl SeedRange {
    /// Parses `a..b` (inclusive) or a single seed.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("seed range `{s}` is not of the form a..b"));
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
            None => {
                let v = s.trim().parse().map_err(|_| bad())?;
                (v, v)
            }
        };
        let r = Self { first, last };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.first > self.last {
            return Err(Error::Config(format!("seed range {}..{} is empty", self.first, self.last)));
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.first..=self.last
    }
}

fn d<T: Default>() -> T {
    T::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub room_length_m: f64,
    pub room_width_m: f64,
    pub ceiling_height_m: f64,
    pub ap: Point3,
    pub ue_height_m: f64,
    /// UE counts to sweep when positions are drawn.
    pub ue_counts: Vec<usize>,
    /// Fixed UE positions; replaces random draws when present.
    pub ue_positions: Option<Vec<Point3>>,
    pub atmosphere: Atmosphere,
    pub detuning: Detuning,
    /// Explicit sub-band plan; the automatic plan is used when absent.
    pub bands: Option<Vec<BandSpec>>,
    pub band_range_hz: [f64; 2],
    pub band_width_hz: f64,
    pub noise_figure_db: f64,
    pub element_count: usize,
    pub element_spacing_m: f64,
    pub p_max_w: f64,
    pub rate_requirement_bps: f64,
    /// Per-UE requirements; overrides `rate_requirement_bps`.
    pub rate_requirements_bps: Option<Vec<f64>>,
    pub grid: GridSpec,
    pub sigma: f64,
    pub seeds: SeedRange,
    pub algorithms: Vec<Algorithm>,
    pub sweep_distances_m: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            room_length_m: 8.0,
            room_width_m: 5.0,
            ceiling_height_m: 3.0,
            ap: Point3::new(0.0, 0.0, 2.0),
            ue_height_m: 1.0,
            ue_counts: vec![1, 2, 3, 4],
            ue_positions: None,
            atmosphere: d(),
            detuning: d(),
            bands: None,
            band_range_hz: [200e9, 400e9],
            band_width_hz: 50e9,
            noise_figure_db: 10.0,
            element_count: 20,
            element_spacing_m: 0.005,
            p_max_w: 1.0,
            rate_requirement_bps: 1e9,
            rate_requirements_bps: None,
            grid: GridSpec::default(),
            sigma: 1e-3,
            seeds: SeedRange { first: 1, last: 100 },
            algorithms: Algorithm::ALL.to_vec(),
            sweep_distances_m: vec![1.0, 5.0, 10.0],
            comment: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ExperimentConfig {
    /// Parses JSON text; blank input yields the defaults.
    pub fn from_json(text: &str) -> Result<Self> {
        let text = if text.trim().is_empty() { "{}" } else { text };
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        positive("room_length_m", self.room_length_m)?;
        positive("room_width_m", self.room_width_m)?;
        positive("ceiling_height_m", self.ceiling_height_m)?;
        positive("element_spacing_m", self.element_spacing_m)?;
        positive("p_max_w", self.p_max_w)?;
        positive("band_width_hz", self.band_width_hz)?;
        positive("sigma", self.sigma)?;
        positive("grid.dx_m", self.grid.dx_m)?;
        positive("grid.dy_m", self.grid.dy_m)?;
        if self.element_count == 0 {
            return Err(Error::Config("element_count must be at least 1".into()));
        }
        if !(self.ue_height_m > 0.0 && self.ue_height_m < self.ceiling_height_m) {
            return Err(Error::Config(format!(
                "ue_height_m must lie strictly between 0 and the ceiling, got {}",
                self.ue_height_m
            )));
        }
        if !(self.noise_figure_db.is_finite()) {
            return Err(Error::Config("noise_figure_db must be finite".into()));
        }
        if !(self.rate_requirement_bps >= 0.0 && self.rate_requirement_bps.is_finite()) {
            return Err(Error::Config("rate_requirement_bps must be finite and non-negative".into()));
        }
        if let Some(r) = &self.rate_requirements_bps {
            if r.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::Config("rate_requirements_bps must be finite and non-negative".into()));
            }
        }
        if self.ue_counts.is_empty() || self.ue_counts.contains(&0) {
            return Err(Error::Config("ue_counts must be non-empty and positive".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("algorithms must not be empty".into()));
        }
        if self.sweep_distances_m.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Config("sweep distances must be positive".into()));
        }
        self.seeds.validate()?;
        self.atmosphere.validate().map_err(|e| Error::Config(e.to_string()))?;
        let [lo, hi] = self.band_range_hz;
        if !(lo < hi && lo >= ABSORPTION_MODEL_MIN_HZ && hi <= ABSORPTION_MODEL_MAX_HZ) {
            return Err(Error::Config(format!(
                "band_range_hz [{lo}, {hi}] must be an increasing range inside [2e11, 4e11]"
            )));
        }
        if let Some(positions) = &self.ue_positions {
            if positions.is_empty() {
                return Err(Error::Config("ue_positions must not be empty".into()));
            }
            if let Some(r) = &self.rate_requirements_bps {
                if r.len() != positions.len() {
                    return Err(Error::Config("one rate requirement per UE position".into()));
                }
            }
        }
        self.scene(self.ue_positions.clone().unwrap_or_default())
            .map_err(|e| Error::Config(e.to_string()))?;
        self.sub_bands().map_err(|e| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(other.to_string()),
        })?;
        crate::geometry::PlacementBounds::for_array(
            &self.scene(Vec::new())?,
            self.element_count,
            self.element_spacing_m,
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }

    pub fn medium(&self) -> Result<Medium> {
        Medium::from_atmosphere(&self.atmosphere, self.detuning)
    }

    pub fn sub_bands(&self) -> Result<Vec<SubBand>> {
        match &self.bands {
            Some(list) => {
                if list.is_empty() {
                    return Err(Error::Config("bands must not be empty".into()));
                }
                list.iter()
                    .map(|b| SubBand::with_noise_figure(b.center_hz, b.bandwidth_hz, self.noise_figure_db))
                    .collect()
            }
            None => auto_band_plan(
                self.band_range_hz,
                self.band_width_hz,
                &self.medium()?,
                self.noise_figure_db,
            ),
        }
    }

    pub fn scene(&self, ues: Vec<Point3>) -> Result<Scene> {
        Scene::new(self.room_length_m, self.room_width_m, self.ceiling_height_m, self.ap, ues)
    }

    pub fn requirements(&self, ue_count: usize) -> Vec<f64> {
        match &self.rate_requirements_bps {
            Some(r) if r.len() == ue_count => r.clone(),
            _ => vec![self.rate_requirement_bps; ue_count],
        }
    }

    pub fn instance(&self, ues: Vec<Point3>) -> Result<Instance> {
        let requirements = self.requirements(ues.len());
        let inst = Instance {
            scene: self.scene(ues)?,
            bands: self.sub_bands()?,
            medium: self.medium()?,
            element_count: self.element_count,
            spacing_m: self.element_spacing_m,
            p_max_w: self.p_max_w,
            requirements,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn inner(&self) -> InnerConfig {
        InnerConfig {
            sigma: self.sigma,
            ..InnerConfig::default()
        }
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    ExperimentConfig::from_json(&text)
}
