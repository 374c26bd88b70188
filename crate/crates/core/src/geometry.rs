//! Room geometry, IRS array layout and the single-user closed forms.
//!
//! Coordinates are meters. The IRS is a uniform linear array mounted on the
//! ceiling (`z = H`) and running parallel to the Y axis; element `n`
//! (zero-based) sits at `(X, Y + nΔ, H)`. The first element is the anchor
//! used for every path-length and steering computation.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::SPEED_OF_LIGHT;
use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }
}

impl From<Point3> for [f64; 3] {
    fn from(p: Point3) -> Self {
        [p.x, p.y, p.z]
    }
}

/// Service area, AP and user positions.
///
/// `room_length_m` runs along Y and `room_width_m` along X.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub room_length_m: f64,
    pub room_width_m: f64,
    pub ceiling_height_m: f64,
    pub ap: Point3,
    pub ues: Vec<Point3>,
}

impl Scene {
    pub fn new(
        room_length_m: f64,
        room_width_m: f64,
        ceiling_height_m: f64,
        ap: Point3,
        ues: Vec<Point3>,
    ) -> Result<Self> {
        let scene = Self {
            room_length_m,
            room_width_m,
            ceiling_height_m,
            ap,
            ues,
        };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("room length", self.room_length_m),
            ("room width", self.room_width_m),
            ("ceiling height", self.ceiling_height_m),
        ] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        for c in [self.ap.x, self.ap.y, self.ap.z] {
            ensure_finite("AP coordinate", c)?;
        }
        if self.ap.z > self.ceiling_height_m {
            return Err(Error::Domain(format!(
                "AP height {} exceeds ceiling {}",
                self.ap.z, self.ceiling_height_m
            )));
        }
        for (u, ue) in self.ues.iter().enumerate() {
            let inside = (0.0..=self.room_width_m).contains(&ue.x)
                && (0.0..=self.room_length_m).contains(&ue.y)
                && ue.z >= 0.0
                && ue.z < self.ceiling_height_m;
            if !inside {
                return Err(Error::Domain(format!(
                    "UE {u} at ({}, {}, {}) lies outside the room below the ceiling",
                    ue.x, ue.y, ue.z
                )));
            }
        }
        Ok(())
    }

    pub fn ue_count(&self) -> usize {
        self.ues.len()
    }

    pub fn ue(&self, index: usize) -> Result<&Point3> {
        self.ues
            .get(index)
            .ok_or_else(|| Error::Domain(format!("UE index {index} out of range ({} UEs)", self.ues.len())))
    }
}

/// Element count, spacing and the `(X, Y)` location of the first element.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IrsPlacement {
    pub element_count: usize,
    pub spacing_m: f64,
    pub x: f64,
    pub y: f64,
}

impl IrsPlacement {
    pub fn new(element_count: usize, spacing_m: f64, x: f64, y: f64) -> Result<Self> {
        if element_count == 0 {
            return Err(Error::Domain("IRS needs at least one element".into()));
        }
        ensure_finite("IRS spacing", spacing_m)?;
        ensure_finite("IRS X", x)?;
        ensure_finite("IRS Y", y)?;
        if spacing_m <= 0.0 {
            return Err(Error::Domain(format!("IRS spacing must be positive, got {spacing_m}")));
        }
        Ok(Self {
            element_count,
            spacing_m,
            x,
            y,
        })
    }

    pub fn anchor(&self, scene: &Scene) -> Point3 {
        Point3::new(self.x, self.y, scene.ceiling_height_m)
    }

    pub fn element(&self, scene: &Scene, n: usize) -> Point3 {
        Point3::new(
            self.x,
            self.y + n as f64 * self.spacing_m,
            scene.ceiling_height_m,
        )
    }

    /// Array length along Y, `(N-1)Δ`.
    pub fn aperture_m(&self) -> f64 {
        (self.element_count - 1) as f64 * self.spacing_m
    }

    pub fn at(&self, x: f64, y: f64) -> Self {
        Self { x, y, ..*self }
    }

    /// Checks the placement against the closed placement box of `scene`.
    pub fn validate_in(&self, scene: &Scene) -> Result<()> {
        let bounds = PlacementBounds::for_array(scene, self.element_count, self.spacing_m)?;
        if bounds.contains(self.x, self.y) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "IRS anchor ({}, {}) outside placement box {:?}",
                self.x, self.y, bounds
            )))
        }
    }
}

/// Closed box of admissible anchor locations: `X ∈ [0, W]`,
/// `Y ∈ [0, L - (N-1)Δ]` so the whole array stays on the ceiling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementBounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl PlacementBounds {
    pub fn for_array(scene: &Scene, element_count: usize, spacing_m: f64) -> Result<Self> {
        let aperture = element_count.saturating_sub(1) as f64 * spacing_m;
        let y_max = scene.room_length_m - aperture;
        if y_max < 0.0 {
            return Err(Error::Domain(format!(
                "IRS aperture {aperture} m does not fit in room length {} m",
                scene.room_length_m
            )));
        }
        Ok(Self {
            x_min: 0.0,
            x_max: scene.room_width_m,
            y_min: 0.0,
            y_max,
        })
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    pub fn project(&self, p: [f64; 2]) -> [f64; 2] {
        [
            p[0].clamp(self.x_min, self.x_max),
            p[1].clamp(self.y_min, self.y_max),
        ]
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        ]
    }
}

/// IRS phase shifts stored as angles in `[0, 2π)`, so every reflection
/// coefficient `e^{jφ}` is exactly unit-modulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector {
    angles: Vec<f64>,
}

impl PhaseVector {
    pub fn from_angles(angles: impl IntoIterator<Item = f64>) -> Self {
        Self {
            angles: angles.into_iter().map(wrap_phase).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            angles: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn coefficients(&self) -> Vec<Complex64> {
        self.angles.iter().map(|&a| Complex64::from_polar(1.0, a)).collect()
    }

    /// Euclidean norm of the coefficient difference; insensitive to 2π wraps.
    pub fn distance(&self, other: &PhaseVector) -> f64 {
        self.angles
            .iter()
            .zip(&other.angles)
            .map(|(a, b)| (Complex64::from_polar(1.0, *a) - Complex64::from_polar(1.0, *b)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

pub fn wrap_phase(angle: f64) -> f64 {
    let w = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn wavenumber(frequency_hz: f64) -> f64 {
    TAU * frequency_hz / SPEED_OF_LIGHT
}

fn check_element(placement: &IrsPlacement, n: usize) -> Result<()> {
    if n >= placement.element_count {
        return Err(Error::Domain(format!(
            "element index {n} out of range for {} elements",
            placement.element_count
        )));
    }
    Ok(())
}

/// `|r₀|` and `y`-component of `r₀ = l₁ − w₀`.
fn incident_leg(placement: &IrsPlacement, scene: &Scene) -> Result<(f64, f64)> {
    let anchor = placement.anchor(scene);
    let len = anchor.distance(&scene.ap);
    if len == 0.0 {
        return Err(Error::Domain("AP coincides with the IRS reference element".into()));
    }
    Ok((len, anchor.y - scene.ap.y))
}

/// `|r_u|` and `y`-component of `r_u = w_u − l₁`.
fn departure_leg(placement: &IrsPlacement, scene: &Scene, ue: usize) -> Result<(f64, f64)> {
    let anchor = placement.anchor(scene);
    let w = scene.ue(ue)?;
    let len = w.distance(&anchor);
    if len == 0.0 {
        return Err(Error::Domain(format!("UE {ue} coincides with the IRS reference element")));
    }
    Ok((len, w.y - anchor.y))
}

/// Phase lag of the incoming wave at element `n` (zero-based) relative to the
/// first element.
pub fn incident_steering_phase(
    frequency_hz: f64,
    placement: &IrsPlacement,
    scene: &Scene,
    n: usize,
) -> Result<f64> {
    check_element(placement, n)?;
    let (len, dy) = incident_leg(placement, scene)?;
    Ok(wavenumber(frequency_hz) * dy * n as f64 * placement.spacing_m / len)
}

/// Phase lag of the departing wave towards UE `ue` at element `n`.
pub fn departure_steering_phase(
    frequency_hz: f64,
    placement: &IrsPlacement,
    scene: &Scene,
    ue: usize,
    n: usize,
) -> Result<f64> {
    check_element(placement, n)?;
    let (len, dy) = departure_leg(placement, scene, ue)?;
    Ok(wavenumber(frequency_hz) * dy * n as f64 * placement.spacing_m / len)
}

/// Combined per-element phase progression `θ_n + ϑ_n` for every element.
pub fn combined_steering_phases(
    frequency_hz: f64,
    placement: &IrsPlacement,
    scene: &Scene,
    ue: usize,
) -> Result<Vec<f64>> {
    let (r0, dy0) = incident_leg(placement, scene)?;
    let (ru, dyu) = departure_leg(placement, scene, ue)?;
    let slope = wavenumber(frequency_hz) * placement.spacing_m * (dy0 / r0 + dyu / ru);
    Ok((0..placement.element_count).map(|n| slope * n as f64).collect())
}

/// Total AP → IRS → UE path length `|r₀| + |r_u|`.
pub fn path_length(placement: &IrsPlacement, scene: &Scene, ue: usize) -> Result<f64> {
    let (r0, _) = incident_leg(placement, scene)?;
    let (ru, _) = departure_leg(placement, scene, ue)?;
    Ok(r0 + ru)
}

/// Phases that co-phase every element towards UE `ue`, giving the full
/// `N²` array gain.
pub fn optimal_single_ue_phases(
    frequency_hz: f64,
    placement: &IrsPlacement,
    scene: &Scene,
    ue: usize,
) -> Result<PhaseVector> {
    Ok(PhaseVector::from_angles(combined_steering_phases(
        frequency_hz,
        placement,
        scene,
        ue,
    )?))
}

/// `D(X, Y) = sqrt((X-x)² + (Y-y)² + (H-z)²)` and its gradient.
pub fn anchor_distance(x: f64, y: f64, ceiling_height_m: f64, point: &Point3) -> (f64, [f64; 2]) {
    let dx = x - point.x;
    let dy = y - point.y;
    let dz = ceiling_height_m - point.z;
    let d = (dx * dx + dy * dy + dz * dz).sqrt();
    if d == 0.0 {
        // Subgradient at the kink.
        (0.0, [0.0, 0.0])
    } else {
        (d, [dx / d, dy / d])
    }
}

/// Hessian of [`anchor_distance`] with respect to `(X, Y)`.
pub fn anchor_distance_hessian(x: f64, y: f64, ceiling_height_m: f64, point: &Point3) -> [[f64; 2]; 2] {
    let dx = x - point.x;
    let dy = y - point.y;
    let hk = (ceiling_height_m - point.z).powi(2);
    let d2 = dx * dx + dy * dy + hk;
    let scale = d2.powf(-1.5);
    [
        [scale * (dy * dy + hk), -scale * dx * dy],
        [-scale * dx * dy, scale * (dx * dx + hk)],
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxMinimum {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub iterations: usize,
    /// Projected-gradient norm `|P(p - ∇f) - p|` at the returned point.
    pub residual: f64,
}

const MAX_DESCENT_ITERS: usize = 20_000;

/// Projected gradient descent with Barzilai–Borwein trial steps and
/// backtracking, over a closed box.
pub fn projected_descent<F>(objective: F, bounds: &PlacementBounds, start: [f64; 2], tolerance: f64) -> BoxMinimum
where
    F: Fn([f64; 2]) -> (f64, [f64; 2]),
{
    let residual_at = |p: [f64; 2], g: [f64; 2]| {
        let q = bounds.project([p[0] - g[0], p[1] - g[1]]);
        ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt()
    };

    let mut p = bounds.project(start);
    let (mut f, mut g) = objective(p);
    let mut step = 1.0;
    let mut iterations = 0;
    let mut residual = residual_at(p, g);

    while residual > tolerance && iterations < MAX_DESCENT_ITERS {
        iterations += 1;
        let mut accepted = None;
        let mut trial = step;
        for _ in 0..80 {
            let q = bounds.project([p[0] - trial * g[0], p[1] - trial * g[1]]);
            let moved = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
            let (fq, gq) = objective(q);
            // Allow a few ulps of slack so the search does not stall on
            // rounding noise once the decrease drops below machine precision.
            let slack = 8.0 * f64::EPSILON * f.abs().max(1.0);
            if fq <= f - 1e-4 * moved / trial + slack {
                accepted = Some((q, fq, gq));
                break;
            }
            trial *= 0.5;
        }
        let Some((q, fq, gq)) = accepted else {
            break;
        };
        let s = [q[0] - p[0], q[1] - p[1]];
        let yv = [gq[0] - g[0], gq[1] - g[1]];
        let sy = s[0] * yv[0] + s[1] * yv[1];
        let ss = s[0] * s[0] + s[1] * s[1];
        step = if sy > 0.0 && ss > 0.0 { (ss / sy).clamp(1e-10, 1e10) } else { (2.0 * trial).min(1e10) };
        p = q;
        f = fq;
        g = gq;
        residual = residual_at(p, g);
    }

    BoxMinimum {
        x: p[0],
        y: p[1],
        value: f,
        iterations,
        residual,
    }
}

/// Sum of AP → anchor and anchor → UE distances over the listed UEs.
fn total_distance<'a>(scene: &'a Scene, ues: &[usize]) -> impl Fn([f64; 2]) -> (f64, [f64; 2]) + 'a {
    let ues = ues.to_vec();
    move |p: [f64; 2]| {
        let h = scene.ceiling_height_m;
        let (d0, g0) = anchor_distance(p[0], p[1], h, &scene.ap);
        let mut value = 0.0;
        let mut grad = [0.0, 0.0];
        for &u in &ues {
            let (du, gu) = anchor_distance(p[0], p[1], h, &scene.ues[u]);
            value += d0 + du;
            grad[0] += g0[0] + gu[0];
            grad[1] += g0[1] + gu[1];
        }
        (value, grad)
    }
}

/// Placement that minimizes the path length to a single UE.
pub fn solve_single_ue_placement(
    scene: &Scene,
    bounds: &PlacementBounds,
    ue: usize,
    tolerance: f64,
) -> Result<BoxMinimum> {
    scene.ue(ue)?;
    Ok(projected_descent(total_distance(scene, &[ue]), bounds, bounds.center(), tolerance))
}

/// Placement that minimizes the summed path length over all UEs.
pub fn solve_min_total_distance(scene: &Scene, bounds: &PlacementBounds, tolerance: f64) -> Result<BoxMinimum> {
    if scene.ues.is_empty() {
        return Err(Error::Domain("no UEs to place the IRS for".into()));
    }
    let all: Vec<usize> = (0..scene.ue_count()).collect();
    Ok(projected_descent(total_distance(scene, &all), bounds, bounds.center(), tolerance))
}
