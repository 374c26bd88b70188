//! Multi-user IRS phase design.
//!
//! For a fixed allocation every active (UE, sub-band) pair `k` carries a
//! channel constraint `|e_k · φ|² ≥ t_k` over unit-modulus `φ`. The
//! non-convex left side is replaced by its first-order lower bound at an
//! anchor `φ̂`,
//!
//! ```text
//! |e·φ|² ≥ 2 Re{Θ φ} − Ψ,   Θ = conj(e·φ̂) e,   Ψ = |e·φ̂|²
//! ```
//!
//! and the linearized constraints are priced: the phase step aligns every
//! element with the price-weighted sum of the `Θ` rows, and the prices
//! follow a projected sub-gradient on the constraint residuals. An outer
//! loop re-anchors the bound at the latest phases.
//!
//! Prices and step sizes are scaled per constraint by `s_k = (Σₙ|e_{k,n}|)²`,
//! the largest value `|e_k · φ|²` can reach, so constraints whose channels
//! differ by orders of magnitude are weighted evenly.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{Medium, SubBand};
use crate::error::{Error, Result};
use crate::geometry::{combined_steering_phases, path_length, IrsPlacement, PhaseVector, Scene};

/// `√p · g · [e^{-j(θₙ+ϑₙ)}]ₙ`: the per-element contributions of one
/// (UE, sub-band) link, so that `|e · φ|² = p |h|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveVector {
    entries: Vec<Complex64>,
}

impl EffectiveVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn apply(&self, coefficients: &[Complex64]) -> Complex64 {
        self.entries.iter().zip(coefficients).map(|(e, c)| e * c).sum()
    }

    /// `|e · φ|²` for the given phases.
    pub fn power(&self, phases: &PhaseVector) -> f64 {
        self.apply(&phases.coefficients()).norm_sqr()
    }

    /// `(Σₙ |eₙ|)²`, attained by the matched phases.
    pub fn peak_power(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).sum::<f64>().powi(2)
    }
}

pub fn effective_vector(
    medium: &Medium,
    band: &SubBand,
    power_w: f64,
    placement: &IrsPlacement,
    scene: &Scene,
    ue: usize,
) -> Result<EffectiveVector> {
    if !(power_w >= 0.0 && power_w.is_finite()) {
        return Err(Error::Domain(format!("power must be finite and non-negative, got {power_w}")));
    }
    let d = path_length(placement, scene, ue)?;
    let g = medium.cascaded_gain(band.center_hz, d)? * power_w.sqrt();
    let steering = combined_steering_phases(band.center_hz, placement, scene, ue)?;
    Ok(EffectiveVector::new(
        steering.iter().map(|s| g * Complex64::from_polar(1.0, -s)).collect(),
    ))
}

/// Linearized constraints around an anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct Surrogate {
    theta: Vec<Vec<Complex64>>,
    psi: Vec<f64>,
    scale: Vec<f64>,
    anchor: PhaseVector,
}

pub fn surrogate(vectors: &[EffectiveVector], anchor: &PhaseVector) -> Result<Surrogate> {
    let coeffs = anchor.coefficients();
    let mut theta = Vec::with_capacity(vectors.len());
    let mut psi = Vec::with_capacity(vectors.len());
    let mut scale = Vec::with_capacity(vectors.len());
    for (k, e) in vectors.iter().enumerate() {
        if e.len() != anchor.len() {
            return Err(Error::Domain(format!(
                "effective vector {k} has {} entries, anchor has {}",
                e.len(),
                anchor.len()
            )));
        }
        let w_hat = e.apply(&coeffs);
        theta.push(e.entries.iter().map(|en| w_hat.conj() * en).collect());
        psi.push(w_hat.norm_sqr());
        scale.push(e.peak_power());
    }
    Ok(Surrogate {
        theta,
        psi,
        scale,
        anchor: anchor.clone(),
    })
}

impl Surrogate {
    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    pub fn anchor(&self) -> &PhaseVector {
        &self.anchor
    }

    pub fn theta(&self, k: usize) -> &[Complex64] {
        &self.theta[k]
    }

    pub fn psi(&self, k: usize) -> f64 {
        self.psi[k]
    }

    /// `(Σₙ|e_{k,n}|)²` for constraint `k`.
    pub fn scale(&self, k: usize) -> f64 {
        self.scale[k]
    }

    /// Lower bound `2 Re{Θ_k φ} − Ψ_k` on `|e_k · φ|²`.
    pub fn value(&self, k: usize, coefficients: &[Complex64]) -> f64 {
        let inner: Complex64 = self.theta[k].iter().zip(coefficients).map(|(t, c)| t * c).sum();
        2.0 * inner.re - self.psi[k]
    }

    /// Largest value the lower bound of constraint `k` can take.
    pub fn max_value(&self, k: usize) -> f64 {
        2.0 * self.theta[k].iter().map(|t| t.norm()).sum::<f64>() - self.psi[k]
    }

    fn normalizer(&self, k: usize) -> f64 {
        if self.scale[k] > 0.0 {
            self.scale[k]
        } else {
            1.0
        }
    }

    /// `min_k (value_k − t_k) / s_k`.
    pub fn min_normalized_slack(&self, coefficients: &[Complex64], targets: &[f64]) -> f64 {
        (0..self.len())
            .map(|k| (self.value(k, coefficients) - targets[k]) / self.normalizer(k))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Prices `ρ_k` with per-constraint base steps; the step at iteration `t` is
/// `base_k / √t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PricingState {
    pub prices: Vec<f64>,
    pub base_steps: Vec<f64>,
    pub iteration: usize,
}

impl PricingState {
    pub fn new(prices: Vec<f64>, base_steps: Vec<f64>) -> Self {
        Self {
            prices,
            base_steps,
            iteration: 0,
        }
    }

    /// `ρ_k = 1/s_k` and `base_k = 1/s_k²`: unit price and unit step on the
    /// constraints divided by `s_k`.
    pub fn initial(surrogate: &Surrogate) -> Self {
        let mut prices = Vec::with_capacity(surrogate.len());
        let mut steps = Vec::with_capacity(surrogate.len());
        for k in 0..surrogate.len() {
            let s = surrogate.scale(k);
            if s > 0.0 {
                prices.push(1.0 / s);
                steps.push(1.0 / (s * s));
            } else {
                prices.push(0.0);
                steps.push(0.0);
            }
        }
        Self::new(prices, steps)
    }

    /// One projected sub-gradient step, `ρ ← [ρ − τ·residual]⁺`.
    pub fn update(&mut self, residuals: &[f64]) {
        self.iteration += 1;
        let decay = (self.iteration as f64).sqrt();
        for ((rho, base), r) in self.prices.iter_mut().zip(&self.base_steps).zip(residuals) {
            *rho = (*rho - base / decay * r).max(0.0);
        }
    }
}

/// Applies [`PricingState::update`] to the residuals of the surrogate
/// constraints at `phases`.
pub fn price_update(state: &PricingState, surrogate: &Surrogate, phases: &PhaseVector, targets: &[f64]) -> PricingState {
    let coeffs = phases.coefficients();
    let residuals: Vec<f64> = (0..surrogate.len())
        .map(|k| surrogate.value(k, &coeffs) - targets[k])
        .collect();
    let mut next = state.clone();
    next.update(&residuals);
    next
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseUpdate {
    pub phases: PhaseVector,
    /// Every price was zero, so the penalty does not depend on `φ` and the
    /// anchor is returned unchanged.
    pub all_prices_zero: bool,
}

/// Maximizer of `Σ_k ρ_k (2 Re{Θ_k φ} − Ψ_k − t_k)` over unit-modulus `φ`:
/// each element is rotated to cancel the phase of `Σ_k 2ρ_k Θ_{k,n}`.
pub fn penalized_phase_update(surrogate: &Surrogate, prices: &[f64]) -> PhaseUpdate {
    let n = surrogate.anchor.len();
    let anchor = surrogate.anchor.angles();
    if prices.iter().all(|&p| p <= 0.0) {
        return PhaseUpdate {
            phases: surrogate.anchor.clone(),
            all_prices_zero: true,
        };
    }
    let mut combined = vec![Complex64::new(0.0, 0.0); n];
    for (k, &rho) in prices.iter().enumerate() {
        if rho > 0.0 {
            for (c, t) in combined.iter_mut().zip(&surrogate.theta[k]) {
                *c += 2.0 * rho * t;
            }
        }
    }
    let angles = combined
        .iter()
        .zip(anchor)
        .map(|(c, &a)| if *c == Complex64::new(0.0, 0.0) { a } else { -c.arg() });
    PhaseUpdate {
        phases: PhaseVector::from_angles(angles),
        all_prices_zero: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Converged,
    Unconverged,
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgdConfig {
    /// Stop once consecutive phase vectors differ by at most this much.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Iterations without improvement in the best slack before an
    /// infeasible run is abandoned.
    pub patience: usize,
}

impl Default for SgdConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iters: 500,
            patience: 100,
        }
    }
}

/// Relative slack used when deciding whether a constraint holds.
pub const FEASIBILITY_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct SgdOutcome {
    pub phases: PhaseVector,
    pub status: SolveStatus,
    pub iterations: usize,
    /// `min_k (value_k − t_k)/s_k` at the returned phases.
    pub min_slack: f64,
    pub prices: PricingState,
}

fn violates(surrogate: &Surrogate, coeffs: &[Complex64], targets: &[f64]) -> bool {
    let slack = FEASIBILITY_SLACK * targets.iter().cloned().fold(0.0, f64::max);
    (0..surrogate.len()).any(|k| surrogate.value(k, coeffs) < targets[k] - slack)
}

/// Alternates the priced phase step and the price step until the phases
/// settle. Returns the iterate with the largest normalized slack seen, the
/// anchor included.
pub fn sgd_solve(surrogate: &Surrogate, targets: &[f64], init: PricingState, config: &SgdConfig) -> Result<SgdOutcome> {
    if targets.len() != surrogate.len() || init.prices.len() != surrogate.len() {
        return Err(Error::Domain(format!(
            "{} constraints, {} targets, {} prices",
            surrogate.len(),
            targets.len(),
            init.prices.len()
        )));
    }
    if !(config.tolerance > 0.0) {
        return Err(Error::Domain("SGD tolerance must be positive".into()));
    }

    let anchor = surrogate.anchor.clone();
    let anchor_coeffs = anchor.coefficients();
    let mut best = (surrogate.min_normalized_slack(&anchor_coeffs, targets), anchor.clone());

    // A target above the bound's maximum can never be met.
    let slack = FEASIBILITY_SLACK * targets.iter().cloned().fold(0.0, f64::max);
    if (0..surrogate.len()).any(|k| targets[k] > surrogate.max_value(k) + slack) {
        return Ok(SgdOutcome {
            phases: best.1,
            status: SolveStatus::Infeasible,
            iterations: 0,
            min_slack: best.0,
            prices: init,
        });
    }

    let mut state = init;
    let mut prev = anchor;
    let mut iterations = 0;
    let mut stationary = false;
    let mut since_improvement = 0;
    let mut residuals = vec![0.0; surrogate.len()];

    while iterations < config.max_iters {
        iterations += 1;
        let update = penalized_phase_update(surrogate, &state.prices);
        let phases = if update.all_prices_zero { prev.clone() } else { update.phases };
        let coeffs = phases.coefficients();
        for (k, r) in residuals.iter_mut().enumerate() {
            *r = surrogate.value(k, &coeffs) - targets[k];
        }
        let current = surrogate.min_normalized_slack(&coeffs, targets);
        if current > best.0 {
            best = (current, phases.clone());
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        state.update(&residuals);

        stationary = phases.distance(&prev) <= config.tolerance;
        prev = phases;
        if stationary {
            let feasible = !violates(surrogate, &best.1.coefficients(), targets);
            if feasible || since_improvement >= config.patience {
                break;
            }
        }
    }

    let feasible = !violates(surrogate, &best.1.coefficients(), targets);
    let status = if feasible {
        if stationary {
            SolveStatus::Converged
        } else {
            SolveStatus::Unconverged
        }
    } else if stationary {
        SolveStatus::Infeasible
    } else {
        SolveStatus::Unconverged
    };
    Ok(SgdOutcome {
        phases: best.1,
        status,
        iterations,
        min_slack: best.0,
        prices: state,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaConfig {
    pub tolerance: f64,
    pub max_outer: usize,
    pub sgd: SgdConfig,
}

impl Default for ScaConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_outer: 50,
            sgd: SgdConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaOutcome {
    pub phases: PhaseVector,
    pub status: SolveStatus,
    pub outer_iterations: usize,
    pub sgd_iterations: usize,
    /// `min_k (|e_k·φ|² − t_k)/s_k` at the starting anchor and after every
    /// outer iteration.
    pub slack_trace: Vec<f64>,
}

/// Normalized true slack `min_k (|e_k·φ|² − t_k)/s_k`.
pub fn min_true_slack(vectors: &[EffectiveVector], targets: &[f64], phases: &PhaseVector) -> f64 {
    let coeffs = phases.coefficients();
    vectors
        .iter()
        .zip(targets)
        .map(|(e, t)| {
            let s = e.peak_power();
            (e.apply(&coeffs).norm_sqr() - t) / if s > 0.0 { s } else { 1.0 }
        })
        .fold(f64::INFINITY, f64::min)
}

/// Successive lower-bound maximization: re-anchor the surrogate at the
/// latest phases until they stop moving.
pub fn sca_phase_optimize(
    vectors: &[EffectiveVector],
    targets: &[f64],
    anchor: &PhaseVector,
    config: &ScaConfig,
) -> Result<ScaOutcome> {
    let mut anchor = anchor.clone();
    let mut slack_trace = vec![min_true_slack(vectors, targets, &anchor)];
    let mut sgd_iterations = 0;
    let mut outer = 0;
    let mut last_status = SolveStatus::Converged;
    let mut settled = false;

    if vectors.is_empty() {
        return Ok(ScaOutcome {
            phases: anchor,
            status: SolveStatus::Converged,
            outer_iterations: 0,
            sgd_iterations: 0,
            slack_trace,
        });
    }

    while outer < config.max_outer {
        outer += 1;
        let sur = surrogate(vectors, &anchor)?;
        let out = sgd_solve(&sur, targets, PricingState::initial(&sur), &config.sgd)?;
        sgd_iterations += out.iterations;
        last_status = out.status;
        let step = out.phases.distance(&anchor);
        anchor = out.phases;
        slack_trace.push(min_true_slack(vectors, targets, &anchor));
        if step <= config.tolerance {
            settled = true;
            break;
        }
    }

    let slack = FEASIBILITY_SLACK * targets.iter().cloned().fold(0.0, f64::max);
    let coeffs = anchor.coefficients();
    let feasible = vectors
        .iter()
        .zip(targets)
        .all(|(e, t)| e.apply(&coeffs).norm_sqr() >= t - slack);
    let status = match (feasible, settled) {
        (false, _) => SolveStatus::Infeasible,
        (true, true) if last_status != SolveStatus::Unconverged => SolveStatus::Converged,
        _ => SolveStatus::Unconverged,
    };
    Ok(ScaOutcome {
        phases: anchor,
        status,
        outer_iterations: outer,
        sgd_iterations,
        slack_trace,
    })
}
