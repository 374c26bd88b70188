//! Placement grid search wrapped around alternating allocation and phase
//! optimization, plus the three reference baselines.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::{allocate_fixed, solve_allocation, Allocation, Assignment};
use crate::channel::{reflected_channel, subband_rate, Medium, SubBand};
use crate::error::{Error, Result};
use crate::geometry::{
    optimal_single_ue_phases, solve_min_total_distance, IrsPlacement, PhaseVector, PlacementBounds, Scene,
};
use crate::phase_opt::{effective_vector, sca_phase_optimize, ScaConfig, SgdConfig};
use crate::rng::SplitMix64;

/// Everything that stays fixed while the IRS is being planned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub scene: Scene,
    pub bands: Vec<SubBand>,
    pub medium: Medium,
    pub element_count: usize,
    pub spacing_m: f64,
    pub p_max_w: f64,
    /// Minimum rate per UE, bits/s.
    pub requirements: Vec<f64>,
}

impl Instance {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        if self.bands.is_empty() {
            return Err(Error::Domain("no sub-bands".into()));
        }
        for b in &self.bands {
            b.validate()?;
        }
        if self.requirements.len() != self.scene.ue_count() {
            return Err(Error::Domain(format!(
                "{} rate requirements for {} UEs",
                self.requirements.len(),
                self.scene.ue_count()
            )));
        }
        if !(self.p_max_w > 0.0 && self.p_max_w.is_finite()) {
            return Err(Error::Domain(format!("p_max must be positive, got {}", self.p_max_w)));
        }
        IrsPlacement::new(self.element_count, self.spacing_m, 0.0, 0.0)?;
        self.bounds()?;
        Ok(())
    }

    pub fn bounds(&self) -> Result<PlacementBounds> {
        PlacementBounds::for_array(&self.scene, self.element_count, self.spacing_m)
    }

    pub fn placement(&self, x: f64, y: f64) -> Result<IrsPlacement> {
        IrsPlacement::new(self.element_count, self.spacing_m, x, y)
    }

    /// `|h_{u,i}|²` for every UE and sub-band.
    pub fn channel_gains(&self, placement: &IrsPlacement, phases: &PhaseVector) -> Result<Vec<Vec<f64>>> {
        (0..self.scene.ue_count())
            .map(|u| {
                self.bands
                    .iter()
                    .map(|b| Ok(reflected_channel(&self.medium, b, placement, phases, &self.scene, u)?.norm_sqr()))
                    .collect()
            })
            .collect()
    }

    /// Middle of the span of sub-band centers.
    pub fn center_frequency(&self) -> f64 {
        let lo = self.bands.iter().map(|b| b.center_hz).fold(f64::INFINITY, f64::min);
        let hi = self.bands.iter().map(|b| b.center_hz).fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Grid of cell centers `((k-½)δx, (m-½)δy)` inside the placement box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dx_m: f64,
    pub dy_m: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { dx_m: 0.25, dy_m: 0.25 }
    }
}

fn cells(extent: f64, step: f64) -> usize {
    // Tolerate rounding in exact multiples such as 5 / 0.25.
    ((extent / step) * (1.0 + 1e-12)).floor() as usize
}

impl GridSpec {
    pub fn new(dx_m: f64, dy_m: f64) -> Result<Self> {
        let g = Self { dx_m, dy_m };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dx_m > 0.0 && self.dy_m > 0.0 && self.dx_m.is_finite() && self.dy_m.is_finite()) {
            return Err(Error::Domain(format!(
                "grid steps must be positive, got ({}, {})",
                self.dx_m, self.dy_m
            )));
        }
        Ok(())
    }

    /// Cell counts along X and Y.
    pub fn shape(&self, bounds: &PlacementBounds) -> (usize, usize) {
        (
            cells(bounds.x_max - bounds.x_min, self.dx_m),
            cells(bounds.y_max - bounds.y_min, self.dy_m),
        )
    }

    pub fn count(&self, bounds: &PlacementBounds) -> usize {
        let (nx, ny) = self.shape(bounds);
        nx * ny
    }

    /// Points in X-major order.
    pub fn points(&self, bounds: &PlacementBounds) -> Result<Vec<[f64; 2]>> {
        self.validate()?;
        let (nx, ny) = self.shape(bounds);
        if nx == 0 || ny == 0 {
            return Err(Error::Domain(format!(
                "grid ({}, {}) has no points in the placement box",
                self.dx_m, self.dy_m
            )));
        }
        let mut out = Vec::with_capacity(nx * ny);
        for k in 0..nx {
            for m in 0..ny {
                out.push([
                    bounds.x_min + (k as f64 + 0.5) * self.dx_m,
                    bounds.y_min + (m as f64 + 0.5) * self.dy_m,
                ]);
            }
        }
        Ok(out)
    }

    /// Nearest grid point to `p`.
    pub fn snap(&self, bounds: &PlacementBounds, p: [f64; 2]) -> Result<[f64; 2]> {
        let (nx, ny) = self.shape(bounds);
        if nx == 0 || ny == 0 {
            return Err(Error::Domain("empty grid".into()));
        }
        let index = |v: f64, lo: f64, step: f64, n: usize| ((v - lo) / step - 0.5).round().clamp(0.0, (n - 1) as f64);
        let k = index(p[0], bounds.x_min, self.dx_m, nx);
        let m = index(p[1], bounds.y_min, self.dy_m, ny);
        Ok([
            bounds.x_min + (k + 0.5) * self.dx_m,
            bounds.y_min + (m + 0.5) * self.dy_m,
        ])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InnerConfig {
    /// Relative change in sum rate at which the alternation stops.
    pub sigma: f64,
    pub max_rounds: usize,
    pub allocation_tolerance: f64,
    pub sca: ScaConfig,
}

impl Default for InnerConfig {
    fn default() -> Self {
        Self {
            sigma: 1e-3,
            max_rounds: 20,
            allocation_tolerance: 1e-4,
            sca: ScaConfig {
                tolerance: 1e-4,
                max_outer: 10,
                sgd: SgdConfig {
                    tolerance: 1e-4,
                    max_iters: 200,
                    patience: 50,
                },
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub placement: IrsPlacement,
    pub phases: PhaseVector,
    pub assignment: Assignment,
    pub ue_rates: Vec<f64>,
    /// Zero whenever `feasible` is false.
    pub sum_rate: f64,
    pub feasible: bool,
    pub converged: bool,
    /// Sum rate after every round, starting from the initial phases; zero
    /// marks a round whose allocation missed a rate requirement.
    pub trace: Vec<f64>,
    pub grid_points: usize,
    pub infeasible_points: usize,
    pub unconverged_points: usize,
}

impl Solution {
    /// Recomputes rates from the stored decision and checks every
    /// constraint: one owner per band, the power budget, unit-modulus
    /// phases, the placement box, and the rate requirements when flagged
    /// feasible.
    pub fn check(&self, instance: &Instance) -> Result<()> {
        let fail = |m: String| Err(Error::Domain(m));
        let a = &self.assignment;
        if a.ue_count != instance.scene.ue_count() || a.owner.len() != instance.bands.len() {
            return fail("assignment shape does not match the instance".into());
        }
        a.validate(instance.p_max_w)?;
        if self.phases.len() != instance.element_count
            || self.phases.angles().iter().any(|p| !p.is_finite())
        {
            return fail("phase vector malformed".into());
        }
        if self.placement.element_count != instance.element_count {
            return fail("placement element count mismatch".into());
        }
        self.placement.validate_in(&instance.scene)?;
        let gains = instance.channel_gains(&self.placement, &self.phases)?;
        let rates = ue_rates(instance, a, &gains)?;
        for (u, (r, stored)) in rates.iter().zip(&self.ue_rates).enumerate() {
            if (r - stored).abs() > 1e-6 * r.abs().max(1.0) {
                return fail(format!("UE {u} rate {stored} does not match recomputed {r}"));
            }
        }
        let total: f64 = rates.iter().sum();
        if self.feasible {
            if (total - self.sum_rate).abs() > 1e-6 * total.max(1.0) {
                return fail(format!("sum rate {} does not match recomputed {total}", self.sum_rate));
            }
            for (u, (r, t)) in rates.iter().zip(&instance.requirements).enumerate() {
                if *r < t * (1.0 - 1e-6) {
                    return fail(format!("UE {u} rate {r} below requirement {t}"));
                }
            }
        } else if self.sum_rate != 0.0 {
            return fail("infeasible solution must carry the zero sentinel".into());
        }
        Ok(())
    }
}

fn ue_rates(instance: &Instance, a: &Assignment, gains: &[Vec<f64>]) -> Result<Vec<f64>> {
    let mut rates = vec![0.0; instance.scene.ue_count()];
    for (i, band) in instance.bands.iter().enumerate() {
        let u = a.owner[i];
        rates[u] += subband_rate(band, a.power_w[i], gains[u][i])?;
    }
    Ok(rates)
}

/// Matched phases for one UE at one sub-band center, choosing the pair
/// whose phases give the best initial allocation.
pub fn initial_phases(instance: &Instance, placement: &IrsPlacement) -> Result<PhaseVector> {
    let mut best: Option<(Allocation, PhaseVector)> = None;
    for u in 0..instance.scene.ue_count() {
        for band in &instance.bands {
            let phases = optimal_single_ue_phases(band.center_hz, placement, &instance.scene, u)?;
            let gains = instance.channel_gains(placement, &phases)?;
            let alloc = solve_allocation(
                &gains,
                &instance.bands,
                instance.p_max_w,
                &instance.requirements,
                INITIAL_ALLOCATION_TOLERANCE,
            )?;
            if best.as_ref().map_or(true, |(b, _)| alloc.better_than(b)) {
                best = Some((alloc, phases));
            }
        }
    }
    Ok(best.expect("instance has UEs and bands").1)
}

const INITIAL_ALLOCATION_TOLERANCE: f64 = 1e-3;

fn sentinel(alloc: &Allocation) -> f64 {
    if alloc.feasible {
        alloc.sum_rate
    } else {
        0.0
    }
}

/// Phases that raise every active link's gain together, starting from
/// `phases` with the current values as floors.
fn phase_stage(
    instance: &Instance,
    placement: &IrsPlacement,
    assignment: &Assignment,
    phases: &PhaseVector,
    config: &ScaConfig,
) -> Result<PhaseVector> {
    let mut vectors = Vec::new();
    for (i, band) in instance.bands.iter().enumerate() {
        let p = assignment.power_w[i];
        if p > 0.0 {
            vectors.push(effective_vector(
                &instance.medium,
                band,
                p,
                placement,
                &instance.scene,
                assignment.owner[i],
            )?);
        }
    }
    if vectors.is_empty() {
        return Ok(phases.clone());
    }
    let targets: Vec<f64> = vectors.iter().map(|e| e.power(phases)).collect();
    let out = sca_phase_optimize(&vectors, &targets, phases, config)?;
    // The outer loop only keeps iterates whose normalized slack did not
    // drop, so no active gain falls below its floor beyond rounding.
    let kept = vectors
        .iter()
        .zip(&targets)
        .all(|(e, t)| e.power(&out.phases) >= *t);
    Ok(if kept { out.phases } else { phases.clone() })
}

fn build_solution(
    placement: IrsPlacement,
    phases: PhaseVector,
    alloc: Allocation,
    trace: Vec<f64>,
    converged: bool,
) -> Solution {
    let feasible = alloc.feasible;
    Solution {
        placement,
        phases,
        sum_rate: if feasible { alloc.sum_rate } else { 0.0 },
        ue_rates: alloc.ue_rates,
        assignment: alloc.assignment,
        feasible,
        converged,
        trace,
        grid_points: 1,
        infeasible_points: usize::from(!feasible),
        unconverged_points: usize::from(!converged),
    }
}

/// Alternates allocation and phase design at a fixed placement until the
/// sum rate settles.
pub fn inner_solve(
    instance: &Instance,
    placement: &IrsPlacement,
    init_phases: &PhaseVector,
    config: &InnerConfig,
) -> Result<Solution> {
    if init_phases.len() != instance.element_count {
        return Err(Error::Domain("initial phases do not match the element count".into()));
    }
    let solve = |gains: &[Vec<f64>], incumbent: Option<&Assignment>| -> Result<Allocation> {
        let mut alloc = solve_allocation(
            gains,
            &instance.bands,
            instance.p_max_w,
            &instance.requirements,
            config.allocation_tolerance,
        )?;
        if let Some(prev) = incumbent {
            let kept = allocate_fixed(&prev.owner, gains, &instance.bands, instance.p_max_w, &instance.requirements)?;
            if kept.better_than(&alloc) {
                alloc = kept;
            }
        }
        Ok(alloc)
    };

    let mut phases = init_phases.clone();
    let mut gains = instance.channel_gains(placement, &phases)?;
    let mut alloc = solve(&gains, None)?;
    let mut trace = vec![sentinel(&alloc)];
    let mut converged = false;

    for _ in 0..config.max_rounds {
        phases = phase_stage(instance, placement, &alloc.assignment, &phases, &config.sca)?;
        gains = instance.channel_gains(placement, &phases)?;
        // Same allocation under the new phases.
        alloc = allocate_fixed(
            &alloc.assignment.owner,
            &gains,
            &instance.bands,
            instance.p_max_w,
            &instance.requirements,
        )?;
        let current = sentinel(&alloc);
        let previous = *trace.last().expect("trace is never empty");
        trace.push(current);
        if (current - previous).abs() <= config.sigma * current.abs() {
            converged = true;
            break;
        }
        let next = solve(&gains, Some(&alloc.assignment))?;
        if next.better_than(&alloc) {
            alloc = next;
        }
    }

    Ok(build_solution(*placement, phases, alloc, trace, converged))
}

/// Worker pool honoring `PLAN_THREADS`.
pub fn worker_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = std::env::var("PLAN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
            if n > 0 {
                builder = builder.num_threads(n);
            }
        }
        builder.build().expect("thread pool")
    })
}

/// Picks the best solution in grid order; earlier points win ties.
fn reduce(mut solutions: Vec<Solution>) -> Result<Solution> {
    let points = solutions.len();
    let infeasible = solutions.iter().filter(|s| !s.feasible).count();
    let unconverged = solutions.iter().filter(|s| !s.converged).count();
    let mut best = 0;
    for (k, s) in solutions.iter().enumerate() {
        let b = &solutions[best];
        let wins = match (s.feasible, b.feasible) {
            (true, false) => true,
            (true, true) => s.sum_rate > b.sum_rate,
            _ => false,
        };
        if wins {
            best = k;
        }
    }
    let mut out = solutions.swap_remove(best);
    out.grid_points = points;
    out.infeasible_points = infeasible;
    out.unconverged_points = unconverged;
    Ok(out)
}

fn grid_search<F>(instance: &Instance, grid: &GridSpec, evaluate: F) -> Result<Solution>
where
    F: Fn(&IrsPlacement) -> Result<Solution> + Sync,
{
    instance.validate()?;
    let bounds = instance.bounds()?;
    let points = grid.points(&bounds)?;
    let solutions: Result<Vec<Solution>> = worker_pool().install(|| {
        points
            .par_iter()
            .map(|p| evaluate(&instance.placement(p[0], p[1])?))
            .collect()
    });
    reduce(solutions?)
}

/// Runs [`inner_solve`] at every grid point and keeps the best.
pub fn bcs_solve(instance: &Instance, grid: &GridSpec, config: &InnerConfig) -> Result<Solution> {
    grid_search(instance, grid, |placement| {
        inner_solve(instance, placement, &initial_phases(instance, placement)?, config)
    })
}

/// Placement at the grid point nearest the summed-distance minimizer.
pub fn baseline_mini_dis(instance: &Instance, grid: &GridSpec, config: &InnerConfig) -> Result<Solution> {
    instance.validate()?;
    let bounds = instance.bounds()?;
    let min = solve_min_total_distance(&instance.scene, &bounds, 1e-8)?;
    let p = grid.snap(&bounds, [min.x, min.y])?;
    let placement = instance.placement(p[0], p[1])?;
    inner_solve(instance, &placement, &initial_phases(instance, &placement)?, config)
}

/// Uniformly random placement in the box.
pub fn baseline_ran_loc(instance: &Instance, config: &InnerConfig, rng: &mut SplitMix64) -> Result<Solution> {
    instance.validate()?;
    let b = instance.bounds()?;
    let x = rng.uniform(b.x_min, b.x_max);
    let y = rng.uniform(b.y_min, b.y_max);
    let placement = instance.placement(x, y)?;
    inner_solve(instance, &placement, &initial_phases(instance, &placement)?, config)
}

/// Grid search with one uniformly random phase vector held fixed.
pub fn baseline_ran_phi(
    instance: &Instance,
    grid: &GridSpec,
    config: &InnerConfig,
    rng: &mut SplitMix64,
) -> Result<Solution> {
    let phases = PhaseVector::from_angles((0..instance.element_count).map(|_| rng.uniform(0.0, std::f64::consts::TAU)));
    grid_search(instance, grid, |placement| {
        let gains = instance.channel_gains(placement, &phases)?;
        let alloc = solve_allocation(
            &gains,
            &instance.bands,
            instance.p_max_w,
            &instance.requirements,
            config.allocation_tolerance,
        )?;
        let trace = vec![sentinel(&alloc)];
        Ok(build_solution(*placement, phases.clone(), alloc, trace, true))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{path_length, solve_single_ue_placement, Point3};

    fn instance(ues: Vec<Point3>, n: usize, bands: Vec<SubBand>) -> Instance {
        let u = ues.len();
        Instance {
            scene: Scene::new(8.0, 5.0, 3.0, Point3::new(0.0, 0.0, 2.0), ues).unwrap(),
            bands,
            medium: Medium::default(),
            element_count: n,
            spacing_m: 0.005,
            p_max_w: 1.0,
            requirements: vec![1e9; u],
        }
    }

    fn four_bands() -> Vec<SubBand> {
        [200e9, 250e9, 300e9, 350e9]
            .iter()
            .map(|&f| SubBand::with_noise_figure(f, 50e9, 10.0).unwrap())
            .collect()
    }

    #[test]
    fn grid_counts_and_interior_points() {
        let inst = instance(vec![Point3::new(2.0, 3.0, 1.0)], 20, four_bands());
        let b = inst.bounds().unwrap();
        let g = GridSpec::default();
        assert_eq!(g.shape(&b), (20, 31));
        let pts = g.points(&b).unwrap();
        assert_eq!(pts.len(), 20 * 31);
        assert!(pts.iter().all(|p| p[0] > 0.0 && p[0] < 5.0 && p[1] > 0.0 && p[1] < b.y_max));
        assert!(GridSpec::new(10.0, 10.0).unwrap().points(&b).is_err());
        assert!(GridSpec::new(0.0, 1.0).is_err());
        assert_eq!(g.snap(&b, [0.0, 100.0]).unwrap(), [0.125, 0.125 + 30.0 * 0.25]);
    }

    #[test]
    fn single_ue_single_band_matches_closed_form() {
        let band = SubBand::with_noise_figure(300e9, 50e9, 10.0).unwrap();
        let inst = instance(vec![Point3::new(3.0, 5.0, 1.0)], 8, vec![band]);
        let placement = inst.placement(1.5, 2.5).unwrap();
        let init = initial_phases(&inst, &placement).unwrap();
        let s = inner_solve(&inst, &placement, &init, &InnerConfig::default()).unwrap();
        let g = inst.medium.cascaded_gain(300e9, path_length(&placement, &inst.scene, 0).unwrap()).unwrap();
        let closed = subband_rate(&band, 1.0, 64.0 * g.norm_sqr()).unwrap();
        assert!((s.sum_rate / closed - 1.0).abs() < 1e-9, "{} vs {}", s.sum_rate, closed);
        s.check(&inst).unwrap();
    }

    #[test]
    fn huge_sigma_stops_after_one_sweep() {
        let inst = instance(vec![Point3::new(3.0, 5.0, 1.0), Point3::new(1.0, 1.0, 1.0)], 4, four_bands());
        let placement = inst.placement(2.0, 3.0).unwrap();
        let config = InnerConfig { sigma: 1e9, ..InnerConfig::default() };
        let s = inner_solve(&inst, &placement, &PhaseVector::zeros(4), &config).unwrap();
        assert_eq!(s.trace.len(), 2);
        s.check(&inst).unwrap();
    }

    #[test]
    fn two_ue_trace_is_monotone() {
        let mut rng = SplitMix64::new(11);
        for _ in 0..3 {
            let ues = (0..2)
                .map(|_| Point3::new(rng.uniform(0.0, 5.0), rng.uniform(0.0, 8.0), 1.0))
                .collect();
            let inst = instance(ues, 8, four_bands());
            let placement = inst.placement(rng.uniform(0.0, 5.0), rng.uniform(0.0, 7.9)).unwrap();
            let s = inner_solve(&inst, &placement, &initial_phases(&inst, &placement).unwrap(), &InnerConfig::default())
                .unwrap();
            for w in s.trace.windows(2) {
                assert!(w[1] >= w[0] * (1.0 - 1e-9), "{:?}", s.trace);
            }
            s.check(&inst).unwrap();
        }
    }

    #[test]
    fn single_ue_grid_optimum_near_distance_optimum() {
        let band = SubBand::with_noise_figure(300e9, 50e9, 10.0).unwrap();
        let inst = instance(vec![Point3::new(4.0, 6.0, 1.0)], 1, vec![band]);
        let grid = GridSpec::new(0.25, 0.25).unwrap();
        let s = bcs_solve(&inst, &grid, &InnerConfig::default()).unwrap();
        let bounds = inst.bounds().unwrap();
        let opt = solve_single_ue_placement(&inst.scene, &bounds, 0, 1e-10).unwrap();
        assert!((s.placement.x - opt.x).abs() <= 0.25 && (s.placement.y - opt.y).abs() <= 0.25);
        assert_eq!(s.grid_points, grid.count(&bounds));
        s.check(&inst).unwrap();
    }

    #[test]
    fn one_cell_grid_reduces_to_inner_solve() {
        let inst = instance(vec![Point3::new(3.0, 5.0, 1.0)], 4, four_bands());
        let grid = GridSpec::new(5.0, 7.985).unwrap();
        let s = bcs_solve(&inst, &grid, &InnerConfig::default()).unwrap();
        let placement = inst.placement(2.5, 0.5 * 7.985).unwrap();
        let direct =
            inner_solve(&inst, &placement, &initial_phases(&inst, &placement).unwrap(), &InnerConfig::default()).unwrap();
        assert_eq!(s.grid_points, 1);
        assert_eq!(s.sum_rate, direct.sum_rate);
    }

    #[test]
    fn finer_grid_never_worse() {
        let band = SubBand::with_noise_figure(250e9, 50e9, 10.0).unwrap();
        let inst = instance(vec![Point3::new(1.0, 6.0, 1.0), Point3::new(4.0, 2.0, 1.0)], 2, vec![band, band]);
        let coarse = bcs_solve(&inst, &GridSpec::new(1.0, 2.0).unwrap(), &InnerConfig::default()).unwrap();
        let fine = bcs_solve(&inst, &GridSpec::new(1.0 / 3.0, 2.0 / 3.0).unwrap(), &InnerConfig::default()).unwrap();
        assert!(fine.sum_rate >= coarse.sum_rate);
    }

    #[test]
    fn baselines_are_dominated() {
        let inst = instance(vec![Point3::new(1.0, 6.0, 1.0), Point3::new(4.0, 2.0, 1.0)], 4, four_bands());
        let grid = GridSpec::new(0.5, 0.5).unwrap();
        let config = InnerConfig::default();
        let best = bcs_solve(&inst, &grid, &config).unwrap();
        let mini = baseline_mini_dis(&inst, &grid, &config).unwrap();
        let phi = baseline_ran_phi(&inst, &grid, &config, &mut SplitMix64::new(1)).unwrap();
        assert!(best.sum_rate >= mini.sum_rate);
        assert!(best.sum_rate >= phi.sum_rate);
        for s in [&best, &mini, &phi] {
            s.check(&inst).unwrap();
        }
    }

    #[test]
    fn ran_phi_with_one_element_matches_bcs() {
        let inst = instance(vec![Point3::new(1.0, 6.0, 1.0)], 1, four_bands());
        let grid = GridSpec::new(1.0, 1.0).unwrap();
        let config = InnerConfig::default();
        let best = bcs_solve(&inst, &grid, &config).unwrap();
        let phi = baseline_ran_phi(&inst, &grid, &config, &mut SplitMix64::new(3)).unwrap();
        assert!((best.sum_rate / phi.sum_rate - 1.0).abs() < 1e-9);
    }

    #[test]
    fn impossible_requirements_flag_infeasible() {
        let mut inst = instance(vec![Point3::new(1.0, 6.0, 1.0)], 2, four_bands());
        inst.requirements = vec![1e15];
        let s = bcs_solve(&inst, &GridSpec::new(1.0, 2.0).unwrap(), &InnerConfig::default()).unwrap();
        assert!(!s.feasible);
        assert_eq!(s.sum_rate, 0.0);
        assert_eq!(s.infeasible_points, s.grid_points);
        s.check(&inst).unwrap();
    }
}
