//! Sub-band assignment and power control.
//!
//! Each sub-band goes to exactly one UE, the AP power budget is shared
//! across sub-bands, and every UE has a minimum rate. For fixed multipliers
//! the Lagrangian splits per sub-band: each candidate UE gets its
//! water-filling power and the band goes to the UE with the largest net
//! benefit. The multipliers follow projected sub-gradient steps.
//!
//! Binary recovery leaves a duality gap, so every distinct assignment the
//! dual iterations visit is re-solved exactly for its power (a multi-level
//! water-filling in which each UE's level is raised until its rate
//! requirement holds). Small instances then try every assignment that gives
//! each UE with a requirement at least one band; larger ones run a local
//! search over single-band moves and pairwise swaps from the best one.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::{rate, SubBand};
use crate::error::{Error, Result};

/// Relative slack on rate requirements when judging feasibility.
pub const RATE_SLACK: f64 = 1e-9;

/// Binary band ownership with per-band power and auxiliaries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub ue_count: usize,
    /// Owning UE of each sub-band.
    pub owner: Vec<usize>,
    pub power_w: Vec<f64>,
    /// `t[u][i]`, zero wherever `u` does not own band `i`.
    pub auxiliary: Vec<Vec<f64>>,
}

impl Assignment {
    pub fn band_count(&self) -> usize {
        self.owner.len()
    }

    pub fn alpha(&self) -> Vec<Vec<bool>> {
        (0..self.ue_count)
            .map(|u| self.owner.iter().map(|&o| o == u).collect())
            .collect()
    }

    pub fn total_power(&self) -> f64 {
        self.power_w.iter().sum()
    }

    /// Checks band ownership and the power budget.
    pub fn validate(&self, p_max: f64) -> Result<()> {
        if self.power_w.len() != self.owner.len() {
            return Err(Error::Domain("power and owner lengths differ".into()));
        }
        if let Some(&o) = self.owner.iter().find(|&&o| o >= self.ue_count) {
            return Err(Error::Domain(format!("band owner {o} out of range")));
        }
        if self.power_w.iter().any(|p| !(*p >= 0.0 && p.is_finite())) {
            return Err(Error::Domain("negative or non-finite band power".into()));
        }
        let total = self.total_power();
        if total > p_max + 1e-9 {
            return Err(Error::Domain(format!("total power {total} exceeds budget {p_max}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    /// Price of power, in rate per watt.
    pub lambda: f64,
    /// Per-UE rate multipliers.
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub assignment: Assignment,
    pub duals: DualState,
    pub ue_rates: Vec<f64>,
    pub sum_rate: f64,
    pub feasible: bool,
    /// `min_u R_u / R_u^th` over UEs with a requirement, capped at one.
    pub attainment: f64,
    pub dual_iterations: usize,
}

impl Allocation {
    /// Feasible beats infeasible; then higher sum rate, or for infeasible
    /// results higher attainment first.
    pub fn better_than(&self, other: &Allocation) -> bool {
        match (self.feasible, other.feasible) {
            (true, false) => true,
            (false, true) => false,
            (true, true) => self.sum_rate > other.sum_rate,
            (false, false) => {
                self.attainment > other.attainment
                    || (self.attainment == other.attainment && self.sum_rate > other.sum_rate)
            }
        }
    }
}

/// `t_{u,i} = p_i |h_{u,i}|²` on owned bands, zero elsewhere.
pub fn tight_auxiliary(owner: &[usize], power_w: &[f64], gains: &[Vec<f64>]) -> Vec<Vec<f64>> {
    gains
        .iter()
        .enumerate()
        .map(|(u, row)| {
            owner
                .iter()
                .zip(power_w)
                .zip(row)
                .map(|((&o, &p), &g)| if o == u { p * g } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Validated instance with per-link SNR slopes `a_{u,i} = |h_{u,i}|² δ_i`.
struct Problem {
    gain: Vec<Vec<f64>>,
    slope: Vec<Vec<f64>>,
    bandwidth: Vec<f64>,
    p_max: f64,
    requirement: Vec<f64>,
}

impl Problem {
    fn new(gains: &[Vec<f64>], bands: &[SubBand], p_max: f64, requirement: &[f64]) -> Result<Self> {
        if gains.is_empty() || bands.is_empty() {
            return Err(Error::Domain("need at least one UE and one sub-band".into()));
        }
        if requirement.len() != gains.len() {
            return Err(Error::Domain(format!(
                "{} rate requirements for {} UEs",
                requirement.len(),
                gains.len()
            )));
        }
        if !(p_max > 0.0 && p_max.is_finite()) {
            return Err(Error::Domain(format!("p_max must be positive and finite, got {p_max}")));
        }
        for (u, row) in gains.iter().enumerate() {
            if row.len() != bands.len() {
                return Err(Error::Domain(format!("gain row {u} has {} entries", row.len())));
            }
            if row.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
                return Err(Error::Domain(format!("gain row {u} has a negative or non-finite entry")));
            }
        }
        if requirement.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
            return Err(Error::Domain("rate requirements must be finite and non-negative".into()));
        }
        for b in bands {
            b.validate()?;
        }
        let delta: Vec<f64> = bands.iter().map(SubBand::delta).collect();
        Ok(Self {
            gain: gains.to_vec(),
            slope: gains
                .iter()
                .map(|row| row.iter().zip(&delta).map(|(g, d)| g * d).collect())
                .collect(),
            bandwidth: bands.iter().map(|b| b.bandwidth_hz).collect(),
            p_max,
            requirement: requirement.to_vec(),
        })
    }

    fn ues(&self) -> usize {
        self.slope.len()
    }

    fn bands(&self) -> usize {
        self.bandwidth.len()
    }

    /// Water-filling power on band `i` for UE `u` at level `nu`.
    fn power(&self, u: usize, i: usize, nu: f64) -> f64 {
        let a = self.slope[u][i];
        if a <= 0.0 {
            return 0.0;
        }
        (nu * self.bandwidth[i] / LN_2 - 1.0 / a).max(0.0)
    }

    fn rate(&self, u: usize, i: usize, p: f64) -> f64 {
        rate(self.bandwidth[i], p * self.slope[u][i])
    }

    fn owned(&self, owner: &[usize], u: usize) -> Vec<usize> {
        (0..self.bands()).filter(|&i| owner[i] == u).collect()
    }

    #[cfg(test)]
    fn ue_rate_at(&self, u: usize, bands: &[usize], nu: f64) -> f64 {
        bands.iter().map(|&i| self.rate(u, i, self.power(u, i, nu))).sum()
    }

    fn ue_power_at(&self, u: usize, bands: &[usize], nu: f64) -> f64 {
        bands.iter().map(|&i| self.power(u, i, nu)).sum()
    }

    /// Smallest level giving UE `u` rate `target` on `bands`; infinite when
    /// none of them has a usable channel.
    fn level_for_rate(&self, u: usize, bands: &[usize], target: f64) -> f64 {
        if target <= 0.0 {
            return 0.0;
        }
        // Band i opens at level ln2 / (a_i B_i). With the k cheapest open,
        // the rate is S log2(nu) + C, so each piece inverts exactly.
        let mut open: Vec<(f64, usize)> = bands
            .iter()
            .filter(|&&i| self.slope[u][i] > 0.0)
            .map(|&i| (LN_2 / (self.slope[u][i] * self.bandwidth[i]), i))
            .collect();
        if open.is_empty() {
            return f64::INFINITY;
        }
        open.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut s, mut c) = (0.0, 0.0);
        for (k, &(threshold, i)) in open.iter().enumerate() {
            let b = self.bandwidth[i];
            s += b;
            c -= b * threshold.log2();
            let nu = ((target - c) / s).exp2();
            if k + 1 == open.len() || nu <= open[k + 1].0 {
                return nu.max(threshold);
            }
        }
        unreachable!("last piece always returns")
    }

    fn all_rates(&self, owner: &[usize], power: &[f64]) -> Vec<f64> {
        let mut rates = vec![0.0; self.ues()];
        for i in 0..self.bands() {
            rates[owner[i]] += self.rate(owner[i], i, power[i]);
        }
        rates
    }

    fn is_feasible(&self, rates: &[f64]) -> bool {
        rates
            .iter()
            .zip(&self.requirement)
            .all(|(r, t)| *r >= t * (1.0 - RATE_SLACK))
    }

    fn attainment(&self, rates: &[f64]) -> f64 {
        rates
            .iter()
            .zip(&self.requirement)
            .filter(|(_, t)| **t > 0.0)
            .map(|(r, t)| (r / t).min(1.0))
            .fold(1.0, f64::min)
    }

    /// Exact power solution for a fixed assignment. Each UE's level is
    /// floored at the one meeting its requirement; the common level `ν₀` is
    /// then raised until the budget is spent. When the floors alone overspend
    /// the budget, every requirement is scaled by the largest common fraction
    /// that fits.
    fn refine(&self, owner: &[usize]) -> (Vec<f64>, DualState) {
        let owned: Vec<Vec<usize>> = (0..self.ues()).map(|u| self.owned(owner, u)).collect();
        let floors_for = |fraction: f64| -> Vec<f64> {
            (0..self.ues())
                .map(|u| self.level_for_rate(u, &owned[u], fraction * self.requirement[u]))
                .collect()
        };
        let spend = |floors: &[f64], nu0: f64| -> f64 {
            (0..self.ues())
                .map(|u| self.ue_power_at(u, &owned[u], floors[u].max(nu0)))
                .sum()
        };

        let mut floors = floors_for(1.0);
        let fits = |f: &[f64]| f.iter().all(|x| x.is_finite()) && spend(f, 0.0) <= self.p_max;
        // A UE with a requirement but no usable band caps the fraction at zero.
        let stranded = (0..self.ues()).any(|u| self.requirement[u] > 0.0 && !floors[u].is_finite());
        if stranded {
            floors = vec![0.0; self.ues()];
        } else if !fits(&floors) {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if fits(&floors_for(mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            floors = floors_for(lo);
            if !fits(&floors) {
                floors = vec![0.0; self.ues()];
            }
        }

        let useful = (0..self.bands()).any(|i| self.slope[owner[i]][i] > 0.0);
        let mut nu0 = 0.0;
        if useful && spend(&floors, 0.0) < self.p_max {
            let mut hi = (0..self.bands())
                .filter(|&i| self.slope[owner[i]][i] > 0.0)
                .map(|i| LN_2 / (self.slope[owner[i]][i] * self.bandwidth[i]))
                .fold(f64::INFINITY, f64::min);
            while spend(&floors, hi) < self.p_max {
                hi *= 2.0;
            }
            let mut lo = 0.0;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if spend(&floors, mid) >= self.p_max {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            nu0 = hi;
        }

        let mut power: Vec<f64> = (0..self.bands())
            .map(|i| {
                let u = owner[i];
                self.power(u, i, floors[u].max(nu0))
            })
            .collect();
        let total: f64 = power.iter().sum();
        if total > self.p_max {
            let shrink = self.p_max / total;
            power.iter_mut().for_each(|p| *p *= shrink);
        }

        let duals = if nu0 > 0.0 {
            DualState {
                lambda: 1.0 / nu0,
                mu: floors.iter().map(|f| (f.max(nu0) / nu0 - 1.0).max(0.0)).collect(),
            }
        } else {
            DualState {
                lambda: 0.0,
                mu: vec![0.0; self.ues()],
            }
        };
        (power, duals)
    }

    /// Whether the requirement floors alone fit the budget.
    fn meets_requirements(&self, owner: &[usize]) -> bool {
        let mut spent = 0.0;
        for u in 0..self.ues() {
            let bands = self.owned(owner, u);
            let level = self.level_for_rate(u, &bands, self.requirement[u]);
            if !level.is_finite() {
                return false;
            }
            spent += self.ue_power_at(u, &bands, level);
        }
        spent <= self.p_max
    }

    /// [`Allocation::better_than`], except that infeasible results tied on
    /// attainment compare by their summed capped fractions. That keeps a
    /// search moving while some UE still has no band.
    fn improves(&self, a: &Allocation, b: &Allocation) -> bool {
        if !a.feasible && !b.feasible && a.attainment == b.attainment {
            let progress = |x: &Allocation| -> f64 {
                x.ue_rates
                    .iter()
                    .zip(&self.requirement)
                    .filter(|(_, t)| **t > 0.0)
                    .map(|(r, t)| (r / t).min(1.0))
                    .sum()
            };
            let (pa, pb) = (progress(a), progress(b));
            if pa != pb {
                return pa > pb;
            }
        }
        a.better_than(b)
    }

    fn evaluate(&self, owner: &[usize], dual_iterations: usize) -> Allocation {
        let (power, duals) = self.refine(owner);
        let rates = self.all_rates(owner, &power);
        let feasible = self.is_feasible(&rates);
        Allocation {
            assignment: Assignment {
                ue_count: self.ues(),
                owner: owner.to_vec(),
                auxiliary: tight_auxiliary(owner, &power, &self.gain),
                power_w: power,
            },
            duals,
            sum_rate: rates.iter().sum(),
            attainment: self.attainment(&rates),
            ue_rates: rates,
            feasible,
            dual_iterations,
        }
    }
}

pub const DUAL_MAX_ITERS: usize = 2000;
const DUAL_STEP: f64 = 0.5;
const STABLE_WINDOW: usize = 200;
const LOCAL_SEARCH_PASSES: usize = 50;
const POOL_SIZE: usize = 8;
/// Largest `U^I` searched exhaustively after the dual phase.
pub const EXHAUSTIVE_LIMIT: usize = 4096;

fn covering_assignments(prob: &Problem) -> Option<Vec<Vec<usize>>> {
    let (u_count, i_count) = (prob.ues(), prob.bands());
    let total = u_count.checked_pow(i_count as u32).filter(|&n| n <= EXHAUSTIVE_LIMIT)?;
    let needy: Vec<usize> = (0..u_count).filter(|&u| prob.requirement[u] > 0.0).collect();
    let mut out = Vec::new();
    for code in 0..total {
        let mut owner = vec![0; i_count];
        let mut c = code;
        for o in owner.iter_mut() {
            *o = c % u_count;
            c /= u_count;
        }
        if needy.iter().all(|u| owner.contains(u)) {
            out.push(owner);
        }
    }
    Some(out)
}

/// Dual decomposition followed by exact power refinement of every visited
/// assignment, then an exhaustive pass over small instances or a local
/// search over band moves and swaps on larger ones.
pub fn solve_allocation(
    gains: &[Vec<f64>],
    bands: &[SubBand],
    p_max: f64,
    requirements: &[f64],
    tolerance: f64,
) -> Result<Allocation> {
    if !(tolerance > 0.0) {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    let prob = Problem::new(gains, bands, p_max, requirements)?;
    let (u_count, i_count) = (prob.ues(), prob.bands());

    // Starting price: single-level water-filling of the whole budget with
    // every band on its strongest UE.
    let greedy: Vec<usize> = (0..i_count)
        .map(|i| {
            let mut best = 0;
            for u in 1..u_count {
                if prob.slope[u][i] > prob.slope[best][i] {
                    best = u;
                }
            }
            best
        })
        .collect();
    let zero_req = Problem {
        gain: prob.gain.clone(),
        slope: prob.slope.clone(),
        bandwidth: prob.bandwidth.clone(),
        p_max,
        requirement: vec![0.0; u_count],
    };
    let lambda_ref = match zero_req.refine(&greedy).1.lambda {
        l if l > 0.0 => l,
        _ => 1.0,
    };

    let mut lambda = 1.0;
    let mut mu = vec![0.0; u_count];
    let mut visits: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    visits.insert(greedy.clone(), 0);
    let mut last: Vec<usize> = Vec::new();
    let mut stable = 0;
    let mut iterations = 0;
    let mut owner = vec![0; i_count];
    let mut power = vec![0.0; i_count];

    while iterations < DUAL_MAX_ITERS {
        iterations += 1;
        let price = lambda * lambda_ref;
        for i in 0..i_count {
            let mut best = (f64::NEG_INFINITY, 0, 0.0);
            for u in 0..u_count {
                let p = prob.power(u, i, (1.0 + mu[u]) / price);
                let benefit = (1.0 + mu[u]) * prob.rate(u, i, p) - price * p;
                if benefit > best.0 {
                    best = (benefit, u, p);
                }
            }
            owner[i] = best.1;
            power[i] = best.2;
        }
        let rates = prob.all_rates(&owner, &power);
        let total: f64 = power.iter().sum();

        let power_residual = (total - p_max) / p_max;
        let mut worst = power_residual.abs();
        let step = DUAL_STEP / (iterations as f64).sqrt();
        lambda = (lambda + step * power_residual).max(1e-9);
        for u in 0..u_count {
            let req = prob.requirement[u];
            if req > 0.0 {
                let r = (req - rates[u]) / req;
                worst = worst.max(r.max(0.0)).max(mu[u] * (-r).max(0.0));
                mu[u] = (mu[u] + step * r).max(0.0);
            }
        }

        *visits.entry(owner.clone()).or_insert(0) += 1;
        if owner == last {
            stable += 1;
        } else {
            stable = 0;
            last = owner.clone();
        }
        if worst <= tolerance || stable >= STABLE_WINDOW {
            break;
        }
    }

    // Refine the most visited assignments, the greedy start and the last
    // iterate.
    let mut ranked: Vec<(&Vec<usize>, &usize)> = visits.iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(a.1).then_with(|| a.0.cmp(b.0)));
    let mut pool: BTreeSet<Vec<usize>> = ranked.iter().take(POOL_SIZE).map(|(k, _)| (*k).clone()).collect();
    pool.insert(greedy);
    pool.insert(last);
    let mut best: Option<Allocation> = None;
    for candidate in &pool {
        let a = prob.evaluate(candidate, iterations);
        if best.as_ref().map_or(true, |b| prob.improves(&a, b)) {
            best = Some(a);
        }
    }
    let mut best = best.expect("pool is never empty");

    // Small instances: every assignment that leaves no UE with a requirement
    // empty-handed. Anything else misses a requirement outright.
    if let Some(all) = covering_assignments(&prob) {
        for candidate in all.iter().filter(|c| !pool.contains(*c)) {
            if best.feasible && !prob.meets_requirements(candidate) {
                continue;
            }
            let a = prob.evaluate(candidate, iterations);
            if prob.improves(&a, &best) {
                best = a;
            }
        }
        return Ok(best);
    }

    // Single-band moves, then owner swaps between two bands. A swap can pay
    // off where each half of it alone breaks a requirement.
    for _ in 0..LOCAL_SEARCH_PASSES {
        let mut improved = false;
        let mut try_owner = |moved: Vec<usize>, best: &mut Allocation| {
            let a = prob.evaluate(&moved, iterations);
            if prob.improves(&a, best) {
                *best = a;
                improved = true;
            }
        };
        for i in 0..i_count {
            for u in 0..u_count {
                if u != best.assignment.owner[i] {
                    let mut moved = best.assignment.owner.clone();
                    moved[i] = u;
                    try_owner(moved, &mut best);
                }
            }
        }
        for i in 0..i_count {
            for j in i + 1..i_count {
                if best.assignment.owner[i] != best.assignment.owner[j] {
                    let mut moved = best.assignment.owner.clone();
                    moved.swap(i, j);
                    try_owner(moved, &mut best);
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(best)
}

/// Exact power solution for a given band ownership.
pub fn allocate_fixed(
    owner: &[usize],
    gains: &[Vec<f64>],
    bands: &[SubBand],
    p_max: f64,
    requirements: &[f64],
) -> Result<Allocation> {
    let prob = Problem::new(gains, bands, p_max, requirements)?;
    if owner.len() != prob.bands() || owner.iter().any(|&o| o >= prob.ues()) {
        return Err(Error::Domain("owner vector does not match the instance".into()));
    }
    Ok(prob.evaluate(owner, 0))
}

/// Whether UE `u` could meet its requirement if it owned every band and the
/// whole budget.
pub fn requirement_attainable(
    gains: &[Vec<f64>],
    bands: &[SubBand],
    p_max: f64,
    requirements: &[f64],
    u: usize,
) -> Result<bool> {
    let prob = Problem::new(gains, bands, p_max, requirements)?;
    let all = vec![u; prob.bands()];
    let mut single = vec![0.0; prob.ues()];
    single[u] = requirements[u];
    let solo = Problem {
        requirement: single,
        ..prob
    };
    let a = solo.evaluate(&all, 0);
    Ok(a.feasible)
}

/// Largest relative violation of the stationarity conditions
/// `(1+μ_u) B_i a_{u,i} / (ln2 (1 + a_{u,i} p_i)) = λ` on powered bands and
/// `≤ λ` on idle ones.
pub fn kkt_residual(gains: &[Vec<f64>], bands: &[SubBand], allocation: &Allocation) -> f64 {
    let lambda = allocation.duals.lambda;
    if lambda <= 0.0 {
        return 0.0;
    }
    let a = &allocation.assignment;
    let mut worst: f64 = 0.0;
    for (i, band) in bands.iter().enumerate() {
        let u = a.owner[i];
        let slope = gains[u][i] * band.delta();
        let marginal =
            (1.0 + allocation.duals.mu[u]) * band.bandwidth_hz * slope / (LN_2 * (1.0 + slope * a.power_w[i]));
        let r = if a.power_w[i] > 0.0 {
            (marginal - lambda).abs()
        } else {
            (marginal - lambda).max(0.0)
        };
        worst = worst.max(r / lambda);
    }
    worst
}

pub const BRUTE_FORCE_MAX_UES: usize = 3;
pub const BRUTE_FORCE_MAX_BANDS: usize = 4;

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Exhaustive search over every assignment and every split of the budget
/// on a `step`-watt grid.
pub fn brute_force_allocation(
    gains: &[Vec<f64>],
    bands: &[SubBand],
    p_max: f64,
    requirements: &[f64],
    step: f64,
) -> Result<Allocation> {
    let prob = Problem::new(gains, bands, p_max, requirements)?;
    let (u_count, i_count) = (prob.ues(), prob.bands());
    if u_count > BRUTE_FORCE_MAX_UES || i_count > BRUTE_FORCE_MAX_BANDS {
        return Err(Error::TooLarge(format!(
            "exhaustive search limited to {BRUTE_FORCE_MAX_UES} UEs and {BRUTE_FORCE_MAX_BANDS} bands, got {u_count}x{i_count}"
        )));
    }
    if !(step > 0.0 && step <= p_max) {
        return Err(Error::Domain(format!("power grid step must lie in (0, p_max], got {step}")));
    }
    let levels = (p_max / step + 1e-9).floor() as usize;
    let table: Vec<Vec<Vec<f64>>> = (0..u_count)
        .map(|u| {
            (0..i_count)
                .map(|i| (0..=levels).map(|k| prob.rate(u, i, k as f64 * step)).collect())
                .collect()
        })
        .collect();
    let splits = compositions(levels, i_count);

    let mut best: Option<(bool, f64, f64, Vec<usize>, usize)> = None;
    let mut owner = vec![0usize; i_count];
    let mut rates = vec![0.0; u_count];
    for code in 0..u_count.pow(i_count as u32) {
        let mut c = code;
        for o in owner.iter_mut() {
            *o = c % u_count;
            c /= u_count;
        }
        for (s, split) in splits.iter().enumerate() {
            rates.iter_mut().for_each(|r| *r = 0.0);
            for i in 0..i_count {
                rates[owner[i]] += table[owner[i]][i][split[i]];
            }
            let feasible = prob.is_feasible(&rates);
            let sum: f64 = rates.iter().sum();
            let att = prob.attainment(&rates);
            let better = match &best {
                None => true,
                Some((bf, bs, ba, _, _)) => match (feasible, *bf) {
                    (true, false) => true,
                    (false, true) => false,
                    (true, true) => sum > *bs,
                    (false, false) => att > *ba || (att == *ba && sum > *bs),
                },
            };
            if better {
                best = Some((feasible, sum, att, owner.clone(), s));
            }
        }
    }
    let (feasible, sum, att, owner, s) = best.expect("at least one assignment");
    let power: Vec<f64> = splits[s].iter().map(|&k| k as f64 * step).collect();
    let rates = prob.all_rates(&owner, &power);
    Ok(Allocation {
        assignment: Assignment {
            ue_count: u_count,
            auxiliary: tight_auxiliary(&owner, &power, gains),
            owner,
            power_w: power,
        },
        duals: DualState {
            lambda: 0.0,
            mu: vec![0.0; u_count],
        },
        ue_rates: rates,
        sum_rate: sum,
        feasible,
        attainment: att,
        dual_iterations: 0,
    })
}
