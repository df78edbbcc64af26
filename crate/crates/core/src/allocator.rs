//! Rendering capacity allocation.
//!
//! Maximizes `Σ w_n ln(c_n)` subject to `Σ c_n = C` and `c_n ≥ c_min`.
//! The KKT conditions give `c_n = max(c_min, w_n / λ)` for a single
//! multiplier `λ`; [`allocate_weighted`] finds the clamped set by repeatedly
//! clamping every object whose share falls below the floor and re-solving
//! for the rest. The clamped set only grows, so at most `N` rounds run.

use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Weights below this are raised to it before solving.
pub const MIN_WEIGHT: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationProblem {
    weights: Vec<f64>,
    budget: f64,
    floor: f64,
}

impl AllocationProblem {
    /// Validates `N ≥ 1`, `floor > 1`, finite inputs and `budget ≥ N·floor`.
    pub fn new(weights: Vec<f64>, budget: f64, floor: f64) -> Result<Self> {
        check_feasible(weights.len(), budget, floor)?;
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(Error::Config(alloc::format!("weight {w} is not finite")));
        }
        Ok(Self {
            weights,
            budget,
            floor,
        })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

fn check_feasible(n: usize, budget: f64, floor: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Config("allocation needs at least one object".into()));
    }
    if !(floor > 1.0 && floor.is_finite()) {
        return Err(Error::Config(alloc::format!(
            "floor must exceed 1 K, got {floor}"
        )));
    }
    if !budget.is_finite() {
        return Err(Error::Config("budget must be finite".into()));
    }
    let required = n as f64 * floor;
    if budget < required {
        return Err(Error::Infeasible {
            budget,
            required,
            deficit: required - budget,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationResult {
    /// Per-object capacity in K units, in problem order.
    pub capacities: Vec<f64>,
    /// KKT multiplier `λ` of the budget constraint (0 for the uniform split).
    pub lagrange_multiplier: f64,
    /// `Σ w_n ln(c_n)` with the problem's weights.
    pub objective: f64,
}

/// `Σ w_n ln(c_n)`.
pub fn objective(weights: &[f64], capacities: &[f64]) -> f64 {
    weights
        .iter()
        .zip(capacities)
        .map(|(&w, &c)| w * libm::log(c))
        .sum()
}

/// Optimal weighted allocation with floors.
///
/// Non-positive weights are pinned to the floor; positive weights below
/// [`MIN_WEIGHT`] are raised to it.
pub fn allocate_weighted(problem: &AllocationProblem) -> Result<AllocationResult> {
    let AllocationProblem {
        weights,
        budget,
        floor,
    } = problem;
    let (budget, floor) = (*budget, *floor);
    check_feasible(weights.len(), budget, floor)?;
    let n = weights.len();
    let solve_weights: Vec<f64> = weights.iter().map(|&w| w.max(MIN_WEIGHT)).collect();
    let mut clamped: Vec<bool> = weights.iter().map(|&w| w <= 0.0).collect();
    if clamped.iter().all(|&c| c) {
        let mut uniform = allocate_uniform(n, budget, floor)?;
        uniform.objective = objective(weights, &uniform.capacities);
        return Ok(uniform);
    }

    let mut capacities = vec![floor; n];
    let mut multiplier;
    loop {
        let n_clamped = clamped.iter().filter(|&&c| c).count();
        let remaining = budget - n_clamped as f64 * floor;
        let free_weight: f64 = solve_weights
            .iter()
            .zip(&clamped)
            .filter(|(_, &c)| !c)
            .map(|(&w, _)| w)
            .sum();
        let scale = remaining / free_weight;
        multiplier = free_weight / remaining;
        let mut changed = false;
        for i in 0..n {
            if clamped[i] {
                capacities[i] = floor;
                continue;
            }
            let c = solve_weights[i] * scale;
            if c < floor {
                clamped[i] = true;
                changed = true;
            }
            capacities[i] = c;
        }
        if !changed {
            break;
        }
    }
    Ok(AllocationResult {
        objective: objective(weights, &capacities),
        capacities,
        lagrange_multiplier: multiplier,
    })
}

/// Even split `C / N` for every object.
pub fn allocate_uniform(n_objects: usize, budget: f64, floor: f64) -> Result<AllocationResult> {
    check_feasible(n_objects, budget, floor)?;
    let share = budget / n_objects as f64;
    let capacities = vec![share; n_objects];
    Ok(AllocationResult {
        objective: 0.0,
        capacities,
        lagrange_multiplier: 0.0,
    })
}

/// Uniform allocation scored with the problem's weights.
pub fn allocate_uniform_for(problem: &AllocationProblem) -> Result<AllocationResult> {
    let mut result = allocate_uniform(problem.len(), problem.budget, problem.floor)?;
    result.objective = objective(&problem.weights, &result.capacities);
    Ok(result)
}

/// Largest grid the brute-force oracle will enumerate.
pub const MAX_GRID_POINTS: f64 = 1.0e6;

/// Exhaustive search over capacities `floor + k·step` (the last object takes
/// whatever remains so the budget is met exactly). Test oracle for small `N`.
pub fn brute_force_allocate(problem: &AllocationProblem, grid_step: f64) -> Result<AllocationResult> {
    let n = problem.len();
    let floor = problem.floor;
    check_feasible(n, problem.budget, floor)?;
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::Config("grid_step must be positive".into()));
    }
    if n > 4 {
        return Err(Error::SearchSpaceTooLarge {
            combinations: f64::INFINITY,
        });
    }
    let slack = problem.budget - n as f64 * floor;
    // Guard against 0.1/0.01 = 9.999… style truncation.
    let steps = libm::floor(slack / grid_step + 1e-9) as u64;
    let remainder = (slack - steps as f64 * grid_step).max(0.0);
    let mut combinations = 1.0;
    for j in 1..n {
        combinations *= (steps + j as u64) as f64 / j as f64;
    }
    if combinations > MAX_GRID_POINTS {
        return Err(Error::SearchSpaceTooLarge { combinations });
    }
    let w = &problem.weights;
    let grid: Vec<f64> = (0..=steps).map(|k| floor + k as f64 * grid_step).collect();
    let log_grid: Vec<f64> = grid.iter().map(|&c| libm::log(c)).collect();
    let log_last: Vec<f64> = grid.iter().map(|&c| libm::log(c + remainder)).collect();

    let mut best_value = f64::NEG_INFINITY;
    let mut best = vec![0u64; n];
    let mut current = vec![0u64; n];
    search(
        w,
        &log_grid,
        &log_last,
        steps,
        0,
        0.0,
        &mut current,
        &mut best_value,
        &mut best,
    );
    let mut capacities: Vec<f64> = best.iter().map(|&k| grid[k as usize]).collect();
    capacities[n - 1] += remainder;
    Ok(AllocationResult {
        objective: objective(w, &capacities),
        capacities,
        lagrange_multiplier: 0.0,
    })
}

#[allow(clippy::too_many_arguments)]
fn search(
    w: &[f64],
    log_grid: &[f64],
    log_last: &[f64],
    steps_left: u64,
    depth: usize,
    partial: f64,
    current: &mut [u64],
    best_value: &mut f64,
    best: &mut [u64],
) {
    let n = w.len();
    if depth == n - 1 {
        current[depth] = steps_left;
        let value = partial + w[depth] * log_last[steps_left as usize];
        if value > *best_value {
            *best_value = value;
            best.copy_from_slice(current);
        }
        return;
    }
    for k in 0..=steps_left {
        current[depth] = k;
        let value = partial + w[depth] * log_grid[k as usize];
        search(
            w,
            log_grid,
            log_last,
            steps_left - k,
            depth + 1,
            value,
            current,
            best_value,
            best,
        );
    }
}
