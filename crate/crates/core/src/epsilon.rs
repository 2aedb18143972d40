//! Epsilon-constraint scalarization and the sweep that builds a front.
//!
//! One objective is kept; every other objective `j` becomes the constraint
//! `f_j(x) <= eps_j` (minimized) or `f_j(x) >= eps_j` (maximized). Each grid
//! value of `eps` is solved independently with the COA engine and the best
//! point of every sub-problem is recorded in grid order.

use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coa::{minimize, CoaConfig, CoaError, CoaRun, PenalizedObjective};
use crate::pareto::{front_order, non_dominated_indices, FrontPoint};
use crate::problem::{
    evaluate, Constraint, EvaluatedPoint, Objective, Problem, ProblemError, ScalarFn, Sense,
};

/// Upper limit on the number of sub-problems in one sweep.
pub const MAX_SUBPROBLEMS: usize = 100_000;

/// Relative slack when counting grid steps, so that ranges which are an
/// exact decimal multiple of the pace keep their last point.
const GRID_STEP_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EpsilonError {
    #[error("objective index {index} out of range for {count} objectives")]
    BadIndex { index: usize, count: usize },
    #[error("expected {expected} epsilon values, got {actual}")]
    EpsilonCount { expected: usize, actual: usize },
    #[error("invalid epsilon grid: {0}")]
    InvalidGrid(String),
    #[error("no feasible point found while estimating the range of objective {0}")]
    Infeasible(usize),
    #[error("sweep would solve {0} sub-problems, limit is {MAX_SUBPROBLEMS}")]
    TooManySubproblems(usize),
    #[error(transparent)]
    Coa(#[from] CoaError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

/// A base problem reduced to a single objective with epsilon bounds.
#[derive(Debug, Clone)]
pub struct ScalarizedProblem {
    pub base: Problem,
    pub keep_index: usize,
    /// One value per held objective, in objective order skipping `keep_index`.
    pub epsilons: Vec<f64>,
    pub derived: Problem,
}

/// Indices of the objectives turned into constraints.
pub fn held_objectives(k: usize, keep_index: usize) -> impl Iterator<Item = usize> {
    (0..k).filter(move |&j| j != keep_index)
}

pub fn scalarize(
    problem: &Problem,
    keep_index: usize,
    epsilons: &[f64],
) -> Result<ScalarizedProblem, EpsilonError> {
    let k = problem.num_objectives();
    if keep_index >= k {
        return Err(EpsilonError::BadIndex {
            index: keep_index,
            count: k,
        });
    }
    if epsilons.len() != k - 1 {
        return Err(EpsilonError::EpsilonCount {
            expected: k - 1,
            actual: epsilons.len(),
        });
    }
    let mut constraints = problem.constraints().to_vec();
    for (j, &eps) in held_objectives(k, keep_index).zip(epsilons) {
        let objective = &problem.objectives()[j];
        let f = objective.shared_fn();
        let c: ScalarFn = match objective.sense {
            Sense::Minimize => Arc::new(move |x| f(x) - eps),
            Sense::Maximize => Arc::new(move |x| eps - f(x)),
        };
        let relation = match objective.sense {
            Sense::Minimize => "<=",
            Sense::Maximize => ">=",
        };
        constraints.push(Constraint::from_shared(
            format!("{} {relation} {eps}", objective.label),
            c,
        ));
    }
    let kept: Objective = problem.objectives()[keep_index].clone();
    let derived = Problem::new(
        format!("{} [eps]", problem.name()),
        problem.bounds().clone(),
        vec![kept],
        constraints,
    )?;
    Ok(ScalarizedProblem {
        base: problem.clone(),
        keep_index,
        epsilons: epsilons.to_vec(),
        derived,
    })
}

/// Evenly paced epsilon values from `lower`, never past `upper`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonGrid {
    pub lower: f64,
    pub upper: f64,
    pub pace: f64,
    pub values: Vec<f64>,
}

impl EpsilonGrid {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Number of values in a grid: `floor((high - low) / pace) + 1`.
pub fn grid_count(low: f64, high: f64, pace: f64) -> usize {
    let steps = (high - low) / pace;
    (steps + GRID_STEP_SLACK * steps.max(1.0)).floor() as usize + 1
}

pub fn epsilon_grid(low: f64, high: f64, pace: f64) -> Result<EpsilonGrid, EpsilonError> {
    if !(pace > 0.0) || !pace.is_finite() {
        return Err(EpsilonError::InvalidGrid(format!(
            "pace must be positive, got {pace}"
        )));
    }
    if !low.is_finite() || !high.is_finite() {
        return Err(EpsilonError::InvalidGrid("range must be finite".into()));
    }
    if low > high {
        return Err(EpsilonError::InvalidGrid(format!(
            "low {low} exceeds high {high}"
        )));
    }
    let count = grid_count(low, high, pace);
    if count > MAX_SUBPROBLEMS {
        return Err(EpsilonError::TooManySubproblems(count));
    }
    let values = (0..count)
        .map(|t| (low + t as f64 * pace).min(high))
        .collect();
    Ok(EpsilonGrid {
        lower: low,
        upper: high,
        pace,
        values,
    })
}

/// Rounds a range outward to two decimals. Values already within 1e-4 of a
/// two-decimal number snap to it.
pub fn round_outward(low: f64, high: f64) -> (f64, f64) {
    let snap = |v: f64, outward: fn(f64) -> f64| {
        let scaled = v * 100.0;
        let nearest = scaled.round();
        if (scaled - nearest).abs() < 1e-2 {
            nearest / 100.0
        } else {
            outward(scaled) / 100.0
        }
    };
    (snap(low, f64::floor), snap(high, f64::ceil))
}

/// Minimizes and maximizes objective `j` under the original constraints and
/// returns the raw `(min, max)` values found.
pub fn estimate_epsilon_range(
    problem: &Problem,
    objective_index: usize,
    config: &CoaConfig,
) -> Result<(f64, f64), EpsilonError> {
    let k = problem.num_objectives();
    if objective_index >= k {
        return Err(EpsilonError::BadIndex {
            index: objective_index,
            count: k,
        });
    }
    let source = &problem.objectives()[objective_index];
    let single = |sense: Sense| {
        let f = source.shared_fn();
        Problem::new(
            problem.name(),
            problem.bounds().clone(),
            vec![Objective::new(sense, source.label.clone(), move |x| f(x))],
            problem.constraints().to_vec(),
        )
    };
    let lowest = single(Sense::Minimize)?;
    let highest = single(Sense::Maximize)?;

    let solve = |p: &Problem, seed: u64| -> Result<EvaluatedPoint, EpsilonError> {
        let cfg = CoaConfig {
            seed,
            ..config.clone()
        };
        let objective = PenalizedObjective::new(p, 0, cfg.penalty_coefficient);
        Ok(minimize(&objective, p.bounds(), &cfg)?.best.record)
    };
    let min_point = solve(&lowest, config.seed)?;
    let max_point = solve(&highest, config.seed ^ 0x9e37_79b9_7f4a_7c15)?;

    let lo = min_point.objective_values[0];
    let hi = max_point.objective_values[0];
    match (min_point.feasible, max_point.feasible) {
        (false, false) => Err(EpsilonError::Infeasible(objective_index)),
        (true, false) => Ok((lo, lo)),
        (false, true) => Ok((hi, hi)),
        (true, true) => Ok((lo.min(hi), hi.max(lo))),
    }
}

/// Best point of one epsilon sub-problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    /// Position in grid order.
    pub index: usize,
    pub epsilon: Vec<f64>,
    pub run: CoaRun,
    /// Decision vector, raw values of every base objective, and violations
    /// of the derived constraints (base constraints first).
    pub point: EvaluatedPoint,
    /// Feasibility against the derived constraints.
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub problem_name: String,
    pub keep_index: usize,
    pub senses: Vec<Sense>,
    pub config: CoaConfig,
    pub records: Vec<SweepRecord>,
}

/// Sweeps a two-objective problem over one epsilon grid on a single thread.
pub fn run_sweep(
    problem: &Problem,
    keep_index: usize,
    grid: &EpsilonGrid,
    config: &CoaConfig,
) -> Result<SweepResult, EpsilonError> {
    run_sweep_grids(problem, keep_index, std::slice::from_ref(grid), config, 1)
}

/// General sweep: one grid per held objective, combined as a Cartesian
/// product with the first grid varying slowest. Sub-problem `t` is seeded
/// with `config.seed ^ t`. The result does not depend on `workers`.
pub fn run_sweep_grids(
    problem: &Problem,
    keep_index: usize,
    grids: &[EpsilonGrid],
    config: &CoaConfig,
    workers: usize,
) -> Result<SweepResult, EpsilonError> {
    config.validate()?;
    let k = problem.num_objectives();
    if keep_index >= k {
        return Err(EpsilonError::BadIndex {
            index: keep_index,
            count: k,
        });
    }
    if grids.len() != k - 1 {
        return Err(EpsilonError::EpsilonCount {
            expected: k - 1,
            actual: grids.len(),
        });
    }
    let total = grids
        .iter()
        .try_fold(1usize, |acc, g| acc.checked_mul(g.len()))
        .filter(|t| *t <= MAX_SUBPROBLEMS)
        .ok_or_else(|| {
            EpsilonError::TooManySubproblems(grids.iter().map(EpsilonGrid::len).product())
        })?;

    let cell = |t: usize| -> Vec<f64> {
        let mut rest = t;
        let mut eps = vec![0.0; grids.len()];
        for (slot, g) in eps.iter_mut().zip(grids).rev() {
            *slot = g.values[rest % g.len()];
            rest /= g.len();
        }
        eps
    };

    let solve = |t: usize| -> Result<SweepRecord, EpsilonError> {
        let epsilon = cell(t);
        let scalarized = scalarize(problem, keep_index, &epsilon)?;
        let cfg = CoaConfig {
            seed: config.seed ^ t as u64,
            ..config.clone()
        };
        let objective = PenalizedObjective::new(&scalarized.derived, 0, cfg.penalty_coefficient);
        let run = minimize(&objective, scalarized.derived.bounds(), &cfg)?;
        // Prefer a feasible point over a marginally infeasible penalty optimum.
        let chosen = run.best_feasible.as_ref().unwrap_or(&run.best);
        let base = evaluate(problem, &chosen.position)?;
        let derived = &chosen.record;
        let point = EvaluatedPoint {
            x: chosen.position.clone(),
            objective_values: base.objective_values,
            violations: derived.violations.clone(),
            total_violation: derived.total_violation,
            feasible: derived.feasible,
        };
        Ok(SweepRecord {
            index: t,
            feasible: point.feasible,
            epsilon,
            run,
            point,
        })
    };

    let workers = workers.clamp(1, total.max(1));
    let mut records = if workers == 1 {
        (0..total).map(solve).collect::<Result<Vec<_>, _>>()?
    } else {
        let next = AtomicUsize::new(0);
        let chunks: Vec<Result<Vec<SweepRecord>, EpsilonError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    scope.spawn(|| {
                        let mut mine = Vec::new();
                        loop {
                            let t = next.fetch_add(1, AtomicOrdering::Relaxed);
                            if t >= total {
                                return Ok(mine);
                            }
                            mine.push(solve(t)?);
                        }
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep worker panicked"))
                .collect()
        });
        let mut all = Vec::with_capacity(total);
        for chunk in chunks {
            all.extend(chunk?);
        }
        all
    };
    records.sort_by_key(|r| r.index);

    Ok(SweepResult {
        problem_name: problem.name().to_string(),
        keep_index,
        senses: problem.senses(),
        config: config.clone(),
        records,
    })
}

/// Feasible sweep records, optionally reduced to the non-dominated ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Front {
    /// Sorted ascending by raw objective values (f1 first), then grid order.
    pub records: Vec<SweepRecord>,
    pub senses: Vec<Sense>,
    /// Set when no feasible record was available.
    pub empty: bool,
}

impl Front {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn points(&self) -> Vec<EvaluatedPoint> {
        self.records.iter().map(|r| r.point.clone()).collect()
    }

    pub fn front_points(&self) -> Vec<FrontPoint> {
        self.records
            .iter()
            .map(|r| {
                FrontPoint::new(r.point.objective_values.clone(), self.senses.clone())
                    .with_payload(r.point.x.clone())
            })
            .collect()
    }
}

pub fn extract_front(sweep: &SweepResult, filter: bool) -> Front {
    let feasible: Vec<&SweepRecord> = sweep.records.iter().filter(|r| r.feasible).collect();
    let raw: Vec<Vec<f64>> = feasible
        .iter()
        .map(|r| r.point.objective_values.clone())
        .collect();
    let mut keep: Vec<usize> = if filter {
        let oriented: Vec<Vec<f64>> = raw
            .iter()
            .map(|v| v.iter().zip(&sweep.senses).map(|(x, s)| s.orient(*x)).collect())
            .collect();
        non_dominated_indices(&oriented)
    } else {
        (0..feasible.len()).collect()
    };
    front_order(&raw, &mut keep);
    Front {
        records: keep.into_iter().map(|i| feasible[i].clone()).collect(),
        senses: sweep.senses.clone(),
        empty: feasible.is_empty(),
    }
}
