//! Cuckoo Optimization Algorithm for box-constrained minimization.
//!
//! Each iteration every habitat lays its eggs inside an egg-laying radius
//! proportional to its share of the total egg count, the eggs hatch into new
//! habitats, the population is trimmed back to `max_population` by fitness,
//! and the survivors migrate toward the best habitat of the best cluster.
//! The best habitat ever seen is carried separately so it is never lost.

use std::cmp::Ordering;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::{penalty_unchecked, Bounds, EvaluatedPoint, Problem, DEFAULT_PENALTY};

/// Random stream used by every run. Portable and seedable.
pub type CoaRng = ChaCha8Rng;

/// Newborn eggs closer than this (max-norm) to an existing habitat are discarded.
pub const DUPLICATE_DISTANCE: f64 = 1e-9;

const KMEANS_MAX_ITERATIONS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoaError {
    #[error("invalid COA configuration: {0}")]
    InvalidConfig(String),
    #[error("egg-laying radius needs 1 <= egg_count <= total_eggs, got {egg_count} of {total_eggs}")]
    EggCount { egg_count: usize, total_eggs: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoaConfig {
    pub initial_population: usize,
    pub egg_min: usize,
    pub egg_max: usize,
    pub clusters: usize,
    pub max_population: usize,
    pub max_iterations: usize,
    pub elr_alpha: f64,
    pub motion_scale: f64,
    /// Stop once the best fitness improved by less than `convergence_epsilon`
    /// over this many iterations. Zero disables the check.
    pub convergence_window: usize,
    pub convergence_epsilon: f64,
    pub penalty_coefficient: f64,
    pub seed: u64,
}

impl Default for CoaConfig {
    fn default() -> Self {
        Self {
            initial_population: 5,
            egg_min: 2,
            egg_max: 4,
            clusters: 1,
            max_population: 20,
            max_iterations: 100,
            elr_alpha: 1.0,
            motion_scale: 1.0,
            convergence_window: 15,
            convergence_epsilon: 1e-9,
            penalty_coefficient: DEFAULT_PENALTY,
            seed: 0,
        }
    }
}

impl CoaConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), CoaError> {
        let fail = |msg: String| Err(CoaError::InvalidConfig(msg));
        if self.initial_population == 0 {
            return fail("initial_population must be at least 1".into());
        }
        if self.egg_min == 0 || self.egg_min > self.egg_max {
            return fail(format!(
                "egg bounds must satisfy 1 <= egg_min <= egg_max, got ({}, {})",
                self.egg_min, self.egg_max
            ));
        }
        if self.clusters == 0 {
            return fail("clusters must be at least 1".into());
        }
        if self.max_population < self.initial_population {
            return fail(format!(
                "max_population {} is below initial_population {}",
                self.max_population, self.initial_population
            ));
        }
        if self.max_iterations == 0 {
            return fail("max_iterations must be at least 1".into());
        }
        if !(self.elr_alpha > 0.0 && self.elr_alpha.is_finite()) {
            return fail(format!("elr_alpha must be positive, got {}", self.elr_alpha));
        }
        if !(self.motion_scale > 0.0 && self.motion_scale.is_finite()) {
            return fail(format!(
                "motion_scale must be positive, got {}",
                self.motion_scale
            ));
        }
        if !(self.convergence_epsilon >= 0.0) {
            return fail("convergence_epsilon must be nonnegative".into());
        }
        if !(self.penalty_coefficient > 0.0 && self.penalty_coefficient.is_finite()) {
            return fail(format!(
                "penalty_coefficient must be positive, got {}",
                self.penalty_coefficient
            ));
        }
        Ok(())
    }
}

/// Fitness value plus the evaluation record it was derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct Assessment {
    pub fitness: f64,
    pub record: EvaluatedPoint,
}

/// Anything the engine can minimize.
pub trait FitnessFunction: Sync {
    fn assess(&self, x: &[f64]) -> Assessment;
}

impl<F> FitnessFunction for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn assess(&self, x: &[f64]) -> Assessment {
        let fitness = sanitize(self(x));
        Assessment {
            fitness,
            record: EvaluatedPoint::from_parts(x.to_vec(), vec![fitness], &[]),
        }
    }
}

/// One objective of a [`Problem`] with its constraints folded in as a
/// quadratic exterior penalty.
#[derive(Debug, Clone, Copy)]
pub struct PenalizedObjective<'a> {
    problem: &'a Problem,
    objective: usize,
    penalty: f64,
}

impl<'a> PenalizedObjective<'a> {
    pub fn new(problem: &'a Problem, objective: usize, penalty: f64) -> Self {
        assert!(objective < problem.num_objectives());
        Self {
            problem,
            objective,
            penalty,
        }
    }
}

impl FitnessFunction for PenalizedObjective<'_> {
    fn assess(&self, x: &[f64]) -> Assessment {
        let record = crate::problem::evaluate(self.problem, x)
            .expect("engine positions always match the problem dimension");
        let sense = self.problem.objectives()[self.objective].sense;
        let kept = sense.orient(record.objective_values[self.objective]);
        let fitness = sanitize(penalty_unchecked(&record, kept, self.penalty));
        Assessment { fitness, record }
    }
}

#[inline]
fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// A candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Habitat {
    pub position: Vec<f64>,
    pub egg_count: usize,
    pub fitness: f64,
    pub record: EvaluatedPoint,
}

impl Habitat {
    fn hatch<F: FitnessFunction + ?Sized>(
        position: Vec<f64>,
        objective: &F,
        config: &CoaConfig,
        rng: &mut CoaRng,
    ) -> Self {
        let egg_count = rng.gen_range(config.egg_min..=config.egg_max);
        let Assessment { fitness, record } = objective.assess(&position);
        Self {
            position,
            egg_count,
            fitness,
            record,
        }
    }
}

/// Fitness ascending, ties broken lexicographically on position.
pub fn habitat_order(a: &Habitat, b: &Habitat) -> Ordering {
    a.fitness
        .total_cmp(&b.fitness)
        .then_with(|| lexicographic(&a.position, &b.position))
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoaWarning {
    /// Every coordinate of the box has zero width; no search was possible.
    DegenerateBox,
    /// More clusters were requested than habitats exist.
    ClustersReduced { requested: usize, used: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoaRun {
    pub best: Habitat,
    /// Lowest-fitness habitat whose record is feasible. It can differ from
    /// `best` when the penalized optimum sits just outside the tolerance.
    pub best_feasible: Option<Habitat>,
    pub best_history: Vec<f64>,
    pub iterations_used: usize,
    pub evaluations_used: usize,
    pub warnings: Vec<CoaWarning>,
}

/// Draws `initial_population` uniform habitats in the box.
///
/// A degenerate box yields copies of its single point and a warning.
pub fn initialize_population<F: FitnessFunction + ?Sized>(
    objective: &F,
    bounds: &Bounds,
    config: &CoaConfig,
    rng: &mut CoaRng,
) -> Result<(Vec<Habitat>, Option<CoaWarning>), CoaError> {
    config.validate()?;
    if bounds.is_degenerate() {
        let habitat = Habitat::hatch(bounds.lower().to_vec(), objective, config, rng);
        return Ok((
            vec![habitat; config.initial_population],
            Some(CoaWarning::DegenerateBox),
        ));
    }
    let population = (0..config.initial_population)
        .map(|_| {
            let position = bounds
                .lower()
                .iter()
                .zip(bounds.upper())
                .map(|(lo, hi)| lo + rng.gen::<f64>() * (hi - lo))
                .collect();
            Habitat::hatch(position, objective, config, rng)
        })
        .collect();
    Ok((population, None))
}

/// Per-coordinate egg-laying radius `alpha * egg_count / total_eggs * width`.
pub fn egg_laying_radius(
    egg_count: usize,
    total_eggs: usize,
    bounds: &Bounds,
    elr_alpha: f64,
) -> Result<Vec<f64>, CoaError> {
    if egg_count == 0 || total_eggs < egg_count {
        return Err(CoaError::EggCount {
            egg_count,
            total_eggs,
        });
    }
    let share = egg_count as f64 / total_eggs as f64;
    Ok((0..bounds.dim())
        .map(|i| elr_alpha * share * bounds.width(i))
        .collect())
}

/// Samples `habitat.egg_count` eggs uniformly in the axis-aligned box of the
/// given radius around the habitat, clamped into `bounds`.
pub fn lay_eggs(habitat: &Habitat, radius: &[f64], bounds: &Bounds, rng: &mut CoaRng) -> Vec<Vec<f64>> {
    (0..habitat.egg_count)
        .map(|_| {
            let mut egg: Vec<f64> = habitat
                .position
                .iter()
                .zip(radius)
                .map(|(p, r)| p + (2.0 * rng.gen::<f64>() - 1.0) * r)
                .collect();
            bounds.clamp(&mut egg);
            egg
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoalSelection {
    pub position: Vec<f64>,
    pub warning: Option<CoaWarning>,
}

/// Picks the migration goal: the best habitat of the cluster with the lowest
/// mean fitness. With one cluster this is simply the best habitat.
///
/// # Panics
///
/// Panics on an empty population.
pub fn select_goal(population: &[Habitat], clusters: usize, rng: &mut CoaRng) -> GoalSelection {
    assert!(!population.is_empty(), "select_goal needs at least one habitat");
    let requested = clusters.max(1);
    let used = requested.min(population.len());
    let warning = (used < requested).then_some(CoaWarning::ClustersReduced { requested, used });

    if used == 1 {
        let best = population
            .iter()
            .min_by(|a, b| habitat_order(a, b))
            .expect("nonempty");
        return GoalSelection {
            position: best.position.clone(),
            warning,
        };
    }

    let assignment = kmeans(population, used, rng);
    let mut sums = vec![0.0; used];
    let mut counts = vec![0usize; used];
    for (h, &c) in population.iter().zip(&assignment) {
        sums[c] += h.fitness;
        counts[c] += 1;
    }
    let best_cluster = (0..used)
        .filter(|&c| counts[c] > 0)
        .min_by(|&a, &b| {
            let ma = sums[a] / counts[a] as f64;
            let mb = sums[b] / counts[b] as f64;
            sanitize(ma).total_cmp(&sanitize(mb)).then(a.cmp(&b))
        })
        .expect("at least one cluster is populated");
    let best = population
        .iter()
        .zip(&assignment)
        .filter(|(_, &c)| c == best_cluster)
        .map(|(h, _)| h)
        .min_by(|a, b| habitat_order(a, b))
        .expect("cluster is populated");
    GoalSelection {
        position: best.position.clone(),
        warning,
    }
}

/// Lloyd's algorithm on habitat positions, seeded with distinct habitats.
fn kmeans(population: &[Habitat], k: usize, rng: &mut CoaRng) -> Vec<usize> {
    let mut centers: Vec<Vec<f64>> = index::sample(rng, population.len(), k)
        .into_iter()
        .map(|i| population[i].position.clone())
        .collect();
    let mut assignment = vec![0usize; population.len()];
    for iteration in 0..KMEANS_MAX_ITERATIONS {
        let mut changed = false;
        for (slot, h) in assignment.iter_mut().zip(population) {
            let nearest = centers
                .iter()
                .enumerate()
                .map(|(c, center)| (c, squared_distance(center, &h.position)))
                .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                .map(|(c, _)| c)
                .expect("k >= 1");
            if *slot != nearest {
                changed = true;
                *slot = nearest;
            }
        }
        if iteration > 0 && !changed {
            break;
        }
        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<&Habitat> = population
                .iter()
                .zip(&assignment)
                .filter(|(_, &a)| a == c)
                .map(|(h, _)| h)
                .collect();
            // empty clusters keep their previous center
            if members.is_empty() {
                continue;
            }
            for (d, coord) in center.iter_mut().enumerate() {
                *coord = members.iter().map(|h| h.position[d]).sum::<f64>() / members.len() as f64;
            }
        }
    }
    assignment
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn max_norm_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Moves a habitat a random fraction of the way toward `goal`, independently
/// per coordinate, then clamps into the box.
pub fn migrate(
    position: &[f64],
    goal: &[f64],
    motion_scale: f64,
    bounds: &Bounds,
    rng: &mut CoaRng,
) -> Vec<f64> {
    let mut moved: Vec<f64> = position
        .iter()
        .zip(goal)
        .map(|(p, g)| p + motion_scale * rng.gen::<f64>() * (g - p))
        .collect();
    bounds.clamp(&mut moved);
    moved
}

/// Keeps the `max_population` fittest habitats in [`habitat_order`].
pub fn cap_population(mut population: Vec<Habitat>, max_population: usize) -> Vec<Habitat> {
    population.sort_by(habitat_order);
    population.truncate(max_population);
    population
}

fn note_feasible(h: &Habitat, slot: &mut Option<Habitat>) {
    if h.record.feasible && slot.as_ref().is_none_or(|b| habitat_order(h, b) == Ordering::Less) {
        *slot = Some(h.clone());
    }
}

/// Runs the full COA loop and returns the best habitat found.
pub fn minimize<F: FitnessFunction + ?Sized>(
    objective: &F,
    bounds: &Bounds,
    config: &CoaConfig,
) -> Result<CoaRun, CoaError> {
    config.validate()?;
    let mut rng = CoaRng::seed_from_u64(config.seed);
    let mut warnings = Vec::new();

    let (mut population, warning) = initialize_population(objective, bounds, config, &mut rng)?;
    let mut evaluations = population.len();
    let mut best = population
        .iter()
        .min_by(|a, b| habitat_order(a, b))
        .cloned()
        .expect("initial population is nonempty");
    let mut best_feasible = None;
    for h in &population {
        note_feasible(h, &mut best_feasible);
    }

    if let Some(w) = warning {
        warnings.push(w);
        return Ok(CoaRun {
            best_history: vec![best.fitness],
            best,
            best_feasible,
            iterations_used: 0,
            evaluations_used: 1,
            warnings,
        });
    }

    let mut history = Vec::with_capacity(config.max_iterations);
    for _ in 0..config.max_iterations {
        let total_eggs: usize = population.iter().map(|h| h.egg_count).sum();
        let mut hatched: Vec<Habitat> = Vec::with_capacity(total_eggs);
        for habitat in &population {
            let radius = egg_laying_radius(habitat.egg_count, total_eggs, bounds, config.elr_alpha)?;
            for egg in lay_eggs(habitat, &radius, bounds, &mut rng) {
                let duplicate = population
                    .iter()
                    .chain(hatched.iter())
                    .any(|h| max_norm_distance(&h.position, &egg) < DUPLICATE_DISTANCE);
                if duplicate {
                    continue;
                }
                let h = Habitat::hatch(egg, objective, config, &mut rng);
                note_feasible(&h, &mut best_feasible);
                hatched.push(h);
                evaluations += 1;
            }
        }
        population.extend(hatched);
        population = cap_population(population, config.max_population);
        if habitat_order(&population[0], &best) == Ordering::Less {
            best = population[0].clone();
        }

        let goal = select_goal(&population, config.clusters, &mut rng);
        if let Some(w) = goal.warning {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        let mut migrated = Vec::with_capacity(population.len());
        for habitat in population {
            let target = migrate(&habitat.position, &goal.position, config.motion_scale, bounds, &mut rng);
            if target == habitat.position {
                migrated.push(habitat);
            } else {
                let h = Habitat::hatch(target, objective, config, &mut rng);
                note_feasible(&h, &mut best_feasible);
                migrated.push(h);
                evaluations += 1;
            }
        }
        population = migrated;
        if let Some(top) = population.iter().min_by(|a, b| habitat_order(a, b)) {
            if habitat_order(top, &best) == Ordering::Less {
                best = top.clone();
            }
        }

        history.push(best.fitness);
        let t = history.len();
        if config.convergence_window > 0 && t > config.convergence_window {
            let gain = history[t - 1 - config.convergence_window] - history[t - 1];
            if gain < config.convergence_epsilon {
                break;
            }
        }
    }

    Ok(CoaRun {
        iterations_used: history.len(),
        best_history: history,
        best,
        best_feasible,
        evaluations_used: evaluations,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::Mutex;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn habitat_at(position: Vec<f64>, fitness: f64) -> Habitat {
        Habitat {
            record: EvaluatedPoint::from_parts(position.clone(), vec![fitness], &[]),
            position,
            egg_count: 2,
            fitness,
        }
    }

    fn rng(seed: u64) -> CoaRng {
        CoaRng::seed_from_u64(seed)
    }

    #[test]
    fn initial_population_respects_paper_parameters() {
        let bounds = Bounds::uniform(2, -5.0, 5.0).unwrap();
        let cfg = CoaConfig::default();
        let (pop, warning) = initialize_population(&sphere, &bounds, &cfg, &mut rng(1)).unwrap();
        assert!(warning.is_none());
        assert_eq!(pop.len(), 5);
        for h in &pop {
            assert!(bounds.contains(&h.position));
            assert!((2..=4).contains(&h.egg_count));
            assert_eq!(h.fitness, sphere(&h.position));
        }
    }

    #[test]
    fn initial_population_is_seed_deterministic() {
        let bounds = Bounds::uniform(3, -1.0, 1.0).unwrap();
        let cfg = CoaConfig::default();
        let a = initialize_population(&sphere, &bounds, &cfg, &mut rng(42)).unwrap();
        let b = initialize_population(&sphere, &bounds, &cfg, &mut rng(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_box_warns_and_repeats() {
        let bounds = Bounds::uniform(2, 1.0, 1.0).unwrap();
        let cfg = CoaConfig::default();
        let (pop, warning) = initialize_population(&sphere, &bounds, &cfg, &mut rng(0)).unwrap();
        assert_eq!(warning, Some(CoaWarning::DegenerateBox));
        assert!(pop.iter().all(|h| h.position == vec![1.0, 1.0]));

        let run = minimize(&sphere, &bounds, &cfg).unwrap();
        assert_eq!(run.best.position, vec![1.0, 1.0]);
        assert_eq!(run.best_history, vec![2.0]);
        assert!(run.warnings.contains(&CoaWarning::DegenerateBox));
    }

    #[test]
    fn radius_formula() {
        let b10 = Bounds::uniform(1, 0.0, 10.0).unwrap();
        assert_eq!(egg_laying_radius(2, 10, &b10, 1.0).unwrap(), vec![2.0]);
        assert_eq!(egg_laying_radius(10, 10, &b10, 1.0).unwrap(), vec![10.0]);
        let b8 = Bounds::uniform(1, 0.0, 8.0).unwrap();
        assert_eq!(egg_laying_radius(4, 16, &b8, 0.5).unwrap(), vec![1.0]);
        assert!(matches!(
            egg_laying_radius(1, 0, &b8, 1.0),
            Err(CoaError::EggCount { .. })
        ));
    }

    #[test]
    fn eggs_stay_within_radius_and_box() {
        let bounds = Bounds::uniform(2, 0.0, 10.0).unwrap();
        let mut h = habitat_at(vec![5.0, 5.0], 0.0);
        h.egg_count = 3;
        let radius = [0.5, 1.5];
        let eggs = lay_eggs(&h, &radius, &bounds, &mut rng(3));
        assert_eq!(eggs.len(), 3);
        for e in &eggs {
            assert!((e[0] - 5.0).abs() <= 0.5 && (e[1] - 5.0).abs() <= 1.5);
        }

        let mut corner = habitat_at(vec![0.0, 10.0], 0.0);
        corner.egg_count = 4;
        for e in lay_eggs(&corner, &[3.0, 3.0], &bounds, &mut rng(4)) {
            assert!(bounds.contains(&e));
        }
    }

    #[test]
    fn goal_with_single_cluster_is_best() {
        let pop = vec![
            habitat_at(vec![1.0, 1.0], 3.0),
            habitat_at(vec![0.0, 2.0], 1.0),
            habitat_at(vec![2.0, 0.0], 2.0),
        ];
        let goal = select_goal(&pop, 1, &mut rng(0));
        assert_eq!(goal.position, vec![0.0, 2.0]);
        assert!(goal.warning.is_none());

        let single = vec![habitat_at(vec![4.0], 9.0)];
        assert_eq!(select_goal(&single, 1, &mut rng(0)).position, vec![4.0]);
    }

    #[test]
    fn goal_picks_cluster_with_lower_mean() {
        // the single best habitat sits in the group with the worse mean
        let pop = vec![
            habitat_at(vec![0.0, 0.0], 0.0),
            habitat_at(vec![0.1, 0.0], 10.0),
            habitat_at(vec![0.0, 0.1], 10.0),
            habitat_at(vec![10.0, 10.0], 2.0),
            habitat_at(vec![10.1, 10.0], 3.0),
            habitat_at(vec![10.0, 10.1], 4.0),
        ];
        for seed in 0..20 {
            let goal = select_goal(&pop, 2, &mut rng(seed));
            assert_eq!(goal.position, vec![10.0, 10.0], "seed {seed}");
        }
    }

    #[test]
    fn too_many_clusters_are_reduced() {
        let pop = vec![habitat_at(vec![0.0], 1.0), habitat_at(vec![1.0], 0.5)];
        let goal = select_goal(&pop, 5, &mut rng(0));
        assert_eq!(
            goal.warning,
            Some(CoaWarning::ClustersReduced {
                requested: 5,
                used: 2
            })
        );
        assert_eq!(goal.position, vec![1.0]);
    }

    #[test]
    fn migration_fixed_point_and_clamp() {
        let bounds = Bounds::uniform(2, -1.0, 1.0).unwrap();
        let goal = [0.3, -0.2];
        assert_eq!(migrate(&goal, &goal, 1.0, &bounds, &mut rng(0)), goal.to_vec());

        for seed in 0..50 {
            let m = migrate(&[-1.0, 1.0], &goal, 5.0, &bounds, &mut rng(seed));
            assert!(bounds.contains(&m));
        }
        // motion_scale 1 never overshoots the goal
        for seed in 0..50 {
            let m = migrate(&[-1.0, 1.0], &goal, 1.0, &bounds, &mut rng(seed));
            assert!(m[0] >= -1.0 && m[0] <= 0.3 && m[1] <= 1.0 && m[1] >= -0.2);
        }
    }

    #[test]
    fn cap_keeps_fittest_with_lexicographic_ties() {
        let pop: Vec<Habitat> = (0..30)
            .map(|i| habitat_at(vec![i as f64], (29 - i) as f64))
            .collect();
        let capped = cap_population(pop, 20);
        assert_eq!(capped.len(), 20);
        assert!(capped.iter().all(|h| h.fitness < 20.0));

        let ties = vec![
            habitat_at(vec![2.0, 0.0], 1.0),
            habitat_at(vec![0.0, 5.0], 1.0),
            habitat_at(vec![0.0, 1.0], 1.0),
        ];
        let capped = cap_population(ties, 2);
        assert_eq!(capped[0].position, vec![0.0, 1.0]);
        assert_eq!(capped[1].position, vec![0.0, 5.0]);

        let small = vec![habitat_at(vec![0.0], 1.0)];
        assert_eq!(cap_population(small.clone(), 20), small);
    }

    #[test]
    fn sphere_with_defaults_converges() {
        let bounds = Bounds::uniform(2, -5.0, 5.0).unwrap();
        for seed in 0..10 {
            let run = minimize(&sphere, &bounds, &CoaConfig::default().with_seed(seed)).unwrap();
            assert!(run.best.fitness <= 1e-3, "seed {seed}: {}", run.best.fitness);
            assert!(run.best.position.iter().all(|v| v.abs() < 0.05));
        }
    }

    #[test]
    fn tracks_best_feasible_separately() {
        use crate::problem::{normalize_constraint, Objective, Problem, Relation, Sense};
        // min x1 s.t. x1 >= 1 with a weak penalty: the penalized optimum lands
        // about 5e-4 outside the constraint.
        let p = Problem::new(
            "edge",
            Bounds::uniform(1, 0.0, 2.0).unwrap(),
            vec![Objective::new(Sense::Minimize, "f", |x| x[0])],
            vec![normalize_constraint(Relation::Ge, |x| x[0], 1.0)],
        )
        .unwrap();
        let cfg = CoaConfig {
            penalty_coefficient: 1e3,
            ..CoaConfig::default()
        };
        let run = minimize(&PenalizedObjective::new(&p, 0, 1e3), p.bounds(), &cfg).unwrap();
        assert!(!run.best.record.feasible);
        let feasible = run.best_feasible.expect("feasible habitats were sampled");
        assert!(feasible.record.feasible);
        assert!(feasible.fitness >= run.best.fitness);
        assert!(feasible.position[0] < 1.05);
    }

    #[test]
    fn shifted_quadratic_converges() {
        let f = |x: &[f64]| (x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2);
        let bounds = Bounds::uniform(2, -5.0, 5.0).unwrap();
        let run = minimize(&f, &bounds, &CoaConfig::default().with_seed(11)).unwrap();
        assert!((run.best.position[0] - 3.0).abs() < 0.05);
        assert!((run.best.position[1] + 1.0).abs() < 0.05);
    }

    #[test]
    fn rejects_bad_config() {
        let bounds = Bounds::uniform(1, 0.0, 1.0).unwrap();
        let bad = [
            CoaConfig { egg_min: 0, ..CoaConfig::default() },
            CoaConfig { egg_min: 5, egg_max: 4, ..CoaConfig::default() },
            CoaConfig { initial_population: 0, ..CoaConfig::default() },
            CoaConfig { clusters: 0, ..CoaConfig::default() },
            CoaConfig { max_population: 3, ..CoaConfig::default() },
            CoaConfig { elr_alpha: 0.0, ..CoaConfig::default() },
            CoaConfig { motion_scale: -1.0, ..CoaConfig::default() },
            CoaConfig { penalty_coefficient: 0.0, ..CoaConfig::default() },
        ];
        for cfg in bad {
            assert!(minimize(&sphere, &bounds, &cfg).is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn every_evaluation_is_inside_the_box() {
        let bounds = Bounds::new(vec![-1.0, 2.0, 0.0], vec![1.0, 3.0, 0.5]).unwrap();
        let seen = Mutex::new(Vec::new());
        let f = |x: &[f64]| {
            seen.lock().unwrap().push(x.to_vec());
            (x[0] - 2.0).powi(2) + x[1] + x[2]
        };
        let run = minimize(&f, &bounds, &CoaConfig { clusters: 3, ..CoaConfig::default() }).unwrap();
        let seen = seen.into_inner().unwrap();
        assert_eq!(seen.len(), run.evaluations_used);
        assert!(seen.iter().all(|x| bounds.contains(x)));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn history_is_monotone_and_deterministic(
            seed in any::<u64>(), cx in -2.0f64..2.0, cy in -2.0f64..2.0, clusters in 1usize..4,
        ) {
            let f = move |x: &[f64]| (x[0] - cx).abs() + (x[1] - cy).powi(2) + (3.0 * x[0]).sin();
            let bounds = Bounds::uniform(2, -3.0, 3.0).unwrap();
            let cfg = CoaConfig { clusters, seed, max_iterations: 40, ..CoaConfig::default() };
            let run = minimize(&f, &bounds, &cfg).unwrap();
            prop_assert!(run.best_history.windows(2).all(|w| w[1] <= w[0]));
            prop_assert_eq!(*run.best_history.last().unwrap(), run.best.fitness);
            prop_assert!(bounds.contains(&run.best.position));
            let again = minimize(&f, &bounds, &cfg).unwrap();
            prop_assert_eq!(run, again);
        }

        #[test]
        fn cap_never_exceeds_max(len in 0usize..60, cap in 1usize..30) {
            let pop: Vec<Habitat> = (0..len).map(|i| habitat_at(vec![(i * 7 % 13) as f64], (i % 5) as f64)).collect();
            let capped = cap_population(pop, cap);
            prop_assert!(capped.len() <= cap);
            prop_assert!(capped.windows(2).all(|w| habitat_order(&w[0], &w[1]) != Ordering::Greater));
        }
    }
}
