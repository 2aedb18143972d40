//! Constrained multi-objective problem model.
//!
//! A [`Problem`] has `n` box-bounded decision variables, `k >= 1` objectives
//! (each minimized or maximized) and `m` inequality constraints stored in the
//! normalized form `c(x) <= 0`. Every downstream component works in
//! minimization orientation; [`Problem::oriented_objective`] flips the sign
//! of maximized objectives while [`evaluate`] always reports raw values.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance applied to every normalized constraint value.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-6;

/// Default quadratic penalty coefficient used for constraint handling.
pub const DEFAULT_PENALTY: f64 = 1e6;

/// Shared scalar function over the decision space.
pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("expected a decision vector of length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("problem `{0}` has no objectives")]
    NoObjectives(String),
    #[error("penalty coefficient must be positive, got {0}")]
    InvalidPenalty(f64),
}

/// Optimization direction of a single objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Maps a raw objective value into minimization orientation.
    #[inline]
    pub fn orient(self, value: f64) -> f64 {
        match self {
            Sense::Minimize => value,
            Sense::Maximize => -value,
        }
    }
}

/// Axis-aligned search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Bounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, ProblemError> {
        if lower.len() != upper.len() {
            return Err(ProblemError::InvalidBounds(format!(
                "lower has {} entries, upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() {
            return Err(ProblemError::InvalidBounds("zero variables".into()));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(ProblemError::InvalidBounds(format!(
                    "non-finite bound on variable {i}"
                )));
            }
            if lo > hi {
                return Err(ProblemError::InvalidBounds(format!(
                    "lower {lo} exceeds upper {hi} on variable {i}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval on each of `n` variables.
    pub fn uniform(n: usize, lower: f64, upper: f64) -> Result<Self, ProblemError> {
        Self::new(vec![lower; n], vec![upper; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (lo, hi))| *v >= *lo && *v <= *hi)
    }

    /// Clamps `x` into the box in place.
    pub fn clamp(&self, x: &mut [f64]) {
        for (v, (lo, hi)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// True when every coordinate has zero width.
    pub fn is_degenerate(&self) -> bool {
        self.lower.iter().zip(&self.upper).all(|(lo, hi)| lo == hi)
    }
}

/// Relational form of a constraint before normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    /// `g(x) <= b`
    Le,
    /// `g(x) >= b`
    Ge,
}

/// Inequality constraint in normalized form `c(x) <= 0`.
#[derive(Clone)]
pub struct Constraint {
    label: String,
    c: ScalarFn,
}

impl Constraint {
    pub fn new<F>(label: impl Into<String>, c: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            c: Arc::new(c),
        }
    }

    pub fn from_shared(label: impl Into<String>, c: ScalarFn) -> Self {
        Self {
            label: label.into(),
            c,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Normalized value; the constraint holds iff this is `<= 0`.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.c)(x)
    }

    #[inline]
    pub fn violation(&self, x: &[f64]) -> f64 {
        self.value(x).max(0.0)
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Constraint")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Builds the normalized constraint for `g(x) <= b` or `g(x) >= b`.
pub fn normalize_constraint<G>(relation: Relation, g: G, b: f64) -> Constraint
where
    G: Fn(&[f64]) -> f64 + Send + Sync + 'static,
{
    match relation {
        Relation::Le => Constraint::new(format!("g(x) <= {b}"), move |x| g(x) - b),
        Relation::Ge => Constraint::new(format!("g(x) >= {b}"), move |x| b - g(x)),
    }
}

/// One objective with its direction.
#[derive(Clone)]
pub struct Objective {
    pub sense: Sense,
    pub label: String,
    f: ScalarFn,
}

impl Objective {
    pub fn new<F>(sense: Sense, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            sense,
            label: label.into(),
            f: Arc::new(f),
        }
    }

    /// Raw value in the objective's own sense.
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn shared_fn(&self) -> ScalarFn {
        Arc::clone(&self.f)
    }
}

impl fmt::Debug for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("sense", &self.sense)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    bounds: Bounds,
    objectives: Vec<Objective>,
    constraints: Vec<Constraint>,
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        bounds: Bounds,
        objectives: Vec<Objective>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, ProblemError> {
        let name = name.into();
        if objectives.is_empty() {
            return Err(ProblemError::NoObjectives(name));
        }
        Ok(Self {
            name,
            bounds,
            objectives,
            constraints,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn num_variables(&self) -> usize {
        self.bounds.dim()
    }

    pub fn num_objectives(&self) -> usize {
        self.objectives.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn senses(&self) -> Vec<Sense> {
        self.objectives.iter().map(|o| o.sense).collect()
    }

    /// Objective `i` in minimization orientation.
    #[inline]
    pub fn oriented_objective(&self, i: usize, x: &[f64]) -> f64 {
        let o = &self.objectives[i];
        o.sense.orient(o.value(x))
    }
}

/// Objective values and constraint violations at one decision vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluatedPoint {
    pub x: Vec<f64>,
    pub objective_values: Vec<f64>,
    pub violations: Vec<f64>,
    pub total_violation: f64,
    pub feasible: bool,
}

impl EvaluatedPoint {
    /// Assembles a point from raw constraint values; violations are clipped
    /// at zero and feasibility uses [`FEASIBILITY_TOLERANCE`] per constraint.
    pub fn from_parts(x: Vec<f64>, objective_values: Vec<f64>, constraint_values: &[f64]) -> Self {
        let violations: Vec<f64> = constraint_values.iter().map(|c| c.max(0.0)).collect();
        let total_violation = violations.iter().sum();
        let feasible = violations
            .iter()
            .all(|v| *v <= FEASIBILITY_TOLERANCE);
        Self {
            x,
            objective_values,
            violations,
            total_violation,
            feasible,
        }
    }
}

/// Evaluates every objective and constraint of `problem` at `x`.
pub fn evaluate(problem: &Problem, x: &[f64]) -> Result<EvaluatedPoint, ProblemError> {
    let n = problem.num_variables();
    if x.len() != n {
        return Err(ProblemError::DimensionMismatch {
            expected: n,
            actual: x.len(),
        });
    }
    let objective_values = problem.objectives.iter().map(|o| o.value(x)).collect();
    let constraint_values: Vec<f64> = problem.constraints.iter().map(|c| c.value(x)).collect();
    Ok(EvaluatedPoint::from_parts(
        x.to_vec(),
        objective_values,
        &constraint_values,
    ))
}

/// Exterior quadratic penalty: `kept + C * sum(violation^2)`.
///
/// `kept_objective_value` must already be in minimization orientation.
pub fn penalized_fitness(
    point: &EvaluatedPoint,
    kept_objective_value: f64,
    penalty_coefficient: f64,
) -> Result<f64, ProblemError> {
    if !(penalty_coefficient > 0.0) || !penalty_coefficient.is_finite() {
        return Err(ProblemError::InvalidPenalty(penalty_coefficient));
    }
    Ok(penalty_unchecked(point, kept_objective_value, penalty_coefficient))
}

#[inline]
pub(crate) fn penalty_unchecked(point: &EvaluatedPoint, kept: f64, coefficient: f64) -> f64 {
    let squared: f64 = point.violations.iter().map(|v| v * v).sum();
    kept + coefficient * squared
}
