//! Pareto dominance, non-dominated filtering and front quality metrics.

use std::cmp::Ordering;

use thiserror::Error;

use crate::problem::Sense;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParetoError {
    #[error("points are not comparable: {0}")]
    Mismatch(String),
    #[error("metric is undefined: {0}")]
    UndefinedMetric(String),
}

/// Objective vector with per-objective senses and an optional decision vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontPoint {
    pub objective_values: Vec<f64>,
    pub senses: Vec<Sense>,
    pub payload: Option<Vec<f64>>,
}

impl FrontPoint {
    pub fn new(objective_values: Vec<f64>, senses: Vec<Sense>) -> Self {
        Self {
            objective_values,
            senses,
            payload: None,
        }
    }

    /// All objectives minimized.
    pub fn minimizing(objective_values: Vec<f64>) -> Self {
        let senses = vec![Sense::Minimize; objective_values.len()];
        Self::new(objective_values, senses)
    }

    pub fn with_payload(mut self, x: Vec<f64>) -> Self {
        self.payload = Some(x);
        self
    }

    fn oriented(&self) -> Vec<f64> {
        self.objective_values
            .iter()
            .zip(&self.senses)
            .map(|(v, s)| s.orient(*v))
            .collect()
    }
}

fn check_compatible(a: &FrontPoint, b: &FrontPoint) -> Result<(), ParetoError> {
    if a.objective_values.len() != b.objective_values.len() {
        return Err(ParetoError::Mismatch(format!(
            "{} vs {} objectives",
            a.objective_values.len(),
            b.objective_values.len()
        )));
    }
    if a.senses != b.senses || a.senses.len() != a.objective_values.len() {
        return Err(ParetoError::Mismatch("senses differ".into()));
    }
    Ok(())
}

/// Dominance on vectors already in minimization orientation.
#[inline]
pub fn dominates_oriented(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// True iff `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &FrontPoint, b: &FrontPoint) -> Result<bool, ParetoError> {
    check_compatible(a, b)?;
    Ok(dominates_oriented(&a.oriented(), &b.oriented()))
}

// `-0.0` and `0.0` compare equal, consistent with dominance.
fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| *o != Ordering::Equal)
        .unwrap_or(Ordering::Equal)
}

/// Indices of the non-dominated rows of `oriented` (minimization
/// orientation). Exact duplicates keep only their first occurrence. The
/// result is in input order.
///
/// Rows are visited in lexicographic order, so a row can only be dominated
/// by a row visited before it; each candidate is tested against the kept set.
pub fn non_dominated_indices(oriented: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..oriented.len()).collect();
    order.sort_by(|&a, &b| lexicographic(&oriented[a], &oriented[b]).then(a.cmp(&b)));

    let two_objectives = oriented.first().is_some_and(|r| r.len() == 2);
    let mut kept: Vec<usize> = Vec::new();
    if two_objectives {
        // sorted by (f1, f2): a row survives iff its f2 beats every earlier f2
        let mut best_second = f64::INFINITY;
        for &i in &order {
            if oriented[i][1] < best_second {
                best_second = oriented[i][1];
                kept.push(i);
            }
        }
    } else {
        for &i in &order {
            let row = &oriented[i];
            let beaten = kept
                .iter()
                .any(|&j| dominates_oriented(&oriented[j], row) || oriented[j] == *row);
            if !beaten {
                kept.push(i);
            }
        }
    }
    kept.sort_unstable();
    kept
}

/// Output order shared by the filter and the front extraction: ascending raw
/// objective values, lexicographically, then input order.
pub fn front_order(values: &[Vec<f64>], indices: &mut [usize]) {
    indices.sort_by(|&a, &b| lexicographic(&values[a], &values[b]).then(a.cmp(&b)));
}

/// Points not dominated by any input point, sorted by the first objective.
pub fn non_dominated_filter(points: &[FrontPoint]) -> Result<Vec<FrontPoint>, ParetoError> {
    if let Some(first) = points.first() {
        for p in &points[1..] {
            check_compatible(first, p)?;
        }
    }
    let oriented: Vec<Vec<f64>> = points.iter().map(FrontPoint::oriented).collect();
    let raw: Vec<Vec<f64>> = points.iter().map(|p| p.objective_values.clone()).collect();
    let mut kept = non_dominated_indices(&oriented);
    front_order(&raw, &mut kept);
    Ok(kept.into_iter().map(|i| points[i].clone()).collect())
}

fn manhattan(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Schott's spacing: sample standard deviation of nearest-neighbour
/// Manhattan distances in objective space.
pub fn spacing(front: &[FrontPoint]) -> Result<f64, ParetoError> {
    if front.len() < 2 {
        return Err(ParetoError::UndefinedMetric(format!(
            "spacing needs at least 2 points, got {}",
            front.len()
        )));
    }
    if front.iter().any(|p| p.objective_values.len() != 2) {
        return Err(ParetoError::UndefinedMetric(
            "spacing is defined for two objectives".into(),
        ));
    }
    let nearest: Vec<f64> = front
        .iter()
        .enumerate()
        .map(|(i, p)| {
            front
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| manhattan(&p.objective_values, &q.objective_values))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let n = nearest.len() as f64;
    let mean = nearest.iter().sum::<f64>() / n;
    let var = nearest.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}

/// Mean Euclidean distance from each front point to its nearest reference point.
pub fn generational_distance(
    front: &[FrontPoint],
    reference: &[FrontPoint],
) -> Result<f64, ParetoError> {
    if front.is_empty() || reference.is_empty() {
        return Err(ParetoError::UndefinedMetric(
            "generational distance needs nonempty front and reference".into(),
        ));
    }
    let k = front[0].objective_values.len();
    if front
        .iter()
        .chain(reference)
        .any(|p| p.objective_values.len() != k)
    {
        return Err(ParetoError::Mismatch("objective counts differ".into()));
    }
    let total: f64 = front
        .iter()
        .map(|p| {
            reference
                .iter()
                .map(|r| euclidean(&p.objective_values, &r.objective_values))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Ok(total / front.len() as f64)
}
