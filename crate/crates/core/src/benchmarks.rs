//! The nine constrained two-objective test problems, each in two variants.
//!
//! `AsPrinted` follows the commonly circulated formulas verbatim,
//! transcription defects included. `Canonical` is the standard literature
//! problem each row transcribes; every correction is listed in the entry's
//! notes. Sweep presets (epsilon range and pace) are shared by both variants.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pareto::{front_order, non_dominated_indices, FrontPoint};
use crate::problem::{evaluate, normalize_constraint, Bounds, Constraint, Objective, Problem, Relation, Sense};

/// Nominal sub-problem count of every preset sweep.
pub const REPORTED_SWEEP_STEPS: usize = 400;

/// Largest lattice the grid oracle will enumerate.
pub const MAX_ORACLE_POINTS: usize = 4_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchmarkError {
    #[error("unknown problem id {0}; valid ids are 1..=9")]
    UnknownId(u8),
    #[error("unknown variant `{0}`; expected `as-printed` or `canonical`")]
    UnknownVariant(String),
    #[error("no reference front for problem {id} ({variant}): {reason}")]
    UnsupportedReference {
        id: u8,
        variant: Variant,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    AsPrinted,
    Canonical,
}

impl Variant {
    pub const ALL: [Variant; 2] = [Variant::AsPrinted, Variant::Canonical];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::AsPrinted => "as-printed",
            Variant::Canonical => "canonical",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = BenchmarkError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "as-printed" => Ok(Variant::AsPrinted),
            "canonical" => Ok(Variant::Canonical),
            other => Err(BenchmarkError::UnknownVariant(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkEntry {
    pub id: u8,
    pub variant: Variant,
    pub problem: Problem,
    pub preset_epsilon_low: f64,
    pub preset_epsilon_high: f64,
    pub preset_pace: f64,
    /// Closed-form front samples, when one is known for this variant.
    pub reference_front: Option<Vec<FrontPoint>>,
    /// A point known to satisfy every constraint (canonical variants).
    pub witness: Option<Vec<f64>>,
    pub notes: Vec<String>,
}

/// One row of [`list_problems`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: u8,
    pub name: String,
    pub objectives: usize,
    pub variables: usize,
    pub constraints: usize,
    pub variants: Vec<Variant>,
    pub epsilon_low: f64,
    pub epsilon_high: f64,
    pub pace: f64,
    pub has_reference_front: bool,
}

const ANALYTIC_SAMPLES: usize = 201;

fn presets(id: u8) -> (f64, f64, f64) {
    match id {
        1 => (0.0, 4.0, 0.01),
        2 => (-1.0, 0.0, 0.0025),
        3 => (-2.0, 2.0, 0.01),
        4 => (0.0, 50.0, 0.125),
        5 => (-11.0, 20.0, 0.0775),
        6 => (0.0, 1.2, 0.008),
        7 => (-25.0, 1.0, 0.065),
        8 => (1.0, 9.0, 0.02),
        9 => (-196.0, 72.0, 2.68),
        _ => unreachable!("id validated by caller"),
    }
}

fn name(id: u8) -> &'static str {
    match id {
        1 => "disk",
        2 => "cubic",
        3 => "cubic-boundary",
        4 => "binh-korn",
        5 => "kursawe",
        6 => "tanaka",
        7 => "fonseca-fleming",
        8 => "constr",
        9 => "srinivas",
        _ => unreachable!("id validated by caller"),
    }
}

fn min(label: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Objective {
    Objective::new(Sense::Minimize, label, f)
}

fn labelled(label: &str, c: Constraint) -> Constraint {
    let f = move |x: &[f64]| c.value(x);
    Constraint::new(label, f)
}

fn le(label: &str, g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, b: f64) -> Constraint {
    labelled(label, normalize_constraint(Relation::Le, g, b))
}

fn ge(label: &str, g: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, b: f64) -> Constraint {
    labelled(label, normalize_constraint(Relation::Ge, g, b))
}

fn bounds(lower: &[f64], upper: &[f64]) -> Bounds {
    Bounds::new(lower.to_vec(), upper.to_vec()).expect("registry boxes are valid")
}

struct Definition {
    bounds: Bounds,
    objectives: Vec<Objective>,
    constraints: Vec<Constraint>,
    witness: Option<Vec<f64>>,
    notes: Vec<String>,
}

fn kursawe_f1(x: &[f64]) -> f64 {
    (0..2)
        .map(|i| -10.0 * (-0.2 * (x[i] * x[i] + x[i + 1] * x[i + 1]).sqrt()).exp())
        .sum()
}

fn tanaka_angle(x: &[f64]) -> f64 {
    // two-argument form: defined at x2 = 0
    (16.0 * x[0].atan2(x[1])).cos()
}

fn define(id: u8, variant: Variant) -> Definition {
    use Variant::*;
    let canonical = variant == Canonical;
    let mut notes = Vec::new();
    let (bounds, objectives, constraints, witness) = match id {
        1 => {
            let circle = |x: &[f64]| (x[1] - 2.0).powi(2) + (x[0] - 2.0).powi(2);
            notes.push("box [0,5]^2 bounds the one-sided domain x1, x2 >= 0".into());
            let constraint = if canonical {
                notes.push(
                    "circle constraint flipped to <= 4 (disk interior); the printed >= makes (0,0) feasible and the front a single point".into(),
                );
                le("(x2-2)^2 + (x1-2)^2 <= 4", circle, 4.0)
            } else {
                ge("(x2-2)^2 + (x1-2)^2 >= 4", circle, 4.0)
            };
            (
                bounds(&[0.0, 0.0], &[5.0, 5.0]),
                vec![min("x1", |x| x[0]), min("x2", |x| x[1])],
                vec![constraint],
                Some(if canonical { vec![2.0, 2.0] } else { vec![0.0, 0.0] }),
            )
        }
        2 => {
            notes.push("box [0,5]^2 adds upper bounds to x1, x2 >= 0".into());
            notes.push("both variants identical".into());
            (
                bounds(&[0.0, 0.0], &[5.0, 5.0]),
                vec![min("2x1 - x2", |x| 2.0 * x[0] - x[1]), min("-x1", |x| -x[0])],
                vec![le("(x1-1)^3 + x2 <= 0", |x| (x[0] - 1.0).powi(3) + x[1], 0.0)],
                Some(vec![0.5, 0.1]),
            )
        }
        3 => {
            notes.push("box x1 in [-1,2], x2 in [-2,2] closes x1 >= -1, x2 <= 2".into());
            let constraint = if canonical {
                notes.push(
                    "printed -x2 - 3x1x1^3 >= 0 read as the cubic boundary x1^3 - 3x1 - x2 <= 0 (region above x2 = x1^3 - 3x1); the opposite orientation makes (-1,-2) dominate the whole box".into(),
                );
                le("x1^3 - 3x1 - x2 <= 0", |x| x[0].powi(3) - 3.0 * x[0] - x[1], 0.0)
            } else {
                notes.push("as printed: x1*x1^3 taken literally as x1^4".into());
                ge("-x2 - 3x1x1^3 >= 0", |x| -x[1] - 3.0 * x[0] * x[0].powi(3), 0.0)
            };
            (
                bounds(&[-1.0, -2.0], &[2.0, 2.0]),
                vec![min("x1", |x| x[0]), min("x2", |x| x[1])],
                vec![constraint],
                Some(if canonical { vec![0.0, 1.0] } else { vec![0.0, -1.0] }),
            )
        }
        4 => {
            notes.push("box x1 in [0,5], x2 in [0,3]".into());
            let f2 = min("(x1-5)^2 + (x2-5)^2", |x| (x[0] - 5.0).powi(2) + (x[1] - 5.0).powi(2));
            let circle = |x: &[f64]| x[1] * x[1] + (x[0] - 5.0).powi(2);
            if canonical {
                notes.push("f1 = 4x1^2 + 4x2^2 (Binh-Korn) replaces the printed linear 4x1 + 4x2".into());
                notes.push("circle constraint oriented <= 25; the second Binh-Korn circle is not used".into());
                (
                    bounds(&[0.0, 0.0], &[5.0, 3.0]),
                    vec![min("4x1^2 + 4x2^2", |x| 4.0 * x[0] * x[0] + 4.0 * x[1] * x[1]), f2],
                    vec![le("x2^2 + (x1-5)^2 <= 25", circle, 25.0)],
                    Some(vec![1.0, 1.0]),
                )
            } else {
                (
                    bounds(&[0.0, 0.0], &[5.0, 3.0]),
                    vec![min("4x1 + 4x2", |x| 4.0 * x[0] + 4.0 * x[1]), f2],
                    vec![ge("x2^2 + (x1-5)^2 >= 25", circle, 25.0)],
                    Some(vec![0.0, 0.0]),
                )
            }
        }
        5 => {
            let f2 = if canonical {
                notes.push("|x_i|^0.8 (standard Kursawe)".into());
                min("sum |x_i|^0.8 + 5 sin(x_i^3)", |x: &[f64]| {
                    x.iter().map(|v| v.abs().powf(0.8) + 5.0 * v.powi(3).sin()).sum()
                })
            } else {
                notes.push("x_i^0.8 evaluated sign-preserving as sign(x)|x|^0.8; non-standard".into());
                min("sum x_i^0.8 + 5 sin(x_i^3)", |x: &[f64]| {
                    x.iter()
                        .map(|v| v.signum() * v.abs().powf(0.8) + 5.0 * v.powi(3).sin())
                        .sum()
                })
            };
            notes.push("unconstrained; box [-5,5]^3".into());
            (
                bounds(&[-5.0; 3], &[5.0; 3]),
                vec![min("sum -10 exp(-0.2 sqrt(x_i^2 + x_{i+1}^2))", kursawe_f1), f2],
                vec![],
                Some(vec![0.0; 3]),
            )
        }
        6 => {
            notes.push("box [0,pi]^2; arctan(x1/x2) evaluated as atan2(x1, x2)".into());
            if canonical {
                notes.push("Tanaka constraints replace the garbled printed row".into());
                (
                    bounds(&[0.0, 0.0], &[PI, PI]),
                    vec![min("x1", |x| x[0]), min("x2", |x| x[1])],
                    vec![
                        ge(
                            "x1^2 + x2^2 - 1 - 0.1 cos(16 atan(x1/x2)) >= 0",
                            |x| x[0] * x[0] + x[1] * x[1] - 1.0 - 0.1 * tanaka_angle(x),
                            0.0,
                        ),
                        le(
                            "(x1-0.5)^2 + (x2-0.5)^2 <= 0.5",
                            |x| (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2),
                            0.5,
                        ),
                    ],
                    Some(vec![0.9, 0.9]),
                )
            } else {
                notes.push(
                    "likely infeasible in practice: x2 >= pi leaves only the top edge of the box".into(),
                );
                (
                    bounds(&[0.0, 0.0], &[PI, PI]),
                    vec![min("x1", |x| x[0]), min("x2", |x| x[1])],
                    vec![
                        Constraint::new("cos(16 atan(x1/x2)) >= 0.1 - 0.1x2^2 + x1^2", |x: &[f64]| {
                            0.1 - 0.1 * x[1] * x[1] + x[0] * x[0] - tanaka_angle(x)
                        }),
                        ge(
                            "(x2-0.5)^2 + (x1-0.5)^2 >= -0.5",
                            |x| (x[1] - 0.5).powi(2) + (x[0] - 0.5).powi(2),
                            -0.5,
                        ),
                        ge("x2 >= pi", |x| x[1], PI),
                    ],
                    None,
                )
            }
        }
        7 => {
            notes.push("Fonseca-Fleming with n = 2; both variants identical".into());
            let shift = 1.0 / 2f64.sqrt();
            (
                bounds(&[-4.0, -4.0], &[4.0, 4.0]),
                vec![
                    min("1 - exp(-sum (x_i - 1/sqrt(n))^2)", move |x: &[f64]| {
                        1.0 - (-x.iter().map(|v| (v - shift).powi(2)).sum::<f64>()).exp()
                    }),
                    min("1 - exp(-sum (x_i + 1/sqrt(n))^2)", move |x: &[f64]| {
                        1.0 - (-x.iter().map(|v| (v + shift).powi(2)).sum::<f64>()).exp()
                    }),
                ],
                vec![],
                Some(vec![0.0, 0.0]),
            )
        }
        8 => {
            let second = if canonical {
                notes.push("second constraint 9x1 - x2 >= 1 (CONSTR); printed row repeats 9x1 + x2".into());
                ge("9x1 - x2 >= 1", |x| 9.0 * x[0] - x[1], 1.0)
            } else {
                ge("9x1 + x2 >= 1", |x| 9.0 * x[0] + x[1], 1.0)
            };
            (
                bounds(&[0.1, 0.0], &[1.0, 5.0]),
                vec![min("x1", |x| x[0]), min("(1 + x2)/x1", |x| (1.0 + x[1]) / x[0])],
                vec![ge("9x1 + x2 >= 6", |x| 9.0 * x[0] + x[1], 6.0), second],
                Some(vec![0.5, 2.0]),
            )
        }
        9 => {
            notes.push("box [-20,20]^2".into());
            notes.push("f2 = 9x1 - (x2-1)^2: the printed line wraps the (x2-1)^2 term before `min f2`".into());
            let f1 = min("(x1-2)^2 + (x2-1)^2 + 2", |x| {
                (x[0] - 2.0).powi(2) + (x[1] - 1.0).powi(2) + 2.0
            });
            let f2 = min("9x1 - (x2-1)^2", |x| 9.0 * x[0] - (x[1] - 1.0).powi(2));
            let radius = |x: &[f64]| x[1] * x[1] + x[0] * x[0];
            if canonical {
                notes.push("Srinivas constraints x1^2 + x2^2 <= 225 and x1 - 3x2 <= -10".into());
                (
                    bounds(&[-20.0, -20.0], &[20.0, 20.0]),
                    vec![f1, f2],
                    vec![
                        le("x1^2 + x2^2 <= 225", radius, 225.0),
                        le("x1 - 3x2 <= -10", |x| x[0] - 3.0 * x[1], -10.0),
                    ],
                    Some(vec![-2.5, 5.0]),
                )
            } else {
                (
                    bounds(&[-20.0, -20.0], &[20.0, 20.0]),
                    vec![f1, f2],
                    vec![
                        ge("3x2 - x1 >= -10", |x| 3.0 * x[1] - x[0], -10.0),
                        ge("x2^2 + x1^2 >= 225", radius, 225.0),
                    ],
                    Some(vec![20.0, 20.0]),
                )
            }
        }
        _ => unreachable!("id validated by caller"),
    };
    Definition {
        bounds,
        objectives,
        constraints,
        witness,
        notes,
    }
}

fn check_id(id: u8) -> Result<(), BenchmarkError> {
    if (1..=9).contains(&id) {
        Ok(())
    } else {
        Err(BenchmarkError::UnknownId(id))
    }
}

/// Builds one registry entry.
pub fn get_problem(id: u8, variant: Variant) -> Result<BenchmarkEntry, BenchmarkError> {
    check_id(id)?;
    let Definition {
        bounds,
        objectives,
        constraints,
        witness,
        mut notes,
    } = define(id, variant);
    let problem = Problem::new(
        format!("problem-{id}-{}", name(id)),
        bounds,
        objectives,
        constraints,
    )
    .expect("registry problems have objectives");

    if let Some(w) = &witness {
        let point = evaluate(&problem, w).expect("witness has the problem dimension");
        assert!(point.feasible, "witness {w:?} infeasible for problem {id} {variant}");
        notes.push(format!("feasible witness {w:?}"));
    }
    assert!(
        variant == Variant::AsPrinted || witness.is_some(),
        "canonical entries carry a witness"
    );

    let (low, high, pace) = presets(id);
    let reference_front = analytic_front(id, variant, ANALYTIC_SAMPLES);
    Ok(BenchmarkEntry {
        id,
        variant,
        problem,
        preset_epsilon_low: low,
        preset_epsilon_high: high,
        preset_pace: pace,
        reference_front,
        witness,
        notes,
    })
}

pub fn list_problems() -> Vec<CatalogEntry> {
    (1..=9)
        .map(|id| {
            let entry = get_problem(id, Variant::Canonical).expect("ids 1..=9 exist");
            CatalogEntry {
                id,
                name: name(id).to_string(),
                objectives: entry.problem.num_objectives(),
                variables: entry.problem.num_variables(),
                constraints: entry.problem.num_constraints(),
                variants: Variant::ALL.to_vec(),
                epsilon_low: entry.preset_epsilon_low,
                epsilon_high: entry.preset_epsilon_high,
                pace: entry.preset_pace,
                has_reference_front: entry.reference_front.is_some(),
            }
        })
        .collect()
}

fn sampled(samples: usize, lo: f64, hi: f64, point: impl Fn(f64) -> (f64, f64)) -> Vec<FrontPoint> {
    let mut front: Vec<FrontPoint> = (0..samples)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let (f1, f2) = point(t);
            FrontPoint::minimizing(vec![f1, f2])
        })
        .collect();
    front.sort_by(|a, b| a.objective_values[0].total_cmp(&b.objective_values[0]));
    front
}

/// Closed-form fronts of the canonical problems 1, 2, 3 and 8.
fn analytic_front(id: u8, variant: Variant, samples: usize) -> Option<Vec<FrontPoint>> {
    if samples < 2 {
        return None;
    }
    let canonical = variant == Variant::Canonical;
    match id {
        // lower-left quarter of the disk, parametrized by f2
        1 if canonical => Some(sampled(samples, 0.0, 2.0, |f2| {
            (2.0 - (4.0 - (f2 - 2.0).powi(2)).max(0.0).sqrt(), f2)
        })),
        // x2 at its cubic cap (1 - x1)^3, x1 in [0, 1]
        2 => Some(sampled(samples, 0.0, 1.0, |x1| {
            (2.0 * x1 - (1.0 - x1).powi(3), -x1)
        })),
        3 if canonical => Some(sampled(samples, -1.0, 1.0, |x1| (x1, x1.powi(3) - 3.0 * x1))),
        // x2 = max(0, 6 - 9x1) for x1 in [7/18, 1]
        8 if canonical => Some(sampled(samples, 7.0 / 18.0, 1.0, |x1| {
            (x1, (1.0 + (6.0 - 9.0 * x1).max(0.0)) / x1)
        })),
        _ => None,
    }
}

/// Reference front for acceptance checks.
///
/// Where a closed form exists `samples` is the number of points along it.
/// Otherwise `samples` is the lattice resolution per axis: every lattice
/// point of the box is evaluated, infeasible ones are dropped and the rest
/// reduced to their non-dominated subset.
pub fn reference_front(id: u8, variant: Variant, samples: usize) -> Result<Vec<FrontPoint>, BenchmarkError> {
    check_id(id)?;
    let unsupported = |reason: String| BenchmarkError::UnsupportedReference { id, variant, reason };
    if samples < 2 {
        return Err(unsupported(format!("need at least 2 samples, got {samples}")));
    }
    if let Some(front) = analytic_front(id, variant, samples) {
        return Ok(front);
    }
    let entry = get_problem(id, variant)?;
    let problem = &entry.problem;
    let n = problem.num_variables();
    let total = (samples as u128).pow(n as u32);
    if total > MAX_ORACLE_POINTS as u128 {
        return Err(unsupported(format!(
            "{samples}^{n} lattice points exceed the oracle budget of {MAX_ORACLE_POINTS}"
        )));
    }
    let b = problem.bounds();
    let axis = |d: usize, i: usize| b.lower()[d] + b.width(d) * i as f64 / (samples - 1) as f64;
    let mut values: Vec<Vec<f64>> = Vec::new();
    let mut x = vec![0.0; n];
    for flat in 0..total as usize {
        let mut rest = flat;
        for (d, slot) in x.iter_mut().enumerate() {
            *slot = axis(d, rest % samples);
            rest /= samples;
        }
        let point = evaluate(problem, &x).expect("lattice has the problem dimension");
        if point.feasible {
            values.push(point.objective_values);
        }
    }
    if values.is_empty() {
        return Err(unsupported("no feasible lattice point".into()));
    }
    let mut kept = non_dominated_indices(&values);
    front_order(&values, &mut kept);
    Ok(kept
        .into_iter()
        .map(|i| FrontPoint::minimizing(values[i].clone()))
        .collect())
}
