//! Problem definitions, evaluated solutions and constraint-violation bookkeeping.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equality-constraint relaxation used when nothing else is configured.
pub const DEFAULT_DELTA: f64 = 1e-4;

/// Raw output of a problem evaluator for one decision vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub objectives: Vec<f64>,
    pub inequality: Vec<f64>,
    pub equality: Vec<f64>,
}

impl Evaluation {
    pub fn new(objectives: Vec<f64>, inequality: Vec<f64>, equality: Vec<f64>) -> Self {
        Self {
            objectives,
            inequality,
            equality,
        }
    }
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> Evaluation + Send + Sync>;

/// A box-constrained problem with `n_obj` objectives, `n_ineq` constraints of the
/// form `g(x) <= 0` and `n_eq` constraints of the form `h(x) = 0`.
///
/// The evaluator must be pure; it is shared between threads.
#[derive(Clone)]
pub struct ProblemDefinition {
    name: String,
    n_obj: usize,
    n_ineq: usize,
    n_eq: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    evaluator: Evaluator,
}

impl ProblemDefinition {
    pub fn new(
        name: impl Into<String>,
        n_obj: usize,
        n_ineq: usize,
        n_eq: usize,
        lower: Vec<f64>,
        upper: Vec<f64>,
        evaluator: Evaluator,
    ) -> Result<Self> {
        let name = name.into();
        if n_obj < 2 {
            return Err(Error::Contract(format!(
                "{name}: at least two objectives required, got {n_obj}"
            )));
        }
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Structural(format!(
                "{name}: bound vectors must be nonempty and of equal length ({} vs {})",
                lower.len(),
                upper.len()
            )));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Contract(format!(
                    "{name}: invalid bounds [{lo}, {hi}] for variable {j}"
                )));
            }
        }
        Ok(Self {
            name,
            n_obj,
            n_ineq,
            n_eq,
            lower,
            upper,
            evaluator,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_obj(&self) -> usize {
        self.n_obj
    }

    pub fn n_var(&self) -> usize {
        self.lower.len()
    }

    pub fn n_ineq(&self) -> usize {
        self.n_ineq
    }

    pub fn n_eq(&self) -> usize {
        self.n_eq
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn bounds(&self) -> Bounds<'_> {
        Bounds {
            lower: &self.lower,
            upper: &self.upper,
        }
    }

    /// Calls the evaluator without any checking or counting.
    pub fn evaluate_raw(&self, x: &[f64]) -> Evaluation {
        (self.evaluator)(x)
    }
}

impl fmt::Debug for ProblemDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemDefinition")
            .field("name", &self.name)
            .field("n_obj", &self.n_obj)
            .field("n_var", &self.n_var())
            .field("n_ineq", &self.n_ineq)
            .field("n_eq", &self.n_eq)
            .finish_non_exhaustive()
    }
}

/// Borrowed view of box bounds.
#[derive(Clone, Copy, Debug)]
pub struct Bounds<'a> {
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

impl Bounds<'_> {
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.len()
            && x.iter()
                .zip(self.lower.iter().zip(self.upper))
                .all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }
}

/// An evaluated candidate. Immutable once built; variation produces new values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub x: Vec<f64>,
    pub objectives: Vec<f64>,
    pub inequality: Vec<f64>,
    pub equality: Vec<f64>,
    /// Aggregate constraint violation, zero iff feasible.
    pub violation: f64,
}

impl Solution {
    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }

    /// The same solution with its violation recomputed under another relaxation.
    pub fn rescored(&self, delta: f64) -> Result<Solution> {
        let violation = constraint_violation(&self.inequality, &self.equality, delta)?;
        Ok(Solution {
            violation,
            ..self.clone()
        })
    }
}

/// Sum of per-constraint violations: `max(0, g)` for inequalities and
/// `max(0, |h| - delta)` for equalities.
pub fn constraint_violation(inequality: &[f64], equality: &[f64], delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Contract(format!(
            "equality relaxation must be positive and finite, got {delta}"
        )));
    }
    let mut total = 0.0;
    for (index, g) in inequality.iter().enumerate() {
        if !g.is_finite() {
            return Err(Error::NonFinite {
                problem: String::new(),
                kind: "inequality constraint",
                index,
            });
        }
        total += g.max(0.0);
    }
    for (index, h) in equality.iter().enumerate() {
        if !h.is_finite() {
            return Err(Error::NonFinite {
                problem: String::new(),
                kind: "equality constraint",
                index,
            });
        }
        total += (h.abs() - delta).max(0.0);
    }
    Ok(total)
}

/// Evaluates `x` and bumps `evaluations` by one.
///
/// `x` must already lie inside the problem bounds; nothing is clamped here.
pub fn evaluate(
    problem: &ProblemDefinition,
    x: &[f64],
    delta: f64,
    evaluations: &mut u64,
) -> Result<Solution> {
    if x.len() != problem.n_var() {
        return Err(Error::Structural(format!(
            "{}: decision vector has length {}, expected {}",
            problem.name,
            x.len(),
            problem.n_var()
        )));
    }
    if let Some(j) = x
        .iter()
        .zip(problem.lower.iter().zip(&problem.upper))
        .position(|(v, (lo, hi))| !(*lo <= *v && *v <= *hi))
    {
        return Err(Error::Contract(format!(
            "{}: variable {j} = {} outside [{}, {}]",
            problem.name, x[j], problem.lower[j], problem.upper[j]
        )));
    }

    let Evaluation {
        objectives,
        inequality,
        equality,
    } = problem.evaluate_raw(x);
    *evaluations += 1;

    if objectives.len() != problem.n_obj
        || inequality.len() != problem.n_ineq
        || equality.len() != problem.n_eq
    {
        return Err(Error::Structural(format!(
            "{}: evaluator returned ({}, {}, {}) values, expected ({}, {}, {})",
            problem.name,
            objectives.len(),
            inequality.len(),
            equality.len(),
            problem.n_obj,
            problem.n_ineq,
            problem.n_eq
        )));
    }
    if let Some(index) = objectives.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            problem: problem.name.clone(),
            kind: "objective",
            index,
        });
    }
    let violation = constraint_violation(&inequality, &equality, delta).map_err(|e| match e {
        Error::NonFinite { kind, index, .. } => Error::NonFinite {
            problem: problem.name.clone(),
            kind,
            index,
        },
        other => other,
    })?;

    Ok(Solution {
        x: x.to_vec(),
        objectives,
        inequality,
        equality,
        violation,
    })
}

/// Objectives with the violation appended as an extra coordinate.
pub fn transformed_objectives(sol: &Solution) -> Vec<f64> {
    let mut out = Vec::with_capacity(sol.objectives.len() + 1);
    out.extend_from_slice(&sol.objectives);
    out.push(sol.violation);
    out
}

/// Run parameters shared by every algorithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    /// Population size, also the size of the reported solution set.
    pub n: usize,
    pub max_fes: u64,
    pub delta: f64,
    pub pc: f64,
    pub pm: f64,
    pub eta_c: f64,
    pub eta_m: f64,
    pub seed: u64,
}

impl AlgorithmConfig {
    /// Usual operator settings: SBX with probability 1, mutation rate `1/D`,
    /// both distribution indices 20.
    pub fn for_problem(problem: &ProblemDefinition) -> Self {
        Self {
            n: 100,
            max_fes: 60_000,
            delta: DEFAULT_DELTA,
            pc: 1.0,
            pm: 1.0 / problem.n_var() as f64,
            eta_c: 20.0,
            eta_m: 20.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || !self.n.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "population size must be even and at least 4, got {}",
                self.n
            )));
        }
        if self.max_fes < self.n as u64 {
            return Err(Error::Config(format!(
                "evaluation budget {} is smaller than the population size {}",
                self.max_fes, self.n
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        for (name, p) in [("pc", self.pc), ("pm", self.pm)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
            }
        }
        for (name, eta) in [("eta_c", self.eta_c), ("eta_m", self.eta_m)] {
            if !(eta >= 0.0 && eta.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be a nonnegative finite number, got {eta}"
                )));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ProblemDefinition {
        ProblemDefinition::new(
            "square",
            2,
            1,
            1,
            vec![0.0, 0.0],
            vec![1.0, 1.0],
            Arc::new(|x: &[f64]| {
                Evaluation::new(vec![x[0], x[1]], vec![x[0] - 0.5], vec![x[1] - 0.5])
            }),
        )
        .unwrap()
    }

    #[test]
    fn violation_examples() {
        assert_eq!(
            constraint_violation(&[-1.0, -2.0], &[], DEFAULT_DELTA).unwrap(),
            0.0
        );
        assert_eq!(
            constraint_violation(&[0.5, -1.0], &[], DEFAULT_DELTA).unwrap(),
            0.5
        );
        let v = constraint_violation(&[], &[0.001], 1e-4).unwrap();
        assert!((v - 0.0009).abs() < 1e-15);
        assert_eq!(constraint_violation(&[], &[-5e-5], 1e-4).unwrap(), 0.0);
    }

    #[test]
    fn violation_rejects_non_finite() {
        match constraint_violation(&[0.0, f64::NAN], &[], 1e-4) {
            Err(Error::NonFinite { index, kind, .. }) => {
                assert_eq!(index, 1);
                assert_eq!(kind, "inequality constraint");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            constraint_violation(&[], &[f64::INFINITY], 1e-4),
            Err(Error::NonFinite { index: 0, .. })
        ));
        assert!(constraint_violation(&[], &[], 0.0).is_err());
    }

    #[test]
    fn evaluate_counts_and_checks_bounds() {
        let p = square();
        let mut fes = 0;
        let s = evaluate(&p, &[0.75, 0.5], DEFAULT_DELTA, &mut fes).unwrap();
        assert_eq!(fes, 1);
        assert_eq!(s.violation, 0.25);
        assert!(!s.is_feasible());
        assert!(matches!(
            evaluate(&p, &[1.5, 0.5], DEFAULT_DELTA, &mut fes),
            Err(Error::Contract(_))
        ));
        assert!(matches!(
            evaluate(&p, &[0.5], DEFAULT_DELTA, &mut fes),
            Err(Error::Structural(_))
        ));
        assert_eq!(fes, 1);
    }

    #[test]
    fn evaluate_rejects_wrong_arity() {
        let p = ProblemDefinition::new(
            "broken",
            2,
            1,
            0,
            vec![0.0],
            vec![1.0],
            Arc::new(|x: &[f64]| Evaluation::new(vec![x[0], x[0]], vec![], vec![])),
        )
        .unwrap();
        let mut fes = 0;
        assert!(matches!(
            evaluate(&p, &[0.5], DEFAULT_DELTA, &mut fes),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn rescoring_changes_only_violation() {
        let p = square();
        let mut fes = 0;
        let s = evaluate(&p, &[0.25, 0.5005], 1e-4, &mut fes).unwrap();
        assert!(s.violation > 0.0);
        let relaxed = s.rescored(1e-3).unwrap();
        assert_eq!(relaxed.violation, 0.0);
        assert_eq!(relaxed.objectives, s.objectives);
    }

    #[test]
    fn transformed_appends_violation() {
        let s = Solution {
            x: vec![0.0],
            objectives: vec![1.0, 2.0],
            inequality: vec![],
            equality: vec![],
            violation: 3.5,
        };
        assert_eq!(transformed_objectives(&s), vec![1.0, 2.0, 3.5]);
        let feasible = Solution {
            violation: 0.0,
            ..s
        };
        assert_eq!(transformed_objectives(&feasible), vec![1.0, 2.0, 0.0]);
    }

    #[test]
    fn problem_rejects_bad_bounds() {
        let eval: Evaluator = Arc::new(|_: &[f64]| Evaluation::new(vec![0.0, 0.0], vec![], vec![]));
        assert!(ProblemDefinition::new("p", 2, 0, 0, vec![1.0], vec![1.0], eval.clone()).is_err());
        assert!(ProblemDefinition::new("p", 1, 0, 0, vec![0.0], vec![1.0], eval.clone()).is_err());
        assert!(ProblemDefinition::new("p", 2, 0, 0, vec![], vec![], eval).is_err());
    }

    #[test]
    fn config_validation() {
        let p = square();
        let mut c = AlgorithmConfig::for_problem(&p);
        assert!(c.validate().is_ok());
        assert_eq!(c.pm, 0.5);
        c.n = 7;
        assert!(c.validate().is_err());
        c.n = 100;
        c.max_fes = 50;
        assert!(c.validate().is_err());
        c.max_fes = 1000;
        c.pc = 1.5;
        assert!(c.validate().is_err());
    }
}
