//! Main loops: ATM-R and the NSGA-II baseline with constrained dominance.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate, AlgorithmConfig, ProblemDefinition, Solution};
use crate::operators::{distinct_pair, mating_selection, population_diversity, reproduce, Phase};
use crate::ranking::{
    cdp_compare, cdp_dominates, crowding_distance, pareto_dominates, sort_by_relation,
};
use crate::selection::{
    crowded_truncation, nsga2_truncate, select_semifeasible_phase, transformed_reference_select,
};

/// Generator used for every run; portable across platforms and releases.
pub type RunRng = ChaCha8Rng;

pub fn run_rng(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Atmr,
    Nsga2Cdp,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Atmr => "atmr",
            Algorithm::Nsga2Cdp => "nsga2_cdp",
        }
    }

    pub fn run(&self, problem: &ProblemDefinition, config: &AlgorithmConfig) -> Result<RunResult> {
        match self {
            Algorithm::Atmr => run_atmr(problem, config),
            Algorithm::Nsga2Cdp => run_nsga2_cdp(problem, config),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atmr" => Ok(Algorithm::Atmr),
            "nsga2_cdp" => Ok(Algorithm::Nsga2Cdp),
            other => Err(Error::Config(format!(
                "unknown algorithm `{other}` (expected atmr or nsga2_cdp)"
            ))),
        }
    }
}

/// Population census after one generation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub fes: u64,
    pub phase: Phase,
    pub feasible: usize,
    pub population: usize,
    pub best_violation: f64,
    pub mean_violation: f64,
}

impl GenerationRecord {
    fn census(generation: usize, fes: u64, pop: &[Solution]) -> Self {
        let feasible = pop.iter().filter(|s| s.is_feasible()).count();
        let best = pop
            .iter()
            .map(|s| s.violation)
            .fold(f64::INFINITY, f64::min);
        let mean = pop.iter().map(|s| s.violation).sum::<f64>() / pop.len() as f64;
        Self {
            generation,
            fes,
            phase: Phase::of(pop).expect("population is never empty"),
            feasible,
            population: pop.len(),
            best_violation: best,
            mean_violation: mean,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub problem: String,
    pub algorithm: Algorithm,
    pub seed: u64,
    pub config: AlgorithmConfig,
    /// Total function evaluations spent.
    pub fes: u64,
    pub trace: Vec<GenerationRecord>,
    /// Final population truncated to `config.n`.
    pub final_population: Vec<Solution>,
    /// Population as the loop left it; may hold up to `2n` solutions for ATM-R.
    pub raw_population: Vec<Solution>,
}

impl RunResult {
    pub fn feasible_objectives(&self) -> Vec<Vec<f64>> {
        self.final_population
            .iter()
            .filter(|s| s.is_feasible())
            .map(|s| s.objectives.clone())
            .collect()
    }
}

fn in_generation<T>(generation: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Generation {
        generation,
        source: Box::new(e),
    })
}

fn initial_population<R: Rng + ?Sized>(
    problem: &ProblemDefinition,
    config: &AlgorithmConfig,
    fes: &mut u64,
    rng: &mut R,
) -> Result<Vec<Solution>> {
    let (lo, hi) = (problem.lower(), problem.upper());
    let xs: Vec<Vec<f64>> = (0..config.n)
        .map(|_| {
            lo.iter()
                .zip(hi)
                .map(|(l, h)| l + rng.gen::<f64>() * (h - l))
                .collect()
        })
        .collect();
    in_generation(0, evaluate_all(problem, &xs, config.delta, fes))
}

fn evaluate_all(
    problem: &ProblemDefinition,
    xs: &[Vec<f64>],
    delta: f64,
    fes: &mut u64,
) -> Result<Vec<Solution>> {
    xs.iter()
        .map(|x| evaluate(problem, x, delta, fes))
        .collect()
}

fn pick(q: &[Solution], idx: &[usize]) -> Vec<Solution> {
    idx.iter().map(|&i| q[i].clone()).collect()
}

/// Runs ATM-R with the generator seeded from `config.seed`.
pub fn run_atmr(problem: &ProblemDefinition, config: &AlgorithmConfig) -> Result<RunResult> {
    run_atmr_with(problem, config, &mut run_rng(config.seed))
}

/// ATM-R main loop.
///
/// Each generation: classify the parents' phase, pick `n` mates with the
/// phase-aware tournament, produce `n` offspring with SBX and polynomial
/// mutation, then choose survivors from parents plus offspring according to
/// the phase of that union. The generator is consumed in the order
/// initialization, then per generation mating, variation, selection.
pub fn run_atmr_with<R: Rng + ?Sized>(
    problem: &ProblemDefinition,
    config: &AlgorithmConfig,
    rng: &mut R,
) -> Result<RunResult> {
    config.validate()?;
    let n = config.n;
    let mut fes = 0u64;
    let mut pop = initial_population(problem, config, &mut fes, rng)?;
    let mut trace = vec![GenerationRecord::census(0, fes, &pop)];

    let mut generation = 0;
    while fes < config.max_fes {
        generation += 1;
        let phase = Phase::of(&pop)?;
        let diversity = population_diversity(&pop, phase);
        let mates = in_generation(
            generation,
            mating_selection(&pop, n, phase, &diversity, rng),
        )?;
        let parents: Vec<&[f64]> = mates.iter().map(|&i| pop[i].x.as_slice()).collect();
        let kids = reproduce(
            &parents,
            problem.bounds(),
            config.pc,
            config.pm,
            config.eta_c,
            config.eta_m,
            rng,
        );
        let offspring = in_generation(
            generation,
            evaluate_all(problem, &kids, config.delta, &mut fes),
        )?;

        let q: Vec<Solution> = pop.iter().chain(&offspring).cloned().collect();
        let all: Vec<usize> = (0..q.len()).collect();
        let survivors = match Phase::of(&q)? {
            Phase::Infeasible => transformed_reference_select(&q, &all, n, rng),
            Phase::SemiFeasible => {
                select_semifeasible_phase(&pop, &offspring, n, fes, config.max_fes, rng)
                    .map(|s| s.selected)
            }
            Phase::Feasible => nsga2_truncate(&q, &all, n, rng),
        };
        pop = pick(&q, &in_generation(generation, survivors)?);
        trace.push(GenerationRecord::census(generation, fes, &pop));
    }

    let final_population = finalize(&pop, n, rng)?;
    Ok(RunResult {
        problem: problem.name().to_string(),
        algorithm: Algorithm::Atmr,
        seed: config.seed,
        config: config.clone(),
        fes,
        trace,
        final_population,
        raw_population: pop,
    })
}

/// Cuts an oversized population back to `n`: NSGA-II if all feasible,
/// otherwise the transformed-space reference-point selection.
fn finalize<R: Rng + ?Sized>(pop: &[Solution], n: usize, rng: &mut R) -> Result<Vec<Solution>> {
    if pop.len() <= n {
        return Ok(pop.to_vec());
    }
    let all: Vec<usize> = (0..pop.len()).collect();
    let idx = match Phase::of(pop)? {
        Phase::Feasible => nsga2_truncate(pop, &all, n, rng)?,
        _ => transformed_reference_select(pop, &all, n, rng)?,
    };
    Ok(pick(pop, &idx))
}

/// Dominance relation driving the NSGA-II loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dominance {
    /// Constrained dominance: feasibility first, then violation, then Pareto.
    Constrained,
    /// Plain Pareto dominance on objectives; constraints ignored.
    Pareto,
}

impl Dominance {
    fn dominates(self, a: &Solution, b: &Solution) -> bool {
        match self {
            Dominance::Constrained => cdp_dominates(a, b),
            Dominance::Pareto => pareto_dominates(&a.objectives, &b.objectives),
        }
    }

    fn compare(self, a: &Solution, b: &Solution) -> Ordering {
        match self {
            Dominance::Constrained => cdp_compare(a, b),
            Dominance::Pareto => {
                if pareto_dominates(&a.objectives, &b.objectives) {
                    Ordering::Less
                } else if pareto_dominates(&b.objectives, &a.objectives) {
                    Ordering::Greater
                } else {
                    Ordering::Equal
                }
            }
        }
    }
}

pub fn run_nsga2_cdp(problem: &ProblemDefinition, config: &AlgorithmConfig) -> Result<RunResult> {
    run_nsga2_with(
        problem,
        config,
        Dominance::Constrained,
        &mut run_rng(config.seed),
    )
}

/// Crowding distance of every member within its own front.
fn front_crowding(pop: &[Solution], fronts: &[Vec<usize>]) -> Vec<f64> {
    let mut cd = vec![0.0; pop.len()];
    for front in fronts {
        let pts: Vec<Vec<f64>> = front.iter().map(|&i| pop[i].objectives.clone()).collect();
        for (k, d) in crowding_distance(&pts).into_iter().enumerate() {
            cd[front[k]] = d;
        }
    }
    cd
}

/// Generational NSGA-II under the given dominance relation. Mates are chosen by
/// binary tournament on the relation with crowding distance as tie-break.
pub fn run_nsga2_with<R: Rng + ?Sized>(
    problem: &ProblemDefinition,
    config: &AlgorithmConfig,
    dominance: Dominance,
    rng: &mut R,
) -> Result<RunResult> {
    config.validate()?;
    let n = config.n;
    let mut fes = 0u64;
    let mut pop = initial_population(problem, config, &mut fes, rng)?;
    let partition = sort_by_relation(pop.len(), |i, j| dominance.dominates(&pop[i], &pop[j]));
    let mut crowding = front_crowding(&pop, &partition.fronts);
    let mut trace = vec![GenerationRecord::census(0, fes, &pop)];

    let mut generation = 0;
    while fes < config.max_fes {
        generation += 1;
        let mates: Vec<usize> = (0..n)
            .map(|_| {
                let (a, b) = distinct_pair(pop.len(), rng);
                match dominance.compare(&pop[a], &pop[b]) {
                    Ordering::Less => a,
                    Ordering::Greater => b,
                    Ordering::Equal => {
                        if crowding[a] > crowding[b] {
                            a
                        } else if crowding[b] > crowding[a] {
                            b
                        } else if rng.gen::<bool>() {
                            a
                        } else {
                            b
                        }
                    }
                }
            })
            .collect();
        let parents: Vec<&[f64]> = mates.iter().map(|&i| pop[i].x.as_slice()).collect();
        let kids = reproduce(
            &parents,
            problem.bounds(),
            config.pc,
            config.pm,
            config.eta_c,
            config.eta_m,
            rng,
        );
        let offspring = in_generation(
            generation,
            evaluate_all(problem, &kids, config.delta, &mut fes),
        )?;

        let q: Vec<Solution> = pop.into_iter().chain(offspring).collect();
        let all: Vec<usize> = (0..q.len()).collect();
        let partition = sort_by_relation(q.len(), |i, j| dominance.dominates(&q[i], &q[j]));
        let survivors = crowded_truncation(&q, &all, &partition, n, rng);
        pop = pick(&q, &survivors);

        let partition = sort_by_relation(pop.len(), |i, j| dominance.dominates(&pop[i], &pop[j]));
        crowding = front_crowding(&pop, &partition.fronts);
        trace.push(GenerationRecord::census(generation, fes, &pop));
    }

    Ok(RunResult {
        problem: problem.name().to_string(),
        algorithm: Algorithm::Nsga2Cdp,
        seed: config.seed,
        config: config.clone(),
        fes,
        trace,
        final_population: pop.clone(),
        raw_population: pop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Evaluation;
    use crate::problems::{get_problem, ProblemParams};
    use std::sync::Arc;

    fn small(problem: &ProblemDefinition, seed: u64) -> AlgorithmConfig {
        AlgorithmConfig {
            n: 20,
            max_fes: 600,
            seed,
            ..AlgorithmConfig::for_problem(problem)
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [Algorithm::Atmr, Algorithm::Nsga2Cdp] {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert!("moead".parse::<Algorithm>().is_err());
    }

    #[test]
    fn atmr_trace_bookkeeping() {
        let p = get_problem("TNK", &ProblemParams::new()).unwrap();
        let c = small(&p, 3);
        let r = run_atmr(&p, &c).unwrap();
        assert_eq!(r.trace[0].fes, 20);
        for w in r.trace.windows(2) {
            assert_eq!(w[1].fes, w[0].fes + 20);
            assert!(w[1].feasible >= w[0].feasible);
        }
        assert!(r.fes <= c.max_fes + c.n as u64);
        assert_eq!(r.fes, r.trace.last().unwrap().fes);
        assert_eq!(r.final_population.len(), 20);
        assert!(r.raw_population.len() >= 20 && r.raw_population.len() <= 40);
    }

    #[test]
    fn runs_are_deterministic() {
        let p = get_problem("SRN", &ProblemParams::new()).unwrap();
        let c = small(&p, 11);
        assert_eq!(run_atmr(&p, &c).unwrap(), run_atmr(&p, &c).unwrap());
        assert_eq!(
            run_nsga2_cdp(&p, &c).unwrap(),
            run_nsga2_cdp(&p, &c).unwrap()
        );
    }

    #[test]
    fn cdp_matches_pareto_nsga2_without_constraints() {
        let p = ProblemDefinition::new(
            "SCH",
            2,
            0,
            0,
            vec![-5.0],
            vec![5.0],
            Arc::new(|x: &[f64]| {
                Evaluation::new(vec![x[0] * x[0], (x[0] - 2.0).powi(2)], vec![], vec![])
            }),
        )
        .unwrap();
        let c = small(&p, 5);
        let a = run_nsga2_with(&p, &c, Dominance::Constrained, &mut run_rng(5)).unwrap();
        let b = run_nsga2_with(&p, &c, Dominance::Pareto, &mut run_rng(5)).unwrap();
        assert_eq!(a.final_population, b.final_population);
    }

    #[test]
    fn evaluation_failure_names_generation() {
        let p = ProblemDefinition::new(
            "NAN",
            2,
            1,
            0,
            vec![0.0],
            vec![1.0],
            Arc::new(|x: &[f64]| {
                let g = if x[0] > 0.999 { f64::NAN } else { -1.0 };
                Evaluation::new(vec![x[0], 1.0 - x[0]], vec![g], vec![])
            }),
        )
        .unwrap();
        let c = AlgorithmConfig {
            n: 20,
            max_fes: 20_000,
            pm: 1.0,
            eta_m: 0.0,
            seed: 1,
            ..AlgorithmConfig::for_problem(&p)
        };
        match run_atmr(&p, &c) {
            Err(Error::Generation { generation, source }) => {
                assert!(generation >= 1);
                assert!(matches!(*source, Error::NonFinite { .. }));
            }
            other => panic!(
                "expected a generation error, got {:?}",
                other.map(|r| r.fes)
            ),
        }
    }

    #[test]
    fn invalid_config_is_rejected() {
        let p = get_problem("BNH", &ProblemParams::new()).unwrap();
        let c = AlgorithmConfig {
            n: 5,
            ..AlgorithmConfig::for_problem(&p)
        };
        assert!(matches!(run_atmr(&p, &c), Err(Error::Config(_))));
    }
}
