//! Variation operators (SBX, polynomial mutation) and phase-aware mating selection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{transformed_objectives, Bounds, Solution};
use crate::ranking::{crowding_distance, pareto_dominates};

/// Feasibility regime of a population.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Infeasible,
    SemiFeasible,
    Feasible,
}

impl Phase {
    /// No feasible member: `Infeasible`; all feasible: `Feasible`; otherwise `SemiFeasible`.
    pub fn of(pop: &[Solution]) -> Result<Phase> {
        if pop.is_empty() {
            return Err(Error::Structural(
                "cannot classify an empty population".into(),
            ));
        }
        let feasible = pop.iter().filter(|s| s.is_feasible()).count();
        Ok(if feasible == 0 {
            Phase::Infeasible
        } else if feasible == pop.len() {
            Phase::Feasible
        } else {
            Phase::SemiFeasible
        })
    }
}

const GAP_EPS: f64 = 1e-14;

/// Bounded SBX spread factor for a uniform draw `u`, with `alpha = 2 - beta^-(eta+1)`
/// encoding the distance to the nearest bound. With unreachable bounds
/// (`alpha = 2`) and `u = 0.5` the factor is exactly 1.
pub fn bounded_spread_factor(u: f64, alpha: f64, eta: f64) -> f64 {
    let exp = 1.0 / (eta + 1.0);
    if u <= 1.0 / alpha {
        (u * alpha).powf(exp)
    } else {
        (1.0 / (2.0 - u * alpha)).powf(exp)
    }
}

/// Children `((y1+y2) -/+ beta (y2-y1)) / 2`.
pub fn sbx_children(y1: f64, y2: f64, beta_q: f64) -> (f64, f64) {
    let mid = 0.5 * (y1 + y2);
    let half = 0.5 * beta_q * (y2 - y1);
    (mid - half, mid + half)
}

/// Simulated binary crossover with bounds.
///
/// With probability `pc` each variable is recombined with probability 0.5;
/// otherwise the children are copies of the parents. Children are clamped.
pub fn sbx<R: Rng + ?Sized>(
    p1: &[f64],
    p2: &[f64],
    bounds: Bounds<'_>,
    pc: f64,
    eta_c: f64,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.gen::<f64>() >= pc {
        return (c1, c2);
    }
    for j in 0..p1.len() {
        if rng.gen::<f64>() > 0.5 {
            continue;
        }
        let (a, b) = (p1[j], p2[j]);
        if (a - b).abs() <= GAP_EPS {
            continue;
        }
        let (y1, y2) = if a < b { (a, b) } else { (b, a) };
        let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
        let u = rng.gen::<f64>();
        let gap = y2 - y1;

        let beta = 1.0 + 2.0 * (y1 - lo) / gap;
        let alpha = 2.0 - beta.powf(-(eta_c + 1.0));
        let child_lo = 0.5 * ((y1 + y2) - bounded_spread_factor(u, alpha, eta_c) * gap);

        let beta = 1.0 + 2.0 * (hi - y2) / gap;
        let alpha = 2.0 - beta.powf(-(eta_c + 1.0));
        let child_hi = 0.5 * ((y1 + y2) + bounded_spread_factor(u, alpha, eta_c) * gap);

        let child_lo = child_lo.clamp(lo, hi);
        let child_hi = child_hi.clamp(lo, hi);
        if rng.gen::<f64>() <= 0.5 {
            c1[j] = child_hi;
            c2[j] = child_lo;
        } else {
            c1[j] = child_lo;
            c2[j] = child_hi;
        }
    }
    (c1, c2)
}

/// Bounded polynomial mutation, each variable with probability `pm`.
#[allow(clippy::needless_range_loop)]
pub fn polynomial_mutation<R: Rng + ?Sized>(
    x: &[f64],
    bounds: Bounds<'_>,
    pm: f64,
    eta_m: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut y = x.to_vec();
    let exp = 1.0 / (eta_m + 1.0);
    for j in 0..y.len() {
        if rng.gen::<f64>() >= pm {
            continue;
        }
        let (lo, hi) = (bounds.lower[j], bounds.upper[j]);
        let range = hi - lo;
        let v = y[j];
        let u = rng.gen::<f64>();
        let delta_q = if u < 0.5 {
            let xy = 1.0 - (v - lo) / range;
            let val = 2.0 * u + (1.0 - 2.0 * u) * xy.powf(eta_m + 1.0);
            val.powf(exp) - 1.0
        } else {
            let xy = 1.0 - (hi - v) / range;
            let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy.powf(eta_m + 1.0);
            1.0 - val.powf(exp)
        };
        y[j] = (v + delta_q * range).clamp(lo, hi);
    }
    y
}

/// Pairs consecutive parents, applies SBX then mutation to both children.
/// Returns as many decision vectors as there are parents (rounded down to even).
pub fn reproduce<R: Rng + ?Sized>(
    parents: &[&[f64]],
    bounds: Bounds<'_>,
    pc: f64,
    pm: f64,
    eta_c: f64,
    eta_m: f64,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(parents.len());
    for pair in parents.chunks_exact(2) {
        let (c1, c2) = sbx(pair[0], pair[1], bounds, pc, eta_c, rng);
        out.push(polynomial_mutation(&c1, bounds, pm, eta_m, rng));
        out.push(polynomial_mutation(&c2, bounds, pm, eta_m, rng));
    }
    out
}

/// Crowding distance over the whole population, used as the diversity score in
/// tournaments. The violation is included as an extra objective in the
/// infeasible phase.
pub fn population_diversity(pop: &[Solution], phase: Phase) -> Vec<f64> {
    let pts: Vec<Vec<f64>> = match phase {
        Phase::Infeasible => pop.iter().map(transformed_objectives).collect(),
        _ => pop.iter().map(|s| s.objectives.clone()).collect(),
    };
    crowding_distance(&pts)
}

/// Tournament winner between `a` and `b`, or `None` if the criterion is indifferent.
fn by_violation(pop: &[Solution], a: usize, b: usize) -> Option<usize> {
    let (ga, gb) = (pop[a].violation, pop[b].violation);
    if ga < gb {
        Some(a)
    } else if gb < ga {
        Some(b)
    } else {
        None
    }
}

fn by_diversity(diversity: &[f64], a: usize, b: usize) -> Option<usize> {
    if diversity[a] > diversity[b] {
        Some(a)
    } else if diversity[b] > diversity[a] {
        Some(b)
    } else {
        None
    }
}

fn by_dominance(pop: &[Solution], a: usize, b: usize) -> Option<usize> {
    if pareto_dominates(&pop[a].objectives, &pop[b].objectives) {
        Some(a)
    } else if pareto_dominates(&pop[b].objectives, &pop[a].objectives) {
        Some(b)
    } else {
        None
    }
}

fn coin<R: Rng + ?Sized>(rng: &mut R, a: usize, b: usize) -> usize {
    if rng.gen::<bool>() {
        a
    } else {
        b
    }
}

/// Violation-or-diversity tournament: the branch is chosen by `use_violation`.
pub(crate) fn infeasible_rule<R: Rng + ?Sized>(
    pop: &[Solution],
    diversity: &[f64],
    a: usize,
    b: usize,
    use_violation: bool,
    rng: &mut R,
) -> usize {
    let pick = if use_violation {
        by_violation(pop, a, b)
    } else {
        by_diversity(diversity, a, b)
    };
    pick.unwrap_or_else(|| coin(rng, a, b))
}

pub(crate) fn feasible_rule<R: Rng + ?Sized>(
    pop: &[Solution],
    diversity: &[f64],
    a: usize,
    b: usize,
    rng: &mut R,
) -> usize {
    by_dominance(pop, a, b)
        .or_else(|| by_diversity(diversity, a, b))
        .unwrap_or_else(|| coin(rng, a, b))
}

/// Two distinct uniformly drawn indices.
pub(crate) fn distinct_pair<R: Rng + ?Sized>(len: usize, rng: &mut R) -> (usize, usize) {
    let a = rng.gen_range(0..len);
    let mut b = rng.gen_range(0..len - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

/// `n` binary-tournament winners (indices into `pop`).
///
/// - infeasible phase: a fair coin picks whether the smaller violation or the
///   larger diversity wins;
/// - feasible phase: the dominating candidate wins, otherwise the more diverse;
/// - semi-feasible phase: tournaments `i < n/2` use the infeasible rule, the
///   rest the feasible rule.
///
/// Remaining ties are broken by a coin flip.
pub fn mating_selection<R: Rng + ?Sized>(
    pop: &[Solution],
    n: usize,
    phase: Phase,
    diversity: &[f64],
    rng: &mut R,
) -> Result<Vec<usize>> {
    if pop.len() < 2 {
        return Err(Error::Structural(format!(
            "mating selection needs at least two solutions, got {}",
            pop.len()
        )));
    }
    if diversity.len() != pop.len() {
        return Err(Error::Structural(format!(
            "diversity has {} entries for {} solutions",
            diversity.len(),
            pop.len()
        )));
    }
    let mut winners = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = distinct_pair(pop.len(), rng);
        let infeasible_style = match phase {
            Phase::Infeasible => true,
            Phase::Feasible => false,
            Phase::SemiFeasible => i < n / 2,
        };
        let w = if infeasible_style {
            let use_violation = rng.gen::<f64>() < 0.5;
            infeasible_rule(pop, diversity, a, b, use_violation, rng)
        } else {
            feasible_rule(pop, diversity, a, b, rng)
        };
        winners.push(w);
    }
    Ok(winners)
}
