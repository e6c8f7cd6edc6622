//! Environmental selection for the three feasibility phases.
//!
//! Every function here returns indices into the candidate slice it was given,
//! so callers decide whether to clone or move solutions.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{transformed_objectives, Solution};
use crate::operators::Phase;
use crate::ranking::{crowding_distance, nondominated_sort, FrontPartition};
use crate::refpoints::{
    adaptive_weights, assign_to_weights, das_dennis, smallest_lattice, NormalizationContext,
    WeightVectorSet,
};

pub fn classify_phase(q: &[Solution]) -> Result<Phase> {
    Phase::of(q)
}

fn objective_partition(pop: &[Solution], idx: &[usize]) -> Result<FrontPartition> {
    let pts: Vec<Vec<f64>> = idx.iter().map(|&i| pop[i].objectives.clone()).collect();
    nondominated_sort(&pts)
}

fn transformed_partition(pop: &[Solution], idx: &[usize]) -> Result<FrontPartition> {
    let pts: Vec<Vec<f64>> = idx
        .iter()
        .map(|&i| transformed_objectives(&pop[i]))
        .collect();
    nondominated_sort(&pts)
}

/// Admits whole fronts while they fit and fills the remainder of `n` from the
/// last front by descending crowding distance (objective space), ties at random.
/// `partition` indexes into `idx`.
pub(crate) fn crowded_truncation<R: Rng + ?Sized>(
    pop: &[Solution],
    idx: &[usize],
    partition: &FrontPartition,
    n: usize,
    rng: &mut R,
) -> Vec<usize> {
    let mut chosen = Vec::with_capacity(n);
    for front in &partition.fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend(front.iter().map(|&k| idx[k]));
            if chosen.len() == n {
                break;
            }
            continue;
        }
        let pts: Vec<Vec<f64>> = front
            .iter()
            .map(|&k| pop[idx[k]].objectives.clone())
            .collect();
        let cd = crowding_distance(&pts);
        let mut order: Vec<usize> = (0..front.len()).collect();
        order.shuffle(rng);
        order.sort_by(|&a, &b| cd[b].total_cmp(&cd[a]));
        let room = n - chosen.len();
        chosen.extend(order[..room].iter().map(|&k| idx[front[k]]));
        break;
    }
    chosen
}

/// NSGA-II survivor selection of `n` members of `idx` in objective space.
pub fn nsga2_truncate<R: Rng + ?Sized>(
    pop: &[Solution],
    idx: &[usize],
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if idx.len() <= n {
        return Ok(idx.to_vec());
    }
    let partition = objective_partition(pop, idx)?;
    Ok(crowded_truncation(pop, idx, &partition, n, rng))
}

/// Which members of a weight-assigned candidate set get deleted, in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub kept: Vec<usize>,
    pub deleted: Vec<usize>,
}

/// Repeatedly picks the weight with the most assigned candidates (ties at
/// random) and deletes the candidate the `worst` score ranks highest, until
/// `keep` candidates remain. `assignment[k]` is the weight of candidate `k`;
/// returned indices are candidate positions.
fn crowded_weight_deletion<R: Rng + ?Sized>(
    assignment: &[usize],
    n_weights: usize,
    keep: usize,
    worst: impl Fn(usize) -> f64,
    rng: &mut R,
) -> Reduction {
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_weights];
    for (k, &w) in assignment.iter().enumerate() {
        members[w].push(k);
    }
    let mut remaining = assignment.len();
    let mut deleted = Vec::new();
    while remaining > keep {
        let most = members.iter().map(Vec::len).max().unwrap_or(0);
        let crowded: Vec<usize> = (0..n_weights)
            .filter(|&w| members[w].len() == most)
            .collect();
        let w = crowded[rng.gen_range(0..crowded.len())];

        let scores: Vec<f64> = members[w].iter().map(|&k| worst(k)).collect();
        let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ties: Vec<usize> = (0..scores.len()).filter(|&p| scores[p] == top).collect();
        let pos = ties[rng.gen_range(0..ties.len())];
        deleted.push(members[w].remove(pos));
        remaining -= 1;
    }
    let mut kept: Vec<usize> = members.into_iter().flatten().collect();
    kept.sort_unstable();
    Reduction { kept, deleted }
}

/// Reduces `candidates` to `keep` using regular lattice weights: candidates are
/// normalized against their own ideal/nadir estimate, assigned to the weight at
/// the smallest angle, and the most violated member of the most crowded weight
/// is deleted until `keep` remain.
pub fn regular_reference_reduction<R: Rng + ?Sized>(
    candidates: &[&Solution],
    keep: usize,
    rng: &mut R,
) -> Reduction {
    if candidates.len() <= keep {
        return Reduction {
            kept: (0..candidates.len()).collect(),
            deleted: Vec::new(),
        };
    }
    let m = candidates[0].objectives.len();
    let weights = das_dennis(m, smallest_lattice(m, keep.max(1)));
    let ctx = NormalizationContext::from_points(candidates.iter().map(|s| s.objectives.as_slice()));
    let assignment: Vec<usize> = candidates
        .iter()
        .map(|s| assign_to_weights(&ctx.normalize(&s.objectives), &weights, rng))
        .collect();
    crowded_weight_deletion(
        &assignment,
        weights.len(),
        keep,
        |k| candidates[k].violation,
        rng,
    )
}

/// Selects `n` members of `idx` by nondominated sorting in the transformed
/// (objectives + violation) space, resolving the overflowing front with
/// [`regular_reference_reduction`].
pub(crate) fn transformed_reference_select<R: Rng + ?Sized>(
    pop: &[Solution],
    idx: &[usize],
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if idx.len() < n {
        return Err(Error::Structural(format!(
            "need at least {n} candidates, got {}",
            idx.len()
        )));
    }
    let partition = transformed_partition(pop, idx)?;
    let mut chosen = Vec::with_capacity(n);
    for front in &partition.fronts {
        if chosen.len() + front.len() <= n {
            chosen.extend(front.iter().map(|&k| idx[k]));
            if chosen.len() == n {
                break;
            }
            continue;
        }
        let members: Vec<&Solution> = front.iter().map(|&k| &pop[idx[k]]).collect();
        let reduction = regular_reference_reduction(&members, n - chosen.len(), rng);
        chosen.extend(reduction.kept.iter().map(|&p| idx[front[p]]));
        break;
    }
    Ok(chosen)
}

fn union(p: &[Solution], o: &[Solution]) -> Vec<Solution> {
    p.iter().chain(o).cloned().collect()
}

/// Survivor selection when parents and offspring are all infeasible.
/// Returns `n` indices into `P ∪ O` (parents first).
pub fn select_infeasible_phase<R: Rng + ?Sized>(
    p: &[Solution],
    o: &[Solution],
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let q = union(p, o);
    if q.iter().any(Solution::is_feasible) {
        return Err(Error::Contract(
            "infeasible-phase selection given a feasible solution".into(),
        ));
    }
    let idx: Vec<usize> = (0..q.len()).collect();
    transformed_reference_select(&q, &idx, n, rng)
}

/// Survivor selection when parents and offspring are all feasible.
pub fn select_feasible_phase<R: Rng + ?Sized>(
    q: &[Solution],
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if let Some(i) = q.iter().position(|s| !s.is_feasible()) {
        return Err(Error::Contract(format!(
            "feasible-phase selection given infeasible solution {i}"
        )));
    }
    if q.len() < n {
        return Err(Error::Structural(format!(
            "need at least {n} candidates, got {}",
            q.len()
        )));
    }
    let idx: Vec<usize> = (0..q.len()).collect();
    nsga2_truncate(q, &idx, n, rng)
}

/// How the infeasible half of a mixed population was reduced.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InfeasibleReduction {
    /// At most `n` infeasible candidates: all kept.
    None,
    /// Early stage: regular reference points in the transformed space.
    Regular,
    /// Later stage: nondominated infeasible solutions, thinned with adaptive weights.
    Adaptive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SemiFeasibleSelection {
    /// Indices into `P ∪ O`: kept feasible solutions first, then kept infeasible ones.
    pub selected: Vec<usize>,
    pub feasible_kept: usize,
    pub reduction: InfeasibleReduction,
}

/// Survivor selection for a mixed population. Feasible and infeasible
/// solutions are updated separately, so the result holds between `n` and `2n`
/// solutions (fewer only if `P ∪ O` itself is smaller).
///
/// Feasible solutions are truncated to `n` with NSGA-II when necessary. If
/// there are more than `n` infeasible ones they are reduced with regular
/// reference points while `fes / max_fes < 0.5` or fewer than `n` feasible
/// solutions exist, and otherwise restricted to the infeasible members of the
/// first transformed-space front, which are thinned (if more than `n`) with
/// adaptive weights derived from the kept feasible solutions, deleting the
/// candidate furthest from the generating feasible solution.
pub fn select_semifeasible_phase<R: Rng + ?Sized>(
    p: &[Solution],
    o: &[Solution],
    n: usize,
    fes: u64,
    max_fes: u64,
    rng: &mut R,
) -> Result<SemiFeasibleSelection> {
    let q = union(p, o);
    let feasible: Vec<usize> = (0..q.len()).filter(|&i| q[i].is_feasible()).collect();
    let infeasible: Vec<usize> = (0..q.len()).filter(|&i| !q[i].is_feasible()).collect();
    if feasible.is_empty() || infeasible.is_empty() {
        return Err(Error::Structural(format!(
            "semi-feasible selection needs both kinds of solutions, got {} feasible and {} infeasible",
            feasible.len(),
            infeasible.len()
        )));
    }

    let kept_feasible = if feasible.len() > n {
        nsga2_truncate(&q, &feasible, n, rng)?
    } else {
        feasible.clone()
    };

    let (kept_infeasible, reduction) = if infeasible.len() <= n {
        (infeasible, InfeasibleReduction::None)
    } else if (fes as f64) / (max_fes as f64) < 0.5 || feasible.len() < n {
        (
            transformed_reference_select(&q, &infeasible, n, rng)?,
            InfeasibleReduction::Regular,
        )
    } else {
        let all: Vec<usize> = (0..q.len()).collect();
        let first = transformed_partition(&q, &all)?;
        let leading: Vec<usize> = first
            .first()
            .iter()
            .copied()
            .filter(|&i| !q[i].is_feasible())
            .collect();
        let kept = if leading.len() <= n {
            leading
        } else {
            adaptive_reference_reduction(&q, &kept_feasible, &leading, n, rng).kept
        };
        (kept, InfeasibleReduction::Adaptive)
    };

    let feasible_kept = kept_feasible.len();
    let mut selected = kept_feasible;
    selected.extend(kept_infeasible);
    Ok(SemiFeasibleSelection {
        selected,
        feasible_kept,
        reduction,
    })
}

/// Thins `candidates` (indices into `pop`) to `keep` using one adaptive weight
/// per feasible solution in `feasible`. The returned reduction holds indices into `pop`.
pub fn adaptive_reference_reduction<R: Rng + ?Sized>(
    pop: &[Solution],
    feasible: &[usize],
    candidates: &[usize],
    keep: usize,
    rng: &mut R,
) -> Reduction {
    if candidates.len() <= keep {
        return Reduction {
            kept: candidates.to_vec(),
            deleted: Vec::new(),
        };
    }
    let ctx = NormalizationContext::from_points(
        feasible
            .iter()
            .chain(candidates)
            .map(|&i| pop[i].objectives.as_slice()),
    );
    let feasible_norm: Vec<Vec<f64>> = feasible
        .iter()
        .map(|&i| ctx.normalize(&pop[i].objectives))
        .collect();
    let cand_norm: Vec<Vec<f64>> = candidates
        .iter()
        .map(|&i| ctx.normalize(&pop[i].objectives))
        .collect();
    let weights: WeightVectorSet = adaptive_weights(&feasible_norm);
    let assignment: Vec<usize> = cand_norm
        .iter()
        .map(|f| assign_to_weights(f, &weights, rng))
        .collect();
    let distance = |k: usize| {
        let src = weights
            .source(assignment[k])
            .expect("adaptive weights carry sources");
        cand_norm[k]
            .iter()
            .zip(&feasible_norm[src])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let r = crowded_weight_deletion(&assignment, weights.len(), keep, distance, rng);
    Reduction {
        kept: r.kept.iter().map(|&k| candidates[k]).collect(),
        deleted: r.deleted.iter().map(|&k| candidates[k]).collect(),
    }
}
