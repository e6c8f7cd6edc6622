//! Pareto dominance, the constrained dominance principle, fast nondominated
//! sorting and crowding distance.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::Solution;

/// Fronts of a nondominated sort, best first. Indices refer to the sorted input
/// and are ascending within each front.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrontPartition {
    pub fronts: Vec<Vec<usize>>,
}

impl FrontPartition {
    pub fn len(&self) -> usize {
        self.fronts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fronts.is_empty()
    }

    pub fn first(&self) -> &[usize] {
        self.fronts.first().map_or(&[], Vec::as_slice)
    }

    /// Front number of every input index.
    pub fn ranks(&self) -> Vec<usize> {
        let n = self.fronts.iter().map(Vec::len).sum();
        let mut rank = vec![0; n];
        for (k, front) in self.fronts.iter().enumerate() {
            for &i in front {
                rank[i] = k;
            }
        }
        rank
    }
}

/// `a` Pareto-dominates `b` (minimization).
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Structural(format!(
            "cannot compare objective vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(pareto_dominates(a, b))
}

/// Unchecked dominance for equal-length vectors.
pub(crate) fn pareto_dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Constrained dominance comparison. `Less` means `a` is better.
///
/// Feasible beats infeasible, two infeasible solutions are ordered by violation,
/// and two feasible ones by Pareto dominance (incomparable is `Equal`).
pub fn cdp_compare(a: &Solution, b: &Solution) -> Ordering {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => Ordering::Less,
        (false, true) => Ordering::Greater,
        (false, false) => a
            .violation
            .partial_cmp(&b.violation)
            .unwrap_or(Ordering::Equal),
        (true, true) => {
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

/// Strict partial order induced by [`cdp_compare`].
pub fn cdp_dominates(a: &Solution, b: &Solution) -> bool {
    cdp_compare(a, b) == Ordering::Less
}

/// Fast nondominated sorting of objective vectors of uniform dimension.
pub fn nondominated_sort(points: &[Vec<f64>]) -> Result<FrontPartition> {
    let Some(first) = points.first() else {
        return Err(Error::Structural("cannot sort an empty set".into()));
    };
    let dim = first.len();
    if let Some(i) = points.iter().position(|p| p.len() != dim) {
        return Err(Error::Structural(format!(
            "point {i} has dimension {}, expected {dim}",
            points[i].len()
        )));
    }
    Ok(sort_by_relation(points.len(), |i, j| {
        pareto_dominates(&points[i], &points[j])
    }))
}

/// Fast nondominated sorting under an arbitrary strict partial order on `0..n`.
pub fn sort_by_relation(n: usize, dominates: impl Fn(usize, usize) -> bool) -> FrontPartition {
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(i, j) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates(j, i) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    FrontPartition { fronts }
}

/// NSGA-II crowding distance of each point within one front.
///
/// Per objective, the extreme points get `+inf` and interior points accumulate
/// the gap between their neighbours divided by the front's range; an objective
/// with zero range adds nothing.
#[allow(clippy::needless_range_loop)]
pub fn crowding_distance(front: &[Vec<f64>]) -> Vec<f64> {
    let n = front.len();
    let mut dist = vec![0.0; n];
    if n == 0 {
        return dist;
    }
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        order.sort_by(|&a, &b| front[a][k].total_cmp(&front[b][k]).then(a.cmp(&b)));
        let lo = front[order[0]][k];
        let hi = front[order[n - 1]][k];
        dist[order[0]] = f64::INFINITY;
        dist[order[n - 1]] = f64::INFINITY;
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        for w in 1..n - 1 {
            let i = order[w];
            if dist[i].is_finite() {
                dist[i] += (front[order[w + 1]][k] - front[order[w - 1]][k]) / range;
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sol(f: &[f64], g: f64) -> Solution {
        Solution {
            x: vec![],
            objectives: f.to_vec(),
            inequality: vec![g],
            equality: vec![],
            violation: g,
        }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[1.0, 2.0], &[2.0, 3.0]).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[2.0, 1.0]).unwrap());
        assert!(!dominates(&[2.0, 1.0], &[1.0, 2.0]).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]).unwrap());
        assert!(dominates(&[1.0, 2.0], &[1.0, 3.0]).unwrap());
        assert!(matches!(
            dominates(&[1.0], &[1.0, 2.0]),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn cdp_examples() {
        assert_eq!(
            cdp_compare(&sol(&[5.0, 5.0], 0.1), &sol(&[0.0, 0.0], 0.2)),
            Ordering::Less
        );
        assert_eq!(
            cdp_compare(&sol(&[5.0, 5.0], 0.0), &sol(&[0.0, 0.0], 0.3)),
            Ordering::Less
        );
        assert_eq!(
            cdp_compare(&sol(&[0.0, 0.0], 0.3), &sol(&[5.0, 5.0], 0.0)),
            Ordering::Greater
        );
        assert_eq!(
            cdp_compare(&sol(&[1.0, 2.0], 0.0), &sol(&[2.0, 1.0], 0.0)),
            Ordering::Equal
        );
        assert_eq!(
            cdp_compare(&sol(&[1.0, 1.0], 0.0), &sol(&[2.0, 2.0], 0.0)),
            Ordering::Less
        );
        assert_eq!(
            cdp_compare(&sol(&[1.0, 1.0], 0.5), &sol(&[2.0, 2.0], 0.5)),
            Ordering::Equal
        );
    }

    #[test]
    fn sort_examples() {
        let chain = vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]];
        assert_eq!(
            nondominated_sort(&chain).unwrap().fronts,
            vec![vec![0], vec![1], vec![2]]
        );
        let anti = vec![vec![1.0, 3.0], vec![2.0, 2.0], vec![3.0, 1.0]];
        assert_eq!(
            nondominated_sort(&anti).unwrap().fronts,
            vec![vec![0, 1, 2]]
        );
        assert!(nondominated_sort(&[]).is_err());
        assert!(nondominated_sort(&[vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn duplicates_share_a_front() {
        let pts = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        let p = nondominated_sort(&pts).unwrap();
        assert_eq!(p.fronts, vec![vec![0, 1], vec![2]]);
        assert_eq!(p.ranks(), vec![0, 0, 1]);
    }

    #[test]
    fn crowding_examples() {
        assert_eq!(
            crowding_distance(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            vec![f64::INFINITY; 2]
        );
        let d = crowding_distance(&[vec![0.0, 2.0], vec![1.0, 1.0], vec![2.0, 0.0]]);
        assert!(d[0].is_infinite() && d[2].is_infinite());
        assert_eq!(d[1], 2.0);
        let same = crowding_distance(&vec![vec![1.0, 1.0]; 4]);
        assert_eq!(same.iter().filter(|d| d.is_infinite()).count(), 2);
        assert_eq!(same.iter().filter(|d| **d == 0.0).count(), 2);
        assert_eq!(crowding_distance(&[vec![3.0, 4.0]]), vec![f64::INFINITY]);
    }

    #[test]
    fn transformed_space_keeps_feasible_ahead() {
        // Feasible (1,1,0) vs infeasible (1,2,0.5): the G coordinate orders them.
        let pts = vec![vec![1.0, 2.0, 0.5], vec![1.0, 1.0, 0.0]];
        let p = nondominated_sort(&pts).unwrap();
        assert_eq!(p.fronts, vec![vec![1], vec![0]]);
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0i32..4, 3).prop_map(|v| v.into_iter().map(f64::from).collect())
    }

    proptest! {
        #[test]
        fn dominance_irreflexive_and_transitive(a in vec3(), b in vec3(), c in vec3()) {
            prop_assert!(!pareto_dominates(&a, &a));
            if pareto_dominates(&a, &b) && pareto_dominates(&b, &c) {
                prop_assert!(pareto_dominates(&a, &c));
            }
            if pareto_dominates(&a, &b) {
                prop_assert!(!pareto_dominates(&b, &a));
            }
        }

        #[test]
        fn cdp_never_prefers_infeasible(f in vec3(), h in vec3(), g in 1e-9f64..10.0) {
            let feasible = sol(&f, 0.0);
            let infeasible = sol(&h, g);
            prop_assert_eq!(cdp_compare(&feasible, &infeasible), Ordering::Less);
            prop_assert_eq!(cdp_compare(&infeasible, &feasible), Ordering::Greater);
        }

        #[test]
        fn crowding_nonnegative(pts in proptest::collection::vec(vec3(), 1..20)) {
            let d = crowding_distance(&pts);
            prop_assert_eq!(d.len(), pts.len());
            prop_assert!(d.iter().all(|v| *v >= 0.0));
        }
    }
}
