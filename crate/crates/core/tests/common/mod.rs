//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use atmr::ranking::FrontPartition;
use atmr::Solution;
use rand::Rng;

pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

/// Peels nondominated layers one at a time; O(N^2) per layer.
pub fn pairwise_sort(points: &[Vec<f64>]) -> FrontPartition {
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let front: Vec<usize> = left
            .iter()
            .copied()
            .filter(|&i| !left.iter().any(|&j| dominates(&points[j], &points[i])))
            .collect();
        left.retain(|i| !front.contains(i));
        fronts.push(front);
    }
    FrontPartition { fronts }
}

pub fn cos_angle(v: &[f64], w: &[f64]) -> f64 {
    let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nw = w.iter().map(|a| a * a).sum::<f64>().sqrt();
    (dot.abs() / (nv * nw)).min(1.0)
}

/// Every weight index attaining the minimum angle.
pub fn min_angle_set(v: &[f64], weights: &[Vec<f64>]) -> Vec<usize> {
    let angles: Vec<f64> = weights.iter().map(|w| cos_angle(v, w).acos()).collect();
    let best = angles.iter().copied().fold(f64::INFINITY, f64::min);
    (0..weights.len()).filter(|&j| angles[j] == best).collect()
}

/// A solution with the given objectives and violation; `x` is unused.
pub fn sol(objectives: Vec<f64>, violation: f64) -> Solution {
    Solution {
        x: vec![0.0],
        inequality: vec![violation],
        equality: vec![],
        objectives,
        violation,
    }
}

pub fn random_solution<R: Rng>(rng: &mut R, m: usize, feasible: bool) -> Solution {
    let f: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
    let g = if feasible {
        0.0
    } else {
        rng.gen_range(0.01..1.0)
    };
    sol(f, g)
}

pub fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}
