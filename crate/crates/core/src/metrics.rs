//! Quality indicators: IGD and hypervolume, plus a Monte Carlo hypervolume estimate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Solution;

fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Mean distance from each reference point to its nearest approximation point.
/// `None` if either set is empty.
pub fn igd(approx: &[Vec<f64>], reference: &[Vec<f64>]) -> Option<f64> {
    if approx.is_empty() || reference.is_empty() {
        return None;
    }
    let total: f64 = reference
        .iter()
        .map(|r| {
            approx
                .iter()
                .map(|a| euclid(r, a))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    Some(total / reference.len() as f64)
}

fn strictly_better(p: &[f64], r: &[f64]) -> bool {
    p.iter().zip(r).all(|(a, b)| a < b)
}

/// Area dominated by 2-D points (all strictly inside the reference box).
fn hv2(mut pts: Vec<[f64; 2]>, r: [f64; 2]) -> f64 {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut area = 0.0;
    let mut ceiling = r[1];
    for p in pts {
        if p[1] < ceiling {
            area += (r[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    area
}

/// Exact hypervolume (minimization) of the region dominated by `points` and
/// bounded by `ref_point`. Points not strictly better than the reference point
/// in every objective contribute nothing. Supports two and three objectives:
/// a sweep in 2-D and a slice-by-slice sweep along the third axis in 3-D.
pub fn hypervolume(points: &[Vec<f64>], ref_point: &[f64]) -> Result<f64> {
    let m = ref_point.len();
    if let Some(p) = points.iter().find(|p| p.len() != m) {
        return Err(Error::Structural(format!(
            "point of dimension {} against a {m}-dimensional reference point",
            p.len()
        )));
    }
    let inside: Vec<&Vec<f64>> = points
        .iter()
        .filter(|p| strictly_better(p, ref_point))
        .collect();
    match m {
        2 => Ok(hv2(
            inside.iter().map(|p| [p[0], p[1]]).collect(),
            [ref_point[0], ref_point[1]],
        )),
        3 => {
            let mut pts: Vec<[f64; 3]> = inside.iter().map(|p| [p[0], p[1], p[2]]).collect();
            pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
            let mut volume = 0.0;
            for k in 0..pts.len() {
                let top = if k + 1 < pts.len() {
                    pts[k + 1][2]
                } else {
                    ref_point[2]
                };
                let depth = top - pts[k][2];
                if depth <= 0.0 {
                    continue;
                }
                let slice: Vec<[f64; 2]> = pts[..=k].iter().map(|p| [p[0], p[1]]).collect();
                volume += depth * hv2(slice, [ref_point[0], ref_point[1]]);
            }
            Ok(volume)
        }
        _ => Err(Error::Capability(format!(
            "exact hypervolume is implemented for 2 or 3 objectives, got {m}"
        ))),
    }
}

/// Monte Carlo hypervolume: the volume of the box spanned by the componentwise
/// minimum of `points` and `ref_point`, times the fraction of uniform samples
/// weakly dominated by at least one point.
pub fn hv_monte_carlo<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    ref_point: &[f64],
    samples: usize,
    rng: &mut R,
) -> f64 {
    if points.is_empty() || samples == 0 {
        return 0.0;
    }
    let m = ref_point.len();
    let lo: Vec<f64> = (0..m)
        .map(|k| points.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min))
        .collect();
    if lo.iter().zip(ref_point).any(|(l, r)| l >= r) {
        return 0.0;
    }
    let box_volume: f64 = lo.iter().zip(ref_point).map(|(l, r)| r - l).product();
    let mut s = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..samples {
        for k in 0..m {
            s[k] = lo[k] + rng.gen::<f64>() * (ref_point[k] - lo[k]);
        }
        if points.iter().any(|p| p.iter().zip(&s).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    box_volume * hits as f64 / samples as f64
}

/// Hypervolume reference point for a reference front: its nadir pushed out by
/// 10% of the magnitude (or of the range, where the nadir coordinate is zero).
pub fn hv_reference_point(front: &[Vec<f64>]) -> Option<Vec<f64>> {
    let first = front.first()?;
    let m = first.len();
    Some(
        (0..m)
            .map(|k| {
                let hi = front.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
                let lo = front.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
                let pad = if hi != 0.0 {
                    0.1 * hi.abs()
                } else {
                    0.1 * (hi - lo)
                };
                hi + pad
            })
            .collect(),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub igd: Option<f64>,
    pub hv: Option<f64>,
    pub feasible_ratio: f64,
    /// Number of feasible solutions the indicators were computed on.
    pub n_points: usize,
}

impl MetricReport {
    /// Indicators over the feasible members of `population`. They are absent
    /// when nothing is feasible or no reference data is available.
    pub fn compute(
        population: &[Solution],
        reference: Option<&[Vec<f64>]>,
        hv_ref: Option<&[f64]>,
    ) -> Result<Self> {
        let feasible: Vec<Vec<f64>> = population
            .iter()
            .filter(|s| s.is_feasible())
            .map(|s| s.objectives.clone())
            .collect();
        let feasible_ratio = if population.is_empty() {
            0.0
        } else {
            feasible.len() as f64 / population.len() as f64
        };
        let igd = reference.and_then(|r| igd(&feasible, r));
        let hv = match hv_ref {
            Some(r) if !feasible.is_empty() => Some(hypervolume(&feasible, r)?),
            _ => None,
        };
        Ok(Self {
            igd,
            hv,
            feasible_ratio,
            n_points: feasible.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn igd_examples() {
        let r = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert_eq!(igd(&r, &r), Some(0.0));
        assert_eq!(igd(&[vec![3.0, 4.0]], &[vec![0.0, 0.0]]), Some(5.0));
        assert_eq!(igd(&[], &r), None);
    }

    #[test]
    fn hv_examples() {
        assert_eq!(hypervolume(&[vec![0.5, 0.5]], &[1.0, 1.0]).unwrap(), 0.25);
        let hv = hypervolume(&[vec![0.2, 0.8], vec![0.8, 0.2]], &[1.0, 1.0]).unwrap();
        assert!((hv - 0.28).abs() < 1e-15);
        assert_eq!(hypervolume(&[vec![1.5, 0.5]], &[1.0, 1.0]).unwrap(), 0.0);
        assert_eq!(hypervolume(&[], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            hypervolume(&[vec![0.0; 4]], &[1.0; 4]),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn hv_3d_boxes() {
        assert!((hypervolume(&[vec![0.5, 0.5, 0.5]], &[1.0; 3]).unwrap() - 0.125).abs() < 1e-15);
        // Boxes of volume 0.25 and 0.5 sharing the cube [0.5, 1]^3.
        let a = vec![0.0, 0.5, 0.5];
        let b = vec![0.5, 0.0, 0.0];
        let exact = 0.25 + 0.5 - 0.125;
        let hv = hypervolume(&[a, b], &[1.0; 3]).unwrap();
        assert!((hv - exact).abs() < 1e-15, "{hv} vs {exact}");
    }

    #[test]
    fn monte_carlo_single_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(hv_monte_carlo(&[], &[1.0, 1.0], 100, &mut rng), 0.0);
        // The box spanned by the lone point is fully dominated.
        assert_eq!(
            hv_monte_carlo(&[vec![0.5, 0.5]], &[1.0, 1.0], 1000, &mut rng),
            0.25
        );
    }

    #[test]
    fn reference_point_pads_nadir() {
        let r = hv_reference_point(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(r, vec![1.1, 1.1]);
        let r = hv_reference_point(&[vec![-4.0, 0.0], vec![-2.0, 0.0]]).unwrap();
        assert!((r[0] + 1.8).abs() < 1e-12);
        assert_eq!(r[1], 0.0);
        assert!(hv_reference_point(&[]).is_none());
    }

    #[test]
    fn report_absent_without_feasible() {
        let s = Solution {
            x: vec![],
            objectives: vec![0.1, 0.1],
            inequality: vec![1.0],
            equality: vec![],
            violation: 1.0,
        };
        let r = MetricReport::compute(&[s], Some(&[vec![0.0, 1.0]]), Some(&[1.0, 1.0])).unwrap();
        assert_eq!(r.igd, None);
        assert_eq!(r.hv, None);
        assert_eq!(r.feasible_ratio, 0.0);
    }

    fn pts2() -> impl Strategy<Value = Vec<Vec<f64>>> {
        proptest::collection::vec(proptest::collection::vec(0.0f64..1.0, 2), 1..15)
    }

    proptest! {
        #[test]
        fn igd_monotone_under_additions(a in pts2(), r in pts2(), extra in proptest::collection::vec(0.0f64..1.0, 2)) {
            let before = igd(&a, &r).unwrap();
            let mut bigger = a.clone();
            bigger.push(extra);
            prop_assert!(igd(&bigger, &r).unwrap() <= before);
        }

        #[test]
        fn hv_ignores_dominated_members(a in pts2()) {
            let r = [1.0, 1.0];
            let full = hypervolume(&a, &r).unwrap();
            let nd: Vec<Vec<f64>> = a.iter().filter(|p| !a.iter().any(|q| crate::ranking::pareto_dominates(q, p))).cloned().collect();
            prop_assert!((hypervolume(&nd, &r).unwrap() - full).abs() < 1e-12);
        }

        #[test]
        fn hv_monotone_under_additions(a in pts2(), extra in proptest::collection::vec(0.0f64..1.0, 2)) {
            let r = [1.0, 1.0];
            let before = hypervolume(&a, &r).unwrap();
            let mut bigger = a.clone();
            bigger.push(extra);
            prop_assert!(hypervolume(&bigger, &r).unwrap() >= before - 1e-15);
        }
    }
}
