//! Reference-point machinery: simplex-lattice weights, objective normalization,
//! minimum-angle assignment and adaptive weights built from feasible solutions.

use rand::Rng;

/// Ideal/nadir estimates used to map objectives into `[0, 1]^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationContext {
    pub z_min: Vec<f64>,
    pub z_max: Vec<f64>,
}

impl NormalizationContext {
    /// Componentwise min/max over `points`, which must be nonempty.
    pub fn from_points<'a, I>(points: I) -> Self
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut iter = points.into_iter();
        let first = iter.next().expect("normalization needs at least one point");
        let mut z_min = first.to_vec();
        let mut z_max = first.to_vec();
        for p in iter {
            for (k, v) in p.iter().enumerate() {
                z_min[k] = z_min[k].min(*v);
                z_max[k] = z_max[k].max(*v);
            }
        }
        Self { z_min, z_max }
    }

    pub fn is_degenerate(&self, k: usize) -> bool {
        self.z_max[k] <= self.z_min[k]
    }

    /// `(f - z_min) / (z_max - z_min)` per component; degenerate components map to 0.5.
    pub fn normalize(&self, f: &[f64]) -> Vec<f64> {
        f.iter()
            .enumerate()
            .map(|(k, v)| {
                if self.is_degenerate(k) {
                    0.5
                } else {
                    (v - self.z_min[k]) / (self.z_max[k] - self.z_min[k])
                }
            })
            .collect()
    }

    /// Affine inverse of [`normalize`](Self::normalize) on non-degenerate components.
    pub fn denormalize(&self, f: &[f64]) -> Vec<f64> {
        f.iter()
            .enumerate()
            .map(|(k, v)| {
                if self.is_degenerate(k) {
                    self.z_min[k]
                } else {
                    self.z_min[k] + v * (self.z_max[k] - self.z_min[k])
                }
            })
            .collect()
    }
}

pub fn make_context(points: &[Vec<f64>]) -> NormalizationContext {
    NormalizationContext::from_points(points.iter().map(Vec::as_slice))
}

pub fn normalize(f: &[f64], ctx: &NormalizationContext) -> Vec<f64> {
    ctx.normalize(f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightOrigin {
    Regular,
    /// `sources[j]` is the index of the feasible solution that produced weight `j`.
    Adaptive {
        sources: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightVectorSet {
    pub weights: Vec<Vec<f64>>,
    pub origin: WeightOrigin,
}

impl WeightVectorSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Generating solution of weight `j`, for adaptive sets.
    pub fn source(&self, j: usize) -> Option<usize> {
        match &self.origin {
            WeightOrigin::Regular => None,
            WeightOrigin::Adaptive { sources } => sources.get(j).copied(),
        }
    }
}

/// All vectors `(k_1/H, ..., k_m/H)` with nonnegative integer `k_i` summing to `H`,
/// in lexicographic order.
pub fn das_dennis(m: usize, h: usize) -> WeightVectorSet {
    assert!(m >= 2 && h >= 1, "lattice needs m >= 2 and H >= 1");
    let mut weights = Vec::with_capacity(lattice_size(m, h));
    let mut current = Vec::with_capacity(m);
    fill_lattice(m, h, h, &mut current, &mut weights);
    WeightVectorSet {
        weights,
        origin: WeightOrigin::Regular,
    }
}

fn fill_lattice(
    m: usize,
    h: usize,
    left: usize,
    current: &mut Vec<usize>,
    out: &mut Vec<Vec<f64>>,
) {
    if current.len() == m - 1 {
        let mut w: Vec<f64> = current.iter().map(|&k| k as f64 / h as f64).collect();
        w.push(left as f64 / h as f64);
        out.push(w);
        return;
    }
    for k in 0..=left {
        current.push(k);
        fill_lattice(m, h, left - k, current, out);
        current.pop();
    }
}

/// `C(h + m - 1, m - 1)`, saturating on overflow.
pub fn lattice_size(m: usize, h: usize) -> usize {
    let k = (m - 1) as u128;
    let n = (h + m - 1) as u128;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
        if c > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    c as usize
}

/// Smallest `H` whose lattice has at least `n` points.
pub fn smallest_lattice(m: usize, n: usize) -> usize {
    assert!(m >= 2);
    let mut h = 1;
    while lattice_size(m, h) < n {
        h += 1;
    }
    h
}

/// Angle between `v` and `w` using the absolute cosine. `None` when `v` has zero norm.
pub fn angle(v: &[f64], w: &[f64]) -> Option<f64> {
    let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nw = w.iter().map(|a| a * a).sum::<f64>().sqrt();
    if nv == 0.0 || nw == 0.0 {
        return None;
    }
    let dot: f64 = v.iter().zip(w).map(|(a, b)| a * b).sum();
    Some((dot.abs() / (nv * nw)).min(1.0).acos())
}

/// Index of the weight with the smallest angle to `norm_f`. Exact ties and a
/// zero vector are resolved uniformly at random.
pub fn assign_to_weights<R: Rng + ?Sized>(
    norm_f: &[f64],
    weights: &WeightVectorSet,
    rng: &mut R,
) -> usize {
    assert!(!weights.is_empty(), "cannot assign to an empty weight set");
    if norm_f.iter().all(|v| *v == 0.0) {
        return rng.gen_range(0..weights.len());
    }
    let mut best = f64::INFINITY;
    let mut ties: Vec<usize> = Vec::new();
    for (j, w) in weights.weights.iter().enumerate() {
        let Some(theta) = angle(norm_f, w) else {
            continue;
        };
        if theta < best {
            best = theta;
            ties.clear();
            ties.push(j);
        } else if theta == best {
            ties.push(j);
        }
    }
    match ties.len() {
        0 => rng.gen_range(0..weights.len()),
        1 => ties[0],
        k => ties[rng.gen_range(0..k)],
    }
}

/// One weight per normalized feasible vector: `w_j = f_j / sum_k f_k`, or the
/// uniform weight when the sum is zero.
pub fn adaptive_weights(feasible_norm_f: &[Vec<f64>]) -> WeightVectorSet {
    let weights = feasible_norm_f
        .iter()
        .map(|f| {
            let sum: f64 = f.iter().sum();
            if sum > 0.0 {
                f.iter().map(|v| v / sum).collect()
            } else {
                vec![1.0 / f.len() as f64; f.len()]
            }
        })
        .collect();
    WeightVectorSet {
        weights,
        origin: WeightOrigin::Adaptive {
            sources: (0..feasible_norm_f.len()).collect(),
        },
    }
}
