//! Built-in analytic test problems, the problem registry and reference fronts.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{constraint_violation, Evaluation, Evaluator, ProblemDefinition, DEFAULT_DELTA};

/// Numeric problem parameters, e.g. `D = 10` for CORRIDOR.
pub type ProblemParams = BTreeMap<String, f64>;

pub type ProblemFactory = Arc<dyn Fn(&ProblemParams) -> Result<ProblemDefinition> + Send + Sync>;

/// Grid resolution per axis used by the brute-force front generators.
pub const FRONT_GRID_RESOLUTION: usize = 2001;

/// Name-to-factory map. Lookups are case-sensitive.
#[derive(Clone, Default)]
pub struct ProblemRegistry {
    factories: BTreeMap<String, ProblemFactory>,
}

impl ProblemRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding BNH, SRN, TNK, OSY and CORRIDOR.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.insert(
            "BNH",
            Arc::new(|p: &ProblemParams| no_params("BNH", p).and_then(|_| bnh())),
        );
        r.insert(
            "SRN",
            Arc::new(|p: &ProblemParams| no_params("SRN", p).and_then(|_| srn())),
        );
        r.insert(
            "TNK",
            Arc::new(|p: &ProblemParams| no_params("TNK", p).and_then(|_| tnk())),
        );
        r.insert(
            "OSY",
            Arc::new(|p: &ProblemParams| no_params("OSY", p).and_then(|_| osy())),
        );
        r.insert("CORRIDOR", Arc::new(corridor_from_params));
        r
    }

    /// Adds a factory. Fails if the name is taken.
    pub fn register(&mut self, name: impl Into<String>, factory: ProblemFactory) -> Result<()> {
        let name = name.into();
        if self.factories.contains_key(&name) {
            return Err(Error::Config(format!(
                "problem `{name}` is already registered"
            )));
        }
        self.factories.insert(name, factory);
        Ok(())
    }

    fn insert(&mut self, name: &str, factory: ProblemFactory) {
        self.factories.insert(name.to_string(), factory);
    }

    pub fn names(&self) -> Vec<String> {
        self.factories.keys().cloned().collect()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.factories.contains_key(name)
    }

    pub fn get(&self, name: &str, params: &ProblemParams) -> Result<ProblemDefinition> {
        match self.factories.get(name) {
            Some(factory) => factory(params),
            None => Err(Error::UnknownProblem {
                name: name.to_string(),
                registered: self.names(),
            }),
        }
    }
}

/// Looks up a built-in problem.
pub fn get_problem(name: &str, params: &ProblemParams) -> Result<ProblemDefinition> {
    ProblemRegistry::builtin().get(name, params)
}

fn no_params(name: &str, params: &ProblemParams) -> Result<()> {
    match params.keys().next() {
        Some(k) => Err(Error::Config(format!(
            "{name} takes no parameters, got `{k}`"
        ))),
        None => Ok(()),
    }
}

fn boxed(f: impl Fn(&[f64]) -> Evaluation + Send + Sync + 'static) -> Evaluator {
    Arc::new(f)
}

pub fn bnh() -> Result<ProblemDefinition> {
    ProblemDefinition::new(
        "BNH",
        2,
        2,
        0,
        vec![0.0, 0.0],
        vec![5.0, 3.0],
        boxed(|x| {
            let (x1, x2) = (x[0], x[1]);
            Evaluation::new(
                vec![
                    4.0 * x1 * x1 + 4.0 * x2 * x2,
                    (x1 - 5.0).powi(2) + (x2 - 5.0).powi(2),
                ],
                vec![
                    (x1 - 5.0).powi(2) + x2 * x2 - 25.0,
                    7.7 - (x1 - 8.0).powi(2) - (x2 + 3.0).powi(2),
                ],
                vec![],
            )
        }),
    )
}

pub fn srn() -> Result<ProblemDefinition> {
    ProblemDefinition::new(
        "SRN",
        2,
        2,
        0,
        vec![-20.0, -20.0],
        vec![20.0, 20.0],
        boxed(|x| {
            let (x1, x2) = (x[0], x[1]);
            Evaluation::new(
                vec![
                    2.0 + (x1 - 2.0).powi(2) + (x2 - 1.0).powi(2),
                    9.0 * x1 - (x2 - 1.0).powi(2),
                ],
                vec![x1 * x1 + x2 * x2 - 225.0, x1 - 3.0 * x2 + 10.0],
                vec![],
            )
        }),
    )
}

/// TNK. The lower bound is 1e-12 rather than 0 so `atan2` stays away from the origin.
pub fn tnk() -> Result<ProblemDefinition> {
    ProblemDefinition::new(
        "TNK",
        2,
        2,
        0,
        vec![1e-12, 1e-12],
        vec![PI, PI],
        boxed(|x| {
            let (x1, x2) = (x[0], x[1]);
            Evaluation::new(
                vec![x1, x2],
                vec![
                    -(x1 * x1 + x2 * x2 - 1.0 - 0.1 * (16.0 * x1.atan2(x2)).cos()),
                    (x1 - 0.5).powi(2) + (x2 - 0.5).powi(2) - 0.5,
                ],
                vec![],
            )
        }),
    )
}

pub fn osy() -> Result<ProblemDefinition> {
    ProblemDefinition::new(
        "OSY",
        2,
        6,
        0,
        vec![0.0, 0.0, 1.0, 0.0, 1.0, 0.0],
        vec![10.0, 10.0, 5.0, 6.0, 5.0, 10.0],
        boxed(|x| {
            let f1 = -(25.0 * (x[0] - 2.0).powi(2)
                + (x[1] - 2.0).powi(2)
                + (x[2] - 1.0).powi(2)
                + (x[3] - 4.0).powi(2)
                + (x[4] - 1.0).powi(2));
            let f2 = x.iter().map(|v| v * v).sum();
            Evaluation::new(
                vec![f1, f2],
                vec![
                    2.0 - x[0] - x[1],
                    x[0] + x[1] - 6.0,
                    x[1] - x[0] - 2.0,
                    x[0] - 3.0 * x[1] - 2.0,
                    (x[2] - 3.0).powi(2) + x[3] - 4.0,
                    4.0 - (x[4] - 3.0).powi(2) - x[5],
                ],
                vec![],
            )
        }),
    )
}

/// CORRIDOR(D): a narrow feasible slab `sum(x[1..]) <= 0.01 (D - 1)` in the unit cube.
pub fn corridor(dim: usize) -> Result<ProblemDefinition> {
    if dim < 2 {
        return Err(Error::Config(format!("CORRIDOR needs D >= 2, got {dim}")));
    }
    let width = 0.01 * (dim - 1) as f64;
    ProblemDefinition::new(
        "CORRIDOR",
        2,
        1,
        0,
        vec![0.0; dim],
        vec![1.0; dim],
        boxed(move |x| {
            let s: f64 = x[1..].iter().sum();
            Evaluation::new(vec![x[0], 1.0 - x[0] + s], vec![s - width], vec![])
        }),
    )
}

fn corridor_from_params(params: &ProblemParams) -> Result<ProblemDefinition> {
    let mut dim = 10usize;
    for (k, v) in params {
        match k.as_str() {
            "D" => {
                if v.fract() != 0.0 || *v < 2.0 {
                    return Err(Error::Config(format!(
                        "CORRIDOR: D must be an integer >= 2, got {v}"
                    )));
                }
                dim = *v as usize;
            }
            other => {
                return Err(Error::Config(format!(
                    "CORRIDOR: unknown parameter `{other}`"
                )))
            }
        }
    }
    corridor(dim)
}

/// Whether [`reference_front`] can produce a front for `name`.
pub fn has_reference_front(name: &str) -> bool {
    matches!(name, "BNH" | "SRN" | "TNK" | "CORRIDOR")
}

/// A sample of at least `count` mutually nondominated feasible objective vectors
/// on the constrained Pareto front of a built-in problem.
///
/// CORRIDOR is sampled analytically. The two-variable problems are swept on a
/// dense decision grid, filtered for feasibility and dominance, and thinned
/// evenly to `count` points; the grid is refined if it is too coarse.
pub fn reference_front(name: &str, count: usize) -> Result<Vec<Vec<f64>>> {
    reference_front_at(name, count, FRONT_GRID_RESOLUTION)
}

pub fn reference_front_at(name: &str, count: usize, resolution: usize) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::Structural(
            "reference front size must be positive".into(),
        ));
    }
    let problem = match name {
        "CORRIDOR" => {
            if count == 1 {
                return Ok(vec![vec![0.0, 1.0]]);
            }
            return Ok((0..count)
                .map(|i| {
                    let f1 = i as f64 / (count - 1) as f64;
                    vec![f1, 1.0 - f1]
                })
                .collect());
        }
        "BNH" => bnh()?,
        "SRN" => srn()?,
        "TNK" => tnk()?,
        other => {
            return Err(Error::Capability(format!(
                "no reference front generator for `{other}`"
            )))
        }
    };

    let mut res = resolution.max(2);
    loop {
        let front = grid_front(&problem, res)?;
        if front.len() >= count {
            return Ok(thin(front, count));
        }
        if res > 64 * resolution.max(2) {
            return Err(Error::Capability(format!(
                "grid sweep for {name} yields only {} nondominated points",
                front.len()
            )));
        }
        res = 2 * res - 1;
    }
}

/// Feasible, nondominated objective vectors over a `res x res` decision grid.
fn grid_front(problem: &ProblemDefinition, res: usize) -> Result<Vec<Vec<f64>>> {
    if problem.n_var() != 2 {
        return Err(Error::Capability(format!(
            "grid sweep needs two decision variables, {} has {}",
            problem.name(),
            problem.n_var()
        )));
    }
    let (lo, hi) = (problem.lower(), problem.upper());
    let axis = |j: usize, k: usize| {
        if k == res - 1 {
            hi[j]
        } else {
            lo[j] + (hi[j] - lo[j]) * k as f64 / (res - 1) as f64
        }
    };
    let mut feasible = Vec::new();
    for a in 0..res {
        let x1 = axis(0, a);
        for b in 0..res {
            let x = [x1, axis(1, b)];
            let e = problem.evaluate_raw(&x);
            if constraint_violation(&e.inequality, &e.equality, DEFAULT_DELTA)? == 0.0 {
                feasible.push((e.objectives[0], e.objectives[1]));
            }
        }
    }
    Ok(nondominated_2d(feasible))
}

/// Sweep filter for two objectives: sorted by f1, keep strictly improving f2.
fn nondominated_2d(mut pts: Vec<(f64, f64)>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = Vec::new();
    let mut best = f64::INFINITY;
    for (f1, f2) in pts {
        if f2 < best {
            best = f2;
            out.push(vec![f1, f2]);
        }
    }
    out
}

fn thin(front: Vec<Vec<f64>>, count: usize) -> Vec<Vec<f64>> {
    let k = front.len();
    if k <= count {
        return front;
    }
    if count == 1 {
        return vec![front[0].clone()];
    }
    (0..count)
        .map(|i| {
            let idx = ((i as f64) * (k - 1) as f64 / (count - 1) as f64).round() as usize;
            front[idx].clone()
        })
        .collect()
}

fn cache_path(dir: &Path, name: &str, count: usize, resolution: usize) -> PathBuf {
    dir.join(format!("{name}_{count}_{resolution}.csv"))
}

/// [`reference_front`] backed by a CSV cache in `dir`, keyed by name, size and grid resolution.
pub fn reference_front_cached(name: &str, count: usize, dir: &Path) -> Result<Vec<Vec<f64>>> {
    let path = cache_path(dir, name, count, FRONT_GRID_RESOLUTION);
    if path.exists() {
        return read_front_csv(&path);
    }
    let front = reference_front(name, count)?;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_front_csv(&path, &front)?;
    Ok(front)
}

/// Formats a value with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes objective vectors as CSV with an `f1,...,fm` header.
pub fn write_front_csv(path: &Path, points: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let m = points.first().map_or(2, Vec::len);
    w.write_record((1..=m).map(|i| format!("f{i}")))?;
    for p in points {
        w.write_record(p.iter().map(|v| fmt_f64(*v)))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Serde(e.to_string()))?;
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_front_csv(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Serde(format!("{}: bad number `{s}`: {e}", path.display())))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(row);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::evaluate;

    fn params(kv: &[(&str, f64)]) -> ProblemParams {
        kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn bnh_substitution() {
        let p = get_problem("BNH", &ProblemParams::new()).unwrap();
        assert_eq!(p.n_obj(), 2);
        let mut fes = 0;
        let s = evaluate(&p, &[0.0, 0.0], DEFAULT_DELTA, &mut fes).unwrap();
        assert_eq!(s.objectives, vec![0.0, 50.0]);
        // (0 - 5)^2 + 0^2 - 25: active at the boundary, still feasible.
        assert_eq!(s.inequality[0], 0.0);
        assert!((s.inequality[1] + 65.3).abs() < 1e-12);
        assert_eq!(s.violation, 0.0);
        let s = evaluate(&p, &[5.0, 3.0], DEFAULT_DELTA, &mut fes).unwrap();
        assert_eq!(s.objectives, vec![136.0, 4.0]);
        assert_eq!(s.inequality[0], -16.0);
        assert!((s.inequality[1] + 37.3).abs() < 1e-12);
        assert_eq!(s.violation, 0.0);
    }

    #[test]
    fn corridor_substitution() {
        let p = get_problem("CORRIDOR", &params(&[("D", 10.0)])).unwrap();
        assert_eq!(p.n_ineq(), 1);
        assert_eq!(p.n_var(), 10);
        let mut fes = 0;
        let s = evaluate(&p, &[0.5; 10], DEFAULT_DELTA, &mut fes).unwrap();
        assert!((s.inequality[0] - 4.41).abs() < 1e-12);
        assert!((s.violation - 4.41).abs() < 1e-12);
        assert!((s.objectives[1] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn unknown_problem_lists_builtins() {
        let err = get_problem("CTPX", &ProblemParams::new()).unwrap_err();
        let msg = err.to_string();
        for name in ["BNH", "CORRIDOR", "OSY", "SRN", "TNK"] {
            assert!(msg.contains(name), "{msg}");
        }
        assert!(get_problem("bnh", &ProblemParams::new()).is_err());
    }

    #[test]
    fn bad_params_rejected() {
        assert!(get_problem("BNH", &params(&[("D", 3.0)])).is_err());
        assert!(get_problem("CORRIDOR", &params(&[("D", 2.5)])).is_err());
        assert!(get_problem("CORRIDOR", &params(&[("K", 2.0)])).is_err());
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut r = ProblemRegistry::builtin();
        assert!(r
            .register("BNH", Arc::new(|_: &ProblemParams| bnh()))
            .is_err());
        assert!(r
            .register("BNH2", Arc::new(|_: &ProblemParams| bnh()))
            .is_ok());
        assert!(r.contains("BNH2"));
    }

    #[test]
    fn osy_feasible_point() {
        let p = osy().unwrap();
        let mut fes = 0;
        // A point on the known front segment x = (5, 1, 5, 0, 5, 0).
        let s = evaluate(&p, &[5.0, 1.0, 5.0, 0.0, 5.0, 0.0], DEFAULT_DELTA, &mut fes).unwrap();
        assert_eq!(s.violation, 0.0);
        assert_eq!(s.objectives[1], 76.0);
    }

    #[test]
    fn corridor_front_is_analytic() {
        let f = reference_front("CORRIDOR", 100).unwrap();
        assert_eq!(f.len(), 100);
        for p in &f {
            assert!((p[0] + p[1] - 1.0).abs() < 1e-15);
            assert!((0.0..=1.0).contains(&p[0]));
        }
    }

    #[test]
    fn no_front_for_osy() {
        assert!(matches!(
            reference_front("OSY", 10),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn thin_picks_endpoints() {
        let front: Vec<Vec<f64>> = (0..11).map(|i| vec![i as f64, 10.0 - i as f64]).collect();
        let t = thin(front, 3);
        assert_eq!(t, vec![vec![0.0, 10.0], vec![5.0, 5.0], vec![10.0, 0.0]]);
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let pts = vec![vec![0.1, 1.0 / 3.0], vec![-2.5e-300, 1e300]];
        write_front_csv(&path, &pts).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("f1,f2\n"));
        assert_eq!(read_front_csv(&path).unwrap(), pts);
    }
}
