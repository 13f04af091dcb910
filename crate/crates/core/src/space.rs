//! Finite metric measure spaces, probability weights, couplings, and the
//! measure-manipulation primitives shared by the other modules.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::Tolerances;
use crate::error::{Error, Result};

/// Probability weights on the points of a finite space.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbWeights(Vec<f64>);

impl ProbWeights {
    /// Validates nonnegativity and unit mass (within the structural tolerance).
    pub fn new(w: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(w, Tolerances::default().structural)
    }

    pub fn with_tolerance(w: Vec<f64>, tol: f64) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidWeights("empty weight vector".into()));
        }
        if let Some((i, x)) = w.iter().enumerate().find(|(_, x)| !x.is_finite() || **x < 0.0) {
            return Err(Error::InvalidWeights(format!("weight {i} is {x}")));
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > tol {
            return Err(Error::InvalidWeights(format!("weights sum to {s}, not 1")));
        }
        Ok(Self(w))
    }

    /// Rescales a nonnegative vector with positive total to unit mass.
    pub fn normalized(mut w: Vec<f64>) -> Result<Self> {
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidWeights("negative or non-finite entry".into()));
        }
        let s: f64 = w.iter().sum();
        if s <= 0.0 {
            return Err(Error::ZeroMassSet);
        }
        w.iter_mut().for_each(|x| *x /= s);
        Ok(Self(w))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn dirac(n: usize, at: usize) -> Self {
        let mut w = vec![0.0; n];
        w[at] = 1.0;
        Self(w)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn mass_of(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.0[i]).sum()
    }

    /// Indices with strictly positive weight.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }
}

impl std::ops::Index<usize> for ProbWeights {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<'de> Deserialize<'de> for ProbWeights {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Bare(Vec<f64>),
            Wrapped { weights: Vec<f64> },
        }
        let w = match Repr::deserialize(d)? {
            Repr::Bare(w) | Repr::Wrapped { weights: w } => w,
        };
        ProbWeights::new(w).map_err(serde::de::Error::custom)
    }
}

/// How distances are stored. Line and circle metrics are metrics by
/// construction and skip the cubic triangle check.
#[derive(Debug, Clone, PartialEq)]
enum Metric {
    Matrix(Vec<f64>),
    Line(Vec<f64>),
    Circle { coords: Vec<f64>, circumference: f64 },
}

/// Finite model of a metric measure space: labels, a metric, and probability weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMmSpace {
    points: Vec<Value>,
    metric: Metric,
    weights: ProbWeights,
}

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    points: Vec<Value>,
    dist: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl FiniteMmSpace {
    /// Builds a space from an explicit distance matrix, validating symmetry,
    /// zero diagonal and the triangle inequality within `1e-12 * max(dist)`.
    pub fn new(points: Vec<Value>, dist: Vec<Vec<f64>>, weights: ProbWeights) -> Result<Self> {
        Self::with_tolerance(points, dist, weights, Tolerances::default().structural)
    }

    pub fn with_tolerance(
        points: Vec<Value>,
        dist: Vec<Vec<f64>>,
        weights: ProbWeights,
        tol: f64,
    ) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::InvalidSpace("empty distance matrix".into()));
        }
        if points.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: points.len() });
        }
        if weights.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: weights.len() });
        }
        let mut flat = Vec::with_capacity(n * n);
        for (i, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSpace(format!("row {i} has {} entries, expected {n}", row.len())));
            }
            flat.extend_from_slice(row);
        }
        let max = flat.iter().cloned().fold(0.0_f64, f64::max);
        let slack = tol * max;
        for i in 0..n {
            for j in 0..n {
                let d = flat[i * n + j];
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidSpace(format!("dist[{i}][{j}] = {d}")));
                }
                if (d - flat[j * n + i]).abs() > slack {
                    return Err(Error::InvalidSpace(format!("asymmetric at ({i}, {j})")));
                }
            }
            if flat[i * n + i] > slack {
                return Err(Error::InvalidSpace(format!("nonzero diagonal at {i}")));
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = flat[i * n + j];
                for k in 0..n {
                    let via = dij + flat[j * n + k];
                    let dik = flat[i * n + k];
                    if dik > via + slack {
                        return Err(Error::TriangleViolation { i, j, k, d_ik: dik, via });
                    }
                }
            }
        }
        Ok(Self { points, metric: Metric::Matrix(flat), weights })
    }

    /// Points on the real line at the given coordinates.
    pub fn on_line(coords: Vec<f64>, weights: ProbWeights) -> Result<Self> {
        if coords.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: coords.len(), got: weights.len() });
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpace("non-finite coordinate".into()));
        }
        let points = (0..coords.len()).map(Value::from).collect();
        Ok(Self { points, metric: Metric::Line(coords), weights })
    }

    /// Points on a circle of the given circumference, located by arclength.
    pub fn on_circle(coords: Vec<f64>, circumference: f64, weights: ProbWeights) -> Result<Self> {
        if coords.len() != weights.len() {
            return Err(Error::LengthMismatch { expected: coords.len(), got: weights.len() });
        }
        if !(circumference > 0.0) || coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpace("bad circle coordinates".into()));
        }
        let points = (0..coords.len()).map(Value::from).collect();
        let coords = coords.into_iter().map(|x| x.rem_euclid(circumference)).collect();
        Ok(Self { points, metric: Metric::Circle { coords, circumference }, weights })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SpaceDoc = serde_json::from_str(s)?;
        let w = ProbWeights::new(doc.weights)?;
        Self::new(doc.points, doc.dist, w)
    }

    pub fn to_json(&self) -> Result<String> {
        let n = self.len();
        let dist = (0..n).map(|i| (0..n).map(|j| self.d(i, j)).collect()).collect();
        let doc = SpaceDoc {
            points: self.points.clone(),
            dist,
            weights: self.weights.as_slice().to_vec(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Value] {
        &self.points
    }

    pub fn weights(&self) -> &ProbWeights {
        &self.weights
    }

    /// The same metric with different weights.
    pub fn with_weights(&self, weights: ProbWeights) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: weights.len() });
        }
        Ok(Self { points: self.points.clone(), metric: self.metric.clone(), weights })
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Matrix(m) => m[i * self.points.len() + j],
            Metric::Line(x) => (x[i] - x[j]).abs(),
            Metric::Circle { coords, circumference } => {
                let a = (coords[i] - coords[j]).abs();
                a.min(circumference - a)
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        let all: Vec<usize> = (0..self.len()).collect();
        subset_diameter(self, &all)
    }

    /// Coordinates of an isometric embedding into the line, if one exists.
    ///
    /// Spaces built with [`FiniteMmSpace::on_line`] return their coordinates;
    /// matrix spaces are tested by anchoring at an extreme point.
    pub fn line_embedding(&self) -> Option<Vec<f64>> {
        match &self.metric {
            Metric::Line(x) => Some(x.clone()),
            Metric::Circle { .. } => None,
            Metric::Matrix(_) => {
                let n = self.len();
                let far = (0..n).max_by(|&a, &b| self.d(0, a).total_cmp(&self.d(0, b)))?;
                let x: Vec<f64> = (0..n).map(|i| self.d(far, i)).collect();
                let scale = self.diameter().max(f64::MIN_POSITIVE);
                let tol = 1e-9 * scale;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if ((x[i] - x[j]).abs() - self.d(i, j)).abs() > tol {
                            return None;
                        }
                    }
                }
                Some(x)
            }
        }
    }
}

/// A coupling of two probability vectors: a nonnegative `n x m` matrix with
/// the prescribed marginals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coupling {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
}

impl Coupling {
    /// Validates nonnegativity and both marginals within `tol`.
    pub fn new(rows: usize, cols: usize, mass: Vec<f64>, mu: &[f64], nu: &[f64], tol: f64) -> Result<Self> {
        if mass.len() != rows * cols || mu.len() != rows || nu.len() != cols {
            return Err(Error::LengthMismatch { expected: rows * cols, got: mass.len() });
        }
        if mass.iter().any(|x| !(*x >= 0.0)) {
            return Err(Error::InvalidWeights("negative coupling entry".into()));
        }
        let c = Self { rows, cols, mass };
        for (i, m) in mu.iter().enumerate() {
            let r: f64 = c.row(i).iter().sum();
            if (r - m).abs() > tol {
                return Err(Error::InvalidWeights(format!("row {i} sums to {r}, expected {m}")));
            }
        }
        for (j, m) in nu.iter().enumerate() {
            let s: f64 = (0..rows).map(|i| c.get(i, j)).sum();
            if (s - m).abs() > tol {
                return Err(Error::InvalidWeights(format!("column {j} sums to {s}, expected {m}")));
            }
        }
        Ok(c)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.mass[i * self.cols..(i + 1) * self.cols]
    }

    pub fn first_marginal(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.row(i).iter().sum()).collect()
    }

    pub fn second_marginal(&self) -> Vec<f64> {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self.get(i, j)).sum()).collect()
    }

    /// `sum_ij pi_ij c(i, j)`.
    pub fn integrate(&self, cost: impl Fn(usize, usize) -> f64) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                let m = self.get(i, j);
                if m > 0.0 {
                    s += m * cost(i, j);
                }
            }
        }
        s
    }
}

pub(crate) fn check_len(space: &FiniteMmSpace, w: &ProbWeights) -> Result<()> {
    if w.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), got: w.len() });
    }
    Ok(())
}

/// `mu` restricted to `set` and renormalised.
pub fn condition_measure(mu: &ProbWeights, set: &[usize]) -> Result<ProbWeights> {
    let mass = mu.mass_of(&dedup(set));
    if !(mass > 0.0) {
        return Err(Error::ZeroMassSet);
    }
    let mut w = vec![0.0; mu.len()];
    for &i in set {
        w[i] = mu[i] / mass;
    }
    Ok(ProbWeights(w))
}

/// Image measure under a point map `map[i]` into a space with `target_len` points.
pub fn pushforward(mu: &ProbWeights, map: &[usize], target_len: usize) -> Result<ProbWeights> {
    if map.len() != mu.len() {
        return Err(Error::LengthMismatch { expected: mu.len(), got: map.len() });
    }
    let mut w = vec![0.0; target_len];
    for (i, &j) in map.iter().enumerate() {
        if mu[i] > 0.0 {
            if j >= target_len {
                return Err(Error::DomainError(format!("map sends point {i} to {j}, outside target")));
            }
            w[j] += mu[i];
        }
    }
    Ok(ProbWeights(w))
}

/// `sum_j nu(B_j) * mu_{B_j}`: spreads the mass `nu` gives each block
/// according to `mu` conditioned on that block.
pub fn partition_average(nu: &ProbWeights, partition: &[Vec<usize>], mu: &ProbWeights) -> Result<ProbWeights> {
    if nu.len() != mu.len() {
        return Err(Error::LengthMismatch { expected: mu.len(), got: nu.len() });
    }
    let n = mu.len();
    let mut covered = vec![false; n];
    for block in partition {
        for &i in block {
            if i >= n {
                return Err(Error::DomainError(format!("block index {i} out of range")));
            }
            if covered[i] {
                return Err(Error::DomainError(format!("point {i} appears in two blocks")));
            }
            covered[i] = true;
        }
    }
    if let Some(i) = (0..n).find(|&i| !covered[i] && nu[i] > 0.0) {
        return Err(Error::InvalidWeights(format!("nu charges point {i} outside the partition")));
    }
    let mut w = vec![0.0; n];
    for block in partition {
        let nu_mass = nu.mass_of(block);
        if nu_mass == 0.0 {
            continue;
        }
        let cond = condition_measure(mu, block)?;
        for &i in block {
            w[i] += nu_mass * cond[i];
        }
    }
    Ok(ProbWeights(w))
}

/// Largest pairwise distance within `set`; zero for empty and singleton sets.
pub fn subset_diameter(space: &FiniteMmSpace, set: &[usize]) -> f64 {
    let mut best = 0.0_f64;
    for (a, &i) in set.iter().enumerate() {
        for &j in &set[a + 1..] {
            best = best.max(space.d(i, j));
        }
    }
    best
}

fn dedup(set: &[usize]) -> Vec<usize> {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}
