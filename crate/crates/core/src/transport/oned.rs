//! Weighted segments and circles on a uniform grid, and monotone transport between
//! measures given by their cell masses.
//!
//! Cell `k` is `[origin + k h, origin + (k+1) h)`; grid points are cell midpoints.
//! Densities are piecewise constant per cell, so quantile functions are piecewise
//! linear and every transport quantity below is evaluated in closed form.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::cell_averages;
use crate::space::{FiniteMmSpace, ProbWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Segment,
    Circle,
}

#[derive(Deserialize)]
struct RawSpace {
    kind: Kind,
    total_length: f64,
    grid_size: usize,
    #[serde(default)]
    origin: f64,
    log_density: Vec<f64>,
}

/// Segment or circle of length `total_length` with `log(dmu/dlength)` per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct WeightedOneDimSpace {
    kind: Kind,
    total_length: f64,
    grid_size: usize,
    origin: f64,
    log_density: Vec<f64>,
}

impl TryFrom<RawSpace> for WeightedOneDimSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        if raw.grid_size != raw.log_density.len() {
            return Err(Error::LengthMismatch {
                expected: raw.grid_size,
                got: raw.log_density.len(),
            });
        }
        Self::new(raw.kind, raw.total_length, raw.log_density).map(|s| s.with_origin(raw.origin))
    }
}

const MASS_TOL: f64 = 1e-8;

impl WeightedOneDimSpace {
    /// Validates finiteness and that the cell masses `h exp(log_density)` sum to 1 within 1e-8.
    pub fn new(kind: Kind, total_length: f64, log_density: Vec<f64>) -> Result<Self> {
        let m = log_density.len();
        if m < 2 {
            return Err(Error::InvalidSpace(format!("grid_size {m} < 2")));
        }
        if !(total_length > 0.0 && total_length.is_finite()) {
            return Err(Error::InvalidSpace(format!("total_length {total_length} must be positive")));
        }
        if let Some(k) = log_density.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSpace(format!("log_density[{k}] is not finite")));
        }
        let h = total_length / m as f64;
        let mass: f64 = log_density.iter().map(|l| h * l.exp()).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidSpace(format!("density integrates to {mass}, expected 1")));
        }
        Ok(Self {
            kind,
            total_length,
            grid_size: m,
            origin: 0.0,
            log_density,
        })
    }

    /// Shifts the arclength coordinate of the left end.
    pub fn with_origin(mut self, origin: f64) -> Self {
        self.origin = origin;
        self
    }

    pub fn uniform(kind: Kind, total_length: f64, grid_size: usize) -> Result<Self> {
        Self::new(kind, total_length, vec![-total_length.ln(); grid_size])
    }

    /// Discretizes an unnormalized density on `[origin, origin + total_length]` by exact-to-quadrature cell averages.
    pub fn from_density(
        kind: Kind,
        origin: f64,
        total_length: f64,
        grid_size: usize,
        density: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let avg = cell_averages(density, origin, total_length, grid_size);
        let h = total_length / grid_size as f64;
        let total: f64 = avg.iter().sum::<f64>() * h;
        if let Some(k) = avg.iter().position(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::InvalidSpace(format!("density average in cell {k} is {}", avg[k])));
        }
        let log_density = avg.iter().map(|a| (a / total).ln()).collect();
        Ok(Self::new(kind, total_length, log_density)?.with_origin(origin))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn h(&self) -> f64 {
        self.total_length / self.grid_size as f64
    }

    pub fn log_density(&self) -> &[f64] {
        &self.log_density
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.h();
        (0..self.grid_size).map(|k| self.origin + (k as f64 + 0.5) * h).collect()
    }

    /// Cell masses of the reference measure.
    pub fn cell_masses(&self) -> Vec<f64> {
        let h = self.h();
        self.log_density.iter().map(|l| h * l.exp()).collect()
    }

    pub fn reference(&self) -> ProbWeights {
        ProbWeights::normalized(self.cell_masses()).expect("validated density has positive mass")
    }

    /// Diameter of the space: the length for segments, half of it for circles.
    pub fn diameter(&self) -> f64 {
        match self.kind {
            Kind::Segment => self.total_length,
            Kind::Circle => 0.5 * self.total_length,
        }
    }

    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        match self.kind {
            Kind::Segment => d,
            Kind::Circle => {
                let r = d.rem_euclid(self.total_length);
                r.min(self.total_length - r)
            }
        }
    }

    /// Index of the cell containing `x` (clamped on segments, wrapped on circles).
    pub fn cell_of(&self, x: f64) -> usize {
        let m = self.grid_size as i64;
        let k = ((x - self.origin) / self.h()).floor() as i64;
        match self.kind {
            Kind::Segment => k.clamp(0, m - 1) as usize,
            Kind::Circle => k.rem_euclid(m) as usize,
        }
    }

    /// The grid atoms as a finite mm-space with the reference weights.
    pub fn to_finite_space(&self) -> Result<FiniteMmSpace> {
        match self.kind {
            Kind::Segment => FiniteMmSpace::on_line(self.grid(), self.reference()),
            Kind::Circle => FiniteMmSpace::on_circle(self.grid(), self.total_length, self.reference()),
        }
    }

    /// Cell masses of a measure with unnormalized length-density `f`.
    pub fn measure_from_density(&self, f: impl Fn(f64) -> f64) -> Result<ProbWeights> {
        let h = self.h();
        let avg = cell_averages(f, self.origin, self.total_length, self.grid_size);
        ProbWeights::normalized(avg.into_iter().map(|a| a * h).collect())
    }

    /// Reference measure conditioned on the interval `[a, b]` (arclength coordinates, no wrap).
    pub fn conditioned_on_interval(&self, a: f64, b: f64) -> Result<ProbWeights> {
        let h = self.h();
        let masses = self
            .cell_masses()
            .into_iter()
            .enumerate()
            .map(|(k, m)| {
                let lo = self.origin + k as f64 * h;
                let overlap = (b.min(lo + h) - a.max(lo)).max(0.0);
                m * overlap / h
            })
            .collect::<Vec<_>>();
        if masses.iter().sum::<f64>() <= 0.0 {
            return Err(Error::ZeroMassSet);
        }
        ProbWeights::normalized(masses)
    }

    /// Reference mass of `[a, b]` in arclength coordinates (taken mod length on circles).
    pub fn interval_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let h = self.h();
        let masses = self.cell_masses();
        let overlap_sum = |a: f64, b: f64| -> f64 {
            let mut s = 0.0;
            for (k, m) in masses.iter().enumerate() {
                let lo = self.origin + k as f64 * h;
                let overlap = (b.min(lo + h) - a.max(lo)).max(0.0);
                s += m * overlap / h;
            }
            s
        };
        match self.kind {
            Kind::Segment => overlap_sum(a, b),
            Kind::Circle => {
                let l = self.total_length;
                if b - a >= l {
                    return 1.0;
                }
                let a0 = self.origin + (a - self.origin).rem_euclid(l);
                let b0 = a0 + (b - a);
                let end = self.origin + l;
                if b0 <= end {
                    overlap_sum(a0, b0)
                } else {
                    overlap_sum(a0, end) + overlap_sum(self.origin, b0 - l)
                }
            }
        }
    }
}

/// Linear piece `Q(u) = x0 + slope (u - u0)` of a quantile function on `[u0, u1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuantilePiece {
    pub u0: f64,
    pub u1: f64,
    pub x0: f64,
    pub slope: f64,
    pub cell: usize,
}

fn cumulative(masses: &[f64]) -> (Vec<f64>, f64) {
    let total: f64 = masses.iter().sum();
    let mut acc = 0.0;
    let mut cum = Vec::with_capacity(masses.len() + 1);
    cum.push(0.0);
    for m in masses {
        acc += m;
        cum.push(acc / total);
    }
    *cum.last_mut().unwrap() = 1.0;
    (cum, total)
}

/// Left-continuous quantile of the piecewise-constant density with the given cell masses.
pub fn quantile_pieces(masses: &[f64], h: f64, origin: f64) -> Vec<QuantilePiece> {
    let (cum, total) = cumulative(masses);
    masses
        .iter()
        .enumerate()
        .filter(|(_, m)| **m > 0.0)
        .map(|(k, m)| QuantilePiece {
            u0: cum[k],
            u1: cum[k + 1],
            x0: origin + k as f64 * h,
            slope: h * total / m,
            cell: k,
        })
        .collect()
}

/// Quantile of the atomic measure placing each cell mass at the cell midpoint.
pub fn atomic_quantile_pieces(masses: &[f64], h: f64, origin: f64) -> Vec<QuantilePiece> {
    let (cum, _) = cumulative(masses);
    masses
        .iter()
        .enumerate()
        .filter(|(_, m)| **m > 0.0)
        .map(|(k, _)| QuantilePiece {
            u0: cum[k],
            u1: cum[k + 1],
            x0: origin + (k as f64 + 0.5) * h,
            slope: 0.0,
            cell: k,
        })
        .collect()
}

/// Common refinement of two quantile functions: on `[u0, u1]`,
/// `Q_i(u) = x0[i] + slope[i] (u - u0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MergedPiece {
    pub u0: f64,
    pub u1: f64,
    pub x0: [f64; 2],
    pub slope: [f64; 2],
    pub cell: [usize; 2],
}

impl MergedPiece {
    pub fn len(&self) -> f64 {
        self.u1 - self.u0
    }

    pub fn is_empty(&self) -> bool {
        self.u1 <= self.u0
    }

    pub fn at(&self, i: usize, u: f64) -> f64 {
        self.x0[i] + self.slope[i] * (u - self.u0)
    }

    /// `∫ (Q_0 - Q_1)^2 du` over the piece.
    pub fn squared_displacement(&self) -> f64 {
        let l = self.len();
        let d = self.x0[0] - self.x0[1];
        let ds = self.slope[0] - self.slope[1];
        d * d * l + d * ds * l * l + ds * ds * l * l * l / 3.0
    }
}

pub fn merge_quantiles(a: &[QuantilePiece], b: &[QuantilePiece]) -> Vec<MergedPiece> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    let mut u = 0.0;
    while i < a.len() && j < b.len() {
        let (pa, pb) = (&a[i], &b[j]);
        let next = pa.u1.min(pb.u1);
        if next > u {
            out.push(MergedPiece {
                u0: u,
                u1: next,
                x0: [pa.x0 + pa.slope * (u - pa.u0), pb.x0 + pb.slope * (u - pb.u0)],
                slope: [pa.slope, pb.slope],
                cell: [pa.cell, pb.cell],
            });
            u = next;
        }
        if pa.u1 <= next {
            i += 1;
        }
        if pb.u1 <= next {
            j += 1;
        }
    }
    out
}

/// Monotone optimal plan between two cell-mass vectors. On circles the plan is
/// the monotone plan of the unrolled chart starting at cell boundary `cut`.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonePlan {
    pub kind: Kind,
    pub cut: usize,
    pub chart_origin: f64,
    pub h: f64,
    pub total_length: f64,
    pub grid_size: usize,
    pub pieces: Vec<MergedPiece>,
}

fn rotate(masses: &[f64], cut: usize) -> Vec<f64> {
    let m = masses.len();
    (0..m).map(|k| masses[(k + cut) % m]).collect()
}

impl MonotonePlan {
    fn in_chart(space: &WeightedOneDimSpace, p0: &[f64], p1: &[f64], cut: usize, atomic: bool) -> Self {
        let h = space.h();
        let chart_origin = space.origin + cut as f64 * h;
        let (r0, r1) = (rotate(p0, cut), rotate(p1, cut));
        let build = if atomic { atomic_quantile_pieces } else { quantile_pieces };
        let pieces = merge_quantiles(&build(&r0, h, chart_origin), &build(&r1, h, chart_origin));
        Self {
            kind: space.kind,
            cut,
            chart_origin,
            h,
            total_length: space.total_length,
            grid_size: space.grid_size,
            pieces,
        }
    }

    fn build(space: &WeightedOneDimSpace, p0: &ProbWeights, p1: &ProbWeights, atomic: bool) -> Result<Self> {
        let m = space.grid_size;
        for p in [p0, p1] {
            if p.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: p.len() });
            }
        }
        let (a, b) = (p0.as_slice(), p1.as_slice());
        match space.kind {
            Kind::Segment => Ok(Self::in_chart(space, a, b, 0, atomic)),
            Kind::Circle => {
                let mut best: Option<(f64, Self)> = None;
                for cut in 0..m {
                    let plan = Self::in_chart(space, a, b, cut, atomic);
                    let c = plan.w2_squared();
                    if best.as_ref().is_none_or(|(bc, _)| c < *bc) {
                        best = Some((c, plan));
                    }
                }
                Ok(best.expect("grid_size >= 2").1)
            }
        }
    }

    /// Monotone plan for piecewise-constant densities; circles search all `M` cuts.
    pub fn new(space: &WeightedOneDimSpace, p0: &ProbWeights, p1: &ProbWeights) -> Result<Self> {
        Self::build(space, p0, p1, false)
    }

    /// Monotone plan in the chart unrolled at cell boundary `cut` (only meaningful on circles).
    pub fn with_cut(space: &WeightedOneDimSpace, p0: &ProbWeights, p1: &ProbWeights, cut: usize) -> Result<Self> {
        let m = space.grid_size;
        for p in [p0, p1] {
            if p.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: p.len() });
            }
        }
        if cut >= m {
            return Err(Error::DomainError(format!("cut {cut} outside grid of size {m}")));
        }
        Ok(Self::in_chart(space, p0.as_slice(), p1.as_slice(), cut, false))
    }

    /// Monotone plan between the atomic measures at the cell midpoints.
    pub fn atomic(space: &WeightedOneDimSpace, p0: &ProbWeights, p1: &ProbWeights) -> Result<Self> {
        Self::build(space, p0, p1, true)
    }

    pub fn w2_squared(&self) -> f64 {
        self.pieces.iter().map(MergedPiece::squared_displacement).sum::<f64>().max(0.0)
    }

    /// Original index of chart cell `k`.
    pub fn original_cell(&self, k: usize) -> usize {
        (k + self.cut) % self.grid_size
    }

    fn chart_cell(&self, x: f64) -> usize {
        let k = ((x - self.chart_origin) / self.h).floor();
        (k.max(0.0) as usize).min(self.grid_size - 1)
    }

    /// Distance between `Q_0(u)` and `Q_1(u)` measured in the space.
    pub fn distance(&self, piece: &MergedPiece, u: f64) -> f64 {
        let d = (piece.at(0, u) - piece.at(1, u)).abs();
        match self.kind {
            Kind::Segment => d,
            Kind::Circle => d.min(self.total_length - d),
        }
    }

    /// Calls `visit(cell, overlap_length_in_x, x_lo, x_hi)` for each cell met by the
    /// image of `piece` under `Q_t`, or `visit(cell, 0, x, x)` for a point image.
    fn for_each_cell(&self, piece: &MergedPiece, t: f64, mut visit: impl FnMut(usize, f64, f64, f64)) {
        let xa = (1.0 - t) * piece.x0[0] + t * piece.x0[1];
        let st = (1.0 - t) * piece.slope[0] + t * piece.slope[1];
        let xb = xa + st * piece.len();
        if !(xb > xa) {
            visit(self.original_cell(self.chart_cell(xa)), 0.0, xa, xa);
            return;
        }
        let (ka, kb) = (self.chart_cell(xa), self.chart_cell(xb));
        for k in ka..=kb {
            let lo = self.chart_origin + k as f64 * self.h;
            let (c0, c1) = (xa.max(lo), xb.min(lo + self.h));
            let (c0, c1) = if k == 0 { (xa, c1) } else { (c0, c1) };
            let (c0, c1) = if k == self.grid_size - 1 { (c0, xb) } else { (c0, c1) };
            if c1 > c0 {
                visit(self.original_cell(k), c1 - c0, c0, c1);
            }
        }
    }

    /// Cell masses of `nu_t = (Q_t)_# Leb[0,1]` with `Q_t = (1-t) Q_0 + t Q_1`.
    pub fn interpolate_masses(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.grid_size];
        for piece in &self.pieces {
            let st = (1.0 - t) * piece.slope[0] + t * piece.slope[1];
            let l = piece.len();
            self.for_each_cell(piece, t, |cell, overlap, _, _| {
                out[cell] += if st * l > 0.0 { overlap / st } else { l };
            });
        }
        out
    }

    /// `∫ (dnu_t/dx)^{1-1/n} (dmu/dx)^{1/n} dx` for the interpolant at `t`, with `mu_density`
    /// the per-cell length density of the reference measure. Returns `None` when `nu_t` has an atom.
    pub fn renyi_of_interpolant(&self, t: f64, n: f64, mu_density: &[f64]) -> Option<f64> {
        let mut s = 0.0;
        for piece in &self.pieces {
            let st = (1.0 - t) * piece.slope[0] + t * piece.slope[1];
            if !(st > 0.0) {
                return None;
            }
            let nu = 1.0 / st;
            self.for_each_cell(piece, t, |cell, overlap, _, _| {
                s += overlap * nu.powf(1.0 - 1.0 / n) * mu_density[cell].powf(1.0 / n);
            });
        }
        Some(s)
    }

    /// First zero-mass chart cell strictly inside the support of `p`.
    fn interior_gap(&self, p: &[f64]) -> Option<usize> {
        let r = rotate(p, self.cut);
        let first = r.iter().position(|m| *m > 0.0)?;
        let last = r.iter().rposition(|m| *m > 0.0)?;
        (first..=last).find(|&k| r[k] <= 0.0).map(|k| self.original_cell(k))
    }
}

/// Geodesic `nu_t` between two cell-mass vectors, returned as cell masses.
pub fn displacement_interpolate_1d(
    space: &WeightedOneDimSpace,
    p0: &ProbWeights,
    p1: &ProbWeights,
    t: f64,
) -> Result<ProbWeights> {
    let plan = MonotonePlan::new(space, p0, p1)?;
    displacement_interpolate_with(&plan, p0, p1, t)
}

/// As [`displacement_interpolate_1d`] with a precomputed plan.
pub fn displacement_interpolate_with(
    plan: &MonotonePlan,
    p0: &ProbWeights,
    p1: &ProbWeights,
    t: f64,
) -> Result<ProbWeights> {
    check_contiguous(plan, p0, p1)?;
    ProbWeights::normalized(plan.interpolate_masses(t))
}

pub(crate) fn check_contiguous(plan: &MonotonePlan, p0: &ProbWeights, p1: &ProbWeights) -> Result<()> {
    for (which, p) in [p0, p1].into_iter().enumerate() {
        if let Some(cell) = plan.interior_gap(p.as_slice()) {
            return Err(Error::DegenerateDensity { which, cell });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(m: usize, l: f64) -> WeightedOneDimSpace {
        WeightedOneDimSpace::uniform(Kind::Segment, l, m).unwrap()
    }

    #[test]
    fn validation() {
        assert!(WeightedOneDimSpace::new(Kind::Segment, 1.0, vec![0.0; 4]).is_ok());
        assert!(WeightedOneDimSpace::new(Kind::Segment, 1.0, vec![0.1; 4]).is_err());
        assert!(WeightedOneDimSpace::new(Kind::Segment, 1.0, vec![0.0]).is_err());
        assert!(WeightedOneDimSpace::new(Kind::Segment, 1.0, vec![0.0, f64::NAN]).is_err());
    }

    #[test]
    fn json_roundtrip_and_schema() {
        let s = seg(4, 2.0);
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"kind\":\"segment\"") && j.contains("\"grid_size\":4"));
        assert_eq!(WeightedOneDimSpace::from_json(&j).unwrap(), s);
        let bad = r#"{"kind":"circle","total_length":1.0,"grid_size":3,"log_density":[0.0,0.0]}"#;
        assert!(WeightedOneDimSpace::from_json(bad).is_err());
    }

    #[test]
    fn identical_densities_have_zero_cost() {
        let s = seg(10, 1.0);
        let p = s.measure_from_density(|x| 1.0 + x * x).unwrap();
        let plan = MonotonePlan::new(&s, &p, &p).unwrap();
        assert!(plan.w2_squared() < 1e-28);
        let mid = plan.interpolate_masses(0.37);
        for (a, b) in mid.iter().zip(p.as_slice()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn disjoint_blocks() {
        let s = seg(100, 10.0);
        let a = s.conditioned_on_interval(1.0, 2.0).unwrap();
        let b = s.conditioned_on_interval(4.5, 5.5).unwrap();
        let plan = MonotonePlan::new(&s, &a, &b).unwrap();
        assert!((plan.w2_squared().sqrt() - 3.5).abs() < 1e-12);
        let mid = plan.interpolate_masses(0.5);
        let expect = s.conditioned_on_interval(2.75, 3.75).unwrap();
        for (x, y) in mid.iter().zip(expect.as_slice()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_gap_is_degenerate() {
        let s = seg(6, 6.0);
        let p = ProbWeights::new(vec![0.5, 0.0, 0.5, 0.0, 0.0, 0.0]).unwrap();
        let q = ProbWeights::uniform(6);
        let err = displacement_interpolate_1d(&s, &p, &q, 0.5).unwrap_err();
        assert!(matches!(err, Error::DegenerateDensity { which: 0, cell: 1 }));
    }

    #[test]
    fn circle_picks_short_way_around() {
        let s = WeightedOneDimSpace::uniform(Kind::Circle, 10.0, 100).unwrap();
        let a = s.conditioned_on_interval(0.5, 1.5).unwrap();
        let b = s.conditioned_on_interval(8.5, 9.5).unwrap();
        let plan = MonotonePlan::new(&s, &a, &b).unwrap();
        assert!((plan.w2_squared().sqrt() - 2.0).abs() < 1e-12);
        let mid = plan.interpolate_masses(0.5);
        let got: f64 = (95..100).chain(0..5).map(|k| mid[k]).sum();
        assert!((got - 1.0).abs() < 1e-12, "{got}");
        assert!((s.interval_mass(9.5, 10.5) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn entropy_of_interpolant_at_endpoints() {
        let s = WeightedOneDimSpace::from_density(Kind::Segment, -1.0, 2.0, 40, |x| (-x * x).exp()).unwrap();
        let p0 = s.measure_from_density(|x| 1.0 + x).unwrap();
        let p1 = s.measure_from_density(|x| 2.0 - x).unwrap();
        let plan = MonotonePlan::new(&s, &p0, &p1).unwrap();
        let mu = s.cell_masses();
        let dens: Vec<f64> = mu.iter().map(|m| m / s.h()).collect();
        for (t, p) in [(0.0, &p0), (1.0, &p1)] {
            let direct: f64 = p.as_slice().iter().zip(&mu).map(|(a, m)| a.powf(2.0) * m.powf(-1.0)).sum();
            let v = plan.renyi_of_interpolant(t, -1.0, &dens).unwrap();
            assert!((v - direct).abs() < 1e-12 * direct, "{v} {direct}");
        }
    }
}
