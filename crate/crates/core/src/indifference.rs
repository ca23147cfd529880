//! Geometry of total utility over nutrient pairs.
//!
//! Between RDA and UL every nutrient sits on its plateau, so the region where
//! all nutrients are on their plateaus is a box of maximal, constant utility:
//! an indifference *area* rather than a curve. Inside it the marginal rate of
//! substitution is undefined and local non-satiation fails.
//!
//! Points passed to this module are in each profile's own unit. Use
//! [`IntakeBundle::point_for`](crate::aggregation::IntakeBundle::point_for) to
//! go from a canonical bundle to a point.

use rayon::prelude::*;

use crate::contour::{march, Grid, Point};
use crate::error::{Error, Result};
use crate::nutrient_db::ResolvedProfile;
use crate::utility::{evaluate_unchecked, ClampFloor, Marginal, UtilityParams};

/// Segment-II interval of one nutrient; `hi` is `None` without a UL.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub id: String,
    pub lo: f64,
    pub hi: Option<f64>,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && self.hi.is_none_or(|hi| x <= hi)
    }

    pub fn width(&self) -> Option<f64> {
        self.hi.map(|hi| hi - self.lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measure {
    Finite(f64),
    Infinite,
}

impl Measure {
    pub fn finite(self) -> Option<f64> {
        match self {
            Measure::Finite(m) => Some(m),
            Measure::Infinite => None,
        }
    }
}

/// Cartesian product of plateau intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IndifferenceBox {
    pub intervals: Vec<Interval>,
    /// Product of interval widths, in the product of the profiles' units.
    pub measure: Measure,
}

impl IndifferenceBox {
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.intervals.len() && self.intervals.iter().zip(point).all(|(iv, &x)| iv.contains(x))
    }
}

pub fn indifference_area(profiles: &[ResolvedProfile]) -> Result<IndifferenceBox> {
    if profiles.is_empty() {
        return Err(Error::domain("indifference area needs at least one profile"));
    }
    let mut intervals = Vec::with_capacity(profiles.len());
    for p in profiles {
        p.check().map_err(|e| Error::domain(e.to_string()))?;
        intervals.push(Interval {
            id: p.id.clone(),
            lo: p.rda,
            hi: p.ul,
        });
    }
    let measure = intervals
        .iter()
        .map(Interval::width)
        .try_fold(1.0, |acc, w| w.map(|w| acc * w))
        .map_or(Measure::Infinite, Measure::Finite);
    Ok(IndifferenceBox { intervals, measure })
}

/// True when every coordinate lies in its closed plateau interval.
pub fn in_indifference_area(profiles: &[ResolvedProfile], point: &[f64]) -> Result<bool> {
    check_point(profiles.len(), point)?;
    Ok(indifference_area(profiles)?.contains(point))
}

fn check_point(dims: usize, point: &[f64]) -> Result<()> {
    if point.len() != dims {
        return Err(Error::domain(format!("point has {} coordinates, expected {dims}", point.len())));
    }
    if let Some(x) = point.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::domain(format!("coordinates must be non-negative, got {x}")));
    }
    Ok(())
}

/// How two per-nutrient utilities combine into the surface value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceModel {
    /// β1 u(x1) + β2 u(x2).
    Additive { weights: [f64; 2] },
    /// Only the coordinate at `contributor` serves the function; the other
    /// contributes nothing at any intake.
    Concrete { contributor: usize },
}

impl SurfaceModel {
    pub fn equal() -> Self {
        SurfaceModel::Additive { weights: [0.5, 0.5] }
    }

    fn weights(self) -> [f64; 2] {
        match self {
            SurfaceModel::Additive { weights } => weights,
            SurfaceModel::Concrete { contributor: 0 } => [1.0, 0.0],
            SurfaceModel::Concrete { .. } => [0.0, 1.0],
        }
    }
}

/// Total utility over a nutrient pair.
#[derive(Debug, Clone)]
pub struct UtilitySurface {
    profiles: [ResolvedProfile; 2],
    params: UtilityParams,
    lambdas: [Option<f64>; 2],
    weights: [f64; 2],
}

impl UtilitySurface {
    pub fn new(profiles: [ResolvedProfile; 2], params: UtilityParams, model: SurfaceModel) -> Result<Self> {
        params.validate()?;
        for p in &profiles {
            p.check()?;
        }
        let weights = model.weights();
        if let SurfaceModel::Concrete { contributor } = model {
            if contributor > 1 {
                return Err(Error::InvalidParams(format!("contributor index {contributor} out of range")));
            }
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) || ((weights[0] + weights[1]) - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams(format!("invalid surface weights {weights:?}")));
        }
        let lambdas = [params.decay_scale(&profiles[0])?, params.decay_scale(&profiles[1])?];
        Ok(UtilitySurface {
            profiles,
            params,
            lambdas,
            weights,
        })
    }

    pub fn profiles(&self) -> &[ResolvedProfile; 2] {
        &self.profiles
    }

    pub fn weights(&self) -> [f64; 2] {
        self.weights
    }

    fn eval(&self, k: usize, x: f64) -> (f64, Marginal) {
        let (u, m) = evaluate_unchecked(&self.profiles[k], &self.params, self.lambdas[k], x.max(0.0));
        (u.0, m)
    }

    pub fn value(&self, x1: f64, x2: f64) -> f64 {
        let [b1, b2] = self.weights;
        let mut total = 0.0;
        if b1 != 0.0 {
            total += b1 * self.eval(0, x1).0;
        }
        if b2 != 0.0 {
            total += b2 * self.eval(1, x2).0;
        }
        total
    }

    /// Partial derivatives, with the per-coordinate marginal (before
    /// weighting) so callers can see which coordinates sit on a kink.
    pub fn partials(&self, x1: f64, x2: f64) -> [(f64, Marginal); 2] {
        let [b1, b2] = self.weights;
        let (_, m1) = self.eval(0, x1);
        let (_, m2) = self.eval(1, x2);
        [(b1 * m1.right(), m1), (b2 * m2.right(), m2)]
    }

    /// Samples the surface on `nx × ny` evenly spaced points over
    /// `[0, extent.0] × [0, extent.1]`, with each nutrient's RDA and UL added
    /// to its axis when inside the extent. Axes are sorted and deduplicated.
    pub fn grid(&self, (nx, ny): (usize, usize), extent: (f64, f64)) -> Result<Grid> {
        if nx < 2 || ny < 2 {
            return Err(Error::InvalidParams(format!("grid must be at least 2x2, got {nx}x{ny}")));
        }
        for e in [extent.0, extent.1] {
            if !(e.is_finite() && e > 0.0) {
                return Err(Error::InvalidParams(format!("extent must be > 0, got {e}")));
            }
        }
        let axis = |k: usize, max: f64, n: usize| {
            let p = &self.profiles[k];
            let mut xs = crate::utility::axis_with_breakpoints(max, n, [Some(p.rda), p.ul]);
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            xs
        };
        let xs = axis(0, extent.0, nx);
        let ys = axis(1, extent.1, ny);
        let values = ys
            .par_iter()
            .flat_map_iter(|&y| xs.iter().map(move |&x| (x, y)))
            .map(|(x, y)| self.value(x, y))
            .collect();
        Ok(Grid { xs, ys, values })
    }
}

/// `x1,x2,value` rows with six decimals.
pub fn surface_csv(grid: &Grid) -> String {
    let mut out = String::from("x1,x2,value\n");
    for (j, y) in grid.ys.iter().enumerate() {
        for (i, x) in grid.xs.iter().enumerate() {
            out.push_str(&format!("{x:.6},{y:.6},{:.6}\n", grid.at(i, j)));
        }
    }
    out
}

/// Default grid resolution for level-set extraction.
pub const DEFAULT_GRID: (usize, usize) = (256, 256);

/// Utility tolerance every level-set point satisfies.
pub const LEVEL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSet {
    pub level: f64,
    pub segments: Vec<[Point; 2]>,
    pub points: Vec<Point>,
    pub grid: (usize, usize),
}

impl LevelSet {
    /// `x1,x2,value` rows; `value` is the surface evaluated at the point.
    pub fn to_csv(&self, surface: &UtilitySurface) -> String {
        let mut out = String::from("x1,x2,value\n");
        for p in &self.points {
            out.push_str(&format!("{:.6},{:.6},{:.6}\n", p[0], p[1], surface.value(p[0], p[1])));
        }
        out
    }
}

/// Contour of the equal-weight additive surface at `level` in (0, 1).
pub fn level_set(
    profiles: &[ResolvedProfile; 2],
    params: &UtilityParams,
    level: f64,
    grid: (usize, usize),
    extent: (f64, f64),
) -> Result<LevelSet> {
    let surface = UtilitySurface::new(profiles.clone(), *params, SurfaceModel::equal())?;
    level_set_on(&surface, level, grid, extent)
}

pub fn level_set_on(surface: &UtilitySurface, level: f64, grid: (usize, usize), extent: (f64, f64)) -> Result<LevelSet> {
    if level == 1.0 {
        return Err(Error::AreaNotCurve);
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("level must lie in (0, 1), got {level}")));
    }
    let sampled = surface.grid(grid, extent)?;
    // Polish well inside the reported tolerance.
    let segments = march(&sampled, level, |x, y| surface.value(x, y), LEVEL_TOLERANCE * 1e-6);
    let points = segments.iter().flatten().copied().collect();
    Ok(LevelSet {
        level,
        segments,
        points,
        grid,
    })
}

/// Slope of the indifference curve through a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MrsResult {
    /// −(∂U/∂x1)/(∂U/∂x2).
    Rate(f64),
    /// Both partials vanish: the point is on a flat region of the surface.
    PlateauUndefined,
    /// ∂U/∂x2 = 0 while ∂U/∂x1 ≠ 0: the indifference line is vertical.
    NoTradeoff,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MrsReport {
    pub result: MrsResult,
    /// Coordinates sitting on a breakpoint, evaluated with the right-hand rate.
    pub one_sided: Vec<usize>,
}

pub fn mrs(surface: &UtilitySurface, point: [f64; 2]) -> Result<MrsReport> {
    check_point(2, &point)?;
    let [(d1, m1), (d2, m2)] = surface.partials(point[0], point[1]);
    let one_sided = [m1, m2]
        .iter()
        .enumerate()
        .filter(|(_, m)| m.is_two_sided())
        .map(|(k, _)| k)
        .collect();
    let result = match (d1 == 0.0, d2 == 0.0) {
        (true, true) => MrsResult::PlateauUndefined,
        (false, true) => MrsResult::NoTradeoff,
        _ => MrsResult::Rate(-d1 / d2),
    };
    Ok(MrsReport { result, one_sided })
}

/// Whether no bundle within distance `epsilon` of `point` (staying
/// non-negative) has strictly higher equal-weight additive utility.
///
/// Utility is separable with positive weights, so an improving move exists
/// iff some single coordinate can improve on its own within the radius. Below
/// the RDA and on a decreasing segment III that is always possible; on the
/// plateau never; on the clamped floor only if the decreasing part of
/// segment III is closer than `epsilon`.
pub fn local_nonsatiation_violated(
    profiles: &[ResolvedProfile],
    params: &UtilityParams,
    point: &[f64],
    epsilon: f64,
) -> Result<bool> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::domain(format!("epsilon must be > 0, got {epsilon}")));
    }
    check_point(profiles.len(), point)?;
    params.validate()?;
    for (p, &x) in profiles.iter().zip(point) {
        p.check()?;
        let improvable = if x < p.rda {
            true
        } else {
            match (p.ul, params.decay_scale(p)?) {
                (Some(ul), Some(lambda)) if x > ul => match params.clamp {
                    ClampFloor::Unbounded => true,
                    ClampFloor::ClampAtZero => x - epsilon < ul + lambda,
                },
                _ => false,
            }
        };
        if improvable {
            return Ok(false);
        }
    }
    Ok(true)
}
