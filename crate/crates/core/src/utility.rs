//! Per-nutrient utility with three segments: deficit below the RDA, a flat
//! plateau between RDA and UL, and toxicity above the UL.
//!
//! Segment I uses `1 - (1 - x/rda)^p`, which is increasing and concave for
//! `p > 1`. Segment III uses `1 - ((x - ul)/lambda)^q`, decreasing and concave
//! for `q > 1`. Utility is a fraction of the physiological need covered, so it
//! never exceeds 1.

use std::fmt;

use crate::error::{Error, Result};
use crate::nutrient_db::ResolvedProfile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    /// Intake below the RDA.
    Deficit,
    /// RDA ≤ intake ≤ UL, or any intake at or above the RDA without a UL.
    Plateau,
    /// Intake above a defined UL.
    Excess,
}

impl Segment {
    pub fn label(self) -> &'static str {
        match self {
            Segment::Deficit => "I",
            Segment::Plateau => "II",
            Segment::Excess => "III",
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ClampFloor {
    /// Utility stops at 0 once segment III has used up the whole need.
    #[default]
    ClampAtZero,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    /// Segment I curvature exponent, > 1.
    pub p: f64,
    /// Segment III curvature exponent, > 1.
    pub q: f64,
    /// Segment III decay scale in canonical mg. `None` uses each nutrient's
    /// own plateau width `ul - rda`.
    pub lambda: Option<f64>,
    pub clamp: ClampFloor,
}

impl Default for UtilityParams {
    fn default() -> Self {
        UtilityParams {
            p: 2.0,
            q: 2.0,
            lambda: None,
            clamp: ClampFloor::ClampAtZero,
        }
    }
}

impl UtilityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::InvalidParams(format!("p must be > 1, got {}", self.p)));
        }
        if !(self.q.is_finite() && self.q > 1.0) {
            return Err(Error::InvalidParams(format!("q must be > 1, got {}", self.q)));
        }
        if let Some(lambda) = self.lambda {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::InvalidParams(format!("lambda must be > 0, got {lambda}")));
            }
        }
        Ok(())
    }

    /// Segment III decay scale in the profile's unit, `None` for type B.
    pub fn decay_scale(&self, profile: &ResolvedProfile) -> Result<Option<f64>> {
        let Some(ul) = profile.ul else {
            return Ok(None);
        };
        let lambda = match self.lambda {
            Some(mg) => profile.from_canonical(mg),
            None => ul - profile.rda,
        };
        if lambda > 0.0 && lambda.is_finite() {
            Ok(Some(lambda))
        } else {
            Err(Error::InvalidParams(format!(
                "{}: decay scale is zero (RDA equals UL); set lambda explicitly",
                profile.id
            )))
        }
    }
}

/// Fraction of the need covered, at most 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct UtilityValue(pub f64);

impl UtilityValue {
    pub fn fraction(self) -> f64 {
        self.0
    }

    pub fn percent(self) -> f64 {
        self.0 * 100.0
    }
}

/// Derivative of utility with respect to intake, per unit of the profile.
///
/// At a breakpoint the function has a kink and both one-sided rates are
/// returned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Marginal {
    Rate(f64),
    TwoSided { left: f64, right: f64 },
}

impl Marginal {
    pub fn left(self) -> f64 {
        match self {
            Marginal::Rate(r) => r,
            Marginal::TwoSided { left, .. } => left,
        }
    }

    pub fn right(self) -> f64 {
        match self {
            Marginal::Rate(r) => r,
            Marginal::TwoSided { right, .. } => right,
        }
    }

    pub fn rate(self) -> Option<f64> {
        match self {
            Marginal::Rate(r) => Some(r),
            Marginal::TwoSided { .. } => None,
        }
    }

    pub fn is_two_sided(self) -> bool {
        matches!(self, Marginal::TwoSided { .. })
    }
}

fn check_intake(intake: f64) -> Result<()> {
    if intake.is_finite() && intake >= 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("intake must be finite and non-negative, got {intake}")))
    }
}

pub fn segment_of(profile: &ResolvedProfile, intake: f64) -> Result<Segment> {
    check_intake(intake)?;
    profile.check()?;
    Ok(classify(profile, intake))
}

fn classify(profile: &ResolvedProfile, intake: f64) -> Segment {
    if intake < profile.rda {
        Segment::Deficit
    } else {
        match profile.ul {
            Some(ul) if intake > ul => Segment::Excess,
            _ => Segment::Plateau,
        }
    }
}

/// Utility and marginal utility at `intake`, one pass.
pub fn evaluate(profile: &ResolvedProfile, params: &UtilityParams, intake: f64) -> Result<(UtilityValue, Marginal)> {
    check_intake(intake)?;
    profile.check()?;
    params.validate()?;
    let lambda = params.decay_scale(profile)?;
    Ok(evaluate_unchecked(profile, params, lambda, intake))
}

pub(crate) fn evaluate_unchecked(
    profile: &ResolvedProfile,
    params: &UtilityParams,
    lambda: Option<f64>,
    x: f64,
) -> (UtilityValue, Marginal) {
    let rda = profile.rda;
    let deficit_rate = |x: f64| params.p / rda * (1.0 - x / rda).powf(params.p - 1.0);

    if x < rda {
        let u = 1.0 - (1.0 - x / rda).powf(params.p);
        return (UtilityValue(u), Marginal::Rate(deficit_rate(x)));
    }
    let (Some(ul), Some(lambda)) = (profile.ul, lambda) else {
        let m = if x == rda {
            Marginal::TwoSided {
                left: deficit_rate(rda),
                right: 0.0,
            }
        } else {
            Marginal::Rate(0.0)
        };
        return (UtilityValue(1.0), m);
    };
    let excess_rate = |x: f64| -params.q / lambda * ((x - ul) / lambda).powf(params.q - 1.0);

    if x <= ul {
        let m = if x == rda && x == ul {
            Marginal::TwoSided {
                left: deficit_rate(rda),
                right: excess_rate(ul),
            }
        } else if x == rda {
            Marginal::TwoSided {
                left: deficit_rate(rda),
                right: 0.0,
            }
        } else if x == ul {
            Marginal::TwoSided {
                left: 0.0,
                right: excess_rate(ul),
            }
        } else {
            Marginal::Rate(0.0)
        };
        return (UtilityValue(1.0), m);
    }

    let t = (x - ul) / lambda;
    let raw = 1.0 - t.powf(params.q);
    match params.clamp {
        ClampFloor::ClampAtZero if t > 1.0 => (UtilityValue(0.0), Marginal::Rate(0.0)),
        ClampFloor::ClampAtZero if t == 1.0 => (
            UtilityValue(0.0),
            Marginal::TwoSided {
                left: excess_rate(x),
                right: 0.0,
            },
        ),
        _ => (UtilityValue(raw), Marginal::Rate(excess_rate(x))),
    }
}

pub fn utility(profile: &ResolvedProfile, params: &UtilityParams, intake: f64) -> Result<UtilityValue> {
    evaluate(profile, params, intake).map(|(u, _)| u)
}

pub fn marginal_utility(profile: &ResolvedProfile, params: &UtilityParams, intake: f64) -> Result<Marginal> {
    evaluate(profile, params, intake).map(|(_, m)| m)
}

/// Intakes where the utility curve has a kink: RDA, UL and, when clamped,
/// the point where segment III reaches zero.
pub fn breakpoints(profile: &ResolvedProfile, params: &UtilityParams) -> Result<Vec<f64>> {
    let mut points = vec![profile.rda];
    if let (Some(ul), Some(lambda)) = (profile.ul, params.decay_scale(profile)?) {
        points.push(ul);
        if params.clamp == ClampFloor::ClampAtZero {
            points.push(ul + lambda);
        }
    }
    points.dedup();
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub intake: f64,
    pub utility: f64,
    pub marginal: Marginal,
}

/// `n` evenly spaced samples on `[0, x_max]`, plus the RDA and UL inserted as
/// extra points when they fall inside the range. Sorted by intake.
pub fn curve_sample(profile: &ResolvedProfile, params: &UtilityParams, x_max: f64, n: usize) -> Result<Vec<CurveSample>> {
    if n < 2 {
        return Err(Error::InvalidParams(format!("need at least 2 samples, got {n}")));
    }
    if !(x_max.is_finite() && x_max > 0.0) {
        return Err(Error::InvalidParams(format!("x_max must be > 0, got {x_max}")));
    }
    profile.check()?;
    params.validate()?;
    let lambda = params.decay_scale(profile)?;

    let mut xs = axis_with_breakpoints(x_max, n, [Some(profile.rda), profile.ul]);
    xs.sort_by(f64::total_cmp);
    Ok(xs
        .into_iter()
        .map(|x| {
            let (u, m) = evaluate_unchecked(profile, params, lambda, x);
            CurveSample {
                intake: x,
                utility: u.0,
                marginal: m,
            }
        })
        .collect())
}

/// Evenly spaced points on `[0, max]` followed by every breakpoint inside
/// the range. Unsorted; breakpoints are kept even when they coincide with a
/// grid point.
pub(crate) fn axis_with_breakpoints(max: f64, n: usize, extra: impl IntoIterator<Item = Option<f64>>) -> Vec<f64> {
    let step = max / (n - 1) as f64;
    let mut xs: Vec<f64> = (0..n).map(|i| if i == n - 1 { max } else { i as f64 * step }).collect();
    xs.extend(extra.into_iter().flatten().filter(|b| (0.0..=max).contains(b)));
    xs
}

/// `intake,utility,marginal` rows with six decimals. At a kink the right-hand
/// rate is written.
pub fn curve_csv(samples: &[CurveSample]) -> String {
    let mut out = String::from("intake,utility,marginal\n");
    for s in samples {
        out.push_str(&format!("{:.6},{:.6},{:.6}\n", s.intake, s.utility, s.marginal.right()));
    }
    out
}
