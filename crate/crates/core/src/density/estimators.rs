//! Density, superdensity and upper-derivative estimates over a geometric
//! radius schedule, with trend verdicts standing in for limits as `r → 0`.

use serde::Serialize;
use thiserror::Error;

use crate::currents::PolyhedralCurrent;

use super::ball::{ball_mass, BallMassEstimate, BallOptions};
use super::mask::{And, Mask};

/// Number of trailing radii used for `Θ_*`, `Θ^*` and the slope fit.
pub const TAIL_LEN: usize = 6;
/// Number of trailing radii over which a monotone trend is required.
pub const TREND_LEN: usize = 4;
/// Log-log slope threshold separating a trend from a bounded sequence.
pub const SLOPE_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("invalid radius schedule: {0}")]
    Schedule(String),
    #[error("reference measure vanishes on every tail radius")]
    ZeroReference,
}

/// Radii `r₀, r₀·f, r₀·f², …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSchedule {
    pub r0: f64,
    pub factor: f64,
    pub count: usize,
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        Self {
            r0: 0.25,
            factor: 0.5,
            count: 12,
        }
    }
}

impl RadiusSchedule {
    pub fn new(r0: f64, factor: f64, count: usize) -> Result<Self, EstimatorError> {
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(EstimatorError::Schedule(format!(
                "r0 must be positive, got {r0}"
            )));
        }
        if !(factor > 0.0 && factor < 1.0) {
            return Err(EstimatorError::Schedule(format!(
                "factor must lie in (0,1), got {factor}"
            )));
        }
        if count == 0 {
            return Err(EstimatorError::Schedule("count must be at least 1".into()));
        }
        Ok(Self { r0, factor, count })
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.count)
            .map(|i| self.r0 * self.factor.powi(i as i32))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Vanishing,
    Bounded,
    Diverging,
    Inconclusive,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Vanishing => "vanishing",
            Trend::Bounded => "bounded",
            Trend::Diverging => "diverging",
            Trend::Inconclusive => "inconclusive",
        }
    }
}

/// One radius of a ratio sequence. `lower`/`upper` bound the ratio;
/// `skipped` marks radii where the ratio is undefined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioRow {
    pub radius: f64,
    pub lower: f64,
    pub upper: f64,
    pub skipped: bool,
}

impl RatioRow {
    pub fn mid(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Ratio sequence with tail statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub rows: Vec<RatioRow>,
    /// Smallest tail midpoint (stands in for the lower limit).
    pub theta_lower: f64,
    /// Largest tail midpoint (stands in for the upper limit).
    pub theta_upper: f64,
    /// Largest half-width of a tail interval, relative to its midpoint.
    pub slack: f64,
    /// Least-squares slope of `log ratio` against `log r` over the tail.
    pub slope: Option<f64>,
    pub verdict: Trend,
}

impl DensityReport {
    /// Summarizes rows ordered by decreasing radius.
    pub fn from_rows(rows: Vec<RatioRow>) -> Self {
        let start = rows.len().saturating_sub(TAIL_LEN);
        let tail: Vec<RatioRow> = rows[start..]
            .iter()
            .filter(|r| !r.skipped)
            .copied()
            .collect();
        if tail.is_empty() {
            return Self {
                rows,
                theta_lower: f64::NAN,
                theta_upper: f64::NAN,
                slack: f64::NAN,
                slope: None,
                verdict: Trend::Inconclusive,
            };
        }
        let theta_lower = tail.iter().map(RatioRow::mid).fold(f64::INFINITY, f64::min);
        let theta_upper = tail
            .iter()
            .map(RatioRow::mid)
            .fold(f64::NEG_INFINITY, f64::max);
        let slack = tail
            .iter()
            .map(|r| {
                if r.mid() > 0.0 {
                    0.5 * (r.upper - r.lower) / r.mid()
                } else {
                    0.0
                }
            })
            .fold(0.0, f64::max);
        let slope = log_log_slope(&tail);
        let verdict = classify(&tail, slope);
        Self {
            rows,
            theta_lower,
            theta_upper,
            slack,
            slope,
            verdict,
        }
    }
}

fn log_log_slope(tail: &[RatioRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = tail
        .iter()
        .filter(|r| r.mid() > 0.0)
        .map(|r| (r.radius.ln(), r.mid().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn classify(tail: &[RatioRow], slope: Option<f64>) -> Trend {
    if tail.iter().all(|r| r.upper == 0.0) {
        return Trend::Vanishing;
    }
    let trend = &tail[tail.len().saturating_sub(TREND_LEN)..];
    // interval-aware monotonicity as the radius shrinks
    let growing = trend.windows(2).all(|w| w[1].upper >= w[0].lower);
    let shrinking = trend.windows(2).all(|w| w[1].lower <= w[0].upper);
    let zero_tail = trend.iter().all(|r| r.upper == 0.0);
    match slope {
        _ if zero_tail && shrinking => Trend::Vanishing,
        Some(s) if s < -SLOPE_THRESHOLD && growing => Trend::Diverging,
        Some(s) if s > SLOPE_THRESHOLD && shrinking => Trend::Vanishing,
        Some(s) if s.abs() <= SLOPE_THRESHOLD => Trend::Bounded,
        _ => Trend::Inconclusive,
    }
}

/// A measure carried by a current and restricted to a mask.
#[derive(Clone, Copy)]
pub struct MeasureSpec<'a> {
    pub current: &'a PolyhedralCurrent,
    pub mask: &'a dyn Mask,
}

impl<'a> MeasureSpec<'a> {
    pub fn new(current: &'a PolyhedralCurrent, mask: &'a dyn Mask) -> Self {
        Self { current, mask }
    }

    pub fn ball(&self, x: &[f64], r: f64, opts: &BallOptions) -> BallMassEstimate {
        ball_mass(self.current, self.mask, x, r, opts)
    }

    /// Ball masses along the schedule.
    pub fn sweep(
        &self,
        x: &[f64],
        sched: &RadiusSchedule,
        opts: &BallOptions,
    ) -> Vec<(f64, BallMassEstimate)> {
        sched
            .radii()
            .into_iter()
            .map(|r| (r, self.ball(x, r, opts)))
            .collect()
    }
}

/// How a superdensity numerator is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "exponent")]
pub enum Normalization {
    /// `λ(B_r ∖ E) / (λ(B_r) · rʰ)`.
    BallMass(f64),
    /// `λ(B_r ∖ E) / rᵖ`.
    Power(f64),
}

/// `μ(B_r(x)) / (2r)ˢ` along the schedule.
pub fn density(
    mu: &MeasureSpec<'_>,
    x: &[f64],
    s: f64,
    sched: &RadiusSchedule,
    opts: &BallOptions,
) -> DensityReport {
    let rows = mu
        .sweep(x, sched, opts)
        .into_iter()
        .map(|(r, m)| {
            let scale = (2.0 * r).powf(s);
            RatioRow {
                radius: r,
                lower: m.lower / scale,
                upper: m.upper / scale,
                skipped: false,
            }
        })
        .collect();
    DensityReport::from_rows(rows)
}

/// Superdensity ratio of the set whose complement is `outside`, relative
/// to the measure `lambda`.
///
/// Under [`Normalization::BallMass`] radii where `λ(B_r)` may vanish are
/// skipped, except that when `λ(B_r)` is exactly zero on the whole tail the
/// point is reported as vanishing: a null neighbourhood makes every point a
/// superdensity point.
pub fn superdensity_ratio(
    lambda: &MeasureSpec<'_>,
    outside: &dyn Mask,
    x: &[f64],
    normalization: Normalization,
    sched: &RadiusSchedule,
    opts: &BallOptions,
) -> DensityReport {
    let restricted = And(lambda.mask, outside);
    let numer = MeasureSpec::new(lambda.current, &restricted);
    let mut rows = Vec::with_capacity(sched.count);
    let mut null_denominators = Vec::with_capacity(sched.count);
    for r in sched.radii() {
        let a = numer.ball(x, r, opts);
        let row = match normalization {
            Normalization::Power(p) => {
                let scale = r.powf(p);
                null_denominators.push(false);
                RatioRow {
                    radius: r,
                    lower: a.lower / scale,
                    upper: a.upper / scale,
                    skipped: false,
                }
            }
            Normalization::BallMass(h) => {
                let b = lambda.ball(x, r, opts);
                null_denominators.push(b.upper == 0.0);
                let scale = r.powf(h);
                if b.lower > 0.0 {
                    RatioRow {
                        radius: r,
                        lower: a.lower / (b.upper * scale),
                        upper: a.upper / (b.lower * scale),
                        skipped: false,
                    }
                } else {
                    RatioRow {
                        radius: r,
                        lower: 0.0,
                        upper: f64::INFINITY,
                        skipped: true,
                    }
                }
            }
        };
        rows.push(row);
    }
    let start = rows.len().saturating_sub(TAIL_LEN);
    if null_denominators[start..].iter().all(|&z| z) {
        for row in rows.iter_mut() {
            if row.skipped {
                *row = RatioRow {
                    radius: row.radius,
                    lower: 0.0,
                    upper: 0.0,
                    skipped: false,
                };
            }
        }
    }
    DensityReport::from_rows(rows)
}

/// Tail estimate of `limsup λ(B_r)/μ(B_r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivativeEstimate {
    pub rows: Vec<RatioRow>,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn upper_derivative(
    lambda: &MeasureSpec<'_>,
    mu: &MeasureSpec<'_>,
    x: &[f64],
    sched: &RadiusSchedule,
    opts: &BallOptions,
) -> Result<DerivativeEstimate, EstimatorError> {
    let mut rows = Vec::with_capacity(sched.count);
    for r in sched.radii() {
        let a = lambda.ball(x, r, opts);
        let b = mu.ball(x, r, opts);
        rows.push(if b.lower > 0.0 {
            RatioRow {
                radius: r,
                lower: a.lower / b.upper,
                upper: a.upper / b.lower,
                skipped: false,
            }
        } else {
            RatioRow {
                radius: r,
                lower: 0.0,
                upper: f64::INFINITY,
                skipped: true,
            }
        });
    }
    let start = rows.len().saturating_sub(TAIL_LEN);
    let tail: Vec<&RatioRow> = rows[start..].iter().filter(|r| !r.skipped).collect();
    if tail.is_empty() {
        return Err(EstimatorError::ZeroReference);
    }
    let estimate = tail
        .iter()
        .map(|r| r.mid())
        .fold(f64::NEG_INFINITY, f64::max);
    let lower = tail
        .iter()
        .map(|r| r.lower)
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = tail
        .iter()
        .map(|r| r.upper)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DerivativeEstimate {
        rows,
        estimate,
        lower,
        upper,
    })
}
