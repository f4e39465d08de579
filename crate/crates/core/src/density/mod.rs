//! Ball masses of polyhedral currents, tangency regions, and density
//! estimators.

mod ball;
mod estimators;
mod geometry;
mod lebesgue;
mod mask;
mod tangency;

pub use ball::{
    ball_mass, monte_carlo_ball_mass, BallMassEstimate, BallOptions, Tolerance, DEFAULT_DEPTH,
    DEFAULT_MAX_SPLITS, DEFAULT_REL_TOL,
};
pub use estimators::{
    density, superdensity_ratio, upper_derivative, DensityReport, DerivativeEstimate,
    EstimatorError, MeasureSpec, Normalization, RadiusSchedule, RatioRow, Trend, SLOPE_THRESHOLD,
    TAIL_LEN, TREND_LEN,
};
pub use geometry::{barycentric, distance_to_simplex};
pub use lebesgue::{cone_fraction, lebesgue_value};
pub use mask::{
    simplex_spans, And, AnnihilatorMask, CellView, Complement, Full, HalfSpace, Mask, Membership,
    SimplexSubset, TangencyMask,
};
pub use tangency::{classify_tangency, RegionMeasures, TangencyError, TangencyPartition};
