//! Distances between empirical laws, rate fitting and predicted exponents.

mod dictionary;
mod exponent;
mod law;
mod rate;

pub use dictionary::{weak_error, weak_error_paired, TestDictionary, TestFunction, WeakError, DICT_RADII, Z95};
pub use exponent::{theoretical_exponent, Regime, BOUNDARY_TOL};
pub use law::{tv_histogram, EmpiricalLaw, Histogram, TvEstimate, CLIP_QUANTILES};
pub use rate::{fit_rate, linear_fit, spearman, LinearFit, RateFit, RatePoint, Verdict, MIN_FIT_POINTS, NOISE_FLOOR, ROUNDOFF_FLOOR};
